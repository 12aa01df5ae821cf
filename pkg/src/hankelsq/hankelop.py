"""Hankel operators on quadrature grids, Nystrom matrices and their spectra."""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._gauss import map_panels
from .kernelzoo import KernelInstance, _raw_value
from .omega import HankelSymbol
from .quadrature import (
    OSCILLATORY_T,
    QuadratureRule,
    UnachievableTolerance,
    carleman_rule,
    geometric_rule,
    plan_rule,
)

__all__ = [
    "DiscretizedOperator",
    "Spectrum",
    "HSNorm",
    "QuadratureRule",
    "UnachievableTolerance",
    "plan_rule",
    "carleman_rule",
    "nystrom_rule",
    "apply_additive",
    "apply_multiplicative",
    "exp_change_of_variables",
    "hs_norm",
    "nystrom_kernel",
    "nystrom_symbol",
    "nystrom_symbol_components",
    "symbol_square",
    "sym_eigs",
    "dump_csv",
]

SYMMETRY_TOL = 1e-13
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    matrix: np.ndarray
    rule: QuadratureRule
    provenance: str

    @property
    def size(self):
        return self.matrix.shape[0]

    def frobenius(self):
        return float(np.linalg.norm(self.matrix))


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual: float


class HSNorm(NamedTuple):
    value: float
    T: float
    tail_bound: float


def _as_fn(symbol):
    if isinstance(symbol, HankelSymbol):
        return symbol.components if not symbol.scalar else symbol
    return symbol


def _sampled(f, rule):
    return f(rule.nodes) if callable(f) else np.asarray(f, dtype=float)


def _check_flavor(rule, *flavors):
    if rule.flavor not in flavors:
        raise ValueError(f"rule flavor {rule.flavor!r} does not match {flavors}")


def apply_additive(phi, f, rule, points=None):
    """(Gamma_phi f)(s) = sum_j w_j phi(s + t_j) f(t_j).

    ``points`` defaults to the rule's nodes.  A vector symbol returns one
    output column per component.
    """
    _check_flavor(rule, "additive")
    s = rule.nodes if points is None else np.asarray(points, dtype=float)
    fv = _sampled(f, rule)
    vals = _as_fn(phi)(s[:, None] + rule.nodes[None, :])
    wf = rule.weights * fv
    if vals.ndim == 3:
        return np.einsum("ijc,j->ic", vals, wf)
    return vals @ wf


def apply_multiplicative(psi, g, rule, points=None):
    """(Gamma_psi g)(x) = sum_j w_j psi(x y_j) g(y_j) / y_j on (1, inf) or (0, 1)."""
    _check_flavor(rule, "multiplicative-outer", "multiplicative-inner")
    x = rule.nodes if points is None else np.asarray(points, dtype=float)
    gv = _sampled(g, rule)
    vals = _as_fn(psi)(x[:, None] * rule.nodes[None, :])
    wg = rule.measure_weights * gv
    if vals.ndim == 3:
        return np.einsum("ijc,j->ic", vals, wg)
    return vals @ wg


def exp_change_of_variables(psi, g, flavor="multiplicative-outer"):
    """Additive data (phi, f) equivalent to a multiplicative pair under y = e^{+-t}.

    On (1, inf) with y = e^t and x = e^s, (Gamma_psi g)(e^s) equals
    (Gamma_phi f)(s) with phi(r) = psi(e^r), f(t) = g(e^t); on (0, 1) the
    signs flip.
    """
    sign = 1.0 if flavor == "multiplicative-outer" else -1.0
    fn = _as_fn(psi)
    return (lambda r: fn(np.exp(sign * r))), (lambda t: g(np.exp(sign * t)))


def nystrom_rule(spec_or_kernel, nodes):
    """Default Nystrom rule with ``nodes`` points for a kernel family."""
    k = spec_or_kernel
    family = k.spec.family
    if family == "carleman":
        return carleman_rule(nodes)
    if family == "bessel_hard":
        raise UnachievableTolerance("the hard-edge symbol is not Hilbert-Schmidt; no Nystrom rule")
    decay = k.decay if family != "parabolic" else k.decay
    return plan_rule(k.flavor, decay, tol=1e-12, nodes=nodes)


def nystrom_kernel(k, rule):
    """Symmetric Nystrom matrix sqrt(w_i) W(x_i, x_j) sqrt(w_j); dy/y folded in for
    multiplicative rules."""
    if not isinstance(k, KernelInstance):
        raise TypeError("nystrom_kernel needs a KernelInstance")
    if rule.flavor != k.flavor:
        raise ValueError(f"rule flavor {rule.flavor!r} does not match kernel flavor {k.flavor!r}")
    x = rule.nodes
    k.check_domain(x)
    sw = np.sqrt(rule.measure_weights)
    W = _raw_value(k, x[:, None], x[None, :])
    return DiscretizedOperator(sw[:, None] * W * sw[None, :], rule, "kernel")


def nystrom_symbol_components(phi, rule):
    """Array (dim, N, N): one symmetric Nystrom matrix per symbol component."""
    x = rule.nodes
    if rule.flavor == "additive":
        arg = x[:, None] + x[None, :]
    else:
        arg = x[:, None] * x[None, :]
    sw = np.sqrt(rule.measure_weights)
    comps = phi.components(arg) if isinstance(phi, HankelSymbol) else np.asarray(phi(arg))[..., None]
    comps = np.moveaxis(comps, -1, 0)
    return sw[None, :, None] * comps * sw[None, None, :]


def nystrom_symbol(phi, rule):
    """sqrt(w_i) phi(x_i + x_j) sqrt(w_j), or sqrt(w_i w_j) psi(x_i x_j) / sqrt(x_i x_j).

    Scalar symbols only; use :func:`nystrom_symbol_components` or
    :func:`symbol_square` for vector symbols.
    """
    if isinstance(phi, HankelSymbol) and not phi.scalar:
        raise ValueError("vector symbol: use nystrom_symbol_components or symbol_square")
    m = nystrom_symbol_components(phi, rule)[0]
    return DiscretizedOperator(m, rule, "symbol")


def symbol_square(phi, rule):
    """Matrix of Gamma_phi^* Gamma_phi on the rule: sum over components (and continuum).

    The continuum part is summed with its closed-form t-overlap, so entry
    (i, j) is sqrt(w_i w_j) sum_k w_k <phi(x_i o x_k), phi(x_k o x_j)> with o
    the flavor's group operation.
    """
    comps = nystrom_symbol_components(phi, rule)
    out = np.einsum("cik,ckj->ij", comps, comps)
    if isinstance(phi, HankelSymbol) and phi.has_continuum:
        x = rule.nodes
        arg = x[:, None] + x[None, :] if rule.flavor == "additive" else x[:, None] * x[None, :]
        mw = rule.measure_weights
        sw = np.sqrt(mw)
        amp = phi.amp(arg)
        ov = phi.overlap(arg[:, :, None], arg[None, :, :])  # (i, k, j)
        out = out + np.einsum("ik,k,ikj,kj->ij", amp, mw, ov, amp) * sw[:, None] * sw[None, :]
    out = 0.5 * (out + out.T)
    return DiscretizedOperator(out, rule, "symbol-product")


def sym_eigs(op):
    """Full spectrum of a symmetric matrix, eigenvalues descending.

    Uses LAPACK's symmetric solver through numpy; the residual
    max ||M q - lambda q|| is returned and checked against 1e-10 ||M||.
    """
    m = op.matrix if isinstance(op, DiscretizedOperator) else np.asarray(op, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("sym_eigs needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("sym_eigs: matrix is not symmetric")
    lam, q = np.linalg.eigh(m)
    lam, q = lam[::-1], q[:, ::-1]
    res = float(np.max(np.linalg.norm(m @ q - q * lam, axis=0), initial=0.0))
    norm = float(np.linalg.norm(m, 2)) if m.size else 0.0
    if res > RESIDUAL_TOL * max(norm, 1e-300):
        raise ArithmeticError(f"eigen-residual {res:.3g} exceeds contract")
    return Spectrum(lam, q, res)


def _hs_sqrt_variable(phi, T, per_unit=16):
    """int_0^T s |phi(s)|^2 ds with s = r^2, panels of unit length in r."""
    R = math.sqrt(T)
    edges = np.concatenate([[0.0], np.arange(1.0, math.ceil(R)), [R]])
    r, w = map_panels(edges, per_unit)
    val = np.asarray(_as_fn(phi)(r * r))
    sq = val**2 if val.ndim == 1 else np.sum(val**2, axis=-1)
    return float(np.sum(w * 2.0 * r**3 * sq))


def hs_norm(phi, T=None, decay=None):
    """Truncated Hilbert-Schmidt norm sqrt(int_0^T s |phi(s)|^2 ds) of Gamma_phi.

    Multiplicative symbols are mapped by x = e^s first.  The tail bound is
    read off the decay profile: for a non-HS symbol it is reported as +inf.
    """
    flavor = phi.flavor if isinstance(phi, HankelSymbol) else "additive"
    decay = decay or (phi.decay if isinstance(phi, HankelSymbol) else None)
    fn = _as_fn(phi)
    if flavor == "multiplicative-inner":
        raise ValueError("use the additive form e^{-s} for (0, 1) symbols")
    if flavor == "multiplicative-outer":
        base = fn
        fn = lambda s: base(np.exp(s))  # noqa: E731
    if decay is not None and decay.kind == "algebraic-oscillatory":
        T = T or OSCILLATORY_T
        value = _hs_sqrt_variable(fn, T)
        # s |phi(s)|^2 ~ s^{1-2p}: p <= 1 means the integral diverges
        p = decay.rates[0]
        bound = math.inf if p <= 1.0 else T ** (2.0 - 2.0 * p) / (2.0 * p - 2.0)
        return HSNorm(math.sqrt(value), T, bound)
    if T is None:
        if decay is None:
            raise ValueError("hs_norm needs T or a decay profile")
        rule = plan_rule("additive", decay, tol=1e-13)
    else:
        rule = geometric_rule("additive", min(1e-3, T / 2), T, ratio=1.5, per_panel=20, first=0.0)
    val = np.asarray(fn(rule.nodes))
    sq = val**2 if val.ndim == 1 else np.sum(val**2, axis=-1)
    value = float(np.sum(rule.weights * rule.nodes * sq))
    bound = rule.tail_bound if T is None else float("nan")
    return HSNorm(math.sqrt(value), rule.T, bound)


def dump_csv(prefix, op=None, spectrum=None, rule=None):
    """Write ``prefix``_rule.csv, _matrix.csv and _eigs.csv as available."""
    written = []
    rule = rule or (op.rule if op is not None else None)
    if rule is not None:
        rule.to_csv(f"{prefix}_rule.csv")
        written.append(f"{prefix}_rule.csv")
    if op is not None:
        path = f"{prefix}_matrix.csv"
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            for row in op.matrix:
                out.writerow([repr(float(v)) for v in row])
        written.append(path)
    if spectrum is not None:
        path = f"{prefix}_eigs.csv"
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["index", "eigenvalue"])
            for i, lam in enumerate(spectrum.eigenvalues):
                out.writerow([i, repr(float(lam))])
        written.append(path)
    return written
