"""Identity checks, spectral checks and the suite runner.

Each identity tag pairs a left-hand side (the kernel in closed form) with a
right-hand side (the factorization integral by quadrature) and is evaluated
on a product grid of points; the residual reported is
``|LHS - RHS| / (1 + |LHS|)``.
"""

import csv
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import specfun as sf
from ._gauss import map_panels
from .hankelop import (
    carleman_rule,
    hs_norm,
    nystrom_kernel,
    nystrom_rule,
    nystrom_symbol,
    symbol_square,
    sym_eigs,
)
from .kernelzoo import (
    DEFAULT_RANGE,
    REGISTERED,
    KernelSpec,
    kernel_dsum,
    kernel_value,
    laplace_transform_check,
    make_kernel,
)
from .omega import (
    log_fn,
    loewner_matrix,
    neg_inv_square_fn,
    ode_residual,
    residue_matrix,
    sqrt_fn,
    sqrt_representation_integral,
)
from .quadrature import (
    OSCILLATORY_T,
    UnachievableTolerance,
    check_tolerance,
    graded_rule,
    plan_rule,
)
from .specfun import DecayProfile

IDENTITY_TAGS = (
    "AIRY_FACT",
    "LAGUERRE_2_6",
    "BESSEL_2_9_DSUM",
    "BESSEL_2_9_INT",
    "CARLEMAN_2_11",
    "MACDONALD_5_5",
    "BESSELJ_5_8",
    "WHITTAKER_5_15",
    "SQRT_5_13",
    "HERMITE_2_16",
    "LAPLACE_2_2",
)

DEFAULT_TOL = {
    "AIRY_FACT": 1e-8,
    "LAGUERRE_2_6": 1e-8,
    "BESSEL_2_9_DSUM": 1e-5,
    "BESSEL_2_9_INT": 1e-3,
    "CARLEMAN_2_11": 1e-10,
    "MACDONALD_5_5": 1e-7,
    "BESSELJ_5_8": 1e-7,
    "WHITTAKER_5_15": 1e-5,
    "SQRT_5_13": 1e-8,
    "HERMITE_2_16": 1e-6,
    "LAPLACE_2_2": 1e-8,
}

DEFAULT_CASES = {
    "AIRY_FACT": [{"s": 0.0}, {"s": 1.0}],
    "LAGUERRE_2_6": [{"n": n} for n in range(6)],
    "BESSEL_2_9_DSUM": [{}],
    "BESSEL_2_9_INT": [{}],
    "CARLEMAN_2_11": [{}],
    "MACDONALD_5_5": [{"nu": nu} for nu in (0.0, 0.25, 0.5, 0.75)],
    "BESSELJ_5_8": [{"nu": nu} for nu in (0.0, 0.5, 1.0)],
    "WHITTAKER_5_15": [
        {"kappa": 0.0, "nu": 0.25},
        {"kappa": -0.5, "nu": 0.25},
        {"kappa": -1.0, "nu": 0.0},
    ],
    "SQRT_5_13": [{}],
    "HERMITE_2_16": [{"m": 1, "n": 0}, {"m": 2, "n": 0}, {"m": 2, "n": 1}],
    "LAPLACE_2_2": [{"n": n, "lam": lam} for n in (0, 1, 2) for lam in (0.5, 1.0, 2.0)],
}

TAG_FLAVOR = {
    "AIRY_FACT": "additive",
    "LAGUERRE_2_6": "additive",
    "BESSEL_2_9_DSUM": "additive",
    "BESSEL_2_9_INT": "additive",
    "CARLEMAN_2_11": "additive",
    "MACDONALD_5_5": "multiplicative-outer",
    "BESSELJ_5_8": "multiplicative-inner",
    "WHITTAKER_5_15": "multiplicative-outer",
    "SQRT_5_13": "additive",
}

DIAGNOSTIC = {"BESSEL_2_9_INT", "HERMITE_2_16", "ANTICOMMUTATOR", "HS_BESSEL_TREND"}

HERMITE_S = (0.0, 0.5, 1.0)


class ConfigError(ValueError):
    """Bad suite configuration (exit status 2)."""


@dataclass(frozen=True)
class GridSpec:
    """Two interleaved geometric point sets on [a, b], n points each.

    x takes the even and y the odd points of geomspace(a, b, 2n), so no pair
    lies on the diagonal.
    """

    a: float
    b: float
    n: int = 20

    def __post_init__(self):
        if not (0 < self.a < self.b) or self.n < 1:
            raise ConfigError(f"bad grid {self.a},{self.b},{self.n}")

    @classmethod
    def parse(cls, text):
        try:
            a, b, n = text.split(",")
            return cls(float(a), float(b), int(n))
        except ValueError as exc:
            raise ConfigError(f"grid must be 'a,b,n', got {text!r}") from exc

    @classmethod
    def default(cls, flavor):
        a, b = DEFAULT_RANGE[flavor]
        return cls(a, b, 20)

    def points(self):
        g = np.geomspace(self.a, self.b, 2 * self.n)
        return g[0::2], g[1::2]

    def mesh(self):
        x, y = self.points()
        return np.meshgrid(x, y, indexing="ij")

    def as_dict(self):
        return {"a": self.a, "b": self.b, "n": self.n, "layout": "interleaved-geometric"}


@dataclass
class VerificationReport:
    identity: str
    params: object
    grid: dict
    max_abs_residual: float
    max_rel_residual: float
    tolerance: float
    passed: bool
    gating: bool
    wall_ms: float = 0.0
    details: dict = field(default_factory=dict)
    table: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "identity": self.identity,
            "params": self.params,
            "grid": self.grid,
            "max_abs_residual": self.max_abs_residual,
            "max_rel_residual": self.max_rel_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "gating": self.gating,
            "wall_ms": self.wall_ms,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# JSON with fixed float formatting
# ---------------------------------------------------------------------------


def _encode(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return format(v, ".17g")
        return json.dumps("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON: insertion-ordered keys, floats with 17 significant digits."""
    return _encode(obj) + "\n"


# ---------------------------------------------------------------------------
# Identity evaluators: each returns (lhs, rhs, details) on the mesh
# ---------------------------------------------------------------------------


def _sep_integral(fx, fy, w):
    """sum_k w_k fx[i, k] fy[j, k] for separable integrands."""
    return (fx * w[None, :]) @ fy.T


def _additive_factorization(k, X, Y, tol, rule):
    """int_0^inf <phi(x+t), phi(y+t)> dt by the planned rule."""
    rule = rule or plan_rule("additive", k.decay, tol=tol)
    x, y = X[:, 0], Y[0, :]
    t, w = rule.nodes, rule.weights
    cx = k.symbol.components(x[:, None] + t[None, :])
    cy = k.symbol.components(y[:, None] + t[None, :])
    rhs = sum(_sep_integral(cx[..., c], cy[..., c], w) for c in range(cx.shape[-1]))
    return rhs, rule


def _eval_airy_fact(case, X, Y, tol, rule):
    k = make_kernel(KernelSpec.of("airy", s=case["s"]))
    rhs, rule = _additive_factorization(k, X, Y, tol, rule)
    return kernel_value(k, X, Y), rhs, {"T": rule.T, "nodes": rule.size}


def _eval_laguerre(case, X, Y, tol, rule):
    k = make_kernel(KernelSpec.of("laguerre", n=case["n"]))
    rhs, rule = _additive_factorization(k, X, Y, tol, rule)
    # the displayed numerator u'(x)u(y) - u'(x)u(y) vanishes identically
    printed = np.max(np.abs(rhs) / (1.0 + np.abs(rhs)))
    return kernel_value(k, X, Y), rhs, {"T": rule.T, "nodes": rule.size, "printed_form_rel_residual": printed}


def _eval_carleman(case, X, Y, tol, rule):
    k = make_kernel("carleman")
    rhs, rule = _additive_factorization(k, X, Y, tol, rule)
    return kernel_value(k, X, Y), rhs, {"T": rule.T, "nodes": rule.size, "tail_bound": rule.tail_bound}


def _eval_bessel_dsum(case, X, Y, tol, rule):
    k = make_kernel("bessel_hard")
    analytic, numeric = kernel_dsum(k, X, Y)
    return numeric, analytic, {"form": "(d/dx + d/dy) W = -phi(x) phi(y)"}


def bessel_hard_integral(X, Y, T=OSCILLATORY_T, correct_tail=True):
    """int_0^T phi(x+t) phi(y+t) dt in r = sqrt(t), plus the asymptotic tail.

    The tail uses phi(x) ~ pi^{-1/2} x^{-3/4} cos(2 sqrt x - 3 pi/4);
    its slowly varying part (1/2pi) int_T^inf (x+t)^{-3/4} (y+t)^{-3/4}
    cos(2 sqrt(x+t) - 2 sqrt(y+t)) dt is integrated after t = T / q^2.
    """
    k = make_kernel("bessel_hard")
    x, y = X[:, 0], Y[0, :]
    R = math.sqrt(T)
    edges = np.concatenate([np.arange(0.0, math.floor(R)), [R]])
    r, w = map_panels(edges, 16)
    t = r * r
    w = 2.0 * r * w
    fx = k.symbol(x[:, None] + t[None, :])
    fy = k.symbol(y[:, None] + t[None, :])
    body = _sep_integral(fx, fy, w)
    if not correct_tail:
        return body, 0.0
    q, wq = map_panels(np.linspace(0.0, 1.0, 5), 24)
    tt = T / q**2
    jac = 2.0 * T / q**3
    xa = X[..., None] + tt
    ya = Y[..., None] + tt
    g = (xa * ya) ** -0.75 * np.cos(2.0 * np.sqrt(xa) - 2.0 * np.sqrt(ya)) / (2.0 * math.pi)
    tail = np.sum(g * jac * wq, axis=-1)
    return body + tail, tail


def _eval_bessel_int(case, X, Y, tol, rule):
    check_tolerance(DecayProfile("algebraic-oscillatory", (0.75, 2.0)), tol)
    k = make_kernel("bessel_hard")
    rhs, tail = bessel_hard_integral(X, Y)
    lhs = kernel_value(k, X, Y)
    bare = np.max(np.abs(lhs - (rhs - tail)) / (1.0 + np.abs(lhs)))
    return lhs, rhs, {"T": OSCILLATORY_T, "tail_policy": "asymptotic-correction",
                      "uncorrected_rel_residual": float(bare),
                      "max_tail_correction": float(np.max(np.abs(tail)))}


def _outer_rule(decay, tol, rule):
    return rule or plan_rule("multiplicative-outer", decay, tol=tol)


def _eval_macdonald(case, X, Y, tol, rule):
    nu = case["nu"]
    rx, ry = np.sqrt(X), np.sqrt(Y)
    kx, ky = sf.eval_macdonald_k(nu, 2.0 * rx), sf.eval_macdonald_k(nu, 2.0 * ry)
    lhs = (kx.value * ry * ky.derivative - rx * kx.derivative * ky.value) / (X - Y)
    # integrand K(2 sqrt(tx)) K(2 sqrt(ty)) decays like exp(-4 sqrt t)
    rule = _outer_rule(DecayProfile("sub-exponential-sqrt", (2.0, 0.0)), tol, rule)
    t, w = rule.nodes, rule.weights
    x, y = X[:, 0], Y[0, :]
    fx = sf.eval_macdonald_k(nu, 2.0 * np.sqrt(x[:, None] * t[None, :])).value
    fy = sf.eval_macdonald_k(nu, 2.0 * np.sqrt(y[:, None] * t[None, :])).value
    rhs = _sep_integral(fx, fy, w)
    # cross-check: the Omega-system kernel divided by sqrt(xy)
    k = make_kernel(KernelSpec.of("macdonald", nu=nu))
    wsys = kernel_value(k, X, Y) / np.sqrt(X * Y)
    return lhs, rhs, {"T": rule.T, "nodes": rule.size,
                      "system_kernel_max_abs_diff": float(np.max(np.abs(wsys - lhs)))}


def _eval_besselj(case, X, Y, tol, rule):
    nu = case["nu"]
    rx, ry = np.sqrt(X), np.sqrt(Y)
    jx, jy = sf.eval_bessel_j(nu, 2.0 * rx), sf.eval_bessel_j(nu, 2.0 * ry)
    lhs = (jx.value * ry * jy.derivative - rx * jx.derivative * jy.value) / (X - Y)
    rule = rule or graded_rule(0.0, 1.0, levels=24)
    t, w = rule.nodes, rule.weights
    x, y = X[:, 0], Y[0, :]
    fx = sf.eval_bessel_j(nu, 2.0 * np.sqrt(x[:, None] * t[None, :])).value
    fy = sf.eval_bessel_j(nu, 2.0 * np.sqrt(y[:, None] * t[None, :])).value
    rhs = _sep_integral(fx, fy, w)
    printed = -lhs
    k = make_kernel(KernelSpec.of("bessel_mult", nu=nu))
    wsys = kernel_value(k, X, Y) / np.sqrt(X * Y)
    return lhs, rhs, {
        "nodes": rule.size,
        "printed_orientation_rel_residual": float(np.max(np.abs(printed - rhs) / (1 + np.abs(printed)))),
        "system_kernel_max_abs_diff": float(np.max(np.abs(wsys - lhs))),
    }


def _whittaker_u(kappa, nu, x):
    rt = np.sqrt(x)
    w = sf.eval_whittaker_w(kappa, nu, 2.0 * rt)
    return w.value, w.derivative / rt


def _eval_whittaker(case, X, Y, tol, rule):
    kappa, nu = case["kappa"], case["nu"]
    ux, dux = _whittaker_u(kappa, nu, X)
    uy, duy = _whittaker_u(kappa, nu, Y)
    pref = (X * Y) ** 0.25
    lhs = pref * (Y * ux * duy - X * dux * uy) / (X - Y)
    printed = pref * (ux * duy - dux * uy) / (X - Y)
    decay = DecayProfile("sub-exponential-sqrt", (1.0, 0.5 * kappa))
    rule = _outer_rule(decay, tol, rule)
    s, w = rule.nodes, rule.weights
    x, y = X[:, 0], Y[0, :]
    fx = _whittaker_u(kappa, nu, x[:, None] * s[None, :])[0]
    fy = _whittaker_u(kappa, nu, y[:, None] * s[None, :])[0]
    i_half = _sep_integral(fx, fy, w / np.sqrt(s))
    i_one = _sep_integral(fx, fy, w / s)
    rhs = 0.25 * pref * i_half - 0.5 * kappa * pref / (np.sqrt(X) + np.sqrt(Y)) * i_one
    details = {
        "T": rule.T,
        "nodes": rule.size,
        "printed_form_rel_residual": float(np.max(np.abs(printed - rhs) / (1 + np.abs(printed)))),
    }
    if kappa != 0.0:
        # the uncollapsed double integral on a coarse sub-grid
        k = make_kernel(KernelSpec.of("whittaker", kappa=kappa, nu=nu))
        xs, ys = X[::5, ::5], Y[::5, ::5]
        g = k.symbol.gram_uncollapsed(xs[..., None] * s, ys[..., None] * s, nodes=12)
        dbl = np.sum(g * w / s, axis=-1)
        details["uncollapsed_max_abs_diff"] = float(np.max(np.abs(dbl - rhs[::5, ::5])))
    return lhs, rhs, details


def _eval_sqrt(case, X, Y, tol, rule):
    lhs = (np.sqrt(X) - np.sqrt(Y)) / (X - Y)
    rhs = np.vectorize(sqrt_representation_integral)(X, Y)
    return lhs, rhs, {"closed_form_max_abs_diff": float(np.max(np.abs(lhs - 1 / (np.sqrt(X) + np.sqrt(Y)))))}


EVALUATORS = {
    "AIRY_FACT": _eval_airy_fact,
    "LAGUERRE_2_6": _eval_laguerre,
    "BESSEL_2_9_DSUM": _eval_bessel_dsum,
    "BESSEL_2_9_INT": _eval_bessel_int,
    "CARLEMAN_2_11": _eval_carleman,
    "MACDONALD_5_5": _eval_macdonald,
    "BESSELJ_5_8": _eval_besselj,
    "WHITTAKER_5_15": _eval_whittaker,
    "SQRT_5_13": _eval_sqrt,
}


def hermite_ratios(m, n, s_values=HERMITE_S):
    """LHS and RHS of the discrete Hermite identity at each s, with their ratio."""
    rows = []
    for s in s_values:
        pm1, pn = sf.eval_hermite_fn(m + 1, s).value, sf.eval_hermite_fn(n, s).value
        pm, pn1 = sf.eval_hermite_fn(m, s).value, sf.eval_hermite_fn(n + 1, s).value
        lhs = (pm1 * pn - pm * pn1) / (m - n)
        rows.append((s, lhs, _hermite_tail(m, n, s), lhs / _hermite_tail(m, n, s)))
    return rows


def _hermite_tail(m, n, s):
    t, w = map_panels(np.linspace(s, s + 40.0, 21), 20)
    return float(np.sum(w * sf.eval_hermite_fn(m, t).value * sf.eval_hermite_fn(n, t).value))


def hermite_wronskian_residual(m, n, s_values=HERMITE_S):
    """Residual of int_s^inf phi_m phi_n = (sqrt(n+1) phi_m phi_{n+1} - sqrt(m+1) phi_{m+1} phi_n)(s) / (m - n).

    The left side is the Wronskian W(phi_m, phi_n) / (m - n), which follows
    from phi_k'' = (x^2/4 - k - 1/2) phi_k; the ladder relation
    phi_k' = x phi_k / 2 - sqrt(k+1) phi_{k+1} rewrites it in shifted indices.
    """
    worst = 0.0
    for s in s_values:
        h = {k: sf.eval_hermite_fn(k, s).value for k in {m, n, m + 1, n + 1}}
        lhs = (math.sqrt(n + 1) * h[m] * h[n + 1] - math.sqrt(m + 1) * h[m + 1] * h[n]) / (m - n)
        worst = max(worst, abs(lhs - _hermite_tail(m, n, s)))
    return worst


def _verify_hermite(cases, tol):
    spread, rel, table, per_case = 0.0, 0.0, [], []
    for case in cases:
        m, n = int(case["m"]), int(case["n"])
        if m == n:
            raise ConfigError("HERMITE_2_16 needs m != n")
        rows = hermite_ratios(m, n)
        ratios = [r[3] for r in rows]
        ref = ratios[0]
        spread = max(spread, max(ratios) - min(ratios))
        rel = max(rel, max(abs(r - ref) / (1.0 + abs(ref)) for r in ratios))
        per_case.append({"m": m, "n": n, "s": [r[0] for r in rows], "lhs": [r[1] for r in rows],
                         "rhs": [r[2] for r in rows], "ratio": ratios,
                         "wronskian_form_abs_residual": hermite_wronskian_residual(m, n)})
        table.extend({"m": m, "n": n, "s": r[0], "lhs": r[1], "rhs": r[2], "ratio": r[3]} for r in rows)
    details = {"metric": "spread of LHS/RHS over s", "cases": per_case}
    return spread, rel, details, table


def _run_cases(tag, cases, grid, rule, tol):
    if tag == "LAPLACE_2_2":
        abs_r = rel_r = 0.0
        table = []
        for case in cases:
            res, quad, closed = laplace_transform_check(int(case["n"]), float(case["lam"]))
            abs_r = max(abs_r, res)
            rel_r = max(rel_r, res / (1.0 + abs(quad)))
            table.append({"n": case["n"], "lam": case["lam"], "lhs": quad, "rhs": closed, "abs": res})
        return abs_r, rel_r, {}, table, {}
    if tag == "HERMITE_2_16":
        a, r, d, table = _verify_hermite(cases, tol)
        return a, r, d, table, {"s": list(HERMITE_S)}
    X, Y = grid.mesh()
    abs_r = rel_r = 0.0
    table, details = [], []
    for case in cases:
        lhs, rhs, det = EVALUATORS[tag](case, X, Y, 0.01 * tol, rule)
        err = np.abs(lhs - rhs)
        rel = err / (1.0 + np.abs(lhs))
        abs_r = max(abs_r, float(np.max(err)))
        rel_r = max(rel_r, float(np.max(rel)))
        details.append(dict(case, max_rel_residual=float(np.max(rel)), **det))
        for i, j in itertools.product(range(X.shape[0]), range(X.shape[1])):
            table.append(dict(case, x=X[i, j], y=Y[i, j], lhs=lhs[i, j], rhs=rhs[i, j],
                              abs=err[i, j], rel=rel[i, j]))
    return abs_r, rel_r, {"cases": details}, table, grid.as_dict()


def verify_identity(tag, params=None, grid=None, rule=None, tol=None, timing=False):
    """Check one identity over a parameter case (dict) or sweep (list of dicts)."""
    tag = tag.upper()
    if tag not in IDENTITY_TAGS:
        raise ConfigError(f"unknown identity {tag!r}; choose from {', '.join(IDENTITY_TAGS)}")
    cases = DEFAULT_CASES[tag] if params is None else params
    cases = [cases] if isinstance(cases, dict) else list(cases)
    tol = DEFAULT_TOL[tag] if tol is None else float(tol)
    start = time.perf_counter()
    if tag in TAG_FLAVOR:
        grid = grid or GridSpec.default(TAG_FLAVOR[tag])
        if rule is not None and tag != "BESSELJ_5_8" and rule.flavor != TAG_FLAVOR[tag]:
            raise ConfigError(f"rule flavor {rule.flavor} does not fit {tag}")
    check_tolerance(None, tol)
    abs_r, rel_r, details, table, grid_desc = _run_cases(tag, cases, grid, rule, tol)
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return VerificationReport(
        tag, cases, grid_desc, abs_r, rel_r, tol, bool(rel_r <= tol), tag not in DIAGNOSTIC,
        wall, details, table,
    )


# ---------------------------------------------------------------------------
# Spectral checks
# ---------------------------------------------------------------------------


def _spec(spec):
    return KernelSpec.parse(spec) if isinstance(spec, str) else spec


def verify_spectral_square(spec, nodes=100, tol=1e-6, top=10):
    """Eigenvalues of the W matrix against squared eigenvalues of the Gamma matrix.

    The error is normwise over the top ``top`` eigenvalues,
    max_k |lambda_k - mu_k^2| / max_k |mu_k^2|; per-eigenvalue relative errors
    are reported in the details.  Vector symbols are compared with the
    discretized Gamma^* Gamma instead.
    """
    spec = _spec(spec)
    k = make_kernel(spec)
    if not k.factorizable:
        raise ConfigError(f"{spec} has no Hankel symbol")
    rule = nystrom_rule(k, nodes)
    ew = sym_eigs(nystrom_kernel(k, rule)).eigenvalues
    if k.symbol.scalar:
        eg = sym_eigs(nystrom_symbol(k.symbol, rule)).eigenvalues
        sq = np.sort(eg**2)[::-1]
        compared = "squared Gamma eigenvalues"
    else:
        sq = sym_eigs(symbol_square(k.symbol, rule)).eigenvalues
        eg = None
        compared = "Gamma^* Gamma eigenvalues"
    m = min(top, ew.size)
    diff = np.abs(ew[:m] - sq[:m])
    scale = float(np.max(np.abs(sq[:m])))
    rel = float(np.max(diff) / scale)
    min_w = float(ew.min())
    conditions = {"top_rel_error_ok": rel <= tol, "min_eigenvalue_ok": min_w >= -1e-10}
    details = {
        "compared_with": compared,
        "rule": rule.describe(),
        "top_W": ew[:m].tolist(),
        "top_symbol_squared": sq[:m].tolist(),
        "per_eigenvalue_rel_error": (diff / np.maximum(np.abs(sq[:m]), 1e-300)).tolist(),
        "min_W_eigenvalue": min_w,
        "conditions": conditions,
    }
    return VerificationReport(
        "SPECTRAL_SQUARE", {"kernel": str(spec), "nodes": nodes}, {"nodes": nodes},
        float(np.max(diff)), rel, tol, all(conditions.values()), True, 0.0, details,
    )


def carleman_spectra(nodes=(50, 100, 200)):
    k = make_kernel("carleman")
    tops, rows = [], []
    ok = True
    worst = 0.0
    for n in nodes:
        rule = carleman_rule(n)
        eg = sym_eigs(nystrom_symbol(k.symbol, rule)).eigenvalues
        ew = sym_eigs(nystrom_kernel(k, rule)).eigenvalues
        g_ok = eg.min() >= -1e-8 and eg.max() <= math.pi + 1e-6
        tops.append(float(eg.max()))
        rows.append({"nodes": n, "gamma_min": float(eg.min()), "gamma_max": float(eg.max()),
                     "W_min": float(ew.min()), "W_max": float(ew.max()),
                     "gamma_hist": np.histogram(eg, bins=8, range=(0.0, math.pi))[0].tolist()})
        worst = max(worst, eg.max() - math.pi, -eg.min() - 1e-8)
        if n == max(nodes):
            ok &= bool(g_ok and ew.min() >= -1e-8 and ew.max() <= math.pi**2 + 1e-3)
    monotone = all(b >= a for a, b in zip(tops, tops[1:]))
    ok &= monotone
    details = {"runs": rows, "largest_gamma_nondecreasing": monotone}
    return VerificationReport(
        "CARLEMAN_SPECTRA", {"nodes": list(nodes)}, {}, float(max(worst, 0.0)), float(max(worst, 0.0)),
        1e-6, bool(ok), True, 0.0, details,
    )


def verify_nonfactorization(p, points):
    """Mixed signature of [x_j + x_k] and of the parabolic dsum matrix.

    The dsum matrix is -(1/4)(x_j + x_k) phi_p(x_j) phi_p(x_k); it is
    congruent to [x_j + x_k] wherever phi_p does not vanish.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size < 2 or np.unique(pts).size < 2:
        raise ValueError("need at least 2 distinct points")
    if np.any(pts <= 0):
        raise ValueError("points must be positive")
    s = pts[:, None] + pts[None, :]
    ev = np.linalg.eigvalsh(s)[::-1]
    phi = sf.eval_hermite_fn(int(p), pts).value
    d = -0.25 * s * phi[:, None] * phi[None, :]
    evd = np.linalg.eigvalsh(d)[::-1]
    mixed = bool(ev.max() > 0 and ev.min() < 0)
    details = {
        "sum_matrix_eigenvalues": ev.tolist(),
        "dsum_matrix_eigenvalues": evd.tolist(),
        "dsum_mixed": bool(evd.max() > 1e-14 and evd.min() < -1e-14),
    }
    return VerificationReport(
        "NONFACTORIZATION", {"p": int(p), "points": pts.tolist()}, {}, 0.0, 0.0, 0.0, mixed, True,
        0.0, details,
    )


def fit_anticommutator(n, nodes=80):
    """Least-squares c in H ~ c (G_n G_{n+1} + G_{n+1} G_n) over Nystrom matrix entries.

    H is the parabolic kernel with p = n on (0, inf); G_k is the Hankel
    matrix of the Hermite function phi_k on the same rule.
    """
    if not 0 <= n <= 10:
        raise ValueError("n must lie in [0, 10]")
    k = make_kernel(KernelSpec.of("parabolic", p=n))
    rule = plan_rule("additive", k.decay, tol=1e-12, nodes=nodes)
    H = nystrom_kernel(k, rule).matrix
    g0 = nystrom_symbol(lambda x: sf.eval_hermite_fn(n, x).value, rule).matrix
    g1 = nystrom_symbol(lambda x: sf.eval_hermite_fn(n + 1, x).value, rule).matrix
    A = g0 @ g1 + g1 @ g0
    return _fit(H, A, {"n": n, "nodes": nodes})


def _fit(H, A, params):
    aa = float(np.sum(A * A))
    if aa == 0.0:
        return {"params": params, "c": None, "residual": None, "defined": False}
    c = float(np.sum(H * A) / aa)
    hn = float(np.linalg.norm(H))
    res = float(np.linalg.norm(H - c * A) / hn) if hn else float(np.linalg.norm(c * A))
    return {"params": params, "c": c, "residual": res, "defined": True}


# ---------------------------------------------------------------------------
# Remaining acceptance checks
# ---------------------------------------------------------------------------


def ode_suite(h=1e-4, tol=1e-6):
    rows, worst = [], 0.0
    for spec in REGISTERED:
        k = make_kernel(spec)
        lo, hi = DEFAULT_RANGE[k.flavor]
        r = max(ode_residual(k.system, k.v, x, h) for x in np.geomspace(lo, hi, 20))
        rows.append({"kernel": str(spec), "max_residual": r})
        worst = max(worst, r)
    return VerificationReport("ODE_RESIDUALS", {"h": h, "points": 20}, {}, worst, worst, tol,
                              worst <= tol, True, 0.0, {"systems": rows})


def dsum_suite(tol=1e-5):
    rows, worst = [], 0.0
    for spec in REGISTERED:
        k = make_kernel(spec)
        X, Y = GridSpec(*DEFAULT_RANGE[k.flavor], 10).mesh()
        a, n = kernel_dsum(k, X, Y)
        r = float(np.max(np.abs(a - n)))
        rows.append({"kernel": str(spec), "max_abs_diff": r})
        worst = max(worst, r)
    return VerificationReport("DSUM_FAMILIES", {"grid": "10x10"}, {}, worst, worst, tol,
                              worst <= tol, True, 0.0, {"kernels": rows})


def residue_suite(nus=(0.0, 0.25, 0.5), tol=1e-12):
    rows, worst = [], 0.0
    for nu in nus:
        k = make_kernel(KernelSpec.of("macdonald", nu=nu))
        a, eig = residue_matrix(k.system)
        want = np.array([(1 + nu) / 2, (1 - nu) / 2])
        err = float(np.max(np.abs(np.sort(np.real(eig))[::-1] - want)) + np.max(np.abs(np.imag(eig))))
        rows.append({"nu": nu, "eigenvalues": np.real(eig).tolist(), "error": err})
        worst = max(worst, err)
    return VerificationReport("RESIDUE_EIGS", {"nu": list(nus)}, {}, worst, worst, tol,
                              worst <= tol, True, 0.0, {"cases": rows})


def loewner_suite(seed=7, sets=100):
    rng = np.random.default_rng(seed)
    rep = verify_nonfactorization(2, [1.0, 2.0])
    ev = np.array(rep.details["sum_matrix_eigenvalues"])
    exact = np.array([3 + math.sqrt(10), 3 - math.sqrt(10)])
    err = float(np.max(np.abs(ev - exact)))
    mins = {"sqrt": math.inf, "log": math.inf}
    for _ in range(sets):
        pts = np.sort(rng.uniform(0.05, 20.0, 5))
        mins["sqrt"] = min(mins["sqrt"], loewner_matrix(sqrt_fn, pts).min_eigenvalue())
        mins["log"] = min(mins["log"], loewner_matrix(log_fn, pts).min_eigenvalue())
    neg = loewner_matrix(neg_inv_square_fn, [1.0, 2.0]).min_eigenvalue()
    conditions = {
        "sum_matrix_exact": err <= 1e-12,
        "sum_matrix_mixed": rep.passed,
        "sqrt_psd": mins["sqrt"] >= -1e-10,
        "log_psd": mins["log"] >= -1e-10,
        "neg_inv_square_indefinite": neg <= -1e-3,
    }
    details = {"sum_matrix_eigenvalues": ev.tolist(), "loewner_min_eig": mins,
               "neg_inv_square_min_eig": neg, "conditions": conditions}
    return VerificationReport("NONFACTORIZATION", {"points": [1.0, 2.0], "random_sets": sets, "seed": seed},
                              {}, err, err, 1e-12, all(conditions.values()), True, 0.0, details)


def hs_airy_suite(tol=1e-4):
    k = make_kernel("airy")
    h = hs_norm(k.symbol)
    fro = nystrom_symbol(k.symbol, nystrom_rule(k, 200)).frobenius()
    rel = abs(fro - h.value) / h.value
    return VerificationReport("HS_AIRY", {"nodes": 200}, {}, abs(fro - h.value), rel, tol, rel <= tol,
                              True, 0.0, {"integral": h.value, "frobenius": fro, "T": h.T})


def hs_bessel_trend(Ts=(1e2, 1e4, 1e6)):
    k = make_kernel("bessel_hard")
    vals = [hs_norm(k.symbol, T).value for T in Ts]
    inc = all(b > a for a, b in zip(vals, vals[1:]))
    return VerificationReport("HS_BESSEL_TREND", {"T": list(Ts)}, {}, 0.0, 0.0, 0.0, inc, False, 0.0,
                              {"truncated_norms": vals, "increasing": inc})


def specfun_suite():
    """Dual-path agreement, closed forms and derivative consistency."""
    rng = np.random.default_rng(11)
    out = {}
    pos = np.geomspace(0.05, 30.0, 25)
    xa = np.concatenate([-pos[::-1], pos])
    a, b = sf.eval_airy(xa), sf.airy_series(xa)
    out["airy_dual"] = float(max(np.max(np.abs(a.value - b.value)), np.max(np.abs(a.derivative - b.derivative))))
    z = np.geomspace(0.05, 200.0, 50)
    worst = 0.0
    for nu in (0.0, 0.25, 0.5, 0.75):
        k1 = sf.eval_macdonald_k(nu, z)
        worst = max(worst, float(np.max(np.abs(k1.value - sf.macdonald_k_sinh(nu, z)) / np.abs(k1.value))))
        worst = max(worst, float(np.max(np.abs(k1.derivative - sf.macdonald_k_derivative_recurrence(nu, z))
                                        / np.abs(k1.derivative))))
    out["macdonald_dual_rel"] = worst
    xj = np.geomspace(0.01, 40.0, 50)
    out["bessel_j_dual"] = float(max(
        np.max(np.abs(sf.eval_bessel_j(nu, xj).value - sf.bessel_j_integral(nu, xj).value))
        for nu in (0.0, 0.5, 1.0, 2.0)))
    xl = np.geomspace(0.01, 60.0, 50)
    out["laguerre_dual_rel"] = float(max(
        np.max(np.abs(sf.eval_laguerre_assoc(n, xl).value - sf.laguerre_assoc_explicit(n, xl))
               / np.maximum(1.0, np.abs(sf.laguerre_assoc_explicit(n, xl)))) for n in (5, 20, 50)))
    xh = np.linspace(-8.0, 8.0, 50)
    out["hermite_dual"] = float(max(
        np.max(np.abs(sf.eval_hermite_fn(n, xh).value - sf.hermite_fn_explicit(n, xh))) for n in (3, 10, 30)))
    zk = np.array([0.05, 0.5, 1.0, 5.0, 20.0])
    out["k_half_closed_rel"] = float(np.max(np.abs(
        sf.eval_macdonald_k(0.5, zk).value / (np.sqrt(np.pi / (2 * zk)) * np.exp(-zk)) - 1.0)))
    zw = np.geomspace(0.1, 50.0, 30)
    out["whittaker_cross"] = float(max(np.max(np.abs(
        sf.eval_whittaker_w(0.0, nu, zw).value - np.sqrt(zw / np.pi) * sf.eval_macdonald_k(nu, zw / 2).value))
        for nu in (0.0, 0.25, 0.5, 0.75)))
    h = 1e-5
    fns = [
        (lambda x: sf.eval_airy(x), (-10.0, 10.0)),
        (lambda x: sf.eval_bessel_j(1.0, x), (0.1, 40.0)),
        (lambda x: sf.eval_macdonald_k(0.25, x), (0.1, 30.0)),
        (lambda x: sf.eval_laguerre_assoc(6, x), (0.1, 20.0)),
        (lambda x: sf.eval_hermite_fn(5, x), (-6.0, 6.0)),
        (lambda x: sf.eval_whittaker_w(-0.5, 0.25, x), (0.5, 40.0)),
    ]
    fd = 0.0
    for fn, (lo, hi) in fns:
        x = rng.uniform(lo, hi, 20)
        d = (fn(x + h).value - fn(x - h).value) / (2 * h)
        ex = fn(x).derivative
        scale = np.maximum(np.abs(ex), 1e-3 * np.max(np.abs(ex)))
        fd = max(fd, float(np.max(np.abs(d - ex) / scale)))
    out["derivative_fd_rel"] = fd
    limits = {"airy_dual": 1e-9, "macdonald_dual_rel": 1e-9, "bessel_j_dual": 1e-9,
              "laguerre_dual_rel": 1e-9, "hermite_dual": 1e-9, "k_half_closed_rel": 1e-10,
              "whittaker_cross": 1e-8, "derivative_fd_rel": 1e-6}
    conditions = {k: out[k] <= limits[k] for k in limits}
    ratio = max(out[k] / limits[k] for k in limits)
    return VerificationReport("SPECFUN_CERT", {}, {}, ratio, ratio, 1.0, all(conditions.values()), True, 0.0,
                              {"errors": out, "limits": limits, "conditions": conditions})


def anticommutator_suite(ns=(0, 1, 2, 3), grids=(80, 120), floor=1e-12):
    """Fit c for each n and compare the fit residual between the two grids.

    Residuals below ``floor`` are rounding noise; they count as stable.
    """
    rows, stable = [], True
    for n in ns:
        a, b = fit_anticommutator(n, grids[0]), fit_anticommutator(n, grids[1])
        ra, rb = a["residual"], b["residual"]
        ok = abs(ra - rb) <= 0.1 * max(rb, floor)
        stable &= ok
        rows.append({"n": n, "c": [a["c"], b["c"]], "residual": [ra, rb], "stable": ok})
    return VerificationReport("ANTICOMMUTATOR", {"n": list(ns), "nodes": list(grids)}, {}, 0.0, 0.0, 0.1,
                              bool(stable), False, 0.0, {"fits": rows, "quoted_constant": 0.5})


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def _spectral_pair():
    reps = [verify_spectral_square("airy:s=0", 100), verify_spectral_square("laguerre:n=2", 100)]
    return _merge("SPECTRAL_SQUARE", reps)


def _merge(name, reps):
    return VerificationReport(
        name, [r.params for r in reps], {}, max(r.max_abs_residual for r in reps),
        max(r.max_rel_residual for r in reps), reps[0].tolerance, all(r.passed for r in reps),
        all(r.gating for r in reps), 0.0, {"runs": [r.details for r in reps]},
    )


SUITE = (
    [(tag, None) for tag in IDENTITY_TAGS]
    + [
        ("ODE_RESIDUALS", ode_suite),
        ("DSUM_FAMILIES", dsum_suite),
        ("SPECTRAL_SQUARE", _spectral_pair),
        ("CARLEMAN_SPECTRA", carleman_spectra),
        ("RESIDUE_EIGS", residue_suite),
        ("NONFACTORIZATION", loewner_suite),
        ("HS_AIRY", hs_airy_suite),
        ("HS_BESSEL_TREND", hs_bessel_trend),
        ("SPECFUN_CERT", specfun_suite),
        ("ANTICOMMUTATOR", anticommutator_suite),
    ]
)

SUITE_NAMES = tuple(name for name, _ in SUITE)


def load_config(path=None, **overrides):
    cfg = {"only": None, "tolerances": {}, "timing": False}
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    for k, v in overrides.items():
        if k not in cfg:
            raise ConfigError(f"unknown config key {k!r}")
        if v is not None:
            cfg[k] = dict(cfg[k], **v) if k == "tolerances" else v
    for tag in cfg.get("tolerances", {}):
        if tag not in IDENTITY_TAGS:
            raise ConfigError(f"tolerance given for unknown identity {tag!r}")
    return cfg


def select(only):
    if not only:
        return list(SUITE)
    if isinstance(only, str):
        only = only.split(",")
    keys = [o.strip().lower() for o in only if o.strip()]
    chosen = [(n, f) for n, f in SUITE if any(k in n.lower() for k in keys)]
    if not chosen:
        raise ConfigError(f"--only {','.join(only)} matches no check")
    return chosen


def run_suite(config=None):
    """Run the checks in fixed order; return (summary dict, reports, exit code).

    Planner refusals (unachievable tolerance) raise; callers map them to exit 2.
    """
    cfg = load_config(**(config or {}))
    reports = []
    for name, fn in select(cfg.get("only")):
        start = time.perf_counter()
        if fn is None:
            rep = verify_identity(name, tol=cfg["tolerances"].get(name))
        else:
            rep = fn()
        rep.gating = name not in DIAGNOSTIC
        if cfg.get("timing"):
            rep.wall_ms = (time.perf_counter() - start) * 1e3
        reports.append(rep)
    gating_ok = all(r.passed for r in reports if r.gating)
    summary = {
        "checks": len(reports),
        "gating_pass": gating_ok,
        "failed_gating": [r.identity for r in reports if r.gating and not r.passed],
        "failed_diagnostic": [r.identity for r in reports if not r.gating and not r.passed],
        "reports": [r.to_dict() for r in reports],
    }
    return summary, reports, 0 if gating_ok else 1


def write_tables(reports, directory):
    os.makedirs(directory, exist_ok=True)
    written = []
    for r in reports:
        if not r.table:
            continue
        path = os.path.join(directory, f"{r.identity}.csv")
        keys = list(r.table[0].keys())
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(keys)
            for row in r.table:
                out.writerow([format(float(row[k]), ".17g") if isinstance(row[k], (float, np.floating))
                              else row[k] for k in keys])
        written.append(path)
    return written


__all__ = [
    "IDENTITY_TAGS",
    "DEFAULT_TOL",
    "SUITE_NAMES",
    "GridSpec",
    "VerificationReport",
    "ConfigError",
    "UnachievableTolerance",
    "verify_identity",
    "verify_spectral_square",
    "verify_nonfactorization",
    "fit_anticommutator",
    "hermite_ratios",
    "hermite_wronskian_residual",
    "bessel_hard_integral",
    "carleman_spectra",
    "load_config",
    "run_suite",
    "dumps",
    "write_tables",
]
