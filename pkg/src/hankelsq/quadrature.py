"""Panel Gauss-Legendre rules and the truncation planner.

Every rule is a list of finite panels with an affinely mapped Gauss-Legendre
rule on each; semi-infinite integrals are truncated at ``T`` where the
symbol's :class:`DecayProfile` says the neglected tail is below tolerance.
The planner refuses (``UnachievableTolerance``) rather than return a rule it
cannot stand behind.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._gauss import gauss_legendre
from .specfun import DecayProfile

FLAVORS = ("additive", "multiplicative-outer", "multiplicative-inner")
TAIL_POLICIES = ("none", "bound-only", "asymptotic-correction")

# below this, rounding in the kernels themselves dominates any quadrature
ROUNDING_FLOOR = 1e-13
# truncation point used for algebraic-oscillatory symbols
OSCILLATORY_T = 1e6
# error left after the leading-order asymptotic tail correction at OSCILLATORY_T
OSCILLATORY_FLOOR = 1.0 / OSCILLATORY_T


class UnachievableTolerance(ValueError):
    """The planner cannot meet the requested tolerance for this decay class."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    flavor: str
    panels: tuple
    nodes: np.ndarray
    weights: np.ndarray
    T: float
    tail: str = "none"
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.tail not in TAIL_POLICIES:
            raise ValueError(f"unknown tail policy {self.tail!r}")

    @classmethod
    def from_panels(cls, flavor, panels, T=None, tail="none", tail_bound=0.0):
        """Build a rule from ``(a, b, n)`` triples."""
        nodes, weights = [], []
        clean = []
        for a, b, n in panels:
            a, b, n = float(a), float(b), int(n)
            if not b > a:
                raise ValueError(f"empty panel [{a}, {b}]")
            x, w = gauss_legendre(n)
            half = 0.5 * (b - a)
            nodes.append(0.5 * (a + b) + half * x)
            weights.append(half * w)
            clean.append((a, b, n))
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        T = clean[-1][1] if T is None else float(T)
        return cls(flavor, tuple(clean), nodes, weights, T, tail, float(tail_bound))

    @property
    def size(self):
        return self.nodes.size

    @property
    def measure_weights(self):
        """Weights for the flavor's measure: dx, or dx/x for multiplicative rules."""
        if self.flavor == "additive":
            return self.weights
        return self.weights / self.nodes

    def integrate(self, values, axis=-1):
        """Sum of weights * values along ``axis`` (plain dx weights)."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def describe(self):
        return {
            "flavor": self.flavor,
            "panels": len(self.panels),
            "nodes": int(self.size),
            "lower": self.panels[0][0],
            "T": self.T,
            "tail": self.tail,
            "tail_bound": self.tail_bound,
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["node", "weight"])
            for x, w in zip(self.nodes, self.weights):
                out.writerow([repr(float(x)), repr(float(w))])


def _split(total, parts):
    base, extra = divmod(total, parts)
    return [base + (k < extra) for k in range(parts)]


def _nodes_per_panel(nodes, per_panel):
    parts = max(1, math.ceil(nodes / per_panel))
    return _split(nodes, parts)


def solve_decay(decay, level, start=1.0):
    """Smallest T (to 1%) with ``decay.envelope(T) <= level``, past the envelope's peak."""
    if decay.algebraic:
        p = decay.rates[0]
        if p <= 0:
            raise UnachievableTolerance(f"envelope x^{-p} does not decay")
        return max(start, level ** (-1.0 / p))
    env = decay.envelope
    lo = max(start, 1e-3)
    hi = 2.0 * lo
    while env(hi) > level or env(hi) > env(hi / 2.0):
        hi *= 2.0
        if hi > 1e12:
            raise UnachievableTolerance(f"{decay.kind} envelope never falls below {level:g}")
    lo = hi / 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if env(mid) > level:
            lo = mid
        else:
            hi = mid
        if hi - lo < 0.01 * hi:
            break
    return hi


def check_tolerance(decay, tol):
    if tol < ROUNDING_FLOOR:
        raise UnachievableTolerance(
            f"tolerance {tol:g} is below the rounding floor {ROUNDING_FLOOR:g}"
        )
    if decay is not None and decay.kind == "algebraic-oscillatory" and tol < OSCILLATORY_FLOOR:
        raise UnachievableTolerance(
            f"tolerance {tol:g} is below {OSCILLATORY_FLOOR:g}, the accuracy of the asymptotic "
            f"tail correction at T = {OSCILLATORY_T:g}"
        )


def uniform_rule(flavor, a, b, nodes, per_panel=20):
    counts = _nodes_per_panel(nodes, per_panel)
    edges = np.linspace(a, b, len(counts) + 1)
    return QuadratureRule.from_panels(flavor, zip(edges[:-1], edges[1:], counts))


def geometric_rule(flavor, a, b, ratio=2.0, per_panel=16, first=None, nodes=None, **kw):
    """Panels whose edges grow geometrically from ``a`` to ``b``.

    ``first`` adds an initial panel [first, a] (use 0 to reach the origin).
    With ``nodes`` given, the ratio is chosen to spread that many nodes.
    """
    if nodes is not None:
        counts = _nodes_per_panel(nodes, per_panel)
        k = len(counts) - (first is not None)
        edges = np.geomspace(a, b, max(k, 1) + 1)
    else:
        k = max(1, math.ceil(math.log(b / a) / math.log(ratio)))
        edges = np.geomspace(a, b, k + 1)
        counts = [per_panel] * (k + (first is not None))
    if first is not None:
        edges = np.concatenate([[first], edges])
    return QuadratureRule.from_panels(flavor, zip(edges[:-1], edges[1:], counts), **kw)


def graded_rule(a, b, nodes=None, sigma=0.25, levels=None, per_panel=16, flavor=None):
    """Panels refined geometrically towards the left endpoint ``a``.

    Edges are a, a + (b-a) sigma^(L-1), ..., a + (b-a) sigma, b, which resolves
    integrable algebraic singularities at ``a`` at an exponential rate.
    """
    flavor = flavor or "multiplicative-inner"
    if nodes is not None:
        counts = _nodes_per_panel(nodes, per_panel)
        levels = len(counts)
    else:
        levels = levels or 24
        counts = [per_panel] * levels
    inner = a + (b - a) * sigma ** np.arange(levels - 1, 0, -1, dtype=float)
    edges = np.concatenate([[a], inner, [b]])
    return QuadratureRule.from_panels(flavor, zip(edges[:-1], edges[1:], counts))


def plan_rule(flavor, decay=None, tol=1e-10, nodes=None, lower=None, per_panel=None):
    """Choose panels and truncation for one flavor and decay class.

    ``tol`` bounds the neglected tail of an integrand comparable to the
    square of the symbol.  ``nodes`` fixes the total node count (Nystrom use);
    otherwise panels are sized for the tolerance.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    if flavor == "multiplicative-inner":
        # bounded interval: no tail, only the rounding floor applies
        check_tolerance(None, tol)
        return graded_rule(0.0, 1.0, nodes=nodes, per_panel=per_panel or 16)
    check_tolerance(decay, tol)

    level = math.sqrt(tol) * 1e-3
    if flavor == "additive":
        lo = 0.0 if lower is None else lower
        if decay is None:
            raise ValueError("additive rules need a decay profile")
        if decay.kind == "algebraic":
            # symbol-product tail ~ T^(1-2p); pick T so the bound sits below tol
            p = decay.rates[0]
            T = (1e-3 * tol * (2 * p - 1)) ** (-1.0 / (2 * p - 1))
            a = max(lo, 1e-8)
            rule = geometric_rule(
                flavor, a, T, ratio=2.0, per_panel=per_panel or 16, first=lo, nodes=nodes,
                tail="bound-only", tail_bound=T ** (1 - 2 * p) / (2 * p - 1),
            )
            return rule
        if decay.kind == "algebraic-oscillatory":
            raise ValueError("oscillatory symbols use a dedicated sqrt-variable rule")
        T = lo + solve_decay(decay, level)
        if nodes is None:
            width = 2.0
            k = max(1, math.ceil((T - lo) / width))
            edges = np.linspace(lo, T, k + 1)
            counts = [per_panel or 16] * k
            env = decay.envelope(T) ** 2
            return QuadratureRule.from_panels(
                flavor, zip(edges[:-1], edges[1:], counts), tail="bound-only", tail_bound=float(env)
            )
        rule = uniform_rule(flavor, lo, T, nodes, per_panel or 20)
        return QuadratureRule(
            flavor, rule.panels, rule.nodes, rule.weights, rule.T, "bound-only",
            float(decay.envelope(T) ** 2),
        )

    # multiplicative-outer on (lower, T) with lower >= 1
    lo = 1.0 if lower is None else lower
    if decay is None:
        raise ValueError("multiplicative rules need a decay profile")
    if decay.algebraic:
        p = decay.rates[0]
        T = (1e-3 * tol * 2 * p) ** (-1.0 / (2 * p))
    else:
        T = solve_decay(decay, level, start=lo)
    bound = float(decay.envelope(T) ** 2)
    return geometric_rule(
        flavor, lo, T, ratio=1.5, per_panel=per_panel or (20 if nodes else 16), nodes=nodes,
        tail="bound-only", tail_bound=bound,
    )


def carleman_rule(nodes, per_panel=10, log_width=1.0):
    """Geometric panels symmetric about 1 in log scale, e-fold per panel.

    The covered range e^{-L}..e^{L} grows with the node count, which is what
    the scale-invariant kernel 1/(x+y) needs for its spectrum to fill [0, pi].
    """
    counts = _nodes_per_panel(nodes, per_panel)
    half = 0.5 * log_width * len(counts)
    edges = np.exp(np.linspace(-half, half, len(counts) + 1))
    return QuadratureRule.from_panels(
        "additive", zip(edges[:-1], edges[1:], counts), tail="bound-only",
        tail_bound=float(math.exp(-half)),
    )


def semi_infinite_algebraic(f, p, tol=1e-14, lower_scale=1.0, upper_scale=1.0, per_panel=16):
    """Integral of ``f`` over (0, inf) when |f(t)| <= C t^(-p) for large t (p > 1).

    ``lower_scale`` and ``upper_scale`` mark where ``f`` changes character
    (e.g. the smallest and largest of the problem's parameters); panels are
    geometric from 1e-12 lower_scale to the truncation point chosen so the
    tail bound ``T^(1-p) / (p-1)`` lies below ``tol``.
    """
    T = upper_scale * max(1.0, (tol * (p - 1)) ** (-1.0 / (p - 1)))
    rule = geometric_rule("additive", 1e-12 * lower_scale, T, ratio=2.0, per_panel=per_panel, first=0.0)
    return float(np.sum(rule.weights * f(rule.nodes)))


def decay_for(kind, *rates):
    return DecayProfile(kind, tuple(rates))
