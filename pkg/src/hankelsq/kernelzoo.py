"""The catalogue of integrable kernels and their Hankel symbols.

Each family is wired from a solution vector v of an Omega system:

    W(x, y) = p(x, y) <J v(x), v(y)> / (x - y),   p = (xy)**beta,

with ``beta = 0`` for additive systems and ``beta = alpha + 1/2`` for
multiplicative ones.  For n = 1 and v = (f, g) the numerator is
``f(x) g(y) - g(x) f(y)``.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from .omega import HankelSymbol, OmegaSystem, SolutionVector, derive_symbol_additive
from .omega import derive_symbol_multiplicative
from .quadrature import plan_rule
from .specfun import DecayProfile

DIAGONAL_DELTA = 1e-6

FLAVOR_OF = {
    "airy": "additive",
    "laguerre": "additive",
    "bessel_hard": "additive",
    "carleman": "additive",
    "parabolic": "additive",
    "macdonald": "multiplicative-outer",
    "bessel_mult": "multiplicative-inner",
    "whittaker": "multiplicative-outer",
}

DEFAULTS = {
    "airy": {"s": 0.0},
    "laguerre": {"n": 0},
    "bessel_hard": {},
    "carleman": {},
    "parabolic": {"p": 0},
    "macdonald": {"nu": 0.0},
    "bessel_mult": {"nu": 0.0},
    "whittaker": {"kappa": 0.0, "nu": 0.0},
}

INTEGER_KEYS = {"n", "p"}

_SPEC_RE = re.compile(r"^([a-z_]+)(?::([a-z]+=[^,=:]+(?:,[a-z]+=[^,=:]+)*))?$")


class KernelSpecError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FLAVOR_OF:
            raise KernelSpecError(f"unknown kernel family {self.family!r}")
        merged = dict(DEFAULTS[self.family])
        for key, val in dict(self.params).items():
            if key not in merged:
                raise KernelSpecError(f"{self.family} takes no parameter {key!r}")
            merged[key] = val
        clean = {}
        for key, val in merged.items():
            if key in INTEGER_KEYS:
                if float(val) != int(float(val)):
                    raise KernelSpecError(f"{key} must be an integer, got {val!r}")
                clean[key] = int(float(val))
            else:
                clean[key] = float(val)
        _check_ranges(self.family, clean)
        object.__setattr__(self, "params", tuple(sorted(clean.items())))

    @classmethod
    def of(cls, family, **params):
        return cls(family.lower(), tuple(params.items()))

    @classmethod
    def parse(cls, text):
        """Parse ``family(:key=value(,key=value)*)?``, e.g. ``whittaker:kappa=-0.5,nu=0.25``."""
        m = _SPEC_RE.match(text.strip().lower())
        if not m:
            raise KernelSpecError(f"malformed kernel spec {text!r}")
        family, body = m.group(1), m.group(2)
        params = {}
        if body:
            for item in body.split(","):
                key, val = item.split("=")
                if key in params:
                    raise KernelSpecError(f"duplicate key {key!r}")
                try:
                    params[key] = float(val)
                except ValueError:
                    raise KernelSpecError(f"value {val!r} for {key} is not a decimal") from None
        return cls(family, tuple(params.items()))

    def format(self):
        if not self.params:
            return self.family
        body = ",".join(f"{k}={_fmt(v)}" for k, v in self.params)
        return f"{self.family}:{body}"

    __str__ = format

    @property
    def flavor(self):
        return FLAVOR_OF[self.family]

    def __getitem__(self, key):
        return dict(self.params)[key]

    def as_dict(self):
        return dict(self.params)


def _check_ranges(family, p):
    def need(cond, msg):
        if not cond:
            raise KernelSpecError(f"{family}: {msg}")

    if family == "airy":
        need(p["s"] >= 0.0, "s must be >= 0")
    elif family == "laguerre":
        need(0 <= p["n"] <= 50, "n must lie in [0, 50]")
    elif family == "parabolic":
        need(0 <= p["p"] <= 30, "p must lie in [0, 30]")
    elif family == "macdonald":
        need(0.0 <= p["nu"] < 1.0, "nu must lie in [0, 1)")
    elif family == "bessel_mult":
        need(0.0 <= p["nu"] <= 2.0, "nu must lie in [0, 2]")
    elif family == "whittaker":
        need(p["kappa"] <= 0.0, "kappa must be <= 0")
        need(0.0 <= p["nu"] < 1.0, "nu must lie in [0, 1)")


# ---------------------------------------------------------------------------
# Solution vectors
# ---------------------------------------------------------------------------


def _stack(a, b):
    return np.stack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)], axis=-1)


def _masked(fn, x, limit):
    """Evaluate ``fn`` where x <= limit and return zeros (underflow) beyond it."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    ok = flat <= limit
    a = np.zeros_like(flat)
    b = np.zeros_like(flat)
    if ok.any():
        a[ok], b[ok] = fn(flat[ok])
    return a.reshape(x.shape), b.reshape(x.shape)


def _airy_v(s):
    def v(x):
        arg = np.asarray(x, dtype=float) + s
        a, b = _masked(lambda t: tuple(sf.eval_airy(t)), arg, 100.0)
        return _stack(a, b)

    return v


def _laguerre_v(n):
    def parts(x):
        lag = sf.eval_laguerre_assoc(n, x)
        e = np.exp(-x / 2.0)
        u = x * e * lag.value
        du = e * ((1.0 - x / 2.0) * lag.value + x * lag.derivative)
        return u, du

    return lambda x: _stack(*_masked(parts, x, 1400.0))


def _bessel_hard_v(x):
    x = np.asarray(x, dtype=float)
    r = 2.0 * np.sqrt(x)
    return _stack(np.sqrt(x) * sf.eval_bessel_j(1.0, r).value, sf.eval_bessel_j(0.0, r).value)


def _carleman_v(x):
    x = np.asarray(x, dtype=float)
    return _stack(np.log(x), np.ones_like(x))


def _parabolic_v(p):
    def v(x):
        h = sf.eval_hermite_fn(p, np.asarray(x, dtype=float))
        return _stack(h.value, h.derivative)

    return v


def _macdonald_v(nu):
    def parts(x):
        rt = np.sqrt(x)
        k = sf.eval_macdonald_k(nu, 2.0 * rt)
        return rt * k.value, 1.5 * rt * k.value + x * k.derivative

    # K_nu(2 sqrt x) underflows once 2 sqrt x > 700
    return lambda x: _stack(*_masked(parts, x, 122500.0))


def _bessel_mult_v(nu):
    def v(x):
        x = np.asarray(x, dtype=float)
        rt = np.sqrt(x)
        j = sf.eval_bessel_j(nu, 2.0 * rt)
        return _stack(rt * j.value, 1.5 * rt * j.value + x * j.derivative)

    return v


def _whittaker_v(kappa, nu):
    def parts(x):
        rt = np.sqrt(x)
        w = sf.eval_whittaker_w(kappa, nu, 2.0 * rt)
        return w.value, w.value + rt * w.derivative

    return lambda x: _stack(*_masked(parts, x, 700.0**2))


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
E22 = np.array([[0.0, 0.0], [0.0, 1.0]])


def _bessel_omega0(nu):
    return np.array([[-2.0 + 0.25 * (nu * nu - 1.0), 1.5], [1.5, -1.0]])


def system_for(spec):
    f, p = spec.family, spec.as_dict()
    if f == "airy":
        return OmegaSystem(E11, np.diag([p["s"], -1.0]))
    if f == "laguerre":
        return OmegaSystem(np.zeros((2, 2)), np.diag([0.25, -1.0]), omega_m1=np.diag([-(p["n"] + 1.0), 0.0]))
    if f == "bessel_hard":
        return OmegaSystem(np.zeros((2, 2)), np.diag([0.0, -1.0]), omega_m1=-E11)
    if f == "carleman":
        return OmegaSystem(np.zeros((2, 2)), np.zeros((2, 2)), omega_m1=-E22)
    if f == "parabolic":
        return OmegaSystem(
            np.zeros((2, 2)), np.diag([-p["p"] - 0.5, -1.0]), omega2=np.diag([0.25, 0.0])
        )
    if f == "macdonald":
        return OmegaSystem(E11, _bessel_omega0(p["nu"]), alpha=-0.5, flavor="multiplicative-outer")
    if f == "bessel_mult":
        return OmegaSystem(-E11, _bessel_omega0(p["nu"]), alpha=-0.5, flavor="multiplicative-inner")
    if f == "whittaker":
        k, nu = p["kappa"], p["nu"]
        om0 = 0.25 * np.array([[-(0.25 - nu * nu) - 6.0, 5.0], [5.0, -4.0]])
        return OmegaSystem(
            0.25 * E11, om0, omega_half=-0.5 * k * E11, alpha=-0.25, flavor="multiplicative-outer"
        )
    raise KernelSpecError(f"no system for {f}")


def solution_for(spec):
    f, p = spec.family, spec.as_dict()
    table = {
        "airy": lambda: _airy_v(p["s"]),
        "laguerre": lambda: _laguerre_v(p["n"]),
        "bessel_hard": lambda: _bessel_hard_v,
        "carleman": lambda: _carleman_v,
        "parabolic": lambda: _parabolic_v(p["p"]),
        "macdonald": lambda: _macdonald_v(p["nu"]),
        "bessel_mult": lambda: _bessel_mult_v(p["nu"]),
        "whittaker": lambda: _whittaker_v(p["kappa"], p["nu"]),
    }
    return table[f]()


def decay_for(spec):
    f, p = spec.family, spec.as_dict()
    if f == "airy":
        return DecayProfile("super-exponential", (2.0 / 3.0, 1.5, p["s"]))
    if f == "laguerre":
        return DecayProfile("exponential", (0.5, float(p["n"])))
    if f == "bessel_hard":
        return DecayProfile("algebraic-oscillatory", (0.75, 2.0))
    if f == "carleman":
        return DecayProfile("algebraic", (1.0,))
    if f == "parabolic":
        return DecayProfile("super-exponential", (0.25, 2.0, 0.0))
    if f == "macdonald":
        return DecayProfile("sub-exponential-sqrt", (2.0, 0.25))
    if f == "bessel_mult":
        # the symbol only lives on (0, 1); growth x^{1/4} beyond is irrelevant
        return DecayProfile("algebraic-oscillatory", (-0.25, 2.0))
    k = p["kappa"]
    return DecayProfile("sub-exponential-sqrt", (1.0, 0.25 + 0.5 * k))


def _whittaker_symbol(spec, v, decay):
    """(1/2) x^{1/4} u(x) plus sqrt(-kappa / 2 pi) x^{1/4} u(x) phi_t(x), phi_t(x) = t^{1/4} / (t + x).

    The t-overlap of phi_t is pi / (sqrt x + sqrt y).
    """
    kappa = spec["kappa"]

    def scalar_part(x):
        return 0.5 * (x**0.25 * v(x)[..., 0])[..., None]

    if kappa == 0.0:
        return HankelSymbol(scalar_part, "multiplicative-outer", decay, 1, label=str(spec))
    c = math.sqrt(-kappa / (2.0 * math.pi))

    def amp(x):
        return c * x**0.25 * v(x)[..., 0]

    def profile(x, t):
        return t**0.25 / (t + x)

    def overlap(x, y):
        return math.pi / (np.sqrt(x) + np.sqrt(y))

    return HankelSymbol(
        scalar_part, "multiplicative-outer", decay, 1, amp, profile, overlap, label=str(spec)
    )


# ---------------------------------------------------------------------------
# Kernel instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelInstance:
    spec: KernelSpec
    system: OmegaSystem
    v: SolutionVector
    symbol: HankelSymbol
    decay: DecayProfile

    @property
    def flavor(self):
        return self.spec.flavor

    @property
    def beta(self):
        return self.system.prefactor_power

    @property
    def factorizable(self):
        return self.symbol is not None

    def prefactor(self, x, y):
        if self.beta == 0.0:
            return np.ones(np.broadcast(x, y).shape)
        return (np.asarray(x) * np.asarray(y)) ** self.beta

    def check_domain(self, *args):
        for a in args:
            a = np.asarray(a)
            if self.flavor == "multiplicative-outer":
                ok = np.all(a >= 1.0)
            elif self.flavor == "multiplicative-inner":
                ok = np.all((a > 0.0) & (a <= 1.0))
            else:
                ok = np.all(a > 0.0)
            if not ok:
                lo, hi = {"additive": ("0", "inf"), "multiplicative-outer": ("1", "inf"),
                          "multiplicative-inner": ("0", "1")}[self.flavor]
                raise sf.DomainError(f"{self.spec}: arguments must lie in ({lo}, {hi})")

    def diagonal(self, x):
        """W(x, x) = -p(x, x) <J v(x), v'(x)>, written through the ODE as -p <v, Omega v> / x^m."""
        x = np.asarray(x, dtype=float)
        vx = self.v(x)
        om = self.system.coefficient_array(x)
        q = np.einsum("...i,...ij,...j->...", vx, om, vx)
        if self.system.multiplicative:
            return -(x ** (2.0 * self.beta)) * q / x
        return -q

    def __call__(self, x, y):
        return kernel_value(self, x, y)


def make_kernel(spec):
    """Assemble system, solution, symbol and decay metadata for ``spec``."""
    if isinstance(spec, str):
        spec = KernelSpec.parse(spec)
    sys = system_for(spec)
    v = SolutionVector(solution_for(spec), system=sys)
    decay = decay_for(spec)
    if spec.family == "parabolic":
        symbol = None
    elif spec.family == "whittaker":
        symbol = _whittaker_symbol(spec, v, decay)
    elif sys.multiplicative:
        symbol = derive_symbol_multiplicative(sys, v, decay, label=str(spec))
    else:
        symbol = derive_symbol_additive(sys, v, decay, label=str(spec))
    return KernelInstance(spec, sys, v, symbol, decay)


def _raw_value(k, x, y):
    """Kernel without domain checks; symmetric bit for bit in (x, y)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    lo = np.minimum(x, y).ravel()
    hi = np.maximum(x, y).ravel()
    near = (hi - lo) <= DIAGONAL_DELTA * np.maximum(1.0, np.abs(hi))
    out = np.empty_like(lo)
    far = ~near
    if far.any():
        a, b = lo[far], hi[far]
        va, vb = k.v(a), k.v(b)
        n = k.system.n
        num = np.sum(va[..., :n] * vb[..., n:] - va[..., n:] * vb[..., :n], axis=-1)
        out[far] = k.prefactor(a, b) * num / (a - b)
    if near.any():
        # W is even about the midpoint, so this is the first-order Taylor branch
        out[near] = k.diagonal(0.5 * (lo[near] + hi[near]))
    return out.reshape(shape) if shape else float(out[0])


def kernel_value(k, x, y):
    """W(x, y), with the limit branch within 1e-6 (relative) of the diagonal."""
    k.check_domain(x, y)
    return _raw_value(k, x, y)


def kernel_dsum(k, x, y):
    """(analytic, numeric) for (d/dx + d/dy) W, or (x d/dx + y d/dy) W.

    The analytic side is -p(x, y) <DeltaOmega(x, y) v(x), v(y)> with DeltaOmega
    the divided difference of Omega; the numeric side differentiates the
    kernel along the diagonal direction by central differences.
    """
    k.check_domain(x, y)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    d = k.system.divided_difference(x, y)
    q = np.einsum("...i,...ij,...j->...", k.v(x), d, k.v(y))
    analytic = -k.prefactor(x, y) * q
    if k.system.multiplicative:
        h = 1e-5
        up, dn = math.exp(h), math.exp(-h)
        numeric = (_raw_value(k, x * up, y * up) - _raw_value(k, x * dn, y * dn)) / (2.0 * h)
    else:
        h = 1e-5 * np.maximum(1.0, x)
        numeric = (_raw_value(k, x + h, y + h) - _raw_value(k, x - h, y - h)) / (2.0 * h)
    if analytic.ndim == 0:
        return float(analytic), float(numeric)
    return analytic, np.asarray(numeric)


def laplace_transform_check(n, lam):
    """|int_0^inf e^{-lam x} u(x) dx - (n+1)(lam-1/2)^n / (lam+1/2)^(n+2)| for u = x e^{-x/2} L_n^{(1)}.

    Returns (residual, quadrature value, closed form).
    """
    if not lam > -0.4:
        raise ValueError("lambda must exceed -1/2 + 0.1")
    rate = lam + 0.5
    # the planner sizes T for squared envelopes: halve rate and degree
    decay = DecayProfile("exponential", (0.5 * rate, 0.5 * (n + 1)))
    rule = plan_rule("additive", decay, tol=1e-13)
    x = rule.nodes
    u = _laguerre_v(n)(x)[..., 0]
    quad = float(np.sum(rule.weights * np.exp(-lam * x) * u))
    closed = (n + 1) * (lam - 0.5) ** n / rate ** (n + 2)
    return abs(quad - closed), quad, closed


REGISTERED = (
    [KernelSpec.of("airy", s=s) for s in (0.0, 1.0)]
    + [KernelSpec.of("laguerre", n=n) for n in range(6)]
    + [KernelSpec.of("bessel_hard"), KernelSpec.of("carleman")]
    + [KernelSpec.of("parabolic", p=p) for p in (0, 2, 3)]
    + [KernelSpec.of("macdonald", nu=nu) for nu in (0.0, 0.25, 0.5, 0.75)]
    + [KernelSpec.of("bessel_mult", nu=nu) for nu in (0.0, 0.5, 1.0)]
    + [KernelSpec.of("whittaker", kappa=k, nu=nu) for k, nu in ((0.0, 0.25), (-0.5, 0.25), (-1.0, 0.0))]
)

DEFAULT_RANGE = {
    "additive": (0.1, 10.0),
    "multiplicative-outer": (1.05, 20.0),
    "multiplicative-inner": (0.05, 0.95),
}
