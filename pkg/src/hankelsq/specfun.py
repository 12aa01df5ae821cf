"""Special functions needed by the integrable kernels.

Every evaluator returns an :class:`FnValue` (value and first derivative) and
accepts a scalar or a numpy array for its continuous argument.  Each function
has a primary evaluation path and, where a cheap independent route exists, a
second path exposed under a separate name so the two can be cross-checked:

=====================  ==============================  ==============================
function               primary path                    independent path
=====================  ==============================  ==============================
Ai                     K_{1/3}, K_{2/3} (x > 0);       Maclaurin series / asymptotic
                       Maclaurin and Taylor walk       expansions (:func:`airy_series`)
J_nu                   ascending series / Hankel       Bessel-Schlaefli integral
                       asymptotics                     (:func:`bessel_j_integral`)
K_nu                   cosh integral                   sinh^{2nu} integral
                                                       (:func:`macdonald_k_sinh`)
L_n^{(1)}              three-term recurrence           explicit binomial sum
phi_n (Hermite fn.)    normalised recurrence           explicit He_n sum
W_{kappa,nu}           Laplace-type integral           (none; checked through
                                                       W_{0,nu} = sqrt(z/pi) K_nu(z/2))
=====================  ==============================  ==============================

Arguments outside the validated range raise :class:`DomainError`.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._gauss import composite_unit, gauss_jacobi_left, gauss_legendre, map_panels

__all__ = [
    "DomainError",
    "FnValue",
    "DecayProfile",
    "eval_airy",
    "airy_series",
    "eval_bessel_j",
    "bessel_j_integral",
    "eval_macdonald_k",
    "macdonald_k_sinh",
    "macdonald_k_derivative_recurrence",
    "eval_laguerre_assoc",
    "laguerre_assoc_explicit",
    "eval_whittaker_w",
    "eval_hermite_fn",
    "hermite_fn_explicit",
    "gamma_fn",
]


class DomainError(ValueError):
    """Raised when an argument leaves an evaluator's validated range."""


class FnValue(NamedTuple):
    value: np.ndarray
    derivative: np.ndarray


@dataclass(frozen=True)
class DecayProfile:
    """Envelope of a symbol's decay at infinity, consumed by the tail planner.

    ``rates`` depend on ``kind``:

    * ``super-exponential``: ``(c, p, shift)`` for ``exp(-c (x + shift)**p)``
    * ``exponential``: ``(r, d)`` for ``(1 + x)**d * exp(-r x)``
    * ``sub-exponential-sqrt``: ``(r, d)`` for ``(1 + x)**d * exp(-r sqrt(x))``
    * ``algebraic``: ``(p,)`` for ``x**-p``
    * ``algebraic-oscillatory``: ``(p, omega)`` for ``x**-p cos(omega sqrt(x) + ...)``
    """

    kind: str
    rates: tuple = ()

    KINDS = (
        "super-exponential",
        "exponential",
        "sub-exponential-sqrt",
        "algebraic",
        "algebraic-oscillatory",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown decay kind {self.kind!r}")

    def envelope(self, x):
        """Upper envelope (up to a constant) of ``|phi(x)|`` for large ``x``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "super-exponential":
            c, p, shift = self.rates
            return np.exp(-c * np.maximum(x + shift, 0.0) ** p)
        if self.kind == "exponential":
            r, d = self.rates
            return (1.0 + x) ** d * np.exp(-r * x)
        if self.kind == "sub-exponential-sqrt":
            r, d = self.rates
            return (1.0 + x) ** d * np.exp(-r * np.sqrt(x))
        return x ** (-self.rates[0])

    @property
    def algebraic(self):
        return self.kind in ("algebraic", "algebraic-oscillatory")


def _prepare(x):
    """Flattened float copy of ``x`` and its shape (``()`` for scalars)."""
    arr = np.asarray(x, dtype=float)
    return arr.ravel().astype(float, copy=True), arr.shape


def _shaped(value, shape):
    return float(value[0]) if shape == () else value.reshape(shape)


def _pack(value, derivative, shape):
    return FnValue(_shaped(value, shape), _shaped(derivative, shape))


def _check(cond, message):
    if not cond:
        raise DomainError(message)


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------


def gamma_fn(x):
    """Gamma function for real ``x > 0`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    _check(np.all(arr > 0), "gamma_fn requires x > 0")
    if arr.ndim == 0:
        return math.gamma(float(arr))
    return np.vectorize(math.gamma, otypes=[float])(arr)


# ---------------------------------------------------------------------------
# MacDonald function K_nu
# ---------------------------------------------------------------------------

_K_PANELS = 8
_K_NODES = 24
# integrand is dropped once z*(cosh t - 1) exceeds this
_K_CUTOFF = 46.0


def _macdonald_cosh(nu, z):
    """K_nu(z) and K_nu'(z) from the cosh integral; any real nu, z > 0."""
    tau, wtau = composite_unit(_K_PANELS, _K_NODES)
    tmax = np.arccosh(1.0 + (_K_CUTOFF + abs(nu) * 2.0) / z)
    t = tmax[:, None] * tau[None, :]
    w = tmax[:, None] * wtau[None, :]
    ch = np.cosh(t)
    base = np.exp(-z[:, None] * (ch - 1.0)) * np.cosh(nu * t) * w
    scale = np.exp(-z)
    value = scale * base.sum(axis=1)
    deriv = -scale * (base * ch).sum(axis=1)
    return value, deriv


def eval_macdonald_k(nu, z):
    """MacDonald function K_nu(z) for 0 <= nu < 1 and 0 < z <= 700."""
    z, shape = _prepare(z)
    _check(0.0 <= nu < 1.0, f"macdonald_k: nu={nu} outside [0, 1)")
    _check(np.all(z > 0.0), "macdonald_k: z must be positive")
    _check(np.all(z <= 700.0), "macdonald_k: z > 700 underflows")
    value, deriv = _macdonald_cosh(nu, z)
    return _pack(value, deriv, shape)


def macdonald_k_sinh(nu, z):
    """K_nu(z) through the Poisson-type integral in sinh(t)**(2 nu).

    Independent of the cosh integral: the first panel uses a Gauss-Jacobi
    rule carrying the t**(2 nu) endpoint behaviour exactly.  Returns the value
    only.
    """
    z, shape = _prepare(z)
    _check(0.0 <= nu < 1.0, f"macdonald_k_sinh: nu={nu} outside [0, 1)")
    _check(np.all(z > 0.0), "macdonald_k_sinh: z must be positive")
    beta = 2.0 * nu
    tmax = np.arccosh(1.0 + 60.0 / z)
    a = tmax / 8.0
    s, ws = gauss_jacobi_left(32, beta)
    t0 = a[:, None] * s[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(t0 > 0, np.sinh(t0) / t0, 1.0)
    first = (
        a[:, None] ** (beta + 1.0)
        * ws[None, :]
        * ratio**beta
        * np.exp(-z[:, None] * (np.cosh(t0) - 1.0))
    ).sum(axis=1)
    tau, wtau = composite_unit(7, 24)
    t1 = a[:, None] + (tmax - a)[:, None] * tau[None, :]
    w1 = (tmax - a)[:, None] * wtau[None, :]
    rest = (w1 * np.sinh(t1) ** beta * np.exp(-z[:, None] * (np.cosh(t1) - 1.0))).sum(axis=1)
    pref = math.sqrt(math.pi) * (z / 2.0) ** nu / math.gamma(nu + 0.5) * np.exp(-z)
    value = pref * (first + rest)
    return _shaped(value, shape)


def macdonald_k_derivative_recurrence(nu, z):
    """K_nu'(z) = -(K_{1-nu}(z) + K_{1+nu}(z)) / 2, using K_{-mu} = K_{mu}."""
    z, shape = _prepare(z)
    _check(np.all(z > 0.0), "z must be positive")
    lo, _ = _macdonald_cosh(1.0 - nu, z)
    hi, _ = _macdonald_cosh(1.0 + nu, z)
    d = -0.5 * (lo + hi)
    return _shaped(d, shape)


# ---------------------------------------------------------------------------
# Airy function
# ---------------------------------------------------------------------------

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)

_AIRY_MIN, _AIRY_MAX = -30.0, 100.0


def _airy_maclaurin(x):
    x3 = x**3
    c = np.ones_like(x)
    d = np.ones_like(x)
    f = np.zeros_like(x)
    fp = np.zeros_like(x)
    g = np.zeros_like(x)
    gp = np.ones_like(x)
    pf = np.ones_like(x)  # x**(3k)
    for k in range(45):
        f += c * pf
        fp += c * pf * x**2 / (3 * k + 2)
        g += d * pf * x
        gp += d * pf * x3 / (3 * k + 3)
        c = c / ((3 * k + 2) * (3 * k + 3))
        d = d / ((3 * k + 3) * (3 * k + 4))
        pf = pf * x3
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _airy_u_coeffs(n):
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    u = np.array(u)
    k = np.arange(n)
    v = -(6 * k + 1) / (6 * k - 1) * u
    return u, v


_U, _V = _airy_u_coeffs(40)


def _optimal_sum(coef, zeta):
    """Sum of coef[k] * zeta**-k truncated at the smallest term (per column)."""
    k = np.arange(len(coef))[:, None]
    terms = coef[:, None] * zeta[None, :] ** (-k.astype(float))
    mag = np.abs(terms)
    # stop before the first increase of |term|
    grow = np.diff(mag, axis=0) > 0
    first = np.where(grow.any(axis=0), grow.argmax(axis=0), len(coef) - 1)
    keep = k <= first[None, :]
    return np.where(keep, terms, 0.0).sum(axis=0)


def _airy_asymptotic_pos(x):
    zeta = 2.0 / 3.0 * x**1.5
    sgn = (-1.0) ** np.arange(len(_U))
    su = _optimal_sum(sgn * _U, zeta)
    sv = _optimal_sum(sgn * _V, zeta)
    e = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return e * x ** (-0.25) * su, -e * x**0.25 * sv


def _airy_asymptotic_neg(x):
    """Ai(x), Ai'(x) for large negative x (oscillatory region)."""
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    n = len(_U) // 2
    ue = _U[0::2][:n] * (-1.0) ** np.arange(n)
    uo = _U[1::2][:n] * (-1.0) ** np.arange(n)
    ve = _V[0::2][:n] * (-1.0) ** np.arange(n)
    vo = _V[1::2][:n] * (-1.0) ** np.arange(n)
    z2 = zeta**2
    pe = _optimal_sum(ue, z2)
    po = _optimal_sum(uo, z2) / zeta
    qe = _optimal_sum(ve, z2)
    qo = _optimal_sum(vo, z2) / zeta
    ph = zeta - math.pi / 4.0
    c, s = np.cos(ph), np.sin(ph)
    rp = 1.0 / math.sqrt(math.pi)
    val = rp * y ** (-0.25) * (c * pe + s * po)
    der = rp * y**0.25 * (s * qe - c * qo)
    return val, der


def _airy_taylor_walk(x):
    """Integrate Ai'' = x Ai from 0 to x (< 0) with local Taylor steps."""
    nsteps = int(math.ceil(np.max(np.abs(x)) / 0.5))
    h = x / nsteps
    u = np.full_like(x, AI0)
    up = np.full_like(x, AIP0)
    x0 = np.zeros_like(x)
    for _ in range(nsteps):
        a_prev = np.zeros_like(x)
        a0, a1 = u, up
        coeffs = [a0, a1]
        for k in range(0, 48):
            a_next = (x0 * coeffs[k] + (coeffs[k - 1] if k >= 1 else a_prev)) / ((k + 2) * (k + 1))
            coeffs.append(a_next)
        val = np.zeros_like(x)
        der = np.zeros_like(x)
        hp = np.ones_like(x)
        for k, a in enumerate(coeffs):
            val += a * hp
            if k + 1 < len(coeffs):
                der += (k + 1) * coeffs[k + 1] * hp
            hp = hp * h
        u, up = val, der
        x0 = x0 + h
    return u, up


def eval_airy(x):
    """Airy function Ai(x) and Ai'(x) on the validated range [-30, 100]."""
    x, shape = _prepare(x)
    _check(
        np.all((x >= _AIRY_MIN) & (x <= _AIRY_MAX)),
        f"eval_airy validated on [{_AIRY_MIN}, {_AIRY_MAX}]",
    )
    val = np.empty_like(x)
    der = np.empty_like(x)
    # K route loses its cutoff scaling as zeta -> 0; the series is exact there
    pos = x > 0.01
    if pos.any():
        xp = x[pos]
        zeta = 2.0 / 3.0 * xp**1.5
        k13, _ = _macdonald_cosh(1.0 / 3.0, zeta)
        k23, _ = _macdonald_cosh(2.0 / 3.0, zeta)
        val[pos] = np.sqrt(xp / 3.0) * k13 / math.pi
        der[pos] = -xp * k23 / (math.pi * math.sqrt(3.0))
    near = (~pos) & (x >= -3.0)
    if near.any():
        val[near], der[near] = _airy_maclaurin(x[near])
    far = x < -3.0
    if far.any():
        val[far], der[far] = _airy_taylor_walk(x[far])
    return _pack(val, der, shape)


def airy_series(x):
    """Ai and Ai' from series only: Maclaurin on [-8, 6], asymptotic outside."""
    x, shape = _prepare(x)
    _check(
        np.all((x >= _AIRY_MIN) & (x <= _AIRY_MAX)),
        f"airy_series validated on [{_AIRY_MIN}, {_AIRY_MAX}]",
    )
    val = np.empty_like(x)
    der = np.empty_like(x)
    mid = (x >= -8.0) & (x <= 6.0)
    if mid.any():
        val[mid], der[mid] = _airy_maclaurin(x[mid])
    hi = x > 6.0
    if hi.any():
        val[hi], der[hi] = _airy_asymptotic_pos(x[hi])
    lo = x < -8.0
    if lo.any():
        val[lo], der[lo] = _airy_asymptotic_neg(x[lo])
    return _pack(val, der, shape)


# ---------------------------------------------------------------------------
# Bessel function J_nu
# ---------------------------------------------------------------------------

_J_SWITCH = 12.0


def _bessel_j_series(nu, x):
    q = (x / 2.0) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (x / 2.0) ** nu / math.gamma(nu + 1.0)
        # derivative terms: (2k + nu)/2 * (x/2)**(2k + nu - 1) / (k! Gamma(k + nu + 1))
        td = 0.5 * nu * (x / 2.0) ** (nu - 1.0) / math.gamma(nu + 1.0) if nu > 0 else np.zeros_like(x)
    val = np.zeros_like(x)
    der = np.zeros_like(x)
    der = der + td
    val = val + t
    for k in range(60):
        t = -t * q / ((k + 1) * (k + nu + 1))
        val = val + t
        # d/dx of t_{k+1} = t_{k+1} * (2(k+1) + nu) / x
        with np.errstate(divide="ignore", invalid="ignore"):
            dk = np.where(x > 0, t * (2 * (k + 1) + nu) / np.where(x > 0, x, 1.0), 0.0)
        der = der + dk
        if np.all(np.abs(t) < 1e-18 * np.maximum(np.abs(val), 1e-300)):
            break
    return val, der


def _hankel_pq(mu, x):
    """Hankel's P, Q expansions for order mu, truncated at the smallest term."""
    m = 4.0 * mu * mu
    n = 60
    a = [1.0]
    for k in range(1, n):
        a.append(a[-1] * (m - (2 * k - 1) ** 2) / (k * 8.0))
    a = np.array(a)
    k = np.arange(n)[:, None]
    terms = a[:, None] / x[None, :] ** k.astype(float)
    mag = np.abs(terms)
    # a_k may vanish exactly (half-integer order); only look at nonzero terms
    nz = mag > 0
    grow = (np.diff(mag, axis=0) > 0) & nz[1:] & nz[:-1]
    first = np.where(grow.any(axis=0), grow.argmax(axis=0), n - 1)
    keep = k <= first[None, :]
    terms = np.where(keep, terms, 0.0)
    sign_p = np.where(k % 4 == 0, 1.0, np.where(k % 4 == 2, -1.0, 0.0))
    sign_q = np.where(k % 4 == 1, 1.0, np.where(k % 4 == 3, -1.0, 0.0))
    return (sign_p * terms).sum(axis=0), (sign_q * terms).sum(axis=0)


def _bessel_j_asymptotic(mu, x):
    p, q = _hankel_pq(mu, x)
    chi = x - (0.5 * mu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def eval_bessel_j(nu, x):
    """Bessel function J_nu(x) and J_nu'(x) for 0 <= nu <= 2, x >= 0.

    The derivative is infinite at x = 0 when 0 < nu < 1.
    """
    x, shape = _prepare(x)
    _check(0.0 <= nu <= 2.0, f"bessel_j: nu={nu} outside [0, 2]")
    _check(np.all(x >= 0.0), "bessel_j requires x >= 0")
    _check(np.all(x <= 1e8), "bessel_j validated for x <= 1e8")
    val = np.empty_like(x)
    der = np.empty_like(x)
    small = x <= _J_SWITCH
    if small.any():
        val[small], der[small] = _bessel_j_series(nu, x[small])
    big = ~small
    if big.any():
        xb = x[big]
        jv = _bessel_j_asymptotic(nu, xb)
        jm = _bessel_j_asymptotic(nu - 1.0, xb)
        val[big] = jv
        der[big] = jm - nu / xb * jv
    return _pack(val, der, shape)


def bessel_j_integral(nu, x):
    """J_nu(x), J_nu'(x) from Bessel's integral (x > 0, moderate x)."""
    x, shape = _prepare(x)
    _check(0.0 <= nu <= 2.0, f"bessel_j_integral: nu={nu} outside [0, 2]")
    _check(np.all(x > 0.0), "bessel_j_integral requires x > 0")
    n = int(max(64, 2 * np.max(x) + 48))
    th, wth = map_panels(np.linspace(0.0, math.pi, 5), n // 2)
    arg = nu * th[None, :] - x[:, None] * np.sin(th)[None, :]
    val = (np.cos(arg) * wth).sum(axis=1) / math.pi
    der = (np.sin(arg) * np.sin(th)[None, :] * wth).sum(axis=1) / math.pi
    snp = math.sin(nu * math.pi)
    if abs(snp) > 1e-15:
        tmax = np.arcsinh(50.0 / x)
        if nu > 0:
            tmax = np.minimum(tmax, 50.0 / nu)
        tau, wtau = composite_unit(10, 24)
        t = tmax[:, None] * tau[None, :]
        w = tmax[:, None] * wtau[None, :]
        e = np.exp(-x[:, None] * np.sinh(t) - nu * t) * w
        val = val - snp / math.pi * e.sum(axis=1)
        der = der + snp / math.pi * (e * np.sinh(t)).sum(axis=1)
    return _pack(val, der, shape)


# ---------------------------------------------------------------------------
# Associated Laguerre polynomial L_n^{(1)}
# ---------------------------------------------------------------------------


def eval_laguerre_assoc(n, x):
    """L_n^{(1)}(x) and its derivative by the three-term recurrence (n <= 50)."""
    x, shape = _prepare(x)
    _check(isinstance(n, (int, np.integer)) and 0 <= n <= 50, f"laguerre: n={n} outside [0, 50]")
    _check(np.all(x >= 0.0), "laguerre requires x >= 0")
    alpha = 1.0
    lm, l0 = np.zeros_like(x), np.ones_like(x)
    dm, d0 = np.zeros_like(x), np.zeros_like(x)
    for k in range(n):
        c = 2 * k + 1 + alpha - x
        l1 = (c * l0 - (k + alpha) * lm) / (k + 1)
        d1 = (c * d0 - l0 - (k + alpha) * dm) / (k + 1)
        lm, l0 = l0, l1
        dm, d0 = d0, d1
    return _pack(l0, d0, shape)


def laguerre_assoc_explicit(n, x):
    """L_n^{(1)}(x) = sum_k (-1)^k C(n+1, n-k) x^k / k!  (value only).

    Summed in exact rational arithmetic, so the alternating terms cannot
    cancel; slow, and intended as an oracle.
    """
    x, shape = _prepare(x)
    coefs = [Fraction((-1) ** k * math.comb(n + 1, n - k), math.factorial(k)) for k in range(n + 1)]
    val = np.array([float(sum(c * Fraction(xi) ** k for k, c in enumerate(coefs))) for xi in x])
    return _shaped(val, shape)


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------


def eval_hermite_fn(n, x):
    """Normalised Hermite function phi_n(x) = He_n(x) exp(-x^2/4) / sqrt(n! sqrt(2 pi))."""
    x, shape = _prepare(x)
    _check(isinstance(n, (int, np.integer)) and 0 <= n <= 30, f"hermite: n={n} outside [0, 30]")
    p0 = (2.0 * math.pi) ** -0.25 * np.exp(-x * x / 4.0)
    prev, cur = np.zeros_like(x), p0
    for k in range(n):
        prev, cur = cur, (x * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
    der = math.sqrt(n) * prev - 0.5 * x * cur
    return _pack(cur, der, shape)


def hermite_fn_explicit(n, x):
    """phi_n from the explicit He_n sum (value only)."""
    x, shape = _prepare(x)
    he = np.zeros_like(x)
    for m in range(n // 2 + 1):
        he += (
            (-1) ** m
            * math.factorial(n)
            / (math.factorial(m) * math.factorial(n - 2 * m) * 2**m)
            * x ** (n - 2 * m)
        )
    val = he * np.exp(-x * x / 4.0) / math.sqrt(math.factorial(n)) * (2.0 * math.pi) ** -0.25
    return _shaped(val, shape)


# ---------------------------------------------------------------------------
# Whittaker function W_{kappa,nu}
# ---------------------------------------------------------------------------

_W_NODES = 24
_W_TOP = 120.0


def eval_whittaker_w(kappa, nu, z):
    """Whittaker W_{kappa,nu}(z) for kappa <= 0, 0 <= nu < 1, 0 < z <= 1400.

    Uses W = exp(-z/2) z^kappa / Gamma(a+1) * int_0^inf e^{-t} t^a (1+t/z)^b dt
    with a = nu - kappa - 1/2 and b = nu + kappa - 1/2.
    """
    z, shape = _prepare(z)
    _check(kappa <= 0.0, f"whittaker: kappa={kappa} > 0 is not supported")
    _check(0.0 <= nu < 1.0, f"whittaker: nu={nu} outside [0, 1)")
    _check(np.all(z > 0.0), "whittaker requires z > 0")
    _check(np.all(z <= 1400.0), "whittaker: z > 1400 underflows")
    a = nu - kappa - 0.5
    b = nu + kappa - 0.5
    c = 0.5 * np.minimum(z, 1.0)
    s, ws = gauss_jacobi_left(_W_NODES, a)
    t0 = c[:, None] * s[None, :]
    w0 = c[:, None] ** (a + 1.0) * ws[None, :]
    npan = int(math.ceil(math.log2(_W_TOP / np.min(c))))
    x, w = gauss_legendre(_W_NODES)
    lo = c[:, None] * 2.0 ** np.arange(npan)[None, :]
    half = 0.5 * lo
    t1 = (lo + half)[:, :, None] + half[:, :, None] * x[None, None, :]
    w1 = half[:, :, None] * w[None, None, :]
    t1 = t1.reshape(len(z), -1)
    w1 = w1.reshape(len(z), -1) * t1**a
    t = np.concatenate([t0, t1], axis=1)
    wt = np.concatenate([w0, w1], axis=1) * np.exp(-t)
    zz = z[:, None]
    base = (1.0 + t / zz) ** b
    integral = (wt * base).sum(axis=1)
    dintegral = (wt * b * (1.0 + t / zz) ** (b - 1.0) * (-t / zz**2)).sum(axis=1)
    pref = np.exp(-z / 2.0) * z**kappa / math.gamma(a + 1.0)
    val = pref * integral
    der = pref * (-0.5 + kappa / z) * integral + pref * dintegral
    return _pack(val, der, shape)
