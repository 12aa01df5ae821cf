"""Matrix ODE systems behind the integrable kernels, and the symbols they give.

An additive system is ``dv/dx = J Omega(x) v`` and a multiplicative one is
``x dv/dx = J (Omega(x) + alpha J) v``, where

    Omega(x) = omega2 x**2 + omega1 x + omega_half sqrt(x) + omega0 + omega_m1 / x

and ``J = [[0, -I], [I, 0]]``.  ``omega2`` only exists so the parabolic
cylinder equation can be written down; any system with a non-zero quadratic
term fails :func:`validate_system`.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._gauss import map_panels
from .quadrature import semi_infinite_algebraic
from .specfun import DecayProfile, FnValue

FLAVORS = ("additive", "multiplicative-outer", "multiplicative-inner")
PSD_TOL = 1e-12
RANK_TOL = 1e-10


class SymbolError(ValueError):
    """The system does not produce a usable Hankel symbol."""


def symplectic(n):
    """The 2n x 2n matrix [[0, -I], [I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _sym(m, size):
    if m is None:
        return np.zeros((size, size))
    m = np.array(m, dtype=float)
    if m.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class OmegaSystem:
    omega1: np.ndarray
    omega0: np.ndarray
    omega_m1: np.ndarray = None
    omega_half: np.ndarray = None
    omega2: np.ndarray = None
    alpha: float = 0.0
    flavor: str = "additive"

    def __post_init__(self):
        size = np.asarray(self.omega1).shape[0]
        if size % 2:
            raise ValueError("Omega matrices must have even dimension")
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        for name in ("omega1", "omega0", "omega_m1", "omega_half", "omega2"):
            object.__setattr__(self, name, _sym(getattr(self, name), size))
        if self.flavor == "additive" and self.alpha != 0.0:
            raise ValueError("additive systems carry no alpha term")

    @property
    def n(self):
        return self.omega1.shape[0] // 2

    @property
    def J(self):
        return symplectic(self.n)

    @property
    def multiplicative(self):
        return self.flavor != "additive"

    def coefficient(self, x):
        """Omega(x) for scalar x > 0."""
        return (
            self.omega2 * x * x
            + self.omega1 * x
            + self.omega_half * math.sqrt(x)
            + self.omega0
            + self.omega_m1 / x
        )

    def divided_difference(self, x, y):
        """(Omega(x) - Omega(y)) / (x - y) written without cancellation.

        Broadcasts over array x, y; the result has shape ``x.shape + (2n, 2n)``.
        """
        x = np.asarray(x, dtype=float)[..., None, None]
        y = np.asarray(y, dtype=float)[..., None, None]
        return (
            self.omega2 * (x + y)
            + self.omega1
            + self.omega_half / (np.sqrt(x) + np.sqrt(y))
            - self.omega_m1 / (x * y)
        )

    def coefficient_array(self, x):
        """Omega(x) broadcast over array x: shape x.shape + (2n, 2n)."""
        xe = np.asarray(x, dtype=float)[..., None, None]
        return (
            self.omega2 * xe * xe
            + self.omega1 * xe
            + self.omega_half * np.sqrt(xe)
            + self.omega0
            + self.omega_m1 / xe
        )

    def generator(self, x):
        """Matrix A(x) with dv/dx = A(x) v; broadcasts over array x."""
        x = np.asarray(x, dtype=float)
        xe = x[..., None, None]
        om = self.coefficient_array(x)
        J = self.J
        if not self.multiplicative:
            return J @ om
        return (J @ (om + self.alpha * J)) / xe

    @property
    def prefactor_power(self):
        """Exponent of (xy) in the kernel prefactor."""
        return (2.0 * self.alpha + 1.0) / 2.0 if self.multiplicative else 0.0

    def to_json(self):
        d = {
            "flavor": self.flavor,
            "alpha": self.alpha,
        }
        for name in ("omega1", "omega_half", "omega0", "omega_m1", "omega2"):
            d[name] = getattr(self, name).tolist()
        return json.dumps(d)

    @classmethod
    def from_json(cls, text):
        """Build a system from JSON with row-major matrices and a flavor tag.

        ``"multiplicative"`` is accepted as shorthand for the (1, inf) flavor.
        """
        d = json.loads(text) if isinstance(text, str) else dict(text)
        flavor = d.get("flavor", "additive")
        if flavor == "multiplicative":
            flavor = "multiplicative-outer"
        return cls(
            omega1=d["omega1"],
            omega0=d["omega0"],
            omega_m1=d.get("omega_m1"),
            omega_half=d.get("omega_half"),
            omega2=d.get("omega2"),
            alpha=float(d.get("alpha", 0.0)),
            flavor=flavor,
        )


@dataclass
class ValidationRecord:
    symmetry_defect: dict
    min_eigenvalues: dict
    messages: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.messages

    def __bool__(self):
        return self.passed


def _min_eig(m):
    return float(np.linalg.eigvalsh(0.5 * (m + m.T)).min())


def validate_system(sys):
    """Check symmetry and the semidefiniteness hypotheses of the factorisation.

    On (0, inf) and (1, inf) the hypotheses are omega1 >= 0, omega_half >= 0
    and -omega_m1 >= 0.  On (0, 1) the Gram integral runs the other way and
    the signs mirror: -omega1 >= 0, -omega_half >= 0, omega_m1 >= 0.
    """
    names = ("omega1", "omega_half", "omega0", "omega_m1", "omega2")
    defect = {k: float(np.max(np.abs(getattr(sys, k) - getattr(sys, k).T))) for k in names}
    sign = -1.0 if sys.flavor == "multiplicative-inner" else 1.0
    checks = {
        "omega1": sign * sys.omega1,
        "omega_half": sign * sys.omega_half,
        "-omega_m1": -sign * sys.omega_m1,
    }
    mins = {k: _min_eig(m) for k, m in checks.items()}
    msgs = []
    for k, d in defect.items():
        if d > 1e-14:
            msgs.append(f"{k} not symmetric (defect {d:.3g})")
    for k, e in mins.items():
        if e < -PSD_TOL:
            label = k if sign > 0 else f"-({k})"
            msgs.append(f"{label} has negative eigenvalue {e:.6g}")
    if np.any(sys.omega2 != 0.0):
        msgs.append("quadratic term present: outside the factorisation class")
    return ValidationRecord(defect, mins, msgs)


def residue_matrix(sys):
    """Residue J Omega_0 - alpha I at the regular singular point, with eigenvalues."""
    if not sys.multiplicative:
        raise ValueError("residue matrix is defined for multiplicative systems")
    a = sys.J @ sys.omega0 - sys.alpha * np.eye(2 * sys.n)
    if sys.n == 1:
        # closed-form quadratic: exact for the double root a general solver
        # only resolves to sqrt(eps)
        half = 0.5 * (a[0, 0] - a[1, 1])
        disc = half * half + a[0, 1] * a[1, 0]
        mid = 0.5 * (a[0, 0] + a[1, 1])
        r = np.sqrt(complex(disc))
        eig = np.array([mid + r, mid - r])
    else:
        eig = np.linalg.eigvals(a)
    if np.allclose(eig.imag, 0.0, atol=1e-14):
        eig = np.sort(eig.real)[::-1]
    return a, eig


def psd_sqrt(m):
    """Symmetric positive square root of a PSD matrix."""
    m = np.asarray(m, dtype=float)
    lam, q = np.linalg.eigh(0.5 * (m + m.T))
    if lam.min(initial=0.0) < -PSD_TOL:
        raise ValueError(f"matrix is indefinite (min eigenvalue {lam.min():.3g})")
    lam = np.clip(lam, 0.0, None)
    return (q * np.sqrt(lam)) @ q.T


# ---------------------------------------------------------------------------
# Solutions and symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionVector:
    """A solution v of an Omega system: ``values(x)`` has shape x.shape + (2n,)."""

    values: object
    derivs: object = None
    system: OmegaSystem = None

    def __call__(self, x):
        return self.values(np.asarray(x, dtype=float))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.derivs is not None:
            return self.derivs(x)
        a = self.system.generator(x)
        return np.einsum("...ij,...j->...i", a, self.values(x))


@dataclass(frozen=True)
class HankelSymbol:
    """Vector-valued symbol of a Hankel operator.

    ``components(x)`` returns shape x.shape + (dim,).  A symbol with values in
    R^dim + L^2(0, inf; dt) also has a continuum part written as
    ``amp(x) * profile(x, t)``, whose t-integral
    ``int profile(x, t) profile(y, t) dt`` is available in closed form as
    ``overlap(x, y)``.
    """

    components: object
    flavor: str
    decay: DecayProfile
    dim: int
    amp: object = None
    profile: object = None
    overlap: object = None
    label: str = ""

    @property
    def scalar(self):
        return self.dim == 1 and self.amp is None

    @property
    def has_continuum(self):
        return self.amp is not None

    def __call__(self, x):
        c = self.components(np.asarray(x, dtype=float))
        return c[..., 0] if self.scalar else c

    def continuum(self, x, t):
        return self.amp(x) * self.profile(x, t)

    def continuum_gram(self, x, y):
        return self.amp(x) * self.amp(y) * self.overlap(x, y)

    def gram(self, x, y):
        """<phi(x), phi(y)> in K, broadcasting x against y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = np.sum(self.components(x) * self.components(y), axis=-1)
        if self.has_continuum:
            g = g + self.continuum_gram(x, y)
        return g

    def gram_uncollapsed(self, x, y, nodes=48):
        """Gram with the continuum part integrated over t by quadrature."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = np.sum(self.components(x) * self.components(y), axis=-1)
        if not self.has_continuum:
            return g
        # t = tan^2(theta) turns the t^(-3/2) tail into a smooth integrand
        th, w = map_panels(np.linspace(0.0, 0.5 * math.pi, 17), nodes)
        t = np.tan(th) ** 2
        jac = 2.0 * np.tan(th) / np.cos(th) ** 2
        px = self.profile(x[..., None], t)
        py = self.profile(y[..., None], t)
        return g + self.amp(x) * self.amp(y) * np.sum(px * py * w * jac, axis=-1)


def _range_factor(m, tol=RANK_TOL):
    """Rows R with R^T R = m: sqrt(lambda_i) q_i^T for eigenvalues above tol."""
    lam, q = np.linalg.eigh(0.5 * (m + m.T))
    keep = lam > tol
    q = q[:, keep]
    # fix eigenvector signs: largest entry positive
    idx = np.argmax(np.abs(q), axis=0)
    q = q * np.sign(q[idx, np.arange(q.shape[1])])
    return np.sqrt(lam[keep])[:, None] * q.T


def _stack_symbol(factors, powers, v, flavor, decay, label):
    rows = [(f, p) for f, p in zip(factors, powers) if f.shape[0]]
    if not rows:
        raise SymbolError("both coefficient blocks vanish: empty symbol")
    dim = sum(f.shape[0] for f, _ in rows)

    def components(x):
        vx = v(x)
        parts = [np.einsum("ij,...j->...i", f, vx) * x[..., None] ** p for f, p in rows]
        return np.concatenate(parts, axis=-1)

    return HankelSymbol(components, flavor, decay, dim, label=label)


def derive_symbol_additive(sys, v, decay=None, label=""):
    """phi(x) = [sqrt(Omega_1) v(x); sqrt(-Omega_{-1}) v(x) / x] on (0, inf).

    Each block is written in the eigenbasis of its coefficient, keeping only
    directions with eigenvalue above 1e-10, so the symbol has dimension
    rank(Omega_1) + rank(Omega_{-1}).
    """
    if sys.multiplicative:
        raise ValueError("additive symbol requested for a multiplicative system")
    rec = validate_system(sys)
    if not rec:
        raise SymbolError("; ".join(rec.messages))
    f1 = _range_factor(sys.omega1)
    f2 = _range_factor(-sys.omega_m1)
    decay = decay or DecayProfile("algebraic", (1.0,))
    return _stack_symbol([f1, f2], [0.0, -1.0], v, "additive", decay, label)


def derive_symbol_multiplicative(sys, v, decay=None, label=""):
    """psi(x) = [sqrt(Omega_1) x^{(2a+1)/2} v(x); sqrt(-Omega_{-1}) x^{(2a-1)/2} v(x)].

    For the (0, 1) flavor the blocks are sqrt(-Omega_1) and sqrt(Omega_{-1}).
    """
    if not sys.multiplicative:
        raise ValueError("multiplicative symbol requested for an additive system")
    if np.any(sys.omega_half != 0.0):
        raise SymbolError("omega_half term needs the continuum symbol of the Whittaker kernel")
    rec = validate_system(sys)
    if not rec:
        raise SymbolError("; ".join(rec.messages))
    sign = -1.0 if sys.flavor == "multiplicative-inner" else 1.0
    f1 = _range_factor(sign * sys.omega1)
    f2 = _range_factor(-sign * sys.omega_m1)
    beta = sys.prefactor_power
    decay = decay or DecayProfile("algebraic", (1.0,))
    return _stack_symbol([f1, f2], [beta, beta - 1.0], v, sys.flavor, decay, label)


def ode_residual(sys, v, x, h=1e-4):
    """Relative defect of v in its ODE, derivative by central difference."""
    if not x > h > 0:
        raise ValueError("need x > h > 0")
    dv = (v(x + h) - v(x - h)) / (2.0 * h)
    vx = v(x)
    if sys.multiplicative:
        lhs = x * dv
        rhs = x * (sys.generator(x) @ vx)
    else:
        lhs = dv
        rhs = sys.generator(x) @ vx
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / scale)


# ---------------------------------------------------------------------------
# Loewner matrices and operator monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoewnerMatrix:
    points: np.ndarray
    matrix: np.ndarray

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_psd(self, tol=1e-10):
        return is_psd(self.matrix, tol)


def is_psd(m, tol=1e-10):
    return bool(np.linalg.eigvalsh(0.5 * (m + m.T)).min() >= -tol)


def loewner_matrix(omega, points):
    """Divided differences of ``omega`` with ``omega'`` on the diagonal.

    ``omega`` maps an array to an FnValue-like pair (value, derivative).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size < 1:
        raise ValueError("points must be a non-empty 1-D sequence")
    if np.any(np.diff(pts) <= 0):
        raise ValueError("points must be strictly increasing (no coincident points)")
    val, der = omega(pts)
    val = np.asarray(val, dtype=float)
    dx = pts[:, None] - pts[None, :]
    dv = val[:, None] - val[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        m = dv / dx
    m[np.diag_indices_from(m)] = der
    return LoewnerMatrix(pts, m)


def sqrt_fn(x):
    x = np.asarray(x, dtype=float)
    r = np.sqrt(x)
    return FnValue(r, 0.5 / r)


def log_fn(x):
    x = np.asarray(x, dtype=float)
    return FnValue(np.log(x), 1.0 / x)


def neg_inv_square_fn(x):
    x = np.asarray(x, dtype=float)
    return FnValue(-1.0 / x**2, 2.0 / x**3)


def sqrt_representation_integral(x, y, tol=1e-14):
    """(1/pi) int_0^inf sqrt(t) / ((x+t)(y+t)) dt on geometric panels."""
    lo, hi = min(x, y), max(x, y)
    g = lambda t: np.sqrt(t) / ((x + t) * (y + t))
    return semi_infinite_algebraic(g, 1.5, tol=tol, lower_scale=lo, upper_scale=hi) / math.pi


def verify_sqrt_representation(x, y):
    """|(sqrt x - sqrt y)/(x - y) - (1/pi) int sqrt(t)/((x+t)(y+t)) dt|.

    Returns ``(residual, lhs, rhs)``; the divided difference is evaluated as
    1/(sqrt x + sqrt y), which is also its value on the diagonal.
    """
    if x <= 0 or y <= 0:
        raise ValueError("x and y must be positive")
    lhs = 1.0 / (math.sqrt(x) + math.sqrt(y))
    rhs = sqrt_representation_integral(x, y)
    return abs(lhs - rhs), lhs, rhs
