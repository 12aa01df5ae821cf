"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math

import numpy as np

from hankelsq import cli
from hankelsq import specfun as sf
from hankelsq.hankelop import carleman_rule, hs_norm, nystrom_kernel, nystrom_rule, nystrom_symbol, sym_eigs
from hankelsq.kernelzoo import DEFAULT_RANGE, REGISTERED, KernelSpec, make_kernel
from hankelsq.omega import log_fn, loewner_matrix, neg_inv_square_fn, ode_residual, residue_matrix, sqrt_fn
from hankelsq.verify import (
    anticommutator_suite,
    hermite_ratios,
    verify_identity,
    verify_nonfactorization,
    verify_spectral_square,
)

IDENTITY_CRITERIA = [
    ("CARLEMAN_2_11", None, 1e-10),
    ("AIRY_FACT", [{"s": 0.0}, {"s": 1.0}], 1e-8),
    ("LAGUERRE_2_6", [{"n": n} for n in range(6)], 1e-8),
    ("MACDONALD_5_5", [{"nu": nu} for nu in (0.0, 0.25, 0.5, 0.75)], 1e-7),
    ("BESSELJ_5_8", [{"nu": nu} for nu in (0.0, 0.5, 1.0)], 1e-7),
    ("WHITTAKER_5_15", [{"kappa": 0.0, "nu": 0.25}, {"kappa": -0.5, "nu": 0.25}, {"kappa": -1.0, "nu": 0.0}], 1e-5),
    ("SQRT_5_13", None, 1e-8),
    ("BESSEL_2_9_DSUM", None, 1e-5),
    ("LAPLACE_2_2", [{"n": n, "lam": lam} for n in (0, 1, 2) for lam in (0.5, 1.0, 2.0)], 1e-8),
]


def test_criterion_01_identity_residuals(criterion):
    worst = {}
    for tag, params, tol in IDENTITY_CRITERIA:
        rep = verify_identity(tag, params=params, tol=tol)
        assert rep.tolerance == tol
        worst[tag] = (rep.max_rel_residual, tol)
    ok = all(r <= t for r, t in worst.values())
    detail = ", ".join(f"{t}={r:.1e}" for t, (r, _) in worst.items())
    criterion(1, ok, detail)
    assert ok, worst


def test_criterion_02_ode_residuals(criterion):
    worst, where = 0.0, ""
    for spec in REGISTERED:
        k = make_kernel(spec)
        lo, hi = DEFAULT_RANGE[k.flavor]
        for x in np.geomspace(lo, hi, 20):
            r = ode_residual(k.system, k.v, x, h=1e-4)
            if r > worst:
                worst, where = r, f"{spec} at x={x:.3g}"
    ok = worst <= 1e-6
    criterion(2, ok, f"{len(REGISTERED)} systems, max residual {worst:.2e} ({where})")
    assert ok


def test_criterion_03_spectral_square(criterion):
    parts = []
    ok = True
    for spec in ("airy:s=0", "laguerre:n=2"):
        rep = verify_spectral_square(spec, nodes=100, tol=1e-6, top=10)
        min_w = rep.details["min_W_eigenvalue"]
        ok &= rep.max_rel_residual <= 1e-6 and min_w >= -1e-10
        parts.append(f"{spec}: top-10 err {rep.max_rel_residual:.1e}, min W eig {min_w:.1e}")
    criterion(3, ok, "; ".join(parts))
    assert ok


def test_criterion_04_carleman_spectra(criterion):
    k = make_kernel("carleman")
    tops = []
    for n in (50, 100, 200):
        g = sym_eigs(nystrom_symbol(k.symbol, carleman_rule(n))).eigenvalues
        tops.append(g.max())
    rule = carleman_rule(200)
    g = sym_eigs(nystrom_symbol(k.symbol, rule)).eigenvalues
    w = sym_eigs(nystrom_kernel(k, rule)).eigenvalues
    in_gamma = g.min() >= -1e-8 and g.max() <= math.pi + 1e-6
    in_w = w.min() >= -1e-8 and w.max() <= math.pi**2 + 1e-3
    monotone = tops[0] <= tops[1] <= tops[2]
    ok = in_gamma and in_w and monotone
    criterion(4, ok, f"Gamma in [{g.min():.1e}, {g.max():.4f}], W in [{w.min():.1e}, {w.max():.4f}], "
                     f"top Gamma {', '.join(f'{t:.4f}' for t in tops)}")
    assert ok


def test_criterion_05_residue_eigenvalues(criterion):
    worst = 0.0
    for nu in (0.0, 0.25, 0.5):
        _, eig = residue_matrix(make_kernel(KernelSpec.of("macdonald", nu=nu)).system)
        eig = np.asarray(eig)
        got = np.sort(eig.real)[::-1]
        want = np.array([(1 + nu) / 2, (1 - nu) / 2])
        worst = max(worst, float(np.max(np.abs(got - want)) + np.max(np.abs(eig.imag))))
    ok = worst <= 1e-12
    criterion(5, ok, f"max eigenvalue error {worst:.1e}")
    assert ok


def test_criterion_06_nonfactorization(criterion):
    rep = verify_nonfactorization(2, [1.0, 2.0])
    ev = np.sort(rep.details["sum_matrix_eigenvalues"])[::-1]
    exact = np.array([3 + math.sqrt(10), 3 - math.sqrt(10)])
    ok_sum = np.max(np.abs(ev - exact)) <= 1e-12 and ev[0] > 0 > ev[1]
    rng = np.random.default_rng(20261014)
    min_sqrt = min_log = math.inf
    for _ in range(100):
        pts = np.sort(rng.uniform(0.05, 20.0, 5))
        min_sqrt = min(min_sqrt, loewner_matrix(sqrt_fn, pts).min_eigenvalue())
        min_log = min(min_log, loewner_matrix(log_fn, pts).min_eigenvalue())
    neg = loewner_matrix(neg_inv_square_fn, [1.0, 2.0]).min_eigenvalue()
    ok = bool(ok_sum and min_sqrt >= -1e-10 and min_log >= -1e-10 and neg <= -1e-3)
    criterion(6, ok, f"sum-matrix eigenvalues {ev[0]:.6f}, {ev[1]:.6f}; Loewner min eig sqrt {min_sqrt:.1e}, "
                     f"log {min_log:.1e}, -1/x^2 {neg:.4f}")
    assert ok


def test_criterion_07_hilbert_schmidt(criterion):
    k = make_kernel("airy")
    h = hs_norm(k.symbol)
    fro = nystrom_symbol(k.symbol, nystrom_rule(k, 200)).frobenius()
    rel = abs(fro - h.value) / h.value
    b = make_kernel("bessel_hard")
    vals = [hs_norm(b.symbol, T).value for T in (1e2, 1e4, 1e6)]
    grows = vals[0] < vals[1] < vals[2]
    ok = rel <= 1e-4 and grows
    criterion(7, ok, f"Airy HS {h.value:.12f} vs Frobenius rel {rel:.1e}; hard-edge truncated norms "
                     f"{', '.join(f'{v:.3f}' for v in vals)}")
    assert ok


def _dual(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_criterion_08_specfun(criterion):
    errs = {}
    pos = np.geomspace(0.05, 30.0, 25)
    xa = np.concatenate([-pos[::-1], pos])
    a, s = sf.eval_airy(xa), sf.airy_series(xa)
    errs["airy"] = max(_dual(a.value, s.value), _dual(a.derivative, s.derivative))
    z = np.geomspace(0.05, 200.0, 50)
    errs["macdonald"] = max(
        float(np.max(np.abs(sf.eval_macdonald_k(nu, z).value - sf.macdonald_k_sinh(nu, z))
                     / sf.eval_macdonald_k(nu, z).value))
        for nu in (0.0, 0.25, 0.5, 0.75))
    xj = np.geomspace(0.01, 40.0, 50)
    errs["bessel_j"] = max(_dual(sf.eval_bessel_j(nu, xj).value, sf.bessel_j_integral(nu, xj).value)
                           for nu in (0.0, 0.5, 1.0, 2.0))
    xl = np.geomspace(0.01, 60.0, 50)
    errs["laguerre"] = max(
        float(np.max(np.abs(sf.eval_laguerre_assoc(n, xl).value - sf.laguerre_assoc_explicit(n, xl))
                     / np.maximum(1.0, np.abs(sf.laguerre_assoc_explicit(n, xl)))))
        for n in (1, 5, 20, 50))
    xh = np.linspace(-8.0, 8.0, 50)
    errs["hermite"] = max(_dual(sf.eval_hermite_fn(n, xh).value, sf.hermite_fn_explicit(n, xh)) for n in (0, 3, 10, 30))
    dual_ok = max(errs.values()) <= 1e-9

    zk = np.geomspace(0.05, 20.0, 50)
    k_half = float(np.max(np.abs(sf.eval_macdonald_k(0.5, zk).value - np.sqrt(np.pi / (2 * zk)) * np.exp(-zk))
                          / (np.sqrt(np.pi / (2 * zk)) * np.exp(-zk))))
    zw = np.geomspace(0.1, 50.0, 50)
    cross = max(_dual(sf.eval_whittaker_w(0.0, nu, zw).value, np.sqrt(zw / np.pi) * sf.eval_macdonald_k(nu, zw / 2).value)
                for nu in (0.0, 0.25, 0.5, 0.75))

    rng = np.random.default_rng(7)
    fd = 0.0
    cases = [
        (lambda x: sf.eval_airy(x), (-10.0, 10.0)),
        (lambda x: sf.eval_bessel_j(0.5, x), (0.1, 40.0)),
        (lambda x: sf.eval_macdonald_k(0.75, x), (0.1, 30.0)),
        (lambda x: sf.eval_laguerre_assoc(8, x), (0.1, 20.0)),
        (lambda x: sf.eval_hermite_fn(7, x), (-6.0, 6.0)),
        (lambda x: sf.eval_whittaker_w(-1.0, 0.0, x), (0.5, 40.0)),
    ]
    h = 1e-5
    for fn, (lo, hi) in cases:
        x = rng.uniform(lo, hi, 20)
        d = (fn(x + h).value - fn(x - h).value) / (2 * h)
        ex = fn(x).derivative
        scale = np.maximum(np.abs(ex), 1e-3 * np.max(np.abs(ex)))
        fd = max(fd, float(np.max(np.abs(d - ex) / scale)))
    ok = dual_ok and k_half <= 1e-10 and cross <= 1e-8 and fd <= 1e-6
    criterion(8, ok, f"dual-path max {max(errs.values()):.1e}, K_1/2 {k_half:.1e}, W_0 vs K {cross:.1e}, "
                     f"derivative vs FD {fd:.1e}")
    assert ok


def test_criterion_09_diagnostics(criterion):
    bessel = verify_identity("BESSEL_2_9_INT", tol=1e-3)
    bessel_ok = bessel.max_rel_residual <= 1e-3

    spreads = {}
    for m, n in ((1, 0), (2, 0), (2, 1)):
        ratios = [r[3] for r in hermite_ratios(m, n, (0.0, 0.5, 1.0))]
        spreads[(m, n)] = max(ratios) - min(ratios)
    hermite_ok = max(spreads.values()) <= 1e-6

    anti = anticommutator_suite()
    anti_ok = anti.passed

    ok = bessel_ok and hermite_ok and anti_ok
    herm = ", ".join(f"{k}: {v:.3f}" for k, v in spreads.items())
    criterion(9, ok, f"BESSEL_2_9_INT {bessel.max_rel_residual:.1e} [{'ok' if bessel_ok else 'fail'}]; "
                     f"Hermite ratio spread over s {herm} [{'ok' if hermite_ok else 'fail'}]; "
                     f"anticommutator stability [{'ok' if anti_ok else 'fail'}]")
    assert bessel_ok, bessel.max_rel_residual
    assert anti_ok, anti.details
    assert hermite_ok, f"LHS/RHS ratio is not constant in s: spreads {spreads}"


def test_criterion_10_determinism(criterion, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code_a = cli.main(["suite", "--out", str(a)])
    code_b = cli.main(["suite", "--out", str(b)])
    same = a.read_bytes() == b.read_bytes()
    ok = same and code_a == code_b == 0
    criterion(10, ok, f"two suite runs byte-identical: {same}, exit codes {code_a}, {code_b}")
    assert ok
