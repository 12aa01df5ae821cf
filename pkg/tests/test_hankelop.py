import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankelsq import specfun as sf
from hankelsq.hankelop import (
    apply_additive,
    apply_multiplicative,
    carleman_rule,
    dump_csv,
    exp_change_of_variables,
    hs_norm,
    nystrom_kernel,
    nystrom_rule,
    nystrom_symbol,
    sym_eigs,
    symbol_square,
)
from hankelsq.kernelzoo import make_kernel
from hankelsq.quadrature import (
    QuadratureRule,
    UnachievableTolerance,
    geometric_rule,
    graded_rule,
    plan_rule,
    uniform_rule,
)
from hankelsq.specfun import DecayProfile

EXP = DecayProfile("exponential", (1.0, 0.0))


def exp_rule(tol=1e-13):
    return plan_rule("additive", EXP, tol=tol)


# quadrature rules


@pytest.mark.parametrize("rule", [
    uniform_rule("additive", 0.0, 3.0, 40),
    geometric_rule("additive", 0.01, 50.0, ratio=2.0, per_panel=12, first=0.0),
    graded_rule(0.0, 1.0, levels=10),
], ids=["uniform", "geometric", "graded"])
def test_rule_invariants(rule):
    assert np.all(rule.weights > 0)
    total = sum(b - a for a, b, _ in rule.panels)
    assert abs(rule.weights.sum() - total) <= 1e-12 * total
    for a, b, n in rule.panels:
        inside = rule.nodes[(rule.nodes > a) & (rule.nodes < b)]
        assert inside.size == n
        # degree 2n-1 exactness on each panel
        deg = 2 * n - 1
        sub = QuadratureRule.from_panels(rule.flavor, [(a, b, n)])
        exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
        assert abs(sub.integrate(sub.nodes**deg) - exact) <= 1e-12 * abs(exact)


def test_rule_rejects_empty_panel():
    with pytest.raises(ValueError):
        QuadratureRule.from_panels("additive", [(1.0, 1.0, 4)])


def test_planner_refusals():
    with pytest.raises(UnachievableTolerance):
        plan_rule("additive", EXP, tol=1e-15)
    osc = DecayProfile("algebraic-oscillatory", (0.75, 2.0))
    with pytest.raises(UnachievableTolerance):
        plan_rule("additive", osc, tol=1e-8)


def test_planner_truncation_airy():
    rule = plan_rule("additive", make_kernel("airy").decay, tol=1e-12)
    assert 8.0 < rule.T < 14.0
    assert rule.tail == "bound-only" and rule.tail_bound < 1e-16


def test_rule_csv(tmp_path):
    rule = uniform_rule("additive", 0.0, 1.0, 4)
    path = tmp_path / "r.csv"
    rule.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "node,weight" and len(rows) == 5


# operators


def test_apply_additive_exponential():
    rule = exp_rule()
    out = apply_additive(lambda x: np.exp(-x), lambda t: np.exp(-t), rule, points=[1.0])
    assert abs(out[0] - math.exp(-1.0) / 2) <= 1e-10
    zero = apply_additive(lambda x: np.zeros_like(x), lambda t: np.exp(-t), rule)
    assert np.all(zero == 0.0)


def test_apply_additive_airy():
    k = make_kernel("airy")
    rule = plan_rule("additive", k.decay, tol=1e-13)
    out = apply_additive(lambda x: sf.eval_airy(x).value, lambda t: sf.eval_airy(t).value, rule, points=[0.0])
    ref = sf.airy_series(0.0).derivative ** 2
    assert out[0] == pytest.approx(ref, abs=1e-12)
    assert ref == pytest.approx(0.0669874838, abs=1e-10)


def test_apply_additive_vector_channels():
    rule = exp_rule()
    phi = lambda x: np.stack([np.exp(-x), 2 * np.exp(-x)], axis=-1)
    out = apply_additive(phi, lambda t: np.exp(-t), rule, points=[0.0, 1.0])
    assert out.shape == (2, 2)
    assert np.allclose(out[:, 1], 2 * out[:, 0])


def test_apply_flavor_mismatch():
    with pytest.raises(ValueError):
        apply_additive(np.exp, np.exp, graded_rule(0.0, 1.0, levels=4))
    with pytest.raises(ValueError):
        apply_multiplicative(np.exp, np.exp, exp_rule())


def power_rule():
    return geometric_rule("multiplicative-outer", 1.0, 1e4, ratio=2.0, per_panel=20)


def test_apply_multiplicative_power_law():
    rule = power_rule()
    x = np.array([1.0, 2.0, 5.0])
    out = apply_multiplicative(lambda u: u**-2.0, lambda y: y**-2.0, rule, points=x)
    # tail beyond 1e4 is 1e-16 / 4
    assert np.max(np.abs(out - x**-2.0 / 4)) <= 1e-10
    zero = apply_multiplicative(lambda u: np.exp(-((u - 3) ** 2)), lambda y: 0.0 * y, rule)
    assert np.all(zero == 0.0)


def test_exp_change_of_variables():
    x = np.array([1.0, 2.0, 5.0])
    direct = apply_multiplicative(lambda u: u**-2.0, lambda y: y**-2.0, power_rule(), points=x)
    phi, f = exp_change_of_variables(lambda u: u**-2.0, lambda y: y**-2.0)
    add = uniform_rule("additive", 0.0, 40.0, 400)
    via = apply_additive(phi, f, add, points=np.log(x))
    assert np.max(np.abs(direct - via)) <= 1e-9


def test_hs_norm_exponential():
    h = hs_norm(lambda s: np.exp(-s), decay=EXP)
    assert abs(h.value - 0.5) <= 1e-10


def test_hs_norm_airy_matches_frobenius():
    k = make_kernel("airy")
    h = hs_norm(k.symbol)
    fro = nystrom_symbol(k.symbol, nystrom_rule(k, 200)).frobenius()
    assert abs(fro - h.value) <= 1e-4 * h.value


def test_hs_norm_bessel_hard_grows():
    k = make_kernel("bessel_hard")
    vals = [hs_norm(k.symbol, T) for T in (1e2, 1e4, 1e6)]
    assert vals[0].value < vals[1].value < vals[2].value
    assert math.isinf(vals[-1].tail_bound)


# Nystrom matrices


def test_nystrom_carleman_small():
    k = make_kernel("carleman")
    rule = QuadratureRule.from_panels("additive", [(0.5, 2.0, 3)])
    m = nystrom_kernel(k, rule).matrix
    x, w = rule.nodes, rule.weights
    for i in range(3):
        for j in range(3):
            ref = w[i] / x[i] if i == j else math.sqrt(w[i] * w[j]) * (math.log(x[i]) - math.log(x[j])) / (x[i] - x[j])
            assert m[i, j] == pytest.approx(ref, rel=1e-13)


def test_nystrom_flavor_mismatch():
    with pytest.raises(ValueError):
        nystrom_kernel(make_kernel("airy"), graded_rule(0.0, 1.0, levels=4))


def test_nystrom_airy_psd():
    k = make_kernel("airy")
    op = nystrom_kernel(k, nystrom_rule(k, 100))
    assert np.max(np.abs(op.matrix - op.matrix.T)) <= 1e-13
    assert sym_eigs(op).eigenvalues.min() >= -1e-10


def test_parabolic_h_is_semidefinite():
    # H is a Christoffel-Darboux sum of Hermite products, hence PSD; the
    # indefinite object is its diagonal derivative
    k = make_kernel("parabolic:p=3")
    rule = plan_rule("additive", k.decay, tol=1e-12, nodes=60)
    lam = sym_eigs(nystrom_kernel(k, rule)).eigenvalues
    assert lam.min() >= -1e-12 * lam.max()


def test_nystrom_symbol_rank_one():
    rule = exp_rule()
    lam = sym_eigs(nystrom_symbol(lambda x: np.exp(-x), rule)).eigenvalues
    assert abs(lam[1]) <= 1e-12
    assert lam[0] == pytest.approx(0.5, abs=1e-10)


def test_nystrom_symbol_carleman_range():
    k = make_kernel("carleman")
    lam = sym_eigs(nystrom_symbol(k.symbol, carleman_rule(200))).eigenvalues
    assert lam.min() >= -1e-8 and lam.max() <= math.pi + 1e-6


def test_nystrom_symbol_multiplicative_measure():
    k = make_kernel("macdonald:nu=0.25")
    rule = nystrom_rule(k, 40)
    m = nystrom_symbol(k.symbol, rule).matrix
    x, w = rule.nodes, rule.weights
    ref = np.sqrt(np.outer(w, w)) * k.symbol(np.outer(x, x)) / np.sqrt(np.outer(x, x))
    assert np.allclose(m, ref, rtol=1e-13, atol=0)


def test_vector_symbol_needs_square():
    k = make_kernel("whittaker:kappa=-0.5,nu=0.25")
    rule = nystrom_rule(k, 60)
    with pytest.raises(ValueError):
        nystrom_symbol(k.symbol, rule)
    sq = sym_eigs(symbol_square(k.symbol, rule)).eigenvalues
    w = sym_eigs(nystrom_kernel(k, rule)).eigenvalues
    assert np.max(np.abs(sq[:5] - w[:5])) <= 1e-6 * w[0]


def test_bessel_hard_has_no_nystrom_rule():
    with pytest.raises(UnachievableTolerance):
        nystrom_rule(make_kernel("bessel_hard"), 50)


# eigensolver


def test_sym_eigs_examples():
    assert np.allclose(sym_eigs(np.diag([1.0, 3.0])).eigenvalues, [3.0, 1.0])
    assert np.allclose(sym_eigs(np.array([[2.0, 1.0], [1.0, 2.0]])).eigenvalues, [3.0, 1.0])
    lam = sym_eigs(np.array([[2.0, 3.0], [3.0, 4.0]])).eigenvalues
    assert np.allclose(lam, [3 + math.sqrt(10), 3 - math.sqrt(10)], atol=1e-14)
    assert lam[0] > 0 > lam[1]


def test_sym_eigs_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eigs(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**31))
def test_sym_eigs_residual_property(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a = a + a.T
    s = sym_eigs(a)
    assert np.all(np.diff(s.eigenvalues) <= 0)
    assert s.residual <= 1e-10 * np.linalg.norm(a, 2)
    assert np.allclose(s.vectors.T @ s.vectors, np.eye(n), atol=1e-12)


def test_dump_csv(tmp_path):
    k = make_kernel("airy")
    rule = nystrom_rule(k, 20)
    op = nystrom_kernel(k, rule)
    files = dump_csv(str(tmp_path / "airy"), op, sym_eigs(op))
    assert len(files) == 3
    eigs = (tmp_path / "airy_eigs.csv").read_text().splitlines()
    assert len(eigs) == 21
