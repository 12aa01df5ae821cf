import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankelsq import specfun as sf
from hankelsq.kernelzoo import (
    DEFAULT_RANGE,
    REGISTERED,
    KernelSpec,
    KernelSpecError,
    _raw_value,
    kernel_dsum,
    kernel_value,
    laplace_transform_check,
    make_kernel,
)
from hankelsq.quadrature import plan_rule

IDS = [str(s) for s in REGISTERED]


def sample_points(k, count=10, lo=None, hi=None):
    a, b = DEFAULT_RANGE[k.flavor]
    return np.geomspace(lo or a, hi or b, count)


@pytest.mark.parametrize("text", ["airy:s=0", "macdonald:nu=0.25", "whittaker:kappa=-0.5,nu=0.25",
                                  "carleman", "laguerre:n=3"])
def test_spec_round_trip(text):
    spec = KernelSpec.parse(text)
    assert KernelSpec.parse(str(spec)) == spec
    assert str(spec) == text


def test_spec_defaults_and_order():
    assert str(KernelSpec.parse("airy")) == "airy:s=0"
    a = KernelSpec.parse("whittaker:nu=0.25,kappa=-0.5")
    assert a == KernelSpec.of("whittaker", kappa=-0.5, nu=0.25)


@pytest.mark.parametrize("text", ["Airy:s==0", "airy:s=abc", "airy:t=1", "laguerre:n=1.5", "laguerre:n=-1",
                                  "macdonald:nu=1", "whittaker:kappa=0.5", "nosuch", "airy:s=1,s=2",
                                  "airy:S=1:"])
def test_spec_rejects(text):
    with pytest.raises(KernelSpecError):
        KernelSpec.parse(text)


def test_airy_symbol_and_diagonal():
    k = make_kernel("airy:s=0")
    x = np.linspace(0.0, 6.0, 13)
    assert np.allclose(np.abs(k.symbol(x)), np.abs(sf.eval_airy(x).value), atol=1e-15)
    a = sf.eval_airy(1.0)
    diag = a.derivative**2 - a.value**2
    assert kernel_value(k, 1.0, 1.0) == pytest.approx(diag, rel=1e-13)
    assert diag > 0
    rule = plan_rule("additive", k.decay, tol=1e-13)
    quad = float(np.sum(rule.weights * sf.eval_airy(1.0 + rule.nodes).value ** 2))
    assert kernel_value(k, 1.0, 1.0) == pytest.approx(quad, rel=1e-10)


def test_carleman_values():
    k = make_kernel("carleman")
    assert kernel_value(k, 2.0, 1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert kernel_value(k, 4.0, 4.0) == pytest.approx(0.25, abs=1e-15)
    assert np.allclose(np.abs(k.symbol(np.array([0.5, 2.0]))), [2.0, 0.5])


def test_whittaker_symbol_shape():
    k = make_kernel("whittaker:kappa=-0.5,nu=0.25")
    assert k.symbol.has_continuum and k.symbol.dim == 1
    assert k.flavor == "multiplicative-outer"
    assert k.beta == pytest.approx(0.25)


def test_parabolic_has_no_symbol():
    assert not make_kernel("parabolic:p=3").factorizable


@pytest.mark.parametrize("spec", REGISTERED, ids=IDS)
def test_kernel_symmetric_bitwise(spec):
    k = make_kernel(spec)
    x = sample_points(k, 7)
    X, Y = np.meshgrid(x, x[::-1] * 0.97 if k.flavor != "multiplicative-outer" else x[::-1] * 1.03)
    if k.flavor == "multiplicative-inner":
        Y = np.minimum(Y, 1.0)
    assert np.array_equal(kernel_value(k, X, Y), kernel_value(k, Y, X))


@pytest.mark.parametrize("spec", REGISTERED, ids=IDS)
def test_diagonal_continuity(spec):
    # sample points: [1, 10] for the additive kernels, default range otherwise
    k = make_kernel(spec)
    if k.flavor == "additive":
        x = np.geomspace(1.0, 10.0, 10)
    else:
        x = sample_points(k, 10, hi=0.95 if k.flavor == "multiplicative-inner" else None)
    eps = 1e-7
    assert np.max(np.abs(kernel_value(k, x, x + eps) - kernel_value(k, x, x))) <= 1e-6


@pytest.mark.parametrize("spec", REGISTERED, ids=IDS)
def test_diagonal_branches_agree(spec):
    # just outside the switch: difference quotient against the diagonal formula
    k = make_kernel(spec)
    x = sample_points(k, 10, hi=0.9 if k.flavor == "multiplicative-inner" else None)
    e = 2e-6 * np.maximum(1.0, x)
    far = _raw_value(k, x, x + e)
    near = k.diagonal(x + e / 2)
    assert np.max(np.abs(far - near)) <= 1e-6 * max(1.0, np.max(np.abs(near)))


@pytest.mark.parametrize("spec", REGISTERED, ids=IDS)
def test_dsum_agreement(spec):
    k = make_kernel(spec)
    g = sample_points(k, 20)
    X, Y = np.meshgrid(g[0::2], g[1::2], indexing="ij")
    analytic, numeric = kernel_dsum(k, X, Y)
    assert np.max(np.abs(analytic - numeric)) <= 1e-5


def test_dsum_examples():
    k = make_kernel("airy:s=0")
    a, n = kernel_dsum(k, 1.0, 2.0)
    assert a == pytest.approx(-sf.eval_airy(1.0).value * sf.eval_airy(2.0).value, rel=1e-13)
    assert abs(a - n) <= 1e-6
    k = make_kernel("laguerre:n=0")
    x, y = 1.5, 3.0
    u = lambda t: t * math.exp(-t / 2)
    a, n = kernel_dsum(k, x, y)
    assert a == pytest.approx(-u(x) * u(y) / (x * y), rel=1e-13)
    assert abs(a - n) <= 1e-6


def test_parabolic_dsum_coefficient():
    # quarter, not half: see the derivation from the Weber system
    k = make_kernel("parabolic:p=3")
    x, y = 1.0, 2.0
    phi = sf.eval_hermite_fn(3, np.array([x, y])).value
    a, n = kernel_dsum(k, x, y)
    assert a == pytest.approx(-0.25 * (x + y) * phi[0] * phi[1], rel=1e-12)
    assert abs(a - n) <= 1e-8
    # the p = 2 case at (1, 2) is degenerate: He_2(1) = 0
    a2, _ = kernel_dsum(make_kernel("parabolic:p=2"), 1.0, 2.0)
    assert abs(a2) < 1e-15


def test_domain_checks():
    with pytest.raises(sf.DomainError):
        kernel_value(make_kernel("airy"), -1.0, 1.0)
    with pytest.raises(sf.DomainError):
        kernel_value(make_kernel("macdonald"), 0.5, 2.0)
    with pytest.raises(sf.DomainError):
        kernel_value(make_kernel("bessel_mult"), 0.5, 1.5)


@pytest.mark.parametrize("n,lam,closed", [(0, 0.5, 1.0), (1, 0.5, 0.0), (2, 1.0, 3 * 0.25 / 1.5**4)])
def test_laplace_examples(n, lam, closed):
    res, quad, c = laplace_transform_check(n, lam)
    assert c == pytest.approx(closed, abs=1e-15)
    assert res <= (1e-10 if n == 0 else 1e-8)


def test_laplace_margin():
    with pytest.raises(ValueError):
        laplace_transform_check(1, -0.45)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 8.0), st.floats(0.2, 8.0))
def test_airy_kernel_property_cauchy_schwarz(x, y):
    # Cauchy-Schwarz for the Gram form: W(x,y)^2 <= W(x,x) W(y,y)
    k = make_kernel("airy")
    assert kernel_value(k, x, y) ** 2 <= kernel_value(k, x, x) * kernel_value(k, y, y) * (1 + 1e-10) + 1e-300


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 15.0), st.floats(1.0, 15.0))
def test_macdonald_kernel_property_cauchy_schwarz(x, y):
    k = make_kernel("macdonald:nu=0.5")
    assert kernel_value(k, x, y) ** 2 <= kernel_value(k, x, x) * kernel_value(k, y, y) * (1 + 1e-9) + 1e-300
