import json
import math

import numpy as np
import pytest

from hankelsq.quadrature import UnachievableTolerance
from hankelsq.verify import (
    DEFAULT_TOL,
    IDENTITY_TAGS,
    SUITE_NAMES,
    ConfigError,
    GridSpec,
    bessel_hard_integral,
    dumps,
    fit_anticommutator,
    hermite_ratios,
    hermite_wronskian_residual,
    run_suite,
    verify_identity,
    verify_nonfactorization,
    verify_spectral_square,
    write_tables,
)

SCHEMA = ["identity", "params", "grid", "max_abs_residual", "max_rel_residual", "tolerance", "pass",
          "gating", "wall_ms", "details"]

FAST_GATING = ["AIRY_FACT", "LAGUERRE_2_6", "BESSEL_2_9_DSUM", "CARLEMAN_2_11", "MACDONALD_5_5",
               "BESSELJ_5_8", "WHITTAKER_5_15", "SQRT_5_13", "LAPLACE_2_2"]


def test_every_tag_has_a_tolerance():
    assert set(DEFAULT_TOL) == set(IDENTITY_TAGS)
    assert len(IDENTITY_TAGS) == 11


def test_grid_avoids_diagonal():
    x, y = GridSpec(0.1, 10.0, 20).points()
    assert x.size == y.size == 20
    assert not np.intersect1d(x, y).size
    with pytest.raises(ConfigError):
        GridSpec(1.0, 0.5, 3)
    with pytest.raises(ConfigError):
        GridSpec.parse("1,2")


@pytest.mark.parametrize("tag", FAST_GATING)
def test_gating_identities_pass(tag):
    rep = verify_identity(tag)
    assert rep.gating
    assert rep.passed == (rep.max_rel_residual <= rep.tolerance)
    assert rep.passed, rep.max_rel_residual
    assert list(rep.to_dict()) == SCHEMA


def test_carleman_example_residual():
    assert verify_identity("CARLEMAN_2_11").max_rel_residual <= 1e-10


def test_macdonald_quarter():
    rep = verify_identity("MACDONALD_5_5", params={"nu": 0.25}, tol=1e-7)
    assert rep.passed
    assert rep.params == [{"nu": 0.25}]
    # the Omega-system kernel over sqrt(xy) is the displayed kernel
    assert rep.details["cases"][0]["system_kernel_max_abs_diff"] < 1e-14


def test_printed_forms_are_reported():
    lag = verify_identity("LAGUERRE_2_6", params={"n": 1})
    assert lag.details["cases"][0]["printed_form_rel_residual"] > 0.1
    bj = verify_identity("BESSELJ_5_8", params={"nu": 0.5})
    assert bj.details["cases"][0]["printed_orientation_rel_residual"] > 0.1
    wh = verify_identity("WHITTAKER_5_15", params={"kappa": -0.5, "nu": 0.25})
    assert wh.details["cases"][0]["printed_form_rel_residual"] > 1e-3
    assert wh.details["cases"][0]["uncollapsed_max_abs_diff"] < 1e-12


def test_custom_grid_and_rule_flavor():
    rep = verify_identity("AIRY_FACT", params={"s": 0.0}, grid=GridSpec(0.5, 3.0, 4))
    assert rep.grid["n"] == 4 and len(rep.table) == 16
    from hankelsq.quadrature import graded_rule

    with pytest.raises(ConfigError):
        verify_identity("AIRY_FACT", rule=graded_rule(0.0, 1.0, levels=4))


def test_unknown_tag():
    with pytest.raises(ConfigError):
        verify_identity("NOPE")


def test_unachievable_tolerance():
    with pytest.raises(UnachievableTolerance):
        verify_identity("BESSEL_2_9_INT", tol=1e-15)
    with pytest.raises(UnachievableTolerance):
        verify_identity("BESSEL_2_9_INT", tol=1e-8)


def test_bessel_integral_tail_correction_helps():
    X, Y = GridSpec(0.5, 5.0, 3).mesh()
    full, tail = bessel_hard_integral(X, Y)
    bare, _ = bessel_hard_integral(X, Y, correct_tail=False)
    from hankelsq.kernelzoo import kernel_value, make_kernel

    lhs = kernel_value(make_kernel("bessel_hard"), X, Y)
    assert np.max(np.abs(full - lhs)) < np.max(np.abs(bare - lhs)) / 100
    assert np.max(np.abs(tail)) > 0


def test_hermite_example_and_ratio():
    s, lhs, rhs, ratio = hermite_ratios(1, 0, (0.0,))[0]
    assert lhs == pytest.approx(-1 / (2 * math.sqrt(math.pi)), abs=1e-12)
    assert rhs == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)
    assert ratio == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    rep = verify_identity("HERMITE_2_16")
    assert not rep.gating
    with pytest.raises(ConfigError):
        verify_identity("HERMITE_2_16", params={"m": 1, "n": 1})


@pytest.mark.parametrize("m,n", [(1, 0), (2, 0), (2, 1), (5, 3)])
def test_hermite_wronskian_form_holds(m, n):
    assert hermite_wronskian_residual(m, n, (0.0, 0.5, 1.0, 2.0)) < 1e-13


def test_spectral_square_reports():
    rep = verify_spectral_square("airy:s=0", nodes=100)
    assert rep.passed and rep.max_rel_residual <= 1e-6
    assert rep.details["min_W_eigenvalue"] >= -1e-10
    wh = verify_spectral_square("whittaker:kappa=-0.5,nu=0.25", nodes=100)
    assert wh.details["compared_with"].startswith("Gamma^*")
    assert wh.passed
    with pytest.raises(ConfigError):
        verify_spectral_square("parabolic:p=2")


def test_nonfactorization_examples():
    rep = verify_nonfactorization(2, [1.0, 2.0])
    assert rep.passed
    assert np.allclose(rep.details["sum_matrix_eigenvalues"], [3 + math.sqrt(10), 3 - math.sqrt(10)], atol=1e-12)
    rep3 = verify_nonfactorization(3, [1.0, 2.0, 3.0])
    ev = rep3.details["sum_matrix_eigenvalues"]
    assert rep3.passed and sum(ev) == pytest.approx(12.0)
    assert rep3.details["dsum_mixed"]
    with pytest.raises(ValueError):
        verify_nonfactorization(2, [1.0])
    with pytest.raises(ValueError):
        verify_nonfactorization(2, [1.0, 1.0])


def test_anticommutator_fit():
    fit = fit_anticommutator(0, 80)
    assert fit["defined"]
    assert fit["c"] == pytest.approx(0.25, abs=1e-10)
    assert fit["residual"] < 1e-12
    with pytest.raises(ValueError):
        fit_anticommutator(11)


def test_anticommutator_zero_symbol_flagged():
    from hankelsq.verify import _fit

    out = _fit(np.eye(3), np.zeros((3, 3)), {})
    assert out["defined"] is False and out["c"] is None


def test_dumps_is_stable():
    text = dumps({"b": 0.1, "a": [1, 2.5e-17, float("inf")], "c": True, "d": None})
    assert text == '{"b": 0.10000000000000001, "a": [1, 2.4999999999999999e-17, "inf"], "c": true, "d": null}\n'
    json.loads(text)


def test_suite_filter_and_composition():
    summary, reports, code = run_suite({"only": ["carleman"]})
    assert [r.identity for r in reports] == ["CARLEMAN_2_11", "CARLEMAN_SPECTRA"]
    assert code == 0
    assert set(IDENTITY_TAGS) <= set(SUITE_NAMES)
    with pytest.raises(ConfigError):
        run_suite({"only": ["zzz"]})


def test_suite_gating_failure_sets_exit_one():
    # the finite-difference dsum check sits near 1e-10, far above this
    summary, reports, code = run_suite({"only": ["BESSEL_2_9_DSUM"], "tolerances": {"BESSEL_2_9_DSUM": 1e-13}})
    assert not reports[0].passed
    assert code == 1 and summary["failed_gating"] == ["BESSEL_2_9_DSUM"]


def test_suite_diagnostic_failure_keeps_exit_zero():
    summary, reports, code = run_suite({"only": ["HERMITE"]})
    assert not reports[0].passed and not reports[0].gating
    assert code == 0 and summary["failed_diagnostic"] == ["HERMITE_2_16"]


def test_suite_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        run_suite({"tolerances": {"NOPE": 1.0}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        run_suite({"path": str(bad)})
    extra = tmp_path / "extra.json"
    extra.write_text('{"colour": 1}')
    with pytest.raises(ConfigError):
        run_suite({"path": str(extra)})
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"tolerances": {"BESSEL_2_9_INT": 1e-15}, "only": ["BESSEL_2_9_INT"]}')
    with pytest.raises(UnachievableTolerance):
        run_suite({"path": str(cfg)})


def test_write_tables(tmp_path):
    rep = verify_identity("CARLEMAN_2_11", grid=GridSpec(1.0, 2.0, 2))
    files = write_tables([rep], tmp_path / "tables")
    rows = open(files[0]).read().splitlines()
    assert rows[0] == "x,y,lhs,rhs,abs,rel"
    assert len(rows) == 5
