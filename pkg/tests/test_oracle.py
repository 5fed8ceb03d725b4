import math

import numpy as np
import pytest

from oscibif import asymptotics as asy
from oscibif import oracle, timemap
from oscibif.model import ProblemParams
from oscibif.oracle import (
    RateFit,
    ShootResult,
    VerificationReport,
    check_lemma_2_1,
    check_lemma_2_2,
    drift_ratio,
    fit_rate,
    shoot,
    third_order_ratio,
    verify,
)

P3 = ProblemParams(3.0)


# --- shooting -------------------------------------------------------------------------


@pytest.mark.parametrize("p,alpha", [(3.0, 1.0), (3.0, 100.0), (2.0, 0.01), (2.5, 10.0)])
def test_shooting_closes(p, alpha):
    pp = ProblemParams(p)
    mu = timemap.mu_of_alpha(pp, alpha)
    res = shoot(pp, alpha, mu)
    assert res.max_residual <= 1e-6 * max(1.0, alpha)
    assert drift_ratio(res, pp, alpha, mu, oracle.SHOOT_TOL) < 1.0


def test_shooting_detects_wrong_mu():
    mu = timemap.mu_of_alpha(P3, 1.0)
    res = shoot(P3, 1.0, 1.01 * mu)
    assert abs(res.residual_end) > 1e-4


def test_shooting_small_alpha_from_leading_term():
    a = 0.01
    c03 = asy.const_C0(3.0)
    res = shoot(ProblemParams(5.0), a, 8 * c03**2 / (a * a))
    assert abs(res.residual_peak) / a < 1e-2


def test_shoot_argument_checks():
    with pytest.raises(ValueError):
        shoot(P3, 1.0, 0.0)
    with pytest.raises(ValueError):
        shoot(P3, 1.0, 1.0, tol=0.0)
    with pytest.raises(ArithmeticError):
        ShootResult(float("nan"), 0.0, 0.0, 1, 0.0)
    with pytest.raises(ValueError):
        ShootResult(0.0, 0.0, 0.0, 0, 0.0)


def test_loose_tolerance_degrades_closure():
    mu = timemap.mu_of_alpha(P3, 10.0)
    tight = shoot(P3, 10.0, mu, 1e-10)
    loose = shoot(P3, 10.0, mu, 1e-3)
    assert loose.steps < tight.steps
    assert loose.max_residual > tight.max_residual


# --- kernel identities -------------------------------------------------------------------


@pytest.mark.parametrize("p,alpha,tol", [(3.0, 25.0, 1e-6), (4.0, 100.0, 1e-6), (2.5, 5.0, 1e-5)])
def test_kernel_identity_examples(p, alpha, tol):
    r = check_lemma_2_1(p, alpha)
    assert set(r) == {"res_I1", "res_II1"}
    assert r["res_I1"] < tol and r["res_II1"] < tol


def test_kernel_identity_requires_p_above_two():
    with pytest.raises(ValueError):
        check_lemma_2_1(2.0, 10.0)


def test_third_order_decay_slope():
    fit = check_lemma_2_2(3.0, [50.0, 100.0, 200.0, 400.0])
    assert fit.slope < -3.8
    assert fit.r_squared > 0.9


def test_third_order_decay_argument_checks():
    with pytest.raises(ValueError):
        check_lemma_2_2(3.0, [50.0, 100.0, 200.0])
    with pytest.raises(ValueError):
        check_lemma_2_2(1.5, [50.0, 100.0, 200.0, 400.0])


@pytest.mark.parametrize("alpha,tol", [(50.0, 5e-3), (200.0, 5e-4)])
def test_third_order_ratio(alpha, tol):
    assert abs(third_order_ratio(3.0, alpha) - 1.0) < tol


# --- rate fits ---------------------------------------------------------------------------


def test_fit_rate_synthetic_power():
    x = np.geomspace(10, 1000, 9)
    fit = fit_rate(x, 3.0 * x**-4.0)
    assert fit.slope == pytest.approx(-4.0, abs=1e-6)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_rate_noisy():
    rng = np.random.default_rng(0)
    x = np.geomspace(1, 1e4, 60)
    y = x**-1.5 * np.exp(rng.normal(0, 0.05, x.size))
    fit = fit_rate(x, y)
    assert abs(fit.slope + 1.5) < 0.05
    assert fit.r_squared > 0.99


def test_fit_rate_constant():
    fit = fit_rate([1.0, 2.0, 4.0], [5.0, 5.0, 5.0])
    assert fit.slope == pytest.approx(0.0, abs=1e-14)
    assert fit.r_squared == 1.0


@pytest.mark.parametrize(
    "xs,ys",
    [([1.0, 2.0], [1.0, 2.0]), ([1.0, 2.0, 3.0], [1.0, 0.0, 1.0]), ([1.0, -2.0, 3.0], [1.0, 1.0, 1.0]), ([1.0, 2.0, 3.0], [1.0, 2.0])],
)
def test_fit_rate_rejects_bad_data(xs, ys):
    with pytest.raises(ValueError):
        fit_rate(xs, ys)


def test_rate_fit_validates_r_squared():
    with pytest.raises(ValueError):
        RateFit(1.0, 0.0, 1.5)


# --- report ----------------------------------------------------------------------------


def test_report_bookkeeping():
    rep = VerificationReport(3.0, 1.0)
    rep.add("a", 0.5, 1.0, "<")
    rep.add("b", 1.0, 1.0, "<=")
    assert rep.passed
    rep.add("c", float("nan"), 0.0, ">")
    assert not rep.passed
    d = rep.to_dict()
    assert [c["name"] for c in d["checks"]] == ["a", "b", "c"]
    assert "FAIL" in rep.to_text().splitlines()[-1]
    with pytest.raises(ValueError):
        rep.add("d", 1.0, 1.0, "==")


def test_remainder_window():
    lo, hi = oracle.remainder_window(3.0)
    assert hi == 800.0 and lo == 50.0
    lo, hi = oracle.remainder_window(6.0)
    assert 2.0 <= lo < hi < 30.0


@pytest.mark.parametrize("p,b", [(3.0, 1.0), (2.5, 0.0)])
def test_verify_quick_passes(p, b):
    rep = verify(ProblemParams(p, b), quick=True)
    failed = [c.name for c in rep.checks if not c.passed]
    assert rep.passed, failed
    names = {c.name for c in rep.checks}
    assert {"beta_C0", "beta_E0", "shooting_energy_drift_ratio"} <= names


def test_verify_detects_loose_shooting():
    rep = verify(P3, tol=1e-2, quick=True)
    assert not rep.passed
    assert any(c.name.startswith("shooting") and not c.passed for c in rep.checks)
