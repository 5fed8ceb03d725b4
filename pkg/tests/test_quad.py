import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as scipy_beta

from oscibif.quad import (
    CumulativeIntegral,
    InnerFamily,
    QuadratureError,
    QuadResult,
    QuadSpec,
    beta_value,
    integrate,
    integrate_nested,
    phase_nodes,
)

mp.mp.dps = 30


def _om(k, t):
    return -np.expm1(k * np.log1p(-t))


def test_inverse_sqrt_endpoint():
    res = integrate(QuadSpec(lambda s, sl, sr: sr**-0.5, right_exponent=-0.5, complement=True))
    assert res.value == pytest.approx(2.0, rel=1e-13)
    assert res.error_estimate >= 0.0 and res.evaluations > 0


def test_quartic_radicand_matches_beta():
    res = integrate(QuadSpec(lambda s, sl, sr: _om(4, sr) ** -0.5, right_exponent=-0.5, complement=True))
    assert res.value == pytest.approx(1.31102877714606, rel=1e-13)
    assert res.value == pytest.approx(beta_value(0.25, 0.5) / 4, rel=1e-13)


def test_cosine_many_periods():
    a = 50.0
    res = integrate(QuadSpec(lambda s: np.cos(2 * a * s), frequency=2 * a))
    assert res.value == pytest.approx(math.sin(100.0) / 100.0, rel=1e-11)
    assert res.value == pytest.approx(-0.00506366, abs=1e-8)


def test_plain_integrand_without_complement():
    res = integrate(QuadSpec(np.exp, lower=-1.0, upper=2.0))
    assert res.value == pytest.approx(math.exp(2) - math.exp(-1), rel=1e-13)


@pytest.mark.parametrize("sigma", [-0.9, -0.5, -0.1])
def test_left_singularity_exactness(sigma):
    res = integrate(QuadSpec(lambda s, sl, sr: sl**sigma, left_exponent=sigma, complement=True, rel_tol=1e-13))
    assert abs(res.value * (sigma + 1) - 1.0) < 1e-10


@pytest.mark.parametrize("omega", [1.0, 7.5, 100.0, 999.0, 1000.0])
def test_oscillatory_exactness(omega):
    res = integrate(QuadSpec(lambda s: np.sin(omega * s), frequency=omega, abs_tol=1e-15, rel_tol=1e-13))
    exact = (1 - math.cos(omega)) / omega
    assert abs(res.value / exact - 1.0) < 1e-10


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0, 4.0, 6.0])
def test_beta_cross_check(p):
    q = p + 1
    res = integrate(QuadSpec(lambda s, sl, sr: _om(q, sr) ** -0.5, right_exponent=-0.5, complement=True))
    assert abs(res.value - beta_value(1 / q, 0.5) / q) < 1e-10


@settings(max_examples=30, deadline=None)
@given(
    c1=st.floats(-5, 5),
    c2=st.floats(-5, 5),
    k=st.floats(0.1, 20),
    m=st.floats(0.0, 3.0),
)
def test_linearity(c1, c2, k, m):
    def f(s):
        return np.cos(k * s)

    def g(s):
        return np.exp(m * s) * s**2

    rf = integrate(QuadSpec(f, frequency=k))
    rg = integrate(QuadSpec(g))
    rc = integrate(QuadSpec(lambda s: c1 * f(s) + c2 * g(s), frequency=k))
    bound = 2 * (abs(c1) * rf.error_estimate + abs(c2) * rg.error_estimate + rc.error_estimate) + 1e-12
    assert abs(rc.value - (c1 * rf.value + c2 * rg.value)) <= bound


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(np.sin, left_exponent=-1.0)
    with pytest.raises(ValueError):
        QuadSpec(np.sin, abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadSpec(np.sin, lower=1.0, upper=1.0)
    with pytest.raises(ValueError):
        QuadSpec(np.sin, frequency=-1.0)
    with pytest.raises(ValueError):
        QuadResult(1.0, -1.0, 3)


def test_nonconvergence_reports_best_estimate():
    spec = QuadSpec(lambda x: np.sin(1.0 / x), lower=1e-3, upper=1.0, rel_tol=1e-15, abs_tol=1e-300, max_level=4)
    with pytest.raises(QuadratureError) as info:
        integrate(spec)
    best = info.value.result
    assert isinstance(best, QuadResult)
    assert math.isfinite(best.value) and best.error_estimate > 0


def test_interior_nan_is_an_error():
    def f(x):
        return np.where(np.abs(x - 0.3) < 0.05, np.nan, 1.0)

    with pytest.raises(QuadratureError):
        integrate(QuadSpec(f))


# --- phase splitting ---------------------------------------------------------------


def test_phase_nodes_linear_phase():
    nodes = phase_nodes(lambda x: 10.0 * x, 0.0, 1.0)
    assert np.allclose(nodes, np.pi / 10 * np.arange(1, 4), rtol=1e-14)


def test_phase_nodes_nonlinear_decreasing():
    # phase 2 a sin^{1/2}(theta): nodes where it equals k pi
    a = 20.0

    def ph(x):
        return 2 * a * np.sin(x) ** 0.5

    nodes = phase_nodes(ph, 0.0, math.pi / 2)
    assert nodes.size == math.floor(2 * a / math.pi)
    k = np.round(ph(nodes) / math.pi)
    assert np.allclose(ph(nodes), k * math.pi, rtol=1e-12)


def test_nonlinear_phase_integral():
    # int_0^{pi/2} cos(2 a sin t) cos t dt = sin(2a) / (2a)
    a = 150.0
    spec = QuadSpec(
        lambda t: np.cos(2 * a * np.sin(t)) * np.cos(t),
        upper=math.pi / 2,
        phase=lambda t: 2 * a * np.sin(t),
        rel_tol=1e-12,
        abs_tol=1e-15,
    )
    assert integrate(spec).value == pytest.approx(math.sin(2 * a) / (2 * a), rel=1e-10)


# --- Beta ----------------------------------------------------------------------------


def test_beta_examples():
    assert beta_value(1, 1) == pytest.approx(1.0, rel=1e-15)
    assert beta_value(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    assert beta_value(0.25, 0.5) == pytest.approx(5.24411510858424, rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(1e-3, 300), b=st.floats(1e-3, 300))
def test_beta_against_scipy(a, b):
    ref = scipy_beta(a, b)
    if ref == 0.0:
        return
    assert beta_value(a, b) == pytest.approx(ref, rel=1e-12)


def test_beta_against_mpmath():
    for a, b in ((1 / 3, 0.5), (1 / 7, 1.5), (2.5, 0.25)):
        assert beta_value(a, b) == pytest.approx(float(mp.beta(a, b)), rel=1e-13)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, -2.0)])
def test_beta_domain(a, b):
    with pytest.raises(ValueError):
        beta_value(a, b)


# --- nested integrals ----------------------------------------------------------------


def _c3_inner(q):
    def inner(y, yl, yr):
        d = _om(q, yr)
        return _om(2, yr) / d / d / np.sqrt(d)

    return InnerFamily(inner, complement=True, growth_exponent=-0.5)


def test_nested_constant_inner():
    a = 10.0
    fam = InnerFamily(lambda y, yl, yr: np.ones_like(y), complement=True)
    outer = QuadSpec(lambda s: np.cos(2 * a * s), right_exponent=-0.5, frequency=2 * a)
    res = integrate_nested(outer, fam)
    # a unit inner integrand gives I(s) = s, hence int_0^1 s cos(2 a s) ds
    exact = math.sin(2 * a) / (2 * a) + (math.cos(2 * a) - 1) / (4 * a * a)
    assert res.value == pytest.approx(exact, rel=1e-12)


def test_nested_unit_outer_against_swapped_order():
    # int_0^1 int_0^s h = int_0^1 (1 - y) h(y) dy
    q = 4.0
    table = CumulativeIntegral(_c3_inner(q))
    outer = QuadSpec(lambda s: np.ones_like(s), right_exponent=-0.5)
    res = integrate_nested(outer, table)

    def h(y):
        return (1 - y) * (1 - y**2) / (1 - y**q) ** mp.mpf(2.5)

    ref = mp.quad(h, [0, 0.5, 0.9, 0.99, 1])
    assert res.value == pytest.approx(float(ref), rel=1e-8)


def test_nested_oscillatory_against_swapped_order():
    # int_0^1 I(s) cos(2 a s) ds = int_0^1 h(y) (sin 2a - sin 2a y) / (2a) dy
    q, a = 4.0, 40.0
    outer = QuadSpec(lambda s: np.cos(2 * a * s), right_exponent=-0.5, frequency=2 * a, rel_tol=1e-12, abs_tol=1e-15)
    res = integrate_nested(outer, _c3_inner(q))

    def h(t):
        # written in t = 1 - y so that nodes next to y = 1 keep full precision
        y = 1 - t
        d = -mp.expm1(q * mp.log1p(-t))
        return t * (2 - t) / d ** mp.mpf(2.5) * 2 * mp.cos(a * (1 + y)) * mp.sin(a * t) / (2 * a)

    ref = mp.quad(h, [mp.mpf(k) / 100 for k in range(101)])
    assert res.value == pytest.approx(float(ref), rel=1e-7)


def test_cumulative_table_accuracy():
    table = CumulativeIntegral(_c3_inner(4.0))
    for s in (0.1, 0.5, 0.9, 0.999):
        ref = mp.quad(lambda y: (1 - y**2) / (1 - y**4) ** mp.mpf(2.5), [0, s])
        assert table(s) == pytest.approx(float(ref), rel=1e-10)


def test_nested_contract_checks():
    fam = InnerFamily(lambda y, yl, yr: np.ones_like(y), complement=True)
    with pytest.raises(ValueError):
        integrate_nested(QuadSpec(np.cos, right_exponent=0.0), fam)
    with pytest.raises(ValueError):
        integrate_nested(QuadSpec(np.cos, upper=2.0, right_exponent=-0.5), fam)
    with pytest.raises(ValueError):
        CumulativeIntegral(InnerFamily(np.cos, growth_exponent=0.5))
