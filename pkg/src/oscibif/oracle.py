"""Independent checks: shooting residuals, kernel identities and rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import asymptotics as asy
from . import kernels, timemap
from .model import ProblemParams, check_alpha, osc_A, osc_B, potential_F
from .quad import QuadSpec, integrate

SHOOT_TOL = 1e-10
MAX_STEPS = 20_000_000


@dataclass(frozen=True)
class ShootResult:
    """Terminal residuals of the initial value problem started from x = 0."""

    residual_peak: float
    residual_slope: float
    residual_end: float
    steps: int
    energy_drift: float

    def __post_init__(self):
        vals = (self.residual_peak, self.residual_slope, self.residual_end, self.energy_drift)
        if not all(math.isfinite(v) for v in vals):
            raise ArithmeticError("non-finite shooting residual")
        if self.steps <= 0:
            raise ValueError("steps must be positive")

    @property
    def max_residual(self) -> float:
        return max(abs(self.residual_peak), abs(self.residual_slope), abs(self.residual_end))


def shoot(params: ProblemParams, alpha: float, mu: float, tol: float = SHOOT_TOL) -> ShootResult:
    """Integrate u'' = -mu f(u), u(0) = 0, u'(0) = sqrt(2 mu F(alpha)) over [0, 1].

    Raises ``FloatingPointError`` on step-size underflow or an exhausted step
    budget.
    """
    alpha = check_alpha(alpha)
    if not mu > 0.0:
        raise ValueError("mu must be positive")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    v0 = math.sqrt(2.0 * mu * potential_F(params, alpha))
    u_half, v_half, u_end, _, steps, drift = kernels.shoot_dp45(params.p, mu, alpha, 0.0, v0, tol, MAX_STEPS)
    return ShootResult(u_half - alpha, v_half, u_end, int(steps), float(drift))


def drift_ratio(result: ShootResult, params: ProblemParams, alpha: float, mu: float, tol: float) -> float:
    """Energy drift relative to the allowance 10 tol (1 + mu F(alpha))."""
    return result.energy_drift / (10.0 * tol * (1.0 + mu * potential_F(params, alpha)))


# --- rate fits ----------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must lie in [0, 1]")


def fit_rate(xs: Sequence[float], ys: Sequence[float]) -> RateFit:
    """Least-squares line through (ln x, ln y)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be one-dimensional and of equal length")
    if x.size < 3:
        raise ValueError("at least 3 points are required")
    if np.any(x <= 0.0) or np.any(y <= 0.0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("rate fits need positive finite data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(slope), float(intercept), r2)


# --- kernel identities ----------------------------------------------------------------

_IDENTITY_TOL = dict(abs_tol=1e-14, rel_tol=1e-13)


def _one_minus_pow(k, t):
    return -np.expm1(k * np.log1p(-t))


def _kernel_integral(params: ProblemParams, alpha: float, kernel: Callable, weight: Callable) -> float:
    """int_0^1 weight(s, t) kernel(alpha s) ds, t = 1 - s."""

    def h(s, sl, sr):
        return weight(s, sr) * kernel(params, alpha, alpha * s, alpha * sr)

    spec = QuadSpec(h, right_exponent=-0.5, frequency=2.0 * alpha, complement=True, max_level=12, **_IDENTITY_TOL)
    return integrate(spec).value


def _require_p_gt2(p):
    if not p > 2.0:
        raise ValueError("the identity checks assume p > 2")


def kernel_identity_sides(p: float, alpha: float) -> dict:
    """Direct quadrature of I1 = int A/(1-s^{p+1})^{3/2} and II1 = int B/(...)^{3/2}
    alongside C11 alpha^2 + C12 alpha and C21 alpha + C22."""
    params = ProblemParams(p)
    q = p + 1.0

    def w(s, t):
        d = _one_minus_pow(q, t)
        return 1.0 / (d * np.sqrt(d))

    i1 = _kernel_integral(params, alpha, osc_A, w)
    ii1 = _kernel_integral(params, alpha, osc_B, w)
    o = asy.osc_constants_large(p, alpha, check_signs=False)
    return {
        "I1": i1,
        "I1_constants": o["C11"] * alpha * alpha + o["C12"] * alpha,
        "II1": ii1,
        "II1_constants": o["C21"] * alpha + o["C22"],
    }


def check_lemma_2_1(p: float, alpha: float) -> dict:
    """Relative residuals {res_I1, res_II1} of the two kernel identities."""
    _require_p_gt2(p)
    alpha = check_alpha(alpha)
    sides = kernel_identity_sides(p, alpha)
    return {
        "res_I1": abs(sides["I1"] - sides["I1_constants"]) / abs(sides["I1"]),
        "res_II1": abs(sides["II1"] - sides["II1_constants"]) / abs(sides["II1"]),
    }


def third_order_term(p: float, alpha: float) -> float:
    """III = -3/16 (p+1) alpha^{-2p} int (1-s^2) A(alpha s)/(1-s^{p+1})^{5/2} ds."""
    params = ProblemParams(p)
    q = p + 1.0

    def w(s, t):
        d = _one_minus_pow(q, t)
        return _one_minus_pow(2, t) / d / d / np.sqrt(d)

    return -3.0 / 16.0 * q * alpha ** (-2.0 * p) * _kernel_integral(params, alpha, osc_A, w)


def third_order_ratio(p: float, alpha: float) -> float:
    """III(alpha) / (C3(alpha) alpha^{2(1-p)}); tends to 1 as alpha grows."""
    return third_order_term(p, alpha) / (asy.const_C3(p, alpha) * alpha ** (2.0 * (1.0 - p)))


def check_lemma_2_2(p: float, alphas: Sequence[float]) -> RateFit:
    """Decay of |III(alpha) - C3(alpha) alpha^{2(1-p)}| over ``alphas``."""
    _require_p_gt2(p)
    al = np.asarray(alphas, dtype=float)
    if al.size < 4:
        raise ValueError("at least 4 amplitudes are required")
    res = [abs(third_order_term(p, a) - asy.const_C3(p, a) * a ** (2.0 * (1.0 - p))) for a in al]
    return fit_rate(al, res)


# --- verification suite --------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    comparison: str  # "<", "<=" or ">"
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    p: float
    b: float
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, comparison, detail=""):
        value = float(value)
        if comparison == "<":
            ok = value < threshold
        elif comparison == "<=":
            ok = value <= threshold
        elif comparison == ">":
            ok = value > threshold
        else:
            raise ValueError(f"unknown comparison {comparison!r}")
        ok = bool(ok) and math.isfinite(value)
        self.checks.append(Check(name, value, float(threshold), comparison, ok, detail))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "b": self.b,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_text(self) -> str:
        lines = [f"verification p={self.p:g} b={self.b:g}"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.value:.6g} {c.comparison} {c.threshold:.6g}  {c.detail}".rstrip())
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


SHOOT_ALPHAS = (0.01, 0.1, 1.0, 10.0, 100.0)
IDENTITY_ALPHAS = (5.0, 25.0, 125.0)
THIRD_ORDER_ALPHAS = (50.0, 100.0, 200.0, 400.0)


def remainder_window(p: float) -> tuple[float, float]:
    """Amplitude window where the large-alpha remainder is above round-off."""
    hi = min(800.0, 1e-13 ** (1.0 / (2.0 * (1.0 - p))))
    lo = max(hi / 16.0, 2.0)
    return lo, hi


def large_remainder_fits(params: ProblemParams, alphas) -> tuple[RateFit, RateFit]:
    """Fits of the normalized mu and |v'|^2 residuals against the full expansions."""
    p = params.p
    rm, rg = [], []
    for a in alphas:
        cp = timemap.lambda_of_alpha(params, a)
        osc = asy.osc_constants_large(p, a, check_signs=False)
        m = asy.mu_large(params, a, osc=osc)
        g = asy.gradsq_large(params, a, osc=osc)
        rm.append(abs(math.sqrt(cp.mu / m.prefactor) - m.bracket()))
        rg.append(abs(cp.grad_norm_sq / g.prefactor - g.bracket()))
    return fit_rate(alphas, np.maximum(rm, 1e-300)), fit_rate(alphas, np.maximum(rg, 1e-300))


def oscillation_agreement(p: float, alphas) -> float:
    """Fraction of amplitudes where sqrt(mu/(2(p+1)alpha^{1-p})) - C0 and
    C1 + C11(alpha)/2 share a sign."""
    params = ProblemParams(p)
    c0, c1 = asy.const_C0(p), asy.const_C1(p)
    q = p + 1.0
    agree = 0
    for a in alphas:
        mu = timemap.mu_of_alpha(params, a)
        resid = math.sqrt(mu / (2.0 * q * a ** (1.0 - p))) - c0
        c11 = 2.0 / q * asy._theta_integral(p, a, lambda S: np.cos(2 * a * S), (3.0 - p) / q)
        agree += np.sign(resid) == np.sign(c1 + 0.5 * c11)
    return agree / len(alphas)


def small_leading_ratio(params: ProblemParams, alpha: float) -> float:
    """Exact mu over its small-alpha leading term."""
    m = asy.mu_small(params, alpha, truncation=1)
    return timemap.mu_of_alpha(params, alpha) / m.value


def verify(params: ProblemParams, tol: float = SHOOT_TOL, quick: bool = False) -> VerificationReport:
    """Run the invariant suite for one (p, b).

    ``tol`` is the shooting tolerance.  ``quick`` thins the amplitude grids.
    """
    p, b = params.p, params.b
    rep = VerificationReport(p, b)

    rep.add("beta_C0", abs(asy.const_C0(p) - asy.const_C0_closed(p)), 1e-10, "<")
    rep.add("beta_E0", abs(asy.const_E0(p) - asy.const_E0_closed(p)), 1e-10, "<")

    drift = 0.0
    for a in SHOOT_ALPHAS:
        mu = timemap.mu_of_alpha(params, a)
        try:
            sr = shoot(params, a, mu, tol)
            val = sr.max_residual
            drift = max(drift, drift_ratio(sr, params, a, mu, tol))
        except (FloatingPointError, ArithmeticError):
            val = drift = math.inf
        rep.add(f"shooting_closure[alpha={a:g}]", val, 1e-7 * (1.0 + a), "<")
    rep.add("shooting_energy_drift_ratio", drift, 1.0, "<", "drift / (10 tol (1 + mu F(alpha)))")

    if p > 2.0:
        for a in IDENTITY_ALPHAS:
            r = check_lemma_2_1(p, a)
            rep.add(f"kernel_identity_I1[alpha={a:g}]", r["res_I1"], 1e-5, "<")
            rep.add(f"kernel_identity_II1[alpha={a:g}]", r["res_II1"], 1e-5, "<")
        fit = check_lemma_2_2(p, THIRD_ORDER_ALPHAS)
        rep.add("third_order_decay_slope", fit.slope, 2.0 * (1.0 - p) + 0.2, "<")

    # the residuals oscillate; sparse grids alias, so quick mode keeps all 17 points
    lo, hi = remainder_window(p)
    grid = np.geomspace(lo, hi, 17)
    fm, fg = large_remainder_fits(params, grid)
    claim = 2.0 * (1.0 - p)
    span = f"alpha in [{lo:.3g}, {hi:.3g}]"
    rep.add("mu_large_remainder_slope", fm.slope, claim + 0.15, "<=", span)
    rep.add("gradsq_large_remainder_slope", fg.slope, claim + 0.15, "<=", span)

    big = np.geomspace(200.0, 1000.0, 5 if quick else 9)
    lam = [timemap.lambda_of_alpha(params, a).lambda_ for a in big]
    target = (3.0 - p) if b > 0.0 else (1.0 - p)
    rep.add("lambda_large_slope_error", abs(fit_rate(big, lam).slope - target), 0.05, "<", f"target {target:g}")

    small = np.geomspace(1e-3, 1e-2, 5 if quick else 9)
    lam = [timemap.lambda_of_alpha(params, a).lambda_ for a in small]
    target = (1.0 - p) if p <= 3.0 + asy.REGIME_TOL else -2.0
    rep.add("lambda_small_slope_error", abs(fit_rate(small, lam).slope - target), 0.05, "<", f"target {target:g}")

    if abs(p - 3.0) <= asy.REGIME_TOL:
        rep.add("mu_small_leading_ratio_error", abs(small_leading_ratio(params, 1e-3) - 1.0), 5e-3, "<")
    else:
        exact = timemap.mu_of_alpha(params, 1e-3)
        rep.add("mu_small_expansion_error", abs(asy.mu_small(params, 1e-3).value / exact - 1.0), 5e-3, "<")

    if p > 2.0:
        alphas = np.geomspace(50.0, 500.0, 100 if quick else 400)
        rep.add("oscillation_sign_agreement", oscillation_agreement(p, alphas), 0.8, ">")
    return rep
