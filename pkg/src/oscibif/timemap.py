"""Exact bifurcation curves from the time map.

For the b = 0 problem the solution with sup-norm alpha satisfies
v' = sqrt(2 mu (F(alpha) - F(v))) on [0, 1/2], hence

    G(alpha) = alpha * int_0^1 ds / sqrt(F(alpha) - F(alpha s)),
    mu       = 2 G^2,
    |v'|^2   = 2 sqrt(2 mu) alpha int_0^1 sqrt(F(alpha) - F(alpha s)) ds,
    lambda   = (b |v'|^2 + 1) mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ProblemParams, check_alpha, osc_A, osc_B
from .quad import QuadResult, QuadSpec, integrate

DEFAULT_REL_TOL = 1e-14
POINTS_PER_DECADE = 40


class RadicandError(ArithmeticError):
    """F(alpha) - F(theta) came out negative inside the interval."""


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    mu: float
    grad_norm_sq: float
    lambda_: float
    err_mu: float
    err_grad: float

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mu": self.mu,
            "grad_norm_sq": self.grad_norm_sq,
            "lambda": self.lambda_,
            "err_mu": self.err_mu,
            "err_grad": self.err_grad,
        }


@dataclass(frozen=True)
class Profile:
    xs: np.ndarray
    vs: np.ndarray
    alpha: float
    mu: float


def _gap(params: ProblemParams, alpha: float, s, t):
    d = kernels.radicand(params.p, alpha, s, t)
    if np.any(d < 0.0):
        raise RadicandError(f"negative potential gap at alpha={alpha!r}")
    return d


def _spec(integrand, alpha, right_exponent, rel_tol):
    return QuadSpec(
        integrand,
        right_exponent=right_exponent,
        frequency=2.0 * alpha,
        abs_tol=1e-300,
        rel_tol=rel_tol,
        complement=True,
        max_level=12,
    )


def time_map_result(params: ProblemParams, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> QuadResult:
    """G(alpha) with its quadrature error estimate."""
    alpha = check_alpha(alpha)

    def h(s, sl, sr):
        return 1.0 / np.sqrt(_gap(params, alpha, s, sr))

    res = integrate(_spec(h, alpha, -0.5, rel_tol))
    return QuadResult(alpha * res.value, alpha * res.error_estimate, res.evaluations)


def time_map_G(params: ProblemParams, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """G(alpha) = int_0^alpha dtheta / sqrt(F(alpha) - F(theta))."""
    return time_map_result(params, alpha, rel_tol).value


def time_map_G_normalized(params: ProblemParams, alpha: float, rel_tol: float = 1e-11) -> float:
    """G(alpha) through the normalized radicand.

    Uses F(alpha) - F(alpha s) = alpha^{p+1}/(p+1) * N(s) with
    N = (1 - s^{p+1}) + (p+1)/4 alpha^{1-p} (1 - s^2) - alpha^{-(p+1)} (A + B).
    Independent of the kernel radicand; meant as a cross-check for
    moderate and large alpha.  The oscillatory blocks cancel near s = 1,
    which caps the attainable accuracy near 1e-12.
    """
    alpha = check_alpha(alpha)
    p = params.p
    q = p + 1.0

    def h(s, sl, sr):
        lt = np.log1p(-sr)
        n = -np.expm1(q * lt) + 0.25 * q * alpha ** (1.0 - p) * sr * (2.0 - sr)
        theta = np.minimum(alpha * s, alpha)
        n = n - alpha ** (-q) * (osc_A(params, alpha, theta) + osc_B(params, alpha, theta))
        return 1.0 / np.sqrt(n)

    res = integrate(_spec(h, alpha, -0.5, rel_tol))
    return math.sqrt(q) * alpha ** (0.5 * (1.0 - p)) * res.value


def mu_from_G(g: float) -> float:
    return 2.0 * g * g


def mu_of_alpha(params: ProblemParams, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """mu(alpha) = 2 G(alpha)^2; independent of b."""
    return mu_from_G(time_map_G(params, alpha, rel_tol))


def _energy_integral(params, alpha, rel_tol) -> QuadResult:
    def h(s, sl, sr):
        return np.sqrt(_gap(params, alpha, s, sr))

    return integrate(_spec(h, alpha, 0.5, rel_tol))


def grad_norm_sq(params: ProblemParams, alpha: float, mu: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """|v'|_2^2 = 2 sqrt(2 mu) int_0^alpha sqrt(F(alpha) - F(theta)) dtheta."""
    alpha = check_alpha(alpha)
    if not mu > 0.0:
        raise ValueError("mu must be positive")
    res = _energy_integral(params, alpha, rel_tol)
    return 2.0 * math.sqrt(2.0 * mu) * alpha * res.value


def lambda_of_alpha(params: ProblemParams, alpha: float, rel_tol: float = DEFAULT_REL_TOL) -> CurvePoint:
    """Exact curve point (mu, |v'|^2, lambda) at amplitude ``alpha``."""
    alpha = check_alpha(alpha)
    g = time_map_result(params, alpha, rel_tol)
    mu = mu_from_G(g.value)
    err_mu = 4.0 * g.value * g.error_estimate
    j = _energy_integral(params, alpha, rel_tol)
    gsq = 2.0 * math.sqrt(2.0 * mu) * alpha * j.value
    err_grad = gsq * (j.error_estimate / j.value + 0.5 * err_mu / mu)
    lam = (params.b * gsq + 1.0) * mu
    return CurvePoint(alpha, mu, gsq, lam, err_mu, err_grad)


def log_grid(alpha_min: float, alpha_max: float, points: int | None = None) -> np.ndarray:
    """Logarithmically spaced amplitudes; ``points`` defaults to 40 per decade."""
    lo, hi = check_alpha(alpha_min), check_alpha(alpha_max)
    if not hi > lo:
        raise ValueError("alpha_max must exceed alpha_min")
    if points is None:
        points = max(2, int(math.ceil(POINTS_PER_DECADE * math.log10(hi / lo))) + 1)
    grid = np.geomspace(lo, hi, points)
    grid[0], grid[-1] = lo, hi
    return grid


def curve(params: ProblemParams, alphas, rel_tol: float = DEFAULT_REL_TOL) -> list[CurvePoint]:
    return [lambda_of_alpha(params, a, rel_tol) for a in np.asarray(alphas, dtype=float)]


# --- solution profile ------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _profile_integrand(params, alpha, u):
    # dx/du on the branch s = 1 - u^2; finite at u = 0
    d = _gap(params, alpha, 1.0 - u * u, u * u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * u / np.sqrt(d)
    if np.any(u == 0.0):
        f_alpha = alpha**params.p + alpha * math.sin(alpha) ** 2
        out = np.where(u == 0.0, 2.0 / math.sqrt(alpha * f_alpha), out)
    return out


def _gl(params, alpha, lo, hi):
    """Gauss-Legendre integral of the profile integrand over [lo, hi] (vectorised)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    return half * (_profile_integrand(params, alpha, u) @ _GL_W)


def solution_profile(params: ProblemParams, alpha: float, n_points: int, mu: float | None = None) -> Profile:
    """v_alpha on a uniform grid of ``n_points`` points in [0, 1].

    Solves int_0^v dtheta / sqrt(2 mu (F(alpha) - F(theta))) = x on [0, 1/2]
    and mirrors.  Roots are bracketed from a cumulative table in
    u = sqrt(1 - v/alpha) and polished by safeguarded Newton.
    """
    alpha = check_alpha(alpha)
    if n_points < 3:
        raise ValueError("n_points must be at least 3")
    if mu is None:
        mu = mu_of_alpha(params, alpha)
    c = alpha / math.sqrt(2.0 * mu)

    k = max(256, int(math.ceil(8.0 * alpha)))
    knots = np.linspace(0.0, 1.0, k + 1)
    pieces = _gl(params, alpha, knots[:-1], knots[1:])
    cum = np.concatenate(([0.0], np.cumsum(pieces)))
    closure = 0.5 - c * cum[-1]
    if abs(closure) > 1e-8:
        raise ArithmeticError(f"profile table inconsistent with mu (x(0) = {closure:.3g})")

    xs = np.linspace(0.0, 1.0, n_points)
    half = (n_points + 1) // 2
    xh = xs[:half].copy()
    if n_points % 2:
        xh[-1] = 0.5
    target = (0.5 - xh) / c  # required value of int_0^u
    idx = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, k - 1)
    lo = knots[idx].copy()
    hi = knots[idx + 1].copy()
    base = cum[idx]
    span = pieces[idx]
    u = lo + (hi - lo) * np.clip((target - base) / np.where(span > 0, span, 1.0), 0.0, 1.0)
    for _ in range(60):
        phi = base + _gl(params, alpha, knots[idx], u) - target
        lo = np.where(phi < 0.0, u, lo)
        hi = np.where(phi < 0.0, hi, u)
        step = phi / _profile_integrand(params, alpha, u)
        nxt = u - step
        outside = ~((nxt > lo) & (nxt < hi))
        nxt = np.where(outside, 0.5 * (lo + hi), nxt)
        done = np.abs(nxt - u) <= 1e-15
        u = nxt
        if np.all(done):
            break
    vh = alpha * (1.0 - u) * (1.0 + u)
    vh = np.where(xh == 0.0, 0.0, vh)
    vh = np.where(xh == 0.5, alpha, vh)
    vs = np.concatenate((vh, vh[: n_points - half][::-1]))
    return Profile(xs, vs, alpha, mu)
