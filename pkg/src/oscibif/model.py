"""Nonlinearity f(u) = u^p + u sin^2 u, its potential, and the remainder series.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class ProblemParams:
    """Exponent ``p > 1`` and Kirchhoff coefficient ``b >= 0``."""

    p: float
    b: float = 0.0

    def __post_init__(self):
        if not (self.p > 1.0) or not math.isfinite(self.p):
            raise ValueError(f"exponent p must satisfy p > 1, got {self.p!r}")
        if not (self.b >= 0.0) or not math.isfinite(self.b):
            raise ValueError(f"Kirchhoff coefficient b must satisfy b >= 0, got {self.b!r}")


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0.0) or not math.isfinite(alpha):
        raise ValueError(f"amplitude alpha must be positive and finite, got {alpha!r}")
    return alpha


def _nonneg(theta, name="theta"):
    arr = np.asarray(theta, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def _pow(theta: np.ndarray, p: float) -> np.ndarray:
    # theta >= 0 is enforced by callers, so non-integer p never goes complex
    return np.power(theta, p)


def _unwrap(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def f_eval(params: ProblemParams, theta):
    """f(theta) = theta^p + theta sin^2 theta for theta >= 0."""
    th = _nonneg(theta)
    return _unwrap(_pow(th, params.p) + th * np.sin(th) ** 2, theta)


def _x_minus_sinx(x: np.ndarray) -> np.ndarray:
    """x - sin x, accurate for small x."""
    out = x - np.sin(x)
    small = np.abs(x) < 1.0
    if np.any(small):
        xs = x[small] if out.ndim else x
        x2 = xs * xs
        term = xs * x2 / 6.0
        acc = np.zeros_like(xs)
        for n in range(1, 14):
            acc = acc + term
            term = -term * x2 / ((2 * n + 2) * (2 * n + 3))
        if out.ndim:
            out[small] = acc
        else:
            out = acc
    return out


def oscillatory_potential(theta):
    """P(theta) = theta^2/4 - theta sin(2 theta)/4 - cos(2 theta)/8 + 1/8.

    Evaluated as ((theta - sin(2 theta)/2)^2 + sin^4 theta) / 4, which has no
    cancellation for small theta.
    """
    th = np.asarray(theta, dtype=float)
    g = 0.5 * _x_minus_sinx(2.0 * th)
    return 0.25 * (g * g + np.sin(th) ** 4)


def potential_F(params: ProblemParams, theta):
    """F(theta) = int_0^theta f, closed form."""
    th = _nonneg(theta)
    q = params.p + 1.0
    return _unwrap(_pow(th, q) / q + oscillatory_potential(th), theta)


def potential_gap(params: ProblemParams, alpha: float, s, t=None):
    """F(alpha) - F(alpha s) without cancellation near s = 1.

    ``t`` is ``1 - s``; pass it explicitly when s is close to 1.
    """
    s_arr = np.asarray(s, dtype=float)
    t_arr = 1.0 - s_arr if t is None else np.asarray(t, dtype=float)
    return _unwrap(kernels.radicand(params.p, alpha, s_arr, t_arr), s)


def _check_theta_alpha(alpha, theta):
    th = _nonneg(theta)
    if np.any(th > alpha):
        raise ValueError("theta must not exceed alpha")
    return th


def _gap_arg(alpha, th, gap):
    return alpha - th if gap is None else np.asarray(gap, dtype=float)


def osc_A(params: ProblemParams, alpha: float, theta, gap=None):
    """(p+1)/4 (alpha sin 2alpha - theta sin 2theta).

    ``gap = alpha - theta`` may be passed to avoid cancellation near
    theta = alpha.
    """
    alpha = check_alpha(alpha)
    th = _check_theta_alpha(alpha, theta)
    d = _gap_arg(alpha, th, gap)
    # alpha (sin 2a - sin 2th) + d sin 2th, with the sine difference as a product
    val = 0.25 * (params.p + 1.0) * (2.0 * alpha * np.cos(alpha + th) * np.sin(d) + d * np.sin(2.0 * th))
    return _unwrap(val, theta)


def osc_B(params: ProblemParams, alpha: float, theta, gap=None):
    """(p+1)/8 (cos 2alpha - cos 2theta); ``gap`` as in :func:`osc_A`."""
    alpha = check_alpha(alpha)
    th = _check_theta_alpha(alpha, theta)
    d = _gap_arg(alpha, th, gap)
    val = -0.25 * (params.p + 1.0) * np.sin(alpha + th) * np.sin(d)
    return _unwrap(val, theta)


# --- small-amplitude remainder series ---------------------------------------

SERIES_CAP = 40


def _series(alpha, w, n_max, coef):
    if n_max is not None and n_max < 3:
        raise ValueError("n_max must be at least 3")
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0.0) or np.any(w_arr > 1.0):
        raise ValueError("w must lie in [0, 1]")
    total = np.zeros_like(w_arr)
    last = SERIES_CAP if n_max is None else n_max
    for n in range(3, last + 1):
        term = coef(n) * alpha ** (2 * n) * (1.0 - w_arr ** (2 * n))
        total = total + term
        if n_max is None and np.all(np.abs(term) <= 1e-16 * np.abs(total)):
            break
    return _unwrap(total, w)


def small_alpha_H(params: ProblemParams, alpha: float, w, n_max: int | None = None):
    """Sine-part of the remainder: sum_{n>=3} (-1)^n 2^{2n-3}/(2n-1)! alpha^{2n} (1 - w^{2n})."""
    return _series(alpha, w, n_max, lambda n: (-1) ** n * 2.0 ** (2 * n - 3) / math.factorial(2 * n - 1))


def small_alpha_J(params: ProblemParams, alpha: float, w, n_max: int | None = None):
    """Cosine-part of the remainder: -sum_{n>=3} (-1)^n 2^{2n-3}/(2n)! alpha^{2n} (1 - w^{2n})."""
    return _series(alpha, w, n_max, lambda n: -((-1) ** n) * 2.0 ** (2 * n - 3) / math.factorial(2 * n))


def small_alpha_M(params: ProblemParams, alpha: float, w, n_max: int | None = None):
    """M = H + J, so that

    F(alpha) - F(alpha w) = alpha^{p+1}(1 - w^{p+1})/(p+1) + alpha^4 (1 - w^4)/4 + M.

    ``n_max=None`` truncates automatically (relative term size 1e-16, at most
    40 terms).
    """
    alpha = check_alpha(alpha)
    return _series(
        alpha,
        w,
        n_max,
        lambda n: (-1) ** n * 2.0 ** (2 * n - 3) * (1.0 / math.factorial(2 * n - 1) - 1.0 / math.factorial(2 * n)),
    )


# 8 (1/5! - 1/6!) = 1/18
_K_SCALE = 8.0 * (1.0 / 120.0 - 1.0 / 720.0)


def small_alpha_K(params: ProblemParams, s, t=None):
    """K(s) = -8(p+1)(1/5! - 1/6!)(1 - s^6)/(1 - s^{p+1}) on [0, 1].

    At s = 1 the ratio is replaced by its limit 6/(p+1).  ``t = 1 - s`` may be
    supplied for accuracy near the endpoint.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ValueError("s must lie in [0, 1]")
    t_arr = 1.0 - s_arr if t is None else np.asarray(t, dtype=float)
    q = params.p + 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        lt = np.log1p(-t_arr)
        ratio = np.expm1(6.0 * lt) / np.expm1(q * lt)
    ratio = np.where(t_arr == 0.0, 6.0 / q, ratio)
    return _unwrap(-q * _K_SCALE * ratio, s)
