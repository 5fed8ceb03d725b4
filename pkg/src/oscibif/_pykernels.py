"""Pure-Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` one for one and are used when the compiled
extension is unavailable (or when ``OSCIBIF_PURE_PYTHON`` is set).
"""

from __future__ import annotations

import math

import numpy as np

# Taylor coefficients of P(x) = x^2/4 - x sin(2x)/4 + sin^2(x)/4 = sum_{n>=2} c_n x^{2n}
_N_SERIES = 16
_P_COEF = np.array(
    [(-1) ** n * 2.0 ** (2 * n - 3) * (2 * n - 1) / math.factorial(2 * n) for n in range(2, _N_SERIES + 2)]
)
_P_POW = np.arange(2, _N_SERIES + 2) * 2
SERIES_SWITCH = 1.0


def radicand(p: float, alpha: float, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """F(alpha) - F(alpha*s) evaluated without cancellation.

    ``t`` must carry ``1 - s`` to full relative precision; both arrays are
    broadcast together.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    q = p + 1.0
    # 1 - s^q from the complement
    with np.errstate(divide="ignore"):  # s = 0 gives log1p(-1) = -inf, which expm1 maps to -1
        lt = np.log1p(-t)
    one_m_sq = -np.expm1(q * lt)
    power_part = alpha**q * one_m_sq / q
    if alpha <= SERIES_SWITCH:
        lt = lt[..., None]
        one_m = -np.expm1(_P_POW * lt)
        osc = (one_m * (_P_COEF * alpha**_P_POW)).sum(axis=-1)
    else:
        theta = alpha * s
        d = alpha * t
        sm = alpha + theta
        sd = np.sin(d)
        osc = 0.25 * (
            d * sm
            - (d * math.sin(2.0 * alpha) + 2.0 * theta * np.cos(sm) * sd)
            + np.sin(sm) * sd
        )
    return power_part + osc


def _f(p: float, u: float) -> float:
    if u >= 0.0:
        return u**p + u * math.sin(u) ** 2
    return -((-u) ** p) + u * math.sin(u) ** 2


def _F(p: float, u: float) -> float:
    a = abs(u)
    c = math.sin(a)
    if a < 0.5:
        # x - sin(x) cos(x) for small x via its series
        x2 = 2.0 * a
        k = x2 * x2 * x2 / 6.0
        term = k
        y = 0.0
        n = 1
        while abs(term) > 1e-18 * abs(k):
            y += term
            term *= -x2 * x2 / ((2 * n + 2) * (2 * n + 3))
            n += 1
        g = 0.5 * y
    else:
        g = a - c * math.cos(a)
    return a ** (p + 1.0) / (p + 1.0) + 0.25 * (g * g + c**4)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def shoot_dp45(
    p: float, mu: float, alpha: float, u0: float, v0: float, tol: float, max_steps: int
) -> tuple[float, float, float, float, int, float]:
    """Integrate u'' = -mu f(u) on [0, 1] from (u0, v0).

    Returns ``(u(1/2), u'(1/2), u(1), u'(1), accepted_steps, max_energy_drift)``.
    Raises ``FloatingPointError`` when the step size underflows.
    """
    x = 0.0
    u, v = u0, v0
    e0 = 0.5 * v0 * v0 + mu * _F(p, u0)
    drift = 0.0
    h = min(0.5, 0.01 / (1.0 + abs(v0)))
    steps = 0
    u_half = v_half = math.nan
    stops = (0.5, 1.0)
    k1u, k1v = v, -mu * _f(p, u)
    for stop in stops:
        while x < stop:
            if steps >= max_steps:
                raise FloatingPointError("step budget exhausted")
            hh = min(h, stop - x)
            if hh < 1e-14:
                raise FloatingPointError("step size underflow")
            u2 = u + hh * _A21 * k1u
            v2 = v + hh * _A21 * k1v
            k2u, k2v = v2, -mu * _f(p, u2)
            u3 = u + hh * (_A31 * k1u + _A32 * k2u)
            v3 = v + hh * (_A31 * k1v + _A32 * k2v)
            k3u, k3v = v3, -mu * _f(p, u3)
            u4 = u + hh * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
            v4 = v + hh * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
            k4u, k4v = v4, -mu * _f(p, u4)
            u5 = u + hh * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
            v5 = v + hh * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
            k5u, k5v = v5, -mu * _f(p, u5)
            u6 = u + hh * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
            v6 = v + hh * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
            k6u, k6v = v6, -mu * _f(p, u6)
            un = u + hh * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
            vn = v + hh * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
            k7u, k7v = vn, -mu * _f(p, un)
            eu = hh * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
            ev = hh * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
            su = tol * (1.0 + max(abs(u), abs(un)))
            sv = tol * (1.0 + max(abs(v), abs(vn)))
            err = max(abs(eu) / su, abs(ev) / sv)
            if err <= 1.0:
                x = stop if hh == stop - x else x + hh
                u, v = un, vn
                k1u, k1v = k7u, k7v
                steps += 1
                e = 0.5 * v * v + mu * _F(p, u)
                drift = max(drift, abs(e - e0))
            fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
            h = hh * min(5.0, max(0.2, fac))
        if stop == 0.5:
            u_half, v_half = u, v
    return u_half, v_half, u, v, steps, drift
