# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cancellation-free radicand and the shooting integrator.

Semantics match ``_pykernels`` exactly; see that module for the reference
implementation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs, pow, expm1, log1p, fmax, fmin, NAN

cnp.import_array()

cdef enum:
    N_SERIES = 16
cdef double SERIES_SWITCH = 1.0
cdef double P_COEF[N_SERIES]
cdef int _i
cdef double _fact
for _i in range(N_SERIES):
    # c_n for n = _i + 2
    _fact = 1.0
    for _k in range(1, 2 * (_i + 2) + 1):
        _fact *= _k
    P_COEF[_i] = (-1.0) ** (_i + 2) * 2.0 ** (2 * (_i + 2) - 3) * (2 * (_i + 2) - 1) / _fact


cdef inline double _radicand1(double p, double alpha, double s, double t, double sin2a) nogil:
    cdef double q = p + 1.0
    cdef double power_part = pow(alpha, q) * (-expm1(q * log1p(-t))) / q
    cdef double osc = 0.0
    cdef double lt, a2, ak, theta, d, sm, sd
    cdef int n
    if alpha <= SERIES_SWITCH:
        lt = log1p(-t)
        a2 = alpha * alpha
        ak = a2 * a2
        for n in range(N_SERIES):
            osc += P_COEF[n] * ak * (-expm1(2.0 * (n + 2) * lt))
            ak *= a2
    else:
        theta = alpha * s
        d = alpha * t
        sm = alpha + theta
        sd = sin(d)
        osc = 0.25 * (d * sm - (d * sin2a + 2.0 * theta * cos(sm) * sd) + sin(sm) * sd)
    return power_part + osc


def radicand(double p, double alpha, s, t):
    """F(alpha) - F(alpha*s) with ``t = 1 - s`` supplied to full precision."""
    sb, tb = np.broadcast_arrays(np.asarray(s, dtype=np.float64), np.asarray(t, dtype=np.float64))
    shape = sb.shape
    cdef double[::1] sv = np.ascontiguousarray(sb).ravel()
    cdef double[::1] tv = np.ascontiguousarray(tb).ravel()
    cdef Py_ssize_t n = sv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double sin2a = sin(2.0 * alpha)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = _radicand1(p, alpha, sv[i], tv[i], sin2a)
    return out.reshape(shape)


cdef inline double _f(double p, double u) nogil:
    cdef double sn = sin(u)
    if u >= 0.0:
        return pow(u, p) + u * sn * sn
    return -pow(-u, p) + u * sn * sn


cdef inline double _F(double p, double u) nogil:
    cdef double a = fabs(u)
    cdef double c = sin(a)
    cdef double g, x2, k, term, y
    cdef int n
    if a < 0.5:
        x2 = 2.0 * a
        k = x2 * x2 * x2 / 6.0
        term = k
        y = 0.0
        n = 1
        while fabs(term) > 1e-18 * fabs(k):
            y += term
            term *= -x2 * x2 / ((2 * n + 2) * (2 * n + 3))
            n += 1
        g = 0.5 * y
    else:
        g = a - c * cos(a)
    return pow(a, p + 1.0) / (p + 1.0) + 0.25 * (g * g + c * c * c * c)


def shoot_dp45(double p, double mu, double alpha, double u0, double v0, double tol, long max_steps):
    """Dormand-Prince 5(4) integration of u'' = -mu f(u) over [0, 1].

    Returns ``(u(1/2), u'(1/2), u(1), u'(1), accepted_steps, max_energy_drift)``.
    """
    cdef double A21 = 1.0 / 5
    cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
    cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
    cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
    cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
    cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
    cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
    cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40
    cdef double x = 0.0, u = u0, v = v0
    cdef double e0 = 0.5 * v0 * v0 + mu * _F(p, u0)
    cdef double drift = 0.0, e
    cdef double h = fmin(0.5, 0.01 / (1.0 + fabs(v0)))
    cdef long steps = 0
    cdef double u_half = NAN, v_half = NAN
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v, k7u, k7v
    cdef double u2, v2, u3, v3, u4, v4, u5, v5, u6, v6, un, vn, eu, ev, su, sv, err, fac, hh
    cdef double stop
    cdef int leg
    cdef int status = 0
    k1u = v
    k1v = -mu * _f(p, u)
    with nogil:
        for leg in range(2):
            stop = 0.5 if leg == 0 else 1.0
            while x < stop:
                if steps >= max_steps:
                    status = 1
                    break
                hh = fmin(h, stop - x)
                if hh < 1e-14:
                    status = 2
                    break
                u2 = u + hh * A21 * k1u
                v2 = v + hh * A21 * k1v
                k2u = v2
                k2v = -mu * _f(p, u2)
                u3 = u + hh * (A31 * k1u + A32 * k2u)
                v3 = v + hh * (A31 * k1v + A32 * k2v)
                k3u = v3
                k3v = -mu * _f(p, u3)
                u4 = u + hh * (A41 * k1u + A42 * k2u + A43 * k3u)
                v4 = v + hh * (A41 * k1v + A42 * k2v + A43 * k3v)
                k4u = v4
                k4v = -mu * _f(p, u4)
                u5 = u + hh * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
                v5 = v + hh * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v)
                k5u = v5
                k5v = -mu * _f(p, u5)
                u6 = u + hh * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
                v6 = v + hh * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v)
                k6u = v6
                k6v = -mu * _f(p, u6)
                un = u + hh * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
                vn = v + hh * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
                k7u = vn
                k7v = -mu * _f(p, un)
                eu = hh * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
                ev = hh * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
                su = tol * (1.0 + fmax(fabs(u), fabs(un)))
                sv = tol * (1.0 + fmax(fabs(v), fabs(vn)))
                err = fmax(fabs(eu) / su, fabs(ev) / sv)
                if err <= 1.0:
                    if hh == stop - x:
                        x = stop
                    else:
                        x = x + hh
                    u = un
                    v = vn
                    k1u = k7u
                    k1v = k7v
                    steps += 1
                    e = 0.5 * v * v + mu * _F(p, u)
                    drift = fmax(drift, fabs(e - e0))
                if err > 0.0:
                    fac = 0.9 * pow(err, -0.2)
                else:
                    fac = 5.0
                h = hh * fmin(5.0, fmax(0.2, fac))
            if status != 0:
                break
            if leg == 0:
                u_half = u
                v_half = v
    if status == 1:
        raise FloatingPointError("step budget exhausted")
    if status == 2:
        raise FloatingPointError("step size underflow")
    return u_half, v_half, u, v, steps, drift
