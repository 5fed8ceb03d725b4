"""Double-exponential quadrature for finite intervals.

The rule is tanh-sinh, which absorbs algebraic endpoint singularities.
Integrands may opt in to receive the distances to both interval ends
(``complement=True``); these are exact to working precision even for nodes
within 1e-250 of an endpoint, so singular factors such as (1 - s)^{-1/2}
never see a rounded-away ``1 - s``.

Oscillatory integrands are split into panels at the nodes of their phase
before the rule is applied.  All panels are evaluated in a single vectorised
call per refinement level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

T_MAX = 6.0
MIN_LEVEL = 3
_END_ZONE = 1e-200

_PLAIN, _SQRT_RIGHT, _SQRT_LEFT = 0, 1, 2


class QuadratureError(ArithmeticError):
    """Raised when the requested tolerance is not met within the budget.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message: str, result: "QuadResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0.0:
            raise ValueError("error_estimate must be nonnegative")


@dataclass
class QuadSpec:
    """Integrand descriptor.

    ``left_exponent``/``right_exponent`` describe x^sigma / (b - x)^tau
    behaviour at the ends; an exponent of exactly -1/2 triggers the
    substitution x = b - L v^2 on the end panel.  ``frequency`` splits the
    interval at multiples of pi/frequency (measured from ``lower``);
    ``phase`` does the same for a monotone nonlinear phase.
    """

    integrand: Callable
    lower: float = 0.0
    upper: float = 1.0
    left_exponent: float = 0.0
    right_exponent: float = 0.0
    frequency: float = 0.0
    phase: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: Optional[Sequence[float]] = None
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    complement: bool = False
    max_level: int = 10

    def __post_init__(self):
        if not (self.left_exponent > -1.0 and self.right_exponent > -1.0):
            raise ValueError("endpoint exponents must exceed -1")
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not self.upper > self.lower:
            raise ValueError("upper limit must exceed lower limit")
        if self.frequency < 0.0:
            raise ValueError("frequency must be nonnegative")


# --- unit rule ---------------------------------------------------------------

_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _unit_nodes(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """New nodes of ``level`` on [0, 1]: (v, 1 - v, dv/dt)."""
    cached = _RULE_CACHE.get(level)
    if cached is not None:
        return cached
    if level == 0:
        t = np.arange(-int(T_MAX), int(T_MAX) + 1, dtype=float)
    else:
        h = 2.0**-level
        m = int(T_MAX / h)
        t = np.arange(-m + 1, m, 2, dtype=float) * h
    u = 0.5 * math.pi * np.sinh(t)
    e_neg = np.exp(-2.0 * np.abs(u))
    v = np.where(u >= 0, 1.0 / (1.0 + e_neg), e_neg / (1.0 + e_neg))
    cv = np.where(u >= 0, e_neg / (1.0 + e_neg), 1.0 / (1.0 + e_neg))
    wv = math.pi * np.cosh(t) * e_neg / (1.0 + e_neg) ** 2
    _RULE_CACHE[level] = (v, cv, wv)
    return v, cv, wv


def _panel_nodes(pl, pr, kinds, a, b, level):
    """Physical nodes, end distances and weights for every panel at ``level``."""
    v, cv, wv = _unit_nodes(level)
    L = (pr - pl)[:, None]
    plc = pl[:, None]
    prc = pr[:, None]
    dl = L * v
    dr = L * cv
    w = L * wv
    x = np.where(v < 0.5, plc + dl, prc - dr)
    for kind in (_SQRT_RIGHT, _SQRT_LEFT):
        rows = np.nonzero(kinds == kind)[0]
        for r in rows:
            Lr = pr[r] - pl[r]
            if kind == _SQRT_RIGHT:
                dr[r] = Lr * cv * cv
                dl[r] = Lr * v * (1.0 + cv)
                w[r] = 2.0 * Lr * cv * wv
            else:
                dl[r] = Lr * v * v
                dr[r] = Lr * cv * (1.0 + v)
                w[r] = 2.0 * Lr * v * wv
            x[r] = np.where(dl[r] < dr[r], pl[r] + dl[r], pr[r] - dr[r])
    dl_g = (pl - a)[:, None] + dl
    dr_g = (b - pr)[:, None] + dr
    return x, dl_g, dr_g, w


def _evaluate(f, complement, x, dl, dr):
    flat = (x.ravel(), dl.ravel(), dr.ravel())
    # nodes whose weight underflowed may produce inf/nan; they are masked later
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = f(*flat) if complement else f(flat[0])
    return np.broadcast_to(np.asarray(vals, dtype=float), flat[0].shape).reshape(x.shape)


def _integrate_panels(
    f, complement, a, b, edges, kinds, abs_tol, rel_tol, max_level, per_panel=False
):
    """Tanh-sinh over the panels ``edges[i]..edges[i+1]``.

    Returns per-panel values, the total, an error estimate and the number of
    integrand evaluations.
    """
    pl = np.asarray(edges[:-1], dtype=float)
    pr = np.asarray(edges[1:], dtype=float)
    kinds = np.asarray(kinds)
    raw = np.zeros(pl.size)
    evals = 0
    prev_total = None
    prev_panels = None
    total = math.nan
    err = math.inf
    for level in range(max_level + 1):
        h = 1.0 if level == 0 else 2.0**-level
        x, dl, dr, w = _panel_nodes(pl, pr, kinds, a, b, level)
        fx = _evaluate(f, complement, x, dl, dr)
        with np.errstate(invalid="ignore", over="ignore"):
            contrib = fx * w
        bad = ~np.isfinite(contrib)
        if np.any(bad):
            # overflow this close to an end cannot carry weight for an integrable singularity
            near_end = np.minimum(dl, dr) <= _END_ZONE * (b - a)
            if np.any((w[bad] > 0.0) & ~near_end[bad]):
                raise QuadratureError(
                    "integrand not finite inside the interval",
                    QuadResult(math.nan, math.inf, evals + x.size),
                )
            contrib = np.where(bad, 0.0, contrib)
        evals += x.size
        raw += contrib.sum(axis=1)
        panels = raw * h
        total = math.fsum(panels)
        if prev_total is not None:
            if per_panel:
                diffs = np.abs(panels - prev_panels)
                tol_p = np.maximum(abs_tol, rel_tol * np.abs(panels))
                err = float(diffs.sum())
                done = bool(np.all(diffs <= tol_p))
            else:
                err = abs(total - prev_total)
                done = err <= max(abs_tol, rel_tol * abs(total))
            if level >= MIN_LEVEL and done:
                return panels, total, err, evals
        prev_total = total
        prev_panels = panels.copy()
    raise QuadratureError(
        f"tolerance not met after level {max_level} (estimate {err:.3g})",
        QuadResult(total, err if math.isfinite(err) else math.inf, evals),
    )


def phase_nodes(
    phase: Callable[[np.ndarray], np.ndarray], a: float, b: float, period: float = math.pi
) -> np.ndarray:
    """Points in (a, b) where a monotone ``phase`` crosses a multiple of ``period``.

    Roots are located by vectorised bisection on the phase function.
    """
    pa, pb = float(phase(np.array([a]))[0]), float(phase(np.array([b]))[0])
    lo_k, hi_k = sorted((pa / period, pb / period))
    ks = np.arange(math.floor(lo_k) + 1, math.ceil(hi_k))
    if ks.size == 0:
        return np.empty(0)
    targets = ks * period
    increasing = pb > pa
    lo = np.full(ks.size, a, dtype=float)
    hi = np.full(ks.size, b, dtype=float)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        above = phase(mid) > targets
        if not increasing:
            above = ~above
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(np.abs(hi), 1e-300)):
            break
    nodes = np.unique(0.5 * (lo + hi))
    return nodes[(nodes > a) & (nodes < b)]


def _breakpoints(spec: QuadSpec) -> np.ndarray:
    a, b = spec.lower, spec.upper
    pts = [np.array([a, b])]
    if spec.frequency > 0.0:
        step = math.pi / spec.frequency
        n = math.floor((b - a) / step)
        if n >= 1:
            inner = a + step * np.arange(1, n + 1)
            pts.append(inner[inner < b])
    if spec.phase is not None:
        pts.append(phase_nodes(spec.phase, a, b))
    if spec.breakpoints is not None:
        bp = np.asarray(spec.breakpoints, dtype=float)
        pts.append(bp[(bp > a) & (bp < b)])
    edges = np.unique(np.concatenate(pts))
    # drop slivers that would only cost evaluations
    keep = np.concatenate(([True], np.diff(edges) > 1e-15 * max(abs(a), abs(b), 1.0)))
    keep[-1] = True
    return edges[keep]


def _kinds_for(spec: QuadSpec, n_panels: int) -> np.ndarray:
    kinds = np.full(n_panels, _PLAIN)
    if spec.left_exponent == -0.5:
        kinds[0] = _SQRT_LEFT
    if spec.right_exponent == -0.5:
        if n_panels == 1 and kinds[0] == _SQRT_LEFT:
            # both ends singular: leave the bare rule in charge
            kinds[0] = _PLAIN
        else:
            kinds[-1] = _SQRT_RIGHT
    return kinds


def integrate(spec: QuadSpec) -> QuadResult:
    """Integrate ``spec.integrand`` over ``[spec.lower, spec.upper]``."""
    edges = _breakpoints(spec)
    kinds = _kinds_for(spec, edges.size - 1)
    _, total, err, evals = _integrate_panels(
        spec.integrand,
        spec.complement,
        spec.lower,
        spec.upper,
        edges,
        kinds,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_level,
    )
    return QuadResult(total, err, evals)


def beta_value(a: float, b: float) -> float:
    """Euler Beta function B(a, b) for a, b > 0."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError("Beta arguments must be positive")
    if a + b < 170.0:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


# --- nested integrals ----------------------------------------------------------


@dataclass
class InnerFamily:
    """Running integral I(s) = int_0^s h(y) dy on [0, 1).

    ``growth_exponent`` is the known blow-up I(s) ~ (1 - s)^growth as s -> 1;
    it is factored out before tabulation.
    """

    integrand: Callable
    complement: bool = False
    growth_exponent: float = -0.5
    nodes: int = 64
    abs_tol: float = 1e-15
    rel_tol: float = 1e-14


class CumulativeIntegral:
    """Chebyshev table of g(u) = u^{-2 growth} I(1 - u^2), u = sqrt(1 - s).

    g is smooth in u (the half-integer expansion of I about s = 1 becomes a
    power series in u), so a modest grid resolves it to near machine
    precision.  Built once; evaluation is read-only.
    """

    def __init__(self, family: InnerFamily):
        if family.growth_exponent >= 0.0:
            raise ValueError("growth_exponent must be negative")
        self.family = family
        n = family.nodes
        k = np.arange(n)
        u = 0.5 * (1.0 + np.cos((2 * k + 1) * math.pi / (2 * n)))  # Chebyshev points on (0, 1)
        u = np.sort(u)[::-1]  # s ascending
        t = u * u
        s = 1.0 - t
        edges = np.concatenate(([0.0], s))
        kinds = np.full(n, _PLAIN)
        panels, _, err, evals = _integrate_panels(
            family.integrand,
            family.complement,
            0.0,
            1.0,
            edges,
            kinds,
            family.abs_tol,
            family.rel_tol,
            12,
            per_panel=True,
        )
        partial = np.array([math.fsum(panels[: i + 1]) for i in range(n)])
        g = partial * t ** (-family.growth_exponent)
        self._cheb = np.polynomial.Chebyshev.fit(u, g, deg=n - 1, domain=[0.0, 1.0])
        tail = np.abs(self._cheb.coef[-4:]).max()
        self.error_estimate = float(tail + err)
        self.evaluations = evals
        self.g_nodes = g
        self.u_nodes = u

    def __call__(self, s, t=None):
        s = np.asarray(s, dtype=float)
        t = 1.0 - s if t is None else np.asarray(t, dtype=float)
        return self._cheb(np.sqrt(t)) * t**self.family.growth_exponent


def integrate_nested(outer: QuadSpec, inner_family) -> QuadResult:
    """int_0^1 w(s) I(s) ds with I the running integral of ``inner_family``.

    ``inner_family`` is an :class:`InnerFamily` or a prebuilt
    :class:`CumulativeIntegral`.
    """
    table = inner_family if isinstance(inner_family, CumulativeIntegral) else CumulativeIntegral(inner_family)
    if outer.lower != 0.0 or outer.upper != 1.0:
        raise ValueError("nested integrals are defined on [0, 1]")
    if outer.right_exponent != table.family.growth_exponent:
        raise ValueError("outer right_exponent must equal the inner growth exponent")
    w = outer.integrand

    if outer.complement:
        def combined(s, sl, sr):
            return w(s, sl, sr) * table(s, sr)
    else:
        def combined(s, sl, sr):
            return w(s) * table(s, sr)

    spec = QuadSpec(
        combined,
        0.0,
        1.0,
        left_exponent=outer.left_exponent,
        right_exponent=outer.right_exponent,
        frequency=outer.frequency,
        phase=outer.phase,
        breakpoints=outer.breakpoints,
        abs_tol=outer.abs_tol,
        rel_tol=outer.rel_tol,
        complement=True,
        max_level=outer.max_level,
    )
    res = integrate(spec)
    # interpolation error propagates through int |w| (1 - s)^growth <= 2 sup|w|
    return QuadResult(res.value, res.error_estimate + 2.0 * table.error_estimate, res.evaluations + table.evaluations)
