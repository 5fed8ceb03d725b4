"""Asymptotic constants and expansions of mu, |v'|^2 and lambda.

Large amplitude (alpha -> infinity) uses the C, E and G families; small
amplitude (alpha -> 0) uses C_{0,p}, H, L and E.  Every expansion is returned
as an :class:`ExpansionResult` carrying its term ledger, so the value can be
recomputed from the listed terms.

Oscillatory constants written as theta-integrals use the substitution
s = sin^{2/(p+1)} theta, whose phase 2 alpha sin^{2/(p+1)} theta is split at
its nodes by the quadrature engine.
"""

from __future__ import annotations

import enum
import functools
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import ProblemParams, check_alpha, osc_A, osc_B, small_alpha_K
from .quad import CumulativeIntegral, InnerFamily, QuadSpec, beta_value, integrate, integrate_nested

REGIME_TOL = 1e-9
LARGE_ALPHA_MIN = 10.0
SMALL_ALPHA_MAX = 0.5
HN_MAX = 10

_CONST_TOL = dict(abs_tol=1e-15, rel_tol=1e-13)
_OSC_TOL = dict(abs_tol=1e-14, rel_tol=1e-12)


class Regime(str, enum.Enum):
    LARGE_P_GT2 = "large_p_gt2"
    LARGE_P_EQ2 = "large_p_eq2"
    LARGE_P_IN_1_2 = "large_p_in_1_2"
    SMALL_P_LT3 = "small_p_lt3"
    SMALL_P_EQ3 = "small_p_eq3"
    SMALL_P_IN_3_5 = "small_p_in_3_5"
    SMALL_P_GT5 = "small_p_gt5"


def large_regime(p: float) -> Regime:
    if abs(p - 2.0) <= REGIME_TOL:
        return Regime.LARGE_P_EQ2
    return Regime.LARGE_P_GT2 if p > 2.0 else Regime.LARGE_P_IN_1_2


def small_regime(p: float) -> Regime:
    if abs(p - 3.0) <= REGIME_TOL:
        return Regime.SMALL_P_EQ3
    if p < 3.0:
        return Regime.SMALL_P_LT3
    return Regime.SMALL_P_IN_3_5 if p <= 5.0 + REGIME_TOL else Regime.SMALL_P_GT5


# --- integration helpers ------------------------------------------------------


def _one_minus_pow(k: float, t):
    """1 - s^k with s = 1 - t, accurate for small t."""
    return -np.expm1(k * np.log1p(-t))


def _ratio_pow(num, den, power: float):
    """num / den^power for power in {0.5, 1.5, 2.5}, without intermediate underflow."""
    r = num
    for _ in range(int(power)):
        r = r / den
    return r / np.sqrt(den)


def _ratio_sq(num, den, power: float):
    """num^2 / den^power, grouped as (num/den)^2 den^{2-power}."""
    r = num / den
    return r * r * _ratio_pow(1.0, den, power - 2.0) if power > 2.0 else r * r * np.sqrt(den)


def _s_integral(func, right_exponent: float, frequency: float = 0.0, tol=_CONST_TOL) -> float:
    """int_0^1 func(s, t) ds where t = 1 - s is exact."""

    def h(s, sl, sr):
        return func(s, sr)

    spec = QuadSpec(h, right_exponent=right_exponent, frequency=frequency, complement=True, max_level=12, **tol)
    return integrate(spec).value


def _theta_integral(p: float, alpha: float, func, exponent: float, tol=_OSC_TOL) -> float:
    """int_0^{pi/2} func(S) sin^exponent(theta) dtheta with S = sin^{2/(p+1)} theta."""
    q = p + 1.0

    def h(th):
        sn = np.sin(th)
        return func(sn ** (2.0 / q)) * sn**exponent

    def phase(th):
        return 2.0 * alpha * np.sin(th) ** (2.0 / q)

    spec = QuadSpec(h, 0.0, 0.5 * math.pi, left_exponent=exponent, phase=phase, max_level=12, **tol)
    return integrate(spec).value


# --- alpha-independent constants ------------------------------------------------


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1.0 or not math.isfinite(p):
        raise ValueError(f"exponent p must satisfy p > 1, got {p!r}")
    return p


@functools.lru_cache(maxsize=None)
def const_C0(p: float) -> float:
    """C_{0,p} = int_0^1 (1 - s^{p+1})^{-1/2} ds."""
    q = _check_p(p) + 1.0
    return _s_integral(lambda s, t: _one_minus_pow(q, t) ** -0.5, -0.5)


def const_C0_closed(p: float) -> float:
    q = _check_p(p) + 1.0
    return beta_value(1.0 / q, 0.5) / q


@functools.lru_cache(maxsize=None)
def const_E0(p: float) -> float:
    """E_{0,p} = int_0^1 (1 - s^{p+1})^{1/2} ds."""
    q = _check_p(p) + 1.0
    return _s_integral(lambda s, t: _one_minus_pow(q, t) ** 0.5, 0.5)


def const_E0_closed(p: float) -> float:
    q = _check_p(p) + 1.0
    return beta_value(1.0 / q, 1.5) / q


@functools.lru_cache(maxsize=None)
def const_C1(p: float) -> float:
    q = _check_p(p) + 1.0
    return -q / 8.0 * _s_integral(lambda s, t: _ratio_pow(_one_minus_pow(2, t), _one_minus_pow(q, t), 1.5), -0.5)


@functools.lru_cache(maxsize=None)
def const_C2(p: float) -> float:
    q = _check_p(p) + 1.0
    return 3.0 * q * q / 128.0 * _s_integral(lambda s, t: _ratio_sq(_one_minus_pow(2, t), _one_minus_pow(q, t), 2.5), -0.5)


@functools.lru_cache(maxsize=None)
def const_E1(p: float) -> float:
    """(p+1)/8 int (1 - s^4)/sqrt(1 - s^{p+1}); the small-amplitude coefficient."""
    q = _check_p(p) + 1.0
    return q / 8.0 * _s_integral(lambda s, t: _one_minus_pow(4, t) / _one_minus_pow(q, t) ** 0.5, 0.5)


@functools.lru_cache(maxsize=None)
def const_E1_large(p: float) -> float:
    """(p+1)/8 int (1 - s^2)/sqrt(1 - s^{p+1}).

    The large-amplitude expansion of |v'|^2 produces the (1 - s^2) weight of
    the alpha^2/4 potential term, not (1 - s^4).
    """
    q = _check_p(p) + 1.0
    return q / 8.0 * _s_integral(lambda s, t: _one_minus_pow(2, t) / _one_minus_pow(q, t) ** 0.5, 0.5)


@functools.lru_cache(maxsize=None)
def const_E4(p: float) -> float:
    q = _check_p(p) + 1.0
    return -q * q / 128.0 * _s_integral(lambda s, t: _ratio_sq(_one_minus_pow(2, t), _one_minus_pow(q, t), 1.5), 0.5)


@functools.lru_cache(maxsize=None)
def const_E5(p: float) -> float:
    q = _check_p(p) + 1.0
    return 2.0 / q * _s_integral(lambda s, t: _one_minus_pow(q, t) / _one_minus_pow(4, t) ** 0.5, 0.5)


@functools.lru_cache(maxsize=None)
def const_H2(p: float) -> float:
    q = _check_p(p) + 1.0
    return -2.0 / q * _s_integral(lambda s, t: _ratio_pow(_one_minus_pow(q, t), _one_minus_pow(4, t), 1.5), -0.5)


@functools.lru_cache(maxsize=None)
def _h_moment(k: float) -> float:
    return _s_integral(lambda s, t: _ratio_pow(_one_minus_pow(k, t), _one_minus_pow(4, t), 1.5), -0.5)


def const_Hn(n: int, form: str = "corrected") -> float:
    """Coefficient of alpha^{2n-4} in the small-amplitude bracket (n >= 3).

    ``form="corrected"`` uses (1 - s^{2n}) in both integrals, as the Taylor
    series of the potential dictates; ``form="shifted"`` keeps (1 - s^{2n-1})
    in the first one and exists for comparison only.
    """
    if not 3 <= n <= HN_MAX:
        raise ValueError(f"n must lie in [3, {HN_MAX}]")
    pref = -(2.0 ** (2 * n - 2)) * (-1) ** n
    a = 1.0 / math.factorial(2 * n - 1)
    b = 1.0 / math.factorial(2 * n)
    if form == "corrected":
        return pref * (a - b) * _h_moment(2 * n)
    if form == "shifted":
        return pref * (a * _h_moment(2 * n - 1) - b * _h_moment(2 * n))
    raise ValueError("form must be 'corrected' or 'shifted'")


@functools.lru_cache(maxsize=None)
def const_L1(p: float) -> float:
    q = _check_p(p) + 1.0
    return -q / 8.0 * _s_integral(lambda s, t: _ratio_pow(_one_minus_pow(4, t), _one_minus_pow(q, t), 1.5), -0.5)


@functools.lru_cache(maxsize=None)
def const_L2(p: float) -> float:
    params = ProblemParams(_check_p(p))
    q = params.p + 1.0
    return -0.5 * _s_integral(lambda s, t: small_alpha_K(params, s, t) / _one_minus_pow(q, t) ** 0.5, -0.5)


def small_constants(p: float) -> dict:
    """{H2, H3, Hn: {3..10}, L1, L2} for exponent p."""
    p = _check_p(p)
    return {
        "H2": const_H2(p),
        "H3": const_Hn(3),
        "Hn": {n: const_Hn(n) for n in range(3, HN_MAX + 1)},
        "L1": const_L1(p),
        "L2": const_L2(p),
    }


# --- oscillatory constants ----------------------------------------------------------

_C3_TABLES: dict[float, CumulativeIntegral] = {}
_C3_LOCK = threading.Lock()


def _c3_table(p: float) -> CumulativeIntegral:
    table = _C3_TABLES.get(p)
    if table is not None:
        return table
    with _C3_LOCK:
        table = _C3_TABLES.get(p)
        if table is None:
            q = p + 1.0

            def inner(y, yl, yr):
                return _ratio_pow(_one_minus_pow(2, yr), _one_minus_pow(q, yr), 2.5)

            table = CumulativeIntegral(InnerFamily(inner, complement=True, growth_exponent=-0.5))
            _C3_TABLES[p] = table
    return table


def const_C3(p: float, alpha: float) -> float:
    """-3/32 (p+1)^2 int_0^1 (int_0^s (1-y^2)/(1-y^{p+1})^{5/2} dy) cos(2 alpha s) ds."""
    p = _check_p(p)
    q = p + 1.0
    outer = QuadSpec(
        lambda s: np.cos(2.0 * alpha * s),
        right_exponent=-0.5,
        frequency=2.0 * alpha,
        max_level=12,
        **_OSC_TOL,
    )
    return -3.0 / 32.0 * q * q * integrate_nested(outer, _c3_table(p)).value


def _e_direct(p: float, alpha: float) -> tuple[float, float]:
    """E2, E3 from their s-forms -1/(2 alpha) int A/sqrt(1-s^{p+1}) and -1/2 int B/sqrt(...)."""
    params = ProblemParams(p)
    q = p + 1.0

    def fa(s, t):
        return osc_A(params, alpha, alpha * s, alpha * t) / _one_minus_pow(q, t) ** 0.5

    def fb(s, t):
        return osc_B(params, alpha, alpha * s, alpha * t) / _one_minus_pow(q, t) ** 0.5

    e2 = -0.5 / alpha * _s_integral(fa, 0.5, 2.0 * alpha, _OSC_TOL)
    e3 = -0.5 * _s_integral(fb, 0.5, 2.0 * alpha, _OSC_TOL)
    return e2, e3


def osc_constants_large(p: float, alpha: float, check_signs: bool = True) -> dict:
    """C11, C12, C21, C22, C3, E2, E3 at amplitude ``alpha``.

    C22 carries the prefactor (p-1)/(4(p+1)) produced by the integration by
    parts of the B-kernel identity.  E2 and E3 are cross-checked against their
    s-forms when ``check_signs`` is set; on a sign mismatch the s-form wins and
    a warning is issued.
    """
    p = _check_p(p)
    alpha = check_alpha(alpha)
    q = p + 1.0
    e_hi = (3.0 - p) / q
    e_lo = (1.0 - p) / q
    s2a, c2a = math.sin(2 * alpha), math.cos(2 * alpha)

    c11 = 2.0 / q * _theta_integral(p, alpha, lambda S: np.cos(2 * alpha * S), e_hi)
    c12a = (p - 1.0) / (2.0 * q) * _theta_integral(p, alpha, lambda S: s2a - np.sin(2 * alpha * S), e_lo)
    c12b = q / 4.0 * _s_integral(
        lambda s, t: _ratio_pow(t, _one_minus_pow(q, t), 1.5) * np.sin(2 * alpha * s), -0.5, 2 * alpha, _OSC_TOL
    )
    c21 = -1.0 / q * _theta_integral(p, alpha, lambda S: np.sin(2 * alpha * S), e_hi)
    c22 = (p - 1.0) / (4.0 * q) * _theta_integral(p, alpha, lambda S: c2a - np.cos(2 * alpha * S), e_lo)
    e2 = -0.25 * _theta_integral(p, alpha, lambda S: s2a - S * np.sin(2 * alpha * S), e_lo)
    e3 = -0.125 * _theta_integral(p, alpha, lambda S: c2a - np.cos(2 * alpha * S), e_lo)
    if check_signs:
        d2, d3 = _e_direct(p, alpha)
        for name, val, ref in (("E2", e2, d2), ("E3", e3, d3)):
            if np.sign(val) != np.sign(ref) and max(abs(val), abs(ref)) > 1e-10:
                warnings.warn(f"{name} sign disagrees with its direct form at alpha={alpha}; using direct value")
                if name == "E2":
                    e2 = d2
                else:
                    e3 = d3
    return {
        "C11": c11,
        "C12": c12a + c12b,
        "C21": c21,
        "C22": c22,
        "C3": const_C3(p, alpha),
        "E2": e2,
        "E3": e3,
    }


def const_G(p: float, alpha: float, osc: Optional[dict] = None) -> dict:
    """G0..G4 of the large-amplitude |v'|^2 expansion.

    G2 uses (C12 + C21)/2, G4 uses C2 + C3, and E1 is the (1 - s^2) variant.
    """
    p = _check_p(p)
    o = osc_constants_large(p, alpha) if osc is None else osc
    c0, e0 = const_C0(p), const_E0(p)
    e1 = const_E1_large(p)
    a1 = const_C1(p) + 0.5 * o["C11"]
    return {
        "G0": c0 * e0,
        "G1": c0 * e1 + a1 * e0,
        "G2": 0.5 * (o["C12"] + o["C21"]) * e0 + c0 * o["E2"],
        "G3": 0.5 * o["C22"] * e0 + c0 * o["E3"],
        "G4": (const_C2(p) + o["C3"]) * e0 + c0 * const_E4(p) + a1 * e1,
    }


# --- expansion bookkeeping ------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionTerm:
    label: str
    coefficient: float
    order_exponent: float
    oscillatory: bool = False


def _bracket(alpha: float, terms: Sequence[ExpansionTerm]) -> float:
    total = 0.0
    for term in terms:
        total += term.coefficient * alpha**term.order_exponent
    return total


def _assemble(alpha, prefactor, power, terms, product_brackets, kirchhoff_scale, kirchhoff_brackets) -> float:
    value = prefactor * _bracket(alpha, terms) ** power
    for br in product_brackets:
        value *= _bracket(alpha, br)
    if kirchhoff_brackets:
        prod = 1.0
        for br in kirchhoff_brackets:
            prod *= _bracket(alpha, br)
        value *= kirchhoff_scale * prod + 1.0
    return value


@dataclass(frozen=True)
class ExpansionResult:
    """Asymptotic value with its term ledger.

    value = prefactor * (sum of terms)^power * (prod of product brackets)
          * (kirchhoff_scale * prod of kirchhoff brackets + 1),
    the Kirchhoff factor being present only for lambda with b > 0.
    ``remainder_exponent`` is the order (relative, inside the main bracket)
    of the first neglected contribution.
    """

    value: float
    terms: tuple
    remainder_exponent: float
    regime: Regime
    alpha: float
    prefactor: float
    power: int
    product_brackets: tuple = ()
    kirchhoff_scale: float = 0.0
    kirchhoff_brackets: tuple = ()
    flags: tuple = field(default_factory=tuple)

    def assemble(self) -> float:
        return _assemble(
            self.alpha,
            self.prefactor,
            self.power,
            self.terms,
            self.product_brackets,
            self.kirchhoff_scale,
            self.kirchhoff_brackets,
        )

    def bracket(self) -> float:
        return _bracket(self.alpha, self.terms)


def _merge(terms: Sequence[ExpansionTerm], small: bool = False) -> tuple:
    """Combine terms of equal order (within 1e-12), dominant term first.

    Dominance means the largest exponent as alpha -> infinity and the smallest
    as alpha -> 0.
    """
    merged: list[ExpansionTerm] = []
    sign = 1.0 if small else -1.0
    for term in sorted(terms, key=lambda t: sign * t.order_exponent):
        if merged and abs(merged[-1].order_exponent - term.order_exponent) <= 1e-12:
            last = merged[-1]
            merged[-1] = ExpansionTerm(
                f"{last.label}+{term.label}",
                last.coefficient + term.coefficient,
                last.order_exponent,
                last.oscillatory or term.oscillatory,
            )
        else:
            merged.append(term)
    return tuple(merged)


def _truncate(terms: tuple, truncation: Optional[int]) -> tuple:
    if truncation is None:
        return terms
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    return terms[:truncation]


def _make(alpha, prefactor, power, terms, remainder, regime, truncation, flags,
          products=(), kscale=0.0, kbrackets=()):
    terms = _truncate(terms, truncation)
    products = tuple(_truncate(br, truncation) for br in products)
    kbrackets = tuple(_truncate(br, truncation) for br in kbrackets)
    value = _assemble(alpha, prefactor, power, terms, products, kscale, kbrackets)
    return ExpansionResult(value, terms, remainder, regime, alpha, prefactor, power, products, kscale, kbrackets,
                           flags)


def _flags_large(alpha):
    return ("extrapolated",) if alpha < LARGE_ALPHA_MIN else ()


def _flags_small(alpha):
    return ("extrapolated",) if alpha > SMALL_ALPHA_MAX else ()


# --- large amplitude ------------------------------------------------------------


def _mu_terms_large(p, alpha, osc):
    regime = large_regime(p)
    a1 = const_C1(p) + 0.5 * osc["C11"]
    c23 = const_C2(p) + osc["C3"]
    terms = [
        ExpansionTerm("C0", const_C0(p), 0.0),
        ExpansionTerm("C1+C11/2", a1, 1.0 - p, True),
    ]
    if regime is Regime.LARGE_P_GT2:
        terms += [
            ExpansionTerm("(C12+C21)/2", 0.5 * (osc["C12"] + osc["C21"]), -p, True),
            ExpansionTerm("C22/2", 0.5 * osc["C22"], -(p + 1.0), True),
            ExpansionTerm("C2+C3", c23, 2.0 * (1.0 - p), True),
        ]
    elif regime is Regime.LARGE_P_EQ2:
        terms += [
            ExpansionTerm("(C12+C21)/2", 0.5 * (osc["C12"] + osc["C21"]), -p, True),
            ExpansionTerm("C2+C3", c23, 2.0 * (1.0 - p), True),
        ]
    else:
        terms.append(ExpansionTerm("C2+C3", c23, 2.0 * (1.0 - p), True))
    return _merge(terms), regime


def _gradsq_terms_large(p, alpha, osc):
    regime = large_regime(p)
    g = const_G(p, alpha, osc)
    terms = [ExpansionTerm("G0", g["G0"], 0.0), ExpansionTerm("G1", g["G1"], 1.0 - p, True)]
    if regime is Regime.LARGE_P_GT2:
        terms += [
            ExpansionTerm("G2", g["G2"], -p, True),
            ExpansionTerm("G3", g["G3"], -(p + 1.0), True),
            ExpansionTerm("G4", g["G4"], 2.0 * (1.0 - p), True),
        ]
    else:
        # p = 2 merges G2 with G4; 1 < p < 2 keeps G2 below G4
        terms += [ExpansionTerm("G4", g["G4"], 2.0 * (1.0 - p), True), ExpansionTerm("G2", g["G2"], -p, True)]
    return _merge(terms), regime


def mu_large(params: ProblemParams, alpha: float, truncation: Optional[int] = None, osc: Optional[dict] = None):
    """mu(alpha) = 2(p+1) alpha^{1-p} {bracket}^2 as alpha -> infinity."""
    alpha = check_alpha(alpha)
    p = params.p
    osc = osc_constants_large(p, alpha) if osc is None else osc
    terms, regime = _mu_terms_large(p, alpha, osc)
    pref = 2.0 * (p + 1.0) * alpha ** (1.0 - p)
    return _make(alpha, pref, 2, terms, 2.0 * (1.0 - p), regime, truncation, _flags_large(alpha))


def gradsq_large(params: ProblemParams, alpha: float, truncation: Optional[int] = None, osc: Optional[dict] = None):
    """|v'|^2 = 4 alpha^2 {G-bracket} as alpha -> infinity."""
    alpha = check_alpha(alpha)
    p = params.p
    osc = osc_constants_large(p, alpha) if osc is None else osc
    terms, regime = _gradsq_terms_large(p, alpha, osc)
    return _make(alpha, 4.0 * alpha * alpha, 1, terms, 2.0 * (1.0 - p), regime, truncation, _flags_large(alpha))


def lambda_large(params: ProblemParams, alpha: float, truncation: Optional[int] = None, osc: Optional[dict] = None):
    """lambda = mu_large * (4 b alpha^2 {G-bracket} + 1)."""
    alpha = check_alpha(alpha)
    p = params.p
    osc = osc_constants_large(p, alpha) if osc is None else osc
    mu_terms, regime = _mu_terms_large(p, alpha, osc)
    g_terms, _ = _gradsq_terms_large(p, alpha, osc)
    pref = 2.0 * (p + 1.0) * alpha ** (1.0 - p)
    kb = (g_terms,) if params.b > 0.0 else ()
    return _make(
        alpha, pref, 2, mu_terms, 2.0 * (1.0 - p), regime, truncation, _flags_large(alpha),
        kscale=4.0 * params.b * alpha * alpha, kbrackets=kb,
    )


# --- small amplitude --------------------------------------------------------------


def _mu_terms_small(p):
    """(prefactor coefficient, prefactor exponent, terms, remainder exponent, regime).

    Remainder exponents are those of the first omitted contribution of the
    Taylor expansion, which can be lower than a naive term count suggests.
    """
    regime = small_regime(p)
    c03 = const_C0(3.0)
    h3 = const_Hn(3)
    if regime is Regime.SMALL_P_LT3:
        terms = [
            ExpansionTerm("C0", const_C0(p), 0.0),
            ExpansionTerm("L1", const_L1(p), 3.0 - p),
            ExpansionTerm("L2", const_L2(p), 5.0 - p),
        ]
        return 2.0 * (p + 1.0), 1.0 - p, _merge(terms, small=True), 2.0 * (3.0 - p), regime
    if regime is Regime.SMALL_P_EQ3:
        terms = [ExpansionTerm("C0", c03, 0.0), ExpansionTerm("H3/2", 0.5 * h3, 2.0)]
        return 4.0, -2.0, _merge(terms, small=True), 4.0, regime
    if regime is Regime.SMALL_P_IN_3_5:
        terms = [
            ExpansionTerm("C0", c03, 0.0),
            ExpansionTerm("H2", const_H2(p), p - 3.0),
            ExpansionTerm("H3", h3, 2.0),
        ]
        return 8.0, -2.0, _merge(terms, small=True), min(2.0 * (p - 3.0), 4.0), regime
    terms = [ExpansionTerm("C0", c03, 0.0), ExpansionTerm("H3", h3, 2.0)]
    return 8.0, -2.0, _merge(terms, small=True), min(p - 3.0, 4.0), regime


def mu_small(params: ProblemParams, alpha: float, truncation: Optional[int] = None):
    """mu(alpha) as alpha -> 0, dispatched on p against 3 and 5."""
    alpha = check_alpha(alpha)
    coef, expo, terms, rem, regime = _mu_terms_small(params.p)
    return _make(alpha, coef * alpha**expo, 2, terms, rem, regime, truncation, _flags_small(alpha))


def _gradsq_brackets_small(p, mu_terms, regime):
    """Brackets whose product times 4 alpha^2 approximates |v'|^2."""
    if regime is Regime.SMALL_P_LT3:
        c0, e0 = const_C0(p), const_E0(p)
        g = (
            ExpansionTerm("E0*C0", e0 * c0, 0.0),
            ExpansionTerm("E0*L1+C0*E1", e0 * const_L1(p) + c0 * const_E1(p), 3.0 - p),
        )
        return (g,)
    e03 = const_E0(3.0)
    if regime is Regime.SMALL_P_EQ3:
        return ((ExpansionTerm("E0*C0", e03 * const_C0(3.0), 0.0),),)
    e_br = (ExpansionTerm("E0", e03, 0.0), ExpansionTerm("E5", const_E5(p), p - 3.0))
    return (mu_terms, e_br)


def _gradsq_remainder_small(p, regime):
    if regime is Regime.SMALL_P_LT3:
        return 2.0 * (3.0 - p)
    if regime is Regime.SMALL_P_EQ3:
        return 2.0
    # the E5 bracket stops at alpha^{p-3}; its next term is alpha^{2(p-3)} or alpha^2
    return min(2.0, 2.0 * (p - 3.0))


def gradsq_small(params: ProblemParams, alpha: float, truncation: Optional[int] = None):
    """|v'|^2 = 4 alpha^2 {product of brackets} as alpha -> 0."""
    alpha = check_alpha(alpha)
    p = params.p
    _, _, mu_terms, _, regime = _mu_terms_small(p)
    first, *rest = _gradsq_brackets_small(p, mu_terms, regime)
    return _make(
        alpha, 4.0 * alpha * alpha, 1, first, _gradsq_remainder_small(p, regime), regime, truncation,
        _flags_small(alpha), products=tuple(rest),
    )


def lambda_small(params: ProblemParams, alpha: float, truncation: Optional[int] = None):
    """lambda = mu_small * (4 b alpha^2 {gradsq brackets} + 1) as alpha -> 0.

    For p > 3 the |v'|^2 brackets use E_{0,3}.
    """
    alpha = check_alpha(alpha)
    p = params.p
    coef, expo, mu_terms, rem, regime = _mu_terms_small(p)
    kb = _gradsq_brackets_small(p, mu_terms, regime) if params.b > 0.0 else ()
    return _make(
        alpha, coef * alpha**expo, 2, mu_terms, rem, regime, truncation, _flags_small(alpha),
        kscale=4.0 * params.b * alpha * alpha, kbrackets=kb,
    )


def expansion(kind: str, params: ProblemParams, alpha: float, truncation: Optional[int] = None):
    """Dispatch ``kind`` in {mu, gradsq, lambda} to the large- or small-amplitude form.

    alpha >= 1 selects the large-amplitude expansion.
    """
    table = {
        ("mu", True): mu_large,
        ("gradsq", True): gradsq_large,
        ("lambda", True): lambda_large,
        ("mu", False): mu_small,
        ("gradsq", False): gradsq_small,
        ("lambda", False): lambda_small,
    }
    try:
        fn = table[(kind, alpha >= 1.0)]
    except KeyError:
        raise ValueError(f"unknown expansion kind {kind!r}") from None
    return fn(params, alpha, truncation)
