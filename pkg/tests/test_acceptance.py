"""End-to-end acceptance criteria; each test prints and records one PASS/FAIL line."""

import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oscibif import asymptotics as asy
from oscibif import oracle, timemap
from oscibif.model import ProblemParams
from oscibif.oracle import fit_rate
from oscibif.quad import beta_value

C03 = beta_value(0.25, 0.5) / 4


def _record(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def test_criterion_01_beta_closed_forms():
    worst = 0.0
    for p in (1.5, 2.0, 2.5, 3.0, 4.0, 6.0):
        q = p + 1
        worst = max(
            worst,
            abs(asy.const_C0(p) - beta_value(1 / q, 0.5) / q),
            abs(asy.const_E0(p) - beta_value(1 / q, 1.5) / q),
        )
    _record(1, "Beta closed forms", worst < 1e-10, f"max abs error {worst:.2e} < 1e-10")


def test_criterion_02_shooting_closure():
    worst, where = 0.0, None
    for p in (2.0, 2.5, 3.0, 4.0):
        pp = ProblemParams(p)
        for a in (0.01, 0.1, 1.0, 10.0, 100.0):
            res = oracle.shoot(pp, a, timemap.mu_of_alpha(pp, a))
            ratio = res.max_residual / (1e-7 * (1 + a))
            if ratio > worst:
                worst, where = ratio, (p, a)
    _record(2, "shooting closure", worst < 1.0, f"worst residual / bound {worst:.2e} at p={where[0]:g}, alpha={where[1]:g}")


def test_criterion_03_kernel_identities():
    worst = 0.0
    for p in (2.5, 3.0, 4.0):
        for a in (5.0, 25.0, 125.0):
            r = oracle.check_lemma_2_1(p, a)
            worst = max(worst, r["res_I1"], r["res_II1"])
    _record(3, "oscillatory kernel identities", worst < 1e-5, f"max relative residual {worst:.2e} < 1e-5")


GRID = [50.0, 100.0, 200.0, 400.0, 800.0]


@pytest.fixture(scope="module")
def cubic_fits():
    return oracle.large_remainder_fits(ProblemParams(3.0), GRID)


def test_criterion_04_mu_remainder(cubic_fits):
    fit = cubic_fits[0]
    _record(4, "mu large-amplitude remainder", fit.slope <= -3.85, f"slope {fit.slope:.3f} <= -3.85")


def test_criterion_05_gradsq_remainder(cubic_fits):
    fit = cubic_fits[1]
    _record(5, "gradient norm remainder", fit.slope <= -3.85, f"slope {fit.slope:.3f} <= -3.85")


def test_criterion_06_lambda_large_slope():
    al = np.geomspace(200.0, 1000.0, 9)
    errs = {}
    for p in (2.5, 3.0, 4.0):
        lam = [timemap.lambda_of_alpha(ProblemParams(p, 1.0), a).lambda_ for a in al]
        errs[p] = abs(fit_rate(al, lam).slope - (3 - p))
    worst = max(errs.values())
    detail = ", ".join(f"p={p:g}: {e:.1e}" for p, e in errs.items())
    _record(6, "large-amplitude lambda slope", worst < 0.05, f"|slope - (3-p)| {detail}")


def test_criterion_07_lambda_small_slope():
    al = np.geomspace(1e-3, 1e-2, 9)
    errs = {}
    for p, target in ((1.5, -0.5), (2.0, -1.0), (3.0, -2.0), (4.0, -2.0), (6.0, -2.0)):
        lam = [timemap.lambda_of_alpha(ProblemParams(p, 1.0), a).lambda_ for a in al]
        errs[p] = abs(fit_rate(al, lam).slope - target)
    worst = max(errs.values())
    detail = ", ".join(f"p={p:g}: {e:.1e}" for p, e in errs.items())
    _record(7, "small-amplitude lambda slope", worst < 0.05, f"|slope - target| {detail}")


def test_criterion_08_small_leading_coefficients():
    a = 1e-3
    e3 = abs(timemap.mu_of_alpha(ProblemParams(3.0), a) * a * a / (4 * C03**2) - 1)
    e5 = abs(timemap.mu_of_alpha(ProblemParams(5.0), a) * a * a / (8 * C03**2) - 1)
    ok = e3 < 5e-3 and e5 < 5e-3
    _record(8, "small-amplitude leading coefficients", ok, f"rel errors p=3: {e3:.1e}, p=5: {e5:.1e}")


def test_criterion_09_oscillatory_second_term():
    frac = oracle.oscillation_agreement(3.0, np.geomspace(50.0, 500.0, 400))
    _record(9, "oscillatory second term sign", frac > 0.8, f"agreement {frac:.3f} > 0.8")


def test_criterion_10_deterministic_sweep():
    cmd = [sys.executable, "-m", "oscibif.cli", "sweep", "--p", "2.5", "--b", "1",
           "--alpha-min", "0.01", "--alpha-max", "500", "--points", "25"]  # fmt: skip
    runs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
    same = runs[0] == runs[1] and len(runs[0]) > 0
    digest = len(runs[0].splitlines())
    _record(10, "deterministic sweep output", same, f"{digest} lines, byte-identical={same}")


def test_reference_constant():
    assert math.isclose(C03, 1.3110287771460599, rel_tol=1e-14)
