"""Command-line front end: ``oscibif sweep`` and ``oscibif verify``.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Optional

import numpy as np

from . import __version__, asymptotics, oracle, timemap
from .model import ProblemParams

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3

COLUMNS = (
    "alpha", "p", "b",
    "mu_exact", "gradsq_exact", "lambda_exact",
    "mu_asym", "gradsq_asym", "lambda_asym",
    "rel_err_mu", "rel_err_lambda",
    "regime", "flags",
)  # fmt: skip


class ConfigError(ValueError):
    """Invalid sweep or verify configuration."""


@dataclass(frozen=True)
class SweepConfig:
    p: float
    b: float = 0.0
    alpha_min: float = 0.01
    alpha_max: float = 100.0
    points: int = 41
    scale: str = "log"
    mode: str = "both"
    truncation: Optional[int] = None  # None means the full expansion
    tol: float = timemap.DEFAULT_REL_TOL
    format: str = "csv"
    out: Optional[str] = None

    def validate(self) -> ProblemParams:
        try:
            params = ProblemParams(self.p, self.b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("alpha_min", "alpha_max"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive and finite")
        if not self.alpha_min < self.alpha_max:
            raise ConfigError("alpha_min must be smaller than alpha_max")
        if self.points < 2:
            raise ConfigError("points must be at least 2")
        if self.scale not in ("log", "linear"):
            raise ConfigError("scale must be log or linear")
        if self.mode not in ("exact", "asymptotic", "both"):
            raise ConfigError("mode must be exact, asymptotic or both")
        if self.truncation is not None and self.truncation < 1:
            raise ConfigError("truncation must be a positive integer or 'full'")
        if not (self.tol > 0.0 and self.tol < 1.0):
            raise ConfigError("tol must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        return params

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return timemap.log_grid(self.alpha_min, self.alpha_max, self.points)
        g = np.linspace(self.alpha_min, self.alpha_max, self.points)
        g[0], g[-1] = self.alpha_min, self.alpha_max
        return g


def thread_count() -> int:
    raw = os.environ.get("OSCIBIF_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"OSCIBIF_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"OSCIBIF_THREADS must be a positive integer, got {raw!r}")
    return n


def _rel(a, b):
    if a is None or b is None or b == 0.0:
        return None
    return abs(a / b - 1.0)


def sweep_row(config: SweepConfig, params: ProblemParams, alpha: float) -> tuple[dict, bool]:
    """One output row and whether every computation converged."""
    row = dict.fromkeys(COLUMNS)
    row.update(alpha=float(alpha), p=params.p, b=params.b, regime="", flags="")
    flags: list[str] = []
    ok = True
    if config.mode in ("exact", "both"):
        try:
            cp = timemap.lambda_of_alpha(params, alpha, config.tol)
            row.update(mu_exact=cp.mu, gradsq_exact=cp.grad_norm_sq, lambda_exact=cp.lambda_)
        except ArithmeticError:
            ok = False
    if config.mode in ("asymptotic", "both"):
        try:
            m = asymptotics.expansion("mu", params, alpha, config.truncation)
            g = asymptotics.expansion("gradsq", params, alpha, config.truncation)
            lam = asymptotics.expansion("lambda", params, alpha, config.truncation)
            row.update(mu_asym=m.value, gradsq_asym=g.value, lambda_asym=lam.value, regime=m.regime.value)
            flags.extend(f for f in m.flags if f not in flags)
        except ArithmeticError:
            ok = False
    row["rel_err_mu"] = _rel(row["mu_asym"], row["mu_exact"])
    row["rel_err_lambda"] = _rel(row["lambda_asym"], row["lambda_exact"])
    if not ok:
        flags.append("nonconverged")
    row["flags"] = ";".join(flags)
    return row, ok


def compute_rows(config: SweepConfig) -> tuple[list[dict], bool]:
    params = config.validate()
    grid = config.grid()
    workers = min(thread_count(), len(grid))
    if workers == 1:
        results = [sweep_row(config, params, a) for a in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map preserves input order, so rows come out sorted by alpha
            results = list(pool.map(lambda a: sweep_row(config, params, a), grid))
    rows = [r for r, _ in results]
    return rows, all(ok for _, ok in results)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in COLUMNS])
    return buf.getvalue()


def format_json(rows: list[dict], config: SweepConfig) -> str:
    cfg = asdict(config)
    cfg["truncation"] = "full" if config.truncation is None else config.truncation
    doc = {"metadata": {"version": __version__, "config": cfg, "columns": list(COLUMNS)}, "rows": rows}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run_sweep(config: SweepConfig) -> int:
    """Compute and emit the sweep; returns the exit code."""
    try:
        rows, ok = compute_rows(config)
    except ConfigError as exc:
        print(f"oscibif: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = format_csv(rows) if config.format == "csv" else format_json(rows, config)
    _emit(text, config.out)
    if not ok:
        print("oscibif: quadrature did not converge for some rows (flagged 'nonconverged')", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def report_schema() -> dict:
    """JSON schema of the verification report."""
    text = resources.files(__package__).joinpath("report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def report_document(report: oracle.VerificationReport, tol: float) -> dict:
    doc = report.to_dict()
    for c in doc["checks"]:
        if not math.isfinite(c["value"]):
            c["value"] = None
    return {"version": __version__, "p": doc["p"], "b": doc["b"], "tol": tol, "passed": doc["passed"],
            "checks": doc["checks"]}


def run_verify(p: float, b: float, tol: float = oracle.SHOOT_TOL, fmt: str = "text", out: Optional[str] = None,
               quick: bool = False) -> int:
    """Run the invariant suite; text or JSON goes to stdout, JSON also to ``out``."""
    try:
        params = ProblemParams(p, b)
        if not (tol > 0.0 and tol < 1.0):
            raise ValueError("tol must lie in (0, 1)")
        if fmt not in ("text", "json"):
            raise ValueError("format must be text or json")
    except ValueError as exc:
        print(f"oscibif: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = oracle.verify(params, tol=tol, quick=quick)
    except ArithmeticError as exc:
        print(f"oscibif: numerical failure during verification: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    doc = json.dumps(report_document(report, tol), indent=2, allow_nan=False) + "\n"
    sys.stdout.write(doc if fmt == "json" else report.to_text() + "\n")
    if out is not None:
        _emit(doc, out)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _truncation(text: str) -> Optional[int]:
    if text == "full":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("truncation must be a positive integer or 'full'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("truncation must be a positive integer or 'full'")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscibif", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="tabulate exact and asymptotic curves over an amplitude grid")
    sw.add_argument("--p", type=float, required=True, help="exponent p > 1")
    sw.add_argument("--b", type=float, default=0.0, help="Kirchhoff coefficient b >= 0")
    sw.add_argument("--alpha-min", type=float, required=True)
    sw.add_argument("--alpha-max", type=float, required=True)
    sw.add_argument("--points", type=int, default=41)
    sw.add_argument("--scale", choices=("log", "linear"), default="log")
    sw.add_argument("--mode", choices=("exact", "asymptotic", "both"), default="both")
    sw.add_argument("--truncation", type=_truncation, default=None, help="number of bracket terms, or 'full'")
    sw.add_argument("--tol", type=float, default=timemap.DEFAULT_REL_TOL, help="quadrature relative tolerance")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--out", default=None, help="output path (default stdout)")

    ve = sub.add_parser("verify", help="run the invariant and rate checks")
    ve.add_argument("--p", type=float, default=3.0)
    ve.add_argument("--b", type=float, default=1.0)
    ve.add_argument("--tol", type=float, default=oracle.SHOOT_TOL, help="shooting local error tolerance")
    ve.add_argument("--format", choices=("text", "json"), default="text")
    ve.add_argument("--out", default=None, help="also write the JSON report here")
    ve.add_argument("--quick", action="store_true", help="thinner amplitude grids")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        cfg = SweepConfig(
            p=args.p, b=args.b, alpha_min=args.alpha_min, alpha_max=args.alpha_max, points=args.points,
            scale=args.scale, mode=args.mode, truncation=args.truncation, tol=args.tol, format=args.format,
            out=args.out,
        )
        return run_sweep(cfg)
    return run_verify(args.p, args.b, args.tol, args.format, args.out, args.quick)


if __name__ == "__main__":
    sys.exit(main())
