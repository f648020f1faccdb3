"""Command-line front end.

Subcommands: ``eval``, ``table``, ``figure1``, ``figure2``, ``physics`` and
``verify``.  Tolerance, truncation and seed settings resolve as
flag > environment variable (``LATTICE_TOL``, ``LATTICE_MAX_TERMS``,
``LATTICE_SEED``) > built-in default.

Exit codes: 0 on success (including a zero critical temperature), 1 on a
numerical failure (divergent or unconverged), 2 on a usage error.
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
from typing import Callable, Iterable, Sequence

from .hyperseries import (
    DEFAULT_FIXED_M,
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    DivergentSeries,
    NotConverged,
    SeriesControl,
)
from .lattice import Family, LatticeQuery, QuadratureResult, evaluate
from . import physics
from . import verify as verify_mod

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
STATUSES = ("ok", "divergent", "zero_Tc", "not_converged")
CSV_FIELDS = ("family", "d", "eta", "spin", "value", "tail_bound", "terms_used", "status")


@dataclass(frozen=True)
class OutputRecord:
    """One evaluated point.

    ``family`` names the lattice family, or the observable for ``physics``
    records.  ``tail_bound`` holds the series tail bound or the quadrature
    error estimate; ``terms_used`` the terms summed or integrand
    evaluations.  ``value`` and the diagnostics are ``None`` unless
    ``status`` is ``ok``.
    """

    family: str
    d: float
    eta: float
    spin: float | None
    value: float | None
    tail_bound: float | None
    terms_used: int | None
    status: str


def output_schema() -> dict:
    """The published JSON schema for a single record."""
    text = resources.files(__package__).joinpath("output_schema.json").read_text()
    return json.loads(text)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


def _json_value(x):
    # round-trip through the 15-digit text form so CSV and JSON agree
    return float(f"{x:.15g}") if isinstance(x, float) else x


def render(records: Sequence[OutputRecord], fmt: str, single: bool = False) -> str:
    if fmt == "json":
        rows = [{k: _json_value(v) for k, v in asdict(r).items()} for r in records]
        return json.dumps(rows[0] if single else rows, indent=None) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([_fmt(getattr(r, f)) for f in CSV_FIELDS])
        return buf.getvalue()
    lines = []
    for r in records:
        head = f"{r.family} d={r.d:g} eta={r.eta:g}"
        if r.spin is not None:
            head += f" S={r.spin:g}"
        if r.status == "ok":
            lines.append(f"{head}: {r.value:.6f} (tail {r.tail_bound:.1e}, "
                         f"{r.terms_used} terms) {r.status}")
        else:
            lines.append(f"{head}: {r.status}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# configuration


def _env(name: str, cast: Callable, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not valid")


class UsageError(Exception):
    pass


def _control(args, fixed_default: int | None = None,
             correction: bool = False) -> SeriesControl:
    tol = args.tol if args.tol is not None else _env("LATTICE_TOL", float, DEFAULT_TOL)
    max_terms = (args.max_terms if args.max_terms is not None
                 else _env("LATTICE_MAX_TERMS", int, DEFAULT_MAX_TERMS))
    fixed = args.fixed_M if args.fixed_M is not None else fixed_default
    try:
        return SeriesControl(tol=tol, max_terms=max_terms, fixed_M=fixed,
                             tail_correction=correction)
    except ValueError as exc:
        raise UsageError(str(exc))


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else _env("LATTICE_SEED", int, 42)
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return seed


def parse_grid(text: str) -> list[float]:
    """``"a,b,c"`` lists points; ``"start:stop:step"`` is an inclusive range."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if not all(map(math.isfinite, (start, stop, step))):
                raise UsageError(f"range {text!r} must be finite")
            if not step > 0 or stop < start:
                raise UsageError(f"range {text!r} needs step > 0 and stop >= start")
            n = int(round((stop - start) / step + 1e-9))
            return [round(start + i * step, 12) for i in range(n + 1)]
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}")
    if not values or not all(map(math.isfinite, values)):
        raise UsageError(f"grid {text!r} needs finite numbers")
    return values


def _map(fn, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# commands


def evaluate_record(family: str, d: float, eta: float,
                    control: SeriesControl) -> OutputRecord:
    try:
        query = LatticeQuery(family, d, eta)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        result = evaluate(query, control)
    except DivergentSeries:
        return OutputRecord(query.family.value, d, eta, None, None, None, None, "divergent")
    except NotConverged:
        return OutputRecord(query.family.value, d, eta, None, None, None, None,
                            "not_converged")
    if isinstance(result, QuadratureResult):
        return OutputRecord(query.family.value, d, eta, None, result.value,
                            result.error_estimate, result.evaluations, "ok")
    return OutputRecord(query.family.value, d, eta, None, result.value,
                        result.tail_bound, result.terms_used, "ok")


def _status_exit(records: Iterable[OutputRecord], allow_divergent: bool) -> int:
    bad = any(r.status in ("divergent", "not_converged") for r in records)
    return EXIT_NUMERIC if bad and not allow_divergent else EXIT_OK


def cmd_eval(args, out) -> int:
    d, eta = _single(args.d, "--d"), _single(args.eta, "--eta")
    record = evaluate_record(args.family, d, eta, _control(args))
    out.write(render([record], args.format, single=True))
    return _status_exit([record], args.allow_divergent)


def _single(text: str, flag: str) -> float:
    values = parse_grid(text)
    if len(values) != 1:
        raise UsageError(f"{flag} takes a single number here")
    return values[0]


def cmd_table(args, out) -> int:
    control = _control(args)
    points = [(d, eta) for d in parse_grid(args.d) for eta in parse_grid(args.eta)]
    records = _map(lambda p: evaluate_record(args.family, p[0], p[1], control),
                   points, args.workers)
    out.write(render(records, args.format))
    return EXIT_OK


def _figure_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


FIGURE_ETAS = (1.0, 1.005)


def cmd_figure1(args, out) -> int:
    """``I(d, eta)`` for both anisotropies as plain truncated sums."""
    control = _control(args, fixed_default=DEFAULT_FIXED_M)

    def row(d: float):
        cols = [evaluate(LatticeQuery(Family.I_BCC, d, eta), control) for eta in FIGURE_ETAS]
        return [d] + [c.value for c in cols] + [c.tail_bound for c in cols]

    rows = _map(row, parse_grid(args.d), args.workers)
    header = ("d", "I_at_eta_1", "I_at_eta_1.005", "tail_at_eta_1", "tail_at_eta_1.005")
    out.write(_figure_csv(header, rows))
    return EXIT_OK


def cmd_figure2(args, out) -> int:
    """Relative magnetization and reduced critical temperature against ``d``."""
    control = _control(args, fixed_default=DEFAULT_FIXED_M, correction=True)
    spin = args.spin

    def row(d: float):
        rel, red, zero = [], [], []
        for eta in FIGURE_ETAS:
            try:
                rel.append(physics.ground_state(physics.SpinSystem(spin, d, eta),
                                                control).relative)
            except DivergentSeries:
                rel.append(None)
            value = physics.reduced_critical_temperature(d, eta, control)
            red.append(value)
            zero.append(int(value == 0.0))
        return [d] + rel + red + zero

    rows = _map(row, parse_grid(args.d), args.workers)
    header = ("d", "rel_mag_eta1", "rel_mag_eta1.005", "red_Tc_eta1", "red_Tc_eta1.005",
              "zero_Tc_eta1", "zero_Tc_eta1.005")
    out.write(_figure_csv(header, rows))
    return EXIT_OK


def physics_records(spin: float, d: float, eta: float,
                    control: SeriesControl) -> list[OutputRecord]:
    try:
        system = physics.SpinSystem(spin, d, eta)
    except ValueError as exc:
        raise UsageError(str(exc))

    def rec(name, value, status="ok"):
        return OutputRecord(name, d, eta, spin, value if status == "ok" else None,
                            None, None, status)

    records = []
    try:
        ground = physics.ground_state(system, control)
        records += [rec("P_S", ground.p_s), rec("magnetization", ground.magnetization),
                    rec("relative_magnetization", ground.relative)]
    except DivergentSeries:
        records += [rec(n, None, "divergent")
                    for n in ("P_S", "magnetization", "relative_magnetization")]
    except NotConverged:
        records += [rec(n, None, "not_converged")
                    for n in ("P_S", "magnetization", "relative_magnetization")]
    for name, fn in (("T_N", physics.neel_temperature), ("T_C", physics.curie_temperature)):
        try:
            tc = fn(system, control)
        except NotConverged:
            records.append(rec(name, None, "not_converged"))
            continue
        records.append(rec(name, None, "zero_Tc") if tc.zero else rec(name, tc.value))
    return records


def cmd_physics(args, out) -> int:
    records = physics_records(args.spin, _single(args.d, "--d"),
                              _single(args.eta, "--eta"), _control(args))
    out.write(render(records, args.format))
    return _status_exit(records, args.allow_divergent)


def cmd_verify(args, out) -> int:
    checks = verify_mod.run(args.suite, seed=_seed(args), mc_samples=args.mc_samples,
                            workers=args.workers)
    for check in checks:
        out.write(check.line() + "\n")
    failed = sum(not c.passed for c in checks)
    out.write(f"{len(checks) - failed}/{len(checks)} checks passed\n")
    return EXIT_NUMERIC if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="relative series tolerance (env LATTICE_TOL)")
    common.add_argument("--max-terms", type=int, default=None,
                        help="series term cap (env LATTICE_MAX_TERMS)")
    common.add_argument("--fixed-M", type=int, default=None,
                        help="sum exactly terms 0..M instead of to tolerance")
    common.add_argument("--seed", type=int, default=None,
                        help="Monte Carlo seed (env LATTICE_SEED)")
    common.add_argument("--allow-divergent", action="store_true",
                        help="exit 0 even when the result is divergent")
    common.add_argument("--workers", type=int, default=1,
                        help="threads for grid commands; output order is fixed")

    parser = argparse.ArgumentParser(
        prog="watsonlattice",
        description="Watson-like lattice integrals and hyper-bcc magnet observables.")
    sub = parser.add_subparsers(dest="command", required=True)
    families = [f.value for f in Family]

    p = sub.add_parser("eval", parents=[common], help="evaluate one integral")
    p.add_argument("--family", required=True, choices=families)
    p.add_argument("--d", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("table", parents=[common], help="evaluate a (d, eta) grid")
    p.add_argument("--family", required=True, choices=families)
    p.add_argument("--d", required=True, help="list a,b,c or range start:stop:step")
    p.add_argument("--eta", required=True, help="list a,b,c or range start:stop:step")
    p.add_argument("--format", choices=("text", "csv", "json"), default="csv")
    p.set_defaults(run=cmd_table)

    p = sub.add_parser("figure1", parents=[common], help="I(d, eta) curves as CSV")
    p.add_argument("--d", default="1.01:5:0.01")
    p.set_defaults(run=cmd_figure1)

    p = sub.add_parser("figure2", parents=[common],
                       help="magnetization and critical temperature curves as CSV")
    p.add_argument("--d", default="1.01:5:0.01")
    p.add_argument("--spin", type=float, default=2.5)
    p.set_defaults(run=cmd_figure2)

    p = sub.add_parser("physics", parents=[common], help="observables at one point")
    p.add_argument("--d", required=True)
    p.add_argument("--eta", default="1")
    p.add_argument("--spin", type=float, default=2.5)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(run=cmd_physics)

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("suite", nargs="?", default="all",
                   choices=verify_mod.SUITES + ("all",))
    p.add_argument("--mc-samples", type=int, default=10_000_000)
    p.set_defaults(run=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args, out)
    except UsageError as exc:
        print(f"watsonlattice {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
