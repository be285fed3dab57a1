"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 bound violation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConfigError, LedgerViolation, NumericError
from .hashing import run_trials, summarize, worker_count
from .report import render
from .scenarios import ReportRow, aggregate_row, builtin_scenarios, load_scenarios, run_scenario, verify_bound_rows

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_NUMERIC = 0, 2, 3, 4


def _add_output(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="fill the runtime column")
    p.add_argument("--transcripts", action="store_true", help="include transcript distributions (JSON only)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locc-ledger", description="Accessible-information ledgers for one-way LOCC.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run scenarios from a config file")
    r.add_argument("scenario_file")
    r.add_argument("--only", action="append", metavar="NAME", help="run only this scenario (repeatable)")
    _add_output(r)

    v = sub.add_parser("verify-bound", help="random ensembles and protocols against the ledger bound")
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--dims", default="2,3,4", help="'2,3,4' for all pairs or '2x3,4x4'")
    v.add_argument("--seed", type=int, default=0)
    _add_output(v)

    s = sub.add_parser("sweep", help="seeded hashing or breeding trials")
    s.add_argument("kind", choices=("hashing", "breeding"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", required=True, help="four comma-separated Bell weights")
    s.add_argument("--margin", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    _add_output(s)

    rep = sub.add_parser("report", help="ledger report over the built-in scenarios (or a config file)")
    rep.add_argument("--scenarios", help="scenario file; defaults to the built-in catalogue")
    _add_output(rep)
    return ap


def _parse_p(raw: str) -> tuple[float, ...]:
    try:
        p = tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse --p {raw!r}") from None
    if len(p) != 4 or min(p) < 0 or abs(sum(p) - 1) > 1e-9:
        raise ConfigError("--p needs four non-negative weights summing to 1")
    return p


def _emit(rows, args) -> None:
    if args.transcripts and args.format != "json":
        raise ConfigError("--transcripts needs --format json")
    text = render(rows, args.format, args.transcripts)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _run_scenarios(scenarios, args) -> list[ReportRow]:
    if getattr(args, "only", None):
        known = {s.name for s in scenarios}
        missing = [n for n in args.only if n not in known]
        if missing:
            raise ConfigError(f"no scenario named {', '.join(missing)}")
        scenarios = [s for s in scenarios if s.name in args.only]
    rows = []
    for s in scenarios:
        rows.extend(run_scenario(s, timing=args.timing, transcripts=args.transcripts))
    return rows


def _cmd_run(args) -> int:
    _emit(_run_scenarios(load_scenarios(args.scenario_file), args), args)
    return EXIT_OK


def _cmd_report(args) -> int:
    scenarios = load_scenarios(args.scenarios) if args.scenarios else builtin_scenarios()
    _emit(_run_scenarios(scenarios, args), args)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.trials < 0:
        raise ConfigError("--trials must be >= 0")
    rows, bad = verify_bound_rows(args.trials, args.dims, args.seed, timing=args.timing)
    _emit(rows, args)
    if bad:
        print(f"{bad} of {args.trials} trials violated the ledger bound", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.trials < 0:
        raise ConfigError("--trials must be >= 0")
    p = _parse_p(args.p)
    start = time.perf_counter()
    outcomes = run_trials(args.kind, args.n, p, args.margin, args.trials, args.seed, workers=worker_count())
    name = f"{args.kind}-{args.n}"
    rows = [ReportRow.from_ledger(name, t, "index", o.ledger, args.seed) for t, o in enumerate(outcomes)]
    if rows:
        rows.append(aggregate_row(rows, time.perf_counter() - start if args.timing else None))
    _emit(rows, args)
    if outcomes:
        sm = summarize(outcomes, p)
        print(
            f"{sm.kind} n={sm.n} rounds={sm.rounds} trials={sm.trials} "
            f"identified={sm.identification_rate:.4f} yield={sm.mean_yield_per_copy:.4f} "
            f"target={sm.target_yield:.4f} gap={sm.gap:.4f}",
            file=sys.stderr,
        )
        if sm.violations:
            return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "report": _cmd_report, "verify-bound": _cmd_verify, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LedgerViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
