"""Command-line entry point: ``eacomm <command> ...``.

Exit status: 0 success, 1 invalid input, 2 enumeration budget exceeded,
3 a golden value failed under ``reproduce --check``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import optics, reproduce, stats
from .classical import DEFAULT_BUDGET, BudgetExceededError, max_classical_value
from .protocols import TASK_FUNCTIONALS, TASK_PROTOCOLS, NoCrossingError
from .seesaw import SeesawConfig, seesaw_eaq, sweep_partial_entanglement

SCHEMA = 1
TASKS = tuple(TASK_FUNCTIONALS)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _task(value: str) -> str:
    label = value.upper()
    if label not in TASKS:
        raise argparse.ArgumentTypeError(f"unknown task {value!r}; choose from {', '.join(TASKS)}")
    return label


def _restriction(value: str) -> tuple[str, float | None]:
    if value in ("product", "entbit", "none"):
        return value, None
    if value.startswith("theta="):
        try:
            return "theta", float(value[len("theta="):])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError("expected product, entbit or theta=<x>")


def _grid(value: str) -> np.ndarray:
    try:
        a, b, n = value.split(":")
        n = int(n)
        a, b = float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a:b:n") from None
    if n < 1:
        raise argparse.ArgumentTypeError("n must be positive")
    return np.linspace(a, b, n)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the result to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="eacomm", description="Entanglement-assisted qubit communication toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="score of the reference protocol")
    p.add_argument("task", type=_task)
    p.add_argument("--visibility", type=float)

    p = sub.add_parser("bound", parents=[common], help="exact classical bound and witness")
    p.add_argument("task", type=_task)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--side", choices=("encoders", "decoders"))
    p.add_argument("--budget", type=float, default=DEFAULT_BUDGET)

    p = sub.add_parser("seesaw", parents=[common], help="see-saw lower bound")
    p.add_argument("task", type=_task)
    p.add_argument("--restrict", type=_restriction, default=("none", None))
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)

    p = sub.add_parser("sweep", parents=[common], help="see-saw value versus entanglement angle")
    p.add_argument("task", type=_task)
    p.add_argument("--theta-grid", type=_grid, required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, help="report where the curve crosses this value")

    p = sub.add_parser("stats", help="statistical certification")
    ssub = p.add_subparsers(dest="stats_command", required=True, parser_class=_Parser)
    c = ssub.add_parser("certify", parents=[common], help="score, sigma violation and Azuma bound")
    c.add_argument("--table", required=True, help="results CSV, or table3.csv / table6.csv")
    c.add_argument("--task", type=_task, required=True)
    c.add_argument("--error", type=float,
                   help="score uncertainty; defaults to the reported aggregate or the propagated cell errors")
    c.add_argument("--rounds", type=int,
                   help="number of rounds N; defaults to 18e6 per setting")
    c.add_argument("--d", type=int, default=4, help="classical alphabet to compare against")

    p = sub.add_parser("optics", help="wave-plate settings")
    osub = p.add_subparsers(dest="optics_command", required=True, parser_class=_Parser)
    osub.add_parser("verify", parents=[common], help="check the settings tables")
    m = osub.add_parser("mc", parents=[common], help="Monte Carlo over angle errors")
    m.add_argument("--sigma", type=float, required=True, help="degrees")
    m.add_argument("--samples", type=int, required=True)
    m.add_argument("--task", type=_task, default="S", choices=("S", "T"))
    m.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("reproduce", parents=[common], help="summary table and golden-value checks")
    p.add_argument("--check", action="store_true", help="exit 3 unless every golden value passes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=50)
    return parser


# ---------------------------------------------------------------------------


def _eval(args) -> dict:
    fn = TASK_FUNCTIONALS[args.task]()
    proto = TASK_PROTOCOLS[args.task]()
    return {"task": args.task, "visibility": args.visibility,
            "score": proto.score(fn, args.visibility)}


def _bound(args) -> dict:
    res = max_classical_value(TASK_FUNCTIONALS[args.task](), args.d, args.budget, args.side)
    return {"task": args.task, **res.to_dict()}


def _seesaw(args) -> dict:
    restriction, theta = args.restrict
    cfg = SeesawConfig(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters,
                       restriction=restriction, theta=theta)
    return {"task": args.task, **seesaw_eaq(TASK_FUNCTIONALS[args.task](), cfg).to_dict()}


def _sweep(args) -> dict:
    res = sweep_partial_entanglement(TASK_FUNCTIONALS[args.task](), args.theta_grid,
                                     SeesawConfig(restarts=args.restarts, seed=args.seed),
                                     threshold=args.threshold)
    return {"task": args.task, "threshold": res.threshold, "crossing": res.crossing,
            "monotone": res.is_monotone(),
            "rows": [{"theta": t, "value": v} for t, v in zip(res.thetas, res.values)]}


def _certify(args) -> dict:
    fn = TASK_FUNCTIONALS[args.task]()
    beh = stats.ingest_results_table(args.table, fn)
    error = args.error
    if error is None:
        bundled = args.table == reproduce.TASK_TABLES.get(args.task)
        error = stats.REPORTED_AGGREGATE_ERROR[args.task] if bundled else stats.propagated_error(fn, beh)
    rounds = args.rounds if args.rounds is not None else stats.default_rounds(fn)
    return {"task": args.task, "error": error, **stats.certify(beh, fn, error, rounds, args.d)}


def _optics_verify(args) -> dict:
    return {"rows": optics.verify_settings_tables()}


def _optics_mc(args) -> dict:
    settings = optics.settings_S() if args.task == "S" else optics.settings_T()
    return {"task": args.task,
            **optics.monte_carlo_angle_noise(settings, args.sigma, args.samples, args.seed)}


def _reproduce(args) -> dict:
    doc = {"seed": args.seed, "rows": reproduce.summary_table(args.seed, args.restarts)}
    if args.check:
        checks = reproduce.acceptance_checks(args.seed)
        for chk in checks:
            print(chk.line(), file=sys.stderr)
        doc["checks"] = [c.to_dict() for c in checks]
        doc["allPassed"] = all(c.passed for c in checks)
    return doc


def _command(args):
    if args.command == "stats":
        return _certify
    if args.command == "optics":
        return _optics_verify if args.optics_command == "verify" else _optics_mc
    return {"eval": _eval, "bound": _bound, "seesaw": _seesaw, "sweep": _sweep,
            "reproduce": _reproduce}[args.command]


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _to_csv(doc: dict) -> str:
    buf = io.StringIO()
    rows = doc.get("rows")
    if rows:
        fields = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v, default=_default) if isinstance(v, (list, dict)) else v
                             for k, v in r.items()})
    else:
        writer = csv.writer(buf)
        writer.writerow(["key", "value"])
        for k, v in doc.items():
            writer.writerow([k, json.dumps(v, default=_default) if isinstance(v, (list, dict)) else v])
    return buf.getvalue()


def _emit(doc: dict, args) -> None:
    doc = {"schema": SCHEMA, **doc}
    if args.format == "csv":
        text = _to_csv(doc)
    else:
        text = json.dumps(doc, indent=2, default=_default) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc = _command(args)(args)
    except UsageError as exc:
        print(f"eacomm: error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceededError as exc:
        print(f"eacomm: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (ValueError, NoCrossingError, OSError) as exc:
        print(f"eacomm: error: {exc}", file=sys.stderr)
        return 1
    _emit(doc, args)
    if doc.get("allPassed") is False:
        return 3
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
