"""Command-line driver.

    brownkit simulate --config F --seed S --out DIR [--workers W] [--paths K]
    brownkit verify --config F --seed S [--out DIR] [--workers W]
    brownkit laws --law NAME --grid SPEC --out FILE
    brownkit acceptance --out DIR [--only AC-1,AC-7] [--workers W]

Exit status is 0 iff every test passed (2 for usage or config errors).
"""

from __future__ import annotations

import argparse
import sys

from brownkit.errors import BrownkitError


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _workers(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("workers must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brownkit", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate an ensemble and write functionals to CSV")
    sim.add_argument("--config", required=True, help="config file or shipped config name")
    sim.add_argument("--seed", required=True, type=_seed)
    sim.add_argument("--out", required=True)
    sim.add_argument("--workers", type=_workers, default=1)
    sim.add_argument("--paths", type=int, default=10, help="number of full paths to write")

    ver = sub.add_parser("verify", help="run a config's statistical tests")
    ver.add_argument("--config", required=True)
    ver.add_argument("--seed", required=True, type=_seed)
    ver.add_argument("--out", default=None, help="defaults to the config's output_dir")
    ver.add_argument("--workers", type=_workers, default=1)

    law = sub.add_parser("laws", help="tabulate a closed-form law over a parameter grid")
    law.add_argument("--law", required=True)
    law.add_argument("--grid", required=True, help="e.g. 's=0,0.25,0.5' or 'a=1;T=0.5:4:8'")
    law.add_argument("--out", required=True)

    acc = sub.add_parser("acceptance", help="run the acceptance criteria")
    acc.add_argument("--out", required=True)
    acc.add_argument("--only", default=None, help="comma-separated criterion ids")
    acc.add_argument("--workers", type=_workers, default=1)
    return p


def _report(reports) -> int:
    for r in reports:
        print(f"{r.test_name}: {'PASS' if r.passed else 'FAIL'} "
              f"statistic={r.statistic:.6g} threshold={r.threshold:.6g}")
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from brownkit import acceptance, experiment

    try:
        if args.command == "laws":
            rows = experiment.emit_law_table(args.law, experiment.parse_grid(args.grid), args.out)
            print(f"wrote {rows} rows to {args.out}")
            return 0
        if args.command == "acceptance":
            ids = [s.strip() for s in args.only.split(",")] if args.only else None
            results = acceptance.run(ids, args.workers)
            acceptance.write_results(results, args.out)
            return 0 if all(r.passed for r in results) else 1
        config = experiment.load_config(args.config).with_seed(args.seed)
        if args.command == "simulate":
            reports = experiment.run_experiment(config, args.out, args.workers, args.paths)
        else:
            reports = experiment.run_experiment(config, args.out, args.workers)
        return _report(reports)
    except (BrownkitError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
