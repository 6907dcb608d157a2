"""Command line entry point.

Exit codes: 0 success, 1 validation error, 2 analysis error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pydantic import ValidationError

from . import numlin
from .epn import epn_check
from .errors import AnalysisError
from .jsonio import complex_to_json, dumps, vector_to_json
from .scenarios import ScenarioConfig, ScenarioError, load_scenario, run_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_ANALYSIS, EXIT_IO = 0, 1, 2, 3


def _load(args):
    cfg = load_scenario(args.scenario)
    overrides = {}
    if args.trials is not None:
        overrides["ensemble_trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        data = cfg.model_dump(mode="json") | overrides
        try:
            cfg = ScenarioConfig.model_validate(data, context={"base_dir": Path(args.scenario).parent})
        except ValidationError as exc:
            raise ScenarioError(f"invalid override: {exc.errors()[0]['msg']}") from None
    return cfg


def cmd_check(args) -> int:
    cfg = _load(args)
    print(f"{args.scenario}: ok ({cfg.name}, n_sites={cfg.lattice.n_sites}, "
          f"trials={cfg.ensemble_trials}, analysis={','.join(cfg.analysis)})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    outcome = run_scenario(cfg, out_dir, workers=args.workers)
    for p in outcome.files:
        print(p)
    if outcome.exit_code != EXIT_OK:
        for r in outcome.report["results"]:
            if "error" in r:
                print(f"trial {r['trial']} {r['analysis']}: {r['error']}", file=sys.stderr)
    return outcome.exit_code


def _read_matrix(path):
    try:
        return numlin.read_matrix(path)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def cmd_epn(args) -> int:
    h, exact = _read_matrix(args.matrix)
    rep = epn_check(h, tol=args.tol, exact=exact)
    out = rep.to_dict()
    out["backend"] = "exact" if exact is not None else "float"
    sys.stdout.write(dumps(out))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    h, _ = _read_matrix(args.matrix)
    pairs = numlin.eig(h, tol=args.tol)
    sys.stdout.write(dumps([
        {"value": complex_to_json(p.value), "multiplicity": p.multiplicity,
         "vectors": [vector_to_json(v) for v in p.vectors]}
        for p in pairs
    ]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epnlab", description="Exceptional-point lattice laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--trials", type=int, help="override ensemble_trials")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--out-dir", help="output directory (default: current directory)")

    p = sub.add_parser("check", help="parse and validate a scenario")
    scenario_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="run a scenario and write its outputs")
    scenario_args(p)
    p.add_argument("--workers", type=int, default=1, help="threads for ensemble trials")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("epn", help="EPN report for a matrix file")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=numlin.RANK_TOL)
    p.set_defaults(func=cmd_epn)

    p = sub.add_parser("spectrum", help="eigenvalues and eigenvectors of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=numlin.RANK_TOL)
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
