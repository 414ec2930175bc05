"""Command-line driver.

    epsolve generate nash-cournot --N 20 --seed 0 -o inst.json
    epsolve generate ball --case 1 -o ball.json
    epsolve validate inst.json --samples 10000
    epsolve run config.json --out results/
    epsolve plotdata config.json --out results/
    epsolve table table2

Exit codes: 0 success, 1 config error, 2 validation failure, 3 a run hit an
inner-solver failure.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .bench import (ConfigError, ExperimentConfig, emit_plot_data, reference_solution,
                    run_experiment, table1_config, table2_config)
from .problems import BallProblem, NashCournotProblem, problem_from_json, validate_assumptions

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_INNER = 0, 1, 2, 3


def _write_json(obj, path):
    text = json.dumps(obj) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_generate(args):
    if args.kind == "ball":
        prob = BallProblem(args.dim, args.case)
    else:
        prob = NashCournotProblem.generate(args.N, args.seed)
        if not args.no_reference:
            prob = prob.with_solution(reference_solution(prob))
    _write_json(prob.to_json(), args.output)
    return EXIT_OK


def validate_problem(path, samples=10000, seed=0, out=None):
    """Print the assumption report for a problem file; return the exit code."""
    try:
        prob = problem_from_json(json.loads(Path(path).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot load problem {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = validate_assumptions(prob, samples, seed)
    out = out or sys.stdout
    for line in rep.lines():
        print(line, file=out)
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_validate(args):
    return validate_problem(args.problem, args.samples, args.seed)


def _experiment(args):
    cfg = ExperimentConfig.load(args.config)
    return _apply_overrides(cfg, args)


def _apply_overrides(cfg, args):
    over = {}
    for flag, key in (("tol", "stop_tol"), ("max_iter", "max_iter"), ("seed", "seed"),
                      ("out", "output_dir"), ("replications", "replications"), ("workers", "workers")):
        v = getattr(args, flag, None)
        if v is not None:
            over[key] = v
    if getattr(args, "deterministic", False):
        over["timing"] = False
    return dataclasses.replace(cfg, **over)


def _finish(table):
    print(table.to_text())
    return EXIT_INNER if table.any_inner_failure else EXIT_OK


def cmd_run(args):
    return _finish(run_experiment(_experiment(args)))


def cmd_plotdata(args):
    cfg = dataclasses.replace(_experiment(args), replications=1, output_dir=None)
    table = run_experiment(cfg)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for case in dict.fromkeys(e.case for e in table.runs):
        path = out / f"tol_{case}.dat"
        emit_plot_data(table.results(case=case), path)
        print(path)
    return EXIT_INNER if table.any_inner_failure else EXIT_OK


def cmd_table(args):
    if args.which == "table2":
        cfg = table2_config(dim=args.dim)
    else:
        cfg = table1_config(sizes=tuple(args.sizes), replications=args.replications or 10)
    return _finish(run_experiment(_apply_overrides(cfg, args)))


def _add_overrides(p):
    p.add_argument("--tol", type=float, help="stopping tolerance on ||y_n - w_n||")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--replications", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--deterministic", action="store_true",
                   help="write zero timings so that repeated runs give identical files")


def build_parser():
    ap = argparse.ArgumentParser(prog="epsolve", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a problem instance file")
    g.add_argument("kind", choices=("nash-cournot", "ball"))
    g.add_argument("--N", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dim", type=int, default=50)
    g.add_argument("--case", type=int, default=1, choices=(1, 2, 3))
    g.add_argument("--no-reference", action="store_true",
                   help="skip the tight reference solve stored as known_solution")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check the standing assumptions by sampling")
    v.add_argument("problem")
    v.add_argument("--samples", type=int, default=10000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    _add_overrides(r)
    r.set_defaults(func=cmd_run)

    pd = sub.add_parser("plotdata", help="write TOL_n series for each problem")
    pd.add_argument("config")
    _add_overrides(pd)
    pd.set_defaults(func=cmd_plotdata)

    t = sub.add_parser("table", help="regenerate a benchmark table")
    t.add_argument("which", choices=("table1", "table2"))
    t.add_argument("--dim", type=int, default=50, help="l2 truncation for table2")
    t.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100], help="N values for table1")
    _add_overrides(t)
    t.set_defaults(func=cmd_table)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
