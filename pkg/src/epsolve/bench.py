"""Benchmark harness: experiment configs, replicated runs, summary tables and
TOL_n plot data."""

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .inertia import OnlineRule, RelaxationSchedule
from .problems import NashCournotProblem, problem_from_json
from .solvers import INNER_FAILURE, SolverConfig, benchmark_configs, solve

log = logging.getLogger(__name__)

SUMMARY_HEADER = ("algorithm", "case", "mean_iter", "mean_ms", "converged", "replications")
BENCHMARK_ALGORITHMS = ("alg33-sub_half", "alg33-half", "alg33-near_one", "rkspw", "vm")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problems: list
    algorithms: list = None
    stop_tol: float = 1e-5
    max_iter: int = 10000
    replications: int = 1
    seed: int = 0
    output_dir: str = None
    record_gamma: bool = False
    timing: bool = True
    workers: int = 1

    def __post_init__(self):
        if not self.problems:
            raise ConfigError("config needs at least one problem")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        names = [a["name"] for a in self.algorithm_specs()]
        if len(set(names)) != len(names):
            raise ConfigError(f"algorithm names must be unique: {names}")

    @classmethod
    def from_dict(cls, d, base_dir=None):
        d = dict(d)
        probs = []
        for p in d.pop("problems", None) or ([d.pop("problem")] if "problem" in d else []):
            if "file" in p:
                path = Path(p["file"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                loaded = json.loads(path.read_text())
                loaded.setdefault("label", p.get("label", path.stem))
                p = loaded
            probs.append(p)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(problems=probs, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def algorithm_specs(self):
        if not self.algorithms:
            return [{"name": n} for n in BENCHMARK_ALGORITHMS]
        return [a if isinstance(a, dict) else {"name": a} for a in self.algorithms]


def table2_config(dim=50, **kw):
    probs = [{"kind": "ball_ep", "dim": dim, "case": c} for c in (1, 2, 3)]
    return ExperimentConfig(problems=probs, **kw)


def table1_config(sizes=(20, 50, 100), replications=10, **kw):
    probs = [{"kind": "nash_cournot", "N": n} for n in sizes]
    return ExperimentConfig(problems=probs, replications=replications, **kw)


def case_label(spec):
    if "label" in spec:
        return str(spec["label"])
    if spec.get("kind") == "ball_ep":
        return f"case{spec.get('case', 1)}"
    if spec.get("kind") == "nash_cournot":
        return f"N{spec.get('N', len(spec.get('q', [])))}"
    return spec.get("kind", "problem")


def build_problem(spec, seed, rep):
    """Nash-Cournot specs without matrices are regenerated with ``seed + rep``."""
    spec = {k: v for k, v in spec.items() if k != "label"}
    if spec.get("kind") == "nash_cournot" and "P" not in spec:
        return NashCournotProblem.generate(int(spec["N"]), int(spec.get("seed", seed)) + rep)
    try:
        return problem_from_json(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad problem spec: {exc}") from exc


def algorithm_config(spec, prob, cfg):
    """Resolve one algorithm entry to ``(solver key, SolverConfig)``."""
    defaults = benchmark_configs(prob, cfg.stop_tol, cfg.max_iter, record_gamma=cfg.record_gamma)
    name = spec["name"]
    if name in defaults:
        key, sc = defaults[name]
    else:
        key = spec.get("solver")
        if key not in ("alg33", "rkspw", "vm"):
            raise ConfigError(f"algorithm {name!r} needs solver alg33|rkspw|vm")
        key, sc = defaults["alg33-half" if key == "alg33" else key]
    key = spec.get("solver", key)
    try:
        return key, _resolved(spec, key, sc, prob, cfg)
    except ValueError as exc:
        raise ConfigError(f"algorithm {name!r}: {exc}") from exc


def _resolved(spec, key, sc, prob, cfg):
    sched = sc.schedule
    if key == "alg33":
        if not isinstance(sched, RelaxationSchedule):
            sched = RelaxationSchedule()
        kw = {k: spec[k] for k in ("epsilon", "safety", "monotone") if k in spec}
        if "phi" in spec:
            phi = spec["phi"]
            sched = (RelaxationSchedule.parse(phi, **kw) if isinstance(phi, str)
                     else RelaxationSchedule("custom", values=tuple(phi), **kw))
        elif kw:
            sched = RelaxationSchedule(sched.kind, **{"epsilon": sched.epsilon, **kw})
    elif "theta_cap" in spec or not isinstance(sched, OnlineRule):
        sched = OnlineRule(spec.get("theta_cap", 0.9), spec.get("eps_scale", 100.0))
    return SolverConfig(
        lambda1=spec.get("lambda1", sc.lambda1),
        mu=spec.get("mu", sc.mu),
        schedule=sched,
        stop_tol=cfg.stop_tol,
        max_iter=cfg.max_iter,
        record_gamma=cfg.record_gamma and prob.known_solution is not None,
        inner_tol=spec.get("inner_tol", sc.inner_tol),
        max_inner=spec.get("max_inner", sc.max_inner),
    )


def _run_one(task):
    spec, alg, cfg, rep = task
    prob = build_problem(spec, cfg.seed, rep)
    key, sc = algorithm_config(alg, prob, cfg)
    x0, x1 = prob.initial_points()
    return solve(key, prob, x0, x1, sc, name=alg["name"])


@dataclass
class RunEntry:
    case: str
    algorithm: str
    replication: int
    result: object


@dataclass
class SummaryTable:
    rows: list = field(default_factory=list)
    runs: list = field(default_factory=list)

    def row(self, algorithm, case):
        for r in self.rows:
            if r["algorithm"] == algorithm and r["case"] == case:
                return r
        raise KeyError((algorithm, case))

    def results(self, algorithm=None, case=None):
        return [e.result for e in self.runs
                if (algorithm is None or e.algorithm == algorithm) and (case is None or e.case == case)]

    @property
    def any_inner_failure(self):
        return any(e.result.stop_reason == INNER_FAILURE for e in self.runs)

    def to_csv(self, fh):
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SUMMARY_HEADER)
        for r in self.rows:
            wr.writerow([r["algorithm"], r["case"], _fmt(r["mean_iter"]), _fmt(r["mean_ms"]),
                         r["converged"], r["replications"]])

    def to_text(self):
        cases = list(dict.fromkeys(r["case"] for r in self.rows))
        algs = list(dict.fromkeys(r["algorithm"] for r in self.rows))
        width = max(len(a) for a in algs) + 2
        head = "".join(f"{c + ' ms':>12}{c + ' iter':>12}" for c in cases)
        lines = [f"{'algorithm':<{width}}{head}", "-" * (width + 24 * len(cases))]
        for a in algs:
            cells = ""
            for c in cases:
                r = self.row(a, c)
                it = _fmt(r["mean_iter"])
                if r["converged"] < r["replications"]:
                    it += f"*{r['replications'] - r['converged']}"
                cells += f"{_fmt(r['mean_ms'], 3):>12}{it:>12}"
            lines.append(f"{a:<{width}}{cells}")
        if any(r["converged"] < r["replications"] for r in self.rows):
            lines.append("*k: k runs did not converge and are excluded from the mean")
        return "\n".join(lines)


def _fmt(v, digits=2):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    if float(v).is_integer():
        return str(int(v))
    return f"{v:.{digits}f}"


def _summarize(runs, specs, algs, cfg):
    rows = []
    for spec in specs:
        case = case_label(spec)
        for alg in algs:
            res = [e.result for e in runs if e.case == case and e.algorithm == alg["name"]]
            ok = [r for r in res if r.converged]
            rows.append({
                "algorithm": alg["name"],
                "case": case,
                "mean_iter": float(np.mean([r.iterations for r in ok])) if ok else float("nan"),
                "mean_ms": (float(np.mean([r.total_time for r in ok])) * 1e3 if ok else float("nan"))
                if cfg.timing else 0.0,
                "converged": len(ok),
                "replications": len(res),
                "iterations": [r.iterations for r in res],
            })
    return rows


def run_experiment(cfg):
    """Run every algorithm on every problem and replication; write outputs if
    ``cfg.output_dir`` is set."""
    specs, algs = cfg.problems, cfg.algorithm_specs()
    labels = [case_label(s) for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"problem labels must be unique: {labels}")
    tasks, keys = [], []
    for spec in specs:
        for rep in range(cfg.replications):
            for alg in algs:
                tasks.append((spec, alg, cfg, rep))
                keys.append((case_label(spec), alg["name"], rep))
    # resolve every config up front so that errors surface before any run
    for spec in specs:
        prob = build_problem(spec, cfg.seed, 0)
        for alg in algs:
            algorithm_config(alg, prob, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    runs = [RunEntry(c, a, r, res) for (c, a, r), res in zip(keys, results)]
    for e in runs:
        log.info("%s %s rep%d: %s after %d iterations", e.case, e.algorithm, e.replication,
                 e.result.stop_reason, e.result.iterations)
    table = SummaryTable(_summarize(runs, specs, algs, cfg), runs)
    if cfg.output_dir:
        write_outputs(table, cfg)
    return table


def write_outputs(table, cfg):
    out = Path(cfg.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    for e in table.runs:
        path = out / "traces" / f"{e.case}__{e.algorithm}__rep{e.replication}.csv"
        with open(path, "w", newline="") as fh:
            e.result.to_csv(fh, timing=cfg.timing)
    with open(out / "summary.csv", "w", newline="") as fh:
        table.to_csv(fh)
    (out / "summary.txt").write_text(table.to_text() + "\n")
    runs = [{"case": e.case, "replication": e.replication, **e.result.summary(cfg.timing)}
            for e in table.runs]
    (out / "runs.json").write_text(json.dumps(runs, indent=1) + "\n")
    for case in dict.fromkeys(e.case for e in table.runs):
        first = [e.result for e in table.runs if e.case == case and e.replication == 0]
        emit_plot_data(first, out / f"tol_{case}.dat")


def emit_plot_data(results, path):
    """Write ``(iteration, TOL_n)`` columns, one gnuplot index block per run."""
    if not results:
        raise ValueError("no results to write")
    lines = []
    for i, res in enumerate(results):
        if i:
            lines += ["", ""]
        lines.append(f"# series {i}: {res.algorithm} ({res.stop_reason}, {res.iterations} iterations)")
        lines.append("# n tol")
        lines += [f"{r.n} {r.tol!r}" for r in res.records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_plot_data(path):
    """Parse a file written by :func:`emit_plot_data` into ``{name: (n, tol)}``."""
    series, name, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# series"):
            if name is not None:
                series[name] = np.array(rows).reshape(-1, 2).T
            name = line.split(":", 1)[1].strip().split(" (")[0]
            rows = []
        elif line and not line.startswith("#"):
            rows.append([float(t) for t in line.split()])
    if name is not None:
        series[name] = np.array(rows).reshape(-1, 2).T
    return series


def reference_solution(prob, stop_tol=1e-10, max_iter=100000):
    """Tight solve used to cache ``known_solution`` for generated instances."""
    x0, x1 = prob.initial_points()
    sched = RelaxationSchedule("half")
    cfg = SolverConfig(0.1, 0.5, sched, stop_tol=stop_tol, max_iter=max_iter, inner_tol=1e-13)
    res = solve("alg33", prob, x0, x1, cfg)
    if not res.converged:
        raise RuntimeError(f"reference solve stopped with {res.stop_reason}")
    return res.final_point
