"""Command-line driver: ``hp-robust run``.

Options may also come from a ``key = value`` config file (``--config``);
command-line flags take precedence.  Exit status is 0 on success, 1 when a
solve fails and 2 for an invalid configuration.
"""
import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptivity import AdaptiveConfig, adaptive_solve
from .analysis import fit_exponential
from .errors import InvalidInput, SolverError
from .estimator import efficiency_diagnostics
from .kernels import BACKEND
from .mesh import write_mesh_csv
from .output import emit_plot_data, write_diagnostics_csv, write_indicators_csv, write_solution_csv, write_trace_csv
from .problem import PROBLEMS, get_problem

EMIT_CHOICES = ("trace", "mesh", "indicators", "diagnostics", "solution")
SUMMARY_WINDOW = 10
FIT_WINDOW = 15


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    problem: str = "example1"
    epsilons: list = field(default_factory=lambda: [1e-4])
    adaptive: AdaptiveConfig = field(default_factory=AdaptiveConfig)
    out: Path = Path("out")
    emit: frozenset = frozenset({"trace"})
    beta: float = 1.0
    osc_degree: str = "p"
    jobs: int = 1


def eps_tag(eps):
    return format(eps, "g")


def _last(values, k):
    vals = np.asarray(values, dtype=float)[-k:]
    return vals[np.isfinite(vals)]


def _fit(rows, name):
    rows = rows[-FIT_WINDOW:]
    try:
        fit = fit_exponential([r.iteration for r in rows], [getattr(r, name) for r in rows])
    except InvalidInput:
        return None
    return {"slope": fit.slope, "r_squared": fit.r_squared, "n_points": fit.n_points}


def run_one(cfg, eps):
    """Adaptive run for a single eps; writes its files and returns a summary."""
    problem = get_problem(cfg.problem, eps)
    tag = f"{cfg.problem}_{eps_tag(eps)}"
    subdir = cfg.out / tag
    subdir.mkdir(parents=True, exist_ok=True)
    want_diag = "diagnostics" in cfg.emit and problem.has_exact
    diag_rows = []

    def on_iteration(it, sol, est):
        if "mesh" in cfg.emit:
            write_mesh_csv(sol.mesh, subdir / f"mesh_{it}.csv")
        if "indicators" in cfg.emit:
            write_indicators_csv(sol.mesh, est, subdir / f"indicators_{it}.csv")
        if "solution" in cfg.emit:
            write_solution_csv(sol, subdir / f"solution_{it}.csv")
        if want_diag:
            diag_rows.append((it, efficiency_diagnostics(sol, problem, cfg.beta, cfg.osc_degree, est=est)))

    trace = adaptive_solve(problem, cfg.adaptive, callback=on_iteration)
    trace.solutions[:-1] = [None] * (len(trace.solutions) - 1)
    if "trace" in cfg.emit:
        write_trace_csv(trace, cfg.out / f"trace_{tag}.csv")
    if want_diag:
        write_diagnostics_csv(diag_rows, cfg.out / f"diagnostics_{eps_tag(eps)}.csv")
    emit_plot_data(trace, subdir)

    last = trace.rows[-1]
    eff = _last([r.efficiency for r in trace.rows], SUMMARY_WINDOW)
    summary = {
        "problem": cfg.problem,
        "epsilon": eps,
        "iterations": last.iteration,
        "n_elements": last.n_elements,
        "n_dofs": last.n_dofs,
        "max_degree": last.max_degree,
        "eta_total": last.eta_total,
        "true_error": None if math.isnan(last.true_error) else last.true_error,
        "efficiency_min": float(eff.min()) if eff.size else None,
        "efficiency_max": float(eff.max()) if eff.size else None,
        "fit_eta": _fit(trace.rows, "eta_total"),
        "fit_true_error": _fit(trace.rows, "true_error") if problem.has_exact else None,
    }
    if diag_rows:
        summary["diagnostics_max_ratio"] = max(dg.max_finite() for _, dg in diag_rows)
    return summary


def _parse_config_file(path):
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val.strip("\"'")
    return values


def _split(val):
    if isinstance(val, (list, tuple)):
        out = []
        for v in val:
            out.extend(_split(v))
        return out
    return [s.strip() for s in str(val).split(",") if s.strip()]


def build_config(args):
    """Merge config file values and flags into a validated RunConfig."""
    raw = _parse_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if key not in ("config", "command", "func") and val is not None:
            raw[key] = val
    known = {"problem", "epsilon", "theta", "tau", "max_iter", "target", "init_elems",
             "init_degree", "p_max", "beta", "osc_degree", "out", "jobs", "emit"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        problem = raw.get("problem", "example1")
        if problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {problem!r}; choose from {sorted(PROBLEMS)}")
        eps = [float(e) for e in _split(raw.get("epsilon", "1e-4"))]
        if not eps or any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ConfigError("epsilon values must be positive")
        defaults = AdaptiveConfig()
        p_max = raw.get("p_max", defaults.p_max)
        adaptive = AdaptiveConfig(
            theta=float(raw.get("theta", defaults.theta)),
            tau=float(raw.get("tau", defaults.tau)),
            max_iterations=int(raw.get("max_iter", defaults.max_iterations)),
            target_estimate=float(raw.get("target", defaults.target_estimate)),
            initial_elements=int(raw.get("init_elems", defaults.initial_elements)),
            initial_degree=int(raw.get("init_degree", defaults.initial_degree)),
            p_max=None if str(p_max).lower() in ("none", "0") else int(p_max),
        )
        beta = float(raw.get("beta", 1.0))
        if not 0.5 < beta <= 1.0:
            raise ConfigError("beta must lie in (1/2, 1]")
        osc = str(raw.get("osc_degree", "p"))
        if osc not in ("p", "2p"):
            raise ConfigError("osc-degree must be 'p' or '2p'")
        emit = frozenset(_split(raw.get("emit", "trace")))
        bad = emit - set(EMIT_CHOICES)
        if bad:
            raise ConfigError(f"unknown emit flags {sorted(bad)}; choose from {EMIT_CHOICES}")
        jobs = int(raw.get("jobs", 1))
        if jobs < 1:
            raise ConfigError("jobs must be >= 1")
    except (ValueError, InvalidInput) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    out = Path(raw.get("out") or os.environ.get("HP_ROBUST_OUT") or "out")
    return RunConfig(problem, eps, adaptive, out, emit, beta, osc, jobs)


def run(cfg):
    """Execute all eps runs and write ``summary.json``; returns the exit code."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        if cfg.jobs > 1 and len(cfg.epsilons) > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                runs = list(pool.map(run_one, [cfg] * len(cfg.epsilons), cfg.epsilons))
        else:
            runs = [run_one(cfg, e) for e in cfg.epsilons]
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return 1
    summary = {
        "backend": BACKEND,
        "config": {
            "problem": cfg.problem,
            "theta": cfg.adaptive.theta,
            "tau": cfg.adaptive.tau,
            "max_iterations": cfg.adaptive.max_iterations,
            "target_estimate": cfg.adaptive.target_estimate,
            "initial_elements": cfg.adaptive.initial_elements,
            "initial_degree": cfg.adaptive.initial_degree,
            "beta": cfg.beta,
            "osc_degree": cfg.osc_degree,
        },
        "runs": runs,
    }
    (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2))
    for r in runs:
        true_err = "-" if r["true_error"] is None else f"{r['true_error']:.3e}"
        print(f"{r['problem']} eps={eps_tag(r['epsilon'])}: {r['iterations']} steps, "
              f"{r['n_elements']} elements, max p {r['max_degree']}, "
              f"estimate {r['eta_total']:.3e}, true error {true_err}")
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="hp-robust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run adaptive campaigns over a list of eps values")
    r.add_argument("--config", help="key = value config file")
    r.add_argument("--problem", choices=sorted(PROBLEMS))
    r.add_argument("--epsilon", help="comma-separated list, e.g. 1,1e-2,1e-4")
    r.add_argument("--theta", type=float)
    r.add_argument("--tau", type=float)
    r.add_argument("--max-iter", dest="max_iter", type=int)
    r.add_argument("--target", type=float)
    r.add_argument("--init-elems", dest="init_elems", type=int)
    r.add_argument("--init-degree", dest="init_degree", type=int)
    r.add_argument("--p-max", dest="p_max")
    r.add_argument("--beta", type=float, help="weight exponent of the oscillation term")
    r.add_argument("--osc-degree", dest="osc_degree", choices=("p", "2p"))
    r.add_argument("--out", help="output directory (default $HP_ROBUST_OUT or ./out)")
    r.add_argument("--jobs", type=int)
    r.add_argument("--emit", action="append", help=f"comma list of {', '.join(EMIT_CHOICES)}")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
