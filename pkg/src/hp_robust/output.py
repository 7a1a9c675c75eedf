"""CSV/JSON writers for traces, indicators, diagnostics and plot data.

All numbers are written with 17 significant digits so that files read back
reproduce the in-memory values exactly.
"""
import csv
import math

import numpy as np

from .adaptivity import TraceRow
from .mesh import write_mesh_csv

TRACE_COLUMNS = ["iter", "n_elem", "n_dof", "max_p", "eta_total", "true_error", "efficiency"]
SAMPLES_PER_ELEMENT = 20


def fmt(v):
    return "%.17g" % v


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in trace.rows:
            w.writerow([r.iteration, r.n_elements, r.n_dofs, r.max_degree,
                        fmt(r.eta_total), fmt(r.true_error), fmt(r.efficiency)])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        return [
            TraceRow(int(r["iter"]), int(r["n_elem"]), int(r["n_dof"]), int(r["max_p"]),
                     float(r["eta_total"]), float(r["true_error"]), float(r["efficiency"]))
            for r in csv.DictReader(fh)
        ]


def write_indicators_csv(mesh, est, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "x_left", "x_right", "p", "eta_sq", "alpha", "residual_part",
                    "oscillation_part", "jump_left", "jump_right"])
        for j, ind in enumerate(est.indicators):
            xl, xr, p = mesh.element(j)
            w.writerow([j, fmt(xl), fmt(xr), p, fmt(ind.eta_sq), fmt(ind.alpha),
                        fmt(ind.residual_part), fmt(ind.oscillation_part),
                        fmt(ind.jump_left), fmt(ind.jump_right)])


def write_diagnostics_csv(rows, path):
    """``rows``: iterable of (iteration, EfficiencyDiagnostics)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "kind", "index", "R", "rho"])
        for it, dg in rows:
            for i, (R, rho) in enumerate(zip(dg.R, dg.rho_vol)):
                w.writerow([it, "element", i, fmt(R), fmt(rho)])
            for i in range(1, dg.rho_jump.size - 1):
                w.writerow([it, "node", i, "nan", fmt(dg.rho_jump[i])])


def solution_samples(solution, per_element=SAMPLES_PER_ELEMENT):
    """(x, u_hp(x)) at equispaced points of every element, endpoints included."""
    xi = np.linspace(-1.0, 1.0, per_element)
    xs, us = [], []
    for j in range(solution.mesh.n_elements):
        xl, xr, _ = solution.mesh.element(j)
        x = 0.5 * (xl + xr) + 0.5 * (xr - xl) * xi
        x[0], x[-1] = xl, xr  # exact breakpoints
        xs.append(x)
        us.append(solution.element_values(j, xi))
    return np.concatenate(xs), np.concatenate(us)


def write_solution_csv(solution, path):
    x, u = solution_samples(solution)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        w.writerows([fmt(a), fmt(b)] for a, b in zip(x, u))


def emit_plot_data(trace, outdir):
    """Semilog series, final hp-mesh bars and final solution samples.

    Returns the paths written.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    series = outdir / "series.csv"
    with open(series, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "n_dof", "eta_total", "true_error"])
        for r in trace.rows:
            w.writerow([r.iteration, r.n_dofs, fmt(r.eta_total), fmt(r.true_error)])
    bars = outdir / "hpmesh.csv"
    write_mesh_csv(trace.final_mesh, bars)
    paths = [series, bars]
    if trace.solutions:
        sol_path = outdir / "solution.csv"
        write_solution_csv(trace.solutions[-1], sol_path)
        paths.append(sol_path)
    return paths


def count_sign_changes(values, rel_zero=1e-12):
    """Sign changes along a sequence, skipping (near-)zero entries."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0
    v = v[np.abs(v) > rel_zero * max(np.max(np.abs(v)), math.ulp(0.0))]
    return int(np.count_nonzero(np.diff(np.sign(v))))
