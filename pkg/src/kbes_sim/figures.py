"""Figure-reproduction grids written as long-format CSV."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .kbes import build_liouvillian
from .models import qubit, xxz
from .solvers import propagate_expm, steady_state

FIG23_GAMMA_T = np.linspace(0.0, 6.0, 201)
FIG23_LAMBDA = np.linspace(-3.0, 3.0, 121)
FIG23_F = (0.0, 1.0, 2.0)
STEADY_F = (0.0, 0.5, 1.0, 1.5, 2.0)
FIG5_N = (3, 4, 5, 6)
FIG5_GAMMA_T_MAX = 3.0
FIG5_POINTS = 6001
FIGURES = (2, 3, 5)


def fmt(x: float) -> str:
    """Shortest round-trip representation, so reruns are byte-identical."""
    return repr(float(x))


def max_workers() -> int:
    env = os.environ.get("KBES_SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def ordered_map(fn, items) -> list:
    """``map`` over a thread pool; results come back in input order."""
    items = list(items)
    workers = min(max_workers(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _qubit_value(rho: np.ndarray, fig: int) -> float:
    if fig == 2:
        return float(rho[qubit.EXCITED, qubit.EXCITED].real)
    return float(abs(rho[qubit.EXCITED, qubit.GROUND]))


def qubit_grid(fig: int, f_gamma: float, gamma_t=FIG23_GAMMA_T, lambdas=FIG23_LAMBDA,
               n: float = 0.0) -> np.ndarray:
    """Values on the ``(lambda_gamma, gamma_t)`` grid, shape ``(len(lambdas), len(gamma_t))``."""

    def column(lam):
        p = qubit.DrivenQubitParams.reduced(n, f_gamma, lam, 1.0)
        traj = propagate_expm(build_liouvillian(qubit.driven_damped_qubit(p)),
                              qubit.plus_state(), gamma_t)
        return [_qubit_value(r, fig) for r in traj.states]

    return np.array(ordered_map(column, lambdas))


def qubit_steady_grid(fig: int, f_values=STEADY_F, lambdas=FIG23_LAMBDA, n: float = 0.0) -> np.ndarray:
    """Stationary values, shape ``(len(f_values), len(lambdas))``."""

    def point(fl):
        f, lam = fl
        p = qubit.DrivenQubitParams.reduced(n, f, lam, 1.0)
        return _qubit_value(steady_state(build_liouvillian(qubit.driven_damped_qubit(p))), fig)

    pts = [(f, lam) for f in f_values for lam in lambdas]
    return np.array(ordered_map(point, pts)).reshape(len(f_values), len(lambdas))


def emit_qubit_figure(fig: int, out_dir: Path) -> list[Path]:
    paths = []
    for f in FIG23_F:
        grid = qubit_grid(fig, f)
        rows = ((t, lam, grid[i, k]) for i, lam in enumerate(FIG23_LAMBDA)
                for k, t in enumerate(FIG23_GAMMA_T))
        paths.append(_write(out_dir / f"fig{fig}_f{f:g}.csv",
                            ["gamma_t", "lambda_gamma", "value"], rows))
    sgrid = qubit_steady_grid(fig)
    rows = ((f, lam, sgrid[i, k]) for i, f in enumerate(STEADY_F)
            for k, lam in enumerate(FIG23_LAMBDA))
    paths.append(_write(out_dir / f"fig{fig}_steady.csv",
                        ["f_gamma", "lambda_gamma", "value"], rows))
    return paths


def chain_figure_data(n_qubits: int, jz: float = 0.0, points: int = FIG5_POINTS,
                      gamma_t_max: float = FIG5_GAMMA_T_MAX):
    """Per-site ``rho_11`` and ``|rho_01|`` plus the detected crossings.

    Crossing times are merged into the grid so the curves visibly meet there.
    """
    p = xxz.XXZParams.figure5(n_qubits, jz)
    sector = xxz.one_particle_sector(n_qubits, p.j, p.jz)
    t_end = gamma_t_max / p.gamma
    crossings = xxz.xxz_cross_points(p, (0.0, t_end), sector)
    t = np.union1d(np.linspace(0.0, t_end, points), [c.time for c in crossings])
    pops = np.empty((n_qubits, t.size))
    coh = np.empty((n_qubits, t.size))
    for s in range(1, n_qubits + 1):
        r = xxz.xxz_reduced_qubit(p, s, t, sector)
        pops[s - 1] = r[:, 1, 1].real
        coh[s - 1] = np.abs(r[:, 0, 1])
    return p, t, pops, coh, crossings


def emit_chain_figure(out_dir: Path, n_list=FIG5_N, jz: float = 0.0,
                      points: int = FIG5_POINTS) -> list[Path]:
    paths = []
    results = ordered_map(lambda n: chain_figure_data(n, jz, points), n_list)
    for n, (p, t, pops, coh, crossings) in zip(n_list, results):
        gt = t * p.gamma
        rows = ((gt[k], s + 1, pops[s, k], coh[s, k]) for k in range(t.size) for s in range(n))
        paths.append(_write(out_dir / f"fig5_N{n}.csv",
                            ["gamma_t", "site", "rho11", "abs_rho01"], rows))
        crows = ((c.time * p.gamma, c.time * p.j, c.spread, c.w_fidelity, c.w_label)
                 for c in crossings)
        paths.append(_write(out_dir / f"fig5_N{n}_crossings.csv",
                            ["gamma_t", "J_t", "spread", "w_fidelity", "w_state"], crows))
    return paths


def emit_figure_data(fig: int, out_dir, n_list=None, jz: float = 0.0,
                     points: int = FIG5_POINTS) -> list[Path]:
    """Write the CSV grids for one figure into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    if fig in (2, 3):
        return emit_qubit_figure(fig, out_dir)
    if fig == 5:
        return emit_chain_figure(out_dir, tuple(n_list or FIG5_N), jz, points)
    raise ValueError(f"unknown figure id {fig!r}; expected one of {FIGURES}")
