"""``kbes-sim`` command-line front end.

Exit status: 0 on success, 2 for configuration or validation errors, 3 for
numerical failures (including any diagnostic above ``DIAGNOSTIC_LIMIT``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import figures
from .config import RunConfig, load_config
from .errors import ConfigError, ModelValidationError, NumericalError
from .kbes import build_liouvillian
from .models import xxz
from .solvers import (
    Trajectory,
    channel_at,
    default_rk4_step,
    integrate_rk4,
    liouvillian_spectrum,
    partial_trace,
    propagate_expm,
    propagate_spectral,
    steady_state,
)

log = logging.getLogger("kbes_sim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DIAGNOSTIC_LIMIT = 1e-6
COMMANDS = ("evolve", "steady", "spectrum", "kraus", "sweep", "figures")

fmt = figures.fmt


class DiagnosticFailure(NumericalError):
    pass


# --- computations ------------------------------------------------------------

def _reduce(cfg: RunConfig, rho: np.ndarray) -> np.ndarray:
    if cfg.site is None:
        return rho
    n = int(cfg.params["N"])
    return partial_trace(rho, [2] * n, [cfg.site - 1])


def trajectory_for(cfg: RunConfig) -> Trajectory:
    """Run the configured solver and return states on the output grid.

    With ``site`` set, the states are the single-site reduced matrices.
    """
    t = cfg.model_times()
    if cfg.solver == "analytic-sector":
        a, b = cfg.sector_amplitudes()
        base = cfg.xxz_params()
        p = xxz.XXZParams(base.n_qubits, base.j, base.jz, base.gamma, a=a, b=b)
        if cfg.site is not None:
            return Trajectory.from_states(t, xxz.xxz_reduced_qubit(p, cfg.site, t))
        sector = xxz.one_particle_sector(p.n_qubits, p.j, p.jz)
        return Trajectory.from_states(
            t, [xxz.xxz_analytic_evolve(p, tk, sector).to_dense() for tk in t]
        )

    model = cfg.build_model()
    rho0 = cfg.initial_state()
    if cfg.solver == "rk4":
        dt = default_rk4_step(build_liouvillian(model))
        states = [np.asarray(rho0, dtype=np.complex128)]
        for dt_k in np.diff(t):
            states.append(integrate_rk4(model, states[-1], dt_k, dt).states[-1])
        traj = Trajectory.from_states(t, states)
    elif cfg.solver == "spectral":
        traj = propagate_spectral(build_liouvillian(model), rho0, t)
    else:
        traj = propagate_expm(build_liouvillian(model), rho0, t)
    if not traj.valid_initial:
        raise ConfigError({"initial": "initial state is not a density matrix"})
    _check_diagnostics(traj)
    if cfg.site is None:
        return traj
    return Trajectory.from_states(t, [_reduce(cfg, r) for r in traj.states])


def _check_diagnostics(traj: Trajectory) -> None:
    worst = traj.worst_violation()
    if worst > DIAGNOSTIC_LIMIT:
        raise DiagnosticFailure(
            f"state diagnostics exceed {DIAGNOSTIC_LIMIT:g} (worst violation {worst:.3g})"
        )


def steady_for(cfg: RunConfig) -> np.ndarray:
    return _reduce(cfg, steady_state(build_liouvillian(cfg.build_model())))


# --- CSV writers -----------------------------------------------------------

def _elements(cfg: RunConfig, d: int) -> list[tuple[int, int]]:
    if cfg.outputs is not None and cfg.site is None:
        return list(cfg.outputs)
    return [(m, n) for m in range(d) for n in range(d)]


def _state_header(elems) -> list[str]:
    cols = []
    for m, n in elems:
        cols += [f"re_rho_{m}_{n}", f"im_rho_{m}_{n}"]
    return cols


def _state_cells(rho: np.ndarray, elems) -> list[str]:
    cells = []
    for m, n in elems:
        cells += [fmt(rho[m, n].real), fmt(rho[m, n].imag)]
    return cells


def _diag_cells(rho: np.ndarray) -> list[str]:
    tr = abs(np.trace(rho) - 1.0)
    herm = (rho + rho.conj().T) / 2
    return [fmt(tr), fmt(np.linalg.eigvalsh(herm)[0])]


def _open_csv(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_trajectory(cfg: RunConfig, traj: Trajectory, path: Path) -> None:
    elems = _elements(cfg, traj.dim)
    fh, w = _open_csv(path)
    with fh:
        w.writerow(["t"] + _state_header(elems) + ["trace_dev", "min_eig"])
        for tau, rho, tr, me in zip(cfg.dimensionless_times(), traj.states,
                                    traj.trace_deviation, traj.min_eigenvalue):
            w.writerow([fmt(tau)] + _state_cells(rho, elems) + [fmt(tr), fmt(me)])


def write_states(cfg: RunConfig, lead: list[str], rows, path: Path) -> None:
    """``rows`` yields ``(lead values, rho)`` pairs."""
    rows = list(rows)
    elems = _elements(cfg, rows[0][1].shape[0])
    fh, w = _open_csv(path)
    with fh:
        w.writerow(lead + _state_header(elems) + ["trace_dev", "min_eig"])
        for vals, rho in rows:
            w.writerow([fmt(v) for v in vals] + _state_cells(rho, elems) + _diag_cells(rho))


# --- commands ----------------------------------------------------------------

def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    write_trajectory(cfg, trajectory_for(cfg), out)
    return EXIT_OK


def cmd_steady(cfg: RunConfig, out: Path) -> int:
    rho = steady_for(cfg)
    write_states(cfg, [], [([], rho)], out)
    with np.printoptions(precision=12, suppress=True):
        print(rho)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    ev = liouvillian_spectrum(build_liouvillian(cfg.build_model())).eigenvalues
    order = np.lexsort((-ev.imag, -ev.real))
    fh, w = _open_csv(out)
    with fh:
        w.writerow(["re_lambda", "im_lambda"])
        for z in ev[order]:
            w.writerow([fmt(z.real), fmt(z.imag)])
    return EXIT_OK


def cmd_kraus(cfg: RunConfig, out: Path) -> int:
    d = cfg.dim
    ch = channel_at(build_liouvillian(cfg.build_model()), cfg.t_max / cfg.time_scale)
    if ch.completeness_defect > DIAGNOSTIC_LIMIT:
        raise DiagnosticFailure(
            f"Kraus completeness defect {ch.completeness_defect:.3g} exceeds {DIAGNOSTIC_LIMIT:g}"
        )
    elems = [(m, n) for m in range(d) for n in range(d)]
    fh, w = _open_csv(out)
    with fh:
        w.writerow(["kraus", "weight"] + _state_header(elems))
        for i, (k, wt) in enumerate(zip(ch.kraus_ops, ch.weights)):
            w.writerow([str(i), fmt(wt)] + _state_cells(k, elems))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    if cfg.sweep is None:
        raise ConfigError({"sweep": "sweep command needs a sweep block or --sweep-* flags"})
    s = cfg.sweep

    def point(v):
        params = dict(cfg.params)
        params[s.param] = float(v)
        sub = RunConfig(**{**cfg.__dict__, "params": params, "sweep": None})
        return steady_for(sub)

    values = s.values()
    results = figures.ordered_map(point, values)
    write_states(cfg, [s.param], zip(([v] for v in values), results), out)
    return EXIT_OK


def cmd_figures(args) -> int:
    if args.fig not in figures.FIGURES:
        raise ConfigError({"fig": f"unknown figure id {args.fig}; expected one of {figures.FIGURES}"})
    n_list = [args.N] if args.N is not None else None
    points = args.steps + 1 if args.steps else figures.FIG5_POINTS
    paths = figures.emit_figure_data(args.fig, args.out, n_list=n_list,
                                     jz=args.Jz or 0.0, points=points)
    for p in paths:
        print(p)
    return EXIT_OK


# --- argument handling -------------------------------------------------------

FLAG_KEYS = {
    "model": str, "n": float, "f_gamma": float, "lambda_gamma": float, "gamma": float,
    "gamma1": float, "gamma2": float, "beta_i": float, "N": int, "J": float, "Jz": float,
    "a": float, "b_abs": float, "b_phase": float, "t_max": float, "steps": int,
    "solver": str, "initial": str, "site": int, "seed": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbes-sim", description="Lindblad dynamics by Liouvillian vectorization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
        p.add_argument("--out", type=Path, required=True,
                       help="output CSV (a directory for figures)")
        for key, typ in FLAG_KEYS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
        if name == "sweep":
            p.add_argument("--sweep-param")
            p.add_argument("--sweep-start", type=float)
            p.add_argument("--sweep-stop", type=float)
            p.add_argument("--sweep-num", type=int)
        if name == "figures":
            p.add_argument("--fig", type=int, required=True, help="figure id: 2, 3 or 5")
    return parser


def _overrides(args) -> dict:
    over = {k: getattr(args, k) for k in FLAG_KEYS}
    if isinstance(over.get("initial"), str) and over["initial"].isdigit():
        over["initial"] = int(over["initial"])
    if getattr(args, "sweep_param", None) is not None:
        over["sweep"] = {"param": args.sweep_param, "start": args.sweep_start,
                         "stop": args.sweep_stop, "num": args.sweep_num}
    return over


def run(cfg: RunConfig, command: str, out) -> int:
    """Execute one command for a validated configuration; returns the exit status."""
    handlers = {"evolve": cmd_evolve, "steady": cmd_steady, "spectrum": cmd_spectrum,
                "kraus": cmd_kraus, "sweep": cmd_sweep}
    if command not in handlers:
        raise ValueError(f"unknown command {command!r}")
    return handlers[command](cfg, Path(out))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figures":
            return cmd_figures(args)
        cfg = load_config(args.config, _overrides(args))
        return run(cfg, args.command, args.out)
    except ConfigError as exc:
        for field, msg in exc.problems.items():
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
