import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from kbes_sim import build_liouvillian
from kbes_sim.cli import main, run
from kbes_sim.config import load_config
from kbes_sim.errors import ConfigError
from kbes_sim.models.vtype import VTypeParams, vtype_qutrit

MINIMAL = {"model": "driven-qubit", "n": 0, "f_gamma": 1, "lambda_gamma": 0, "gamma": 1,
           "t_max": 6, "steps": 200, "initial": "plus"}


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float) if len(rows) > 1 else np.empty((0, 0))


def cplx(m):
    return [[[z.real, z.imag] for z in row] for row in np.asarray(m, dtype=complex)]


# --- config -----------------------------------------------------------------

def test_minimal_config_from_text():
    cfg = load_config(json.dumps(MINIMAL))
    assert cfg.model == "driven-qubit" and cfg.steps == 200
    assert cfg.model_times()[-1] == 6.0


def test_config_from_yaml_file(tmp_path):
    path = tmp_path / "q.yaml"
    path.write_text("model: driven-qubit\nf_gamma: 2\nt_max: 1\nsteps: 4\n")
    cfg = load_config(str(path))
    assert cfg.params["f_gamma"] == 2.0


def test_config_rejects_non_psd_coupling():
    doc = {"model": "explicit", "hamiltonian": [[0, 0], [0, 1]],
           "jump_ops": [[[0, 1], [0, 0]], [[0, 0], [1, 0]]],
           "coupling": [[1, 0], [0, -0.1]]}
    with pytest.raises(ConfigError) as info:
        load_config(doc)
    assert "positive semidefinite" in info.value.problems["model"]


def test_config_field_level_errors():
    with pytest.raises(ConfigError) as info:
        load_config({"model": "driven-qubit", "t_max": -1, "steps": 0, "bogus": 3,
                     "solver": "euler", "f_gamma": "x"})
    probs = info.value.problems
    assert {"t_max", "steps", "bogus", "solver", "f_gamma"} <= set(probs)


def test_config_parse_error():
    with pytest.raises(ConfigError) as info:
        load_config("model: [unclosed\n")
    assert "<document>" in info.value.problems


def test_explicit_matches_named_vtype():
    s01 = np.zeros((3, 3)); s01[0, 1] = 1
    s02 = np.zeros((3, 3)); s02[0, 2] = 1
    doc = {"model": "explicit", "hamiltonian": cplx(np.zeros((3, 3))),
           "jump_ops": [cplx(s01), cplx(s02)], "coupling": [[1, 0.5], [0.5, 1]]}
    a = build_liouvillian(load_config(doc).build_model()).matrix
    b = build_liouvillian(vtype_qutrit(VTypeParams(1, 1, 0.5))).matrix
    assert np.abs(a - b).max() == 0


@pytest.mark.parametrize("doc", [
    MINIMAL,
    {"model": "vtype", "gamma1": 1, "gamma2": 2, "beta_i": 0.3, "initial": 1},
    {"model": "xxz", "N": 3, "Jz": 0.5, "b_abs": 0.6, "b_phase": 0.4,
     "sweep": {"param": "J", "start": 0, "stop": 1, "num": 3}},
    {"model": "explicit", "hamiltonian": [[0, [0, -1]], [[0, 1], 0]],
     "jump_ops": [[[0, 1], [0, 0]]], "initial": [[0.5, 0.5], [0.5, 0.5]]},
])
def test_round_trip(doc):
    cfg = load_config(doc)
    again = load_config(cfg.dumps())
    assert again.to_dict() == cfg.to_dict()
    a = build_liouvillian(cfg.build_model()).matrix
    b = build_liouvillian(again.build_model()).matrix
    assert np.abs(a - b).max() == 0
    assert np.abs(cfg.initial_state() - again.initial_state()).max() == 0


# --- commands ---------------------------------------------------------------

def test_evolve_minimal(tmp_path):
    cfg = load_config(MINIMAL)
    out = tmp_path / "ev.csv"
    assert run(cfg, "evolve", out) == 0
    header, data = read_csv(out)
    assert header[0] == "t" and header[-2:] == ["trace_dev", "min_eig"]
    assert "re_rho_0_1" in header and "im_rho_1_0" in header
    assert data.shape[0] == 201
    tr = data[:, header.index("re_rho_0_0")] + data[:, header.index("re_rho_1_1")]
    assert np.abs(tr - 1).max() < 1e-9


def test_evolve_is_deterministic(tmp_path):
    argv = ["evolve", "--model", "vtype", "--beta-i", "0.5", "--initial", "random",
            "--seed", "3", "--t-max", "2", "--steps", "20"]
    assert main(argv + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.parametrize("solver", ["spectral", "rk4"])
def test_solvers_agree(tmp_path, solver):
    base = ["evolve", "--model", "driven-qubit", "--f-gamma", "1.5", "--lambda-gamma", "0.5",
            "--t-max", "2", "--steps", "10"]
    main(base + ["--out", str(tmp_path / "e.csv")])
    assert main(base + ["--solver", solver, "--out", str(tmp_path / "s.csv")]) == 0
    _, a = read_csv(tmp_path / "e.csv")
    _, b = read_csv(tmp_path / "s.csv")
    assert np.abs(a[:, 1:-2] - b[:, 1:-2]).max() < 1e-9


def test_steady_command(tmp_path, capsys):
    out = tmp_path / "st.csv"
    assert main(["steady", "--model", "driven-qubit", "--f-gamma", "1", "--out", str(out)]) == 0
    header, data = read_csv(out)
    row = dict(zip(header, data[0]))
    assert abs(row["re_rho_0_0"] - 4 / 9) < 1e-9
    assert abs(row["im_rho_0_1"] + 2 / 9) < 1e-9
    assert abs(row["im_rho_1_0"] - 2 / 9) < 1e-9
    assert abs(row["re_rho_1_1"] - 5 / 9) < 1e-9


def test_spectrum_command(tmp_path):
    out = tmp_path / "sp.csv"
    assert main(["spectrum", "--model", "vtype", "--beta-i", "0.3", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["re_lambda", "im_lambda"]
    assert data.shape == (9, 2)
    assert np.all(np.diff(data[:, 0]) <= 0)


def test_kraus_command(tmp_path):
    out = tmp_path / "kr.csv"
    assert main(["kraus", "--model", "driven-qubit", "--f-gamma", "1", "--t-max", "1",
                 "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header[:2] == ["kraus", "weight"]
    ks = [(r[2::2] + 1j * r[3::2]).reshape(2, 2) for r in data]
    total = sum(k.conj().T @ k for k in ks)
    assert np.abs(total - np.eye(2)).max() < 1e-8


def test_sweep_command(tmp_path, monkeypatch):
    monkeypatch.setenv("KBES_SIM_THREADS", "3")
    out = tmp_path / "sw.csv"
    argv = ["sweep", "--model", "driven-qubit", "--f-gamma", "1", "--sweep-param", "lambda_gamma",
            "--sweep-start", "-1", "--sweep-stop", "1", "--sweep-num", "5", "--out", str(out)]
    assert main(argv) == 0
    header, data = read_csv(out)
    assert header[0] == "lambda_gamma"
    assert np.abs(data[:, 0] - np.linspace(-1, 1, 5)).max() == 0
    pop = data[:, header.index("re_rho_0_0")]
    assert np.abs(pop - pop[::-1]).max() < 1e-12
    monkeypatch.setenv("KBES_SIM_THREADS", "1")
    serial = tmp_path / "sw1.csv"
    assert main(argv[:-1] + [str(serial)]) == 0
    assert out.read_bytes() == serial.read_bytes()


def test_site_output(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["evolve", "--model", "xxz", "--N", "3", "--site", "2", "--t-max", "1",
                 "--steps", "5", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert len(header) == 1 + 8 + 2


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o.csv")
    assert main(["evolve", "--model", "nope", "--out", out]) == 2
    assert main(["evolve", "--model", "driven-qubit", "--t-max", "0", "--out", out]) == 2
    assert "t_max" in capsys.readouterr().err
    assert main(["steady", "--model", "vtype", "--beta-i", "1", "--out", out]) == 3
    assert "steady manifold" in capsys.readouterr().err
    assert main(["evolve", "--model", "xxz", "--N", "8", "--out", out]) == 2
    assert main(["figures", "--fig", "4", "--out", str(tmp_path)]) == 2


def test_bad_initial_state_fails_diagnostics(tmp_path):
    cfg = load_config({"model": "driven-qubit", "initial": [[1, 0], [0, 1]]})
    with pytest.raises(ConfigError):
        run(cfg, "evolve", tmp_path / "o.csv")
    assert main(["evolve", "--model", "driven-qubit", "--initial", "5",
                 "--out", str(tmp_path / "o.csv")]) == 2


def test_figure5_n4(tmp_path):
    assert main(["figures", "--fig", "5", "--N", "4", "--steps", "600", "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "fig5_N4.csv")
    assert header == ["gamma_t", "site", "rho11", "abs_rho01"]
    with open(tmp_path / "fig5_N4_crossings.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][-1] == "w_state"
    cross = np.array([r[:4] for r in rows[1:]], dtype=float)
    assert cross.shape[0] > 100
    assert cross[:, 3].min() > 1 - 1e-9
    for gt in cross[:20, 0]:
        rows = data[data[:, 0] == gt]
        assert rows.shape[0] == 4
        assert np.ptp(rows[:, 2]) < 1e-9


def test_console_script(tmp_path):
    out = tmp_path / "ev.csv"
    res = subprocess.run(
        [sys.executable, "-m", "kbes_sim.cli", "evolve", "--model", "driven-qubit",
         "--steps", "3", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert len(out.read_text().splitlines()) == 5


def test_figure2_terminal_row(tmp_path):
    from kbes_sim import build_liouvillian, eig_general, vectorize
    from kbes_sim.models.qubit import DrivenQubitParams, driven_damped_qubit, plus_state

    assert main(["figures", "--fig", "2", "--out", str(tmp_path)]) == 0
    _, st = read_csv(tmp_path / "fig2_steady.csv")
    row = st[(st[:, 0] == 1.0) & (st[:, 1] == 0.0)]
    assert abs(row[0, 2] - 4 / 9) < 1e-10

    _, f1 = read_csv(tmp_path / "fig2_f1.csv")
    terminal = f1[(f1[:, 0] == 6.0) & (f1[:, 1] == 0.0), 2][0]
    # at gamma t = 6 the transient has not fully decayed; bound it from the spectrum
    l = build_liouvillian(driven_damped_qubit(DrivenQubitParams.reduced(0, 1, 0)))
    dec = eig_general(l.matrix)
    c = np.linalg.solve(dec.right_eigenvectors, vectorize(plus_state()))
    moving = np.abs(dec.eigenvalues) > 1e-12
    bound = np.sum(np.abs(c[moving]) * np.exp(6.0 * dec.eigenvalues[moving].real))
    assert 0 < abs(terminal - 4 / 9) <= bound
