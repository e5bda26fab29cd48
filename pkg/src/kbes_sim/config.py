"""Run configuration: parsing, validation and model construction.

A configuration is one flat mapping written in YAML or JSON::

    model: driven-qubit
    n: 0
    f_gamma: 1
    lambda_gamma: 0
    gamma: 1
    t_max: 6
    steps: 200
    initial: plus

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists, so ``[[0, 1], [1, 0]]`` and ``[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]``
describe the same real matrix. ``t_max`` is dimensionless: it is measured in
units of the model's reference rate (``gamma`` for the qubit and the chain,
``gamma1`` for the V-type atom, 1 for explicit models).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError, ModelValidationError
from .kbes import LindbladModel
from .models import qubit, vtype, xxz
from .rand import rand_density_matrix

SOLVERS = ("expm", "spectral", "rk4", "analytic-sector")

MODEL_PARAMS: dict[str, dict[str, Any]] = {
    "driven-qubit": {"n": 0.0, "f_gamma": 0.0, "lambda_gamma": 0.0, "gamma": 1.0},
    "vtype": {"gamma1": 1.0, "gamma2": None, "beta_i": 0.0},
    "xxz": {"N": 4, "J": 2.0, "Jz": 0.0, "gamma": 1 / 220, "a": None, "b_abs": None,
            "b_phase": 0.0},
    "explicit": {},
}
MATRIX_KEYS = ("hamiltonian", "jump_ops", "coupling")
RUN_KEYS = ("model", "initial", "t_max", "steps", "solver", "outputs", "site", "seed",
            "sweep", "label")
ALL_KEYS = set(RUN_KEYS) | set(MATRIX_KEYS) | {k for p in MODEL_PARAMS.values() for k in p}
PRESETS = ("plus", "excited", "ground", "random")


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    num: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class RunConfig:
    model: str
    params: dict[str, float] = field(default_factory=dict)
    matrices: dict[str, Any] | None = None
    initial: Any = "plus"
    t_max: float = 1.0
    steps: int = 100
    solver: str = "expm"
    outputs: list[tuple[int, int]] | None = None
    site: int | None = None
    seed: int = 0
    sweep: SweepSpec | None = None
    label: str = ""

    # -- derived objects ---------------------------------------------------

    def qubit_params(self) -> qubit.DrivenQubitParams:
        p = self.params
        return qubit.DrivenQubitParams.reduced(p["n"], p["f_gamma"], p["lambda_gamma"], p["gamma"])

    def vtype_params(self) -> vtype.VTypeParams:
        p = self.params
        return vtype.VTypeParams(p["gamma1"], p["gamma2"], p["beta_i"])

    def xxz_params(self) -> xxz.XXZParams:
        p = self.params
        b = p["b_abs"] * complex(math.cos(p["b_phase"]), math.sin(p["b_phase"]))
        return xxz.XXZParams(int(p["N"]), p["J"], p["Jz"], p["gamma"], a=p["a"], b=b)

    def build_model(self) -> LindbladModel:
        if self.model == "driven-qubit":
            return qubit.driven_damped_qubit(self.qubit_params())
        if self.model == "vtype":
            return vtype.vtype_qutrit(self.vtype_params())
        if self.model == "xxz":
            return xxz.xxz_chain(self.xxz_params())
        m = self.matrices
        return LindbladModel(m["hamiltonian"], tuple(m["jump_ops"]), m["coupling"],
                             label=self.label or "explicit")

    @property
    def dim(self) -> int:
        if self.model == "driven-qubit":
            return 2
        if self.model == "vtype":
            return 3
        if self.model == "xxz":
            return 2 ** int(self.params["N"])
        return np.asarray(self.matrices["hamiltonian"]).shape[0]

    @property
    def time_scale(self) -> float:
        """Rate that converts dimensionless times to model times."""
        if self.model in ("driven-qubit", "xxz"):
            return float(self.params["gamma"])
        if self.model == "vtype":
            return float(self.params["gamma1"])
        return 1.0

    def dimensionless_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)

    def model_times(self) -> np.ndarray:
        return self.dimensionless_times() / self.time_scale

    def sector_amplitudes(self) -> tuple[float, complex]:
        """``(a, b)`` of the chain's initial state for the analytic path."""
        if self.model != "xxz":
            raise ConfigError({"solver": "analytic-sector requires model xxz"})
        p = self.xxz_params()
        presets = {"plus": (p.a, p.b), "ground": (1.0, 0.0), "excited": (0.0, 1.0)}
        if isinstance(self.initial, str) and self.initial in presets:
            return presets[self.initial]
        raise ConfigError({
            "initial": "analytic-sector supports only the presets plus, ground, excited",
        })

    def initial_state(self) -> np.ndarray:
        d = self.dim
        init = self.initial
        if isinstance(init, np.ndarray):
            return init.copy()
        if isinstance(init, int):
            rho = np.zeros((d, d), dtype=np.complex128)
            rho[init, init] = 1.0
            return rho
        if init == "random":
            return rand_density_matrix(d, self.seed)
        if self.model == "driven-qubit":
            e, g = qubit.EXCITED, qubit.GROUND
            if init == "plus":
                return qubit.plus_state()
            k = e if init == "excited" else g
            return _projector(d, k)
        if self.model == "xxz":
            a, b = self.sector_amplitudes()
            p = self.xxz_params()
            return xxz.initial_state(xxz.XXZParams(p.n_qubits, p.j, p.jz, p.gamma, a=a, b=b))
        # vtype and explicit: index 0 is the ground level, 1 the first excited one
        if init == "plus":
            psi = np.zeros(d, dtype=np.complex128)
            psi[[0, 1]] = 1 / math.sqrt(2)
            return np.outer(psi, psi.conj())
        return _projector(d, 1 if init == "excited" else 0)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"model": self.model}
        out.update({k: _plain(v) for k, v in self.params.items()})
        if self.matrices is not None:
            out["hamiltonian"] = _encode_matrix(self.matrices["hamiltonian"])
            out["jump_ops"] = [_encode_matrix(m) for m in self.matrices["jump_ops"]]
            out["coupling"] = _encode_matrix(self.matrices["coupling"])
        out["initial"] = (_encode_matrix(self.initial) if isinstance(self.initial, np.ndarray)
                          else self.initial)
        out.update(t_max=self.t_max, steps=self.steps, solver=self.solver, seed=self.seed)
        if self.outputs is not None:
            out["outputs"] = [list(p) for p in self.outputs]
        if self.site is not None:
            out["site"] = self.site
        if self.sweep is not None:
            s = self.sweep
            out["sweep"] = {"param": s.param, "start": s.start, "stop": s.stop, "num": s.num}
        if self.label:
            out["label"] = self.label
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _projector(d: int, k: int) -> np.ndarray:
    rho = np.zeros((d, d), dtype=np.complex128)
    rho[k, k] = 1.0
    return rho


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _encode_matrix(m) -> list:
    a = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _parse_scalar(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ValueError(f"{where}: expected a number, got a boolean")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(x[0], x[1])
    raise ValueError(f"{where}: expected a number or an [re, im] pair, got {x!r}")


def parse_matrix(obj, where: str = "matrix") -> np.ndarray:
    """Row-major nested list with number or ``[re, im]`` entries."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValueError(f"{where}: expected a non-empty list of rows")
    rows = [[_parse_scalar(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
            for i, r in enumerate(obj)]
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{where}: rows have different lengths")
    m = np.array(rows, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{where}: non-finite entry")
    return m


def _read_document(source) -> dict:
    if isinstance(source, dict):
        return copy.deepcopy(source)
    text = source
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and not source.lstrip().startswith("{")
        and Path(source).is_file()
    ):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError({"<file>": str(exc)}) from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError({"<document>": f"parse error: {exc}"}) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError({"<document>": "top level must be a mapping"})
    return doc


def _number(doc: dict, key: str, problems: dict, default=None, integer: bool = False):
    v = doc.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        problems[key] = f"expected a number, got {v!r}"
        return None
    if integer and int(v) != v:
        problems[key] = f"expected an integer, got {v!r}"
        return None
    if not math.isfinite(v):
        problems[key] = "must be finite"
        return None
    return int(v) if integer else float(v)


def load_config(source, overrides: dict | None = None) -> RunConfig:
    """Parse and fully validate a configuration.

    ``source`` is a file path, inline YAML/JSON text, or an already parsed
    mapping. ``overrides`` (e.g. from command-line flags) replace document
    keys; ``None`` values are ignored. Raises :class:`ConfigError` with one
    message per offending field.
    """
    doc = _read_document(source) if source is not None else {}
    for k, v in (overrides or {}).items():
        if v is not None:
            doc[k] = v
    problems: dict[str, str] = {}

    unknown = sorted(set(doc) - ALL_KEYS)
    for k in unknown:
        problems[k] = "unknown key"

    model = doc.get("model")
    if model not in MODEL_PARAMS:
        problems["model"] = f"must be one of {sorted(MODEL_PARAMS)}, got {model!r}"
        raise ConfigError(problems)

    params: dict[str, float] = {}
    for key, default in MODEL_PARAMS[model].items():
        val = _number(doc, key, problems, default, integer=(key == "N"))
        if val is not None:
            params[key] = val
    for key in set(doc) & (ALL_KEYS - set(MODEL_PARAMS[model]) - set(RUN_KEYS)):
        if key not in MATRIX_KEYS or model != "explicit":
            problems.setdefault(key, f"not a parameter of model {model!r}")

    if model == "vtype" and "gamma1" in params and params.get("gamma2") is None:
        params["gamma2"] = params["gamma1"]
    if model == "xxz":
        a, b_abs = params.get("a"), params.get("b_abs")
        if a is None and b_abs is None:
            a = b_abs = 1 / math.sqrt(2)
        elif a is None:
            a = math.sqrt(max(0.0, 1 - b_abs**2))
        elif b_abs is None:
            b_abs = math.sqrt(max(0.0, 1 - a**2))
        params["a"], params["b_abs"] = a, b_abs

    matrices = None
    if model == "explicit":
        matrices = {}
        try:
            matrices["hamiltonian"] = parse_matrix(doc.get("hamiltonian"), "hamiltonian")
        except ValueError as exc:
            problems["hamiltonian"] = str(exc)
        ops = doc.get("jump_ops", [])
        if not isinstance(ops, list):
            problems["jump_ops"] = "expected a list of matrices"
            ops = []
        matrices["jump_ops"] = []
        for i, op in enumerate(ops):
            try:
                matrices["jump_ops"].append(parse_matrix(op, f"jump_ops[{i}]"))
            except ValueError as exc:
                problems[f"jump_ops[{i}]"] = str(exc)
        if "coupling" in doc:
            try:
                matrices["coupling"] = parse_matrix(doc["coupling"], "coupling")
            except ValueError as exc:
                problems["coupling"] = str(exc)
        else:
            matrices["coupling"] = np.eye(len(matrices["jump_ops"]), dtype=np.complex128)

    t_max = _number(doc, "t_max", problems, 1.0)
    if t_max is not None and t_max <= 0:
        problems["t_max"] = "must be > 0"
    steps = _number(doc, "steps", problems, 100, integer=True)
    if steps is not None and steps < 1:
        problems["steps"] = "must be >= 1"
    seed = _number(doc, "seed", problems, 0, integer=True)

    solver = doc.get("solver", "expm")
    if solver not in SOLVERS:
        problems["solver"] = f"must be one of {list(SOLVERS)}, got {solver!r}"

    initial = doc.get("initial", "plus")
    if isinstance(initial, list):
        try:
            initial = parse_matrix(initial, "initial")
        except ValueError as exc:
            problems["initial"] = str(exc)
    elif isinstance(initial, bool) or not (
        isinstance(initial, int) or initial in PRESETS
    ):
        if isinstance(initial, str) and initial.isdigit():
            initial = int(initial)
        else:
            problems["initial"] = f"must be one of {list(PRESETS)}, a basis index or a matrix"

    outputs = doc.get("outputs")
    if outputs in ("all", None):
        outputs = None
    else:
        try:
            outputs = [(int(m), int(n)) for m, n in outputs]
        except (TypeError, ValueError):
            problems["outputs"] = "expected 'all' or a list of [m, n] element indices"
            outputs = None

    site = _number(doc, "site", problems, None, integer=True)

    sweep = None
    if doc.get("sweep") is not None:
        s = doc["sweep"]
        if not isinstance(s, dict):
            problems["sweep"] = "expected a mapping with param, start, stop, num"
        else:
            sp: dict[str, str] = {}
            start = _number(s, "start", sp)
            stop = _number(s, "stop", sp)
            num = _number(s, "num", sp, integer=True)
            param = s.get("param")
            if param not in MODEL_PARAMS[model] or param == "N":
                sp["param"] = f"must be a numeric parameter of model {model!r}"
            if num is not None and num < 1:
                sp["num"] = "must be >= 1"
            for k in ("start", "stop", "num"):
                if s.get(k) is None:
                    sp.setdefault(k, "required")
            for k, v in sp.items():
                problems[f"sweep.{k}"] = v
            if not sp:
                sweep = SweepSpec(param, start, stop, num)

    if problems:
        raise ConfigError(problems)

    cfg = RunConfig(
        model=model, params=params, matrices=matrices, initial=initial, t_max=t_max,
        steps=steps, solver=solver, outputs=outputs, site=site, seed=seed, sweep=sweep,
        label=str(doc.get("label", "")),
    )
    _validate_physics(cfg)
    return cfg


def _validate_physics(cfg: RunConfig) -> None:
    problems: dict[str, str] = {}
    try:
        if cfg.model == "xxz":
            p = cfg.xxz_params()
            if cfg.solver != "analytic-sector" and p.n_qubits > xxz.MAX_FULL_QUBITS:
                problems["N"] = (f"full Liouvillian solvers support N <= {xxz.MAX_FULL_QUBITS}; "
                                 "use solver analytic-sector")
        elif cfg.model == "driven-qubit":
            cfg.qubit_params()
        elif cfg.model == "vtype":
            cfg.vtype_params()
        if cfg.model == "explicit":
            cfg.build_model()
    except ModelValidationError as exc:
        problems["model"] = str(exc)
    if cfg.solver == "analytic-sector":
        try:
            cfg.sector_amplitudes()
        except ConfigError as exc:
            problems.update(exc.problems)
    d = cfg.dim if not problems else None
    if d is not None:
        if isinstance(cfg.initial, np.ndarray) and cfg.initial.shape != (d, d):
            problems["initial"] = f"matrix must be {d}x{d}"
        if isinstance(cfg.initial, int) and not 0 <= cfg.initial < d:
            problems["initial"] = f"basis index must be in 0..{d - 1}"
        for m, n in cfg.outputs or ():
            if not (0 <= m < d and 0 <= n < d):
                problems["outputs"] = f"element ({m}, {n}) out of range for dimension {d}"
        if cfg.site is not None:
            if cfg.model != "xxz":
                problems["site"] = "only meaningful for the xxz model"
            elif not 1 <= cfg.site <= int(cfg.params["N"]):
                problems["site"] = f"must be in 1..{int(cfg.params['N'])}"
    if problems:
        raise ConfigError(problems)
