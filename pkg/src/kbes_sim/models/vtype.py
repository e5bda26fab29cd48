"""V-type three-level atom with cross damping between its two excited levels.

Basis is ground first: ``(|0>, |1>, |2>)`` with ``|1>, |2>`` excited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..errors import ModelValidationError
from ..kbes import LindbladModel
from ..numkernel import ComplexMatrix, as_square


def transition(m: int, n: int, d: int = 3) -> ComplexMatrix:
    """``|m><n|``."""
    s = np.zeros((d, d), dtype=np.complex128)
    s[m, n] = 1.0
    return s


@dataclass(frozen=True)
class VTypeParams:
    gamma1: float
    gamma2: float
    beta_i: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma1) and math.isfinite(self.gamma2)):
            raise ModelValidationError("emission rates must be finite")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ModelValidationError("emission rates gamma1, gamma2 must be > 0")
        if not 0.0 <= self.beta_i <= 1.0:
            raise ModelValidationError("beta_i must lie in [0, 1]")

    @property
    def gamma12(self) -> float:
        return self.beta_i * math.sqrt(self.gamma1 * self.gamma2)


def vtype_qutrit(p: VTypeParams) -> LindbladModel:
    coupling = np.array([[p.gamma1, p.gamma12], [p.gamma12, p.gamma2]])
    return LindbladModel(
        np.zeros((3, 3)),
        (transition(0, 1), transition(0, 2)),
        coupling,
        label=f"vtype(gamma1={p.gamma1:g}, gamma2={p.gamma2:g}, beta_i={p.beta_i:g})",
    )


def dark_state() -> np.ndarray:
    """``(|1> - |2>)/sqrt(2)``, annihilated by ``sigma_01 + sigma_02``."""
    return np.array([0.0, 1.0, -1.0], dtype=np.complex128) / math.sqrt(2)


def vtype_closed_form(rho0: ArrayLike, gamma: float, beta_i: float, t: float) -> ComplexMatrix:
    """Exact state at time ``t`` for equal rates ``gamma1 = gamma2 = gamma``.

    The excited block decays through ``exp(-A t/2) . exp(-A t/2)`` with
    ``A = gamma [[1, beta_i], [beta_i, 1]]``; its symmetric and antisymmetric
    combinations decay at ``gamma (1 +- beta_i)``. The remaining elements follow
    from Hermiticity and unit trace.
    """
    p = as_square(rho0, "rho0")
    if p.shape != (3, 3):
        raise ValueError("rho0 must be 3x3")
    g, b = gamma, beta_i
    x = b * g * t
    e_half = math.exp(-0.5 * (1 + b) * g * t)
    e_full = math.exp(-g * t)
    ch, sh = math.cosh(x), math.sinh(x)
    pops = p[1, 1] + p[2, 2]
    cross = p[1, 2] + p[2, 1]

    r10 = 0.5 * e_half * (p[1, 0] + p[2, 0] + math.exp(x) * (p[1, 0] - p[2, 0]))
    r20 = 0.5 * e_half * (p[1, 0] + p[2, 0] + math.exp(x) * (p[2, 0] - p[1, 0]))
    r21 = 0.5 * e_full * (p[2, 1] - p[1, 2] + cross * ch - pops * sh)
    r11 = 0.5 * e_full * (p[1, 1] - p[2, 2] + pops * ch - cross * sh)
    r22 = 0.5 * e_full * (p[2, 2] - p[1, 1] + pops * ch - cross * sh)

    out = np.empty((3, 3), dtype=np.complex128)
    out[1, 0], out[2, 0], out[2, 1] = r10, r20, r21
    out[0, 1], out[0, 2], out[1, 2] = np.conj(r10), np.conj(r20), np.conj(r21)
    out[1, 1], out[2, 2] = r11, r22
    out[0, 0] = 1.0 - r11 - r22
    return out
