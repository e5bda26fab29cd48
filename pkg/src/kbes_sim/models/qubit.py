"""Driven, radiatively damped two-level atom in a thermal bath.

Basis order is ``(|e>, |g>)``: index 0 is the excited level. With that order
and row-major vectorization the Liouvillian components are
``(rho_ee, rho_eg, rho_ge, rho_gg)``.

Reduced variables are ``f_gamma = f / gamma`` and
``lambda_gamma = lambda / gamma``. These are the scalings under which the
closed-form steady state below is the exact null vector of the generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ModelValidationError
from ..kbes import LindbladModel
from ..numkernel import ComplexMatrix

EXCITED, GROUND = 0, 1

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True)
class DrivenQubitParams:
    """Thermal occupation ``n``, drive ``f``, detuning ``lam`` and decay ``gamma``.

    ``f`` and ``lam`` are in the same rate units as ``gamma``.
    """

    n: float
    f: float
    lam: float
    gamma: float

    def __post_init__(self):
        for name in ("n", "f", "lam", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ModelValidationError(f"{name} must be finite")
        if self.n < 0:
            raise ModelValidationError("mean photon number n must be >= 0")
        if self.gamma <= 0:
            raise ModelValidationError("spontaneous emission rate gamma must be > 0")

    @classmethod
    def reduced(cls, n: float, f_gamma: float, lambda_gamma: float, gamma: float = 1.0):
        return cls(n=n, f=f_gamma * gamma, lam=lambda_gamma * gamma, gamma=gamma)

    @property
    def f_gamma(self) -> float:
        return self.f / self.gamma

    @property
    def lambda_gamma(self) -> float:
        return self.lam / self.gamma

    @property
    def alpha(self) -> float:
        return self.gamma * (self.n + 1) / 2

    @property
    def beta(self) -> float:
        return self.gamma * self.n / 2


def driven_damped_qubit(p: DrivenQubitParams) -> LindbladModel:
    h = p.lam * SIGMA_Z + p.f * (SIGMA_PLUS + SIGMA_MINUS)
    coupling = np.diag([p.gamma * (p.n + 1), p.gamma * p.n])
    return LindbladModel(
        h, (SIGMA_MINUS, SIGMA_PLUS), coupling,
        label=f"driven-qubit(n={p.n:g}, f={p.f:g}, lambda={p.lam:g}, gamma={p.gamma:g})",
    )


def qubit_generator_matrix(p: DrivenQubitParams) -> ComplexMatrix:
    """Hand-written 4x4 generator in the ``(ee, eg, ge, gg)`` ordering."""
    a, b, f, lam = p.alpha, p.beta, p.f, p.lam
    i = 1j
    return np.array(
        [
            [-2 * a, i * f, -i * f, 2 * b],
            [i * f, -a - b - 2 * i * lam, 0, -i * f],
            [-i * f, 0, -a - b + 2 * i * lam, i * f],
            [2 * a, -i * f, i * f, -2 * b],
        ],
        dtype=np.complex128,
    )


def _m(n: float, f_gamma: float, lambda_gamma: float) -> float:
    return (n + 0.5) ** 2 + 2 * (f_gamma**2 + 2 * lambda_gamma**2)


def qubit_steady_closed_form(n: float, f_gamma: float, lambda_gamma: float) -> ComplexMatrix:
    if n < 0:
        raise ModelValidationError("n must be >= 0")
    m = _m(n, f_gamma, lambda_gamma)
    i = 1j
    rho = np.array(
        [
            [n + f_gamma**2 / m, -i * f_gamma * (n + 0.5 - 2 * i * lambda_gamma) / m],
            [i * f_gamma * (n + 0.5 + 2 * i * lambda_gamma) / m, ((n + 1) * m - f_gamma**2) / m],
        ],
        dtype=np.complex128,
    )
    return rho / (2 * n + 1)


def qubit_max_coherence(n: float, f_gamma: float) -> tuple[float, float]:
    """Largest steady-state ``|rho_eg|`` over detuning, and where it occurs.

    Returns ``(max_abs, lambda_gamma_star)`` with ``lambda_gamma_star >= 0``;
    the optimum is symmetric in the sign of the detuning. Writing
    ``x = (n + 1/2)**2 + 4 lambda_gamma**2``, ``|rho_eg|**2`` is proportional
    to ``x / (x + 2 f_gamma**2)**2`` and peaks at ``x = 2 f_gamma**2``. When
    that is out of reach the optimum sits at zero detuning.
    """
    if n < 0:
        raise ModelValidationError("n must be >= 0")
    f2 = f_gamma**2
    half = (n + 0.5) ** 2
    if 2 * f2 >= half and f2 > 0:
        lam_star = math.sqrt((2 * f2 - half) / 4)
        return 1 / (2 * math.sqrt(2) * (2 * n + 1)), lam_star
    rho = qubit_steady_closed_form(n, f_gamma, 0.0)
    return float(abs(rho[EXCITED, GROUND])), 0.0


def plus_state() -> ComplexMatrix:
    """``|+><+|`` with ``|+> = (|g> + |e>)/sqrt(2)``."""
    return np.full((2, 2), 0.5, dtype=np.complex128)
