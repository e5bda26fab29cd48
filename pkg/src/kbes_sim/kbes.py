"""Ket-bra entangled state vectorization and Liouvillian assembly.

A density matrix rho on a d-level system is mapped to the vector
``|rho> = rho |eta>`` with ``|eta> = sum_m |m, ~m>``. With row-major storage
the component with index ``m*d + n`` holds ``rho[m, n]``; the first Kronecker
factor is the physical mode and the second the fictitious (bra) mode.

Under that ordering the sandwich map ``rho -> A rho B`` becomes the matrix
``kron(A, B.T)``. An operator moved onto the fictitious mode therefore acts
through its transpose, which for ``B = L^dagger`` is the complex conjugate of
``L``.

Example
-------
>>> import numpy as np
>>> sm = np.array([[0, 0], [1, 0]])        # |g><e| in the (|e>, |g>) basis
>>> model = LindbladModel(np.zeros((2, 2)), [sm], [[1.0]])
>>> F = build_liouvillian(model).matrix
>>> F @ vectorize(np.diag([1, 0]))
array([-1.+0.j,  0.+0.j,  0.+0.j,  1.+0.j])
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ModelValidationError
from .numkernel import ComplexMatrix, as_square, kron

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian, jump operators and coupling matrix of a Lindblad equation.

    The generated equation is

        drho/dt = -i[H, rho]
                  + sum_{n,m} h[n, m] (L_n rho L_m^+ - 1/2 {L_m^+ L_n, rho})

    with hbar = 1. ``coupling`` may be any Hermitian positive semidefinite
    k x k matrix, so cross-damping between channels is expressible.
    """

    hamiltonian: ComplexMatrix
    jump_ops: tuple[ComplexMatrix, ...]
    coupling: ComplexMatrix
    label: str = ""

    def __post_init__(self):
        try:
            h = as_square(self.hamiltonian, "hamiltonian")
        except ValueError as exc:
            raise ModelValidationError(str(exc)) from None
        d = h.shape[0]
        if d < 2:
            raise ModelValidationError("Hilbert-space dimension must be at least 2")
        ops = []
        for i, op in enumerate(self.jump_ops):
            try:
                op = as_square(op, f"jump_ops[{i}]")
            except ValueError as exc:
                raise ModelValidationError(str(exc)) from None
            if op.shape != (d, d):
                raise ModelValidationError(
                    f"jump_ops[{i}] has shape {op.shape}, expected {(d, d)}"
                )
            ops.append(_frozen(op))
        k = len(ops)
        coupling = np.asarray(self.coupling, dtype=np.complex128)
        if k == 0 and coupling.size == 0:
            coupling = np.zeros((0, 0), dtype=np.complex128)
        if coupling.shape != (k, k):
            raise ModelValidationError(
                f"coupling has shape {coupling.shape}, expected {(k, k)} "
                "(one row and column per jump operator)"
            )
        if not np.all(np.isfinite(coupling)):
            raise ModelValidationError("coupling has non-finite entries")

        if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * _scale(h):
            raise ModelValidationError("hamiltonian is not Hermitian")
        if k:
            if np.max(np.abs(coupling - coupling.conj().T)) > HERMITIAN_TOL * _scale(coupling):
                raise ModelValidationError("coupling matrix is not Hermitian")
            lowest = float(np.linalg.eigvalsh((coupling + coupling.conj().T) / 2)[0])
            if lowest < -PSD_TOL * _scale(coupling):
                raise ModelValidationError(
                    "coupling matrix is not positive semidefinite "
                    f"(smallest eigenvalue {lowest:.6g})"
                )

        object.__setattr__(self, "hamiltonian", _frozen(h))
        object.__setattr__(self, "jump_ops", tuple(ops))
        object.__setattr__(self, "coupling", _frozen(coupling))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class Liouvillian:
    """Generator F of ``d|rho>/dt = F |rho>`` under the ``m*d + n`` ordering."""

    dim: int
    matrix: ComplexMatrix
    source_model: LindbladModel | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(as_square(self.matrix, "matrix"))
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"Liouvillian of dimension {self.dim} must be {self.dim**2}x{self.dim**2}")
        object.__setattr__(self, "matrix", m)

    @property
    def norm1(self) -> float:
        return float(np.linalg.norm(self.matrix, 1))


def vectorize(rho: ArrayLike) -> NDArray[np.complex128]:
    """Row-major flattening: component ``m*d + n`` is ``rho[m, n]``."""
    r = as_square(rho, "rho")
    return r.reshape(-1).copy()


def devectorize(v: ArrayLike) -> ComplexMatrix:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size or d == 0:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def vec_identity(d: int) -> NDArray[np.complex128]:
    """The ket-bra entangled state ``|eta>`` itself, i.e. ``vec(I)``."""
    return np.eye(d, dtype=np.complex128).reshape(-1)


def lift_sandwich(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Matrix of ``rho -> a @ rho @ b`` acting on vectorized states."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return kron(a, b.T)


def build_liouvillian(model: LindbladModel) -> Liouvillian:
    d = model.dim
    ident = np.eye(d, dtype=np.complex128)
    h = model.hamiltonian
    f = -1j * (lift_sandwich(h, ident) - lift_sandwich(ident, h))
    ops = model.jump_ops
    for n, ln in enumerate(ops):
        for m, lm in enumerate(ops):
            c = model.coupling[n, m]
            if c == 0:
                continue
            lm_dag = lm.conj().T
            prod = lm_dag @ ln
            f += c * (
                lift_sandwich(ln, lm_dag)
                - 0.5 * lift_sandwich(prod, ident)
                - 0.5 * lift_sandwich(ident, prod)
            )
    return Liouvillian(dim=d, matrix=f, source_model=model)


def apply_rhs_direct(model: LindbladModel, rho: ArrayLike) -> ComplexMatrix:
    """Right-hand side of the master equation from plain matrix products."""
    r = as_square(rho, "rho")
    if r.shape != (model.dim, model.dim):
        raise ValueError(f"rho has shape {r.shape}, model dimension is {model.dim}")
    h = model.hamiltonian
    out = -1j * (h @ r - r @ h)
    # sum_nm c_nm L_n rho L_m^+ = sum_n L_n rho M_n^+ with M_n = sum_m conj(c_nm) L_m
    for ln, row in zip(model.jump_ops, model.coupling):
        mn = sum(np.conj(c) * lm for c, lm in zip(row, model.jump_ops))
        md = mn.conj().T
        prod = md @ ln
        out += ln @ r @ md - 0.5 * (r @ prod + prod @ r)
    return out


def lindblad_model(
    hamiltonian: ArrayLike,
    jump_ops: Sequence[ArrayLike] = (),
    coupling: ArrayLike | None = None,
    label: str = "",
) -> LindbladModel:
    """Convenience constructor; ``coupling`` defaults to the identity."""
    k = len(jump_ops)
    if coupling is None:
        coupling = np.eye(k)
    return LindbladModel(hamiltonian, tuple(jump_ops), coupling, label)
