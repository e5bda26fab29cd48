"""Time evolution, steady states and channel extraction for a Liouvillian."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    NotCompletelyPositiveError,
    NumericalError,
    SpectralFallbackError,
    SteadyStateError,
)
from .kbes import (
    LindbladModel,
    Liouvillian,
    apply_rhs_direct,
    build_liouvillian,
    devectorize,
    vec_identity,
    vectorize,
)
from .numkernel import (
    ComplexMatrix,
    SpectralDecomposition,
    as_square,
    eig_general,
    expm,
    nullspace,
)

logger = logging.getLogger(__name__)

DENSITY_TOL = 1e-10
STEADY_TOL = 1e-10
STABILITY_TOL = 1e-10
KRAUS_TOL = 1e-10
RK4_STEP_FACTOR = 1e-3


@dataclass(frozen=True)
class Trajectory:
    """Density matrices on a time grid plus per-state physicality diagnostics."""

    times: NDArray[np.float64]
    states: NDArray[np.complex128]
    trace_deviation: NDArray[np.float64]
    hermiticity_defect: NDArray[np.float64]
    min_eigenvalue: NDArray[np.float64]
    valid_initial: bool = True

    @classmethod
    def from_states(cls, times, states, valid_initial: bool = True) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=np.complex128)
        if states.ndim != 3 or states.shape[0] != times.size:
            raise ValueError("need exactly one d x d state per time point")
        herm = (states + states.conj().swapaxes(1, 2)) / 2
        traj = cls(
            times=times,
            states=states,
            trace_deviation=np.abs(np.trace(states, axis1=1, axis2=2) - 1.0),
            hermiticity_defect=np.max(
                np.abs(states - states.conj().swapaxes(1, 2)), axis=(1, 2)
            ),
            min_eigenvalue=np.linalg.eigvalsh(herm)[:, 0],
            valid_initial=valid_initial,
        )
        for a in (traj.times, traj.states, traj.trace_deviation,
                  traj.hermiticity_defect, traj.min_eigenvalue):
            a.flags.writeable = False
        return traj

    def __len__(self) -> int:
        return self.times.size

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def worst_violation(self) -> float:
        """Largest of trace deviation, Hermiticity defect and negativity."""
        return float(max(
            self.trace_deviation.max(),
            self.hermiticity_defect.max(),
            max(0.0, -self.min_eigenvalue.min()),
        ))


@dataclass(frozen=True)
class ChannelDecomposition:
    kraus_ops: tuple[ComplexMatrix, ...]
    weights: NDArray[np.float64]
    completeness_defect: float

    def apply(self, rho: ArrayLike) -> ComplexMatrix:
        r = as_square(rho, "rho")
        return sum(k @ r @ k.conj().T for k in self.kraus_ops)

    def superoperator(self) -> ComplexMatrix:
        """Propagator matrix of the channel on vectorized states."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)


def _check_times(times: ArrayLike) -> NDArray[np.float64]:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    if t[0] < 0:
        raise ValueError("times must start at t >= 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    return t


def _check_initial(rho0: ArrayLike, d: int) -> tuple[ComplexMatrix, bool]:
    r = as_square(rho0, "rho0")
    if r.shape != (d, d):
        raise ValueError(f"rho0 has shape {r.shape}, Liouvillian acts on {d}x{d}")
    hermitian = np.max(np.abs(r - r.conj().T)) <= DENSITY_TOL
    unit_trace = abs(np.trace(r) - 1.0) <= DENSITY_TOL
    valid = bool(hermitian and unit_trace)
    if not valid:
        logger.warning("initial state is not a density matrix; diagnostics will flag it")
    return r, valid


def _is_uniform(steps: NDArray[np.float64]) -> bool:
    return steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)


def propagate_expm(l: Liouvillian, rho0: ArrayLike, times: ArrayLike) -> Trajectory:
    """States ``devec(expm(F t_k) vec(rho0))``.

    On a uniform grid a single ``expm(F dt)`` is computed and applied
    repeatedly; otherwise one exponential per distinct step is computed.
    """
    t = _check_times(times)
    r0, valid = _check_initial(rho0, l.dim)
    f = l.matrix
    v = vectorize(r0)
    if t[0] > 0:
        v = expm(f * t[0]) @ v
    out = np.empty((t.size, l.dim**2), dtype=np.complex128)
    out[0] = v
    steps = np.diff(t)
    cache: dict[float, ComplexMatrix] = {}
    if _is_uniform(steps):
        cache[float(steps[0])] = expm(f * steps[0])
        uniform = cache[float(steps[0])]
    else:
        uniform = None
    for k, h in enumerate(steps, start=1):
        if uniform is not None:
            p = uniform
        else:
            p = cache.get(float(h))
            if p is None:
                p = cache[float(h)] = expm(f * h)
        v = p @ v
        out[k] = v
    return Trajectory.from_states(t, out.reshape(t.size, l.dim, l.dim), valid)


def propagate_spectral(
    l: Liouvillian,
    rho0: ArrayLike,
    times: ArrayLike,
    max_condition: float | None = None,
) -> Trajectory:
    """Expansion ``|rho(t)> = sum_i C_i exp(lambda_i t) |phi_i>``.

    The coefficients solve ``V C = vec(rho0)``. A defective eigenbasis, or one
    whose condition number exceeds ``max_condition``, raises
    :class:`SpectralFallbackError`.
    """
    t = _check_times(times)
    r0, valid = _check_initial(rho0, l.dim)
    dec = eig_general(l.matrix)
    too_ill = max_condition is not None and dec.condition_estimate > max_condition
    if not dec.diagonalizable or too_ill:
        raise SpectralFallbackError(dec.condition_estimate)
    v = dec.right_eigenvectors
    c = np.linalg.solve(v, vectorize(r0))
    amps = c[:, None] * np.exp(dec.eigenvalues[:, None] * t[None, :])
    vecs = (v @ amps).T
    return Trajectory.from_states(t, vecs.reshape(t.size, l.dim, l.dim), valid)


def default_rk4_step(l: Liouvillian) -> float:
    norm = l.norm1
    return RK4_STEP_FACTOR / norm if norm > 0 else np.inf


def integrate_rk4(
    model: LindbladModel,
    rho0: ArrayLike,
    t_end: float,
    dt: float | None = None,
    record_every: int = 1,
) -> Trajectory:
    """Classical fixed-step RK4 on the matrix ODE, bypassing vectorization.

    ``dt`` defaults to ``1e-3 / ||F||_1``; it is shrunk slightly so that an
    integer number of steps lands exactly on ``t_end``.
    """
    if dt is None:
        dt = default_rk4_step(build_liouvillian(model))
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    r, valid = _check_initial(rho0, model.dim)
    n = 0 if t_end == 0 else max(1, int(np.ceil(t_end / dt - 1e-9)))
    h = t_end / n if n else 0.0

    def rhs(x):
        return apply_rhs_direct(model, x)

    times = [0.0]
    states = [r.copy()]
    for step in range(1, n + 1):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % record_every == 0 or step == n:
            times.append(step * h)
            states.append(r.copy())
    return Trajectory.from_states(times, states, valid)


def steady_state(l: Liouvillian, tol: float = STEADY_TOL) -> ComplexMatrix:
    """Unique trace-one density matrix in the null space of F.

    The zero threshold is relative: singular values up to ``tol * ||F||_2``
    count as zero. An empty or multi-dimensional null space raises
    :class:`SteadyStateError`; in the degenerate case the devectorized basis is
    attached to the exception.
    """
    basis = nullspace(l.matrix, tol)
    if not basis:
        raise SteadyStateError("Liouvillian has no zero eigenvalue within tolerance")
    if len(basis) > 1:
        raise SteadyStateError(
            f"steady manifold is {len(basis)}-dimensional; no unique steady state",
            basis=[devectorize(b) for b in basis],
        )
    rho = devectorize(basis[0])
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise SteadyStateError("null vector is traceless; cannot normalize", basis=[rho])
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def liouvillian_spectrum(l: Liouvillian) -> SpectralDecomposition:
    """Full spectrum of F; raises if any eigenvalue has a positive real part."""
    dec = eig_general(l.matrix)
    bound = STABILITY_TOL * max(l.norm1, np.finfo(float).tiny)
    worst = float(dec.eigenvalues.real.max())
    if worst > bound:
        raise NumericalError(
            f"Liouvillian has an eigenvalue with real part {worst:.3g} > 0; "
            "the generator is not a valid Lindbladian"
        )
    return dec


def trace_defect(l: Liouvillian) -> float:
    """``||vec(I)^+ F||``, zero for a trace-preserving generator."""
    return float(np.max(np.abs(vec_identity(l.dim).conj() @ l.matrix)))


def choi_of_propagator(p: ArrayLike, d: int) -> ComplexMatrix:
    """Reshuffle a propagator into its Choi matrix.

    ``choi[(i,k),(j,l)] = p[(i,j),(k,l)]`` with pairs flattened row-major.
    """
    p = as_square(p, "p")
    if p.shape != (d * d, d * d):
        raise ValueError(f"propagator of shape {p.shape} does not act on {d}x{d} matrices")
    return np.ascontiguousarray(
        p.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    )


def _fix_phase(k: ComplexMatrix) -> ComplexMatrix:
    flat = k.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat))]
    return k * (np.conj(pivot) / abs(pivot))


def kraus_decompose(choi: ArrayLike, tol: float = KRAUS_TOL) -> ChannelDecomposition:
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Operators come out in descending weight order, each with its largest
    entry made real and positive.
    """
    c = as_square(choi, "choi")
    d = int(round(np.sqrt(c.shape[0])))
    if d * d != c.shape[0]:
        raise ValueError(f"Choi matrix size {c.shape[0]} is not a perfect square")
    if np.max(np.abs(c - c.conj().T)) > tol * max(1.0, float(np.max(np.abs(c)))):
        raise ValueError("Choi matrix is not Hermitian within tol")
    w, v = np.linalg.eigh((c + c.conj().T) / 2)
    if w[0] < -tol:
        raise NotCompletelyPositiveError(float(w[0]))
    order = np.argsort(w)[::-1]
    kept = [i for i in order if w[i] > tol]
    ops = tuple(_fix_phase(np.sqrt(w[i]) * v[:, i].reshape(d, d)) for i in kept)
    total = sum((k.conj().T @ k for k in ops), np.zeros((d, d), dtype=np.complex128))
    defect = float(np.linalg.norm(total - np.eye(d), 2))
    return ChannelDecomposition(
        kraus_ops=ops,
        weights=np.array([w[i] for i in kept], dtype=float),
        completeness_defect=defect,
    )


def channel_at(l: Liouvillian, t: float, tol: float = KRAUS_TOL) -> ChannelDecomposition:
    """Kraus form of the propagator ``expm(F t)``."""
    return kraus_decompose(choi_of_propagator(expm(l.matrix * t), l.dim), tol)


def partial_trace(rho: ArrayLike, dims: Sequence[int], keep: Sequence[int]) -> ComplexMatrix:
    """Trace out every tensor factor not listed in ``keep``.

    Factors are ordered as in ``dims``; the result keeps that order.
    """
    r = as_square(rho, "rho")
    dims = [int(x) for x in dims]
    if int(np.prod(dims)) != r.shape[0]:
        raise ValueError(f"subsystem dims {dims} do not multiply to {r.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep must be a nonempty subset of 0..{len(dims) - 1}")
    n = len(dims)
    t = r.reshape(dims + dims)
    for i in reversed(range(n)):
        if i in keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[i] for i in keep]))
    return t.reshape(dk, dk)


def evolve(
    l: Liouvillian,
    rho0: ArrayLike,
    times: ArrayLike,
    method: str = "expm",
) -> Trajectory:
    """Dispatch to :func:`propagate_expm` or :func:`propagate_spectral`."""
    solvers: dict[str, Callable[..., Trajectory]] = {
        "expm": propagate_expm,
        "spectral": propagate_spectral,
    }
    if method not in solvers:
        raise ValueError(f"unknown method {method!r}")
    return solvers[method](l, rho0, times)
