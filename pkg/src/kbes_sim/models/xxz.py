"""Periodic XXZ chain with every qubit damped by its own zero-temperature bath.

Per-site basis is ``(|0>, |1>)`` = (spin down, spin up) with
``sigma^+ = |1><0|`` and ``sigma^z = diag(-1, 1)``. Site 1 is the leftmost
Kronecker factor, so the state with only site ``n`` excited has index
``2**(N - n)``.

Two routes are provided. The full route builds the ``4**N`` Liouvillian
(``xxz_chain``) and is limited to ``N <= 6``. The analytic route works inside
the zero- and one-excitation sectors and costs polynomial time in ``N``. It
covers initial states ``a|0...0> + b sigma_1^+|0...0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from ..errors import ModelValidationError, NumericalError
from ..kbes import LindbladModel
from ..numkernel import ComplexMatrix

MAX_FULL_QUBITS = 6
CROSS_POP_TOL = 1e-9

SP = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |1><0|
SM = SP.T.copy()
SZ = np.diag([-1.0, 1.0]).astype(np.complex128)


@dataclass(frozen=True)
class XXZParams:
    """Chain size, couplings ``J`` and ``J_z``, damping ``gamma``, initial amplitudes.

    ``a`` must be real and ``a**2 + |b|**2 = 1``.
    """

    n_qubits: int
    j: float
    jz: float
    gamma: float
    a: float = 1 / math.sqrt(2)
    b: complex = 1 / math.sqrt(2)

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 2:
            raise ModelValidationError("n_qubits must be an integer >= 2")
        if self.gamma <= 0 or not math.isfinite(self.gamma):
            raise ModelValidationError("gamma must be a finite positive rate")
        if not (math.isfinite(self.j) and math.isfinite(self.jz)):
            raise ModelValidationError("couplings must be finite")
        if isinstance(self.a, complex):
            if abs(self.a.imag) > 1e-12:
                raise ModelValidationError("amplitude a must be real")
            object.__setattr__(self, "a", self.a.real)
        if abs(self.a**2 + abs(self.b) ** 2 - 1) > 1e-12:
            raise ModelValidationError("amplitudes must satisfy a**2 + |b|**2 = 1")

    @classmethod
    def figure5(cls, n_qubits: int, jz: float = 0.0) -> "XXZParams":
        return cls(n_qubits, j=2.0, jz=jz, gamma=1 / 220,
                   a=1 / math.sqrt(2), b=1 / math.sqrt(2))


def site_operator(op: ArrayLike, site: int, n_qubits: int) -> ComplexMatrix:
    """``op`` on ``site`` (1-based), identity elsewhere."""
    eye = np.eye(2, dtype=np.complex128)
    factors = [op if k == site else eye for k in range(1, n_qubits + 1)]
    return reduce(np.kron, factors)


def xxz_hamiltonian(n_qubits: int, j: float, jz: float) -> ComplexMatrix:
    """``sum_i J (s+_i s-_{i+1} + s-_i s+_{i+1}) + Jz sz_i sz_{i+1}``, periodic."""
    n = n_qubits
    sp = [site_operator(SP, i, n) for i in range(1, n + 1)]
    sm = [site_operator(SM, i, n) for i in range(1, n + 1)]
    sz = [site_operator(SZ, i, n) for i in range(1, n + 1)]
    h = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i in range(n):
        k = (i + 1) % n
        h += j * (sp[i] @ sm[k] + sm[i] @ sp[k]) + jz * (sz[i] @ sz[k])
    return h


def xxz_chain(p: XXZParams) -> LindbladModel:
    """Full-space model; jump operators ``sigma_i^-`` with coupling ``2 gamma``."""
    n = p.n_qubits
    if n > MAX_FULL_QUBITS:
        raise ModelValidationError(
            f"full Liouvillian path supports N <= {MAX_FULL_QUBITS}; "
            "use the analytic-sector path for larger chains"
        )
    ops = tuple(site_operator(SM, i, n) for i in range(1, n + 1))
    return LindbladModel(
        xxz_hamiltonian(n, p.j, p.jz), ops, 2 * p.gamma * np.eye(n),
        label=f"xxz(N={n}, J={p.j:g}, Jz={p.jz:g}, gamma={p.gamma:g})",
    )


def initial_state(p: XXZParams) -> ComplexMatrix:
    """Dense ``|phi><phi|`` with ``|phi> = a|0...0> + b sigma_1^+|0...0>``."""
    n = p.n_qubits
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = p.a
    psi[2 ** (n - 1)] = p.b
    return np.outer(psi, psi.conj())


# --- one-excitation sector -------------------------------------------------

def _apply_hamiltonian(bits: tuple[int, ...], j: float, jz: float) -> dict[tuple[int, ...], complex]:
    """Action of the chain Hamiltonian on one computational basis state."""
    n = len(bits)
    out: dict[tuple[int, ...], complex] = {}
    for i in range(n):
        k = (i + 1) % n
        bi, bk = bits[i], bits[k]
        s = (2 * bi - 1) * (2 * bk - 1)
        out[bits] = out.get(bits, 0.0) + jz * s
        if bi != bk:
            flipped = list(bits)
            flipped[i], flipped[k] = bk, bi
            key = tuple(flipped)
            out[key] = out.get(key, 0.0) + j
    return out


def _excited(n_qubits: int, site: int) -> tuple[int, ...]:
    return tuple(1 if k == site else 0 for k in range(1, n_qubits + 1))


def sector_hamiltonian(n_qubits: int, j: float, jz: float) -> NDArray[np.float64]:
    """Chain Hamiltonian restricted to one excitation, in the site basis."""
    n = n_qubits
    index = {_excited(n, s): s - 1 for s in range(1, n + 1)}
    h = np.zeros((n, n))
    for s in range(1, n + 1):
        for state, amp in _apply_hamiltonian(_excited(n, s), j, jz).items():
            h[index[state], s - 1] += amp.real
    return h


def vacuum_energy(n_qubits: int, j: float, jz: float) -> float:
    vac = (0,) * n_qubits
    action = _apply_hamiltonian(vac, j, jz)
    if set(action) != {vac}:
        raise NumericalError("all-down state is not an eigenstate")
    return float(action[vac].real)


@dataclass(frozen=True)
class OneParticleSector:
    """Momentum states ``|k>`` (columns, k = 1..N) and their energies."""

    energies: NDArray[np.float64]
    momentum_states: ComplexMatrix
    vacuum_energy: float
    sector_hamiltonian: NDArray[np.float64]

    @property
    def n_qubits(self) -> int:
        return self.energies.size


def momentum_states(n_qubits: int) -> ComplexMatrix:
    n = n_qubits
    sites = np.arange(1, n + 1)[:, None]
    ks = np.arange(1, n + 1)[None, :]
    return np.exp(2j * np.pi * sites * ks / n) / math.sqrt(n)


def one_particle_sector(n_qubits: int, j: float, jz: float) -> OneParticleSector:
    """Energies of the momentum states from the directly built sector Hamiltonian.

    Each ``|k>`` is checked to be an eigenvector, and the set of energies is
    checked against a dense diagonalization of the sector.
    """
    if n_qubits < 2:
        raise ModelValidationError("n_qubits must be >= 2")
    h = sector_hamiltonian(n_qubits, j, jz)
    k = momentum_states(n_qubits)
    hk = h @ k
    energies = np.real(np.einsum("nk,nk->k", k.conj(), hk))
    scale = max(1.0, float(np.max(np.abs(h))))
    residual = float(np.max(np.abs(hk - k * energies)))
    if residual > 1e-12 * scale:
        raise NumericalError(f"momentum states are not sector eigenvectors (residual {residual:.3g})")
    direct = np.linalg.eigvalsh(h)
    if np.max(np.abs(np.sort(energies) - direct)) > 1e-12 * scale:
        raise NumericalError("momentum energies disagree with direct diagonalization")
    return OneParticleSector(
        energies=energies,
        momentum_states=k,
        vacuum_energy=vacuum_energy(n_qubits, j, jz),
        sector_hamiltonian=h,
    )


def dispersion_factor(sector: OneParticleSector, j: float) -> float:
    """``c`` in ``E_k = c J cos(2 pi k / N) + const``, fitted to the sector energies."""
    n = sector.n_qubits
    cosk = np.cos(2 * np.pi * np.arange(1, n + 1) / n)
    centred = sector.energies - sector.energies.mean()
    c = float(centred @ cosk / (j * (cosk @ cosk)))
    if np.max(np.abs(centred - c * j * cosk)) > 1e-10 * max(1.0, abs(j)):
        raise NumericalError("sector energies are not of cosine form")
    return c


# --- analytic evolution ----------------------------------------------------

@dataclass(frozen=True)
class SectorState:
    """Density matrix supported on the zero- and one-excitation sectors.

    ``vacuum`` is ``<0|rho|0>``, ``coherence[n-1]`` is ``<n|rho|0>`` and
    ``block[n-1, m-1]`` is ``<n|rho|m>``, where ``|n>`` has site ``n`` excited.
    """

    vacuum: float
    coherence: NDArray[np.complex128]
    block: ComplexMatrix

    @property
    def n_qubits(self) -> int:
        return self.coherence.size

    def to_dense(self) -> ComplexMatrix:
        n = self.n_qubits
        idx = np.array([2 ** (n - s) for s in range(1, n + 1)])
        rho = np.zeros((2**n, 2**n), dtype=np.complex128)
        rho[0, 0] = self.vacuum
        rho[idx, 0] = self.coherence
        rho[0, idx] = self.coherence.conj()
        rho[np.ix_(idx, idx)] = self.block
        return rho

    def reduced_qubit(self, site: int) -> ComplexMatrix:
        if not 1 <= site <= self.n_qubits:
            raise ValueError(f"site must be in 1..{self.n_qubits}")
        p11 = self.block[site - 1, site - 1]
        p01 = np.conj(self.coherence[site - 1])
        return np.array([[1 - p11, p01], [np.conj(p01), p11]], dtype=np.complex128)


def _rates(p: XXZParams, sector: OneParticleSector):
    e, e0 = sector.energies, sector.vacuum_energy
    h0k = 1j * (e - e0) - p.gamma
    hkk = 1j * (e[None, :] - e[:, None]) - 2 * p.gamma
    return h0k, hkk


def _sector_for(p: XXZParams, sector: OneParticleSector | None) -> OneParticleSector:
    if sector is None:
        return one_particle_sector(p.n_qubits, p.j, p.jz)
    if sector.n_qubits != p.n_qubits:
        raise ValueError("sector does not match the chain size")
    return sector


def xxz_analytic_evolve(
    p: XXZParams, t: float, sector: OneParticleSector | None = None
) -> SectorState:
    """State at time ``t`` from the momentum-space propagators.

    Uses ``h_0k = i(E_k - E_0) - gamma`` for vacuum/one-excitation coherences
    and ``h_kk' = i(E_k' - E_k) - 2 gamma`` for the one-excitation block; the
    population lost from the block returns to the vacuum.
    """
    sector = _sector_for(p, sector)
    n = p.n_qubits
    h0k, hkk = _rates(p, sector)
    ks = np.arange(1, n + 1)
    phase = np.exp(2j * np.pi * np.outer(ks - 1, ks) / n)  # [site n, k]
    b2 = abs(p.b) ** 2
    coherence = (p.a * p.b / n) * (phase @ np.exp(np.conj(h0k) * t))
    block = (b2 / n**2) * (phase @ np.exp(hkk * t) @ phase.conj().T)
    vacuum = 1.0 - b2 * math.exp(-2 * p.gamma * t)
    return SectorState(vacuum=vacuum, coherence=coherence, block=block)


def xxz_reduced_qubit(
    p: XXZParams, site: int, t: ArrayLike, sector: OneParticleSector | None = None
) -> ComplexMatrix:
    """Single-site density matrix, evaluated straight from the momentum sums.

    Returns a 2x2 matrix for scalar ``t`` or a ``(len(t), 2, 2)`` stack.
    """
    n = p.n_qubits
    if not 1 <= site <= n:
        raise ValueError(f"site must be in 1..{n}")
    sector = _sector_for(p, sector)
    h0k, hkk = _rates(p, sector)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    ks = np.arange(1, n + 1)
    w01 = np.exp(-2j * np.pi * (site - 1) * ks / n)
    rho01 = (p.a * np.conj(p.b) / n) * (w01 @ np.exp(np.outer(h0k, tt)))
    w11 = np.exp(2j * np.pi * (site - 1) * (ks[:, None] - ks[None, :]) / n)
    rho11 = (abs(p.b) ** 2 / n**2) * np.einsum(
        "kq,kqt->t", w11, np.exp(hkk[:, :, None] * tt[None, None, :])
    )
    out = np.empty((tt.size, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = 1 - rho11
    out[:, 0, 1] = rho01
    out[:, 1, 0] = np.conj(rho01)
    out[:, 1, 1] = rho11
    return out[0] if np.ndim(t) == 0 else out


def _population_kernel(p: XXZParams, sector: OneParticleSector):
    """Site weights ``w[s, k, q]`` and rates with ``rho11_s(t) = sum w e^{h t}``."""
    n = p.n_qubits
    _, hkk = _rates(p, sector)
    ks = np.arange(1, n + 1)
    sites = np.arange(n)[:, None, None]
    w = np.exp(2j * np.pi * sites * (ks[None, :, None] - ks[None, None, :]) / n)
    return w * (abs(p.b) ** 2 / n**2), hkk


def site_populations(
    p: XXZParams, t: ArrayLike, sector: OneParticleSector | None = None
) -> NDArray[np.float64]:
    """Excited population of every site, shape ``(N, len(t))``."""
    w, hkk = _population_kernel(p, _sector_for(p, sector))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((p.n_qubits, tt.size))
    for lo in range(0, tt.size, 4096):
        chunk = tt[lo:lo + 4096]
        out[:, lo:lo + 4096] = np.einsum(
            "skq,kqt->st", w, np.exp(hkk[:, :, None] * chunk[None, None, :])
        ).real
    return out


# --- cross points ------------------------------------------------------------

def w_states() -> dict[str, NDArray[np.complex128]]:
    """The two four-qubit W-like states, in the one-excitation site basis."""
    return {
        "+": np.array([1, 1j, -1, 1j]) / 2,
        "-": np.array([1, -1j, -1, -1j]) / 2,
    }


@dataclass(frozen=True)
class CrossPoint:
    time: float
    spread: float
    w_fidelity: float = float("nan")
    w_label: str = ""


def w_fidelity(state: SectorState) -> tuple[float, str]:
    """Best overlap of the normalized one-excitation block with a W-like state."""
    if state.n_qubits != 4:
        return float("nan"), ""
    block = state.block / np.trace(state.block).real
    best = max(
        ((float(np.real(v.conj() @ block @ v)), label) for label, v in w_states().items()),
        key=lambda x: x[0],
    )
    return best


def predicted_cross_times(j: float, dispersion: float, t_max: float) -> NDArray[np.float64]:
    """Times with ``c J t = 2 n pi +- pi/2`` up to ``t_max``."""
    scale = dispersion * abs(j)
    out = []
    n = 0
    while True:
        lo = (2 * n * math.pi - math.pi / 2) / scale
        hi = (2 * n * math.pi + math.pi / 2) / scale
        if lo > t_max:
            break
        out.extend(x for x in (lo, hi) if 0 < x <= t_max)
        n += 1
    return np.array(sorted(out))


def xxz_cross_points(
    p: XXZParams,
    window: tuple[float, float],
    sector: OneParticleSector | None = None,
    samples: int | None = None,
) -> list[CrossPoint]:
    """Times in ``window`` where all site populations coincide.

    Signed differences between site 1 and every other site are scanned for
    sign changes and refined by Brent bisection; a root is kept when the
    max-min population spread there is below ``CROSS_POP_TOL``. For ``N = 4``
    each crossing also carries its W-state fidelity.
    """
    sector = _sector_for(p, sector)
    t0, t1 = map(float, window)
    if not t1 > t0:
        raise ValueError("window must be (t_start, t_end) with t_end > t_start")
    e = sector.energies
    freq = max(float(np.max(e) - np.min(e)), 1e-12)
    if samples is None:
        samples = int(max(2001, math.ceil((t1 - t0) * freq / (2 * math.pi) * 64)))
    ts = np.linspace(t0, t1, samples)
    pops = site_populations(p, ts, sector)
    scale = float(np.max(np.abs(pops))) or 1.0

    w, hkk = _population_kernel(p, sector)

    def pop_at(t: float) -> NDArray[np.float64]:
        return np.einsum("skq,kq->s", w, np.exp(hkk * t)).real

    def diff_at(t: float, other: int) -> float:
        e = np.exp(hkk * t)
        return float(np.vdot(w[0].conj(), e).real - np.vdot(w[other].conj(), e).real)

    roots: list[float] = []
    for other in range(1, p.n_qubits):
        diff = pops[0] - pops[other]
        if np.max(np.abs(diff)) < 1e-12 * scale:
            continue
        sign = np.sign(diff)
        for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
            lo, hi = ts[i], ts[i + 1]
            f_lo, f_hi = diff_at(lo, other), diff_at(hi, other)
            if f_lo * f_hi > 0:
                # rounding noise at a tangential zero; keep the closer endpoint
                roots.append(lo if abs(f_lo) < abs(f_hi) else hi)
                continue
            roots.append(brentq(diff_at, lo, hi, args=(other,),
                                xtol=1e-14, rtol=4 * np.finfo(float).eps))
        roots.extend(ts[sign == 0])

    merge_tol = 1e-9 * max(1.0, t1)
    found: list[CrossPoint] = []
    for r in sorted(roots):
        pv = pop_at(r)
        spread = float(pv.max() - pv.min())
        if spread > CROSS_POP_TOL:
            continue
        if found and r - found[-1].time < merge_tol:
            continue
        fid, label = w_fidelity(xxz_analytic_evolve(p, r, sector))
        found.append(CrossPoint(time=float(r), spread=spread, w_fidelity=fid, w_label=label))
    return found

