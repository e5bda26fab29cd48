"""Random valid models and states for property tests and seeded CLI runs."""

from __future__ import annotations

import numpy as np

from .kbes import LindbladModel
from .numkernel import ComplexMatrix


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    return (rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))) / np.sqrt(2)


def rand_density_matrix(d: int, rng: np.random.Generator | int | None = None) -> ComplexMatrix:
    """Full-rank density matrix from the Hilbert-Schmidt ensemble."""
    rng = np.random.default_rng(rng)
    g = _ginibre(rng, d, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def rand_hermitian(d: int, rng: np.random.Generator) -> ComplexMatrix:
    g = _ginibre(rng, d, d)
    return (g + g.conj().T) / 2


def rand_lindblad_model(
    d: int,
    n_jumps: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> LindbladModel:
    """Random Hermitian H, Ginibre jump operators and a random PSD coupling."""
    rng = np.random.default_rng(rng)
    if n_jumps is None:
        n_jumps = int(rng.integers(1, 4))
    ops = [_ginibre(rng, d, d) / np.sqrt(d) for _ in range(n_jumps)]
    c = _ginibre(rng, n_jumps, n_jumps)
    coupling = c @ c.conj().T / n_jumps
    return LindbladModel(rand_hermitian(d, rng), tuple(ops), coupling, label=f"random(d={d})")
