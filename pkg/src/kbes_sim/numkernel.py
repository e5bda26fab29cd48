"""Dense complex linear algebra used by the rest of the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored in
row-major (C) order. Every vectorization convention elsewhere in the package
relies on that storage order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

ComplexMatrix = NDArray[np.complex128]

# Condition number above which an eigenvector basis is treated as singular.
DEFECTIVE_CONDITION = 1e12

# Higham (2005) scaling-and-squaring constants: Pade degree -> max 1-norm.
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}


def as_matrix(m: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    """Coerce ``m`` to a finite 2-D complex128 array (a copy when needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return np.ascontiguousarray(a)


def as_square(m: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def kron(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    ra, ca = a.shape
    rb, cb = b.shape
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(ra * rb, ca * cb)


def _pade_uv(a: ComplexMatrix, m: int) -> tuple[ComplexMatrix, ComplexMatrix]:
    c = _PADE_COEFFS[m]
    n = a.shape[0]
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (c[13] * a6 + c[11] * a4 + c[9] * a2)
                 + c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * ident)
        v = (a6 @ (c[12] * a6 + c[10] * a4 + c[8] * a2)
             + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * ident)
        return u, v
    powers = [ident, a2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ a2)
    u = sum(c[j] * powers[j // 2] for j in range(m, 0, -2))
    v = sum(c[j] * powers[j // 2] for j in range(m - 1, -1, -2))
    return a @ u, v


def expm(m: ArrayLike) -> ComplexMatrix:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The Pade degree and the number of squarings are chosen from the 1-norm of
    ``m`` using Higham's backward-error bounds, which gives close to double
    precision for the norms encountered here (``||m|| <= 1e2`` or so).
    """
    a = as_square(m, "m")
    norm1 = np.linalg.norm(a, 1)
    squarings = 0
    for degree in (3, 5, 7, 9):
        if norm1 <= _PADE_THETA[degree]:
            break
    else:
        degree = 13
        if norm1 > _PADE_THETA[13]:
            squarings = max(0, int(np.ceil(np.log2(norm1 / _PADE_THETA[13]))))
            a = a / 2.0**squarings
    u, v = _pade_uv(a, degree)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        r = r @ r
    return r


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and unit-norm right eigenvectors (as columns) of a square matrix."""

    eigenvalues: NDArray[np.complex128]
    right_eigenvectors: ComplexMatrix
    condition_estimate: float
    diagonalizable: bool

    def reconstruct(self) -> ComplexMatrix:
        v = self.right_eigenvectors
        return (v * self.eigenvalues) @ np.linalg.inv(v)


def eig_general(m: ArrayLike) -> SpectralDecomposition:
    """Full complex eigendecomposition of a general (non-Hermitian) matrix.

    Defective or numerically defective inputs are not an error: the 2-norm
    condition number of the eigenvector matrix is reported and
    ``diagonalizable`` is false once it exceeds ``DEFECTIVE_CONDITION``.
    """
    a = as_square(m, "m")
    w, v = np.linalg.eig(a)
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    s = np.linalg.svd(v, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return SpectralDecomposition(
        eigenvalues=w.astype(np.complex128),
        right_eigenvectors=v.astype(np.complex128),
        condition_estimate=cond,
        diagonalizable=bool(np.isfinite(cond) and cond <= DEFECTIVE_CONDITION),
    )


def nullspace(m: ArrayLike, tol: float = 1e-10) -> list[ComplexMatrix]:
    """Orthonormal basis of the right null space as a list of column vectors.

    A singular direction belongs to the null space when its singular value is
    at most ``tol`` times the largest one, so ``||m v|| <= tol * ||m||_2`` holds
    for every returned ``v``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_square(m, "m")
    _, s, vh = np.linalg.svd(a)
    smax = s[0]
    if smax == 0.0:
        keep = np.ones_like(s, dtype=bool)
    else:
        keep = s <= tol * smax
    return [vh[i].conj().reshape(-1, 1) for i in np.flatnonzero(keep)]
