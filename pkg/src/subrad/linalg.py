"""Dense complex eigensolver, polynomial roots and state overlaps.

Every spectrum in the package goes through :func:`eigendecompose`, which
orders eigenpairs by ascending decay rate ``-2 Im(lambda)`` so that index 0
is always the most subradiant state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

MAX_DIM = 2000
RESIDUAL_TOL = 1e-8
NORM_TOL = 1e-8


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ``omega - i gamma/2`` with unit-norm right eigenvectors.

    ``vectors[:, i]`` is the eigenvector of ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        """Decay rates ``-2 Im(lambda)``."""
        return -2.0 * self.values.imag

    @property
    def shifts(self) -> np.ndarray:
        return self.values.real

    def __len__(self) -> int:
        return len(self.values)


def _as_square(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix contains NaN or Inf entries")
    return H


def subradiance_order(values: np.ndarray) -> np.ndarray:
    """Indices sorting eigenvalues by decay rate, ties by real part."""
    values = np.asarray(values)
    return np.lexsort((values.real, -2.0 * values.imag))


def eigendecompose(H) -> SpectralDecomposition:
    """Full eigendecomposition of a dense complex matrix.

    Parameters
    ----------
    H : array_like, shape (n, n)
        Finite complex matrix, ``n <= 2000``.

    Returns
    -------
    SpectralDecomposition
        Eigenpairs sorted most subradiant first. Each residual
        ``||H v - lambda v||`` is at most ``1e-8 * ||H||_F``.

    Raises
    ------
    ValueError
        Non-square, empty, oversized or non-finite input.
    NumericalError
        LAPACK failed to converge, or a residual exceeds the tolerance.
    """
    H = _as_square(H)
    n = H.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the dense budget of {MAX_DIM}")
    try:
        values, vectors = np.linalg.eig(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge for a {n}x{n} matrix") from exc

    vectors = vectors / np.linalg.norm(vectors, axis=0)
    order = subradiance_order(values)
    values = values[order]
    vectors = np.ascontiguousarray(vectors[:, order])

    residuals = np.linalg.norm(H @ vectors - vectors * values, axis=0)
    scale = max(np.linalg.norm(H), np.finfo(float).tiny)
    worst = residuals.max()
    if worst > RESIDUAL_TOL * scale:
        raise NumericalError(
            f"eigen-residual {worst:.3e} exceeds {RESIDUAL_TOL:g}*||H||_F for a {n}x{n} matrix"
        )
    return SpectralDecomposition(values, vectors, residuals)


def companion_matrix(coefficients) -> np.ndarray:
    """Companion matrix of a polynomial given highest degree first."""
    c = np.asarray(coefficients, dtype=complex)
    degree = len(c) - 1
    C = np.zeros((degree, degree), dtype=complex)
    C[0, :] = -c[1:] / c[0]
    C[np.arange(1, degree), np.arange(degree - 1)] = 1.0
    return C


def poly_roots(coefficients) -> np.ndarray:
    """All roots of ``c[0] z^D + c[1] z^(D-1) + ... + c[D]``, with multiplicity.

    Roots are the eigenvalues of the balanced companion matrix.
    """
    c = np.atleast_1d(np.asarray(coefficients, dtype=complex))
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("need at least two coefficients (degree >= 1)")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients contain NaN or Inf")
    if c[0] == 0:
        raise ValueError(
            f"leading coefficient is zero: degree mismatch for a degree-{len(c) - 1} polynomial"
        )
    if len(c) - 1 > 16:
        raise ValueError(f"degree {len(c) - 1} exceeds the supported maximum of 16")
    try:
        return np.linalg.eigvals(companion_matrix(c))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("companion eigenproblem did not converge") from exc


def overlap(v, w) -> complex:
    """Inner product <v|w>, conjugate-linear in ``v``."""
    v = np.asarray(v)
    w = np.asarray(w)
    if v.shape != w.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {w.shape}")
    return complex(np.vdot(v, w))


def infidelity(v, w) -> float:
    """``1 - |<v|w>|^2`` for unit vectors, clamped to [0, 1]."""
    v = np.asarray(v)
    w = np.asarray(w)
    for name, x in (("v", v), ("w", w)):
        norm = np.linalg.norm(x)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"{name} is not normalized (norm {norm:.12g})")
    value = 1.0 - abs(overlap(v, w)) ** 2
    return float(min(max(value, 0.0), 1.0))
