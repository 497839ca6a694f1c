"""Effective dipole-dipole Hamiltonians of 1D arrays in 3D free space.

Units: gamma_0 = 1, lattice constant d = 1. Dipoles are polarized
perpendicular to the array axis. The diagonal is exactly ``-i/2``: the
divergent self-energy shift is absorbed into the transition frequency,
which is taken as the energy zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

MAX_REGULAR = 1000
MAX_CELLS = 600


class ModelKind(enum.Enum):
    FREE_SPACE_REGULAR = "free_space_regular"
    FREE_SPACE_DIMER = "free_space_dimer"
    WAVEGUIDE_1D = "waveguide_1d"


@dataclass(frozen=True)
class ArrayGeometry:
    """Emitter positions in units of the lattice constant.

    ``cell_size`` is 1 for a regular array and 2 for a dimerized one, in
    which case sites are ordered ``(a_0, b_0, a_1, b_1, ...)``.
    """

    positions: np.ndarray
    k0d: float
    d1_over_d: float | None = None
    cell_size: int = 1

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        if x.ndim != 1 or len(x) < 1:
            raise ValueError("positions must be a non-empty 1D array")
        if len(x) > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("positions must be strictly increasing")
        if not self.k0d > 0:
            raise ValueError(f"k0d must be positive, got {self.k0d}")
        if self.d1_over_d is not None and not 0 < self.d1_over_d < 1:
            raise ValueError(f"d1/d must lie in (0, 1), got {self.d1_over_d}")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    @property
    def n_cells(self) -> int:
        return self.n_sites // self.cell_size

    @classmethod
    def regular(cls, n: int, k0d: float) -> "ArrayGeometry":
        return cls(np.arange(n, dtype=float), k0d)

    @classmethod
    def dimer(cls, n_cells: int, k0d: float, d1_over_d: float) -> "ArrayGeometry":
        x = (np.arange(n_cells)[:, None] + np.array([0.0, d1_over_d])[None, :]).ravel()
        return cls(x, k0d, d1_over_d=d1_over_d, cell_size=2)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray = field(repr=False)
    geometry: ArrayGeometry
    kind: ModelKind

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def green_transverse(k0r):
    """Coupling between two transverse dipoles a distance ``r`` apart.

    Returns ``-(3/4) e^{ix} (1/x + i/x^2 - 1/x^3)`` with ``x = k0 r``, in
    units of gamma_0. Its imaginary part tends to ``-1/2`` as ``x -> 0``,
    matching the single-emitter diagonal; the real part diverges as ``x^-3``.
    """
    x = np.asarray(k0r, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("green_transverse requires k0*r > 0; the self term is handled separately")
    value = -0.75 * np.exp(1j * x) * (1.0 / x + 1j / x**2 - 1.0 / x**3)
    return value if value.ndim else complex(value)


def coupling_matrix(positions, k0d: float) -> np.ndarray:
    """Dense free-space Hamiltonian for emitters at ``positions`` (units of d)."""
    x = np.asarray(positions, dtype=float)
    n = len(x)
    r = np.abs(x[:, None] - x[None, :])
    iu = np.triu_indices(n, 1)
    H = np.empty((n, n), dtype=complex)
    upper = green_transverse(k0d * r[iu])
    H[iu] = upper
    H[iu[1], iu[0]] = upper
    np.fill_diagonal(H, -0.5j)
    return H


def build_regular(n: int, k0d: float) -> EffectiveHamiltonian:
    """Regular array of ``n`` emitters with spacing d.

    Requires ``1 <= n <= 1000`` and ``0 < k0d < pi``.
    """
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_REGULAR):
        raise ValueError(f"n must be an integer in [1, {MAX_REGULAR}], got {n!r}")
    if not 0 < k0d < np.pi:
        raise ValueError(f"k0d must lie in (0, pi), got {k0d}")
    geometry = ArrayGeometry.regular(int(n), float(k0d))
    return EffectiveHamiltonian(
        coupling_matrix(geometry.positions, k0d), geometry, ModelKind.FREE_SPACE_REGULAR
    )


def build_dimer(n_cells: int, k0d: float, d1_over_d: float) -> EffectiveHamiltonian:
    """Dimerized array: sites at ``m`` and ``m + d1/d`` for ``m = 0..n_cells-1``."""
    if not (isinstance(n_cells, (int, np.integer)) and 1 <= n_cells <= MAX_CELLS):
        raise ValueError(f"n_cells must be an integer in [1, {MAX_CELLS}], got {n_cells!r}")
    if not 0 < k0d < np.pi:
        raise ValueError(f"k0d must lie in (0, pi), got {k0d}")
    if not 0 < d1_over_d < 1:
        raise ValueError(f"d1/d must lie in (0, 1), got {d1_over_d}")
    geometry = ArrayGeometry.dimer(int(n_cells), float(k0d), float(d1_over_d))
    return EffectiveHamiltonian(
        coupling_matrix(geometry.positions, k0d), geometry, ModelKind.FREE_SPACE_DIMER
    )


def split_parts(H) -> tuple[np.ndarray, np.ndarray]:
    """Split ``H = H_re - i H_im`` into its two Hermitian parts.

    Accepts an :class:`EffectiveHamiltonian` or a bare matrix.
    """
    M = H.matrix if isinstance(H, EffectiveHamiltonian) else np.asarray(H, dtype=complex)
    Md = M.conj().T
    return (M + Md) / 2, (Md - M) / 2j
