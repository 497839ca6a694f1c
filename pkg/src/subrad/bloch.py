"""Generalized Bloch theorem for finite banded chains.

A chain of ``N`` sites with hoppings of range ``R``::

    H = h0 + sum_r h_r |m><m+r| + h'_r |m+r><m|

has eigenstates ``psi_m = sum_j c_j z_j^m`` built from the ``2R`` roots of
``omega_tilde(z) = E``. The boundary equations reduce to a ``2R x 2R``
matrix with rows ``z_j^-r`` and ``z_j^(N+1+r)`` (``r = 0..R-1``); ``E`` is
an eigenvalue exactly when it is singular.

Dividing its determinant by the Vandermonde product of the roots removes
the spurious zeros at confluent roots and makes it independent of root
ordering. For Hermitian chains the result is real along the real axis, so
eigenvalues can be bracketed by sign changes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import optimize

from .errors import NumericalError
from .linalg import poly_roots

CONFLUENCE_TOL = 1e-10
DEGENERACY_RATIO = 1e3
RESIDUAL_TOL = 1e-8


class ConditioningError(NumericalError):
    """Bulk roots are too close together for the boundary matrix to be used."""

    def __init__(self, distance: float):
        self.distance = distance
        super().__init__(f"near-confluent bulk roots (min pairwise distance {distance:.3e})")


@dataclass(frozen=True)
class BandedHamiltonianSpec:
    """Finite translation-invariant chain with hopping range ``R``.

    ``hoppings[r-1] = (h_r, h'_r)``: ``h_r`` couples site ``m`` to ``m+r``
    from the right (matrix element ``H[m, m+r]``), ``h'_r`` is
    ``H[m+r, m]``.
    """

    n_sites: int
    hoppings: tuple
    h0: complex = 0.0

    def __post_init__(self):
        hops = tuple((complex(a), complex(b)) for a, b in self.hoppings)
        object.__setattr__(self, "hoppings", hops)
        if self.R < 1:
            raise ValueError("need at least one hopping range")
        if not 2 * self.R < self.n_sites:
            raise ValueError(f"range R={self.R} must satisfy R < N/2 (N={self.n_sites})")
        h_R, hp_R = hops[-1]
        if h_R == 0 or hp_R == 0:
            raise ValueError("longest-range hoppings h_R and h'_R must both be nonzero")

    @classmethod
    def hermitian(cls, n_sites: int, hoppings, h0: float = 0.0) -> "BandedHamiltonianSpec":
        return cls(n_sites, tuple((h, np.conj(h)) for h in hoppings), h0)

    @property
    def R(self) -> int:
        return len(self.hoppings)

    @property
    def is_hermitian(self) -> bool:
        return np.imag(self.h0) == 0 and all(b == np.conj(a) for a, b in self.hoppings)

    def dense(self) -> np.ndarray:
        N = self.n_sites
        H = np.diag(np.full(N, complex(self.h0)))
        for r, (h, hp) in enumerate(self.hoppings, start=1):
            H += np.diag(np.full(N - r, h), r) + np.diag(np.full(N - r, hp), -r)
        return H

    def norm_bound(self) -> float:
        return abs(self.h0) + sum(abs(a) + abs(b) for a, b in self.hoppings)


def omega_tilde(spec: BandedHamiltonianSpec, z):
    """Bulk symbol ``h0 + sum_r (h_r z^r + h'_r z^-r)``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("omega_tilde is singular at z = 0")
    out = np.full(z.shape, complex(spec.h0))
    for r, (h, hp) in enumerate(spec.hoppings, start=1):
        out = out + h * z**r + hp * z ** (-r)
    return out if out.ndim else complex(out)


def bulk_polynomial(spec: BandedHamiltonianSpec, E: complex) -> np.ndarray:
    """Coefficients (highest first) of ``z^R (omega_tilde(z) - E)``."""
    hs = [h for h, _ in spec.hoppings]
    hps = [hp for _, hp in spec.hoppings]
    return np.array(hs[::-1] + [spec.h0 - E] + hps, dtype=complex)


def bulk_roots(spec: BandedHamiltonianSpec, E: complex) -> np.ndarray:
    return poly_roots(bulk_polynomial(spec, E))


def _min_separation(roots: np.ndarray) -> float:
    return min(abs(a - b) for a, b in combinations(roots, 2))


def _column_scales(roots: np.ndarray, N: int) -> np.ndarray:
    """``z^-(N+1)`` for growing roots, 1 otherwise (log-safe)."""
    grow = np.abs(roots) > 1
    logs = np.where(grow, -(N + 1) * np.log(np.where(grow, roots, 1.0)), 0.0)
    return np.exp(logs)


def _scaled_boundary_matrix(spec, roots):
    N, R = spec.n_sites, spec.R
    logz = np.log(roots)
    grow = np.abs(roots) > 1
    shift = np.where(grow, -(N + 1), 0)
    rows = [np.exp((-r + shift) * logz) for r in range(R)]
    rows += [np.exp((N + 1 + r + shift) * logz) for r in range(R)]
    return np.array(rows)


def boundary_matrix(spec: BandedHamiltonianSpec, E: complex, roots=None) -> np.ndarray:
    """Boundary matrix in normal form.

    Rows are ``z_j^-r`` (left edge) followed by ``z_j^(N+1+r)`` (right edge),
    ``r = 0..R-1``. Right-edge rows are divided by ``max|z_j|^(N+1)`` to keep
    entries representable; null vectors are unaffected.
    """
    roots = bulk_roots(spec, E) if roots is None else np.asarray(roots, dtype=complex)
    sep = _min_separation(roots)
    if sep < CONFLUENCE_TOL:
        raise ConditioningError(sep)
    N, R = spec.n_sites, spec.R
    logz = np.log(roots)
    log_max = (N + 1) * np.log(np.abs(roots).max())
    rows = [np.exp(-r * logz) for r in range(R)]
    rows += [np.exp((N + 1 + r) * logz - log_max) for r in range(R)]
    return np.array(rows)


def _vandermonde(roots: np.ndarray) -> complex:
    return np.prod([roots[j] - roots[i] for i, j in combinations(range(len(roots)), 2)])


def det_condition(spec: BandedHamiltonianSpec, E: complex) -> complex:
    """Normalized boundary determinant; zero exactly at eigenvalues.

    ``det M / V(z)`` divided by ``prod_{|z_j|>1} |z_j|^(N+1)``, where ``V`` is
    the Vandermonde product. The positive rescaling keeps the value finite
    for long chains without moving its zeros or flipping its sign.
    """
    roots = bulk_roots(spec, E)
    sep = _min_separation(roots)
    if sep < CONFLUENCE_TOL:
        raise ConditioningError(sep)
    M = _scaled_boundary_matrix(spec, roots)
    grow = np.abs(roots) > 1
    phase = np.prod(np.exp(1j * (spec.n_sites + 1) * np.angle(roots[grow])))
    value = np.linalg.det(M) * phase / _vandermonde(roots)
    if not np.isfinite(value):
        raise NumericalError(f"boundary determinant overflowed at E={E}")
    return complex(value)


@dataclass(frozen=True)
class BlochSolution:
    """One eigenpair assembled from bulk roots.

    ``state = sum_j coefficients[j] |z_j>`` with ``|z> = N^-1/2 (z^m)``,
    ``m = 1..N``, normalized to unit length. ``right_coefficients`` holds
    ``c_j z_j^(N+1)``, finite even when ``|z_j|^(N+1)`` is not.
    """

    E: complex
    roots: np.ndarray
    coefficients: np.ndarray
    right_coefficients: np.ndarray
    state: np.ndarray = field(repr=False)
    residual: float
    degenerate: bool = False
    z_ex: complex | None = None

    @property
    def n_sites(self) -> int:
        return len(self.state)

    @property
    def epsilon(self) -> np.ndarray:
        """``z_ex / z_j - 1``, so that ``z_j / z_ex = 1 / (1 + epsilon_j)``."""
        return self._need_zex() / self.roots - 1

    @property
    def eta(self) -> np.ndarray:
        """``z_j / z_ex - 1``."""
        return self.roots / self._need_zex() - 1

    def _need_zex(self) -> complex:
        if self.z_ex is None:
            raise ValueError("no extremum reference z_ex attached to this solution")
        return self.z_ex

    def boundary_identities(self, r_max: int) -> tuple[np.ndarray, np.ndarray]:
        """``sum_j c_j eps_j^r`` and ``sum_j c_j z_j^(N+1) eta_j^r`` for r = 0..r_max."""
        eps, eta = self.epsilon, self.eta
        left = np.array([np.sum(self.coefficients * eps**r) for r in range(r_max + 1)])
        right = np.array([np.sum(self.right_coefficients * eta**r) for r in range(r_max + 1)])
        return left, right

    def to_dict(self) -> dict:
        def pairs(a):
            return [[float(np.real(x)), float(np.imag(x))] for x in np.atleast_1d(a)]

        return {
            "E": pairs(self.E)[0],
            "roots": pairs(self.roots),
            "coefficients": pairs(self.coefficients),
            "residual": float(self.residual),
            "degenerate": bool(self.degenerate),
        }


def assemble(spec: BandedHamiltonianSpec, E: float, z_ex=None) -> list[BlochSolution]:
    """Build the eigenstate(s) at an energy where the boundary matrix is singular."""
    N = spec.n_sites
    roots = bulk_roots(spec, E)
    sep = _min_separation(roots)
    if sep < CONFLUENCE_TOL:
        raise ConditioningError(sep)
    M = _scaled_boundary_matrix(spec, roots)
    _, sv, vh = np.linalg.svd(M)
    degenerate = sv[-2] < DEGENERACY_RATIO * sv[-1]
    null_vectors = [vh[-1].conj()] + ([vh[-2].conj()] if degenerate else [])

    logz = np.log(roots)
    grow = np.abs(roots) > 1
    shift = np.where(grow, -(N + 1), 0)
    m = np.arange(1, N + 1)
    basis = np.exp((m[:, None] + shift[None, :]) * logz[None, :])
    H = spec.dense()

    out = []
    for cs in null_vectors:
        psi = basis @ cs
        norm = np.linalg.norm(psi)
        psi = psi / norm
        # cs are coefficients of z^(m+shift); convert to the |z> basis
        scaled = cs * math.sqrt(N) / norm
        with np.errstate(over="ignore", under="ignore"):
            coeffs = scaled * np.exp(shift * logz)
            right = scaled * np.exp((N + 1 + shift) * logz)
        residual = float(np.abs(H @ psi - E * psi).max())
        out.append(BlochSolution(E, roots, coeffs, right, psi, residual, degenerate, z_ex))
    return out


def _real_det(spec, energies):
    vals = np.full(len(energies), np.nan, dtype=complex)
    for i, E in enumerate(energies):
        try:
            vals[i] = det_condition(spec, E)
        except ConditioningError:
            pass
    return vals


def _sign_change_roots(spec, lo, hi, n_grid, phase):
    grid = np.linspace(lo, hi, n_grid)
    vals = _real_det(spec, grid)
    g = np.real(vals * phase)
    roots = []
    for a, b, ga, gb in zip(grid[:-1], grid[1:], g[:-1], g[1:]):
        if not (np.isfinite(ga) and np.isfinite(gb)):
            continue
        if ga == 0:
            roots.append(a)
        elif ga * gb < 0:
            f = lambda E: float(np.real(det_condition(spec, E) * phase))
            roots.append(optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return np.array(roots)


def _global_phase(spec, lo, hi):
    vals = _real_det(spec, np.linspace(lo, hi, 97))
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        raise NumericalError("boundary determinant undefined across the scan window")
    # F is real up to a constant phase; squaring removes the sign ambiguity
    theta = 0.5 * np.angle(np.sum(vals**2 / np.abs(vals).max() ** 2))
    return np.exp(-1j * theta)


def solve_eigen_near(
    spec: BandedHamiltonianSpec,
    E0: float,
    count: int = 3,
    z_ex: complex | None = None,
    n_grid: int = 400,
) -> list[BlochSolution]:
    """The ``count`` eigenpairs of a Hermitian chain closest to ``E0``.

    Eigenvalues are bracketed by sign changes of the normalized boundary
    determinant on a grid around ``E0`` and polished with Brent's method.
    The grid is refined until the number of brackets stops changing, and the
    window is widened until it holds ``count`` eigenvalues.

    Raises
    ------
    ValueError
        Non-Hermitian spec or ``count`` outside 1..10.
    NumericalError
        No eigenvalue found in the admissible window, or an assembled state
        fails the residual check.
    """
    if not spec.is_hermitian:
        raise ValueError("solve_eigen_near requires a Hermitian spec")
    if not 1 <= count <= 10:
        raise ValueError(f"count must be in 1..10, got {count}")
    E0 = float(np.real(E0))
    bound = spec.norm_bound()
    h0 = float(np.real(spec.h0))
    reach = abs(E0 - h0) + bound
    half = bound / spec.n_sites**2
    phase = None
    found = np.empty(0)
    while True:
        lo, hi = E0 - half, E0 + half
        if phase is None:
            phase = _global_phase(spec, h0 - bound, h0 + bound)
        n = n_grid
        found = _sign_change_roots(spec, lo, hi, n, phase)
        for _ in range(6):
            finer = _sign_change_roots(spec, lo, hi, 2 * n - 1, phase)
            n = 2 * n - 1
            if len(finer) == len(found):
                found = finer
                break
            found = finer
        dist = np.sort(np.abs(found - E0))
        if len(found) >= count and dist[count - 1] < half:
            break
        if half > reach:
            if len(found) == 0:
                raise NumericalError(f"no eigenvalue found near E0={E0}")
            break
        half *= 2
    energies = found[np.argsort(np.abs(found - E0))][:count]

    solutions: list[BlochSolution] = []
    for E in energies:
        for sol in assemble(spec, float(E), z_ex=z_ex):
            if sol.residual > RESIDUAL_TOL * max(1.0, bound):
                raise NumericalError(
                    f"Bloch eigenpair at E={E:.15g} has residual {sol.residual:.3e}"
                )
            solutions.append(sol)
    return solutions


def bloch_vector(k: float, n_sites: int) -> np.ndarray:
    """Finite-lattice Bloch state ``N^-1/2 e^{ikm}``, ``m = 1..N`` (d = 1)."""
    m = np.arange(1, n_sites + 1)
    return np.exp(1j * k * m) / math.sqrt(n_sites)


def overlap_bloch(k: float, solution: BlochSolution) -> complex:
    """``<e^{ikd}|psi>`` from the geometric-series closed form."""
    N = solution.n_sites
    phase = np.exp(-1j * k)
    w = solution.roots * phase
    if np.any(np.abs(1 - w) < 1e-12):
        raise ValueError("resonant denominator: a bulk root coincides with e^{ikd}")
    tail = solution.right_coefficients * phase ** (N + 1)
    return complex(np.sum((solution.coefficients * w - tail) / (1 - w)) / N)


def overlap_bloch_direct(k: float, solution: BlochSolution) -> complex:
    return complex(np.vdot(bloch_vector(k, solution.n_sites), solution.state))


@dataclass(frozen=True)
class ToyMode:
    k: float
    energy: float
    state: np.ndarray = field(repr=False)


def toy_h1_modes(n_sites: int, h1: float = 1.0) -> list[ToyMode]:
    """All eigenpairs of the nearest-neighbour chain, labelled from k = pi/d.

    ``k_xi = (1 - xi/(N+1)) pi``, ``xi = 1..N``, energy ``2 h1 cos k_xi``,
    amplitudes ``sqrt(2/(N+1)) sin(k_xi m)``.
    """
    if n_sites < 2:
        raise ValueError("need at least two sites")
    N = n_sites
    m = np.arange(1, N + 1)
    modes = []
    for xi in range(1, N + 1):
        k = (1 - xi / (N + 1)) * math.pi
        state = math.sqrt(2 / (N + 1)) * np.sin(k * m)
        modes.append(ToyMode(k, 2 * h1 * math.cos(k), state))
    return modes


class ToyRegime(enum.Enum):
    S4 = "s4"
    S2 = "s2"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ToyH2Mode:
    label: float
    sqrt_delta: float
    delta: float
    energy: float
    eta: float | None = None


def toy_regime(h1: float, h2: float, rtol: float = 1e-12) -> ToyRegime:
    if abs(h1 - 4 * h2) <= rtol * abs(h1):
        return ToyRegime.S4
    return ToyRegime.S2 if h1 > 4 * h2 else ToyRegime.DEGENERATE


def toy_h2_rates_reference(regime, n_sites: int, h1: float, h2: float, count: int = 3):
    """Asymptotic band-edge eigenvalues of the next-nearest-neighbour chain.

    ``S4`` (``h1 = 4 h2``): ``sqrt(delta) = zeta pi/(N+2)`` with half-integer
    ``zeta``, energy ``omega(pi) + h2 delta^2``.

    ``S2`` (``h1 > 4 h2``): ``sqrt(delta) (N + 2 - (x+1)/(x-1)) = xi pi`` with
    ``x = a/2 + 1``, ``a = h1/h2 - 4``, energy ``omega(pi) + a h2 delta``.

    ``DEGENERATE`` (``h1 < 4 h2``): ``sqrt(delta) = xi pi (1 - eta)/(N+2)``
    with the oscillating correction ``eta``, energy ``omega(pi) - a h2 delta``,
    ``a = 4 - h1/h2``.
    """
    regime = ToyRegime(regime)
    if not h2 > 0 or not h1 > 0:
        raise ValueError("toy model needs positive h1 and h2")
    actual = toy_regime(h1, h2)
    if actual is not regime:
        raise ValueError(f"h1={h1}, h2={h2} is in regime {actual.value}, not {regime.value}")
    N = n_sites
    edge = -2 * h1 + 2 * h2
    modes = []
    for xi in range(1, count + 1):
        if regime is ToyRegime.S4:
            zeta = xi + 0.5
            sd = zeta * math.pi / (N + 2)
            modes.append(ToyH2Mode(zeta, sd, sd**2, edge + h2 * sd**4))
        elif regime is ToyRegime.S2:
            a = h1 / h2 - 4
            x = a / 2 + 1
            sd = xi * math.pi / (N + 2 - (x + 1) / (x - 1))
            modes.append(ToyH2Mode(xi, sd, sd**2, edge + a * h2 * sd**2))
        else:
            a = 4 - h1 / h2
            theta0 = math.atan2(math.sqrt(4 * a - a * a) / 2, (a - 2) / 2)
            sign = (-1) ** (xi + N)
            denom = sign * math.sin(theta0 * (N + 2))
            if abs(denom) < 1e-12:
                raise ValueError(f"eta is singular for N={N}: sin(theta0 (N+2)) vanishes")
            eta = math.tan(theta0 / 2) / (N + 2) * (1 - sign * math.cos(theta0 * (N + 2))) / denom
            sd = xi * math.pi / (N + 2) * (1 - eta)
            modes.append(ToyH2Mode(xi, sd, sd**2, edge - a * h2 * sd**2, eta))
    return modes
