"""From spectra to headline numbers: subradiant rates, scaling sweeps, fits.

Wavenumbers are in units of 1/d, where ``d`` is the unit-cell length (the
lattice constant for regular arrays, the dimer period otherwise). Rates
are in units of gamma_0.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dispersion, freespace, waveguide
from .bloch import BandedHamiltonianSpec
from .errors import NumericalError
from .freespace import EffectiveHamiltonian
from .linalg import SpectralDecomposition, eigendecompose, infidelity

log = logging.getLogger(__name__)

K_GRID_FACTOR = 8
MIN_FIT_SAMPLES = 4
PAIRING_TOL = 1e-3
OSCILLATION_FLOOR = 1e-6


def _wrap(k):
    return np.angle(np.exp(1j * np.asarray(k)))


def dominant_wavenumbers(vectors: np.ndarray, cell_size: int = 1, n_k: int | None = None):
    """Dominant Bloch wavenumber of each eigenvector column.

    The cell-resolved Fourier weight ``sum_mu |sum_m e^{-ikm} v_{m,mu}|^2`` is
    maximized over a grid of ``n_k`` points on ``[-pi, pi)``, default
    ``8 x n_cells``. Returns the wavenumbers and the normalized weights
    ``weight / n_cells`` at the maximum.
    """
    vectors = np.asarray(vectors)
    n_cells = vectors.shape[0] // cell_size
    n_k = n_k or K_GRID_FACTOR * n_cells
    ks = np.linspace(-math.pi, math.pi, n_k, endpoint=False)
    F = np.exp(-1j * np.outer(ks, np.arange(n_cells)))
    power = sum(np.abs(F @ vectors[mu::cell_size]) ** 2 for mu in range(cell_size))
    best = np.argmax(power, axis=0)
    return ks[best], power[best, np.arange(power.shape[1])] / n_cells


@dataclass(frozen=True)
class Selector:
    """Which eigenstate counts as "most subradiant".

    Without ``k_center`` the global minimum rate is taken. Otherwise only
    states whose dominant wavenumber lies within ``window_modes * pi / n_cells``
    of ``k_center`` compete. ``band = +1 / -1`` further keeps states whose
    energy lies above / below ``band_split``.
    """

    k_center: float | None = None
    window_modes: float = 1.0
    band: int | None = None
    band_split: float | None = None

    def __post_init__(self):
        if self.band not in (None, 1, -1):
            raise ValueError(f"band must be +1, -1 or None, got {self.band}")
        if self.band is not None and self.band_split is None:
            raise ValueError("band selection needs a band_split energy")
        if not self.window_modes > 0:
            raise ValueError("window_modes must be positive")


@dataclass(frozen=True)
class SubradiantState:
    value: complex
    index: int
    k_dominant: float
    weight: float

    @property
    def gamma(self) -> float:
        return -2.0 * self.value.imag


def most_subradiant(
    spectrum: SpectralDecomposition, selector: Selector | None = None, cell_size: int = 1
) -> SubradiantState:
    """Minimum-rate eigenstate, optionally restricted to a k-window and band.

    Raises
    ------
    ValueError
        No eigenstate falls inside the window.
    """
    selector = selector or Selector()
    ks, weights = dominant_wavenumbers(spectrum.vectors, cell_size)
    mask = np.ones(len(spectrum), dtype=bool)
    if selector.k_center is not None:
        n_cells = spectrum.vectors.shape[0] // cell_size
        half = selector.window_modes * math.pi / n_cells
        mask &= np.abs(_wrap(ks - selector.k_center)) <= half + 1e-12
    if selector.band is not None:
        mask &= selector.band * (spectrum.values.real - selector.band_split) > 0
    candidates = np.flatnonzero(mask)
    if len(candidates) == 0:
        raise ValueError(f"empty window: no eigenstate selected by {selector}")
    # spectrum is sorted by rate, so the first candidate is the minimum
    i = int(candidates[0])
    return SubradiantState(complex(spectrum.values[i]), i, float(ks[i]), float(weights[i]))


@dataclass(frozen=True)
class PowerLawFit:
    """``gamma = prefactor * N^-alpha`` by least squares in log-log space."""

    alpha: float
    prefactor: float
    r_squared: float
    window: tuple[int, int]
    n_samples: int
    max_rel_residual: float
    oscillating: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "prefactor": self.prefactor,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_samples": self.n_samples,
            "max_rel_residual": self.max_rel_residual,
            "oscillating": self.oscillating,
        }


def _alternating_component(residuals: np.ndarray) -> tuple[float, float]:
    n = len(residuals)
    alt = (-1.0) ** np.arange(n)
    amp = float(residuals @ alt / n)
    rest = residuals - amp * alt
    dof = max(n - 3, 1)
    stderr = math.sqrt(float(rest @ rest) / dof / n)
    return amp, stderr


def fit_power_law(N, gamma=None, window: tuple[int, int] = (50, 400)) -> PowerLawFit:
    """Ordinary least squares of ``ln gamma`` on ``ln N`` inside ``window``.

    ``N`` may be a :class:`ScalingSeries` (then ``gamma`` is omitted). The
    series is flagged as oscillating when the sample-to-sample alternating
    component of the residuals exceeds three times its standard error.

    Raises
    ------
    ValueError
        Fewer than 4 samples in the window or non-positive rates.
    """
    if isinstance(N, ScalingSeries):
        N, gamma = N.N, N.gamma
    N = np.asarray(N, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if N.shape != gamma.shape:
        raise ValueError("N and gamma must have the same length")
    lo, hi = window
    keep = (N >= lo) & (N <= hi)
    if keep.sum() < MIN_FIT_SAMPLES:
        raise ValueError(
            f"insufficient samples: {keep.sum()} in window {window}, need {MIN_FIT_SAMPLES}"
        )
    x, g = np.log(N[keep]), gamma[keep]
    if np.any(g <= 0):
        raise ValueError("power-law fit needs strictly positive rates")
    y = np.log(g)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    amp, stderr = _alternating_component(resid)
    oscillating = abs(amp) > OSCILLATION_FLOOR and abs(amp) > 3 * stderr
    return PowerLawFit(
        alpha=float(-slope),
        prefactor=float(math.exp(intercept)),
        r_squared=float(r2),
        window=(int(lo), int(hi)),
        n_samples=int(keep.sum()),
        max_rel_residual=float(np.abs(np.expm1(resid)).max()),
        oscillating=bool(oscillating),
    )


@dataclass(frozen=True)
class ModelFamily:
    """A size-indexed family of Hamiltonians plus its default selector."""

    tag: str
    params: dict
    build: Callable[[int], EffectiveHamiltonian] = field(repr=False)
    cell_size: int
    selectors: dict

    def dim(self, n: int) -> int:
        return self.cell_size * n


def regular_family(k0d: float) -> ModelFamily:
    return ModelFamily(
        "free_space_regular",
        {"k0d": k0d},
        lambda n: freespace.build_regular(n, k0d),
        1,
        {"global": Selector()},
    )


def dimer_family(k0d: float, d1_over_d: float, window_modes: float = 1.0) -> ModelFamily:
    """Free-space dimer chain; bands near ``k = pi/d`` split at the regular-array shift."""
    split = dispersion.omega_k(math.pi, k0d)
    sel = {
        "upper": Selector(math.pi, window_modes, 1, split),
        "lower": Selector(math.pi, window_modes, -1, split),
    }
    return ModelFamily(
        "free_space_dimer",
        {"k0d": k0d, "d1_over_d": d1_over_d},
        lambda n: freespace.build_dimer(n, k0d, d1_over_d),
        2,
        sel,
    )


def waveguide_family(k0d1: float, k0d2: float, window_modes: float = 1.5) -> ModelFamily:
    """Waveguide dimer chain; bands near ``k = 0`` split at their midpoint."""
    split = waveguide.band_center(waveguide.WaveguideDimerSpec(1, k0d1, k0d2))
    sel = {
        "upper": Selector(0.0, window_modes, 1, split),
        "lower": Selector(0.0, window_modes, -1, split),
    }
    return ModelFamily(
        "waveguide_dimer",
        {"k0d1": k0d1, "k0d2": k0d2},
        lambda n: waveguide.build_h1d(waveguide.WaveguideDimerSpec(n, k0d1, k0d2)),
        2,
        sel,
    )


@dataclass(frozen=True)
class ScalingSample:
    N: int
    gamma_min: float
    omega: float
    k_dominant: float
    weight: float
    seconds: float = field(compare=False)


@dataclass(frozen=True)
class ScalingSeries:
    """Most subradiant rate per size for one model family and selector.

    ``truncated`` marks a sweep stopped by the eigensolve budget.
    """

    model_tag: str
    selector: str
    params: dict
    samples: tuple
    truncated: bool = False

    def __post_init__(self):
        Ns = [s.N for s in self.samples]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("sample sizes must be strictly increasing")
        bad = [s.N for s in self.samples if not s.gamma_min > 0]
        if bad:
            raise NumericalError(f"non-positive subradiant rate at N = {bad}")

    @property
    def N(self) -> np.ndarray:
        return np.array([s.N for s in self.samples])

    @property
    def gamma(self) -> np.ndarray:
        return np.array([s.gamma_min for s in self.samples])

    def rows(self):
        return [(s.N, s.gamma_min, s.omega, s.k_dominant / math.pi, s.weight) for s in self.samples]


SERIES_HEADER = ("N", "gamma_min[gamma0]", "omega[gamma0]", "k_dominant[pi/d]", "bloch_weight")


def solve_cost(dim: int) -> float:
    """Budget units of one dense eigensolve: ``(dim/1000)^3``."""
    return (dim / 1000.0) ** 3


def scaling_sweep(
    family: ModelFamily,
    N_list,
    selectors=None,
    budget: float | None = None,
    jobs: int = 1,
) -> dict[str, ScalingSeries]:
    """Most subradiant rate for every ``N`` and every selector of ``family``.

    Each size is diagonalized once and all selectors read the same spectrum.
    Sizes run concurrently on ``jobs`` threads; results are gathered in
    ``N`` order, so the output does not depend on ``jobs``. If ``budget`` (in
    :func:`solve_cost` units) would be exceeded, the sweep stops before that
    size and every series is marked truncated.
    """
    Ns = [int(n) for n in N_list]
    if not Ns:
        raise ValueError("N_list is empty")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_list must be strictly ascending")
    names = list(family.selectors) if selectors is None else list(selectors)
    unknown = set(names) - set(family.selectors)
    if unknown:
        raise ValueError(f"unknown selectors {sorted(unknown)} for {family.tag}")

    planned, spent = [], 0.0
    for n in Ns:
        cost = solve_cost(family.dim(n))
        if budget is not None and spent + cost > budget:
            log.warning("%s: budget %.3g exhausted before N=%d; truncating", family.tag, budget, n)
            break
        planned.append(n)
        spent += cost
    truncated = len(planned) < len(Ns)

    def work(n):
        t0 = time.perf_counter()
        spec = eigendecompose(family.build(n).matrix)
        states = {
            name: most_subradiant(spec, family.selectors[name], family.cell_size) for name in names
        }
        dt = time.perf_counter() - t0
        log.info("%s N=%d solved in %.2fs", family.tag, n, dt)
        return states, dt

    if jobs > 1 and len(planned) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, planned))
    else:
        results = [work(n) for n in planned]

    out = {}
    for name in names:
        samples = tuple(
            ScalingSample(n, st[name].gamma, st[name].value.real, st[name].k_dominant, st[name].weight, dt)
            for n, (st, dt) in zip(planned, results)
        )
        out[name] = ScalingSeries(family.tag, name, dict(family.params), samples, truncated)
    return out


@dataclass(frozen=True)
class InfidelitySample:
    N: int
    infidelity: float
    ambiguous: bool
    reference_index: int


def reference_states(reference: str, n: int) -> np.ndarray:
    """Eigenvectors (columns) of the banded reference chain.

    Only eigenvector geometry matters, so hoppings are fixed at ``h1 = 1``
    for ``"H1"`` and ``h1 = 1, h2 = 1/4`` for ``"H2_s4"``.
    """
    if reference == "H1":
        spec = BandedHamiltonianSpec.hermitian(n, [1.0])
    elif reference == "H2_s4":
        spec = BandedHamiltonianSpec.hermitian(n, [1.0, 0.25])
    else:
        raise ValueError(f"unknown reference model {reference!r}; use 'H1' or 'H2_s4'")
    _, vecs = np.linalg.eigh(spec.dense())
    return vecs


def infidelity_series(k0d: float, N_list, reference: str, jobs: int = 1) -> list[InfidelitySample]:
    """Infidelity of the most subradiant state against its closest reference state.

    The partner is the reference eigenvector of maximal overlap. A sample is
    flagged ambiguous when the two best overlaps differ by less than 1e-3.
    """
    if reference == "H2_s4":
        s = dispersion.band_edge_expansion(k0d).s
        if s != 4:
            raise ValueError(f"H2_s4 reference needs a quartic band edge; k0d={k0d} gives s={s}")

    def work(n):
        spec = eigendecompose(freespace.build_regular(int(n), k0d).matrix)
        psi = spec.vectors[:, most_subradiant(spec).index]
        refs = reference_states(reference, int(n))
        ov = np.abs(refs.conj().T @ psi)
        order = np.argsort(ov)[::-1]
        best = int(order[0])
        ambiguous = len(order) > 1 and ov[order[0]] - ov[order[1]] < PAIRING_TOL
        return InfidelitySample(int(n), infidelity(refs[:, best], psi), bool(ambiguous), best)

    Ns = [int(n) for n in N_list]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, Ns))
    return [work(n) for n in Ns]
