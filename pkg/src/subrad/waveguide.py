"""Dimerized emitter array coupled to an ideal 1D waveguide.

Sites ``a_m`` and ``b_m`` sit at phases ``m k0 d`` and ``m k0 d + k0 d1``
along the guide, with ``d = d1 + d2``. The effective Hamiltonian is
``-(i/2) exp(i k0 |x - x'|)`` (units gamma_0). Its inverse is tridiagonal,
an SSH chain with alternating hoppings ``J = 1/sin(k0 d1)`` and
``J' = 1/sin(k0 d2)``, so the band structure and its gap closings follow
from the SSH model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .freespace import MAX_CELLS, ArrayGeometry, EffectiveHamiltonian, ModelKind

SINE_TOL = 1e-12
CRITICAL_TOL = 1e-8
CLOSED_FORM_TOL = 1e-10
LIGHT_LINE_GAP = 1e-9


@dataclass(frozen=True)
class WaveguideDimerSpec:
    """Waveguide dimer chain, phases in radians (``k0 d1``, ``k0 d2``)."""

    n_cells: int
    k0d1: float
    k0d2: float

    def __post_init__(self):
        if not (isinstance(self.n_cells, (int, np.integer)) and 1 <= self.n_cells <= MAX_CELLS):
            raise ValueError(f"n_cells must be an integer in [1, {MAX_CELLS}], got {self.n_cells!r}")
        if not (0 < self.k0d1 < 2 * math.pi and self.k0d2 > 0):
            raise ValueError(f"need 0 < k0d1 < 2 pi and k0d2 > 0, got {self.k0d1}, {self.k0d2}")

    @property
    def k0d(self) -> float:
        return self.k0d1 + self.k0d2

    @property
    def s1(self) -> float:
        return math.sin(self.k0d1)

    @property
    def s2(self) -> float:
        return math.sin(self.k0d2)

    def phases(self) -> np.ndarray:
        """Propagation phases ``k0 x`` in site order ``a_0, b_0, a_1, ...``."""
        m = np.arange(self.n_cells)[:, None] * self.k0d
        return (m + np.array([0.0, self.k0d1])[None, :]).ravel()

    def with_cells(self, n_cells: int) -> "WaveguideDimerSpec":
        return WaveguideDimerSpec(n_cells, self.k0d1, self.k0d2)


def build_h1d(spec: WaveguideDimerSpec) -> EffectiveHamiltonian:
    """Dense ``2N x 2N`` waveguide Hamiltonian ``-(i/2) e^{i k0 |x - x'|}``."""
    ph = spec.phases()
    H = -0.5j * np.exp(1j * np.abs(ph[:, None] - ph[None, :]))
    geometry = ArrayGeometry(ph / spec.k0d, spec.k0d, d1_over_d=spec.k0d1 / spec.k0d, cell_size=2)
    return EffectiveHamiltonian(H, geometry, ModelKind.WAVEGUIDE_1D)


def _check_sines(spec: WaveguideDimerSpec):
    for name, s in (("k0d1", spec.s1), ("k0d2", spec.s2)):
        if abs(s) < SINE_TOL:
            raise ValueError(f"sin({name}) vanishes: the SSH hopping 1/sin({name}) is singular")


@dataclass(frozen=True)
class SSHParams:
    a: complex
    J: float
    Jp: float
    e0: float

    def __iter__(self):
        return iter((self.a, self.J, self.Jp, self.e0))


def ssh_inverse_params(spec: WaveguideDimerSpec) -> SSHParams:
    """Parameters of the tridiagonal inverse of :func:`build_h1d` (units 1/gamma_0).

    ``a = i - cot(k0 d1)`` on the two end sites, ``e0 = -sin(k0 d)/(s1 s2)``
    elsewhere on the diagonal; hoppings alternate ``J = 1/s1`` (intra-cell)
    and ``J' = 1/s2`` (inter-cell).
    """
    _check_sines(spec)
    s1, s2 = spec.s1, spec.s2
    return SSHParams(1j - math.cos(spec.k0d1) / s1, 1 / s1, 1 / s2, -math.sin(spec.k0d) / (s1 * s2))


def ssh_matrix(spec: WaveguideDimerSpec) -> np.ndarray:
    """The tridiagonal matrix built from :func:`ssh_inverse_params`."""
    a, J, Jp, e0 = ssh_inverse_params(spec)
    n = 2 * spec.n_cells
    diag = np.full(n, e0, dtype=complex)
    diag[0] = diag[-1] = a
    off = np.where(np.arange(n - 1) % 2 == 0, J, Jp).astype(complex)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


@dataclass(frozen=True)
class TwoBandDispersion:
    """Bands and intra-cell spinors at one wavenumber ``k`` (units 1/d).

    ``u_plus = (1, e^{i phi})/sqrt 2`` belongs to ``omega_plus`` and
    ``u_minus = (1, -e^{i phi})/sqrt 2`` to ``omega_minus``.
    """

    k: float
    omega_plus: float
    omega_minus: float
    phi_k: float
    u_plus: np.ndarray = field(repr=False)
    u_minus: np.ndarray = field(repr=False)

    @property
    def gap(self) -> float:
        return abs(self.omega_plus - self.omega_minus)


def dispersion_pm(k: float, spec: WaveguideDimerSpec) -> TwoBandDispersion:
    """Two-band dispersion of the infinite chain.

    ``omega_pm = (1/2)[sin k0d pm sqrt(s1^2 + s2^2 + 2 s1 s2 cos k)] / (cos k - cos k0d)``
    with ``tan phi_k = sin k / (cos k + J/J')``.
    """
    _check_sines(spec)
    s1, s2 = spec.s1, spec.s2
    denom = math.cos(k) - math.cos(spec.k0d)
    if abs(denom) < LIGHT_LINE_GAP:
        raise ValueError(f"k = {k} lies on the light line cos(kd) = cos(k0 d)")
    # s1^2 + s2^2 + 2 s1 s2 cos k, written to avoid cancellation near the k = 0 gap closing
    root = math.sqrt(max((s1 + s2) ** 2 - 4 * s1 * s2 * math.sin(k / 2) ** 2, 0.0))
    wp = 0.5 * (math.sin(spec.k0d) + root) / denom
    wm = 0.5 * (math.sin(spec.k0d) - root) / denom
    # the cell-to-cell coupling of the inverse is J + J' e^{ik}; its sign
    # relative to e0 decides which spinor sits in the upper band
    sigma = 1.0 if s1 * s2 > 0 else -1.0
    q = sigma * (1 / s1 + np.exp(1j * k) / s2)
    phi = float(np.angle(q)) if abs(q) > 0 else 0.0
    e = np.exp(1j * phi)
    up = np.array([1, e]) / math.sqrt(2)
    um = np.array([1, -e]) / math.sqrt(2)
    return TwoBandDispersion(k, wp, wm, phi, up, um)


class CriticalKind(enum.Enum):
    NONE = "none"
    K_ZERO = "k=0"
    K_PI = "k=pi/d"


@dataclass(frozen=True)
class CriticalFamily:
    kind: CriticalKind
    condition: str
    geometry: str


def critical_points() -> list[CriticalFamily]:
    """The two families of gap-closing dimerizations."""
    return [
        CriticalFamily(CriticalKind.K_PI, "sin(k0 d1) = sin(k0 d2)", "d1 = d2"),
        CriticalFamily(CriticalKind.K_ZERO, "sin(k0 d1) = -sin(k0 d2)", "d1 = d2 +/- pi/k0"),
    ]


def classify_critical(spec: WaveguideDimerSpec, tol: float = CRITICAL_TOL) -> CriticalKind:
    s1, s2 = spec.s1, spec.s2
    if abs(s1 - s2) <= tol:
        return CriticalKind.K_PI
    if abs(s1 + s2) <= tol:
        return CriticalKind.K_ZERO
    return CriticalKind.NONE


def band_center(spec: WaveguideDimerSpec) -> float:
    """Midpoint of the two bands at ``k = 0``: ``sin k0d / (2 (1 - cos k0d))``."""
    return 0.5 * math.sin(spec.k0d) / (1 - math.cos(spec.k0d))


@dataclass(frozen=True)
class CriticalDecay:
    """Closed-form rates and shifts of the near-``k = 0`` states at criticality."""

    n_cells: int
    gamma_plus: float
    gamma_minus: float
    xi: np.ndarray
    omega_plus: np.ndarray
    omega_minus: np.ndarray


def _check_k_zero_critical(spec: WaveguideDimerSpec):
    s1 = spec.s1
    if abs(s1 + spec.s2) > CLOSED_FORM_TOL:
        raise ValueError(
            f"spec is not at the k=0 critical point: sin(k0d1) + sin(k0d2) = {s1 + spec.s2:.3e}"
        )
    if not 0 < s1 < 1:
        raise ValueError(f"closed form needs 0 < sin(k0d1) < 1, got {s1}")


def _shifts(spec, n_cells, xi):
    xi = np.asarray(xi, dtype=float)
    pref = 0.5 / (1 - math.cos(spec.k0d))
    step = xi * math.pi / n_cells * spec.s1
    return xi, pref * (math.sin(spec.k0d) + step), pref * (math.sin(spec.k0d) - step)


def critical_decay_closed_form(
    spec: WaveguideDimerSpec, n_cells: int | None = None, xi=(1, 2, 3)
) -> CriticalDecay:
    """Published band-resolved rates at ``sin(k0 d1) = -sin(k0 d2)``.

    ``gamma_minus = (1/4N) cot(k0 d1) ln((1 + s1)/(1 - s1))`` and
    ``gamma_plus = -(1/4N) cot(k0 d1) ln((1 - s1)/(1 + s1))`` (the same
    value); shifts ``omega_pm(xi) = (sin k0d pm xi pi s1 / N) / (2 (1 - cos k0d))``.

    These do not follow from the quantization condition they are derived
    from; see :func:`critical_decay_quantized` for the rate it implies.
    """
    _check_k_zero_critical(spec)
    N = spec.n_cells if n_cells is None else int(n_cells)
    s1 = spec.s1
    cot = math.cos(spec.k0d1) / s1
    gm = cot / (4 * N) * math.log((1 + s1) / (1 - s1))
    gp = -cot / (4 * N) * math.log((1 - s1) / (1 + s1))
    xi, wp, wm = _shifts(spec, N, xi)
    return CriticalDecay(N, gp, gm, xi, wp, wm)


def critical_decay_quantized(
    spec: WaveguideDimerSpec, n_cells: int | None = None, xi=(1, 2, 3)
) -> CriticalDecay:
    """Rates implied by the complex wavenumbers of the finite chain.

    The boundary condition fixes ``k = (pi/N)(xi + i ln((1 - s1)/(1 + s1))/(2 pi))``
    near ``k = 0``; inserting it in the linear dispersion
    ``omega_pm ~ E_c pm s1 k / (2 (1 - cos k0d))`` gives
    ``gamma = s1 ln((1 + s1)/(1 - s1)) / (2 N (1 - cos k0d))`` for both bands.
    """
    _check_k_zero_critical(spec)
    N = spec.n_cells if n_cells is None else int(n_cells)
    s1 = spec.s1
    g = s1 * math.log((1 + s1) / (1 - s1)) / (2 * N * (1 - math.cos(spec.k0d)))
    xi, wp, wm = _shifts(spec, N, xi)
    return CriticalDecay(N, g, g, xi, wp, wm)
