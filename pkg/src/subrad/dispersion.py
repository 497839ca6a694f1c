"""Band structure of the infinite regular array.

The lattice sum of the transverse coupling is written with polylogarithms
of ``exp(i (k0 +/- k) d)``. Derivatives in ``k`` follow from
``d Li_s(z) / dz = Li_{s-1}(z) / z``, so every Taylor coefficient at the
band edge is available in closed form, not just the second one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import NumericalError

K_EX = math.pi
SINGULAR_GAP = 1e-6
DEGREE_THRESHOLD = 1e-6

_SERIES_TERMS = 64
_MU_TERMS = 110


@lru_cache(maxsize=None)
def _zeta_table(n_max: int) -> np.ndarray:
    """zeta(-n) for n = 0..n_max."""
    B = special.bernoulli(n_max + 1)
    n = np.arange(n_max + 1)
    out = -B[n + 1] / (n + 1)
    out[0] = -0.5
    return out


def _zeta(s: int) -> float:
    if s <= 0:
        return float(_zeta_table(_MU_TERMS)[-s])
    return float(special.zeta(s, 1))


@lru_cache(maxsize=None)
def _eulerian(n: int) -> tuple[int, ...]:
    """Eulerian numbers A(n, k) for k = 0..n-1."""
    row = [1]
    for m in range(2, n + 1):
        row = [
            (k + 1) * (row[k] if k < len(row) else 0) + (m - k) * (row[k - 1] if k >= 1 else 0)
            for k in range(m)
        ]
    return tuple(row)


def _li_nonpositive(order: int, z: np.ndarray) -> np.ndarray:
    n = -order
    if n == 0:
        return z / (1 - z)
    num = sum(a * z ** (k + 1) for k, a in enumerate(_eulerian(n)))
    return num / (1 - z) ** (n + 1)


def _li_mu_series(order: int, mu: np.ndarray) -> np.ndarray:
    """Expansion of Li_s(e^mu) about mu = 0, valid for |mu| < 2 pi."""
    s = order
    harmonic = sum(1.0 / j for j in range(1, s))
    out = mu ** (s - 1) / math.factorial(s - 1) * (harmonic - np.log(-mu))
    power = np.ones_like(mu)
    for k in range(_MU_TERMS):
        if k != s - 1:
            out = out + _zeta(s - k) * power
        power = power * mu / (k + 1)
    return out


def polylog(order: int, z):
    """Polylogarithm ``Li_order(z)`` on the closed unit disk.

    Orders 1 and below use closed forms (``-log(1-z)`` and the Eulerian
    rational functions). Orders 2 and 3 use the power series for
    ``|z| < 1/2`` and the expansion in ``log z`` elsewhere.

    Raises
    ------
    ValueError
        ``|z| > 1``, or ``z`` within 1e-9 of the pole at 1 for order <= 1.
    """
    if order > 3:
        raise ValueError(f"orders above 3 are not supported, got {order}")
    zin = np.asarray(z, dtype=complex)
    z = np.atleast_1d(zin)
    if np.any(np.abs(z) > 1 + 1e-12):
        raise ValueError("polylog is only defined here on the closed unit disk")
    if order <= 1:
        dist = np.abs(1 - z).min()
        if dist <= 1e-9:
            raise ValueError(f"Li_{order} is singular at z = 1 (|1 - z| = {dist:.3e})")
        out = -np.log1p(-z) if order == 1 else _li_nonpositive(order, z)
    else:
        out = np.empty_like(z)
        small = np.abs(z) < 0.5
        if small.any():
            zs = z[small]
            n = np.arange(1, _SERIES_TERMS + 1)
            out[small] = (zs[:, None] ** n / n**order).sum(axis=1)
        big = ~small
        if big.any():
            mu = np.log(z[big])
            at_one = mu == 0
            mu = np.where(at_one, 1.0, mu)
            vals = _li_mu_series(order, mu)
            out[big] = np.where(at_one, _zeta(order), vals)
    return out.reshape(zin.shape) if zin.ndim else complex(out[0])


def _check_k0d(k0d: float):
    if not 0 < k0d < math.pi:
        raise ValueError(f"k0d must lie in (0, pi), got {k0d}")


def lattice_sum(k, k0d: float, derivative: int = 0):
    """``d^n/dk^n`` of ``sum_{r != 0} G(|r| d) e^{i k r d}`` (complex).

    ``G`` is the transverse coupling of :mod:`subrad.freespace`. The infinite
    array eigenvalue at wavenumber ``k`` is ``-i/2 + lattice_sum(k)``.
    """
    _check_k0d(k0d)
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(np.abs(k) - k0d) < SINGULAR_GAP):
        raise ValueError("k lies on the light-line singularity |k| = k0")
    total = np.zeros(k.shape, dtype=complex)
    for eps in (1, -1):
        z = np.exp(1j * (k0d + eps * k))
        for xi in (1, 2, 3):
            pref = 1j * (1j / k0d) ** xi * (1j * eps) ** derivative
            total = total + pref * polylog(xi - derivative, z)
    total = 0.75 * total
    return total if total.ndim else complex(total)


def omega_k(k, k0d: float):
    """Collective energy shift of the Bloch mode ``k`` (units gamma_0)."""
    out = np.real(lattice_sum(k, k0d))
    return out if np.ndim(out) else float(out)


def gamma_k(k, k0d: float):
    """Collective decay rate of the Bloch mode ``k``.

    ``3 pi / (4 k0 d) * (1 + k^2 / k0^2)`` inside the light cone, exactly
    zero outside it.
    """
    _check_k0d(k0d)
    k = np.asarray(k, dtype=float)
    inside = np.abs(k) <= k0d
    out = np.where(inside, 0.75 * math.pi / k0d * (1 + (k / k0d) ** 2), 0.0)
    return out if out.ndim else float(out)


def omega_derivative(k, k0d: float, order: int):
    out = np.real(lattice_sum(k, k0d, derivative=order))
    return out if np.ndim(out) else float(out)


def a2_closed_form(k0d: float) -> float:
    """Second-order Taylor coefficient of omega_k at k = pi/d (units gamma_0 d^2).

    The bracket is ``ln(2 cos(x/2)) + (x/2) tan(x/2) - (x/2)^2 / cos^2(x/2)``
    with ``x = k0 d``; the second derivative is ``3 / (2 x^3)`` times it.
    """
    _check_k0d(k0d)
    h = k0d / 2
    c = math.cos(h)
    second = 1.5 / k0d**3 * (math.log(2 * c) + h * math.tan(h) - h * h / (c * c))
    return 0.5 * second


def a4_coefficient(k0d: float) -> float:
    """Fourth-order Taylor coefficient at k = pi/d, from the derivative identity."""
    return omega_derivative(K_EX, k0d, 4) / 24.0


def find_k4(lo: float = 0.40 * math.pi, hi: float = 0.55 * math.pi) -> float:
    """Resonance wavenumber (as ``k0 d``) where the quadratic band-edge term vanishes."""
    f_lo, f_hi = a2_closed_form(lo), a2_closed_form(hi)
    if f_lo * f_hi > 0:
        raise NumericalError(
            f"a2 does not change sign on [{lo / math.pi:.3f}, {hi / math.pi:.3f}] pi/d"
        )
    return optimize.bisect(a2_closed_form, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class BandEdgeExpansion:
    """Taylor data of omega_k at the band edge ``k_ex``.

    ``s`` is the order of the first coefficient above 1e-6 in magnitude and
    ``a_s`` that coefficient. Coefficients are Taylor coefficients
    (derivative divided by factorial).
    """

    k0d: float
    k_ex: float
    s: int
    a_s: float
    a2: float
    a4: float
    degenerate: bool


def band_edge_expansion(k0d: float) -> BandEdgeExpansion:
    a2 = a2_closed_form(k0d)
    a4 = a4_coefficient(k0d)
    if abs(a2) > DEGREE_THRESHOLD:
        s, a_s = 2, a2
    elif abs(a4) > DEGREE_THRESHOLD:
        s, a_s = 4, a4
    else:
        raise NumericalError(f"band-edge degree undetermined at k0d = {k0d}: a2 and a4 both vanish")
    # a local minimum at pi/d is degenerate with modes near the light line,
    # where omega_k diverges to -infinity
    degenerate = a2 > DEGREE_THRESHOLD and a4 < 0
    return BandEdgeExpansion(k0d, K_EX, s, a_s, a2, a4, degenerate)


@dataclass(frozen=True)
class DispersionCurve:
    """Sampled ``omega_k`` and ``gamma_k`` on ``[-pi/d, pi/d]``.

    ``skipped`` lists grid points dropped because they fall within 1e-6 of
    the light line.
    """

    k0d: float
    k: np.ndarray
    omega: np.ndarray
    gamma: np.ndarray
    skipped: np.ndarray = field(default_factory=lambda: np.empty(0))


def dispersion_curve(k0d: float, n_points: int = 401) -> DispersionCurve:
    _check_k0d(k0d)
    grid = np.linspace(-math.pi, math.pi, n_points)
    bad = np.abs(np.abs(grid) - k0d) < SINGULAR_GAP
    k = grid[~bad]
    return DispersionCurve(k0d, k, omega_k(k, k0d), gamma_k(k, k0d), grid[bad])
