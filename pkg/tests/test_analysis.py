import math

import numpy as np
import pytest

from subrad import analysis
from subrad.analysis import (
    ScalingSample,
    ScalingSeries,
    Selector,
    dominant_wavenumbers,
    fit_power_law,
    infidelity_series,
    most_subradiant,
    regular_family,
    scaling_sweep,
)
from subrad.dispersion import band_edge_expansion, find_k4
from subrad.errors import NumericalError
from subrad.freespace import build_regular
from subrad.linalg import eigendecompose
from subrad.waveguide import WaveguideDimerSpec, build_h1d

PI = math.pi


def test_single_emitter_rate_is_one():
    s = most_subradiant(eigendecompose(build_regular(1, 1.0).matrix))
    assert s.gamma == pytest.approx(1.0)


def test_mirror_pair_is_dark():
    d = eigendecompose(build_h1d(WaveguideDimerSpec(1, PI, 0.5)).matrix)
    assert most_subradiant(d, cell_size=2).gamma == pytest.approx(0.0, abs=1e-15)


def test_n_cubed_trend_at_055pi():
    g = [most_subradiant(eigendecompose(build_regular(n, 0.55 * PI).matrix)).gamma for n in (100, 200)]
    assert g[0] * 100**3 == pytest.approx(g[1] * 200**3, rel=0.2)


def test_dominant_wavenumber_of_plane_wave():
    n = 64
    k = 2 * PI * 5 / n
    v = np.exp(1j * k * np.arange(n))[:, None] / math.sqrt(n)
    ks, w = dominant_wavenumbers(v)
    assert ks[0] == pytest.approx(k)
    assert w[0] == pytest.approx(1.0)


def test_selector_stays_at_band_edge():
    for n in (100, 200, 400):
        d = eigendecompose(build_regular(n, 0.55 * PI).matrix)
        s = most_subradiant(d)
        assert abs(abs(s.k_dominant) - PI) <= 3 * PI / n


def test_window_and_band_selection():
    d = eigendecompose(build_regular(80, 0.55 * PI).matrix)
    inside = most_subradiant(d, Selector(k_center=0.2 * PI, window_modes=2))
    assert abs(inside.k_dominant - 0.2 * PI) <= 2 * PI / 80 + 1e-12
    assert inside.gamma > most_subradiant(d).gamma
    with pytest.raises(ValueError, match="empty window"):
        most_subradiant(d, Selector(k_center=0.2 * PI, band=1, band_split=1e9))
    with pytest.raises(ValueError):
        Selector(band=1)


def test_exact_power_law_fit():
    N = np.array([50, 71, 100, 141, 200])
    fit = fit_power_law(N, 7 * N**-3.0)
    assert fit.alpha == pytest.approx(3, abs=1e-12)
    assert fit.prefactor == pytest.approx(7, rel=1e-10)
    assert fit.r_squared == pytest.approx(1, abs=1e-12)
    assert fit.max_rel_residual < 1e-12
    assert not fit.oscillating


def test_oscillating_power_law_is_flagged():
    N = np.arange(50, 81)
    gamma = N**-3.0 * (1 + 0.3 * (-1.0) ** N)
    fit = fit_power_law(N, gamma)
    assert fit.alpha == pytest.approx(3, abs=0.1)
    assert fit.oscillating


def test_fit_matches_closed_form_ols(rng):
    N = np.array([50, 60, 80, 120, 200, 300])
    gamma = N**-2.5 * np.exp(rng.normal(scale=0.05, size=6))
    x, y = np.log(N), np.log(gamma)
    slope = np.sum((x - x.mean()) * (y - y.mean())) / np.sum((x - x.mean()) ** 2)
    assert fit_power_law(N, gamma).alpha == pytest.approx(-slope, rel=1e-12)


def test_fit_errors():
    with pytest.raises(ValueError, match="insufficient"):
        fit_power_law([50, 60, 70], [1, 2, 3])
    with pytest.raises(ValueError, match="insufficient"):
        fit_power_law([10, 20, 30, 40, 500], np.ones(5))
    with pytest.raises(ValueError, match="positive"):
        fit_power_law([50, 60, 70, 80], [1, 0, 1, 1])


def test_series_invariants():
    mk = lambda n, g: ScalingSample(n, g, 0.0, PI, 1.0, 0.0)
    with pytest.raises(ValueError, match="increasing"):
        ScalingSeries("t", "global", {}, (mk(100, 1e-3), mk(50, 1e-2)))
    with pytest.raises(NumericalError):
        ScalingSeries("t", "global", {}, (mk(50, 1e-3), mk(100, 0.0)))


def test_sweep_is_deterministic_across_job_counts():
    fam = regular_family(0.3 * PI)
    a = scaling_sweep(fam, [20, 30, 40, 50], jobs=1)["global"]
    b = scaling_sweep(fam, [20, 30, 40, 50], jobs=4)["global"]
    assert a.rows() == b.rows()
    assert list(a.N) == [20, 30, 40, 50]


def test_sweep_budget_truncates():
    fam = regular_family(0.55 * PI)
    budget = analysis.solve_cost(50) + analysis.solve_cost(100) + 1e-9
    s = scaling_sweep(fam, [50, 100, 200], budget=budget)["global"]
    assert s.truncated
    assert list(s.N) == [50, 100]
    with pytest.raises(ValueError):
        scaling_sweep(fam, [100, 50])


def test_exponent_degree_law():
    Ns = [50, 71, 100, 141, 200, 283, 400]
    for k0d, grid in ((0.3 * PI, Ns), (0.55 * PI, Ns), (find_k4(), [50, 71, 100, 141, 200, 300])):
        s = band_edge_expansion(k0d).s
        fit = fit_power_law(scaling_sweep(regular_family(k0d), grid, jobs=4)["global"])
        assert abs(fit.alpha - (s + 1)) <= 0.5


def test_infidelity_slope_and_pairing():
    samples = infidelity_series(0.55 * PI, [50, 100, 200], "H1", jobs=3)
    assert not any(s.ambiguous for s in samples)
    vals = [s.infidelity for s in samples]
    slope = np.polyfit(np.log([50, 100, 200]), np.log(vals), 1)[0]
    assert -2.5 <= slope <= -1.5


def test_infidelity_reference_checks():
    with pytest.raises(ValueError, match="quartic"):
        infidelity_series(0.55 * PI, [50], "H2_s4")
    with pytest.raises(ValueError, match="reference"):
        infidelity_series(0.55 * PI, [50], "H3")


def test_infidelity_flags_ambiguous_pairing(monkeypatch):
    # two identical reference vectors make the pairing ambiguous by construction
    def twin(reference, n):
        v = np.zeros((n, n))
        v[:, 0] = v[:, 1] = 1 / math.sqrt(n)
        return v

    monkeypatch.setattr(analysis, "reference_states", twin)
    s = infidelity_series(0.55 * PI, [20], "H1")[0]
    assert s.ambiguous
