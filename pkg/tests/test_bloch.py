import json
import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subrad.bloch import (
    BandedHamiltonianSpec,
    ConditioningError,
    ToyRegime,
    boundary_matrix,
    bulk_roots,
    det_condition,
    omega_tilde,
    overlap_bloch,
    overlap_bloch_direct,
    solve_eigen_near,
    toy_h1_modes,
    toy_h2_rates_reference,
    toy_regime,
)
from subrad.errors import NumericalError
from subrad.linalg import infidelity


def chain(n, *hops, h0=0.0):
    return BandedHamiltonianSpec.hermitian(n, list(hops), h0)


def dense_pairs(spec):
    vals, vecs = np.linalg.eigh(spec.dense())
    return vals, vecs


# ---------------------------------------------------------------- spec and symbol


def test_spec_validation():
    with pytest.raises(ValueError, match="R < N/2"):
        chain(4, 1.0, 0.5)
    with pytest.raises(ValueError):
        BandedHamiltonianSpec(10, ((1.0, 1.0), (0.0, 0.0)))
    assert chain(10, 1.0, 0.5).is_hermitian
    assert not BandedHamiltonianSpec(10, ((1.0, 2.0),)).is_hermitian


def test_omega_tilde_examples():
    k = 0.37
    assert omega_tilde(chain(10, 1.0), np.exp(1j * k)) == pytest.approx(2 * math.cos(k))
    assert omega_tilde(chain(10, 1.0, 0.25), -1) == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        omega_tilde(chain(10, 1.0), 0)


@given(
    h1=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    h2=st.complex_numbers(min_magnitude=0.1, max_magnitude=2, allow_nan=False, allow_infinity=False),
    z=st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False, allow_infinity=False),
)
def test_omega_tilde_reflection_identity(h1, h2, z):
    spec = chain(10, h1, h2, h0=0.3)
    assert np.conj(omega_tilde(spec, 1 / np.conj(z))) == pytest.approx(omega_tilde(spec, z), rel=1e-10, abs=1e-10)
    theta = np.angle(z)
    assert abs(omega_tilde(spec, np.exp(1j * theta)).imag) < 1e-12


# ---------------------------------------------------------------- roots


def test_bulk_roots_tight_binding():
    k = 0.8
    roots = bulk_roots(chain(10, 1.0), 2 * math.cos(k))
    for z in (np.exp(1j * k), np.exp(-1j * k)):
        assert np.abs(roots - z).min() < 1e-12


def test_bulk_roots_quartic_edge():
    spec = chain(40, 1.0, 0.25)
    delta = 0.2
    roots = bulk_roots(spec, -1.5 + 0.25 * delta**2)
    sd = math.sqrt(delta)
    expected = [-np.exp(1j * sd), -np.exp(-1j * sd), -np.exp(sd), -np.exp(-sd)]
    # the closed forms are leading order in sqrt(delta)
    for z in expected:
        assert np.abs(roots - z).min() < 1e-2
    for z in roots:
        assert abs(omega_tilde(spec, z) - (-1.5 + 0.25 * delta**2)) < 1e-9


@given(
    h1=st.floats(-2, 2),
    h2=st.complex_numbers(min_magnitude=0.1, max_magnitude=2, allow_nan=False, allow_infinity=False),
    E=st.floats(-5, 5),
)
def test_bulk_roots_vieta_and_reciprocal_symmetry(h1, h2, E):
    spec = chain(20, h1, h2)
    roots = bulk_roots(spec, E)
    assert np.prod(roots) == pytest.approx(np.conj(h2) / h2, abs=1e-8)
    for z in roots:
        assert np.abs(roots - 1 / np.conj(z)).min() < 1e-6 * max(1, abs(z))


# ---------------------------------------------------------------- boundary matrix


def test_boundary_matrix_two_row_case():
    N = 9
    spec = chain(N, 1.0)
    roots = bulk_roots(spec, 0.3)
    M = boundary_matrix(spec, 0.3, roots)
    np.testing.assert_allclose(M[0], 1)
    np.testing.assert_allclose(M[1], roots ** (N + 1), atol=1e-14)


def test_det_condition_zero_at_tight_binding_levels():
    N = 10
    spec = chain(N, 1.0)
    for xi in (1, 4, 7):
        assert abs(det_condition(spec, 2 * math.cos(xi * math.pi / (N + 1)))) < 1e-8


def test_det_condition_small_at_dense_eigenvalues_and_large_far_away():
    spec = chain(40, 1.0, 0.3)
    vals, _ = dense_pairs(spec)
    far = abs(det_condition(spec, np.linalg.norm(spec.dense(), 2) + 1))
    assert far > 1e-2
    for E in vals[::7]:
        assert abs(det_condition(spec, E)) < 1e-6 * far


def test_det_condition_is_real_and_order_independent():
    F = det_condition(chain(25, 1.0, 0.4), -0.7)
    assert abs(F.imag) <= 1e-10 * abs(F)
    # complex hoppings: real up to one energy-independent phase
    spec = chain(25, 1.0, 0.4 + 0.1j)
    ratio = det_condition(spec, -0.7) / det_condition(spec, 0.35)
    assert abs(ratio.imag) <= 1e-10 * abs(ratio)
    # the Vandermonde normalization makes the value symmetric in the roots
    roots = bulk_roots(spec, -0.7)
    M0 = boundary_matrix(spec, -0.7, roots)
    V0 = np.prod([roots[j] - roots[i] for i in range(4) for j in range(i + 1, 4)])
    for perm in list(permutations(range(4)))[:6]:
        r = roots[list(perm)]
        M = boundary_matrix(spec, -0.7, r)
        V = np.prod([r[j] - r[i] for i in range(4) for j in range(i + 1, 4)])
        assert np.linalg.det(M) / V == pytest.approx(np.linalg.det(M0) / V0, rel=1e-10)


def test_quartic_edge_determinant_condition():
    # at h1 = 4 h2 the exact zeros obey cos(x) cosh(x) = 1 with x = (N+2) sqrt(delta)
    N = 40
    spec = chain(N, 1.0, 0.25)
    sol = solve_eigen_near(spec, -1.5, 2)
    for s in sol:
        x = (N + 2) * math.sqrt(math.sqrt((s.E + 1.5) / 0.25))
        assert math.cos(x) * math.cosh(x) == pytest.approx(1, abs=0.05 * math.cosh(x))


def test_confluent_roots_rejected():
    spec = chain(40, 1.0)
    with pytest.raises(ConditioningError, match="distance") as info:
        boundary_matrix(spec, 2.0, np.array([1.0, 1.0 + 1e-12]))
    assert info.value.distance < 1e-10


# ---------------------------------------------------------------- eigen solver


@pytest.mark.parametrize(
    "hops, E0",
    [
        ((1.0,), -2.0),
        ((1.0, 0.25), -1.5),
        ((1.0, 0.1), -1.8),
        ((1.0, 0.5), -1.0),
        ((0.7, -0.2 + 0.3j, 0.1), 0.4),
    ],
)
def test_exact_agreement_with_dense_solver(hops, E0):
    spec = chain(40, *hops)
    vals, vecs = dense_pairs(spec)
    sols = solve_eigen_near(spec, E0, 3)
    expected = vals[np.argsort(np.abs(vals - E0))][:3]
    np.testing.assert_allclose(sorted(s.E for s in sols), sorted(expected), atol=1e-8)
    for s in sols:
        i = np.argmin(np.abs(vals - s.E))
        assert infidelity(vecs[:, i].astype(complex), s.state) < 1e-8
        assert s.residual < 1e-8
        for z in s.roots:
            assert abs(omega_tilde(spec, z) - s.E) < 1e-9 * max(1, abs(s.E))


def test_tight_binding_lowest_modes():
    N = 10
    sols = solve_eigen_near(chain(N, 1.0), -2.0, 3)
    m = np.arange(1, N + 1)
    for xi, s in enumerate(sorted(sols, key=lambda s: s.E), start=1):
        k = (1 - xi / (N + 1)) * math.pi
        assert s.E == pytest.approx(2 * math.cos(k), abs=1e-12)
        ref = np.sin(k * m)
        assert infidelity(ref / np.linalg.norm(ref), s.state) < 1e-12


def test_solver_rejects_bad_requests():
    with pytest.raises(ValueError, match="Hermitian"):
        solve_eigen_near(BandedHamiltonianSpec(10, ((1.0, 2.0),)), 0.0)
    with pytest.raises(ValueError):
        solve_eigen_near(chain(10, 1.0), 0.0, count=11)


def test_long_chain_without_overflow():
    spec = chain(400, 1.0, 0.1)
    s = solve_eigen_near(spec, -1.8, 1)[0]
    assert np.all(np.isfinite(s.coefficients)) and s.residual < 1e-8


def test_boundary_identities_hold_on_accepted_solutions():
    for hops in [(1.0, 0.25), (1.0, 0.1), (1.0, 0.5)]:
        for s in solve_eigen_near(chain(41, *hops), -2 * hops[0] + 2 * hops[1], 3, z_ex=-1.0):
            left, right = s.boundary_identities(1)
            scale = max(np.abs(s.coefficients).max(), np.abs(s.right_coefficients).max())
            assert np.abs(left).max() <= 1e-6 * scale
            assert np.abs(right).max() <= 1e-6 * scale


def test_epsilon_eta_definitions():
    s = solve_eigen_near(chain(30, 1.0, 0.25), -1.5, 1, z_ex=-1.0)[0]
    np.testing.assert_allclose(s.roots / s.z_ex, 1 / (1 + s.epsilon))
    np.testing.assert_allclose(s.roots / s.z_ex, 1 + s.eta)
    bare = solve_eigen_near(chain(30, 1.0, 0.25), -1.5, 1)[0]
    with pytest.raises(ValueError):
        bare.epsilon


def test_coefficient_hierarchy_grows_linearly_in_s2_regime():
    Ns = [21, 41, 81, 161]
    ratios = []
    for N in Ns:
        s = solve_eigen_near(chain(N, 1.0, 0.1), -1.8, 1)[0]
        extended = np.abs(np.abs(s.roots) - 1) < 1e-9
        evanescent = np.abs(s.roots) < 1 - 1e-9
        ratios.append(np.abs(s.coefficients[extended]).max() / np.abs(s.coefficients[evanescent]).max())
    slope = np.polyfit(np.log(Ns), np.log(ratios), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.2)


def test_solution_serializes_to_json():
    s = solve_eigen_near(chain(20, 1.0, 0.25), -1.5, 1)[0]
    d = json.loads(json.dumps(s.to_dict()))
    assert len(d["roots"]) == 4 and len(d["coefficients"]) == 4
    assert complex(*d["E"]) == pytest.approx(s.E)


def test_no_eigenvalue_raises(monkeypatch):
    import subrad.bloch as bloch

    monkeypatch.setattr(bloch, "_sign_change_roots", lambda *a, **k: np.empty(0))
    with pytest.raises(NumericalError, match="no eigenvalue"):
        solve_eigen_near(chain(20, 1.0), 0.0)


# ---------------------------------------------------------------- overlaps


def test_overlap_closed_form_matches_direct_sum(rng):
    specs = [chain(37, 1.0, 0.25), chain(30, 1.0, 0.1), chain(25, 0.8, 0.3, 0.05)]
    sols = [s for sp in specs for s in solve_eigen_near(sp, -1.5, 4)]
    for _ in range(100):
        s = sols[rng.integers(len(sols))]
        k = rng.uniform(-math.pi, math.pi)
        assert overlap_bloch(k, s) == pytest.approx(overlap_bloch_direct(k, s), abs=1e-10)


def test_finite_bloch_orthogonality():
    from subrad.bloch import bloch_vector

    N = 24
    a, b = bloch_vector(0.3, N), bloch_vector(0.3 + 2 * math.pi * 5 / N, N)
    assert abs(np.vdot(a, b)) < 1e-13
    assert abs(np.vdot(a, a)) == pytest.approx(1)


def test_quartic_edge_state_overlap_decays_with_size():
    # the s = 4 band-edge state has little weight on Bloch modes inside the light cone
    k = 0.3 * math.pi
    vals = []
    Ns = [50, 100, 200]
    for N in Ns:
        s = solve_eigen_near(chain(N, 1.0, 0.25), -1.5, 1)[0]
        vals.append(abs(overlap_bloch(k, s)))
    slope = np.polyfit(np.log(Ns), np.log(vals), 1)[0]
    assert slope < -2.0


# ---------------------------------------------------------------- toy models


def test_toy_h1_modes_match_dense():
    N = 12
    spec = chain(N, 1.0)
    vals, vecs = dense_pairs(spec)
    modes = toy_h1_modes(N)
    assert len(modes) == N
    for m in modes:
        i = np.argmin(np.abs(vals - m.energy))
        assert vals[i] == pytest.approx(m.energy, abs=1e-12)
        assert infidelity(vecs[:, i].astype(complex), m.state.astype(complex)) < 1e-10


def test_toy_h1_two_sites_and_band_top():
    two = toy_h1_modes(2)
    assert [m.k for m in two] == pytest.approx([2 * math.pi / 3, math.pi / 3])
    assert [m.energy for m in two] == pytest.approx([-1, 1])
    assert toy_h1_modes(50)[-1].energy == pytest.approx(2, abs=0.01)


def test_regime_classification():
    assert toy_regime(1.0, 0.25) is ToyRegime.S4
    assert toy_regime(1.0, 0.1) is ToyRegime.S2
    assert toy_regime(1.0, 0.5) is ToyRegime.DEGENERATE
    with pytest.raises(ValueError, match="regime"):
        toy_h2_rates_reference("s4", 20, 1.0, 0.1)


def test_s4_reference_example():
    m = toy_h2_rates_reference("s4", 20, 1.0, 0.25, 1)[0]
    assert m.delta == pytest.approx((1.5 * math.pi / 22) ** 2)
    assert m.delta == pytest.approx(0.045882, abs=1e-6)
    assert m.energy == pytest.approx(-1.49947, abs=1e-5)
    vals, _ = dense_pairs(chain(20, 1.0, 0.25))
    nearest = vals[np.argmin(np.abs(vals - m.energy))]
    assert nearest + 1.5 == pytest.approx(m.energy + 1.5, rel=0.05)


def test_s2_reference_against_dense_and_h1_limit():
    N, h1, h2 = 40, 1.0, 0.1
    ref = toy_h2_rates_reference("s2", N, h1, h2, 3)
    vals, _ = dense_pairs(chain(N, h1, h2))
    edge = -2 * h1 + 2 * h2
    low = np.sort(vals)[:3]
    np.testing.assert_allclose(low - edge, [m.energy - edge for m in ref], rtol=0.05)
    far = toy_h2_rates_reference("s2", N, 1.0, 1e-7, 1)[0]
    assert far.sqrt_delta == pytest.approx(math.pi / (N + 1), rel=1e-5)


def test_degenerate_reference_oscillates_and_is_suppressed():
    etas = [toy_h2_rates_reference("degenerate", N, 1.0, 0.5, 1)[0].eta for N in (21, 23, 25, 27, 29)]
    signs = np.sign(etas)
    assert np.all(signs[1:] == -signs[:-1])
    scaled = [abs(e) * (N + 2) for e, N in zip(etas, (21, 23, 25, 27, 29))]
    assert max(scaled) < 2 and max(scaled) / min(scaled) < 1.5
    with pytest.raises(ValueError, match="singular"):
        toy_h2_rates_reference("degenerate", 20, 1.0, 0.5, 1)


def test_degenerate_reference_against_dense():
    N, h1, h2 = 41, 1.0, 0.5
    ref = toy_h2_rates_reference("degenerate", N, h1, h2, 2)
    vals, _ = dense_pairs(chain(N, h1, h2))
    for m in ref:
        nearest = vals[np.argmin(np.abs(vals - m.energy))]
        assert nearest + 1 == pytest.approx(m.energy + 1, rel=0.05)
