import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entwalk import InitialState, SpectralConsistencyError, WalkConfig, WalkDomainError, build_coin, evolve, probabilities
from entwalk.core import hadamard
from entwalk.spectral import (
    BranchLabel,
    MomentumGrid,
    band_stationary_points,
    band_structure,
    branch_integral,
    branches,
    caustics,
    closed_form_eigensystem,
    count_balanced_branches,
    default_grid,
    dominant_term_amplitude,
    extremal_branch,
    gamma_pm,
    k0_candidates,
    lambda_pm,
    lattice_to_model_position,
    momentum_step_operator,
    norm_pm,
    phase,
    phase_derivatives,
    phi,
    simulated_outer_peaks,
    spectral_evolve,
    stationary_phase,
    stationary_phase_total,
    stationary_points,
    walk_eigensystem,
    walk_stationary_phase_amplitude,
    walk_symbol,
)
from entwalk.spectral import closed_form
from entwalk.spectral.dispersion import _curvature, _track, _velocities, band_eigensystem

from conftest import walk_distribution, walk_state

K_SAMPLES = np.linspace(0.0, 2.0 * np.pi, 1000, endpoint=False)
SQ2 = math.sqrt(2.0)


def _tensor_model_amplitude(n, T, y, a, num_points=4096):
    # direct quadrature of U(k)^T a over [0, 4pi), built from the dense operator only
    k = 4.0 * np.pi * np.arange(num_points) / num_points
    out = np.zeros(2**n, dtype=np.complex128)
    for kk in k:
        u = momentum_step_operator(n, kk)
        out += np.exp(-1j * kk * y) * (np.linalg.matrix_power(u, T) @ a)
    return out / num_points


class TestOperators:
    def test_single_qubit_k0_is_hadamard(self):
        np.testing.assert_allclose(momentum_step_operator(1, 0.0), hadamard(), atol=1e-15)

    def test_two_qubit_k0(self):
        np.testing.assert_allclose(momentum_step_operator(2, 0.0), np.kron(hadamard(), hadamard()), atol=1e-15)

    @given(st.integers(1, 5), st.floats(0.0, 2 * np.pi, exclude_max=True))
    def test_unitary(self, n, k):
        u = momentum_step_operator(n, k)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2**n), atol=1e-12)

    @given(st.integers(1, 4), st.floats(0.0, 2 * np.pi), st.integers(0, 2**32 - 1))
    def test_walk_symbol_is_fourier_transform_of_one_step(self, n, k, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        a /= np.linalg.norm(a)
        state = evolve(WalkConfig(n, 1, initial_state=InitialState(a)))
        psi_k = np.exp(1j * k * state.positions) @ state.amplitudes
        np.testing.assert_allclose(walk_symbol(n, k) @ a, psi_k, atol=1e-12)

    @given(st.floats(0.0, 2 * np.pi))
    def test_walk_symbol_against_tensor_model(self, k):
        np.testing.assert_allclose(walk_symbol(2, k), momentum_step_operator(2, k), atol=1e-14)
        np.testing.assert_allclose(walk_symbol(1, k), momentum_step_operator(1, 2 * k), atol=1e-14)

    def test_tensor_model_differs_for_three_qubits(self):
        assert np.max(np.abs(walk_symbol(3, 1.0) - momentum_step_operator(3, 1.0))) > 0.1

    def test_default_grid(self):
        assert default_grid(0).num_points == 4
        assert default_grid(50).num_points == 256
        assert default_grid(30).resolves(30)
        assert not MomentumGrid(60).resolves(30)


class TestClosedForm:
    def test_k_zero(self):
        sys = closed_form_eigensystem(3, np.array([0.0]))
        assert sys.phi[0] == 0.0
        assert sys.lambda_plus[0] == pytest.approx(1.0) and sys.lambda_minus[0] == pytest.approx(-1.0)
        np.testing.assert_allclose(np.sort(sys.eigenvalues[0].real), np.sort(np.linalg.eigvals(build_coin(3)).real), atol=1e-12)
        np.testing.assert_allclose(sys.eigenvalues[0].imag, 0.0, atol=1e-15)

    def test_k_pi(self):
        assert float(phi(np.pi)) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_norm_product_identity(self):
        np_, nm = norm_pm(K_SAMPLES)
        np.testing.assert_allclose(np_ * nm, 6 + 2 * np.cos(K_SAMPLES), rtol=0, atol=1e-10)

    def test_gamma_product(self):
        gp, gm = gamma_pm(K_SAMPLES)
        np.testing.assert_allclose(gp * gm, -1.0, atol=1e-12)

    def test_printed_normalisation_equals_squared_length(self):
        gp, gm = gamma_pm(K_SAMPLES)
        np_, nm = norm_pm(K_SAMPLES)
        np.testing.assert_allclose(np_, 1 + gp**2, atol=1e-12)
        np.testing.assert_allclose(nm, 1 + gm**2, atol=1e-12)

    def test_lambda_exponential_form(self):
        lp, lm = lambda_pm(K_SAMPLES)
        u = closed_form.half_step_block(K_SAMPLES)
        # trace and determinant of the 2x2 block fix its eigenvalue pair
        np.testing.assert_allclose(lp + lm, np.trace(u, axis1=-2, axis2=-1), atol=1e-12)
        np.testing.assert_allclose(lp * lm, np.linalg.det(u), atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_unit_modulus_and_residual(self, n):
        sys = closed_form_eigensystem(n, K_SAMPLES)
        np.testing.assert_allclose(np.abs(sys.eigenvalues), 1.0, rtol=0, atol=1e-12)
        assert sys.residual <= 1e-8

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_orthonormal_columns(self, n):
        vecs = closed_form_eigensystem(n, K_SAMPLES[::37]).eigenvectors
        gram = np.einsum("kdi,kdj->kij", vecs.conj(), vecs)
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(2**n), gram.shape), atol=1e-10)

    def test_sin_squared_eigenvalue_is_caught(self, monkeypatch):
        def sin_squared_form(k):
            s = np.sin(0.5 * np.asarray(k))
            lp = np.sqrt(1 - s**2 / 2) + 1j * (SQ2 / 2) * s**2
            return lp, -np.conj(lp)

        monkeypatch.setattr(closed_form, "lambda_pm", sin_squared_form)
        with pytest.raises(SpectralConsistencyError) as err:
            closed_form_eigensystem(1, K_SAMPLES)
        assert "Lambda" in err.value.formula and err.value.residual > 1e-12

    def test_conjugated_eigenvalue_is_caught_by_residual(self, monkeypatch):
        true_pm = closed_form.lambda_pm
        monkeypatch.setattr(closed_form, "lambda_pm", lambda k: tuple(np.conj(x) for x in true_pm(k)))
        with pytest.raises(SpectralConsistencyError) as err:
            closed_form_eigensystem(2, K_SAMPLES)
        assert "U V_j" in err.value.formula and err.value.residual > 1e-8

    @pytest.mark.parametrize("n", range(1, 6))
    def test_branch_counts(self, n):
        for m in range(n + 1):
            assert len(branches(n, imbalance=2 * m - n)) == math.comb(n, m)

    def test_balanced_branch_count(self):
        assert count_balanced_branches(2) == 2
        assert count_balanced_branches(4) == 6
        assert count_balanced_branches(6) == math.factorial(6) // math.factorial(3) ** 2
        assert count_balanced_branches(3) == 0

    def test_bitmask_convention(self):
        sys = closed_form_eigensystem(2, np.array([0.7]))
        v = closed_form.single_qubit_eigenvectors(np.array([0.7]))[0]
        # selection 0b01: slot 0 (left) carries v_+, slot 1 carries v_-
        np.testing.assert_allclose(sys.branch(BranchLabel(2, 0b01))[1][0], np.kron(v[:, 0], v[:, 1]), atol=1e-15)
        assert BranchLabel(2, 0b01).q == 1 and BranchLabel(3, 0b011).m == 1


class TestSpectralEvolve:
    def test_single_qubit_one_step(self):
        dist = probabilities(spectral_evolve(WalkConfig(1, 1)))
        assert dist.at(1) == pytest.approx(1.0, abs=1e-12)

    def test_two_qubit_one_step(self):
        dist = probabilities(spectral_evolve(WalkConfig(2, 1)))
        assert dist.at(1) == pytest.approx(0.5, abs=1e-12) and dist.at(-1) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("M", [1, 3, 16])
    def test_zero_steps_any_grid(self, M):
        state = spectral_evolve(WalkConfig(3, 0), MomentumGrid(M))
        np.testing.assert_allclose(state.amplitudes[0], WalkConfig(3, 0).initial_state.coin_amplitudes, atol=1e-15)

    @pytest.mark.parametrize("n", range(1, 6))
    @pytest.mark.parametrize("T", [0, 1, 10, 30])
    @pytest.mark.parametrize("basis", ["auto", "numeric"])
    def test_round_trip(self, n, T, basis):
        cfg = WalkConfig(n, T)
        np.testing.assert_allclose(spectral_evolve(cfg, eigenbasis=basis).amplitudes, walk_state(n, T).amplitudes, atol=1e-10)

    def test_minimal_grid(self):
        cfg = WalkConfig(2, 9)
        np.testing.assert_allclose(spectral_evolve(cfg, MomentumGrid(19)).amplitudes, evolve(cfg).amplitudes, atol=1e-10)

    def test_coarse_grid_rejected(self):
        with pytest.raises(WalkDomainError):
            spectral_evolve(WalkConfig(2, 10), MomentumGrid(20))

    def test_closed_form_unavailable_beyond_two_qubits(self):
        with pytest.raises(WalkDomainError):
            walk_eigensystem(3, np.array([0.1]), eigenbasis="closed_form")

    @given(st.integers(1, 3), st.integers(0, 12), st.integers(-4, 4), st.integers(0, 2**32 - 1))
    def test_custom_initial_state_and_coin(self, n, T, origin, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        z = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        q, _ = np.linalg.qr(z)
        cfg = WalkConfig(n, T, initial_state=InitialState(a / np.linalg.norm(a), origin), coin=q)
        got = spectral_evolve(cfg)
        assert got.offset == evolve(cfg).offset
        np.testing.assert_allclose(got.amplitudes, evolve(cfg).amplitudes, atol=1e-10)

    @pytest.mark.parametrize("n", [2, 4])
    def test_even_reconstruction_symmetric(self, n):
        w = probabilities(spectral_evolve(WalkConfig(n, 30))).weights
        np.testing.assert_allclose(w, w[::-1], atol=1e-10)

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_isolated_initial_state_symmetrises_odd_walks(self, n):
        # |0..0> and i|1..1> evolve as mirror images with no cross term in P(x)
        a = np.zeros(2**n, dtype=np.complex128)
        a[0], a[-1] = 1 / SQ2, 1j / SQ2
        cfg = WalkConfig(n, 50, initial_state=InitialState(a))
        for state in (spectral_evolve(cfg), evolve(cfg)):
            w = probabilities(state).weights
            assert np.max(np.abs(w - w[::-1])) <= 1e-10
        assert np.max(np.abs(walk_distribution(n, 50).weights - walk_distribution(n, 50).weights[::-1])) > 1e-3


class TestDominantTerm:
    def test_branch_counts(self):
        assert len(branches(2, imbalance=0)) == 2
        assert len(branches(4, imbalance=0)) == 6

    def test_odd_rejected(self):
        with pytest.raises(WalkDomainError):
            dominant_term_amplitude(3, 10, 0)

    def test_central_peak_two_qubits(self):
        p_dom = float(np.sum(np.abs(dominant_term_amplitude(2, 50, 0)) ** 2))
        p_sim = walk_distribution(2, 50).at(0)
        assert p_sim / 10 <= p_dom <= 10 * p_sim

    def test_decays_with_qubits(self):
        p = {n: float(np.sum(np.abs(dominant_term_amplitude(n, 50, 0)) ** 2)) for n in (2, 4, 6)}
        assert p[4] < p[2] and p[6] < p[2]

    @pytest.mark.parametrize("n,T,x", [(2, 12, 0), (2, 12, 3), (4, 6, 0), (4, 6, -2)])
    def test_flat_plus_moving_branches_rebuild_tensor_model(self, n, T, x):
        a = WalkConfig(n, 0).initial_state.coin_amplitudes
        moving = sum(branch_integral(b, T, x, num_points=4096) for b in branches(n) if b.imbalance)
        total = dominant_term_amplitude(n, T, x) + moving
        np.testing.assert_allclose(total, _tensor_model_amplitude(n, T, x, a), atol=1e-10)

    def test_two_qubit_flat_branches_equal_lattice_amplitude_part(self):
        moving = sum(branch_integral(b, 20, 4) for b in branches(2) if b.imbalance)
        np.testing.assert_allclose(dominant_term_amplitude(2, 20, 4) + moving, walk_state(2, 20).amplitude_at(4), atol=1e-12)


class TestPhase:
    def test_example_values(self):
        d1, d2 = phase_derivatives(extremal_branch(2), 0.0, 0.0)
        assert d1 == pytest.approx(1 / SQ2, abs=1e-15) and d2 == 0.0

    def test_flat_branch_rejected(self):
        with pytest.raises(WalkDomainError):
            phase_derivatives(BranchLabel(2, 0b01), 0.1, 1.0)

    @given(st.integers(1, 5), st.floats(-0.5, 0.5), st.floats(0.0, 4 * np.pi))
    def test_first_derivative_finite_difference(self, n, v, k):
        b = extremal_branch(n)
        h = 1e-5
        fd = (phase(b, v, k + h) - phase(b, v, k - h)) / (2 * h)
        assert float(phase_derivatives(b, v, k)[0]) == pytest.approx(float(fd), abs=1e-6)

    @given(st.integers(1, 5), st.floats(-0.5, 0.5), st.floats(0.0, 4 * np.pi))
    def test_second_derivative_finite_difference(self, n, v, k):
        b = extremal_branch(n)
        h = 1e-5
        fd = (phase_derivatives(b, v, k + h)[0] - phase_derivatives(b, v, k - h)[0]) / (2 * h)
        assert float(phase_derivatives(b, v, k)[1]) == pytest.approx(float(fd), abs=1e-6)


class TestStationaryPoints:
    def test_origin(self):
        b = BranchLabel(2, 0)
        (k0,) = stationary_points(b, 0.0)
        assert k0 == pytest.approx(np.pi, abs=1e-12)
        assert any(abs(c - np.pi) < 1e-12 for c in k0_candidates(b, 0.0))

    def test_outside_cone(self):
        assert stationary_points(BranchLabel(2, 0), 0.9) == []
        assert k0_candidates(BranchLabel(2, 0), 0.9) == []

    @given(st.integers(1, 4), st.floats(0.02, 0.98))
    def test_four_points_across_mirror_branches(self, n, frac):
        b = extremal_branch(n)
        v = frac * b.velocity_bound
        roots = stationary_points(b, v, 4 * np.pi) + stationary_points(b.mirror(), v, 4 * np.pi)
        assert len(roots) == 4
        assert len(np.unique(np.round(roots, 8))) == 4
        for r in stationary_points(b, v, 4 * np.pi):
            assert abs(float(phase_derivatives(b, v, r)[0])) <= 1e-10
        # every closed-form candidate is a root of the branch or of its mirror
        for c in k0_candidates(b, v):
            assert min(abs(float(phase_derivatives(x, v, c)[0])) for x in (b, b.mirror())) <= 1e-10

    @given(st.integers(1, 4), st.floats(-0.98, 0.98))
    def test_residuals(self, n, frac):
        b = extremal_branch(n)
        for k0 in stationary_points(b, frac * b.velocity_bound):
            assert 0.0 <= k0 < 2 * np.pi
            assert abs(float(phase_derivatives(b, frac * b.velocity_bound, k0)[0])) <= 1e-10


class TestStationaryPhase:
    def test_sign_factor(self):
        for n, T in product(range(1, 6), range(0, 6)):
            for b in branches(n):
                assert b.sign(T) * b.mirror().sign(T) == (-1) ** (n * T)

    def test_sign_factor_pulls_out_of_eigenvalue(self):
        k = np.linspace(0.1, 6.0, 9)
        sys = closed_form_eigensystem(3, k)
        for b in branches(3):
            lam = sys.branch(b)[0]
            for T in (1, 2, 7):
                np.testing.assert_allclose(lam**T, b.sign(T) * np.exp(1j * T * b.imbalance * phi(k) / 2), atol=1e-12)

    def test_two_qubit_estimate(self):
        T = 50
        dist = walk_distribution(2, T)
        worst = 0.0
        for x in range(5, 31):
            amp = stationary_phase_total(2, T, x) + dominant_term_amplitude(2, T, x)
            worst = max(worst, abs(np.sum(np.abs(amp) ** 2) - dist.at(x)) / dist.at(x))
        assert worst < 0.1

    def test_degenerate_point_falls_back_to_quadrature(self):
        b = extremal_branch(1)
        T = 40
        y = T * b.velocity_bound
        res = stationary_phase(b, T, y)
        assert res.degenerate
        np.testing.assert_allclose(res.amplitude, branch_integral(b, T, y), atol=1e-14)

    def test_result_fields(self):
        res = stationary_phase(extremal_branch(1), 50, 5.0)
        assert res.group_velocity_bound == pytest.approx(1 / (2 * SQ2))
        assert len(res.stationary_points) == len(res.phase_second_derivative) == 2
        assert not res.degenerate

    def test_model_position_map(self):
        assert lattice_to_model_position(1, 7) == 3.5
        assert lattice_to_model_position(2, 7) == 7
        with pytest.raises(WalkDomainError):
            lattice_to_model_position(3, 1)


class TestDispersion:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_velocity_and_curvature_against_finite_differences(self, n):
        bands = band_structure(n, 256)
        h = 1e-5
        for i in (3, 50, 101, 200):
            for j in range(n + 1):
                ref = bands.eigenvectors[i][:, j]
                k = bands.k[i]
                w = []
                for kk in (k - h, k, k + h):
                    vals, vecs, jj = _track(n, ref, kk)
                    w.append(np.angle(vals[jj]))
                w = np.unwrap(w)
                assert (w[2] - w[0]) / (2 * h) == pytest.approx(bands.velocities[i, j], abs=1e-6)
                vm = _velocities(n, _track(n, ref, k - h)[1][:, [_track(n, ref, k - h)[2]]])[0]
                vp = _velocities(n, _track(n, ref, k + h)[1][:, [_track(n, ref, k + h)[2]]])[0]
                vals, vecs, jj = _track(n, ref, k)
                assert _curvature(n, vals, vecs, jj) == pytest.approx((vp - vm) / (2 * h), abs=1e-5)

    def test_single_qubit_caustic(self):
        left, right = caustics(1)
        assert right.velocity == pytest.approx(1 / SQ2, abs=1e-9)
        assert left.velocity == pytest.approx(-1 / SQ2, abs=1e-9)
        # omega = 2 asin(sin k / sqrt2) near k = 0
        assert right.third_derivative == pytest.approx(-1 / (2 * SQ2), abs=1e-5)

    def test_band_stationary_points(self):
        bands = band_structure(3)
        pts = band_stationary_points(3, 0.3, bands)
        assert pts
        for p in pts:
            assert p.velocity_residual <= 1e-10

    def test_matches_tensor_model_for_single_qubit(self):
        for x in (6, 14, 22, -10):
            np.testing.assert_allclose(
                walk_stationary_phase_amplitude(1, 50, x), stationary_phase_total(1, 50, x / 2), atol=1e-8
            )

    def test_requires_symmetric_coin(self):
        a = np.array([1, 1, 0, 0]) / SQ2
        with pytest.raises(WalkDomainError):
            walk_stationary_phase_amplitude(2, 10, 0, a)

    def test_outer_peaks_helper(self):
        from entwalk import ProbabilityDistribution

        d = ProbabilityDistribution(np.array([0.1, 0.3, 0.05, 0.0, 0.2, 0.35]), -3)
        assert simulated_outer_peaks(d) == (-2, 2)

    def test_symmetric_subspace_dimension(self):
        vals, _ = band_eigensystem(4, np.array([0.3]))
        assert vals.shape == (1, 5)
