import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uncrel import fock as fk
from uncrel import sampling
from uncrel import symplectic as sp
from uncrel.symplectic import LinearObservable as Obs

B2 = sp.QuadBasis(2)
B1 = sp.QuadBasis(1)
XA = Obs.quadrature(B2, "X", 0)
YA = Obs.quadrature(B2, "Y", 0)
XB = Obs.quadrature(B2, "X", 1)
YB = Obs.quadrature(B2, "Y", 1)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def fock_transfer_matrix(unitary: fk.FockOperator, dim: int, read) -> np.ndarray:
    space = fk.FockSpace(dim, 2)
    xa, ya = fk.quadratures(space, 0)
    xb, yb = fk.quadratures(space, 1)
    return np.array([read(fk.heisenberg(unitary, q).matrix, dim) for q in (xa, ya, xb, yb)])


class TestBasis:
    def test_ordering_and_scale(self):
        assert B2.ordering == ("X_1", "Y_1", "X_2", "Y_2")
        assert B2.commutator_scale == sp.COMMUTATOR_SCALE == 0.5

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            B2.index("X", 2)
        with pytest.raises(ValueError):
            sp.QuadBasis(0)


class TestMixer:
    def test_zero_angle_is_identity(self):
        np.testing.assert_array_equal(sp.mixer_transform(0.0).matrix, np.eye(4))

    def test_coefficients_match_fock_oracle(self, read_coeffs):
        dim, theta = 20, 0.37
        u = fk.unitary_exp(fk.mixer_generator(fk.FockSpace(dim, 2), theta))
        expected = fock_transfer_matrix(u, dim, read_coeffs)
        np.testing.assert_allclose(sp.mixer_transform(theta).matrix, expected, atol=1e-10)

    def test_quarter_turn_swaps_modes(self, read_coeffs):
        dim = 20
        u = fk.unitary_exp(fk.mixer_generator(fk.FockSpace(dim, 2), math.pi / 2))
        oracle = fock_transfer_matrix(u, dim, read_coeffs)
        L = sp.mixer_transform(math.pi / 2).matrix
        np.testing.assert_allclose(L, oracle, atol=1e-10)
        # X_a -> -X_b and X_b -> X_a: a full swap up to sign
        np.testing.assert_allclose(np.abs(L), np.abs(np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])), atol=1e-15)

    def test_group_law(self):
        composed = sp.compose([sp.mixer_transform(0.3), sp.mixer_transform(0.4)])
        assert composed.max_deviation(sp.mixer_transform(0.7)) < 1e-15

    def test_square_is_double_angle(self):
        theta = 0.2318
        t = sp.mixer_transform(theta)
        assert sp.compose([t, t]).max_deviation(sp.mixer_transform(2 * theta)) < 1e-15

    def test_rejects_equal_modes(self):
        with pytest.raises(ValueError):
            sp.mixer_transform(0.1, (0, 0))
        with pytest.raises(ValueError):
            sp.mixer_transform(0.1, (0, 2))


class TestSqueezer:
    def test_zero_is_identity(self):
        np.testing.assert_array_equal(sp.squeeze_transform(0.0).matrix, np.eye(4))

    def test_inverse_pair(self):
        r = 0.4812
        pair = sp.compose([sp.squeeze_transform(r), sp.squeeze_transform(-r)])
        assert pair.max_deviation(np.eye(4)) < 1e-14

    def test_coefficients_match_fock_oracle(self, read_coeffs):
        dim, r = 24, 0.3
        u = fk.unitary_exp(fk.squeeze_generator(fk.FockSpace(dim, 2), r))
        expected = fock_transfer_matrix(u, dim, read_coeffs)
        np.testing.assert_allclose(sp.squeeze_transform(r).matrix, expected, atol=1e-9)

    def test_constrained_minus_sandwich_is_bae(self):
        r = 0.6
        theta = 0.5 * math.asin(math.tanh(r))
        t = sp.mixer_transform(theta)
        L = sp.compose([t, sp.squeeze_transform(-r), t]).matrix
        g = 2 * math.sinh(r)
        np.testing.assert_allclose(L[0], [1, 0, 0, 0], atol=1e-14)
        np.testing.assert_allclose(L[2], [g, 0, 1, 0], atol=1e-14)
        np.testing.assert_allclose(L[1], [0, 1, 0, -g], atol=1e-14)
        np.testing.assert_allclose(L[3], [0, 0, 0, 1], atol=1e-14)


class TestCompose:
    def test_single(self):
        assert sp.compose([sp.SymplecticTransform.identity(B2)]).max_deviation(np.eye(4)) == 0

    def test_temporal_order(self):
        first, second = sp.mixer_transform(0.3), sp.squeeze_transform(0.5)
        np.testing.assert_allclose(
            sp.compose([first, second]).matrix, second.matrix @ first.matrix, atol=0
        )

    def test_basis_mismatch(self):
        with pytest.raises(ValueError):
            sp.compose([sp.mixer_transform(0.1), sp.SymplecticTransform.identity(sp.QuadBasis(3))])

    def test_empty(self):
        with pytest.raises(ValueError):
            sp.compose([])

    def test_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            sp.SymplecticTransform(2 * np.eye(4), B2)


class TestHeisenbergAndMoments:
    transducer = sp.SymplecticTransform(
        np.array([[1, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 1]], dtype=float), B2
    )

    def test_identity_leaves_observable(self):
        obs = Obs([0.3, -1.0, 2.0, 0.5], B2, offset=1.5)
        assert sp.apply_heisenberg(sp.SymplecticTransform.identity(B2), obs).allclose(obs, atol=0)

    def test_transducer_rows(self):
        assert sp.apply_heisenberg(self.transducer, XB).allclose(XA, atol=0)
        assert sp.apply_heisenberg(self.transducer, YA).allclose(-YB, atol=0)

    def test_offset_survives(self):
        obs = XB + Obs(np.zeros(4), B2, 2.0)
        assert sp.apply_heisenberg(self.transducer, obs).offset == 2.0

    def test_vacuum_moments(self):
        vac = sp.gaussian_vacuum(B1)
        x = Obs.quadrature(B1, "X", 0)
        assert sp.mean(x, vac) == 0.0
        assert sp.variance(x, vac) == 0.25
        assert sp.second_moment(x, vac) == 0.25

    def test_coherent_moments_match_fock(self):
        alpha = 0.4 + 0.2j
        state = sp.gaussian_coherent(B1, alpha)
        np.testing.assert_allclose(state.mean, [0.4, 0.2])
        x = Obs.quadrature(B1, "X", 0)
        assert sp.mean(x, state) == pytest.approx(0.4, abs=1e-15)
        assert sp.variance(x, state) == 0.25
        psi = fk.coherent_state(fk.FockSpace(24, 1), alpha)
        X, Y = fk.quadratures(psi.space)
        assert fk.expectation(X, psi).real == pytest.approx(0.4, abs=1e-12)
        var = fk.expectation(X @ X, psi).real - 0.4**2
        assert var == pytest.approx(0.25, abs=1e-12)

    def test_squeezed_mode_variance_matches_fock(self):
        s_p = 0.5
        state = sp.gaussian_squeezed_mode(B2, 1, s_p)
        assert sp.variance(XB, state) == pytest.approx(math.exp(-2 * s_p) / 4, rel=1e-15)
        psi = fk.squeezed_vacuum(fk.FockSpace(32, 1), s_p)
        X, _ = fk.quadratures(psi.space)
        assert fk.expectation(X @ X, psi).real == pytest.approx(math.exp(-2 * s_p) / 4, abs=1e-10)

    def test_squeezed_mode_s1(self):
        state = sp.gaussian_squeezed_mode(B2, 1, 1.0, 0.0)
        assert state.cov[2, 2] == pytest.approx(0.033833820809153176, abs=1e-15)
        assert state.cov[3, 3] == pytest.approx(math.exp(2) / 4, rel=1e-15)
        np.testing.assert_array_equal(state.cov[:2, :2], 0.25 * np.eye(2))

    @pytest.mark.parametrize("angle", [0.0, 0.4, 1.2, 2.9])
    def test_rotated_squeezing_matches_fock(self, angle):
        s_p = 0.4
        state = sp.gaussian_squeezed_mode(B1, 0, s_p, angle)
        psi = fk.squeezed_vacuum(fk.FockSpace(32, 1), s_p, angle)
        X, Y = fk.quadratures(psi.space)
        sym = lambda P, Q: 0.5 * fk.expectation(P @ Q + Q @ P, psi).real  # noqa: E731
        fock_cov = np.array([[sym(X, X), sym(X, Y)], [sym(Y, X), sym(Y, Y)]])
        np.testing.assert_allclose(state.cov, fock_cov, atol=1e-10)

    def test_bad_angle(self):
        with pytest.raises(ValueError):
            sp.gaussian_squeezed_mode(B1, 0, 0.5, math.pi)

    def test_product_of_vacua(self):
        prod = sp.product_state(sp.gaussian_vacuum(B1), sp.gaussian_vacuum(B1))
        np.testing.assert_array_equal(prod.cov, sp.gaussian_vacuum(B2).cov)
        np.testing.assert_array_equal(prod.mean, np.zeros(4))

    def test_unphysical_state_rejected(self):
        with pytest.raises(ValueError):
            sp.GaussianState(np.zeros(2), 0.1 * np.eye(2), B1)


class TestCommutator:
    def test_canonical_pair(self):
        assert sp.commutator_scalar(XA, YA) == 0.5

    def test_different_modes(self):
        assert sp.commutator_scalar(XA, XB) == 0.0

    def test_bilinear_expansion(self):
        # [X_a - X_b, -Y_b] = -[X_a, Y_b] + [X_b, Y_b] = 1/2
        assert sp.commutator_scalar(XA - XB, -YB) == 0.5

    def test_antisymmetric(self):
        assert sp.commutator_scalar(YA, XA) == -0.5

    def test_matches_fock_commutator(self):
        dim = 12
        space = fk.FockSpace(dim, 2)
        c1, c2 = np.array([0.3, -1.1, 0.7, 0.2]), np.array([1.0, 0.4, -0.5, 0.9])
        qs = [*fk.quadratures(space, 0), *fk.quadratures(space, 1)]
        o1 = sum(c * q.matrix for c, q in zip(c1, qs))
        o2 = sum(c * q.matrix for c, q in zip(c2, qs))
        comm = o1 @ o2 - o2 @ o1
        idx = space.low_indices(dim - 2)
        diag = np.diag(comm[np.ix_(idx, idx)])
        np.testing.assert_allclose(diag, 1j * sp.commutator_scalar(Obs(c1, B2), Obs(c2, B2)), atol=1e-12)


class TestProperties:
    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_constructors_and_compositions_are_symplectic(self, seed):
        rng = np.random.default_rng(seed)
        L = sampling.random_transform(rng, B2)
        assert L.defect < sp.TOL_SYMPLECTIC
        assert sp.compose([L, L.inverse()]).max_deviation(np.eye(4)) < 1e-10

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_heisenberg_preserves_commutators(self, seed):
        rng = np.random.default_rng(seed)
        L = sampling.random_transform(rng, B2)
        o1 = sampling.random_observable(rng, B2, range(2))
        o2 = sampling.random_observable(rng, B2, range(2))
        before = sp.commutator_scalar(o1, o2)
        after = sp.commutator_scalar(sp.apply_heisenberg(L, o1), sp.apply_heisenberg(L, o2))
        assert after == pytest.approx(before, abs=sp.TOL_SYMPLECTIC * max(1.0, abs(before)) * 10)

    @settings(max_examples=200, deadline=None)
    @given(seeds, st.floats(-5, 5))
    def test_variance_nonnegative_and_offset_invariant(self, seed, shift):
        rng = np.random.default_rng(seed)
        state = sampling.random_gaussian_state(rng, B2)
        obs = sampling.random_observable(rng, B2, range(2))
        shifted = obs + Obs(np.zeros(4), B2, shift)
        assert sp.variance(obs, state) >= 0
        assert sp.variance(shifted, state) == sp.variance(obs, state)

    def test_robertson_on_1000_gaussian_draws(self, rng):
        for _ in range(1000):
            state = sampling.random_gaussian_state(rng, B2)
            o1 = sampling.random_observable(rng, B2, range(2))
            o2 = sampling.random_observable(rng, B2, range(2))
            lhs = math.sqrt(sp.variance(o1, state) * sp.variance(o2, state))
            assert lhs >= abs(sp.commutator_scalar(o1, o2)) / 2 - 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_mixer_additivity(self, t1, t2):
        composed = sp.compose([sp.mixer_transform(t1), sp.mixer_transform(t2)])
        assert composed.max_deviation(sp.mixer_transform(t1 + t2)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-2, 2))
    def test_squeezer_inverse(self, r):
        pair = sp.compose([sp.squeeze_transform(r), sp.squeeze_transform(-r)])
        assert pair.max_deviation(np.eye(4)) < 1e-12
