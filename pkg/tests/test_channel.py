import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinfall import channel as ch
from spinfall.errors import DecompositionError, DomainError
from spinfall.wigner import IDENTITY, SIGMA_1, flat_limit_matrix

unit = st.floats(-1.5, 1.5)


def random_su2(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    A, B = complex(v[0], v[1]), complex(v[2], v[3])
    return np.array([[A, B], [-B.conjugate(), A.conjugate()]])


def random_state(rng, rank=2):
    G = rng.normal(size=(2, rank)) + 1j * rng.normal(size=(2, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


class TestApplyMap:
    def test_identity(self):
        rho = random_state(np.random.default_rng(0))
        np.testing.assert_allclose(ch.apply_map(rho, IDENTITY), rho, atol=1e-15)

    def test_unitary_trace(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            out = ch.apply_map(random_state(rng), random_su2(rng))
            assert abs(np.trace(out).real - 1) < 1e-12

    @settings(max_examples=200)
    @given(unit, unit)
    def test_spin_up_consistency(self, p, q):
        out = ch.apply_map(ch.SPIN_UP, p * IDENTITY - (1 - q) * SIGMA_1)
        assert np.max(np.abs(out - ch.spin_up_output(p, q))) < 1e-12

    @settings(max_examples=100)
    @given(st.lists(st.floats(-3, 3), min_size=8, max_size=8), st.integers(0, 2**32 - 1))
    def test_hermitian_psd(self, xs, seed):
        D = np.array(xs[:4]).reshape(2, 2) + 1j * np.array(xs[4:]).reshape(2, 2)
        out = ch.apply_map(random_state(np.random.default_rng(seed)), D)
        assert np.array_equal(out, out.conj().T)
        scale = max(1.0, np.abs(D).max() ** 2)
        assert np.linalg.eigvalsh(out).min() > -1e-12 * scale

    def test_rank_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            D = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            out = ch.apply_map(random_state(rng, rank=1), D)
            lam = np.linalg.eigvalsh(out)
            assert lam[0] < 1e-12 * np.trace(out).real


class TestSpinUpOutput:
    def test_identity_channel(self):
        np.testing.assert_array_equal(ch.spin_up_output(1, 1), np.diag([1, 0]))

    def test_full_flip(self):
        np.testing.assert_array_equal(ch.spin_up_output(0, 0), np.diag([0, 1]))

    def test_example(self):
        out = ch.spin_up_output(0.8, 0.9)
        np.testing.assert_allclose(out, [[0.64, -0.08], [-0.08, 0.01]], rtol=1e-14)
        assert np.trace(out).real == pytest.approx(0.65, rel=1e-14)


class TestExtract:
    def test_identity(self):
        params = ch.extract_pq(IDENTITY)
        assert (params.p, params.q, params.residual) == (1.0, 1.0, 0.0)

    def test_flip(self):
        params = ch.extract_pq(-SIGMA_1)
        assert (params.p, params.q) == (0.0, 0.0)

    def test_round_trip(self):
        params = ch.extract_pq(0.3 * IDENTITY - 0.45 * SIGMA_1)
        assert params.p == pytest.approx(0.3) and params.q == pytest.approx(0.55)
        np.testing.assert_allclose(params.matrix(), 0.3 * IDENTITY - 0.45 * SIGMA_1)

    def test_flat_step_rejected(self):
        with pytest.raises(DecompositionError):
            ch.extract_pq(flat_limit_matrix(1e-3))

    def test_asymmetric_rejected(self):
        with pytest.raises(DecompositionError):
            ch.extract_pq(np.diag([1.0, 0.5]))

    def test_rounding_tolerated_on_large_maps(self):
        D = 1e8 * (1.2 * IDENTITY - 0.7 * SIGMA_1)
        D[0, 0] += 1e-7
        ch.extract_pq(D)


class TestEntropy:
    def test_pure(self):
        assert ch.von_neumann_entropy(ch.SPIN_UP) == 0.0
        rng = np.random.default_rng(5)
        for _ in range(10):
            assert abs(ch.von_neumann_entropy(random_state(rng, rank=1))) < 1e-10

    def test_maximally_mixed(self):
        assert ch.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, rel=1e-15)

    def test_unnormalized_formula_half(self):
        p = math.sqrt(0.25)
        q = 1 - math.sqrt(0.25)
        rho = ch.spin_up_output(p, q)
        assert ch.von_neumann_entropy(rho, normalize=False) == pytest.approx(0.5, rel=1e-14)
        assert ch.von_neumann_entropy(rho, normalize=True) == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=200)
    @given(unit, unit)
    def test_unnormalized_formula(self, p, q):
        t = p * p + (1 - q) ** 2
        expected = -t * math.log2(t) if t > 0 else 0.0
        assert abs(ch.von_neumann_entropy(ch.spin_up_output(p, q), normalize=False) - expected) < 1e-12

    def test_unitary_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            rho, U = random_state(rng), random_su2(rng)
            assert abs(ch.von_neumann_entropy(U @ rho @ U.conj().T) - ch.von_neumann_entropy(rho)) < 1e-10

    def test_normalized_range(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            rho = random_state(rng) * rng.uniform(0.1, 10)
            assert 0.0 <= ch.von_neumann_entropy(rho) <= 1.0 + 1e-12
            assert 0.5 - 1e-12 <= ch.purity(rho) <= 1.0 + 1e-12

    def test_negative_eigenvalue(self):
        with pytest.raises(DomainError):
            ch.von_neumann_entropy(np.diag([1.0, -1e-6]))

    def test_tiny_negative_clipped(self):
        assert ch.von_neumann_entropy(np.diag([1.0, -1e-14])) == 0.0

    def test_zero_trace(self):
        with pytest.raises(DomainError):
            ch.von_neumann_entropy(np.zeros((2, 2)))
        assert ch.von_neumann_entropy(np.zeros((2, 2)), normalize=False) == 0.0


class TestBitflip:
    def test_transfer_matrix_identity(self):
        np.testing.assert_allclose(ch.transfer_matrix(IDENTITY), np.eye(4), atol=1e-15)

    def test_transfer_matrix_closed_form(self):
        p, s = 0.8, 0.3
        n = p * p + s * s
        R = ch.transfer_matrix(p * IDENTITY - s * SIGMA_1)
        expected = np.diag([1.0, 1.0, (p * p - s * s) / n, (p * p - s * s) / n])
        expected[0, 1] = expected[1, 0] = -2 * p * s / n
        np.testing.assert_allclose(R, expected, atol=1e-15)

    def test_identity_channel(self):
        lam, dist = ch.nearest_bitflip(ch.ChannelParams(1.0, 1.0))
        assert lam == 0.0 and dist == 0.0

    def test_pure_flip(self):
        lam, dist = ch.nearest_bitflip(ch.ChannelParams(0.0, 0.0))
        assert lam == pytest.approx(1.0, abs=1e-12) and dist == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_closed_form_optimum(self, p, s):
        n = p * p + s * s
        if n < 1e-6:
            return
        lam, dist = ch.nearest_bitflip(ch.ChannelParams(p, 1.0 - s))
        # the objective is quadratic at its minimum, so lam is only good to ~sqrt(eps)
        assert 1 - 2 * lam == pytest.approx((p * p - s * s) / n, abs=1e-6)
        assert dist == pytest.approx(math.sqrt(2) * abs(2 * p * s / n), abs=1e-7)

    def test_scan_matches_full_norm(self):
        params = ch.ChannelParams(0.97, 1.347)
        lam, dist = ch.nearest_bitflip(params)
        R = ch.transfer_matrix(params.matrix())
        assert dist == pytest.approx(np.linalg.norm(R - ch.bitflip_transfer_matrix(lam)), rel=1e-12)
        for probe in np.linspace(0, 1, 11):
            assert np.linalg.norm(R - ch.bitflip_transfer_matrix(probe)) >= dist - 1e-12

    def test_zero_map(self):
        lam, dist = ch.nearest_bitflip(ch.ChannelParams(0.0, 1.0))
        assert math.isnan(lam) and math.isnan(dist)


class TestReport:
    def test_identity(self):
        r = ch.channel_report(IDENTITY)
        assert r.entropy_paper == 0.0 and r.entropy_normalized == 0.0
        assert r.unitarity_dev == 0.0 and r.trace_out == 1.0
        assert r.bitflip_distance == 0.0 and r.purity == 1.0

    def test_radial_map(self):
        p, s = 0.97044, 0.34714
        r = ch.channel_report(p * IDENTITY - s * SIGMA_1)
        t = p * p + s * s
        assert r.trace_out == pytest.approx(t, rel=1e-14)
        assert r.entropy_paper == pytest.approx(-t * math.log2(t), rel=1e-12)
        assert r.params.p == pytest.approx(p) and r.params.q == pytest.approx(1 - s)
        assert r.bitflip_distance == pytest.approx(math.sqrt(2) * 2 * p * s / t, rel=1e-9)
