import json

import numpy as np
import pytest

from texlab import (
    DensityMatrix,
    DimensionError,
    InvalidChannelError,
    InvalidStateError,
    KrausChannel,
    Rng,
    apply,
    basis_ket,
    channel_from_json,
    channel_to_json,
    complete_dephasing,
    compose,
    depolarize_to,
    fidelity,
    filter_channel,
    kraus_outcomes,
    random_density_matrix,
    random_fixed_point_channel,
    uniform_superposition,
    violation_state,
)


def _free_mixture(dim, m, rng) -> DensityMatrix:
    w = rng.uniform(0.1, 1.0, size=m)
    w /= w.sum()
    mat = np.zeros((dim, dim), dtype=complex)
    for i, wi in enumerate(w):
        mat[i, i] = wi
    return DensityMatrix(mat)


class TestKrausChannelType:
    def test_completeness_enforced(self):
        with pytest.raises(InvalidChannelError):
            KrausChannel([np.eye(2) * 0.9])

    def test_block_zero_enforced(self):
        k = np.eye(3, dtype=complex)
        k[2, 0] = 1e-6
        with pytest.raises(InvalidChannelError):
            KrausChannel([k], free_dim=1)

    def test_diagonal_top_block_enforced(self):
        k = np.eye(3, dtype=complex)
        k[0, 1] = 1e-6
        with pytest.raises(InvalidChannelError):
            KrausChannel([k], free_dim=2)

    def test_moduli_sum_enforced(self):
        # complete but with |alpha_1|^2 split across a rotated pair
        h = np.eye(3, dtype=complex)
        h[:2, :2] = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        with pytest.raises(InvalidChannelError):
            KrausChannel([h], free_dim=2)


class TestApply:
    def test_identity_channel(self):
        rng = Rng(0)
        rho = random_density_matrix(3, rng)
        ch = KrausChannel([np.eye(3)])
        assert np.max(np.abs(apply(ch, rho).matrix - rho.matrix)) < 1e-15

    def test_generated_channels_fix_free_basis_states(self):
        rng = Rng(1)
        for m in (1, 2, 3):
            ch = random_fixed_point_channel(4, m, 3, rng)
            for i in range(m):
                s = basis_ket(4, i).density()
                assert np.max(np.abs(apply(ch, s).matrix - s.matrix)) < 1e-10

    def test_dim_mismatch(self):
        ch = KrausChannel([np.eye(2)])
        with pytest.raises(DimensionError):
            apply(ch, random_density_matrix(3, Rng(2)))


class TestRandomFixedPointChannel:
    def test_invariants_over_many_draws(self):
        # acceptance runs the 10^3-channel version of this check
        rng = Rng(3)
        for i in range(90):
            m = (i % 3) + 1
            ch = random_fixed_point_channel(4, m, 3, rng)
            assert ch.completeness_defect() < 1e-10
            moduli = np.zeros(m)
            for n in range(ch.rank):
                k = ch.operators[n]
                assert np.all(k[m:, :m] == 0)
                top = k[:m, :m]
                assert np.all(top == np.diag(np.diag(top)))
                moduli += np.abs(np.diag(top)) ** 2
            assert np.max(np.abs(moduli - 1.0)) < 1e-10

    def test_trace_preservation_block_identities(self):
        rng = Rng(4)
        for m in (1, 2, 3):
            ch = random_fixed_point_channel(4, m, 3, rng)
            d = ch.dim
            cross = np.zeros((m, d - m), dtype=complex)
            lower = np.zeros((d - m, d - m), dtype=complex)
            for n in range(ch.rank):
                alpha, t, low = ch.blocks(n)
                cross += np.diag(alpha).conj().T @ t
                lower += t.conj().T @ t + low.conj().T @ low
            assert np.max(np.abs(cross)) < 1e-10
            assert np.max(np.abs(lower - np.eye(d - m))) < 1e-10

    def test_convex_hull_of_free_states_is_fixed(self):
        rng = Rng(5)
        for m in (1, 2, 3):
            ch = random_fixed_point_channel(4, m, 3, rng)
            for _ in range(20):
                sigma = _free_mixture(4, m, rng)
                assert np.max(np.abs(apply(ch, sigma).matrix - sigma.matrix)) < 1e-9

    def test_one_way_coupling(self):
        rng = Rng(6)
        m = 2
        ch = random_fixed_point_channel(4, m, 3, rng)
        sigma = _free_mixture(4, m, rng)
        out = apply(ch, sigma).matrix
        assert np.max(np.abs(out[m:, :])) < 1e-12
        assert np.max(np.abs(out[:, m:])) < 1e-12

    def test_composition_is_again_fixed_point(self):
        rng = Rng(7)
        for m in (1, 2):
            a = random_fixed_point_channel(4, m, 3, rng)
            b = random_fixed_point_channel(4, m, 3, rng)
            c = compose(b, a)
            assert c.free_dim == m
            assert c.completeness_defect() < 1e-9
            sigma = _free_mixture(4, m, rng)
            assert np.max(np.abs(apply(c, sigma).matrix - sigma.matrix)) < 1e-9

    def test_rejects_bad_parameters(self):
        with pytest.raises(DimensionError):
            random_fixed_point_channel(4, 0, 3, Rng(8))
        with pytest.raises(DimensionError):
            random_fixed_point_channel(4, 5, 3, Rng(8))


class TestFilterChannel:
    def test_outcomes_on_violation_state(self):
        for d, a in ((2, 0.75), (3, 5 / 6), (10, 19 / 20), (4, 0.6)):
            ch = filter_channel(d, a)
            tau = violation_state(d, a).density()
            outcomes = kraus_outcomes(ch, tau)
            assert len(outcomes) == 2
            p1, s1 = outcomes[0]
            p2, s2 = outcomes[1]
            assert abs(p1 - d * (1 - a) / (d - 1)) < 1e-12
            assert abs(p1 + p2 - 1.0) < 1e-12
            f1 = uniform_superposition(d).density()
            assert np.max(np.abs(s1.matrix - f1.matrix)) < 1e-10
            assert np.max(np.abs(s2.matrix - basis_ket(d, 0).density().matrix)) < 1e-10

    def test_unit_a_keeps_free_state(self):
        ch = filter_channel(5, 1.0)
        assert ch.operators[0][0, 0] == 0.0
        tau = violation_state(5, 1.0).density()  # equals the free state
        outcomes = kraus_outcomes(ch, tau)
        assert outcomes.n_dropped == 1
        assert abs(outcomes[0][0] - 1.0) < 1e-12

    def test_parameter_range(self):
        with pytest.raises(InvalidStateError):
            filter_channel(3, 0.3)
        with pytest.raises(InvalidStateError):
            filter_channel(3, 1.1)


class TestKrausOutcomes:
    def test_identity_single_outcome(self):
        rho = random_density_matrix(3, Rng(9))
        outcomes = kraus_outcomes(KrausChannel([np.eye(3)]), rho)
        assert len(outcomes) == 1
        p, s = outcomes[0]
        assert abs(p - 1.0) < 1e-12
        assert np.max(np.abs(s.matrix - rho.matrix)) < 1e-12

    def test_probabilities_sum_to_one(self):
        rng = Rng(10)
        for _ in range(10):
            ch = random_fixed_point_channel(4, 2, 3, rng)
            rho = random_density_matrix(4, rng)
            outcomes = kraus_outcomes(ch, rho)
            assert abs(sum(outcomes.probabilities) - 1.0) < 1e-10


class TestResourceDestroyingMaps:
    def test_dephasing_kills_coherence(self):
        plus = uniform_superposition(2).density()
        out = apply(complete_dephasing(2), plus)
        assert np.max(np.abs(out.matrix - np.eye(2) / 2.0)) < 1e-12

    def test_dephasing_fixes_diagonal_states(self):
        rng = Rng(11)
        for d in (2, 4):
            ch = complete_dephasing(d)
            sigma = _free_mixture(d, d, rng)
            assert np.max(np.abs(apply(ch, sigma).matrix - sigma.matrix)) < 1e-12

    def test_depolarize_to_is_constant(self):
        rng = Rng(12)
        tau = random_density_matrix(3, rng)
        ch = depolarize_to(tau)
        for _ in range(20):
            rho = random_density_matrix(3, rng)
            assert np.max(np.abs(apply(ch, rho).matrix - tau.matrix)) < 1e-12


class TestSerialization:
    def test_bit_exact_round_trip(self):
        rng = Rng(13)
        ch = random_fixed_point_channel(4, 2, 3, rng)
        blob = json.dumps(channel_to_json(ch))
        back = channel_from_json(json.loads(blob))
        assert back.dim == ch.dim and back.free_dim == ch.free_dim and back.rank == ch.rank
        for a, b in zip(ch.operators, back.operators):
            assert np.array_equal(a, b)

    def test_rejects_malformed(self):
        data = channel_to_json(filter_channel(3, 0.8))
        data["operators"][0] = data["operators"][0][:-1]
        with pytest.raises(InvalidChannelError):
            channel_from_json(data)


class TestFidelityMonotonicity:
    def test_fidelity_never_decreases_under_channels(self):
        rng = Rng(14)
        for i in range(100):
            m = (i % 3) + 1
            ch = random_fixed_point_channel(4, m, 3, rng)
            rho = random_density_matrix(4, rng)
            sigma = random_density_matrix(4, rng)
            before = fidelity(rho, sigma)
            after = fidelity(apply(ch, rho), apply(ch, sigma))
            assert after >= before - 1e-8
