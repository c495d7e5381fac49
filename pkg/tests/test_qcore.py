import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

import oracles
from subent import (
    EULER_GAMMA,
    SUBENTROPY_MAX,
    DensityMatrix,
    DimensionMismatch,
    Functionals,
    PureState,
    RngStream,
    Spectrum,
    dephase,
    functionals,
    induced_mixed_state,
    partial_trace,
    relative_entropy_coherence,
    spectrum_of,
    subentropy,
    von_neumann_entropy,
)
from subent.qcore import entropy_values, subentropy_values


def spec(*values) -> Spectrum:
    return Spectrum(list(values))


def plus_state(m: int = 2) -> DensityMatrix:
    v = np.full(m, 1.0 / math.sqrt(m), dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()))


spectra_strategy = st.lists(
    st.floats(1e-3, 1.0), min_size=1, max_size=8
).map(lambda xs: Spectrum(np.array(xs) / np.sum(xs)))


class TestSpectrum:
    def test_sorted_descending_and_renormalized(self):
        s = spec(0.2, 0.5, 0.3)
        assert_allclose(s.values, [0.5, 0.3, 0.2])
        assert s.values.sum() == pytest.approx(1.0, abs=1e-15)
        assert s.m == 3

    def test_small_negatives_clamp(self):
        s = Spectrum([1.0 + 5e-13, -5e-13])
        assert s.values[1] == 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            Spectrum([0.5, -1e-6, 0.5])
        with pytest.raises(ValueError):
            Spectrum([0.4, 0.4])
        with pytest.raises(ValueError):
            Spectrum([])

    def test_values_frozen(self):
        s = spec(0.5, 0.5)
        with pytest.raises(ValueError):
            s.values[0] = 0.7


class TestEntropy:
    def test_pure_state(self):
        assert von_neumann_entropy(spec(1.0)) == 0.0

    def test_uniform(self):
        assert von_neumann_entropy(spec(0.5, 0.5)) == pytest.approx(math.log(2), abs=1e-15)

    def test_two_thirds(self):
        expected = (2 / 3) * math.log(3 / 2) + (1 / 3) * math.log(3)
        assert von_neumann_entropy(spec(2 / 3, 1 / 3)) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.636514, abs=1e-6)

    @given(spectra_strategy)
    @settings(max_examples=200, deadline=None, derandomize=True)
    def test_range(self, s):
        h = von_neumann_entropy(s)
        assert 0.0 <= h <= math.log(s.m) + 1e-12


class TestSubentropy:
    def test_pure(self):
        assert subentropy(spec(1.0, 0.0)) == 0.0
        assert subentropy(spec(1.0, 0.0, 0.0, 0.0)) == 0.0

    def test_uniform_two(self):
        assert subentropy(spec(0.5, 0.5)) == pytest.approx(math.log(2) - 0.5, abs=1e-12)

    def test_uniform_matches_harmonic_formula(self):
        # Q(1/m, ..., 1/m) = ln m - H_m + 1
        for m in (2, 3, 5, 8, 17):
            h_m = sum(1.0 / k for k in range(1, m + 1))
            got = subentropy(Spectrum(np.full(m, 1.0 / m)))
            assert got == pytest.approx(math.log(m) - h_m + 1.0, abs=1e-12)

    def test_two_point_value(self):
        expected = -(4 / 3) * math.log(2) + math.log(3)
        assert subentropy(spec(2 / 3, 1 / 3)) == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.174416, abs=1e-6)

    def test_confluent_against_perturbation_oracle(self):
        values = [0.5, 0.25, 0.25]
        oracle = oracles.subentropy_perturbation_oracle(values)
        assert subentropy(spec(*values)) == pytest.approx(oracle, abs=1e-7)

    def test_large_tie_group_near_second_level(self):
        # six-fold tie a hair away from a two-fold tie: the float table
        # cancels catastrophically here and must escalate to the extended
        # precision path, certified by the x^m probe
        values = np.array([0.12524595] * 6 + [0.12426214] * 2)
        values /= values.sum()
        oracle = oracles.subentropy_perturbation_oracle(values)
        assert subentropy(Spectrum(values)) == pytest.approx(oracle, abs=1e-10)

    def test_cluster_just_past_confluence_threshold(self):
        a = 0.125
        values = np.array([a] * 7 + [a * (1 + 2e-8)])
        values /= values.sum()
        oracle = oracles.subentropy_perturbation_oracle(
            values, deltas=(1e-11, 1e-12, 1e-13), dps=250
        )
        assert subentropy(Spectrum(values)) == pytest.approx(oracle, abs=1e-9)

    def test_confluent_with_zero_block(self):
        values = [0.6, 0.4, 0.0, 0.0]
        # zeros contribute nothing; push them to distinct tiny positives,
        # shaving the difference off the large eigenvalues to keep the sum
        oracle = float(oracles.subentropy_raw([0.6 - 7.5e-10, 0.4 - 7.5e-10, 1e-9, 5e-10]))
        assert subentropy(spec(*values)) == pytest.approx(oracle, abs=1e-6)

    def test_batch_matches_scalar_on_separated_rows(self):
        # well-separated nodes keep the divided differences conditioned, so
        # the two code paths agree essentially to rounding
        gen = RngStream(42).generator()
        base = np.array([0.45, 0.25, 0.15, 0.09, 0.06])
        rows = base + 0.004 * (gen.random((64, 5)) - 0.5)
        rows /= rows.sum(axis=1)[:, None]
        batch = subentropy_values(rows)
        single = [subentropy(Spectrum(r)) for r in rows]
        assert_allclose(batch, single, rtol=0, atol=1e-12)

    def test_batch_matches_public_scalar(self):
        # generic rows can carry gaps of 1e-4; node perturbations of an ulp
        # are then amplified by roughly one over the smallest gap
        gen = RngStream(43).generator()
        rows = gen.random((64, 6))
        rows /= rows.sum(axis=1)[:, None]
        batch = subentropy_values(rows)
        single = [subentropy(Spectrum(r)) for r in rows]
        assert_allclose(batch, single, rtol=0, atol=1e-8)

    def test_matches_extended_precision_oracle(self):
        gen = RngStream(44).generator()
        for m in (2, 3, 5, 8):
            rows = gen.random((8, m))
            rows /= rows.sum(axis=1)[:, None]
            batch = subentropy_values(rows)
            for row, got in zip(rows, batch):
                assert got == pytest.approx(float(oracles.subentropy_raw(row)), abs=1e-9)

    def test_batch_handles_ties(self):
        rows = np.array([[0.5, 0.25, 0.25], [0.4, 0.4, 0.2], [1.0, 0.0, 0.0]])
        batch = subentropy_values(rows)
        single = [subentropy(Spectrum(r)) for r in rows]
        assert_allclose(batch, single, rtol=0, atol=1e-14)

    @given(spectra_strategy)
    @settings(max_examples=300, deadline=None, derandomize=True)
    def test_bounds(self, s):
        q = subentropy(s)
        assert 0.0 <= q <= SUBENTROPY_MAX + 1e-9
        assert q <= -math.log(s.values[0]) + 1e-9


class TestSubentropyMatrixProperties:
    """Properties that need density matrices rather than bare spectra."""

    @staticmethod
    def _q(rho: DensityMatrix) -> float:
        return subentropy(spectrum_of(rho))

    def test_concavity_on_random_mixtures(self):
        gen_seed = 0
        for trial in range(60):
            m = 2 + trial % 4
            rho = induced_mixed_state(m, m + 1, RngStream(gen_seed, 2 * trial))
            sigma = induced_mixed_state(m, m + 1, RngStream(gen_seed, 2 * trial + 1))
            for q_mix in (0.0, 0.25, 0.5, 0.9, 1.0):
                mixed = DensityMatrix(q_mix * rho.entries + (1 - q_mix) * sigma.entries)
                lhs = self._q(mixed)
                rhs = q_mix * self._q(rho) + (1 - q_mix) * self._q(sigma)
                assert lhs >= rhs - 1e-9

    def test_schur_concavity_on_majorization_pairs(self):
        gen = RngStream(9).generator()
        for _ in range(200):
            m = int(gen.integers(2, 8))
            raw = gen.random(m) + 1e-3
            a = np.sort(raw / raw.sum())[::-1]
            t = gen.random()
            b = t * a + (1 - t) / m  # doubly stochastic average: a majorizes b
            assert subentropy(Spectrum(a)) <= subentropy(Spectrum(b)) + 1e-9

    def test_continuity_bound(self):
        for trial in range(40):
            m = 2 + trial % 5
            rho = induced_mixed_state(m, m, RngStream(5, 2 * trial))
            sigma = induced_mixed_state(m, m, RngStream(5, 2 * trial + 1))
            s = 0.05 * (1 + trial % 3)
            near = DensityMatrix((1 - s) * rho.entries + s * sigma.entries)
            t = oracles.trace_norm(rho.entries - near.entries)
            assert t <= math.exp(-1)
            bound = math.log(m) * t + (-t * math.log(t) if t > 0 else 0.0)
            assert abs(self._q(rho) - self._q(near)) <= bound + 1e-9

    def test_tensor_product_subadditive(self):
        gen = RngStream(13).generator()
        for _ in range(80):
            ma, mb = int(gen.integers(2, 5)), int(gen.integers(2, 5))
            a = gen.random(ma) + 1e-3
            b = gen.random(mb) + 1e-3
            a /= a.sum()
            b /= b.sum()
            q_joint = subentropy(Spectrum(np.outer(a, b).ravel()))
            assert q_joint <= subentropy(Spectrum(a)) + subentropy(Spectrum(b)) + 1e-9


class TestDephaseAndCoherence:
    def test_dephase_diagonal_is_identity_map(self):
        rho = DensityMatrix(np.diag([1 / 3, 1 / 3, 1 / 3]))
        assert_allclose(dephase(rho).entries, rho.entries)

    def test_dephase_kills_offdiagonals(self):
        rho = plus_state()
        out = dephase(rho).entries
        assert_allclose(out, np.diag([0.5, 0.5]))

    def test_dephase_preserves_trace_exactly(self):
        rho = induced_mixed_state(4, 5, RngStream(3))
        assert np.trace(dephase(rho).entries) == np.trace(rho.entries)

    def test_coherence_diagonal_zero(self):
        assert relative_entropy_coherence(DensityMatrix(np.diag([0.7, 0.3]))) == 0.0

    def test_coherence_plus_state(self):
        assert relative_entropy_coherence(plus_state()) == pytest.approx(math.log(2), abs=1e-10)

    def test_coherence_maximally_mixed(self):
        for m in (2, 3, 7):
            rho = DensityMatrix(np.eye(m) / m)
            assert relative_entropy_coherence(rho) == pytest.approx(0.0, abs=1e-12)

    def test_phase_unitary_invariance(self):
        gen = RngStream(21).generator()
        for trial in range(20):
            m = 2 + trial % 4
            rho = induced_mixed_state(m, m + 2, RngStream(21, trial))
            phases = np.exp(2j * np.pi * gen.random(m))
            rotated = DensityMatrix((phases[:, None] * rho.entries) * phases.conj()[None, :])
            assert relative_entropy_coherence(rotated) == pytest.approx(
                relative_entropy_coherence(rho), abs=1e-10
            )


class TestSpectrumOf:
    def test_identity(self):
        s = spectrum_of(DensityMatrix(np.eye(4) / 4))
        assert_allclose(s.values, np.full(4, 0.25), atol=1e-14)

    def test_diagonal(self):
        s = spectrum_of(DensityMatrix(np.diag([0.7, 0.3])))
        assert_allclose(s.values, [0.7, 0.3], atol=1e-14)

    def test_rank_one_projector(self):
        v = np.array([1, 1j, -1], dtype=complex) / math.sqrt(3)
        s = spectrum_of(DensityMatrix(np.outer(v, v.conj())))
        assert_allclose(s.values, [1.0, 0.0, 0.0], atol=1e-12)

    def test_random_state_residuals(self):
        rho = induced_mixed_state(6, 6, RngStream(8))
        w, v = np.linalg.eigh(rho.entries)
        residual = np.linalg.norm(rho.entries @ v - v * w, axis=0).max()
        assert residual <= 1e-10 * rho.dim


class TestPartialTrace:
    def test_product_state(self):
        psi = PureState([1, 0, 0, 0])
        rho = partial_trace(psi, 2, 2)
        assert_allclose(rho.entries, np.diag([1.0, 0.0]))

    def test_bell_state(self):
        psi = PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))
        rho = partial_trace(psi, 2, 2)
        assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-15)

    def test_trace_one(self):
        psi = PureState(np.exp(1j * np.arange(12)) / math.sqrt(12))
        rho = partial_trace(psi, 3, 4)
        assert np.trace(rho.entries).real == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partial_trace(PureState([1, 0, 0]), 2, 2)


class TestDensityMatrixValidation:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DensityMatrix([[0.5, 0.5], [0.2, 0.5]])

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError):
            DensityMatrix([[1.2, 0.0], [0.0, -0.2]])


class TestFunctionals:
    def test_record_consistency(self):
        rho = induced_mixed_state(4, 6, RngStream(17))
        rec = functionals(rho)
        assert rec.entropy == pytest.approx(von_neumann_entropy(spectrum_of(rho)), abs=1e-14)
        assert rec.coherence == pytest.approx(relative_entropy_coherence(rho), abs=1e-12)
        assert 0.0 <= rec.subentropy <= SUBENTROPY_MAX + 1e-9

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Functionals(entropy=0.1, subentropy=0.6, coherence=0.0)
        with pytest.raises(ValueError):
            Functionals(entropy=-0.1, subentropy=0.0, coherence=0.0)


def test_entropy_values_handles_zeros():
    out = entropy_values(np.array([[0.5, 0.5, 0.0], [1.0, 0.0, 0.0]]))
    assert_allclose(out, [math.log(2), 0.0], atol=1e-15)


def test_euler_gamma_constant():
    assert EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-15)
    assert SUBENTROPY_MAX == pytest.approx(0.4227843350984671, abs=1e-15)
