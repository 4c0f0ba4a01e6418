import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from selftest_lab.bitstrings import AdjacencyMatrix
from selftest_lab.linalg import (
    PAULI_X,
    PAULI_Z,
    StateVector,
    bipartite_expectation,
    graph_state,
)
from selftest_lab.strategies import (
    EpsilonBundle,
    Measurement,
    NoiseSpec,
    Question,
    Strategy,
    basis_vectors,
    ceil_log2,
    honest_my_strategy,
    honest_spp_strategy,
    load_strategy,
    my_basis_string,
    my_question_kinds,
    observable_for_symbol,
    perturb_strategy,
    product_basis_measurement,
    spp_question_kinds,
    strategy_from_json,
    strategy_to_json,
    symbol_projector,
    validate_strategy,
)

SQRT2 = math.sqrt(2.0)

_HONEST_M1 = honest_my_strategy(1)  # shared by the hypothesis property


def random_projective_measurement(rng, num_symbols):
    """Random rank-1 projective measurement with 2^m outcomes."""
    dim = 2**num_symbols
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(a)
    answers = [
        tuple(1 if (i >> b) & 1 == 0 else -1 for b in range(num_symbols))
        for i in range(dim)
    ]
    return Measurement(
        {ans: np.outer(q[:, i], q[:, i].conj()) for i, ans in enumerate(answers)}
    )


class TestSymbolProjector:
    def test_single_answer_measurement(self):
        meas = product_basis_measurement("X")
        plus, minus = basis_vectors("X")
        assert np.allclose(
            symbol_projector(meas, 1, 1), np.outer(plus, plus.conj())
        )
        assert np.allclose(
            symbol_projector(meas, 1, -1), np.outer(minus, minus.conj())
        )

    def test_completeness_of_symbol_split(self):
        meas = product_basis_measurement("XZ")
        for k in (1, 2):
            total = symbol_projector(meas, k, 1) + symbol_projector(meas, k, -1)
            assert np.allclose(total, np.eye(4), atol=1e-12)

    def test_honest_all_x_first_symbol(self):
        meas = product_basis_measurement("XX")
        plus, _ = basis_vectors("X")
        expected = np.kron(np.outer(plus, plus.conj()), np.eye(2))
        assert np.allclose(symbol_projector(meas, 1, 1), expected, atol=1e-12)

    def test_index_out_of_range(self):
        meas = product_basis_measurement("X")
        with pytest.raises(ValueError):
            symbol_projector(meas, 2, 1)


class TestObservableForSymbol:
    def test_honest_all_x(self):
        meas = product_basis_measurement("XX")
        assert np.allclose(
            observable_for_symbol(meas, 1).matrix, np.kron(PAULI_X, np.eye(2)),
            atol=1e-12,
        )
        assert np.allclose(
            observable_for_symbol(meas, 2).matrix, np.kron(np.eye(2), PAULI_X),
            atol=1e-12,
        )

    def test_index_family_follows_bit_rule(self):
        # m=2, j=1: sub-test 1 has LSB 1 -> X, sub-test 2 has LSB 0 -> Z,
        # for both the X- and Z-labelled families (the published rules agree).
        assert my_basis_string("X1", 2) == "XZ"
        assert my_basis_string("Z1", 2) == "XZ"
        meas = product_basis_measurement(my_basis_string("Z1", 2))
        assert np.allclose(
            observable_for_symbol(meas, 2).matrix, np.kron(np.eye(2), PAULI_Z),
            atol=1e-12,
        )

    def test_random_measurements_give_hermitian_unitary(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            meas = random_projective_measurement(rng, 2)
            for k in (1, 2):
                obs = observable_for_symbol(meas, k)  # validates at 1e-10
                assert np.allclose(
                    obs.matrix @ obs.matrix, np.eye(4), atol=1e-10
                )

    def test_same_question_observables_commute(self):
        # Forced by the construction: all symbol observables of one
        # measurement are sums of the same commuting projector family.
        rng = np.random.default_rng(13)
        for _ in range(10):
            meas = random_projective_measurement(rng, 2)
            m1 = observable_for_symbol(meas, 1).matrix
            m2 = observable_for_symbol(meas, 2).matrix
            assert np.abs(m1 @ m2 - m2 @ m1).max() < 1e-10


class TestHonestMyStrategy:
    def test_question_count_is_logarithmic(self):
        for m in range(1, 9):
            assert len(my_question_kinds(m)) == 3 + 2 * ceil_log2(m)

    def test_m1_has_no_index_families(self):
        s = honest_my_strategy(1)
        assert s.kinds("alice") == ("X", "Z", "D")

    def test_pair_correlation(self):
        s = honest_my_strategy(1)
        val = bipartite_expectation(
            s.state, s.observable("alice", "X", 1), s.observable("bob", "Z", 1)
        )
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_m2_golden_measurement_table(self):
        # Locks the index-bit convention: j=1 is the least significant bit
        # of the 1-based sub-test index.
        assert my_basis_string("X1", 2) == "XZ"
        assert my_basis_string("X1", 3) == "XZX"
        assert my_basis_string("X2", 3) == "ZXX"
        assert my_basis_string("Z1", 3) == "XZX"
        assert my_basis_string("Z2", 3) == "ZXX"

    def test_validates(self):
        report = validate_strategy(honest_my_strategy(2))
        assert report.ok

    def test_state_is_pair_graph_state(self):
        s = honest_my_strategy(2)
        expected = graph_state(AdjacencyMatrix.half_swap(4))
        assert np.array_equal(s.state.amps, expected.amps)

    def test_m_zero_rejected(self):
        with pytest.raises(ValueError):
            honest_my_strategy(0)


class TestHonestSppStrategy:
    def test_question_set(self):
        assert spp_question_kinds(1) == ("X", "Z", "D", "E")
        assert len(spp_question_kinds(2)) == 16

    def test_x_against_d(self):
        s = honest_spp_strategy(1)
        val = bipartite_expectation(
            s.state, s.observable("alice", "X", 1), s.observable("bob", "D", 1)
        )
        assert val == pytest.approx(1 / SQRT2, abs=1e-12)

    def test_single_pair_chsh_reaches_quantum_max(self):
        s = honest_spp_strategy(1)
        x, z = s.observable("alice", "X", 1), s.observable("alice", "Z", 1)
        d, e = s.observable("bob", "D", 1), s.observable("bob", "E", 1)
        val = (
            bipartite_expectation(s.state, x, d)
            - bipartite_expectation(s.state, x, e)
            + bipartite_expectation(s.state, z, d)
            + bipartite_expectation(s.state, z, e)
        )
        assert val == pytest.approx(2 * SQRT2, abs=1e-12)

    def test_mixed_string_measures_per_symbol(self):
        s = honest_spp_strategy(2)
        assert np.allclose(
            s.observable("alice", "XZ", 1), np.kron(PAULI_X, np.eye(2)), atol=1e-12
        )
        assert np.allclose(
            s.observable("alice", "XZ", 2), np.kron(np.eye(2), PAULI_Z), atol=1e-12
        )

    def test_validates(self):
        assert validate_strategy(honest_spp_strategy(1)).ok


class TestPerturbStrategy:
    def test_zero_noise_is_identity(self):
        s = honest_my_strategy(1)
        same = perturb_strategy(s, NoiseSpec(theta=0.0, w=0.0), seed=9)
        for qa, qb in (("X", "Z"), ("Z", "X"), ("X", "D")):
            want = bipartite_expectation(
                s.state, s.observable("alice", qa, 1), s.observable("bob", qb, 1)
            )
            got = bipartite_expectation(
                same.state, same.observable("alice", qa, 1), same.observable("bob", qb, 1)
            )
            assert got == pytest.approx(want, abs=1e-12)

    def test_rotated_alice_oracle(self):
        # Independent oracle: conjugate X by the rotation matrix directly and
        # evaluate the 4-dimensional expectation by hand.
        theta = 0.05
        s = honest_my_strategy(1)
        noisy = perturb_strategy(s, NoiseSpec(theta=theta, parties=("alice",)), seed=0)
        got = bipartite_expectation(
            noisy.state, noisy.observable("alice", "X", 1), noisy.observable("bob", "Z", 1)
        )
        c, sn = math.cos(theta), math.sin(theta)
        u = np.array([[c, -sn], [sn, c]])
        psi = graph_state(AdjacencyMatrix.half_swap(2)).amps
        oracle = np.vdot(psi, np.kron(u @ PAULI_X @ u.T, PAULI_Z) @ psi).real
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(math.cos(2 * theta), abs=1e-12)

    def test_noisy_strategy_stays_valid(self):
        s = honest_spp_strategy(1)
        noisy = perturb_strategy(s, NoiseSpec(theta=0.2, w=0.1), seed=3)
        assert validate_strategy(noisy).ok

    def test_same_seed_same_strategy(self):
        s = honest_my_strategy(1)
        a = perturb_strategy(s, NoiseSpec(theta=0.1, w=0.05), seed=11)
        b = perturb_strategy(s, NoiseSpec(theta=0.1, w=0.05), seed=11)
        assert np.array_equal(a.state.amps, b.state.amps)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(theta=4.0)
        with pytest.raises(ValueError):
            NoiseSpec(w=1.5)

    @given(
        hst.floats(min_value=-1.0, max_value=1.0),
        hst.floats(min_value=0.0, max_value=0.5),
        hst.integers(min_value=0, max_value=2**16),
    )
    @settings(max_examples=25, deadline=None)
    def test_any_noise_keeps_strategy_valid(self, theta, w, seed):
        s = perturb_strategy(_HONEST_M1, NoiseSpec(theta=theta, w=w), seed=seed)
        assert validate_strategy(s).ok


class TestValidateStrategy:
    def test_incomplete_measurement_flagged(self):
        zero_proj = np.zeros((2, 2), dtype=complex)
        e0 = np.zeros((2, 2), dtype=complex)
        e0[0, 0] = 1.0
        broken = Measurement({(1,): e0, (-1,): zero_proj})
        psi = StateVector(np.array([1, 0, 0, 1]) / SQRT2, (("A", 2), ("B", 2)))
        good = product_basis_measurement("Z")
        s = Strategy(state=psi, alice={"Z": broken}, bob={"Z": good}, m=1)
        report = validate_strategy(s)
        assert not report.ok
        names = {c.name for c in report.failures()}
        assert "completeness" in names

    def test_cross_party_commutation_exact(self):
        report = validate_strategy(honest_my_strategy(2))
        cross = [c for c in report.checks if c.name == "cross-party-commute"]
        assert cross and cross[0].max_deviation == 0.0

    def test_wrong_dimension_rejected_at_construction(self):
        psi = StateVector(np.array([1, 0, 0, 1]) / SQRT2, (("A", 2), ("B", 2)))
        with pytest.raises(ValueError):
            Strategy(
                state=psi,
                alice={"Z": product_basis_measurement("ZZ")},
                bob={"Z": product_basis_measurement("Z")},
                m=1,
            )


class TestSerialization:
    def test_round_trip_preserves_everything(self):
        s = perturb_strategy(
            honest_my_strategy(2), NoiseSpec(theta=0.03, w=0.01), seed=5
        )
        doc = json.loads(json.dumps(strategy_to_json(s)))
        back = strategy_from_json(doc)
        assert back.m == s.m
        assert np.array_equal(back.state.amps, s.state.amps)
        for party in ("alice", "bob"):
            assert back.kinds(party) == s.kinds(party)
            for kind in s.kinds(party):
                for k in range(1, s.m + 1):
                    assert np.array_equal(
                        back.observable(party, kind, k),
                        s.observable(party, kind, k),
                    )

    def test_named_forms(self):
        doc = {"type": "honest-my", "m": 2}
        s = load_strategy(doc)
        assert s.kinds("alice") == my_question_kinds(2)
        noisy = load_strategy(
            {"type": "honest-spp", "m": 1, "noise": {"theta": 0.05, "w": 0.0, "seed": 1}}
        )
        val = bipartite_expectation(
            noisy.state,
            noisy.observable("alice", "X", 1),
            noisy.observable("bob", "Z", 1),
        )
        assert val == pytest.approx(math.cos(0.2), abs=1e-12)

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError):
            load_strategy({"type": "dishonest", "m": 1})


class TestSmallTypes:
    def test_question_party_validated(self):
        Question("alice", "X")
        with pytest.raises(ValueError):
            Question("eve", "X")

    def test_epsilon_bundle_nonnegative(self):
        EpsilonBundle(eps=0.1)
        with pytest.raises(ValueError):
            EpsilonBundle(eps1=-0.1)

    def test_measurement_validation(self):
        eye = np.eye(2, dtype=complex)
        with pytest.raises(ValueError):
            Measurement({})
        with pytest.raises(ValueError):
            Measurement({(0,): eye})  # answers must be +-1
        with pytest.raises(ValueError):
            Measurement({(1,): eye, (1, 1): eye})  # inconsistent lengths
        with pytest.raises(ValueError):
            Measurement({(1,): np.zeros((2, 3))})  # not square
