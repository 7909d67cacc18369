import itertools
import json
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qadvantage.complexlin import embed_on_factors, identity, kron, mat_prod
from qadvantage.mermin_peres import (
    ALICE_FACTORS,
    BOB_FACTORS,
    FOUR_QUBITS,
    LINES,
    DetGameStrategy,
    MPSquare,
    build_square,
    classical_bruteforce,
    default_order,
    distribution_to_json,
    exact_round_distribution,
    initial_register,
    mixture_win_probability,
    quantum_round,
    quantum_rounds,
    validate_square,
    wins,
)
from qadvantage.quantum import PAULI, SIGMA_0, SIGMA_X, SIGMA_Z, measure_probs
from qadvantage.signs import ACTIONS_U, ACTIONS_V, decode, encode

from _oracles import SYMBOLIC_SQUARE, naive_game_max, pauli_string_product, pauli_symbolic

CELLS = [(i, j) for i in LINES for j in LINES]


def symbolic_matrix(term):
    phase, (a, b) = term
    return phase * kron(PAULI[a], PAULI[b])


class TestSquare:
    def test_entry_11(self):
        assert np.array_equal(build_square().entry(1, 1), kron(SIGMA_0, SIGMA_Z))

    @pytest.mark.parametrize("cell", CELLS)
    def test_entries_match_symbolic_table(self, cell):
        i, j = cell
        assert np.array_equal(build_square().entry(i, j), symbolic_matrix(SYMBOLIC_SQUARE[i - 1][j - 1]))

    @pytest.mark.parametrize("i", LINES)
    def test_row_products_symbolic(self, i):
        assert pauli_string_product(*SYMBOLIC_SQUARE[i - 1]) == (1, "00")
        np.testing.assert_allclose(mat_prod(*build_square().row(i)), identity(4), atol=1e-15)

    @pytest.mark.parametrize("j", LINES)
    def test_column_products_symbolic(self, j):
        col = [SYMBOLIC_SQUARE[k][j - 1] for k in range(3)]
        assert pauli_string_product(*col) == (-1, "00")
        np.testing.assert_allclose(mat_prod(*build_square().column(j)), -identity(4), atol=1e-15)

    def test_column_3_via_single_qubit_products(self):
        # (z x y) kron (z x y) = (i I) kron (i I)
        phase = 1
        labels = "0"
        for a in "zxy":
            p, labels = pauli_symbolic(labels, a)
            phase *= p
        assert (phase, labels) == (1j, "0")

    def test_validate_passes(self):
        report = validate_square(build_square())
        assert report.passed
        assert set(report.checks) == {
            "hermitian",
            "involution",
            "commutation",
            "row_products",
            "column_products",
            "eigenvalues",
        }
        assert report.max_residual < 1e-12
        assert report.failures == []

    def test_report_json(self):
        data = json.loads(validate_square(build_square()).to_json())
        assert all(set(v) == {"pass", "max_residual"} for v in data.values())
        assert all(v["pass"] for v in data.values())

    def test_flipped_33_breaks_column_3(self):
        sq = build_square()
        report = validate_square(sq.replace(3, 3, -sq.entry(3, 3)))
        assert report.failing_checks() == ["row_products", "column_products"]
        assert "column_products: column 3" in report.failures
        assert "row_products: row 3" in report.failures
        assert report.checks["column_products"].max_residual == pytest.approx(2.0)

    def test_swapped_12_breaks_row_1_commutation(self):
        report = validate_square(build_square().replace(1, 2, kron(SIGMA_X, SIGMA_0)))
        assert not report.checks["commutation"].passed
        assert "commutation: row 1" in report.failures
        assert report.checks["commutation"].max_residual > 0

    def test_non_hermitian_entry(self):
        report = validate_square(build_square().replace(2, 2, 1j * kron(SIGMA_0, SIGMA_X)))
        assert not report.checks["hermitian"].passed
        assert "hermitian: cell (2, 2)" in report.failures

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            MPSquare(((identity(4),) * 3,) * 2)
        with pytest.raises(ValueError):
            MPSquare(((identity(2),) * 3,) * 3)

    def test_local_pvm_embedding(self):
        sq = build_square()
        pvm = sq.local_pvm("bob", 3, 3)
        expected = embed_on_factors(sq.entry(3, 3), BOB_FACTORS, FOUR_QUBITS)
        np.testing.assert_allclose(pvm.observable(), expected, atol=1e-15)
        assert ALICE_FACTORS == (0, 2)


class TestRegister:
    def test_initial_register_is_two_bell_pairs(self):
        rho = initial_register()
        assert rho.is_valid()
        # Alice-1 and Bob-1 are correlated in Z, Alice-1 and Alice-2 are not
        zz_ab = embed_on_factors(kron(SIGMA_Z, SIGMA_Z), (0, 1), FOUR_QUBITS)
        zz_aa = embed_on_factors(kron(SIGMA_Z, SIGMA_Z), (0, 2), FOUR_QUBITS)
        assert np.trace(zz_ab @ rho.mat).real == pytest.approx(1.0)
        assert np.trace(zz_aa @ rho.mat).real == pytest.approx(0.0)

    @pytest.mark.parametrize("cell", CELLS)
    def test_alice_and_bob_marginals_agree_on_shared_cell(self, cell):
        # on the Bell pairs, measuring the same cell on both sides gives perfectly
        # correlated results (the observables are real up to sigma_y pairs)
        i, j = cell
        sq = build_square()
        a = sq.local_pvm("alice", i, j).observable()
        b = sq.local_pvm("bob", i, j).observable()
        assert np.trace(a @ b @ initial_register().mat).real == pytest.approx(1.0, abs=1e-12)


class TestQuantumRound:
    @pytest.mark.parametrize("cell", CELLS)
    def test_always_wins(self, cell):
        rng = np.random.default_rng(hash(cell) % 2**32)
        for _ in range(1000 if cell == (3, 3) else 120):
            a, b = quantum_round(*cell, rng)
            assert a[0] * a[1] * a[2] == 1
            assert b[0] * b[1] * b[2] == -1
            assert wins(*cell, a, b)

    def test_deterministic(self):
        r1 = [quantum_round(2, 3, np.random.default_rng(9)) for _ in range(3)]
        r2 = [quantum_round(2, 3, np.random.default_rng(9)) for _ in range(3)]
        assert r1 == r2

    def test_batched_matches_sequential(self):
        rng1, rng2 = np.random.default_rng(3), np.random.default_rng(3)
        seq = [quantum_round(1, 2, rng1) for _ in range(200)]
        a, b = quantum_rounds(1, 2, 200, rng2)
        assert seq == [(tuple(map(int, x)), tuple(map(int, y))) for x, y in zip(a, b)]

    def test_bad_line(self):
        with pytest.raises(ValueError):
            quantum_round(0, 1, np.random.default_rng(0))

    @given(st.integers(0, 2**63 - 1), st.sampled_from(CELLS))
    def test_constraints_for_any_seed(self, seed, cell):
        a, b = quantum_rounds(*cell, 20, np.random.default_rng(seed))
        assert np.all(a.prod(axis=1) == 1)
        assert np.all(b.prod(axis=1) == -1)
        assert np.all(a[:, cell[1] - 1] * b[:, cell[0] - 1] == 1)


class TestExactDistribution:
    @pytest.mark.parametrize("cell", CELLS)
    def test_normalised_and_winning(self, cell):
        dist = exact_round_distribution(*cell)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(wins(*cell, a, b) for a, b in dist)

    @pytest.mark.parametrize("cell", CELLS)
    def test_support_is_all_compatible_pairs(self, cell):
        # Alice's row is uniform over her 4 triples and Bob's column is then
        # pinned at the shared cell, leaving 2 choices: 8 points of mass 1/8
        dist = exact_round_distribution(*cell)
        assert len(dist) == 8
        assert all(abs(p - 1 / 8) < 1e-12 for p in dist.values())

    @pytest.mark.parametrize("cell", [(1, 1), (2, 3), (3, 3)])
    def test_order_invariance(self, cell):
        i, j = cell
        base = exact_round_distribution(i, j)
        inter = [m for pair in zip(default_order(i, j)[:3], default_order(i, j)[3:]) for m in pair]
        for order in (inter, default_order(i, j)[::-1], default_order(i, j)[3:] + default_order(i, j)[:3]):
            other = exact_round_distribution(i, j, order)
            assert other.keys() == base.keys()
            assert all(abs(other[k] - base[k]) < 1e-9 for k in base)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            exact_round_distribution(1, 1, default_order(1, 2))

    def test_json_keys(self):
        data = distribution_to_json(exact_round_distribution(1, 1))
        a, b = next(iter(data)).split("|")
        assert decode(a) in ACTIONS_U and decode(b) in ACTIONS_V

    def test_monte_carlo_goodness_of_fit(self):
        n = 10_000
        for c, cell in enumerate(CELLS):
            exact = exact_round_distribution(*cell)
            a, b = quantum_rounds(*cell, n, np.random.default_rng([11, c]))
            counts = Counter(zip(map(tuple, a.tolist()), map(tuple, b.tolist())))
            assert set(counts) <= set(exact)
            keys = set(exact) | set(counts)
            tv = 0.5 * sum(abs(counts.get(k, 0) / n - exact.get(k, 0.0)) for k in keys)
            assert tv < 5 / math.sqrt(n), (cell, tv)


class TestClassical:
    def test_bruteforce(self):
        res = classical_bruteforce()
        assert res.max_win_prob == Fraction(8, 9)
        assert res.pair_count == 4096
        assert res.min_losing_cells >= 1
        assert int(res.win_counts.max()) == 8

    def test_against_naive_loop(self):
        best, pairs = naive_game_max()
        assert best == classical_bruteforce().max_win_prob
        assert pairs == 4096

    def test_argmax_complete_and_sorted(self):
        res = classical_bruteforce()
        assert len(res.argmax) == int(np.count_nonzero(res.win_counts == 8))
        keys = [(s.encode()["alice"], s.encode()["bob"]) for s in res.argmax]
        rank = {t: k for k, t in enumerate(ACTIONS_U)}
        rank_v = {t: k for k, t in enumerate(ACTIONS_V)}
        order = [
            (tuple(rank[decode(x)] for x in a), tuple(rank_v[decode(y)] for y in b)) for a, b in keys
        ]
        assert order == sorted(order)
        assert all(s.win_probability() == Fraction(8, 9) for s in res.argmax)

    def test_every_pair_loses_somewhere(self):
        for a, b in itertools.product(itertools.product(ACTIONS_U, repeat=3), itertools.product(ACTIONS_V, repeat=3)):
            if (a[0], b[0]) != (ACTIONS_U[0], ACTIONS_V[0]):
                continue
            assert DetGameStrategy(a, b).win_count() <= 8

    def test_invalid_strategy(self):
        with pytest.raises(ValueError):
            DetGameStrategy(((1, 1, -1),) * 3, (ACTIONS_V[0],) * 3)

    @given(st.lists(st.tuples(st.floats(0.01, 1), st.integers(0, 4095)), min_size=1, max_size=8))
    def test_mixtures_do_not_beat_deterministic(self, parts):
        us = list(itertools.product(ACTIONS_U, repeat=3))
        vs = list(itertools.product(ACTIONS_V, repeat=3))
        total = sum(w for w, _ in parts)
        mix = [(w / total, DetGameStrategy(us[k // 64], vs[k % 64])) for w, k in parts]
        assert mixture_win_probability(mix) <= 8 / 9 + 1e-12


def test_round_is_local_per_side():
    # Alice's marginal does not depend on Bob's column (no signalling)
    for i in LINES:
        marginals = []
        for j in LINES:
            m = Counter()
            for (a, _), p in exact_round_distribution(i, j).items():
                m[encode(a)] += p
            marginals.append(m)
        for m in marginals[1:]:
            assert all(abs(m[k] - marginals[0][k]) < 1e-12 for k in set(m) | set(marginals[0]))


def test_measurement_probs_on_register_are_half():
    sq = build_square()
    for cell in CELLS:
        probs = measure_probs(sq.local_pvm("alice", *cell), initial_register())
        assert probs[1] == pytest.approx(0.5, abs=1e-12)
