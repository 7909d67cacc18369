import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qadvantage.dec_pomdp import (
    CYCLE,
    STATES,
    CommonRandomness,
    Kernel,
    State,
    enumerate_actions_u,
    enumerate_actions_v,
    make_delta_floor_kernel,
    make_periodic_kernel,
    make_uniform_kernel,
    reward,
    step,
    tau,
)
from qadvantage.dec_pomdp.model import as_distribution, draw_index, u_index, v_index
from qadvantage.signs import decode

from _oracles import triples

P, M = 1, -1


class TestSpaces:
    def test_state_range(self):
        with pytest.raises(ValueError):
            State(0, 1)
        assert State.from_index(5) == State(2, 3)
        assert [s.index for s in STATES] == list(range(9))
        assert State.parse("3,1") == State(3, 1)

    def test_actions_u(self):
        assert enumerate_actions_u() == [(P, P, P), (P, M, M), (M, P, M), (M, M, P)]
        assert enumerate_actions_u() == triples(1)

    def test_actions_v(self):
        assert enumerate_actions_v() == [(P, P, M), (P, M, P), (M, P, P), (M, M, M)]
        assert enumerate_actions_v() == triples(-1)

    def test_index_errors(self):
        with pytest.raises(ValueError):
            u_index((P, P, M))
        with pytest.raises(ValueError):
            v_index((P, P, P))
        assert v_index("--" + "-") == 3


class TestReward:
    def test_direct_example(self):
        assert reward(State(3, 2), (P, M, M), (P, P, M)) == 1

    def test_all_plus_against_all_minus(self):
        assert {reward(s, (P, P, P), (M, M, M)) for s in STATES} == {-1}

    @given(st.sampled_from(STATES), st.sampled_from(enumerate_actions_u()), st.sampled_from(enumerate_actions_v()))
    def test_unit_modulus(self, s, u, v):
        assert abs(reward(s, u, v)) == 1
        assert reward(s, u, v) == u[s.y - 1] * v[s.x - 1]


class TestKernels:
    def test_tau_first_step(self):
        assert tau(State(1, 1)) == State(1, 2)

    def test_tau_period_nine(self):
        for s in STATES:
            t, seen = s, []
            for _ in range(9):
                seen.append(t)
                t = tau(t)
            assert t == s
            assert len(set(seen)) == 9

    def test_uniform_with_declared_delta(self):
        k = make_uniform_kernel(0.1)
        assert k.min_entry == pytest.approx(1 / 9)

    def test_declared_delta_enforced(self):
        with pytest.raises(ValueError):
            Kernel(np.full((9, 4, 4, 9), 1 / 9), declared_delta=1 / 9)
        with pytest.raises(ValueError):
            make_uniform_kernel(0.12)

    @pytest.mark.parametrize("delta", [0.0, -0.01, 1 / 9, 0.2])
    def test_floor_range(self, delta):
        with pytest.raises(ValueError):
            make_delta_floor_kernel(0, delta)

    @given(st.integers(0, 2**32 - 1), st.floats(1e-4, 0.11))
    def test_floor_kernel_valid(self, seed, delta):
        k = make_delta_floor_kernel(seed, delta)
        assert np.all(k.table > delta)
        np.testing.assert_allclose(k.table.sum(axis=-1), 1.0, atol=1e-12)

    def test_floor_kernel_seeded(self):
        a, b = make_delta_floor_kernel(4, 0.05), make_delta_floor_kernel(4, 0.05)
        assert np.array_equal(a.table, b.table)
        assert not np.array_equal(a.table, make_delta_floor_kernel(5, 0.05).table)

    def test_periodic_kernel(self):
        k = make_periodic_kernel()
        for s in STATES:
            assert np.all(k.table[s.index, :, :, tau(s).index] == 1.0)
        assert k.declared_delta == 0.0

    def test_bad_rows(self):
        t = np.full((9, 4, 4, 9), 1 / 9)
        t[0, 0, 0, 0] += 1e-9
        with pytest.raises(ValueError):
            Kernel(t)
        with pytest.raises(ValueError):
            Kernel(np.full((9, 4, 4, 8), 1 / 8))

    def test_table_is_read_only(self):
        with pytest.raises(ValueError):
            make_uniform_kernel().table[0, 0, 0, 0] = 1

    def test_json_round_trip(self, tmp_path):
        k = make_delta_floor_kernel(12, 0.03)
        path = tmp_path / "k.json"
        k.save(path)
        data = json.loads(path.read_text())
        assert set(data["table"]) == {s.key() for s in STATES}
        assert set(data["table"]["1,1"]) == {"+++", "+--", "-+-", "--+"}
        assert set(data["table"]["1,1"]["+++"]) == {"++-", "+-+", "-++", "---"}
        back = Kernel.load(path)
        assert np.array_equal(back.table, k.table)
        assert back.declared_delta == k.declared_delta
        assert back.kernel_id == k.kernel_id

    def test_row_lookup(self):
        k = make_periodic_kernel()
        row = k.row(State(1, 2), decode("+--"), decode("-++"))
        assert row[State(2, 3).index] == 1.0


class TestStep:
    def test_periodic(self, rng):
        assert step(State(1, 2), (P, P, P), (P, P, M), make_periodic_kernel(), rng) == State(2, 3)

    def test_uniform_frequencies(self):
        rng = np.random.default_rng(17)
        k = make_uniform_kernel()
        n = 100_000
        counts = np.zeros(9)
        s = State(1, 1)
        for _ in range(n):
            s = step(s, (P, P, P), (P, P, M), k, rng)
            counts[s.index] += 1
        sigma = math.sqrt(n * (1 / 9) * (8 / 9))
        assert np.all(np.abs(counts - n / 9) < 3 * sigma)

    def test_deterministic(self):
        k = make_delta_floor_kernel(2, 0.05)

        def walk(seed):
            rng = np.random.default_rng(seed)
            s, out = State(2, 2), []
            for _ in range(50):
                s = step(s, (P, M, M), (M, M, M), k, rng)
                out.append(s)
            return out

        assert walk(8) == walk(8)

    def test_draw_index_inverse_cdf(self):
        cdf = np.cumsum(np.full(9, 1 / 9))
        assert draw_index(cdf, 0.0) == 0
        assert draw_index(cdf, 0.999999) == 8
        assert draw_index(cdf, 1 / 9 + 1e-12) == 1
        # rounding in the last bucket is absorbed by the final state
        assert draw_index(np.array([0.5, 0.9999999]), 0.99999995) == 1


class TestCommonRandomness:
    def test_same_seed_same_stream(self):
        a, b = CommonRandomness(99), CommonRandomness(99)
        assert [a.next_word() for _ in range(5)] == b.words(5).tolist()
        assert a.position == b.position == 5

    def test_words_are_64_bit(self):
        w = CommonRandomness(1).words(2000)
        assert w.dtype == np.uint64
        assert w.max() > 2**63  # top bit used
        # low bit is fair to within 4 sigma
        assert abs(np.mean(w & np.uint64(1)) - 0.5) < 4 * math.sqrt(0.25 / 2000)


class TestDistributions:
    def test_uniform_default_exact(self):
        d = as_distribution()
        assert d.shape == (3, 3) and d.sum() == 1 and d[0, 0] == Fraction(1, 9)

    def test_mapping(self):
        d = as_distribution({State(2, 3): 1.0})
        assert d[1, 2] == 1.0 and d.sum() == 1

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            as_distribution(np.full(9, 0.1))
        with pytest.raises(ValueError):
            as_distribution(np.r_[-0.1, 1.1, np.zeros(7)])


def test_cycle_constant_lists_each_state_once():
    assert sorted(CYCLE) == sorted(STATES)
