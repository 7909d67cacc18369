"""Exhaustive checks of the classical bounds.

Everything here enumerates: the 16 action pairs, the 64 x 64 memoryless
table pairs, or all table pairs per context value.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .. import kernels
from ..signs import ACTIONS_U, ACTIONS_V, all_tables, encode, sign_triples, tables_array
from .model import OBS, STATES, Kernel, as_distribution, table_indices, u_index, v_index

FLOOR_SLACK = 1e-12


@lru_cache(maxsize=None)
def _tables():
    a = all_tables(ACTIONS_U)
    b = all_tables(ACTIONS_V)
    return a, b, tables_array(a), tables_array(b)


def table_index_triple(k: int) -> tuple[int, int, int]:
    """Action indices (for observations 1, 2, 3) of the k-th table in canonical order."""
    return (k // 16, (k // 4) % 4, k % 4)


def lemma_grid(u, v) -> np.ndarray:
    """3x3 grid, entry [i-1, j-1] = u^(j) v^(i)."""
    return np.outer(np.asarray(v), np.asarray(u)).astype(int)


@dataclass
class LemmaReport:
    passed: bool
    pairs_checked: int
    min_negative_cells: int
    negative_cells: dict

    def to_dict(self) -> dict:
        return asdict(self)


def lemma_oneneg_check() -> LemmaReport:
    """Every (u, v) in U x V has a cell with u^(j) v^(i) = -1."""
    counts = {}
    for u, v in itertools.product(ACTIONS_U, ACTIONS_V):
        counts[f"{encode(u)}|{encode(v)}"] = int(np.sum(lemma_grid(u, v) == -1))
    low = min(counts.values())
    return LemmaReport(low >= 1, len(counts), low, counts)


def losing_mask(alice_product: int = 1, bob_product: int = -1) -> np.ndarray:
    """``(A*B, 9)`` bool array: table pair p loses in state (row-major) s.

    The product arguments exist to show the bound depends on the parity
    mismatch; the POMDP uses (+1, -1).
    """
    a = tables_array(all_tables(sign_triples(alice_product)))
    b = tables_array(all_tables(sign_triples(bob_product)))
    r = np.einsum("axy,byx->abxy", a.astype(np.int64), b.astype(np.int64))
    return (r == -1).reshape(a.shape[0] * b.shape[0], 9)


def check_floor(dist: np.ndarray, delta: float) -> None:
    d = np.asarray(dist, dtype=np.float64).reshape(-1)
    if np.any(d < delta - FLOOR_SLACK) or abs(d.sum() - 1.0) > 1e-12:
        raise ValueError(f"distribution violates the floor {delta} or does not sum to 1")


def floor_distribution(rng: np.random.Generator, delta: float) -> np.ndarray:
    """Random law on the 9 states with every cell >= delta."""
    d = delta + (1 - 9 * delta) * rng.dirichlet(np.ones(9))
    return (d / d.sum()).reshape(3, 3)


@dataclass
class CorollaryReport:
    passed: bool
    delta: float
    pairs: int
    uniform_min_loss: str
    uniform_min_loss_value: float
    uniform_max_reward: str
    floor_trials: int
    floor_min_loss: float
    context_count: int
    context_min_loss: list = field(default_factory=list)
    context_overall_loss: float = 0.0
    plus_one_variant_min_loss: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def corollary_checks(
    delta: float,
    context_count: int = 4,
    *,
    seed: int = 0,
    trials: int = 16,
    distributions=None,
) -> CorollaryReport:
    """Exhaustive loss-probability checks over all 4096 memoryless table pairs.

    Unconditional: under the uniform law and under ``trials`` seeded laws with
    floor ``delta`` (or the given ``distributions``), every pair loses with
    probability at least the floor. Conditional: ``context_count`` context
    values, each with its own floor-``delta`` conditional law and, per
    context, every table pair; also a random pair choice per context
    aggregated over a random context law.
    """
    if not 0.0 < delta <= 1 / 9:
        raise ValueError(f"delta must lie in (0, 1/9], got {delta}")
    if context_count < 1:
        raise ValueError("context_count must be positive")
    mask = losing_mask()
    rng = np.random.default_rng(seed)

    counts = mask.sum(axis=1)
    uniform_min = Fraction(int(counts.min()), 9)
    ok = uniform_min >= Fraction(1, 9)

    if distributions is None:
        distributions = [floor_distribution(rng, delta) for _ in range(trials)]
    floor_min = np.inf
    for d in distributions:
        check_floor(d, delta)
        loss = mask @ np.asarray(d, dtype=np.float64).reshape(-1)
        floor_min = min(floor_min, float(loss.min()))
    ok &= floor_min >= delta - FLOOR_SLACK

    ctx_law = rng.dirichlet(np.ones(context_count))
    ctx_min = []
    overall = 0.0
    for z in range(context_count):
        d = floor_distribution(rng, delta)
        check_floor(d, delta)
        loss = mask @ d.reshape(-1)
        ctx_min.append(float(loss.min()))
        pick = int(rng.integers(mask.shape[0]))
        overall += ctx_law[z] * float(loss[pick])
    ok &= min(ctx_min) >= delta - FLOOR_SLACK and overall >= delta - FLOOR_SLACK

    # with Bob's parity flipped to +1 the bound collapses: some pair never loses
    plus_one = float(losing_mask(1, 1).sum(axis=1).min()) / 9

    return CorollaryReport(
        passed=bool(ok),
        delta=delta,
        pairs=int(mask.shape[0]),
        uniform_min_loss=str(uniform_min),
        uniform_min_loss_value=float(uniform_min),
        uniform_max_reward=str(1 - 2 * uniform_min),
        floor_trials=len(distributions),
        floor_min_loss=floor_min,
        context_count=context_count,
        context_min_loss=ctx_min,
        context_overall_loss=overall,
        plus_one_variant_min_loss=plus_one,
    )


def exact_expected_reward_memoryless(table_a, table_b, dist=None):
    """``sum_{x,y} dist(x, y) * u(x)^(y) * v(y)^(x)``.

    Exact when ``dist`` holds Fractions (the default uniform law does), in
    which case a Fraction is returned.
    """
    a = [ACTIONS_U[k] for k in table_indices(table_a, u_index)]
    b = [ACTIONS_V[k] for k in table_indices(table_b, v_index)]
    d = as_distribution(dist)
    total = sum(d[x - 1, y - 1] * a[x - 1][y - 1] * b[y - 1][x - 1] for x in OBS for y in OBS)
    return total if isinstance(total, Fraction) else float(total)


def memoryless_rewards(dist) -> np.ndarray:
    """``(64, 64)`` one-shot expected reward of every table pair."""
    _, _, ta, tb = _tables()
    return kernels.pair_rewards(ta, tb, np.asarray(dist, dtype=np.float64).reshape(3, 3))


def best_memoryless_pair(dist):
    """First maximiser in canonical order: (alice index triple, bob index triple, value)."""
    r = memoryless_rewards(dist)
    # ties are common; rounding must not decide between them
    first = int(np.flatnonzero(r.ravel() >= r.max() - 1e-12)[0])
    a, b = np.unravel_index(first, r.shape)
    return table_index_triple(int(a)), table_index_triple(int(b)), float(r[a, b])


def exact_max_memoryless_uniform() -> Fraction:
    """Max one-shot reward under the uniform law, by exact integer counting."""
    _, _, ta, tb = _tables()
    sums = kernels.pair_rewards(ta, tb, np.ones((3, 3)))
    best = int(np.rint(sums.max()))
    if best != sums.max():
        raise ArithmeticError("non-integer cell sum")
    return Fraction(best, 9)


def memoryless_reward_profiles(kernel: Kernel, steps: int, initial=None):
    """Exact per-step expected reward of every memoryless pair, by forward recursion.

    Returns ``(rewards, floors)``: ``rewards[p, n]`` for the 4096 pairs and
    ``floors[n]``, the smallest state probability seen at time n over all
    pairs.
    """
    _, _, ta, tb = _tables()
    ia = np.array([table_index_triple(k) for k in range(64)])
    ib = ia.copy()
    xs = np.repeat(np.arange(3), 3)
    ys = np.tile(np.arange(3), 3)
    pair_a = np.repeat(np.arange(64), 64)
    pair_b = np.tile(np.arange(64), 64)
    acts_a = ia[pair_a][:, xs]  # (P, 9): Alice's action index in each state
    acts_b = ib[pair_b][:, ys]
    trans = kernel.table[np.arange(9)[None, :], acts_a, acts_b]  # (P, 9, 9)
    gain = ta[pair_a][:, xs, ys].astype(np.float64) * tb[pair_b][:, ys, xs]
    pi = np.tile(np.asarray(as_distribution(initial), dtype=np.float64).reshape(1, 9), (len(pair_a), 1))
    rewards = np.empty((len(pair_a), steps))
    floors = np.empty(steps)
    for n in range(steps):
        rewards[:, n] = np.sum(pi * gain, axis=1)
        floors[n] = pi.min()
        pi = np.einsum("ps,pst->pt", pi, trans)
    return rewards, floors


def exact_reward_profile(plan, kernel: Kernel, steps: int, initial=None):
    """Exact per-step expected reward for a policy pair driven by a shared plan.

    ``plan(context)`` returns Alice's and Bob's action-index triples, where
    ``context`` is ``None`` at time 0 and afterwards ``(prev_state, i, j)``
    with i, j the previous action indices. Returns ``(rewards, floors)`` with
    ``floors[n]`` the smallest conditional state probability at time n.
    """
    init = np.asarray(as_distribution(initial), dtype=np.float64).reshape(9)
    contexts = {None: 1.0}
    rewards = np.empty(steps)
    floors = np.empty(steps)
    for n in range(steps):
        nxt: dict = {}
        total = 0.0
        floor = np.inf
        for ctx, p in contexts.items():
            cond = init if ctx is None else kernel.table[ctx[0].index, ctx[1], ctx[2]]
            floor = min(floor, float(cond.min()))
            a, b = plan(ctx)
            for s in STATES:
                q = cond[s.index]
                if q == 0.0:
                    continue
                i, j = a[s.x - 1], b[s.y - 1]
                total += p * q * ACTIONS_U[i][s.y - 1] * ACTIONS_V[j][s.x - 1]
                key = (s, int(i), int(j))
                nxt[key] = nxt.get(key, 0.0) + p * q
        rewards[n] = total
        floors[n] = floor
        contexts = nxt
    return rewards, floors
