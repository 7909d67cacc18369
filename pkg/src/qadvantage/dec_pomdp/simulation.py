"""Trajectory simulation under the three policy flavours."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import kernels
from ..complexlin import FactorShape, as_cmatrix, embed_on_factors
from ..mermin_peres import ALICE_FACTORS, BOB_FACTORS, MPSquare, initial_register
from ..quantum import DichotomicObservable, pvm_from_dichotomic, sample_measurement
from ..signs import ACTIONS_U_ARRAY, ACTIONS_V_ARRAY, encode
from .model import CommonRandomness, Kernel, State, as_distribution, draw_index, reward, step, u_index, v_index
from .policies import Policy, RandomHistoryPolicy

MODES = ("decentralized", "relaxed")


class ConfigurationError(ValueError):
    """Policies do not fit the requested information pattern."""


class _Prefix(Sequence):
    """Read-only view of the first ``length`` items of a growing list."""

    __slots__ = ("_data", "_length")

    def __init__(self, data: list, length: int):
        self._data = data
        self._length = length

    def __len__(self):
        return self._length

    def __getitem__(self, key):
        if isinstance(key, slice):
            return [self._data[k] for k in range(self._length)[key]]
        return self._data[range(self._length)[key]]

    def __repr__(self):
        return f"_Prefix({self[:]!r})"


# ---------------------------------------------------------------------------
# per-step entanglement

_FOUR = FactorShape.qubits(4)
_EMBED_CACHE: dict = {}


class StepRegister:
    """Two fresh Bell pairs, factor order (Alice-1, Bob-1, Alice-2, Bob-2)."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.rho = initial_register()
        self.measurements = 0

    def measure(self, pvm) -> int:
        outcome, self.rho = sample_measurement(pvm, self.rho, self.rng, check=False)
        self.measurements += 1
        return int(outcome)

    def halves(self):
        return AgentQubits(self, "alice"), AgentQubits(self, "bob")


class AgentQubits:
    """One agent's access to a :class:`StepRegister`: only its own two qubits."""

    def __init__(self, register: StepRegister, role: str):
        self._register = register
        self.role = role
        self.factors = ALICE_FACTORS if role == "alice" else BOB_FACTORS

    def measure(self, op) -> int:
        """Measure a two-qubit +/-1 observable on this agent's qubits."""
        op = as_cmatrix(op)
        key = (self.factors, op.tobytes())
        if key not in _EMBED_CACHE:
            local = DichotomicObservable(op)
            _EMBED_CACHE[key] = pvm_from_dichotomic(
                DichotomicObservable(embed_on_factors(local.op, self.factors, _FOUR))
            )
        return self._register.measure(_EMBED_CACHE[key])

    def measure_cell(self, square: MPSquare, i: int, j: int) -> int:
        return self._register.measure(square.local_pvm(self.role, i, j))


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class TrajectoryRecord:
    states: np.ndarray
    u: np.ndarray
    v: np.ndarray
    rewards: np.ndarray
    running_avg: np.ndarray
    seed: int
    kernel_id: str
    policy_ids: tuple[str, str]
    mode: str = "decentralized"
    extra: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.rewards)

    def average(self, start: int = 0) -> float:
        """Mean reward over times ``start .. N-1``."""
        r = self.rewards[start:]
        if r.size == 0:
            raise ValueError(f"no steps at or after {start}")
        return float(r.mean())

    def stderr(self, start: int = 0, batches: int = 20) -> float:
        return batch_means_stderr(self.rewards[start:], batches)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "kernel_id": self.kernel_id,
            "alice": self.policy_ids[0],
            "bob": self.policy_ids[1],
            "mode": self.mode,
            "steps": self.steps,
            "average": self.average(),
            "final_running_avg": float(self.running_avg[-1]),
            "min_reward": int(self.rewards.min()),
            "losses": int(np.count_nonzero(self.rewards < 0)),
            **self.extra,
        }

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "x", "y", "u", "v", "r", "running_avg"])
        for n in range(self.steps):
            w.writerow(
                [
                    n,
                    int(self.states[n, 0]),
                    int(self.states[n, 1]),
                    encode(self.u[n]),
                    encode(self.v[n]),
                    int(self.rewards[n]),
                    repr(float(self.running_avg[n])),
                ]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def batch_means_stderr(rewards, batches: int = 20) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    r = np.asarray(rewards, dtype=np.float64)
    batches = max(2, min(batches, r.size // 2))
    size = r.size // batches
    if size < 1:
        return float("inf")
    means = r[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(batches))


def run_streams(seed):
    """(state rng, common randomness, quantum rng) for one run."""
    ss = np.random.SeedSequence(seed)
    s_state, s_common, s_quantum = ss.spawn(3)
    return np.random.default_rng(s_state), CommonRandomness(s_common), np.random.default_rng(s_quantum)


def _check_pair(alice: Policy, bob: Policy, mode: str):
    if mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if alice.role != "alice" or bob.role != "bob":
        raise ConfigurationError("first policy must be Alice's and second Bob's")
    for p in (alice, bob):
        if p.flavor not in ("classical", "relaxed", "quantum"):
            raise ConfigurationError(f"unknown policy flavour {p.flavor!r}")
        if p.flavor == "relaxed" and mode != "relaxed":
            raise ConfigurationError(f"{p!r} needs the other agent's history; run with mode='relaxed'")


def query_action(policy: Policy, own: Sequence[int], other_prev: Sequence[int], common: Sequence[int], qubits=None):
    """Call ``policy.act`` with exactly the information its flavour allows."""
    if policy.flavor == "classical":
        return policy.act(own, common)
    if policy.flavor == "relaxed":
        return policy.act(own, other_prev, common)
    return policy.act(own, common, qubits)


def simulate(
    alice: Policy,
    bob: Policy,
    kernel: Kernel,
    steps: int,
    seed: int,
    initial=None,
    *,
    mode: str = "decentralized",
) -> TrajectoryRecord:
    """Run the POMDP for ``steps`` periods.

    Random streams are spawned from ``seed``: one for the initial state and
    transitions, one for the common words W_n, one for quantum measurements.
    A fresh pair of Bell pairs is prepared at every step if either policy is
    entanglement-assisted.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _check_pair(alice, bob, mode)
    alice.reset()
    bob.reset()
    state_rng, common, q_rng = run_streams(seed)
    quantum = "quantum" in (alice.flavor, bob.flavor)

    init_cdf = np.cumsum(np.asarray(as_distribution(initial), dtype=np.float64).reshape(9))
    state = State.from_index(draw_index(init_cdf, state_rng.random()))

    xs: list[int] = []
    ys: list[int] = []
    ws: list[int] = []
    states = np.empty((steps, 2), dtype=np.int64)
    us = np.empty((steps, 3), dtype=np.int8)
    vs = np.empty((steps, 3), dtype=np.int8)
    rewards = np.empty(steps, dtype=np.int64)
    for n in range(steps):
        xs.append(state.x)
        ys.append(state.y)
        ws.append(common.next_word())
        qa = qb = None
        if quantum:
            qa, qb = StepRegister(q_rng).halves()
        w_view = _Prefix(ws, n + 1)
        u = tuple(query_action(alice, _Prefix(xs, n + 1), _Prefix(ys, n), w_view, qa))
        v = tuple(query_action(bob, _Prefix(ys, n + 1), _Prefix(xs, n), w_view, qb))
        u_index(u)
        v_index(v)
        states[n] = (state.x, state.y)
        us[n] = u
        vs[n] = v
        rewards[n] = reward(state, u, v)
        state = step(state, u, v, kernel, state_rng)

    running = np.cumsum(rewards) / np.arange(1, steps + 1)
    return TrajectoryRecord(
        states=states,
        u=us,
        v=vs,
        rewards=rewards,
        running_avg=running,
        seed=seed,
        kernel_id=kernel.kernel_id,
        policy_ids=(alice.name, bob.name),
        mode=mode,
    )


def simulate_random_history_batch(
    pairs: Sequence[tuple[RandomHistoryPolicy, RandomHistoryPolicy]],
    kernel: Kernel,
    steps: int,
    seeds: Sequence[int],
    initial=None,
) -> np.ndarray:
    """Vectorised equivalent of ``simulate`` for many random-history pairs.

    Run r uses ``pairs[r]`` and ``seeds[r]`` and draws the same streams as
    :func:`simulate` would, so the rewards agree with it path by path.
    Returns an ``(R, steps)`` int8 reward array.
    """
    if len(pairs) != len(seeds):
        raise ValueError("need one seed per policy pair")
    buckets = {p.buckets for pair in pairs for p in pair}
    if len(buckets) != 1:
        raise ValueError("all policies must use the same number of buckets")
    k = buckets.pop()
    alice_pol = np.stack([a.table for a, _ in pairs]).astype(np.int64)
    bob_pol = np.stack([b.table for _, b in pairs]).astype(np.int64)
    init_u = np.empty(len(seeds))
    step_u = np.empty((len(seeds), steps))
    bucket = np.empty((len(seeds), steps), dtype=np.int64)
    for r, seed in enumerate(seeds):
        state_rng, common, _ = run_streams(seed)
        init_u[r] = state_rng.random()
        step_u[r] = state_rng.random(steps)
        bucket[r] = (common.words(steps) % np.uint64(k)).astype(np.int64)
    init_cdf = np.cumsum(np.asarray(as_distribution(initial), dtype=np.float64).reshape(9))
    return kernels.simulate_tabular(
        np.ascontiguousarray(kernel.cdf),
        init_cdf,
        init_u,
        step_u,
        alice_pol,
        bob_pol,
        bucket,
        ACTIONS_U_ARRAY,
        ACTIONS_V_ARRAY,
    )
