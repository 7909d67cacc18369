"""States, actions, reward and transition kernels of the two-agent POMDP."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..signs import ACTIONS_U, ACTIONS_V, SignTriple, as_triple, decode, encode

OBS = (1, 2, 3)
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, order=True)
class State:
    """Joint state; Alice observes ``x`` and Bob observes ``y``."""

    x: int
    y: int

    def __post_init__(self):
        if self.x not in OBS or self.y not in OBS:
            raise ValueError(f"state components must be in 1..3, got ({self.x}, {self.y})")

    @property
    def index(self) -> int:
        """Row-major position, 0..8."""
        return 3 * (self.x - 1) + (self.y - 1)

    @classmethod
    def from_index(cls, k: int) -> State:
        return cls(k // 3 + 1, k % 3 + 1)

    @classmethod
    def parse(cls, s: str) -> State:
        x, y = s.split(",")
        return cls(int(x), int(y))

    def key(self) -> str:
        return f"{self.x},{self.y}"


STATES: tuple[State, ...] = tuple(State.from_index(k) for k in range(9))

#: The 9-cycle walked by the periodic kernel.
CYCLE: tuple[State, ...] = tuple(
    State(*s) for s in [(1, 1), (1, 2), (2, 3), (2, 2), (3, 3), (3, 1), (1, 3), (2, 1), (3, 2)]
)
_TAU = {s: CYCLE[(k + 1) % 9] for k, s in enumerate(CYCLE)}

U_INDEX = {u: k for k, u in enumerate(ACTIONS_U)}
V_INDEX = {v: k for k, v in enumerate(ACTIONS_V)}


def tau(state: State) -> State:
    return _TAU[state]


def enumerate_actions_u() -> list[SignTriple]:
    return list(ACTIONS_U)


def enumerate_actions_v() -> list[SignTriple]:
    return list(ACTIONS_V)


def u_index(u) -> int:
    try:
        return U_INDEX[as_triple(u)]
    except KeyError:
        raise ValueError(f"{u!r} is not an Alice action (product must be +1)") from None


def v_index(v) -> int:
    try:
        return V_INDEX[as_triple(v)]
    except KeyError:
        raise ValueError(f"{v!r} is not a Bob action (product must be -1)") from None


def reward(state: State, u, v) -> int:
    """Alice's sign at Bob's observation times Bob's sign at Alice's observation."""
    return int(u[state.y - 1] * v[state.x - 1])


def as_distribution(dist=None) -> np.ndarray:
    """Normalise an initial law to a (3, 3) array indexed ``[x-1, y-1]``.

    Accepts ``None`` (uniform), a mapping ``State -> p`` or a 3x3 / length-9
    array. Fractions are kept exact (object dtype).
    """
    if dist is None:
        return np.full((3, 3), Fraction(1, 9), dtype=object)
    if isinstance(dist, Mapping):
        arr = np.zeros((3, 3), dtype=object)
        arr[:] = 0
        for s, p in dist.items():
            s = s if isinstance(s, State) else State(*s)
            arr[s.x - 1, s.y - 1] = p
    else:
        arr = np.asarray(dist)
        arr = arr.reshape(3, 3)
    total = arr.sum()
    if any(p < 0 for p in arr.flat) or abs(float(total) - 1.0) > 1e-12:
        raise ValueError("distribution must be nonnegative and sum to 1")
    return arr


def draw_index(cdf: np.ndarray, u: float) -> int:
    """Inverse CDF: smallest k with ``u < cdf[k]`` (last index absorbs rounding)."""
    return int(np.count_nonzero(cdf[:-1] <= u))


@dataclass(frozen=True, eq=False)
class Kernel:
    """Transition law ``table[s, i, j, s']`` with s, s' row-major state indices
    and i, j indices into the canonical Alice / Bob action lists."""

    table: np.ndarray
    declared_delta: float = 0.0
    kernel_id: str = "custom"

    def __post_init__(self):
        t = np.array(self.table, dtype=np.float64)
        if t.shape != (9, 4, 4, 9):
            raise ValueError(f"kernel table must have shape (9, 4, 4, 9), got {t.shape}")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("kernel probabilities must be finite and nonnegative")
        if np.max(np.abs(t.sum(axis=-1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("each kernel row must sum to 1")
        if self.declared_delta < 0:
            raise ValueError("declared_delta must be nonnegative")
        if self.declared_delta > 0 and not np.all(t > self.declared_delta):
            raise ValueError(f"kernel has entries <= declared delta {self.declared_delta}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.table, axis=-1)
        c.setflags(write=False)
        return c

    @property
    def min_entry(self) -> float:
        return float(self.table.min())

    def row(self, state: State, u, v) -> np.ndarray:
        return self.table[state.index, u_index(u), v_index(v)]

    def to_dict(self) -> dict:
        table = {}
        for s in STATES:
            table[s.key()] = {
                encode(u): {
                    encode(v): {t.key(): float(self.table[s.index, i, j, t.index]) for t in STATES}
                    for j, v in enumerate(ACTIONS_V)
                }
                for i, u in enumerate(ACTIONS_U)
            }
        return {"kernel_id": self.kernel_id, "declared_delta": self.declared_delta, "table": table}

    @classmethod
    def from_dict(cls, data: Mapping) -> Kernel:
        t = np.zeros((9, 4, 4, 9))
        for skey, by_u in data["table"].items():
            s = State.parse(skey)
            for ukey, by_v in by_u.items():
                i = u_index(decode(ukey))
                for vkey, row in by_v.items():
                    j = v_index(decode(vkey))
                    for tkey, p in row.items():
                        t[s.index, i, j, State.parse(tkey).index] = p
        return cls(t, float(data.get("declared_delta", 0.0)), str(data.get("kernel_id", "custom")))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path) -> Kernel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_delta(delta: float):
    if not 0.0 <= delta < 1 / 9:
        raise ValueError(f"delta must lie in [0, 1/9), got {delta}")


def make_uniform_kernel(declared_delta: float = 0.0) -> Kernel:
    _check_delta(declared_delta)
    return Kernel(np.full((9, 4, 4, 9), 1 / 9), declared_delta, "uniform")


def make_delta_floor_kernel(seed: int, delta: float) -> Kernel:
    """Every row is ``delta`` plus ``1 - 9 delta`` times a flat-Dirichlet draw."""
    if not 0.0 < delta < 1 / 9:
        raise ValueError(f"delta must lie in (0, 1/9), got {delta}")
    rng = np.random.default_rng(seed)
    mix = rng.dirichlet(np.ones(9), size=(9, 4, 4))
    table = delta + (1 - 9 * delta) * mix
    table /= table.sum(axis=-1, keepdims=True)
    return Kernel(table, delta, f"floor(delta={delta!r},seed={seed})")


def make_periodic_kernel() -> Kernel:
    table = np.zeros((9, 4, 4, 9))
    for s in STATES:
        table[s.index, :, :, tau(s).index] = 1.0
    return Kernel(table, 0.0, "periodic")


def step(state: State, u, v, kernel: Kernel, rng: np.random.Generator) -> State:
    """Draw the next state; one ``rng.random()`` per call."""
    cdf = kernel.cdf[state.index, u_index(u), v_index(v)]
    return State.from_index(draw_index(cdf, rng.random()))


class CommonRandomness:
    """Shared stream of i.i.d. uniform 64-bit words W_0, W_1, ..."""

    def __init__(self, seed):
        self.seed = seed
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self._bits = np.random.PCG64(ss)
        self.position = 0

    def next_word(self) -> int:
        self.position += 1
        return int(self._bits.random_raw())

    def words(self, count: int) -> np.ndarray:
        self.position += count
        return self._bits.random_raw(count)


def table_indices(table: Sequence, actions_index) -> np.ndarray:
    """Map a per-observation action table (3 triples or dict 1..3) to action indices."""
    if isinstance(table, Mapping):
        table = [table[o] for o in OBS]
    return np.array([actions_index(t) for t in table], dtype=np.int64)
