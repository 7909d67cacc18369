"""Agent strategies.

Three flavours, distinguished by what :func:`simulate` hands to ``act``:

``classical``  ``act(own_obs, common)``
``relaxed``    ``act(own_obs, other_obs, common)``; ``other_obs`` stops one step short
``quantum``    ``act(own_obs, common, qubits)``; ``qubits`` are this agent's halves
               of two Bell pairs created for the current step

``own_obs`` and ``common`` run from time 0 through the current time.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..mermin_peres import LINES, MPSquare, default_square
from ..signs import ACTIONS_U, ACTIONS_V, SignTriple, encode
from .model import CYCLE, OBS, Kernel, State, as_distribution

ROLES = ("alice", "bob")


def actions_for(role: str):
    if role == "alice":
        return ACTIONS_U
    if role == "bob":
        return ACTIONS_V
    raise ValueError(f"role must be 'alice' or 'bob', got {role!r}")


class Policy:
    flavor = "classical"
    name = "policy"

    def __init__(self, role: str):
        actions_for(role)
        self.role = role

    def reset(self):
        """Called once at the start of every simulated run."""

    def __repr__(self):
        return f"{type(self).__name__}(role={self.role!r}, name={self.name!r})"


class TablePolicy(Policy):
    """Memoryless: the action depends only on the current observation."""

    def __init__(self, role: str, table: Sequence[SignTriple], name: str | None = None):
        super().__init__(role)
        table = [tuple(t) for t in (table.values() if isinstance(table, dict) else table)]
        allowed = actions_for(role)
        if len(table) != 3 or any(t not in allowed for t in table):
            raise ValueError(f"table must give an admissible {role} action for each of 1..3")
        self.table = tuple(table)
        self.name = name or "table:" + ",".join(encode(t) for t in self.table)

    def act(self, own_obs, common):
        return self.table[own_obs[-1] - 1]


class RandomHistoryPolicy(Policy):
    """Randomised, history-dependent lookup policy.

    The action is ``table[prev, obs - 1, W mod buckets]`` where ``prev`` is the
    previous own observation (0 at time 0) and W the current common word.
    """

    def __init__(self, role: str, table: np.ndarray, name: str = "random-history"):
        super().__init__(role)
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 3 or table.shape[:2] != (4, 3) or table.min() < 0 or table.max() > 3:
            raise ValueError("table must have shape (4, 3, buckets) with entries in 0..3")
        self.table = table
        self.buckets = table.shape[2]
        self.name = name

    def act(self, own_obs, common):
        prev = own_obs[-2] if len(own_obs) > 1 else 0
        idx = self.table[prev, own_obs[-1] - 1, int(common[-1] % self.buckets)]
        return actions_for(self.role)[idx]


def random_history_policies(seed: int, buckets: int = 16):
    rng = np.random.default_rng(seed)
    tables = rng.integers(0, 4, size=(2, 4, 3, buckets))
    name = f"random-history(seed={seed})"
    return RandomHistoryPolicy("alice", tables[0], name), RandomHistoryPolicy("bob", tables[1], name)


# ---------------------------------------------------------------------------
# periodic walk


def _window_lookup(coord: str) -> dict:
    seq = [getattr(s, coord) for s in CYCLE]
    out = {}
    for k in range(9):
        window = (seq[(k - 2) % 9], seq[(k - 1) % 9], seq[k])
        out[window] = CYCLE[k]
    return out


#: Last three x (resp. y) observations along the cycle -> current state.
X_WINDOWS = _window_lookup("x")
Y_WINDOWS = _window_lookup("y")


class PeriodicSyncPolicy(Policy):
    """Infers the partner's observation from the last three own observations.

    Only meaningful under the periodic kernel. Before time 2 (or if the window
    is not on the cycle) the first action of the canonical list is played.
    """

    def __init__(self, role: str):
        super().__init__(role)
        self.name = "periodic-sync"
        self._lookup = X_WINDOWS if role == "alice" else Y_WINDOWS

    def infer_state(self, own_obs) -> State | None:
        if len(own_obs) < 3:
            return None
        return self._lookup.get(tuple(own_obs[-3:]))

    def act(self, own_obs, common):
        state = self.infer_state(own_obs)
        if state is None:
            return actions_for(self.role)[0]
        if self.role == "alice":
            # coordinate y must be +1; both free coordinates +1 as well
            return (1, 1, 1)
        free = [k for k in OBS if k != state.x]
        v = [0, 0, 0]
        v[state.x - 1] = 1
        v[free[0] - 1] = 1
        v[free[1] - 1] = -1
        return tuple(v)


def periodic_sync_policies():
    return PeriodicSyncPolicy("alice"), PeriodicSyncPolicy("bob")


# ---------------------------------------------------------------------------
# entanglement-assisted


class QuantumMPPolicy(Policy):
    """Measure the own row (Alice) or column (Bob) of the square on fresh qubits."""

    flavor = "quantum"

    def __init__(self, role: str, square: MPSquare | None = None):
        super().__init__(role)
        self.square = square or default_square()
        self.name = "quantum-mp"

    def act(self, own_obs, common, qubits):
        o = own_obs[-1]
        if self.role == "alice":
            return tuple(qubits.measure_cell(self.square, o, l) for l in LINES)
        return tuple(qubits.measure_cell(self.square, k, o) for k in LINES)


def quantum_mp_policies(square: MPSquare | None = None):
    return QuantumMPPolicy("alice", square), QuantumMPPolicy("bob", square)


# ---------------------------------------------------------------------------
# relaxed (each agent also sees the other's past observations)


class GreedyCoordinator:
    """Shared plan for a relaxed policy pair.

    Given the previous state and previous joint action (everything both agents
    know at time n under the relaxed information pattern), pick the table pair
    maximising the one-step expected reward under the conditional law of the
    current state. At time 0 the initial law is used.
    """

    def __init__(self, kernel: Kernel, initial=None):
        from .oracles import best_memoryless_pair

        self.kernel = kernel
        self.initial = np.asarray(as_distribution(initial), dtype=np.float64)
        self._best = best_memoryless_pair
        self._plans: dict = {}

    def conditional(self, context) -> np.ndarray:
        if context is None:
            return self.initial
        state, i, j = context
        return self.kernel.table[state.index, i, j].reshape(3, 3)

    def plan(self, context):
        """``(alice_table, bob_table)`` as index triples into the action lists."""
        if context not in self._plans:
            a, b, _ = self._best(self.conditional(context))
            self._plans[context] = (a, b)
        return self._plans[context]

    def context_at(self, xs, ys, n: int):
        """Context for time n given observations through time n - 1."""
        ctx = None
        for t in range(n):
            a, b = self.plan(ctx)
            x, y = xs[t], ys[t]
            ctx = (State(x, y), int(a[x - 1]), int(b[y - 1]))
        return ctx


class GreedyRelaxedPolicy(Policy):
    flavor = "relaxed"

    def __init__(self, role: str, coordinator: GreedyCoordinator):
        super().__init__(role)
        self.coordinator = coordinator
        self.name = "greedy-relaxed"
        self.reset()

    def reset(self):
        self._ctx = None
        self._n = 0

    def act(self, own_obs, other_obs, common):
        n = len(own_obs) - 1
        xs, ys = (own_obs, other_obs) if self.role == "alice" else (other_obs, own_obs)
        if n != self._n + 1 or n == 0:
            # not the next step of the current run; replay from time 0
            self._ctx = self.coordinator.context_at(xs, ys, n)
        else:
            a, b = self.coordinator.plan(self._ctx)
            x, y = xs[n - 1], ys[n - 1]
            self._ctx = (State(x, y), int(a[x - 1]), int(b[y - 1]))
        self._n = n
        a, b = self.coordinator.plan(self._ctx)
        if self.role == "alice":
            return ACTIONS_U[a[own_obs[-1] - 1]]
        return ACTIONS_V[b[own_obs[-1] - 1]]


def greedy_relaxed_policies(kernel: Kernel, initial=None):
    coord = GreedyCoordinator(kernel, initial)
    return GreedyRelaxedPolicy("alice", coord), GreedyRelaxedPolicy("bob", coord)


def best_memoryless_policies(dist=None):
    """First (in canonical order) table pair maximising the one-shot expected reward."""
    from .oracles import best_memoryless_pair

    a, b, value = best_memoryless_pair(np.asarray(as_distribution(dist), dtype=np.float64))
    alice = TablePolicy("alice", [ACTIONS_U[k] for k in a])
    bob = TablePolicy("bob", [ACTIONS_V[k] for k in b])
    alice.name = bob.name = "best-memoryless"
    return alice, bob
