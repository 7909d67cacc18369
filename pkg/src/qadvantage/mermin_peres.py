"""The Mermin-Peres square and the magic-square game.

Rows and columns are labelled 1..3 as in the game. The four qubits of the two
shared Bell pairs are ordered (Alice-1, Bob-1, Alice-2, Bob-2), so Alice owns
tensor factors 0 and 2 and Bob owns factors 1 and 3.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .complexlin import (
    DEFAULT_TOL,
    FactorShape,
    commutator,
    embed_on_factors,
    hermitian_eigenvalues,
    identity,
    kron,
    mat_prod,
    max_abs,
)
from .quantum import (
    PROB_EPS,
    PVM,
    SIGMA_0,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    DichotomicObservable,
    bell_pair,
    collapse,
    density_from_pure,
    measure_probs,
    pvm_from_dichotomic,
    sample_measurement,
)
from .signs import ACTIONS_U, ACTIONS_V, SignTriple, all_tables, encode, tables_array, triple_product

FOUR_QUBITS = FactorShape.qubits(4)
ALICE_FACTORS = (0, 2)
BOB_FACTORS = (1, 3)
LINES = (1, 2, 3)


@dataclass(frozen=True, eq=False)
class MPSquare:
    """3x3 grid of 4x4 operators; ``entries[i-1][j-1]`` is cell (i, j).

    The grid is stored as given. :func:`validate_square` decides whether it
    has the magic-square properties.
    """

    entries: tuple

    def __post_init__(self):
        grid = tuple(tuple(np.array(e, dtype=np.complex128) for e in row) for row in self.entries)
        if len(grid) != 3 or any(len(row) != 3 for row in grid):
            raise ValueError("square must be 3x3")
        for row in grid:
            for e in row:
                if e.shape != (4, 4):
                    raise ValueError("square entries must be 4x4 operators")
                e.setflags(write=False)
        object.__setattr__(self, "entries", grid)

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.entries[i - 1][j - 1]

    def row(self, i: int) -> list[np.ndarray]:
        return [self.entry(i, l) for l in LINES]

    def column(self, j: int) -> list[np.ndarray]:
        return [self.entry(k, j) for k in LINES]

    def replace(self, i: int, j: int, op) -> MPSquare:
        grid = [list(r) for r in self.entries]
        grid[i - 1][j - 1] = np.asarray(op)
        return MPSquare(tuple(tuple(r) for r in grid))

    @cached_property
    def _pvm_cache(self) -> dict:
        return {}

    def local_pvm(self, side: str, i: int, j: int) -> PVM:
        """PVM of cell (i, j) acting on ``side``'s two qubits of the 4-qubit register."""
        key = (side, i, j)
        cache = self._pvm_cache
        if key not in cache:
            factors = ALICE_FACTORS if side == "alice" else BOB_FACTORS
            op = embed_on_factors(self.entry(i, j), factors, FOUR_QUBITS)
            cache[key] = pvm_from_dichotomic(DichotomicObservable(op))
        return cache[key]


def build_square() -> MPSquare:
    return MPSquare(
        (
            (kron(SIGMA_0, SIGMA_Z), kron(SIGMA_Z, SIGMA_0), kron(SIGMA_Z, SIGMA_Z)),
            (kron(SIGMA_X, SIGMA_0), kron(SIGMA_0, SIGMA_X), kron(SIGMA_X, SIGMA_X)),
            (-kron(SIGMA_X, SIGMA_Z), -kron(SIGMA_Z, SIGMA_X), kron(SIGMA_Y, SIGMA_Y)),
        )
    )


@lru_cache(maxsize=1)
def default_square() -> MPSquare:
    return build_square()


@dataclass
class CheckResult:
    passed: bool
    max_residual: float


@dataclass
class ValidationReport:
    checks: dict[str, CheckResult] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def max_residual(self) -> float:
        return max(c.max_residual for c in self.checks.values())

    def failing_checks(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {name: {"pass": c.passed, "max_residual": c.max_residual} for name, c in self.checks.items()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def validate_square(sq: MPSquare, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check Hermiticity, involution, line-wise commutation, line products and spectra."""
    report = ValidationReport()
    eye = identity(4)
    cells = [(i, j) for i in LINES for j in LINES]

    def record(name: str, residuals: dict):
        worst = max(residuals.values())
        report.checks[name] = CheckResult(bool(worst <= tol), float(worst))
        report.failures.extend(f"{name}: {where}" for where, r in residuals.items() if r > tol)

    record("hermitian", {f"cell {c}": max_abs(sq.entry(*c) - sq.entry(*c).conj().T) for c in cells})
    record("involution", {f"cell {c}": max_abs(mat_prod(sq.entry(*c), sq.entry(*c)) - eye) for c in cells})

    comm = {}
    for name, line in [(f"row {i}", sq.row(i)) for i in LINES] + [(f"column {j}", sq.column(j)) for j in LINES]:
        comm[name] = max(max_abs(commutator(a, b)) for a, b in itertools.combinations(line, 2))
    record("commutation", comm)

    record("row_products", {f"row {i}": max_abs(mat_prod(*sq.row(i)) - eye) for i in LINES})
    record("column_products", {f"column {j}": max_abs(mat_prod(*sq.column(j)) + eye) for j in LINES})

    spectra = {}
    for c in cells:
        e = sq.entry(*c)
        herm = 0.5 * (e + e.conj().T)
        eig = hermitian_eigenvalues(herm, min(tol, 1e-13))
        spectra[f"cell {c}"] = max(min(abs(v - 1.0), abs(v + 1.0)) for v in eig)
    record("eigenvalues", spectra)
    return report


# ---------------------------------------------------------------------------
# quantum strategy


def initial_register() -> DensityMatrix:
    """Two Bell pairs with factor order (Alice-1, Bob-1, Alice-2, Bob-2)."""
    return _initial_register()


@lru_cache(maxsize=1)
def _initial_register() -> DensityMatrix:
    rho = density_from_pure(bell_pair())
    return DensityMatrix.unchecked(kron(rho.mat, rho.mat))


def _check_line(i):
    if i not in LINES:
        raise ValueError(f"row/column index must be 1, 2 or 3, got {i!r}")


def default_order(i: int, j: int) -> list[tuple[str, int, int]]:
    """Alice's row cells l = 1..3, then Bob's column cells k = 1..3."""
    return [("alice", i, l) for l in LINES] + [("bob", k, j) for k in LINES]


def quantum_round(i: int, j: int, rng: np.random.Generator, square: MPSquare | None = None):
    """One play of the game with the square strategy on a fresh register.

    Returns Alice's row triple and Bob's column triple.
    """
    _check_line(i)
    _check_line(j)
    sq = square or default_square()
    rho = initial_register()
    outcomes = []
    for side, r, c in default_order(i, j):
        a, rho = sample_measurement(sq.local_pvm(side, r, c), rho, rng, check=False)
        outcomes.append(int(a))
    return tuple(outcomes[:3]), tuple(outcomes[3:])


def _projector_stack(sq: MPSquare, order) -> np.ndarray:
    stack = np.empty((len(order), 2, 16, 16), dtype=np.complex128)
    for s, (side, r, c) in enumerate(order):
        pvm = sq.local_pvm(side, r, c)
        stack[s, 0] = pvm.projectors[-1]
        stack[s, 1] = pvm.projectors[1]
    return stack


def quantum_rounds(i: int, j: int, count: int, rng: np.random.Generator, square: MPSquare | None = None):
    """``count`` independent rounds for fixed (i, j), via the measurement kernel.

    Draws the same uniforms, in the same order, as ``count`` successive calls
    to :func:`quantum_round`. Returns two ``(count, 3)`` int8 arrays.
    """
    _check_line(i)
    _check_line(j)
    sq = square or default_square()
    uniforms = rng.random((count, 6))
    out = kernels.measure_sequence(initial_register().mat, _projector_stack(sq, default_order(i, j)), uniforms, PROB_EPS)
    return out[:, :3], out[:, 3:]


def exact_round_distribution(i: int, j: int, order=None, square: MPSquare | None = None) -> dict:
    """Exact law of (Alice triple, Bob triple) by expanding every measurement branch.

    ``order`` is a permutation of the six ``(side, row, col)`` measurements;
    the default measures Alice's three cells first.
    """
    _check_line(i)
    _check_line(j)
    sq = square or default_square()
    steps = list(order) if order is not None else default_order(i, j)
    if sorted(steps) != sorted(default_order(i, j)):
        raise ValueError("order must be a permutation of the six round measurements")
    dist: dict = {}

    def expand(rho, depth, seen, prob):
        if depth == len(steps):
            a = tuple(seen[("alice", i, l)] for l in LINES)
            b = tuple(seen[("bob", k, j)] for k in LINES)
            dist[(a, b)] = dist.get((a, b), 0.0) + prob
            return
        pvm = sq.local_pvm(*steps[depth])
        for outcome, p in measure_probs(pvm, rho).items():
            if p <= PROB_EPS:
                continue
            post = collapse(pvm, rho, outcome, check=False)
            expand(post, depth + 1, {**seen, steps[depth]: int(outcome)}, prob * p)

    expand(initial_register(), 0, {}, 1.0)
    return dict(sorted(dist.items(), key=lambda kv: (encode(kv[0][0]), encode(kv[0][1]))))


def distribution_to_json(dist: dict) -> dict:
    """Keys become ``"<alice>|<bob>"`` sign strings, e.g. ``"+--|++-"``."""
    return {f"{encode(a)}|{encode(b)}": p for (a, b), p in dist.items()}


def wins(i: int, j: int, a: Sequence[int], b: Sequence[int]) -> bool:
    """Alice's entry in column j times Bob's entry in row i equals +1."""
    return a[j - 1] * b[i - 1] == 1


# ---------------------------------------------------------------------------
# classical strategies


@dataclass(frozen=True)
class DetGameStrategy:
    """Deterministic strategy pair: Alice's triple per row, Bob's per column."""

    alice: tuple[SignTriple, SignTriple, SignTriple]
    bob: tuple[SignTriple, SignTriple, SignTriple]

    def __post_init__(self):
        if any(triple_product(t) != 1 for t in self.alice):
            raise ValueError("every Alice triple must have product +1")
        if any(triple_product(t) != -1 for t in self.bob):
            raise ValueError("every Bob triple must have product -1")

    def win_count(self) -> int:
        return sum(self.alice[i][j] * self.bob[j][i] == 1 for i in range(3) for j in range(3))

    def win_probability(self) -> Fraction:
        return Fraction(self.win_count(), 9)

    def encode(self) -> dict:
        return {"alice": [encode(t) for t in self.alice], "bob": [encode(t) for t in self.bob]}


@dataclass
class BruteForceResult:
    max_win_prob: Fraction
    argmax: list[DetGameStrategy]
    pair_count: int
    min_losing_cells: int
    win_counts: np.ndarray = field(repr=False)


def classical_bruteforce() -> BruteForceResult:
    """Exhaust all 64 x 64 deterministic table pairs under uniform (i, j)."""
    alice_tables = all_tables(ACTIONS_U)
    bob_tables = all_tables(ACTIONS_V)
    sums = kernels.pair_rewards(tables_array(alice_tables), tables_array(bob_tables), np.ones((3, 3)))
    counts = np.rint((sums + 9) / 2).astype(np.int64)
    if np.any(2 * counts - 9 != sums):
        raise ArithmeticError("non-integer cell sum in brute force")
    best = int(counts.max())
    argmax = [DetGameStrategy(alice_tables[a], bob_tables[b]) for a, b in np.argwhere(counts == best)]
    return BruteForceResult(
        max_win_prob=Fraction(best, 9),
        argmax=argmax,
        pair_count=int(counts.size),
        min_losing_cells=int(9 - best),
        win_counts=counts,
    )


def mixture_win_probability(mixture: Iterable[tuple[float, DetGameStrategy]]) -> float:
    """Win probability of a common-randomness mixture of deterministic pairs."""
    total = 0.0
    weight = 0.0
    for w, strat in mixture:
        if w < 0:
            raise ValueError("mixture weights must be nonnegative")
        total += w * strat.win_count() / 9
        weight += w
    if abs(weight - 1.0) > 1e-12:
        raise ValueError(f"mixture weights sum to {weight}, expected 1")
    return total
