"""Sign triples: the action alphabet shared by the game and the POMDP."""

from __future__ import annotations

import itertools

import numpy as np

SignTriple = tuple[int, int, int]


def triple_product(t) -> int:
    return int(t[0] * t[1] * t[2])


def sign_triples(product: int | None = None) -> list[SignTriple]:
    """All +/-1 triples, '+' before '-', first coordinate most significant."""
    out = [t for t in itertools.product((1, -1), repeat=3)]
    if product is not None:
        out = [t for t in out if triple_product(t) == product]
    return out


#: Alice's admissible triples (product +1) and Bob's (product -1), in canonical order.
ACTIONS_U: tuple[SignTriple, ...] = tuple(sign_triples(1))
ACTIONS_V: tuple[SignTriple, ...] = tuple(sign_triples(-1))

ACTIONS_U_ARRAY = np.array(ACTIONS_U, dtype=np.int8)
ACTIONS_V_ARRAY = np.array(ACTIONS_V, dtype=np.int8)
ACTIONS_U_ARRAY.setflags(write=False)
ACTIONS_V_ARRAY.setflags(write=False)


def encode(t) -> str:
    """``(1, -1, -1)`` -> ``"+--"``."""
    return "".join("+" if s > 0 else "-" for s in t)


def decode(s: str) -> SignTriple:
    if len(s) != 3 or any(c not in "+-" for c in s):
        raise ValueError(f"not a sign triple: {s!r}")
    return tuple(1 if c == "+" else -1 for c in s)


def as_triple(t) -> SignTriple:
    if isinstance(t, str):
        return decode(t)
    t = tuple(int(s) for s in t)
    if len(t) != 3 or any(s not in (1, -1) for s in t):
        raise ValueError(f"not a sign triple: {t!r}")
    return t


def all_tables(actions) -> list[tuple[SignTriple, SignTriple, SignTriple]]:
    """Every map {1,2,3} -> actions, index 1 most significant."""
    return list(itertools.product(actions, repeat=3))


def tables_array(tables) -> np.ndarray:
    """``(T, 3, 3)`` int8 array; ``[t, x, l]`` is coordinate l of the triple for input x."""
    return np.array(tables, dtype=np.int8).reshape(len(tables), 3, 3)
