"""Quantum states, projective measurements and a two-qubit entanglement witness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .complexlin import (
    DEFAULT_TOL,
    DimensionError,
    as_cmatrix,
    hermitian_eigenvalues,
    identity,
    is_hermitian,
    is_psd,
    kron,
    mat_mul,
    max_abs,
)

#: Outcomes whose probability falls below this are treated as impossible.
PROB_EPS = 1e-12

SIGMA_0 = identity(2)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = {"0": SIGMA_0, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

for _m in PAULI.values():
    _m.setflags(write=False)


def _frozen(a) -> np.ndarray:
    m = np.array(a, dtype=np.complex128, copy=True)
    m.setflags(write=False)
    return m


class CollapseError(ValueError):
    """Collapse onto an outcome that has (numerically) zero probability."""


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.size < 1 or not np.all(np.isfinite(v)):
            raise ValueError("amplitudes must be a non-empty finite vector")
        norm = math.sqrt(float(np.vdot(v, v).real))
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise ValueError(f"state vector has norm {norm}, expected 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, amplitudes) -> PureState:
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self, other: PureState) -> PureState:
        return PureState(np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace matrix."""

    mat: np.ndarray

    def __post_init__(self):
        m = as_cmatrix(self.mat)
        if not is_hermitian(m):
            raise ValueError("density matrix must be Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > DEFAULT_TOL:
            raise ValueError(f"density matrix must have unit trace, got {tr}")
        if not is_psd(m):
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "mat", _frozen(m))

    @classmethod
    def unchecked(cls, mat) -> DensityMatrix:
        """Wrap a matrix already known to be a state (e.g. a collapse result)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mat", _frozen(mat))
        return obj

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def tensor(self, other: DensityMatrix) -> DensityMatrix:
        return DensityMatrix.unchecked(kron(self.mat, other.mat))

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        m = self.mat
        return is_hermitian(m, tol) and abs(np.trace(m) - 1.0) <= tol and is_psd(m, tol)


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """Hermitian involution: eigenvalues in {+1, -1}."""

    op: np.ndarray

    def __post_init__(self):
        m = as_cmatrix(self.op)
        if not is_hermitian(m):
            raise ValueError("observable must be Hermitian")
        if max_abs(mat_mul(m, m) - identity(m.shape[0])) > DEFAULT_TOL:
            raise ValueError("observable must square to the identity")
        object.__setattr__(self, "op", _frozen(m))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def __neg__(self) -> DichotomicObservable:
        return DichotomicObservable(-self.op)


@dataclass(frozen=True, eq=False)
class PVM:
    """Outcome label -> orthogonal projector, projectors summing to I."""

    projectors: Mapping[float, np.ndarray]

    def __post_init__(self):
        if not self.projectors:
            raise ValueError("a PVM needs at least one outcome")
        projs = {}
        dim = None
        for a in sorted(self.projectors):
            p = as_cmatrix(self.projectors[a])
            if dim is None:
                dim = p.shape[0]
            elif p.shape[0] != dim:
                raise DimensionError("projectors of a PVM must share one dimension")
            if not is_hermitian(p) or max_abs(mat_mul(p, p) - p) > DEFAULT_TOL:
                raise ValueError(f"effect for outcome {a} is not an orthogonal projector")
            projs[a] = _frozen(p)
        if max_abs(sum(projs.values()) - identity(dim)) > DEFAULT_TOL:
            raise ValueError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    @property
    def outcomes(self) -> list:
        return list(self.projectors)

    @property
    def dim(self) -> int:
        return next(iter(self.projectors.values())).shape[0]

    def observable(self) -> np.ndarray:
        return sum(a * p for a, p in self.projectors.items())


def density_from_pure(v: PureState) -> DensityMatrix:
    a = v.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def pvm_from_dichotomic(o: DichotomicObservable) -> PVM:
    eye = identity(o.dim)
    return PVM({-1: (eye - o.op) / 2, 1: (eye + o.op) / 2})


def _check_dims(m: PVM, rho: DensityMatrix):
    if m.dim != rho.dim:
        raise DimensionError(f"measurement of dim {m.dim} applied to state of dim {rho.dim}")


def _prob(p: np.ndarray, rho: np.ndarray) -> float:
    # Tr(P rho) without forming the product
    return float(np.einsum("ik,ki->", p, rho).real)


def measure_probs(m: PVM, rho: DensityMatrix) -> dict:
    _check_dims(m, rho)
    out = {}
    for a, p in m.projectors.items():
        pa = _prob(p, rho.mat)
        out[a] = 0.0 if pa < PROB_EPS else pa
    return out


def collapse(m: PVM, rho: DensityMatrix, outcome, *, eps: float = PROB_EPS, check: bool = True) -> DensityMatrix:
    """Post-measurement state ``P rho P / Tr(P rho)`` for the given outcome."""
    _check_dims(m, rho)
    if outcome not in m.projectors:
        raise KeyError(f"unknown outcome {outcome!r}")
    p = m.projectors[outcome]
    prob = _prob(p, rho.mat)
    if prob <= eps:
        raise CollapseError(f"outcome {outcome!r} has probability {prob:.3e}")
    post = mat_mul(mat_mul(p, rho.mat), p) / prob
    return DensityMatrix(post) if check else DensityMatrix.unchecked(post)


def sample_measurement(m: PVM, rho: DensityMatrix, rng: np.random.Generator, *, check: bool = True):
    """Draw an outcome by inverse CDF over ascending labels, then collapse.

    Consumes exactly one ``rng.random()`` per call.
    """
    probs = measure_probs(m, rho)
    total = sum(probs.values())
    x = rng.random() * total
    acc = 0.0
    chosen = None
    for a in m.outcomes:
        acc += probs[a]
        if x < acc:
            chosen = a
            break
    if chosen is None:
        chosen = max(a for a in m.outcomes if probs[a] > 0)
    return chosen, collapse(m, rho, chosen, check=check)


def expectation(o: DichotomicObservable, rho: DensityMatrix) -> float:
    return float(np.einsum("ik,ki->", o.op, rho.mat).real)


def basis_state(bits: str) -> PureState:
    """Computational basis vector, e.g. ``basis_state("01")`` for |01>."""
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return PureState(v)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(identity(dim) / dim)


def bell_pair() -> PureState:
    """(|00> + |11>)/sqrt(2) in the basis order |00>, |01>, |10>, |11>."""
    r = 1 / math.sqrt(2)
    return PureState([r, 0, 0, r])


def partial_transpose(rho: DensityMatrix, factor: int = 1) -> np.ndarray:
    """Transpose the indices of one qubit (0 = first, 1 = second) of a 2x2 system."""
    if rho.dim != 4:
        raise DimensionError(f"partial transpose needs a two-qubit state, got dim {rho.dim}")
    if factor not in (0, 1):
        raise ValueError(f"factor must be 0 or 1, got {factor!r}")
    t = rho.mat.reshape(2, 2, 2, 2)  # (i, k, j, l) = <ik|rho|jl>
    t = t.transpose(2, 1, 0, 3) if factor == 0 else t.transpose(0, 3, 2, 1)
    return np.ascontiguousarray(t.reshape(4, 4))


def pt_eigenvalues(rho: DensityMatrix, factor: int = 1, tol: float = DEFAULT_TOL) -> list[float]:
    return hermitian_eigenvalues(partial_transpose(rho, factor), tol)


def is_entangled_2q(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> bool:
    """Peres-Horodecki test; decisive for two qubits."""
    return pt_eigenvalues(rho, 1, tol)[-1] < -tol
