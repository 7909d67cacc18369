"""Small dense complex linear algebra.

Operators are plain ``numpy`` arrays of dtype ``complex128`` and shape
``(n, n)``. Dimensions in this package never exceed 16, so everything is
dense. The matrix product, Kronecker product and Hermitian eigenvalue solver
route through :mod:`qadvantage.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

DEFAULT_TOL = 1e-9
MAX_SWEEPS = 64


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class NotHermitianError(ValueError):
    """A Hermitian-only routine received a non-Hermitian matrix."""


class ConvergenceError(ArithmeticError):
    """The Jacobi iteration did not reach the requested tolerance."""


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a square, finite, C-contiguous complex128 array."""
    m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def mat_mul(a, b) -> np.ndarray:
    a, b = as_cmatrix(a), as_cmatrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return kernels.cmatmul(a, b)


def mat_prod(*mats) -> np.ndarray:
    """Left-to-right product of one or more matrices."""
    if not mats:
        raise ValueError("need at least one matrix")
    out = as_cmatrix(mats[0])
    for m in mats[1:]:
        out = mat_mul(out, m)
    return out


def kron(a, b) -> np.ndarray:
    """Kronecker product with rows and columns in lexicographic order.

    Entry ``((i, k), (j, l))`` of the result is ``a[i, j] * b[k, l]``.
    """
    return kernels.ckron(as_cmatrix(a), as_cmatrix(b))


def kron_all(*mats) -> np.ndarray:
    out = as_cmatrix(mats[0])
    for m in mats[1:]:
        out = kron(out, m)
    return out


def dagger(a) -> np.ndarray:
    return np.ascontiguousarray(as_cmatrix(a).conj().T)


def trace(a) -> complex:
    return complex(np.trace(as_cmatrix(a)))


def commutator(a, b) -> np.ndarray:
    return mat_mul(a, b) - mat_mul(b, a)


def max_abs(a) -> float:
    """Largest entry modulus; the residual measure used by the predicates."""
    return float(np.max(np.abs(a)))


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    m = as_cmatrix(a)
    return max_abs(m - m.conj().T) <= tol


def is_zero(a, tol: float = DEFAULT_TOL) -> bool:
    return max_abs(as_cmatrix(a)) <= tol


def is_identity(a, tol: float = DEFAULT_TOL) -> bool:
    m = as_cmatrix(a)
    return max_abs(m - identity(m.shape[0])) <= tol


def hermitian_eigenvalues(a, tol: float = DEFAULT_TOL, *, max_sweeps: int = MAX_SWEEPS) -> list[float]:
    """Eigenvalues of a Hermitian matrix, descending, with multiplicity.

    Uses cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
    below ``tol``.
    """
    m = as_cmatrix(a)
    if not is_hermitian(m, tol):
        raise NotHermitianError("hermitian_eigenvalues needs a Hermitian matrix")
    m = np.ascontiguousarray(0.5 * (m + m.conj().T))
    diag, sweeps, off = kernels.jacobi_eigvalsh(m, float(tol), int(max_sweeps))
    if not off < tol:
        raise ConvergenceError(
            f"Jacobi stopped after {sweeps} sweeps with off-diagonal norm {off:.3e} >= {tol:.1e}"
        )
    return sorted((float(v) for v in diag), reverse=True)


def is_psd(a, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``a`` is Hermitian with smallest eigenvalue >= -tol."""
    if not is_hermitian(a, tol):
        return False
    return hermitian_eigenvalues(a, tol)[-1] >= -tol


@dataclass(frozen=True)
class FactorShape:
    """Dimensions of the tensor factors of a composite system, in order."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"bad factor dims {self.factor_dims!r}")
        object.__setattr__(self, "factor_dims", dims)

    @classmethod
    def qubits(cls, count: int) -> FactorShape:
        return cls((2,) * count)

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)

    def __len__(self):
        return len(self.factor_dims)


def embed_on_factors(op, factors: Sequence[int], shape: FactorShape) -> np.ndarray:
    """Lift ``op`` to act on the chosen tensor factors (0-based, ascending).

    The result acts as ``op`` on ``factors`` and as the identity elsewhere:
    ``op`` is tensored with the identity on the remaining factors and the
    legs are then permuted back into the order given by ``shape``.
    """
    op = as_cmatrix(op)
    factors = [int(f) for f in factors]
    count = len(shape)
    if not factors:
        raise ValueError("no factors selected")
    if any(f < 0 or f >= count for f in factors):
        raise IndexError(f"factor index out of range for {count} factors: {factors}")
    if any(b <= a for a, b in zip(factors, factors[1:])):
        raise ValueError(f"factor indices must be distinct and ascending: {factors}")
    sel_dims = [shape.factor_dims[f] for f in factors]
    if op.shape[0] != math.prod(sel_dims):
        raise DimensionError(f"operator of dim {op.shape[0]} does not fit factors {factors} of {shape}")

    rest = [f for f in range(count) if f not in factors]
    rest_dim = math.prod(shape.factor_dims[f] for f in rest)
    full = kron(op, identity(rest_dim)) if rest else op
    order = factors + rest
    legs = [shape.factor_dims[f] for f in order]
    inv = list(np.argsort(order))
    axes = inv + [count + i for i in inv]
    out = full.reshape(legs + legs).transpose(axes).reshape(shape.dim, shape.dim)
    return np.ascontiguousarray(out)


def format_complex(z: complex, digits: int = 12) -> str:
    z = complex(z)
    im = z.imag
    sign = "-" if im < 0 else "+"
    return f"{z.real + 0.0:.{digits}g}{sign}{abs(im):.{digits}g}i"


def format_matrix(a, digits: int = 12) -> str:
    """Debug rendering, one row per line, entries as ``a+bi``."""
    m = as_cmatrix(a)
    cells = [[format_complex(z, digits) for z in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)
