"""Hot numeric kernels.

Every kernel exists twice: an ``@njit`` loop version in :mod:`._jit` and a
vectorised numpy version in :mod:`._numpy`. Both take and return plain arrays
and consume pre-drawn uniforms, so for the same inputs they agree to rounding.
Which one is exported here is decided by :data:`qadvantage._accel.BACKEND`.
"""

from .._accel import BACKEND, USE_NUMBA

if USE_NUMBA:
    from ._jit import (
        ckron,
        cmatmul,
        jacobi_eigvalsh,
        measure_sequence,
        pair_rewards,
        simulate_tabular,
    )
else:
    from ._numpy import (
        ckron,
        cmatmul,
        jacobi_eigvalsh,
        measure_sequence,
        pair_rewards,
        simulate_tabular,
    )

__all__ = [
    "BACKEND",
    "ckron",
    "cmatmul",
    "jacobi_eigvalsh",
    "measure_sequence",
    "pair_rewards",
    "simulate_tabular",
]
