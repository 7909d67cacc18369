"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed (JIT compile / cache load), then timed as
the best of ``--repeat`` runs on identical inputs. Outputs are compared so a
speed number is never reported for a kernel that disagrees.
"""

import argparse
import time

import numpy as np

from qadvantage.dec_pomdp import make_delta_floor_kernel, random_history_policies
from qadvantage.kernels import _jit, _numpy
from qadvantage.mermin_peres import _projector_stack, default_order, default_square, initial_register
from qadvantage.signs import ACTIONS_U, ACTIONS_U_ARRAY, ACTIONS_V, ACTIONS_V_ARRAY, all_tables, tables_array


def cases(rng):
    h = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    h = (h + h.conj().T) / 2
    yield "jacobi_eigvalsh 16x16", "jacobi_eigvalsh", (h, 1e-12, 64)

    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    yield "cmatmul 16x16", "cmatmul", (a, a.conj().T.copy())
    yield "ckron 4x4 (x) 4x4", "ckron", (a[:4, :4].copy(), a[4:8, 4:8].copy())

    stack = _projector_stack(default_square(), default_order(3, 3))
    yield "measure_sequence 2000 rounds", "measure_sequence", (initial_register().mat, stack, rng.random((2000, 6)), 1e-12)

    ta, tb = tables_array(all_tables(ACTIONS_U)), tables_array(all_tables(ACTIONS_V))
    yield "pair_rewards 64x64", "pair_rewards", (ta, tb, rng.dirichlet(np.ones(9)).reshape(3, 3))

    k = make_delta_floor_kernel(0, 0.05)
    runs, steps = 100, 20_000
    pols = [random_history_policies(s) for s in range(runs)]
    yield (
        f"simulate_tabular {runs}x{steps}",
        "simulate_tabular",
        (
            np.ascontiguousarray(k.cdf),
            np.cumsum(np.full(9, 1 / 9)),
            rng.random(runs),
            rng.random((runs, steps)),
            np.stack([p.table for p, _ in pols]).astype(np.int64),
            np.stack([p.table for _, p in pols]).astype(np.int64),
            rng.integers(0, 16, size=(runs, steps)),
            ACTIONS_U_ARRAY,
            ACTIONS_V_ARRAY,
        ),
    )


def best_time(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(x, y):
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x[:1], y[:1]))  # eigenvalues; sweep counts may differ
    return np.allclose(x, y, atol=1e-9)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':34s} {'numba':>11s} {'numpy':>11s} {'speedup':>8s}")
    for label, name, inputs in cases(rng):
        jit_fn, np_fn = getattr(_jit, name), getattr(_numpy, name)
        jit_fn(*inputs)  # compile or load from cache
        t_jit, out_jit = best_time(jit_fn, inputs, args.repeat)
        t_np, out_np = best_time(np_fn, inputs, args.repeat)
        if not same(out_jit, out_np):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{label:34s} {t_jit * 1e3:9.3f}ms {t_np * 1e3:9.3f}ms {t_np / t_jit:7.1f}x")


if __name__ == "__main__":
    main()
