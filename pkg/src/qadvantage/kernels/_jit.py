"""Loop kernels compiled with numba."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _offdiag_norm(m):
    n = m.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                z = m[i, j]
                acc += z.real * z.real + z.imag * z.imag
    return math.sqrt(acc)


@njit(cache=True)
def jacobi_eigvalsh(a, tol, max_sweeps):
    """Cyclic complex Jacobi on a Hermitian matrix.

    Returns ``(diagonal, sweeps, offdiag_norm)``. The diagonal is unsorted;
    the caller decides whether ``offdiag_norm < tol`` counts as converged.
    """
    n = a.shape[0]
    m = a.copy()
    sweeps = 0
    off = _offdiag_norm(m)
    while off >= tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                theta = (m[q, q].real - m[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                e_conj = (apq / mag).conjugate()
                j00 = complex(c, 0.0)
                j01 = complex(s, 0.0)
                j10 = -s * e_conj
                j11 = c * e_conj
                for k in range(n):
                    mkp = m[k, p]
                    mkq = m[k, q]
                    m[k, p] = mkp * j00 + mkq * j10
                    m[k, q] = mkp * j01 + mkq * j11
                for k in range(n):
                    mpk = m[p, k]
                    mqk = m[q, k]
                    m[p, k] = j00.conjugate() * mpk + j10.conjugate() * mqk
                    m[q, k] = j01.conjugate() * mpk + j11.conjugate() * mqk
                m[p, q] = 0.0
                m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real
        sweeps += 1
        off = _offdiag_norm(m)
    diag = np.empty(n)
    for i in range(n):
        diag[i] = m[i, i].real
    return diag, sweeps, off


@njit(cache=True)
def cmatmul(a, b):
    n = a.shape[0]
    m = b.shape[1]
    inner = a.shape[1]
    out = np.zeros((n, m), dtype=np.complex128)
    for i in range(n):
        for k in range(inner):
            aik = a[i, k]
            if aik == 0:
                continue
            for j in range(m):
                out[i, j] += aik * b[k, j]
    return out


@njit(cache=True)
def ckron(a, b):
    n, m = a.shape
    p, q = b.shape
    out = np.empty((n * p, m * q), dtype=np.complex128)
    for i in range(n):
        for j in range(m):
            aij = a[i, j]
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = aij * b[k, l]
    return out


@njit(cache=True)
def _trace_prod(p, rho):
    n = p.shape[0]
    acc = 0.0
    for i in range(n):
        for k in range(n):
            acc += (p[i, k] * rho[k, i]).real
    return acc


@njit(cache=True)
def _sandwich(p, rho, scale):
    return cmatmul(cmatmul(p, rho), p) / scale


@njit(cache=True)
def measure_sequence(rho, projectors, uniforms, eps):
    """Sequential two-outcome projective measurements.

    ``projectors[s, 0]`` and ``projectors[s, 1]`` are the projectors for
    outcomes -1 and +1 of the s-th measurement. Each of the ``R`` rows of
    ``uniforms`` is an independent round started from ``rho``. Returns an
    ``(R, K)`` int8 array of outcomes.
    """
    rounds, k = uniforms.shape
    out = np.empty((rounds, k), dtype=np.int8)
    for r in range(rounds):
        cur = rho.copy()
        for s in range(k):
            p_minus = _trace_prod(projectors[s, 0], cur)
            p_plus = _trace_prod(projectors[s, 1], cur)
            if p_minus < eps:
                p_minus = 0.0
            if p_plus < eps:
                p_plus = 0.0
            x = uniforms[r, s] * (p_minus + p_plus)
            if x < p_minus:
                out[r, s] = -1
                cur = _sandwich(projectors[s, 0], cur, p_minus)
            else:
                out[r, s] = 1
                cur = _sandwich(projectors[s, 1], cur, p_plus)
    return out


@njit(cache=True)
def pair_rewards(alice_tables, bob_tables, dist):
    """Expected reward of every (Alice table, Bob table) pair.

    ``alice_tables[a, x, l]`` is Alice's sign in coordinate l when she sees x;
    ``bob_tables[b, y, k]`` likewise for Bob. The reward in state (x, y) is
    ``alice[x, y] * bob[y, x]``.
    """
    na = alice_tables.shape[0]
    nb = bob_tables.shape[0]
    out = np.zeros((na, nb))
    for a in range(na):
        for b in range(nb):
            acc = 0.0
            for x in range(3):
                for y in range(3):
                    acc += dist[x, y] * alice_tables[a, x, y] * bob_tables[b, y, x]
            out[a, b] = acc
    return out


@njit(cache=True)
def _inverse_cdf(cdf, u):
    k = 0
    last = cdf.shape[0] - 1
    while k < last and u >= cdf[k]:
        k += 1
    return k


@njit(cache=True)
def simulate_tabular(cdf, init_cdf, init_u, step_u, alice_pol, bob_pol, buckets, act_u, act_v):
    """Monte Carlo runs of table-driven history policies.

    ``alice_pol[r, prev, x, w]`` is the action index Alice plays in run r when
    her previous observation is ``prev`` (0 before the first step, else 1..3),
    her current one is ``x + 1`` and the common-randomness bucket is w. Bob's
    table has the same layout over his own observations. ``cdf[s, i, j]`` is
    the cumulative next-state law from state ``s = 3x + y`` under actions
    ``(i, j)``. Returns per-step rewards as an ``(R, N)`` int8 array.
    """
    runs, steps = step_u.shape
    out = np.empty((runs, steps), dtype=np.int8)
    for r in range(runs):
        s = _inverse_cdf(init_cdf, init_u[r])
        px = 0
        py = 0
        for n in range(steps):
            x = s // 3
            y = s % 3
            w = buckets[r, n]
            ia = alice_pol[r, px, x, w]
            ib = bob_pol[r, py, y, w]
            out[r, n] = act_u[ia, y] * act_v[ib, x]
            px = x + 1
            py = y + 1
            s = _inverse_cdf(cdf[s, ia, ib], step_u[r, n])
    return out
