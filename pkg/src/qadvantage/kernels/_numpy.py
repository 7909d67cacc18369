"""Vectorised numpy counterparts of the kernels in ``_jit``.

Signatures and return conventions match ``_jit`` exactly.
"""

import numpy as np


def _offdiag_norm(m):
    off = m - np.diag(np.diag(m))
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def jacobi_eigvalsh(a, tol, max_sweeps):
    n = a.shape[0]
    m = np.array(a, dtype=np.complex128, copy=True)
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
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                e_conj = np.conj(apq / mag)
                rot = np.array([[c, s], [-s * e_conj, c * e_conj]], dtype=np.complex128)
                m[:, [p, q]] = m[:, [p, q]] @ rot
                m[[p, q], :] = rot.conj().T @ m[[p, q], :]
                m[p, q] = m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real
        sweeps += 1
        off = _offdiag_norm(m)
    return np.diag(m).real.copy(), sweeps, off


def cmatmul(a, b):
    return np.asarray(a, dtype=np.complex128) @ np.asarray(b, dtype=np.complex128)


def ckron(a, b):
    n, m = a.shape
    p, q = b.shape
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(n * p, m * q).astype(np.complex128, copy=False)


def measure_sequence(rho, projectors, uniforms, eps):
    rounds, k = uniforms.shape
    out = np.empty((rounds, k), dtype=np.int8)
    cur = np.broadcast_to(rho, (rounds,) + rho.shape).copy()
    for s in range(k):
        minus, plus = projectors[s, 0], projectors[s, 1]
        p_minus = np.einsum("ik,rki->r", minus, cur).real
        p_plus = np.einsum("ik,rki->r", plus, cur).real
        p_minus = np.where(p_minus < eps, 0.0, p_minus)
        p_plus = np.where(p_plus < eps, 0.0, p_plus)
        pick_minus = uniforms[:, s] * (p_minus + p_plus) < p_minus
        out[:, s] = np.where(pick_minus, -1, 1)
        proj = np.where(pick_minus[:, None, None], minus, plus)
        scale = np.where(pick_minus, p_minus, p_plus)
        cur = proj @ cur @ proj / scale[:, None, None]
    return out


def pair_rewards(alice_tables, bob_tables, dist):
    return np.einsum("axy,byx,xy->ab", alice_tables, bob_tables, dist)


def simulate_tabular(cdf, init_cdf, init_u, step_u, alice_pol, bob_pol, buckets, act_u, act_v):
    runs, steps = step_u.shape
    rows = np.arange(runs)
    out = np.empty((runs, steps), dtype=np.int8)
    s = np.count_nonzero(init_cdf[None, :-1] <= init_u[:, None], axis=1)
    px = np.zeros(runs, dtype=np.int64)
    py = np.zeros(runs, dtype=np.int64)
    for n in range(steps):
        x, y = s // 3, s % 3
        w = buckets[:, n]
        ia = alice_pol[rows, px, x, w]
        ib = bob_pol[rows, py, y, w]
        out[:, n] = act_u[ia, y] * act_v[ib, x]
        px, py = x + 1, y + 1
        row_cdf = cdf[s, ia, ib]
        s = np.count_nonzero(row_cdf[:, :-1] <= step_u[:, n : n + 1], axis=1)
    return out
