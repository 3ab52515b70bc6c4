"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names (``greedy_projection``, ``expected_degrees``,
``edge_variances``) dispatch to the numba variant unless JIT is disabled via
``BIDEGREE_DISABLE_JIT``. Both variants are importable directly so tests and
the benchmark can compare them.
"""

import numpy as np

from ._jit import USE_NUMBA, njit


# --------------------------------------------------------------------------
# Greedy star construction (directed Havel-Hakimi / L1 projection)
# --------------------------------------------------------------------------

def _greedy_projection_np(zp, zm):
    n = zp.shape[0]
    zm = zm.astype(np.int64).copy()
    outrem = np.where(zp > 0, zp, 0).astype(np.int64)
    active = zp > 0
    idx = np.arange(n)
    src = []
    dst = []
    while active.any():
        cand_s = idx[active]
        center = cand_s[np.argmax(zp[cand_s])]  # argmax returns the first max
        mask = zm > 0
        mask[center] = False
        cand = idx[mask]
        h = min(int(zp[center]), cand.shape[0])
        if h > 0:
            order = np.lexsort((cand, -outrem[cand], -zm[cand]))
            chosen = cand[order[:h]]
            zm[chosen] -= 1
            src.extend([center] * h)
            dst.extend(chosen.tolist())
        active[center] = False
        outrem[center] = 0
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


@njit
def _greedy_projection_nb(zp, zm):
    n = zp.shape[0]
    zm = zm.astype(np.int64).copy()
    outrem = np.zeros(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    total = 0
    for i in range(n):
        if zp[i] > 0:
            outrem[i] = zp[i]
            active[i] = True
            total += min(zp[i], n - 1)
    src = np.empty(total, dtype=np.int64)
    dst = np.empty(total, dtype=np.int64)
    m = 0
    cand = np.empty(n, dtype=np.int64)
    for _ in range(n):
        center = -1
        for i in range(n):
            if active[i] and (center < 0 or zp[i] > zp[center]):
                center = i
        if center < 0:
            break
        c = 0
        for k in range(n):
            if k != center and zm[k] > 0:
                cand[c] = k
                c += 1
        h = min(zp[center], c)
        if h > 0:
            sel = cand[:c].copy()
            # two stable passes == lexsort on (-zm, -outrem, index)
            sel = sel[np.argsort(-outrem[sel], kind="mergesort")]
            sel = sel[np.argsort(-zm[sel], kind="mergesort")]
            for t in range(h):
                k = sel[t]
                zm[k] -= 1
                src[m] = center
                dst[m] = k
                m += 1
        active[center] = False
        outrem[center] = 0
    return src[:m], dst[:m]


# --------------------------------------------------------------------------
# p0 edge probabilities
# --------------------------------------------------------------------------

def _expit_np(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _expected_degrees_np(alpha, beta):
    p = _expit_np(alpha[:, None] + beta[None, :])
    np.fill_diagonal(p, 0.0)
    return p.sum(axis=1), p.sum(axis=0)


def _edge_variances_np(alpha, beta):
    p = _expit_np(alpha[:, None] + beta[None, :])
    w = p * (1.0 - p)
    np.fill_diagonal(w, 0.0)
    return w


@njit
def _expit_scalar(x):
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


@njit
def _expected_degrees_nb(alpha, beta):
    n = alpha.shape[0]
    out = np.zeros(n)
    inn = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                p = _expit_scalar(alpha[i] + beta[j])
                out[i] += p
                inn[j] += p
    return out, inn


@njit
def _edge_variances_nb(alpha, beta):
    n = alpha.shape[0]
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                p = _expit_scalar(alpha[i] + beta[j])
                w[i, j] = p * (1.0 - p)
    return w


if USE_NUMBA:
    greedy_projection = _greedy_projection_nb
    expected_degrees = _expected_degrees_nb
    edge_variances = _edge_variances_nb
else:
    greedy_projection = _greedy_projection_np
    expected_degrees = _expected_degrees_np
    edge_variances = _edge_variances_np

BACKEND = "numba" if USE_NUMBA else "numpy"
