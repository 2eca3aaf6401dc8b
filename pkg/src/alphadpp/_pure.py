"""Pure-Python implementations of the hot kernels.

Every function here has a twin in ``_core.pyx`` with the same signature and
the same semantics; ``_backend`` picks one at import time.
"""
import numpy as np


def det_alpha_dp(a, alpha):
    """Cycle-expansion evaluation of the alpha-determinant.

    ``closed[U]`` holds the weighted sum over ways of covering the index set
    ``U`` by closed cycles.  A new cycle is always opened at ``r``, the
    smallest uncovered index, and grown one vertex at a time; each growth
    step carries one factor of ``alpha`` so a cycle of length k picks up
    ``alpha**(k-1)``.  Cost is O(2**n * n**2) time and O(2**n * n) memory.
    """
    n = len(a)
    if n == 0:
        return 1 + 0j
    rows = [[complex(a[i][j]) for j in range(n)] for i in range(n)]
    alpha = float(alpha)
    closed = [0j] * (1 << n)
    closed[0] = 1 + 0j
    for r in range(n):
        low = (1 << r) - 1
        width = n - r - 1
        span = n - r
        paths = [[0j] * span for _ in range(1 << width)]
        for u in range(1 << width):
            c = closed[low | (u << (r + 1))]
            if c:
                paths[u][0] = c
        head = low | (1 << r)
        for u in range(1 << width):
            row = paths[u]
            base = head | (u << (r + 1))
            for dv in range(span):
                g = row[dv]
                if not g:
                    continue
                av = rows[r + dv]
                closed[base] += g * av[r]
                ga = g * alpha
                for dw in range(1, span):
                    bit = 1 << (dw - 1)
                    if u & bit:
                        continue
                    paths[u | bit][dw] += ga * av[r + dw]
    return closed[(1 << n) - 1]


def projection_dpp_batch(vecs, selected, uniforms):
    """Sample projection DPPs spanned by selected eigenvector columns.

    Parameters
    ----------
    vecs : (N, N) complex array
        Orthonormal eigenvectors in columns.
    selected : (S, N) uint8 array
        Row s marks the eigenvectors kept in sample s.
    uniforms : (S, N) float array
        Uniform variates; sample s consumes the first k of row s, where k is
        the number of selected eigenvectors.

    Returns
    -------
    flat : int64 array
        Concatenated sampled item indices, in draw order.
    counts : int64 array
        Number of items in each sample.
    """
    vecs = np.asarray(vecs, dtype=np.complex128)
    n_items = vecs.shape[0]
    n_samples = selected.shape[0]
    counts = np.zeros(n_samples, dtype=np.int64)
    flat = []
    for s in range(n_samples):
        cols = np.flatnonzero(selected[s])
        k = cols.size
        if k == 0:
            continue
        y = vecs[:, cols]
        prob = (y.real ** 2 + y.imag ** 2).sum(axis=1)
        basis = np.zeros((k, k), dtype=np.complex128)
        for t in range(k):
            cum = np.cumsum(prob)
            target = uniforms[s, t] * cum[-1]
            i = int(np.searchsorted(cum, target, side="right"))
            i = min(i, n_items - 1)
            while prob[i] <= 0.0 and i > 0:
                i -= 1
            e = y[i].copy()
            for q in range(t):
                e -= (basis[q].conj() @ e) * basis[q]
            e /= np.sqrt((e.real ** 2 + e.imag ** 2).sum())
            basis[t] = e
            proj = y @ e.conj()
            prob -= proj.real ** 2 + proj.imag ** 2
            prob[i] = 0.0
            np.maximum(prob, 0.0, out=prob)
            flat.append(i)
        counts[s] = k
    return np.asarray(flat, dtype=np.int64), counts
