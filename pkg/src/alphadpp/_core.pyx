# cython: language_level=3
"""Compiled hot kernels; see ``_pure`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

ctypedef double complex cplx


def det_alpha_dp(a, alpha):
    cdef const cplx[:, ::1] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n == 0:
        return 1 + 0j
    cdef double al = float(alpha)
    cdef Py_ssize_t r, u, dv, dw, width, span, low, head, base, bit, v
    cdef Py_ssize_t nsets = (<Py_ssize_t>1) << n
    cdef cplx g, ga
    cdef cplx* closed = <cplx*>calloc(nsets, sizeof(cplx))
    cdef cplx* paths = <cplx*>malloc((nsets >> 1) * n * sizeof(cplx))
    cdef cplx result
    if closed == NULL or paths == NULL:
        free(closed)
        free(paths)
        raise MemoryError("det_alpha_dp: cannot allocate DP tables")
    with nogil:
        closed[0] = 1.0
        for r in range(n):
            low = ((<Py_ssize_t>1) << r) - 1
            width = n - r - 1
            span = n - r
            for u in range(((<Py_ssize_t>1) << width) * span):
                paths[u] = 0.0
            for u in range((<Py_ssize_t>1) << width):
                paths[u * span] = closed[low | (u << (r + 1))]
            head = low | ((<Py_ssize_t>1) << r)
            for u in range((<Py_ssize_t>1) << width):
                base = head | (u << (r + 1))
                for dv in range(span):
                    g = paths[u * span + dv]
                    if g.real == 0.0 and g.imag == 0.0:
                        continue
                    v = r + dv
                    closed[base] = closed[base] + g * m[v, r]
                    ga = g * al
                    for dw in range(1, span):
                        bit = (<Py_ssize_t>1) << (dw - 1)
                        if u & bit:
                            continue
                        paths[(u | bit) * span + dw] = (
                            paths[(u | bit) * span + dw] + ga * m[v, r + dw]
                        )
        result = closed[nsets - 1]
    free(closed)
    free(paths)
    return complex(result.real, result.imag)


def projection_dpp_batch(vecs, selected, uniforms):
    cdef const cplx[:, ::1] V = np.ascontiguousarray(vecs, dtype=np.complex128)
    cdef const cnp.uint8_t[:, ::1] sel = np.ascontiguousarray(selected, dtype=np.uint8)
    cdef const double[:, ::1] unif = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n_items = V.shape[0]
    cdef Py_ssize_t n_eig = V.shape[1]
    cdef Py_ssize_t n_samples = sel.shape[0]
    counts_arr = np.zeros(n_samples, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef Py_ssize_t s, j, k, t, q, i, total = 0
    for s in range(n_samples):
        k = 0
        for j in range(n_eig):
            k += sel[s, j] != 0
        counts[s] = k
        total += k
    flat_arr = np.empty(total, dtype=np.int64)
    cdef cnp.int64_t[::1] flat = flat_arr
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t* cols = <Py_ssize_t*>malloc(max(n_eig, 1) * sizeof(Py_ssize_t))
    cdef double* prob = <double*>malloc(max(n_items, 1) * sizeof(double))
    cdef cplx* basis = <cplx*>malloc(max(n_eig * n_eig, 1) * sizeof(cplx))
    cdef cplx* e = <cplx*>malloc(max(n_eig, 1) * sizeof(cplx))
    cdef double acc, target, nrm
    cdef cplx dot, z
    if cols == NULL or prob == NULL or basis == NULL or e == NULL:
        free(cols); free(prob); free(basis); free(e)
        raise MemoryError("projection_dpp_batch: allocation failed")
    with nogil:
        for s in range(n_samples):
            k = 0
            for j in range(n_eig):
                if sel[s, j] != 0:
                    cols[k] = j
                    k += 1
            if k == 0:
                continue
            for i in range(n_items):
                acc = 0.0
                for j in range(k):
                    z = V[i, cols[j]]
                    acc += z.real * z.real + z.imag * z.imag
                prob[i] = acc
            for t in range(k):
                acc = 0.0
                for i in range(n_items):
                    acc += prob[i]
                target = unif[s, t] * acc
                acc = 0.0
                i = 0
                while i < n_items:
                    acc += prob[i]
                    if acc > target:
                        break
                    i += 1
                if i >= n_items:
                    i = n_items - 1
                while prob[i] <= 0.0 and i > 0:
                    i -= 1
                for j in range(k):
                    e[j] = V[i, cols[j]]
                for q in range(t):
                    dot = 0.0
                    for j in range(k):
                        z = basis[q * k + j]
                        dot = dot + (z.real - 1j * z.imag) * e[j]
                    for j in range(k):
                        e[j] = e[j] - dot * basis[q * k + j]
                nrm = 0.0
                for j in range(k):
                    nrm += e[j].real * e[j].real + e[j].imag * e[j].imag
                nrm = sqrt(nrm)
                for j in range(k):
                    e[j] = e[j] / nrm
                    basis[t * k + j] = e[j]
                for q in range(n_items):
                    dot = 0.0
                    for j in range(k):
                        dot = dot + V[q, cols[j]] * (e[j].real - 1j * e[j].imag)
                    prob[q] -= dot.real * dot.real + dot.imag * dot.imag
                    if prob[q] < 0.0:
                        prob[q] = 0.0
                prob[i] = 0.0
                flat[pos] = i
                pos += 1
    free(cols); free(prob); free(basis); free(e)
    return flat_arr, counts_arr
