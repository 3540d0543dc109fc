# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels. Same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double ZERO_BRANCH = 1e-14


cdef inline double abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef int _pick(double* probs, int m, double r) nogil:
    cdef double cum = 0.0
    cdef int last = -1
    cdef int k
    for k in range(m):
        if probs[k] <= ZERO_BRANCH:
            continue
        last = k
        cum += probs[k]
        if r < cum:
            return k
    return last


def apply_1q(const double complex[::1] psi, int n, const double complex[:, ::1] u, int t):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t stride = 1 << (n - 1 - t)
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double complex a0, a1
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        a0 = psi[i]
        a1 = psi[j]
        out[i] = u[0, 0] * a0 + u[0, 1] * a1
        out[j] = u[1, 0] * a0 + u[1, 1] * a1
    return out_arr


def apply_2q(const double complex[::1] psi, int n, const double complex[:, ::1] u, int t0, int t1):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t s0 = 1 << (n - 1 - t0)
    cdef Py_ssize_t s1 = 1 << (n - 1 - t1)
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, r, c
    cdef Py_ssize_t idx[4]
    cdef double complex a[4]
    cdef double complex acc
    for i in range(dim):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        for c in range(4):
            a[c] = psi[idx[c]]
        for r in range(4):
            acc = 0
            for c in range(4):
                acc = acc + u[r, c] * a[c]
            out[idx[r]] = acc
    return out_arr


cdef int _measure_1q_core(const double complex[::1] psi, double complex[::1] out, int n,
                          const double complex[:, ::1] basis, int t, double r, double* p_out) nogil:
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t stride = 1 << (n - 1 - t)
    cdef Py_ssize_t i, j
    cdef double probs[2]
    cdef double complex amp
    cdef int k
    probs[0] = 0.0
    probs[1] = 0.0
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        for k in range(2):
            amp = basis[k, 0].conjugate() * psi[i] + basis[k, 1].conjugate() * psi[j]
            probs[k] += abs2(amp)
    k = _pick(probs, 2, r)
    cdef double norm = sqrt(probs[k])
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        amp = (basis[k, 0].conjugate() * psi[i] + basis[k, 1].conjugate() * psi[j]) / norm
        out[i] = basis[k, 0] * amp
        out[j] = basis[k, 1] * amp
    p_out[0] = probs[k]
    return k


def measure_1q(const double complex[::1] psi, int n, const double complex[:, ::1] basis, int t, double r):
    out_arr = np.empty(psi.shape[0], dtype=np.complex128)
    cdef double p
    cdef int k = _measure_1q_core(psi, out_arr, n, basis, t, r, &p)
    return k, p, out_arr


def measure_2q(const double complex[::1] psi, int n, const double complex[:, ::1] basis, int t0, int t1, double r):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t s0 = 1 << (n - 1 - t0)
    cdef Py_ssize_t s1 = 1 << (n - 1 - t1)
    cdef Py_ssize_t i, c
    cdef Py_ssize_t idx[4]
    cdef double probs[4]
    cdef double complex amp
    cdef int k
    for k in range(4):
        probs[k] = 0.0
    for i in range(dim):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        for k in range(4):
            amp = 0
            for c in range(4):
                amp = amp + basis[k, c].conjugate() * psi[idx[c]]
            probs[k] += abs2(amp)
    k = _pick(probs, 4, r)
    cdef double p = probs[k]
    cdef double norm = sqrt(p)
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    for i in range(dim):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        amp = 0
        for c in range(4):
            amp = amp + basis[k, c].conjugate() * psi[idx[c]]
        amp = amp / norm
        for c in range(4):
            out[idx[c]] = basis[k, c] * amp
    return k, p, out_arr


cdef inline int parity64(unsigned long long v) nogil:
    return __builtin_parityll(v)


cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil


def toeplitz_hash(const unsigned char[::1] bits, const unsigned char[::1] seed, Py_ssize_t m):
    # out[i] = parity(sum_k seed[i + k] & bits[n - 1 - k]); windows of seed are
    # read from 64 pre-shifted packings so each row costs n/64 word ops
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t nw = (n + 63) // 64
    cdef Py_ssize_t total = seed.shape[0]
    cdef Py_ssize_t sw = (total + 63) // 64 + 1
    out_arr = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    if m <= 0 or n == 0:
        return out_arr
    xr_arr = np.zeros(nw, dtype=np.uint64)
    shifted_arr = np.zeros((64, sw), dtype=np.uint64)
    cdef unsigned long long[::1] xr = xr_arr
    cdef unsigned long long[:, ::1] shifted = shifted_arr
    cdef Py_ssize_t i, k, s, w, q
    cdef unsigned long long acc
    with nogil:
        for k in range(n):
            if bits[n - 1 - k] & 1:
                xr[k >> 6] |= (<unsigned long long>1) << (k & 63)
        for s in range(64):
            for k in range(total - s):
                if seed[s + k] & 1:
                    shifted[s, k >> 6] |= (<unsigned long long>1) << (k & 63)
        for i in range(m):
            q = i >> 6
            s = i & 63
            acc = 0
            for w in range(nw):
                acc ^= shifted[s, q + w] & xr[w]
            out[i] = parity64(acc)
    return out_arr


def measure_seq(const double complex[::1] psi, int n, const double complex[:, :, ::1] bases, targets, rs):
    cdef Py_ssize_t i, m = len(targets)
    cdef double p
    a_arr = np.array(psi)
    b_arr = np.empty_like(a_arr)
    cdef double complex[::1] a = a_arr
    cdef double complex[::1] b = b_arr
    ks = [0] * m
    for i in range(m):
        ks[i] = _measure_1q_core(a, b, n, bases[i], targets[i], rs[i], &p)
        a, b = b, a
        a_arr, b_arr = b_arr, a_arr
    return ks, a_arr
