# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM sequence kernels: BLAS matmuls + C elementwise gate loops.

Mirrors _kernels_py exactly (same shapes, same gate order i,f,g,o).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemm

NAME = "cython"


cdef inline double _sig(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def lstm_seq_forward(double[:, ::1] wx, double[:, ::1] wh, double[::1] b,
                     double[:, :, ::1] x, double[:, ::1] h0, double[:, ::1] c0):
    cdef int T = x.shape[0]
    cdef int B = x.shape[1]
    cdef int dx = x.shape[2]
    cdef int D = h0.shape[1]
    cdef int G = 4 * D

    h_arr = np.empty((T, B, D))
    c_arr = np.empty((T, B, D))
    g_arr = np.empty((T, B, G))
    cdef double[:, :, ::1] h = h_arr
    cdef double[:, :, ::1] c = c_arr
    cdef double[:, :, ::1] gates = g_arr

    cdef char tn = b'n'
    cdef double one = 1.0, zero = 0.0
    cdef double *h_prev
    cdef double *c_prev
    cdef double zi, zf, zg, zo, cv
    cdef int t, r, u

    with nogil:
        for t in range(T):
            # gates[t] <- x[t] @ wx + h_prev @ wh   (row-major via transposed dgemm)
            dgemm(&tn, &tn, &G, &B, &dx, &one, &wx[0, 0], &G,
                  &x[t, 0, 0], &dx, &zero, &gates[t, 0, 0], &G)
            if t == 0:
                h_prev = &h0[0, 0]
                c_prev = &c0[0, 0]
            else:
                h_prev = &h[t - 1, 0, 0]
                c_prev = &c[t - 1, 0, 0]
            dgemm(&tn, &tn, &G, &B, &D, &one, &wh[0, 0], &G,
                  h_prev, &D, &one, &gates[t, 0, 0], &G)
            for r in range(B):
                for u in range(D):
                    zi = _sig(gates[t, r, u] + b[u])
                    zf = _sig(gates[t, r, D + u] + b[D + u])
                    zg = tanh(gates[t, r, 2 * D + u] + b[2 * D + u])
                    zo = _sig(gates[t, r, 3 * D + u] + b[3 * D + u])
                    cv = zf * c_prev[r * D + u] + zi * zg
                    gates[t, r, u] = zi
                    gates[t, r, D + u] = zf
                    gates[t, r, 2 * D + u] = zg
                    gates[t, r, 3 * D + u] = zo
                    c[t, r, u] = cv
                    h[t, r, u] = zo * tanh(cv)
    return h_arr, c_arr, g_arr


def lstm_seq_backward(double[:, ::1] wx, double[:, ::1] wh,
                      double[:, :, ::1] x, double[:, ::1] h0, double[:, ::1] c0,
                      double[:, :, ::1] h, double[:, :, ::1] c, double[:, :, ::1] gates,
                      double[:, :, ::1] dh, double[:, ::1] dh_final, double[:, ::1] dc_final):
    cdef int T = x.shape[0]
    cdef int B = x.shape[1]
    cdef int dx = x.shape[2]
    cdef int D = h0.shape[1]
    cdef int G = 4 * D

    dwx_arr = np.zeros((dx, G))
    dwh_arr = np.zeros((D, G))
    db_arr = np.zeros(G)
    dx_arr = np.empty((T, B, dx))
    ch_arr = np.array(dh_final, copy=True)
    cc_arr = np.array(dc_final, copy=True)
    dpre_arr = np.empty((B, G))
    cdef double[:, ::1] dwx = dwx_arr
    cdef double[:, ::1] dwh = dwh_arr
    cdef double[::1] db = db_arr
    cdef double[:, :, ::1] dxo = dx_arr
    cdef double[:, ::1] carry_h = ch_arr
    cdef double[:, ::1] carry_c = cc_arr
    cdef double[:, ::1] dpre = dpre_arr

    cdef char tn = b'n', tt = b't'
    cdef double one = 1.0, zero = 0.0
    cdef double *h_prev
    cdef double *c_prev
    cdef double gi, gf, gg, go, tc, dht, dct, dv
    cdef int t, r, u

    with nogil:
        for t in range(T - 1, -1, -1):
            if t == 0:
                h_prev = &h0[0, 0]
                c_prev = &c0[0, 0]
            else:
                h_prev = &h[t - 1, 0, 0]
                c_prev = &c[t - 1, 0, 0]
            for r in range(B):
                for u in range(D):
                    gi = gates[t, r, u]
                    gf = gates[t, r, D + u]
                    gg = gates[t, r, 2 * D + u]
                    go = gates[t, r, 3 * D + u]
                    tc = tanh(c[t, r, u])
                    dht = dh[t, r, u] + carry_h[r, u]
                    dct = dht * go * (1.0 - tc * tc) + carry_c[r, u]
                    dpre[r, u] = (dct * gg) * gi * (1.0 - gi)
                    dpre[r, D + u] = (dct * c_prev[r * D + u]) * gf * (1.0 - gf)
                    dpre[r, 2 * D + u] = (dct * gi) * (1.0 - gg * gg)
                    dpre[r, 3 * D + u] = (dht * tc) * go * (1.0 - go)
                    carry_c[r, u] = dct * gf
            for u in range(G):
                dv = 0.0
                for r in range(B):
                    dv += dpre[r, u]
                db[u] += dv
            # dwx += x[t]^T @ dpre; dwh += h_prev^T @ dpre
            dgemm(&tn, &tt, &G, &dx, &B, &one, &dpre[0, 0], &G,
                  &x[t, 0, 0], &dx, &one, &dwx[0, 0], &G)
            dgemm(&tn, &tt, &G, &D, &B, &one, &dpre[0, 0], &G,
                  h_prev, &D, &one, &dwh[0, 0], &G)
            # dx[t] = dpre @ wx^T; carry_h = dpre @ wh^T
            dgemm(&tt, &tn, &dx, &B, &G, &one, &wx[0, 0], &G,
                  &dpre[0, 0], &G, &zero, &dxo[t, 0, 0], &dx)
            dgemm(&tt, &tn, &D, &B, &G, &one, &wh[0, 0], &G,
                  &dpre[0, 0], &G, &zero, &carry_h[0, 0], &D)
    return dwx_arr, dwh_arr, db_arr, dx_arr, ch_arr, cc_arr
