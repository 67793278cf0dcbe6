"""Pure-numpy LSTM sequence kernels (fallback backend).

Shapes: x (T, B, d_in); h, c (T, B, D); gates (T, B, 4D) holding the
post-activation gate values in the order i, f, g, o. All float64.
"""

from __future__ import annotations

import numpy as np

from .ops import sigmoid

NAME = "python"


def lstm_seq_forward(wx, wh, b, x, h0, c0):
    T, B, _ = x.shape
    D = h0.shape[1]
    h = np.empty((T, B, D))
    c = np.empty((T, B, D))
    gates = np.empty((T, B, 4 * D))
    h_prev, c_prev = h0, c0
    for t in range(T):
        pre = x[t] @ wx + h_prev @ wh + b
        i = sigmoid(pre[:, :D])
        f = sigmoid(pre[:, D:2 * D])
        g = np.tanh(pre[:, 2 * D:3 * D])
        o = sigmoid(pre[:, 3 * D:])
        c_t = f * c_prev + i * g
        h_t = o * np.tanh(c_t)
        gates[t, :, :D] = i
        gates[t, :, D:2 * D] = f
        gates[t, :, 2 * D:3 * D] = g
        gates[t, :, 3 * D:] = o
        h[t] = h_t
        c[t] = c_t
        h_prev, c_prev = h_t, c_t
    return h, c, gates


def lstm_seq_backward(wx, wh, x, h0, c0, h, c, gates, dh, dh_final, dc_final):
    T, B, d_in = x.shape
    D = h0.shape[1]
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * D)
    dx = np.empty_like(x)
    carry_h = dh_final.copy()
    carry_c = dc_final.copy()
    dpre = np.empty((B, 4 * D))
    for t in range(T - 1, -1, -1):
        i = gates[t, :, :D]
        f = gates[t, :, D:2 * D]
        g = gates[t, :, 2 * D:3 * D]
        o = gates[t, :, 3 * D:]
        c_prev = c[t - 1] if t > 0 else c0
        h_prev = h[t - 1] if t > 0 else h0
        dh_t = dh[t] + carry_h
        tc = np.tanh(c[t])
        do = dh_t * tc
        dc_t = dh_t * o * (1.0 - tc * tc) + carry_c
        dpre[:, :D] = (dc_t * g) * i * (1.0 - i)
        dpre[:, D:2 * D] = (dc_t * c_prev) * f * (1.0 - f)
        dpre[:, 2 * D:3 * D] = (dc_t * i) * (1.0 - g * g)
        dpre[:, 3 * D:] = do * o * (1.0 - o)
        dwx += x[t].T @ dpre
        dwh += h_prev.T @ dpre
        db += dpre.sum(axis=0)
        dx[t] = dpre @ wx.T
        carry_h = dpre @ wh.T
        carry_c = dc_t * f
    return dwx, dwh, db, dx, carry_h, carry_c
