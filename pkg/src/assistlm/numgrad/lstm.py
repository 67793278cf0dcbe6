"""LSTM cell parameters and single-step wrappers over the sequence kernels.

Weights use the fused-gate layout: columns [i | f | g | o], each block of
width D.  wx is (d_in, 4D), wh is (D, 4D), b is (4D,).  The forget-gate bias
block is initialised to 1.0 so early training does not forget state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

INIT_SCALE = 0.08


@dataclass
class LstmParams:
    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray

    @property
    def d_in(self) -> int:
        return self.wx.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.wh.shape[0]

    @classmethod
    def init(cls, d_in: int, hidden_dim: int, rng: np.random.Generator) -> "LstmParams":
        wx = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(d_in, 4 * hidden_dim))
        wh = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(hidden_dim, 4 * hidden_dim))
        b = np.zeros(4 * hidden_dim)
        b[hidden_dim:2 * hidden_dim] = 1.0
        return cls(wx=wx, wh=wh, b=b)

    def zeros_like(self) -> "LstmParams":
        return LstmParams(np.zeros_like(self.wx), np.zeros_like(self.wh), np.zeros_like(self.b))


def lstm_step(params: LstmParams, x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
    """One cell step for a single row.  x is (d_in,); returns (h, c, gates)."""
    xs = np.ascontiguousarray(x, dtype=np.float64).reshape(1, 1, -1)
    h0 = np.ascontiguousarray(h_prev, dtype=np.float64).reshape(1, -1)
    c0 = np.ascontiguousarray(c_prev, dtype=np.float64).reshape(1, -1)
    h, c, gates = kernels.lstm_seq_forward(params.wx, params.wh, params.b, xs, h0, c0)
    return h[0, 0], c[0, 0], gates[0, 0]


def lstm_step_backward(params: LstmParams, x: np.ndarray,
                       h_prev: np.ndarray, c_prev: np.ndarray,
                       h: np.ndarray, c: np.ndarray, gates: np.ndarray,
                       dh: np.ndarray, dc: np.ndarray):
    """Backprop through one lstm_step.  Returns (grads, dx, dh_prev, dc_prev)."""
    grads, dx, dh0, dc0 = lstm_sequence_backward(
        params,
        np.asarray(x, dtype=np.float64).reshape(1, 1, -1),
        np.asarray(h_prev, dtype=np.float64).reshape(1, -1),
        np.asarray(c_prev, dtype=np.float64).reshape(1, -1),
        np.ascontiguousarray(h, dtype=np.float64).reshape(1, 1, -1),
        np.ascontiguousarray(c, dtype=np.float64).reshape(1, 1, -1),
        np.ascontiguousarray(gates, dtype=np.float64).reshape(1, 1, -1),
        np.asarray(dh, dtype=np.float64).reshape(1, 1, -1),
        np.zeros((1, h.shape[-1])),
        np.asarray(dc, dtype=np.float64).reshape(1, -1),
    )
    return grads, dx[0, 0], dh0[0], dc0[0]


def lstm_sequence(params: LstmParams, x: np.ndarray, h0: np.ndarray, c0: np.ndarray):
    """Run the cell over x of shape (T, B, d_in); returns (h, c, gates)."""
    xs = np.ascontiguousarray(x, dtype=np.float64)
    return kernels.lstm_seq_forward(
        params.wx, params.wh, params.b, xs,
        np.ascontiguousarray(h0, dtype=np.float64),
        np.ascontiguousarray(c0, dtype=np.float64),
    )


def lstm_sequence_backward(params: LstmParams, x: np.ndarray,
                           h0: np.ndarray, c0: np.ndarray,
                           h: np.ndarray, c: np.ndarray, gates: np.ndarray,
                           dh: np.ndarray, dh_final: np.ndarray, dc_final: np.ndarray):
    """Backprop through lstm_sequence.

    dh holds per-step gradients on h; dh_final/dc_final are gradients flowing
    into the state after the last step.  Returns (grads, dx, dh0, dc0) with
    grads an LstmParams of the same shapes.
    """
    dwx, dwh, db, dx, dh0, dc0 = kernels.lstm_seq_backward(
        params.wx, params.wh,
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(h0, dtype=np.float64),
        np.ascontiguousarray(c0, dtype=np.float64),
        h, c, gates,
        np.ascontiguousarray(dh, dtype=np.float64),
        np.ascontiguousarray(dh_final, dtype=np.float64),
        np.ascontiguousarray(dc_final, dtype=np.float64),
    )
    return LstmParams(dwx, dwh, db), dx, dh0, dc0
