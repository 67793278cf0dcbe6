"""Dense float64 primitives: activations, softmax, cross-entropy."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericError

# Probabilities are floored before log so a fully underflowed softmax entry
# yields a large finite loss instead of +inf.
LOG_FLOOR = 1e-300
LOG_FLOOR_LOG = math.log(LOG_FLOOR)


def assert_finite(x: np.ndarray, what: str = "array") -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")


def sigmoid(z):
    # Split by sign to avoid overflow in exp for large |z|.
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-subtracted softmax; rows sum to 1, entries in (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def log_softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def cross_entropy(p: np.ndarray, target: int) -> float:
    """-ln p[target], with p floored at 1e-300."""
    return -float(np.log(max(float(p[target]), LOG_FLOOR)))
