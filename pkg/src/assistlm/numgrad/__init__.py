"""Minimal verified numerics: LSTM cell, softmax/cross-entropy, AdaDelta,
and finite-difference gradient checking. Everything runs in float64.

The time-step recursion (the hot loop) has two interchangeable backends:
a compiled Cython kernel and a pure-numpy fallback; see ``kernels``.
"""

from .adadelta import AdaDelta, AdaDeltaState, adadelta_update
from .gradcheck import GradCheckReport, gradient_check
from .kernels import BACKEND, lstm_seq_backward, lstm_seq_forward
from .lstm import (LstmParams, lstm_sequence, lstm_sequence_backward,
                   lstm_step, lstm_step_backward)
from .ops import assert_finite, cross_entropy, log_softmax, sigmoid, softmax

__all__ = [
    "AdaDelta", "AdaDeltaState", "adadelta_update",
    "GradCheckReport", "gradient_check",
    "BACKEND", "lstm_seq_backward", "lstm_seq_forward",
    "LstmParams", "lstm_sequence", "lstm_sequence_backward",
    "lstm_step", "lstm_step_backward",
    "assert_finite", "cross_entropy", "log_softmax", "sigmoid", "softmax",
]
