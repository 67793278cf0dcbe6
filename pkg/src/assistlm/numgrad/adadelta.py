"""AdaDelta updates (Zeiler 2012), applied per named parameter array.

    eg <- rho * eg + (1 - rho) * g^2
    delta = -sqrt(ed + eps) / sqrt(eg + eps) * g
    ed <- rho * ed + (1 - rho) * delta^2
    param += delta
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RHO = 0.95
EPS = 1e-6


@dataclass
class AdaDeltaState:
    """Running averages of squared gradients (eg) and squared deltas (ed)."""

    eg: np.ndarray
    ed: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "AdaDeltaState":
        return cls(eg=np.zeros(shape), ed=np.zeros(shape))


def adadelta_update(param: np.ndarray, grad: np.ndarray, state: AdaDeltaState,
                    rho: float = RHO, eps: float = EPS) -> np.ndarray:
    """Apply one AdaDelta step to param in place; returns the applied delta."""
    state.eg *= rho
    state.eg += (1.0 - rho) * grad * grad
    delta = -np.sqrt(state.ed + eps) / np.sqrt(state.eg + eps) * grad
    state.ed *= rho
    state.ed += (1.0 - rho) * delta * delta
    param += delta
    return delta


class AdaDelta:
    """Keeps one accumulator pair per parameter name."""

    def __init__(self, rho: float = RHO, eps: float = EPS):
        self.rho = rho
        self.eps = eps
        self.states: dict[str, AdaDeltaState] = {}

    def update(self, name: str, param: np.ndarray, grad: np.ndarray) -> None:
        state = self.states.get(name)
        if state is None:
            state = self.states[name] = AdaDeltaState.zeros(param.shape)
        adadelta_update(param, grad, state, self.rho, self.eps)

    def update_all(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, param in params.items():
            self.update(name, param, grads[name])
