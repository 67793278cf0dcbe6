"""Central-difference gradient checking for dict-of-arrays loss functions.

loss_fn takes a dict of parameter arrays and returns (loss, grads) where
grads mirrors the input dict.  Analytic gradients are compared against
(f(x + step) - f(x - step)) / (2 * step) per coordinate; the error measure
is |analytic - numeric| / max(1, |analytic|, |numeric|), i.e. relative for
large gradients and absolute near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import NumericError

STEP = 1e-6
TOLERANCE = 1e-5

LossFn = Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]]


@dataclass
class GradCheckReport:
    max_rel_error: float = 0.0
    worst_param: str = ""
    worst_index: tuple = ()
    n_checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def gradient_check(loss_fn: LossFn, params: dict[str, np.ndarray],
                   step: float = STEP, tolerance: float = TOLERANCE,
                   max_per_param: int | None = None,
                   rng: np.random.Generator | None = None) -> GradCheckReport:
    """Compare analytic gradients from loss_fn against central differences.

    Parameter arrays are perturbed in place and restored.  When
    max_per_param is given, that many coordinates per array are sampled
    (seeded rng, default seed 0) instead of sweeping every element.
    """
    loss0, grads = loss_fn(params)
    if not math.isfinite(loss0):
        raise NumericError(f"non-finite loss {loss0!r} at the check point")
    report = GradCheckReport()
    if rng is None:
        rng = np.random.default_rng(0)
    for name, param in params.items():
        flat = param.reshape(-1)
        gflat = np.asarray(grads[name]).reshape(-1)
        n = flat.size
        if max_per_param is not None and n > max_per_param:
            indices = rng.choice(n, size=max_per_param, replace=False)
        else:
            indices = np.arange(n)
        for i in indices:
            orig = flat[i]
            flat[i] = orig + step
            lo_plus, _ = loss_fn(params)
            flat[i] = orig - step
            lo_minus, _ = loss_fn(params)
            flat[i] = orig
            if not (math.isfinite(lo_plus) and math.isfinite(lo_minus)):
                raise NumericError("non-finite loss during finite differencing")
            numeric = (lo_plus - lo_minus) / (2.0 * step)
            analytic = gflat[i]
            rel = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
            report.n_checked += 1
            if rel > report.max_rel_error:
                report.max_rel_error = rel
                report.worst_param = name
                report.worst_index = tuple(np.unravel_index(i, param.shape))
            if rel > tolerance:
                report.failures.append(
                    f"{name}{tuple(np.unravel_index(i, param.shape))}: "
                    f"analytic={analytic:.10g} numeric={numeric:.10g} rel={rel:.3g}")
    return report
