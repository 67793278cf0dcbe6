"""Backend selection for the LSTM sequence kernels.

The compiled extension is preferred when available; the pure-numpy module is
the fallback.  Both expose the same two functions with identical semantics,
so everything above this module is backend-agnostic.

Set ASSISTLM_BACKEND=python or ASSISTLM_BACKEND=cython to force a backend
(forcing "cython" raises if the extension was not built).
"""

import os

from . import _kernels_py

_requested = os.environ.get("ASSISTLM_BACKEND", "").strip().lower()

if _requested in ("python", "py"):
    _impl = _kernels_py
elif _requested == "cython":
    from . import _kernels as _impl  # type: ignore[no-redef]
elif _requested == "":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py
else:
    raise RuntimeError(f"unknown ASSISTLM_BACKEND {_requested!r}")

BACKEND: str = _impl.NAME
lstm_seq_forward = _impl.lstm_seq_forward
lstm_seq_backward = _impl.lstm_seq_backward
