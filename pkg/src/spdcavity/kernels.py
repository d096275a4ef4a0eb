"""
Per-point sweep kernel with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; setting the environment
variable ``SPDCAVITY_PURE_PYTHON=1`` forces the fallback.  Both backends
return ``(n_a, n_b, K, nonnormality, status)`` arrays.
"""

from __future__ import annotations

import os

from . import _kernel_fallback

STATUS_OK = _kernel_fallback.STATUS_OK
STATUS_THRESHOLD = _kernel_fallback.STATUS_THRESHOLD

BACKENDS = {"python": _kernel_fallback.evaluate_points}

try:
    from . import _kernel
except ImportError:  # extension not built
    _kernel = None
else:
    BACKENDS["compiled"] = _kernel.evaluate_points

if _kernel is not None and not os.environ.get("SPDCAVITY_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"


def evaluate_points(G, R, t, phi, theta, backend: str | None = None):
    """Evaluate photon numbers and cold-cavity K on flat parameter arrays."""
    return BACKENDS[backend or BACKEND](G, R, t, phi, theta)
