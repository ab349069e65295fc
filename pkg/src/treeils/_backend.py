"""Pick the kernel implementation at import time.

The compiled extension is used when it was built; set
``TREEILS_PURE_PYTHON=1`` to force the NumPy fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

if _compiled is not None and not os.environ.get("TREEILS_PURE_PYTHON"):
    name = "compiled"
else:
    name = "python"
kernels = BACKENDS[name]


def use(backend):
    """Switch the active kernels; returns the previous backend name."""
    global kernels, name
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(BACKENDS)}")
    previous = name
    name = backend
    kernels = BACKENDS[backend]
    return previous
