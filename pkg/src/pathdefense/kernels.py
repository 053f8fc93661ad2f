"""Kernel backend selection.

The compiled extension is preferred when present; set ``PATHDEFENSE_PURE=1``
to force the pure-Python fallback (used by the kernel benchmark and the
backend-equivalence tests).
"""

import os

if os.environ.get("PATHDEFENSE_PURE"):
    from pathdefense import _pykern as _impl
else:
    try:
        from pathdefense import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from pathdefense import _pykern as _impl

dijkstra = _impl.dijkstra
dag_search = _impl.dag_search
IMPLEMENTATION = _impl.IMPLEMENTATION
