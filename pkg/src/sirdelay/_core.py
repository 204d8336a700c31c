"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin takes over.  ``SIRDELAY_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels

if os.environ.get("SIRDELAY_BACKEND", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
integrate_sir = _impl.integrate_sir
