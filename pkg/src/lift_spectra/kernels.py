"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set
``LIFT_SPECTRA_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _pykernels

python_backend = _pykernels

if os.environ.get("LIFT_SPECTRA_BACKEND", "").lower() == "python":
    compiled_backend = None
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = active.BACKEND

permutation = active.permutation
adjacency_apply = active.adjacency_apply
cheeger_min = active.cheeger_min
