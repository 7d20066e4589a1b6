"""Backend selection for the hot loops.

The compiled extension is used when it was built; setting ``QSD_PURE_PYTHON=1``
forces the numpy fallback.  ``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py

python_backend = _kernels_py
compiled_backend = None

if not os.environ.get("QSD_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if _active is compiled_backend else "python"

pde_heun_steps = _active.pde_heun_steps
beta_family_rhs = _active.beta_family_rhs

__all__ = ["BACKEND", "pde_heun_steps", "beta_family_rhs", "python_backend", "compiled_backend"]
