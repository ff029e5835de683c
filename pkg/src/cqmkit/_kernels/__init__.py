"""Annealing kernels: compiled when the extension built, pure Python otherwise.

Set ``CQMKIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from cqmkit._kernels import _anneal_py as python

compiled = None
if not os.environ.get("CQMKIT_PURE_PYTHON"):
    try:
        from cqmkit._kernels import _anneal as compiled
    except ImportError:
        compiled = None

default = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"


def get(name=None):
    """Kernel module by name (``"cython"`` / ``"python"``); ``None`` picks the default."""
    if name is None:
        return default
    if name == "python":
        return python
    if name == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available in this build")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def name_of(module):
    return "python" if module is python else "cython"
