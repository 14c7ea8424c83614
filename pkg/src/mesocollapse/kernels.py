"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``MESOCOLLAPSE_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _pykernels as python

compiled = None
if os.environ.get("MESOCOLLAPSE_PURE_PYTHON") != "1":
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"

SCHEME_EXACT = python.SCHEME_EXACT
SCHEME_HEUN = python.SCHEME_HEUN
SCHEME_KICKS = python.SCHEME_KICKS

iterated_sums = _impl.iterated_sums
evolve_diagonal = _impl.evolve_diagonal


def backends():
    """Available implementations keyed by name."""
    out = {"python": python}
    if compiled is not None:
        out["compiled"] = compiled
    return out
