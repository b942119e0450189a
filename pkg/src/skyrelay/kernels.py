"""Backend selection for the link-geometry kernels.

The compiled extension ``skyrelay._ckernels`` is used when it imports;
otherwise, or when ``SKYRELAY_PURE_PYTHON=1`` is set, the numpy reference
in ``skyrelay._pykernels`` is used. Both expose ``power_matrix``,
``link_sinr`` and ``conflict_codes`` with identical semantics.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SKYRELAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

power_matrix = _impl.power_matrix
link_sinr = _impl.link_sinr
conflict_codes = _impl.conflict_codes

NONE, NODE, FD, RI = _pykernels.NONE, _pykernels.NODE, _pykernels.FD, _pykernels.RI


def compiled_available() -> bool:
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True
