"""Selects the Monte Carlo walker at import: compiled if available.

Set ``HEVA_PURE_MC=1`` to force the pure-Python walker (used by the
benchmark and to debug build issues).  Both walkers are bit-identical by
contract, so the choice never changes results, only speed.
"""

import os

from . import _mc_py

if os.environ.get("HEVA_PURE_MC") == "1":
    _impl = _mc_py
    IMPLEMENTATION = "pure-python (forced)"
else:
    try:
        from . import _mc_cy as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "cython"
    except ImportError:  # pragma: no cover - depends on build environment
        _impl = _mc_py
        IMPLEMENTATION = "pure-python"

walk_paths = _impl.walk_paths
