"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-Python twin.
Set BBMLAB_FORCE_PYKERNELS=1 to force the fallback (used by the parity
tests and the kernel benchmark).
"""

import os

if os.environ.get("BBMLAB_FORCE_PYKERNELS") == "1":
    from . import pykernels as backend

    BACKEND = "python"
else:
    try:
        from . import ckernels as backend

        BACKEND = "cython"
    except ImportError:
        from . import pykernels as backend

        BACKEND = "python"

STATUS_EXACT = 0
STATUS_COUNT_CAPPED = 1
STATUS_WORK_CAPPED = 2

philox4 = backend.philox4
brw_explore = backend.brw_explore
brw_explore_windows = backend.brw_explore_windows
bbm_line = backend.bbm_line
bbm_population = backend.bbm_population
