"""numba switch.

Set ``FANSUB_DISABLE_NUMBA=1`` to force the pure-numpy code paths (also used
automatically when numba is not importable).
"""

import os

USING_NUMBA = False
if os.environ.get("FANSUB_DISABLE_NUMBA", "0") not in ("1", "true", "yes"):
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover
        pass

if not USING_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def deco(fn):
            return fn

        return deco
