"""Selects the compiled series kernel, falling back to numpy.

Import `block_pot` from here; `BACKEND` says which implementation is live.
Set GAPFIELD_NO_EXT=1 in the environment to force the numpy fallback
(used by the benchmark and by tests that compare the two backends).
"""

import os

if os.environ.get("GAPFIELD_NO_EXT"):
    from ._potkernel_np import BACKEND, block_pot
else:
    try:
        from ._potkernel import BACKEND, block_pot
    except ImportError:
        from ._potkernel_np import BACKEND, block_pot

__all__ = ["block_pot", "BACKEND"]
