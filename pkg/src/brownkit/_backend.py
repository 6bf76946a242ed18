"""Kernel backend selection.

The compiled extension is used when importable. Setting
``BROWNKIT_BACKEND=python`` forces the numpy fallback; both produce
bit-identical paths.
"""

import os

core = None
if os.environ.get("BROWNKIT_BACKEND", "").lower() != "python":
    try:
        from brownkit import _core as core
    except ImportError:  # extension not built
        core = None
if core is None:
    from brownkit import _pycore as core

BACKEND = core.BACKEND
