"""Kernel backend dispatch.

The compiled Cython core is used when present; otherwise the numpy
fallback. Both produce bit-identical results (same accumulation order,
same elementwise semantics), so the choice only affects speed. Callers
access kernels as ``kernels.affine_forward(...)`` (attribute lookup at
call time) so ``set_backend`` can rebind for tests and benchmarks.

Set CFXKIT_BACKEND=python to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built; fallback only
    _core = None

_BACKENDS = {"python": _fallback}
if _core is not None:
    _BACKENDS["compiled"] = _core

BACKEND = "python"
affine_forward = _fallback.affine_forward
affine_forward_batch = _fallback.affine_forward_batch
matvec_transpose = _fallback.matvec_transpose
dot = _fallback.dot
ordered_sum = _fallback.ordered_sum


def available_backends():
    return tuple(sorted(_BACKENDS))


def set_backend(name):
    """Select the kernel backend by name ('python' or 'compiled')."""
    global BACKEND, affine_forward, affine_forward_batch
    global matvec_transpose, dot, ordered_sum
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        )
    mod = _BACKENDS[name]
    BACKEND = name
    affine_forward = mod.affine_forward
    affine_forward_batch = mod.affine_forward_batch
    matvec_transpose = mod.matvec_transpose
    dot = mod.dot
    ordered_sum = mod.ordered_sum


_requested = os.environ.get("CFXKIT_BACKEND")
if _requested:
    set_backend(_requested)
elif _core is not None:
    set_backend("compiled")
