"""Numpy fallback for the compiled kernels.

All reductions accumulate strictly left to right (via cumsum, whose
intermediate roundings match a scalar loop), so results are bit-identical
to the Cython backend in ``_core.pyx``. Keep the two files in sync.
"""

import numpy as np

BACKEND_NAME = "python"


def affine_forward(weights, bias, x):
    """W x + b with left-to-right accumulation over columns."""
    prod = weights * x
    return np.cumsum(prod, axis=1)[:, -1] + bias


def affine_forward_batch(weights, bias, xs):
    """Row-batched affine map: returns shape (len(xs), rows)."""
    prod = weights[np.newaxis, :, :] * xs[:, np.newaxis, :]
    return np.cumsum(prod, axis=2)[:, :, -1] + bias


def matvec_transpose(weights, delta):
    """W^T delta with top-to-bottom accumulation over rows."""
    prod = weights * delta[:, np.newaxis]
    return np.cumsum(prod, axis=0)[-1, :]


def dot(a, b):
    """Left-to-right dot product."""
    return float(np.cumsum(a * b)[-1])


def ordered_sum(v):
    """Left-to-right sum."""
    return float(np.cumsum(v)[-1])
