"""Backend contract: the compiled core and the numpy fallback agree bit
for bit, because both accumulate strictly left to right."""

import numpy as np
import pytest

from cfxkit import kernels
from cfxkit.kernels import _fallback

_core = pytest.importorskip(
    "cfxkit.kernels._core", reason="compiled kernel core not built"
)

BACKENDS = (_core, _fallback)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(1, 20))
    cols = int(rng.integers(1, 20))
    w = rng.normal(size=(rows, cols))
    b = rng.normal(size=rows)
    x = rng.normal(size=cols)
    xs = rng.normal(size=(int(rng.integers(1, 15)), cols))
    d = rng.normal(size=rows)
    return w, b, x, xs, d


@pytest.mark.parametrize("seed", range(25))
def test_backends_bit_identical(seed):
    w, b, x, xs, d = _random_case(seed)
    assert np.array_equal(_core.affine_forward(w, b, x),
                          _fallback.affine_forward(w, b, x))
    assert np.array_equal(_core.affine_forward_batch(w, b, xs),
                          _fallback.affine_forward_batch(w, b, xs))
    assert np.array_equal(_core.matvec_transpose(w, d),
                          _fallback.matvec_transpose(w, d))
    assert _core.dot(x, x) == _fallback.dot(x, x)
    assert _core.ordered_sum(b) == _fallback.ordered_sum(b)


def test_accepts_read_only_arrays():
    w, b, x, xs, d = _random_case(99)
    for arr in (w, b, x, xs, d):
        arr.flags.writeable = False
    for mod in BACKENDS:
        mod.affine_forward(w, b, x)
        mod.affine_forward_batch(w, b, xs)
        mod.matvec_transpose(w, d)
        mod.dot(x, x)
        mod.ordered_sum(b)


def test_left_to_right_order_is_pinned():
    # 1e16 + 1 - 1e16 == 0 under left-to-right float64 accumulation;
    # any reordering (pairwise, right-to-left) would give 1.0
    v = np.array([1e16, 1.0, -1e16])
    for mod in BACKENDS:
        assert mod.ordered_sum(v) == 0.0
        assert mod.dot(v, np.ones(3)) == 0.0
    w = v[np.newaxis, :].copy()
    for mod in BACKENDS:
        assert mod.affine_forward(w, np.zeros(1), np.ones(3))[0] == 0.0


def test_set_backend_rebinds():
    original = kernels.BACKEND
    try:
        kernels.set_backend("python")
        assert kernels.BACKEND == "python"
        assert kernels.affine_forward is _fallback.affine_forward
        kernels.set_backend("compiled")
        assert kernels.affine_forward is _core.affine_forward
    finally:
        kernels.set_backend(original)
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_batch_matches_single_rows():
    w, b, _, xs, _ = _random_case(7)
    for mod in BACKENDS:
        batch = mod.affine_forward_batch(w, b, xs)
        for i in range(xs.shape[0]):
            assert np.array_equal(batch[i], mod.affine_forward(w, b, xs[i].copy()))
