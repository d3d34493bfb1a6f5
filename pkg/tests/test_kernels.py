import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from capplan import _kernels
from capplan._kernels import _pykernels

BACKENDS = _kernels.available_backends()


def test_compiled_backend_built():
    # the extension is part of the normal install; its absence is a build problem
    assert "cython" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_qr_reduce_reconstructs_least_squares(name):
    rng = np.random.default_rng(3)
    a = rng.normal(size=(40, 5))
    y = rng.normal(size=40)
    r, z, tail = BACKENDS[name].qr_reduce(a, y)
    assert np.allclose(np.tril(r, -1), 0.0)
    beta = np.linalg.solve(r, z)
    ref, rss, *_ = np.linalg.lstsq(a, y, rcond=None)
    assert np.allclose(beta, ref, atol=1e-10)
    assert tail == pytest.approx(rss[0], rel=1e-10)
    # R^T R equals A^T A
    assert np.allclose(r.T @ r, a.T @ a, atol=1e-9)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("magnitude", [1e-155, 1e-300, 1e150])
def test_qr_reduce_extreme_magnitudes(name, magnitude):
    # squaring entries this size under- or overflows; the factor must not
    rng = np.random.default_rng(5)
    base = rng.normal(size=(12, 3))
    r, _, _ = BACKENDS[name].qr_reduce(base * magnitude, np.zeros(12))
    r_unit, _, _ = BACKENDS[name].qr_reduce(base, np.zeros(12))
    assert np.all(np.isfinite(r))
    assert np.allclose(r / magnitude, r_unit, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_qr_reduce_leaves_inputs_untouched(name):
    a = np.arange(12, dtype=float).reshape(4, 3) + np.eye(4, 3)
    y = np.ones(4)
    a0, y0 = a.copy(), y.copy()
    BACKENDS[name].qr_reduce(a, y)
    assert np.array_equal(a, a0) and np.array_equal(y, y0)


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, 12, elements=st.floats(-1e3, 1e3)),
)
def test_backends_agree_on_qr(a, y):
    if "cython" not in BACKENDS:
        pytest.skip("compiled backend not built")
    r1, z1, t1 = BACKENDS["python"].qr_reduce(a, y)
    r2, z2, t2 = BACKENDS["cython"].qr_reduce(a, y)
    scale = max(1.0, np.abs(a).max(), np.abs(y).max())
    tol = 1e-9 * scale * 12
    # invariants hold whatever the rank: R^T R = A^T A and |z|^2 + tail = |y|^2
    for r, z, t in ((r1, z1, t1), (r2, z2, t2)):
        assert np.allclose(r.T @ r, a.T @ a, atol=tol * scale)
        assert z @ z + t == pytest.approx(y @ y, abs=tol * scale)
    # QR is unique only up to row signs, and a pivot that is rounding noise can
    # flip the reflector either way; compare with diag(R) made non-negative,
    # and only where the design is well conditioned enough for that to be unique
    if np.linalg.cond(a) < 1e6:
        d1 = np.where(np.diag(r1) < 0, -1.0, 1.0)
        d2 = np.where(np.diag(r2) < 0, -1.0, 1.0)
        assert np.allclose(d1[:, None] * r1, d2[:, None] * r2, atol=tol)
        assert np.allclose(d1 * z1, d2 * z2, atol=tol)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.floats(-1e6, 1e6)), min_size=1, max_size=60))
def test_group_kernels_match_dict_reduction(pairs):
    pairs.sort(key=lambda p: p[0])
    ids = np.array([p[0] for p in pairs], dtype=np.int64)
    vals = np.array([p[1] for p in pairs])
    expect_max, expect_n = {}, {}
    for k, v in pairs:
        expect_max[k] = max(expect_max.get(k, v), v)
        expect_n[k] = expect_n.get(k, 0) + 1
    for mod in BACKENDS.values():
        uids, maxes = mod.group_max(ids, vals)
        assert dict(zip(uids.tolist(), maxes.tolist())) == expect_max
        uids, sums, counts = mod.group_sum_count(ids, vals[:, None])
        assert dict(zip(uids.tolist(), counts.tolist())) == expect_n
        for g, s in zip(uids, sums[:, 0]):
            assert s == pytest.approx(sum(v for k, v in pairs if k == g), abs=1e-6)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_group_kernels_reject_unsorted(name):
    with pytest.raises(ValueError):
        BACKENDS[name].group_max(np.array([2, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        BACKENDS[name].group_sum_count(np.array([2, 1]), np.ones((2, 1)))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_group_kernels_empty(name):
    uids, sums, counts = BACKENDS[name].group_sum_count(np.zeros(0, np.int64), np.zeros((0, 2)))
    assert uids.size == 0 and sums.shape == (0, 2) and counts.size == 0


def test_env_var_forces_fallback(monkeypatch):
    import importlib

    monkeypatch.setenv("CAPPLAN_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.qr_reduce is _pykernels.qr_reduce
    finally:
        monkeypatch.delenv("CAPPLAN_PURE_PYTHON")
        importlib.reload(_kernels)
