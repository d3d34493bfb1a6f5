"""Reference implementations of the numeric kernels in numpy.

These are used when the compiled extension is unavailable, and serve as the
cross-check for it in the test suite.
"""

import math

import numpy as np


def qr_reduce(a, y):
    """Householder-reduce ``a`` (n x p) and apply the same reflections to ``y``.

    Returns ``(r, z, tail)`` where ``r`` is the p x p upper triangle, ``z`` the
    first p entries of Q^T y and ``tail`` the squared norm of the remaining
    n - p entries (the residual sum of squares of the least-squares problem).
    """
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    y = np.array(y, dtype=np.float64, copy=True)
    n, p = a.shape
    for j in range(min(n, p)):
        # build the reflector from the column scaled to max |x| = 1, so its
        # squared norm can neither underflow nor overflow
        scale = float(np.max(np.abs(a[j:, j])))
        if scale == 0.0:
            continue
        v = a[j:, j] / scale
        normv = math.sqrt(float(v @ v))
        v[0] -= -normv if v[0] >= 0.0 else normv  # a zero pivot counts as positive
        vv = float(v @ v)
        beta = 2.0 / vv
        a[j:, j:] -= np.outer(v, beta * (v @ a[j:, j:]))
        y[j:] -= v * (beta * float(v @ y[j:]))
    r = np.triu(a[:p, :p]) if n >= p else np.triu(a)
    z = y[:p].copy()
    tail = float(y[p:] @ y[p:]) if n > p else 0.0
    return r, z, tail


def _run_starts(ids):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        return ids, np.zeros(0, dtype=np.int64)
    if np.any(np.diff(ids) < 0):
        raise ValueError("group ids must be sorted")
    starts = np.flatnonzero(np.r_[True, ids[1:] != ids[:-1]])
    return ids[starts], starts


def group_sum_count(ids, values):
    """Sum rows of ``values`` (n x m) over runs of equal sorted ``ids``."""
    values = np.asarray(values, dtype=np.float64)
    uids, starts = _run_starts(ids)
    if uids.size == 0:
        return uids, np.zeros((0, values.shape[1])), np.zeros(0, dtype=np.int64)
    sums = np.add.reduceat(values, starts, axis=0)
    counts = np.diff(np.r_[starts, len(ids)]).astype(np.int64)
    return uids, sums, counts


def group_max(ids, values):
    """Maximum of ``values`` (length n) over runs of equal sorted ``ids``."""
    values = np.asarray(values, dtype=np.float64)
    uids, starts = _run_starts(ids)
    if uids.size == 0:
        return uids, np.zeros(0)
    return uids, np.maximum.reduceat(values, starts)
