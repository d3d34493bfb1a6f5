"""Independent reference computations used as test oracles.

Kept deliberately naive: plain Python loops, no shared code with the package.
"""

import math


def gauss_solve(a, b):
    """Solve a x = b by Gaussian elimination with partial pivoting."""
    n = len(a)
    m = [list(map(float, row)) + [float(v)] for row, v in zip(a, b)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(m[r][c]))
        m[c], m[piv] = m[piv], m[c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for j in range(c, n + 1):
                m[r][j] -= f * m[c][j]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        x[i] = (m[i][n] - sum(m[i][j] * x[j] for j in range(i + 1, n))) / m[i][i]
    return x


def normal_equations(rows, y, intercept=True):
    """Coefficients from (X^T X)^-1 X^T y; intercept first when requested."""
    design = [([1.0] if intercept else []) + list(map(float, r)) for r in rows]
    p = len(design[0])
    xtx = [[sum(d[i] * d[j] for d in design) for j in range(p)] for i in range(p)]
    xty = [sum(d[i] * v for d, v in zip(design, y)) for i in range(p)]
    return gauss_solve(xtx, xty)


def window_means(timestamps, values, window_seconds):
    """Brute-force mean of values per epoch-aligned window."""
    buckets = {}
    for t, v in zip(timestamps, values):
        key = int(t.timestamp()) // window_seconds
        buckets.setdefault(key, []).append(v)
    return {k: math.fsum(vs) / len(vs) for k, vs in sorted(buckets.items())}


def window_max(keys, values):
    out = {}
    for k, v in zip(keys, values):
        out[k] = v if k not in out else max(out[k], v)
    return dict(sorted(out.items()))
