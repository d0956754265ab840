"""Periodic (cyclic) tridiagonal solves.

The cyclic system is reduced to two ordinary tridiagonal solves with a
Sherman-Morrison rank-one correction; the tridiagonal factorisation itself
is LAPACK's ``gtsv``.
"""

import numpy as np
from scipy.linalg.lapack import dgtsv

from .errors import SingularSystemError

PIVOT_TOL = 1e-14


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a non-periodic tridiagonal system.

    ``lower`` and ``upper`` have length ``n - 1``; ``rhs`` is ``(n,)`` or
    ``(n, k)``.
    """
    b = np.asarray(rhs, dtype=float)
    squeeze = b.ndim == 1
    if squeeze:
        b = b[:, None]
    _, _, _, x, info = dgtsv(np.asarray(lower, dtype=float), np.asarray(diag, dtype=float),
                             np.asarray(upper, dtype=float), b)
    if info != 0:
        raise SingularSystemError(f"tridiagonal solve failed (LAPACK info={info})")
    return x[:, 0] if squeeze else x


def solve_cyclic(lower, diag, upper, rhs):
    """Solve the periodic tridiagonal system ``A x = rhs``.

    Row ``i`` of ``A`` reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]``
    with indices taken mod ``n``, so ``lower[0]`` and ``upper[-1]`` are the
    wrap-around corners.  All three coefficient arrays have length ``n``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = len(diag)
    if n < 3:
        raise SingularSystemError("cyclic system needs at least 3 unknowns")

    corner_top = float(lower[0])      # A[0, n-1]
    corner_bottom = float(upper[-1])  # A[n-1, 0]
    d = np.array(diag, dtype=float)
    gamma = -float(d[0])
    if abs(gamma) < PIVOT_TOL:
        raise SingularSystemError("zero leading diagonal in cyclic system")
    ratio = corner_top / gamma
    d[0] -= gamma
    d[-1] -= corner_bottom * ratio

    both = np.zeros((n, 2))
    both[:, 0] = rhs
    both[0, 1] = gamma
    both[-1, 1] = corner_bottom
    _, _, _, sol, info = dgtsv(lower[1:], d, upper[:-1], both, overwrite_b=1)
    if info != 0:
        raise SingularSystemError(f"tridiagonal solve failed (LAPACK info={info})")
    y, z = sol[:, 0], sol[:, 1]

    # v = e_0 + (corner_top / gamma) e_{n-1}
    denom = 1.0 + float(z[0]) + ratio * float(z[-1])
    if abs(denom) < PIVOT_TOL:
        raise SingularSystemError("Sherman-Morrison denominator vanished")
    return y - ((float(y[0]) + ratio * float(y[-1])) / denom) * z


def cyclic_matrix(lower, diag, upper):
    """Dense form of the cyclic system; used for testing."""
    n = len(diag)
    A = np.diag(np.asarray(diag, dtype=float))
    for i in range(n):
        A[i, (i - 1) % n] += lower[i]
        A[i, (i + 1) % n] += upper[i]
    return A
