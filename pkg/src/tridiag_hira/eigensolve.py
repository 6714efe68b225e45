"""Eigenvalue bisection and the inverse-power baseline solver."""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NumericalError
from .matrix import TridiagMatrix, eigen_bounds, sturm_count

__all__ = [
    "InversePowerTrace",
    "sturm_bisect",
    "eigenvalue_index_near",
    "shifted_solve",
    "inverse_power",
]

_EPS = sys.float_info.epsilon  # 2^-52
MIN_BISECT_TOL = 4.0 * _EPS


def sturm_bisect(M: TridiagMatrix, k: int, tol: float = MIN_BISECT_TOL) -> float:
    """k-th smallest eigenvalue by bisection on the sign-agreement count.

    The returned value sits at the top of the final bracket, so it is
    within tol*|lambda_k| above the eigenvalue and never below by more
    than the bracket width.
    """
    if tol < MIN_BISECT_TOL:
        raise ValueError(f"tolerance {tol} below 4 ulp = {MIN_BISECT_TOL}")
    n = M.n
    lo, hi = eigen_bounds(M, k)
    # invariant: count(lo) >= n-k+1 > count(hi), i.e. lambda_k in (lo, hi]
    want = n - k + 1
    for _ in range(200):
        if hi - lo <= tol * abs(hi):
            return hi
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return hi
        if sturm_count(M, mid).agreements >= want:
            lo = mid
        else:
            hi = mid
    raise ConsistencyError(
        f"bisection failed to converge in 200 iterations (k={k}); "
        "bracket or counts are contaminated"
    )


def eigenvalue_index_near(M: TridiagMatrix, value: float, tol: float = MIN_BISECT_TOL) -> int:
    """Index k (1-based, ascending) of the eigenvalue nearest to value."""
    n = M.n
    below = n - sturm_count(M, value).agreements  # eigenvalues <= value
    if below == 0:
        return 1
    if below == n:
        return n
    lam_lo = sturm_bisect(M, below, tol)
    lam_hi = sturm_bisect(M, below + 1, tol)
    return below if abs(value - lam_lo) <= abs(lam_hi - value) else below + 1


def shifted_solve(M: TridiagMatrix, sigma: float, rhs) -> np.ndarray:
    """Solve (sigma I - M) w = rhs by pivoted tridiagonal elimination.

    Partial pivoting introduces one extra superdiagonal of fill-in, so
    the factorization stays O(n) time and workspace.
    """
    n = M.n
    r = np.array(rhs, dtype=np.float64)
    if r.shape != (n,):
        raise ValueError(f"rhs shape {r.shape} does not match n={n}")
    diag = M.diagonal()
    b = [sigma - a for a in diag]  # main diagonal of sigma*I - M
    if n == 1:
        if b[0] == 0.0:
            raise NumericalError("singular shifted system (zero pivot)")
        return np.array([r[0] / b[0]])
    c = [-1.0] * (n - 1)  # first superdiagonal
    d = [0.0] * max(n - 2, 0)  # fill-in second superdiagonal
    w = r.tolist()
    for i in range(n - 1):
        # subdiagonal entry of row i+1 in column i is -1 until eliminated
        sub = -1.0
        if abs(sub) > abs(b[i]):
            b[i], sub = sub, b[i]
            c[i], b[i + 1] = b[i + 1], c[i]
            if i < n - 2:
                d[i], c[i + 1] = c[i + 1], d[i]
            w[i], w[i + 1] = w[i + 1], w[i]
        if b[i] == 0.0:
            raise NumericalError("singular shifted system (zero pivot)")
        m = sub / b[i]
        b[i + 1] -= m * c[i]
        if i < n - 2:
            c[i + 1] -= m * d[i]
        w[i + 1] -= m * w[i]
    if b[n - 1] == 0.0:
        raise NumericalError("singular shifted system (zero pivot)")
    w[n - 1] /= b[n - 1]
    w[n - 2] = (w[n - 2] - c[n - 2] * w[n - 1]) / b[n - 2]
    for i in range(n - 3, -1, -1):
        w[i] = (w[i] - c[i] * w[i + 1] - d[i] * w[i + 2]) / b[i]
    return np.array(w)


@dataclass(frozen=True, eq=False)
class InversePowerTrace:
    eta: tuple[float, ...]
    iterations: int
    converged: bool
    Y: np.ndarray


def inverse_power(
    M: TridiagMatrix,
    lambda0: float,
    max_iters: int = 30,
    stop_tol: float = 0.0,
    seed: int = 0,
) -> tuple[float, InversePowerTrace]:
    """Inverse power iteration with the fixed shift lambda0.

    Each step solves (lambda0 I - M) v_hat = v and tracks the ratio
    eta_j = v_hat(i)/v(i) at the max-magnitude coordinate i of v, an
    estimate of 1/(lambda0 - lambda); the refined eigenvalue is
    lambda0 - 1/eta.  The start vector is a seeded pseudo-random unit
    vector, so identical inputs give bit-identical traces.  With
    stop_tol = 0 the loop always runs max_iters iterations.
    """
    n = M.n
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    etas: list[float] = []
    converged = False
    for _ in range(max_iters):
        v_hat = shifted_solve(M, lambda0, v)
        if not np.all(np.isfinite(v_hat)):
            raise NumericalError("inverse power breakdown: non-finite solve output")
        i = int(np.argmax(np.abs(v)))
        etas.append(float(v_hat[i] / v[i]))
        v = v_hat / np.linalg.norm(v_hat)
        if (
            stop_tol > 0.0
            and len(etas) >= 2
            and abs(etas[-1] - etas[-2]) <= stop_tol * abs(etas[-1])
        ):
            converged = True
            break
    if len(etas) >= 2 and abs(etas[-1] - etas[-2]) <= stop_tol * abs(etas[-1]):
        converged = True
    if v[0] < 0.0:
        v = -v
    if etas[-1] == 0.0:
        raise NumericalError("inverse power breakdown: zero eigenvalue ratio")
    lam = lambda0 - 1.0 / etas[-1]
    trace = InversePowerTrace(
        eta=tuple(etas), iterations=len(etas), converged=converged, Y=v
    )
    return lam, trace
