"""Bessel functions of the first kind at real positive argument.

Two independent routes compute J_0(x)..J_n(x):

``bessel_backward``
    The classical downward three-term recurrence
    Jt_{k-1} = (2k/x) Jt_k - Jt_{k+1}, seeded with (1, 0) at orders
    (N, N+1) for a start order N above both n and x, normalized by
    d = sqrt(Jt_0^2 + 2 sum_{k=1..N} Jt_k^2).  The square-sum identity
    J_0^2 + 2 sum_{k>=1} J_k^2 = 1 makes the quotients Jt_k/d converge
    to J_k(x) as N grows.  The raw sequence grows roughly like
    1/J_N(x), which outgrows binary64 once N is far above x, so the
    running pair is kept as mantissas with a shared power-of-two
    shift, exactly like the growth recurrences of the eigenvector
    solver.

``bessel_via_hira``
    The (2N+1)-dimensional tridiagonal matrix with unit off-diagonals
    and diagonal entries 2 + 2j/x has 2 + 2(N+1)/x as an eigenvalue:
    the map j -> 2N+2-j with alternating signs sends eigenvalue mu to
    2 lambda - mu, and the odd dimension forces a fixed point at the
    middle diagonal entry.  The matching unit eigenvector with
    positive first coordinate holds the normalized Jt values, order k
    at 1-based index N+1-k; the half below the middle repeats the
    positive orders with alternating signs.  Reading 1-based indices
    N+1 down to N+1-n therefore yields J_0(x)..J_n(x) with their true
    signs and no correction factor.

Negative orders are redundant, J_{-k}(x) = (-1)^k J_k(x), and are
exposed only through that fold (``BesselRun.order``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .hira import (
    _BAND_EXP,
    _BAND_HI,
    _BAND_LO,
    _s_add,
    _s_float,
    _s_from,
    _s_mul,
    _s_norm,
    _s_sqrt,
    hira_eigenvector,
)
from .matrix import TridiagMatrix, bessel_profile

__all__ = [
    "BesselRun",
    "bessel_backward",
    "bessel_via_hira",
    "choose_N",
]


@dataclass(frozen=True)
class BesselRun:
    """J_0(x)..J_n(x) plus the provenance of the run.

    ``values[k]`` approximates J_k(x).  ``normalizer`` is the
    square-sum normalizer d of the raw downward recurrence (for the
    eigenvector route, the eigenvector normalizer, which plays the
    same role); it overflows to inf when the raw sequence outgrew
    binary64, but the values themselves are assembled from
    mantissa/shift pairs and stay correct regardless.
    """

    x: float
    n: int
    N: int
    values: np.ndarray
    normalizer: float
    method: str

    def order(self, k: int) -> float:
        """J_k(x) for -n <= k <= n; negative orders via the parity fold."""
        a = abs(k)
        if a > self.n:
            raise DomainError(
                f"order {k} outside the computed range -{self.n}..{self.n}")
        v = float(self.values[a])
        if k < 0 and a % 2 == 1:
            return -v
        return v


def _check_args(x: float, n: int, N: int) -> None:
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"argument x={x} must be a positive finite real")
    if n < 0:
        raise DomainError(f"order n={n} must be nonnegative")
    if not (N > n and N > x):
        raise DomainError(
            f"start order N={N} must exceed both the order n={n} "
            f"and the argument x={x}")


def bessel_backward(x: float, n: int, N: int) -> BesselRun:
    """J_0(x)..J_n(x) by the downward recurrence from start order N.

    Downward is the stable direction above the turning-point order
    (about x): each step damps the unwanted second solution, so the
    arbitrariness of the (1, 0) seed washes out long before the
    recurrence reaches order n, provided N has some margin above
    max(n, x) (``choose_N`` picks one and verifies it).
    """
    _check_args(x, n, N)
    nxt = 0.0  # Jt_{k+1} mantissa at the shared shift
    cur = 1.0  # Jt_k mantissa; k = N on entry
    sh = 0
    acc = _s_norm(1.0, 0)  # sum of Jt_k^2 over k = N, N-1, ... so far
    out_m = [0.0] * (n + 1)
    out_s = [0] * (n + 1)
    for k in range(N, 0, -1):
        cur, nxt = (2.0 * k / x) * cur - nxt, cur
        if abs(cur) >= _BAND_HI:
            cur = math.ldexp(cur, -_BAND_EXP)
            nxt = math.ldexp(nxt, -_BAND_EXP)
            sh += _BAND_EXP
        elif 0.0 < max(abs(cur), abs(nxt)) <= _BAND_LO:
            cur = math.ldexp(cur, _BAND_EXP)
            nxt = math.ldexp(nxt, _BAND_EXP)
            sh -= _BAND_EXP
        # cur now holds Jt_{k-1}.
        if k > 1:
            acc = _s_add(acc, _s_norm(cur * cur, 2 * sh))
        if k - 1 <= n:
            out_m[k - 1] = cur
            out_s[k - 1] = sh
    d2 = _s_add(_s_norm(cur * cur, 2 * sh), _s_mul(_s_from(2.0), acc))
    d = _s_sqrt(d2)
    values = np.array([math.ldexp(m / d.mantissa, s - d.shift)
                       for m, s in zip(out_m, out_s)])
    try:
        normalizer = _s_float(d)
    except OverflowError:
        normalizer = math.inf
    return BesselRun(x=float(x), n=int(n), N=int(N), values=values,
                     normalizer=normalizer, method="backward")


def bessel_via_hira(x: float, n: int, N: int) -> BesselRun:
    """J_0(x)..J_n(x) read out of a tridiagonal unit eigenvector.

    Builds the (2N+1)-dimensional matrix with diagonal 2 + 2j/x and
    asks the eigenvector solver for the eigenvalue 2 + 2(N+1)/x,
    computed with the same expression shape as the profile so it is
    bit-equal to the middle diagonal entry.  The solver's
    positive-first-coordinate convention matches J_N(x) > 0
    (guaranteed by N > x), so no sign fixup is needed.  For small x
    the oscillatory middle of the region layout is too narrow and the
    solver falls back to its plain two-sided recurrence; the values
    read off are valid either way.
    """
    _check_args(x, n, N)
    M = TridiagMatrix(bessel_profile(x, N))
    lam = 2.0 + 2.0 * (N + 1) / x
    res = hira_eigenvector(M, lam)
    values = np.ascontiguousarray(res.X[N - n:N + 1][::-1])
    return BesselRun(x=float(x), n=int(n), N=int(N), values=values,
                     normalizer=res.d, method="hira")


_DOUBLING_STEP = 20
_DOUBLING_DIGITS = 13
_MAX_BUMPS = 200


def _columns_agree(a: np.ndarray, b: np.ndarray, digits: int) -> bool:
    """Agreement to the given decimal digits at the local envelope scale.

    Each difference |a_k - b_k| is compared against the largest
    magnitude among coordinates k-1, k, k+1 of both runs.  The
    widened scale matters at interior near-zeros of the oscillation:
    there both runs carry roundoff of the size of the neighboring
    amplitude, so a plain per-coordinate comparison saturates around
    12 digits no matter how large the start order is, while a
    too-small start order produces truncation error proportional to
    the same neighboring amplitude and is still caught.  Coordinate
    pairs whose envelope sits at the bottom of the binary64 range
    (below 1e-305) count as agreeing; relative comparison stops being
    meaningful next to the subnormal range.
    """
    tol = 10.0 ** (-digits)
    last = len(a) - 1
    for k, (va, vb) in enumerate(zip(a, b)):
        lo, hi = max(0, k - 1), min(last, k + 1) + 1
        scale = max(np.max(np.abs(a[lo:hi])), np.max(np.abs(b[lo:hi])))
        if scale < 1e-305:
            continue
        if abs(va - vb) > tol * scale:
            return False
    return True


def choose_N(x: float, n: int) -> int:
    """A start order high enough that J_0..J_n have settled.

    The base formula adds a cushion above max(n, ceil(x)) that grows
    like x^(1/3), the scale on which the turning-point transition
    widens.  The result is accepted only after a doubling check: runs
    at N and N + 20 must agree to 13 digits on every requested order,
    else N is bumped by 20 and the check repeats.
    """
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"argument x={x} must be a positive finite real")
    if n < 0:
        raise DomainError(f"order n={n} must be nonnegative")
    N = max(n, math.ceil(x)) + max(15, math.ceil(1.9 * x ** (1.0 / 3.0)) + 50)
    for _ in range(_MAX_BUMPS):
        here = bessel_backward(x, n, N).values
        above = bessel_backward(x, n, N + _DOUBLING_STEP).values
        if _columns_agree(here, above, _DOUBLING_DIGITS):
            return N
        N += _DOUBLING_STEP
    raise NumericalError(
        f"start order did not stabilize after {_MAX_BUMPS} increases "
        f"(x={x}, n={n}, reached N={N})")
