"""Extended-precision reference runs for eigenvector and Bessel evaluation.

Everything here reruns a binary64 code path in double-double arithmetic
(about 31 significant digits) so that tests and the benchmark harness can
measure *relative* errors of coordinates far below machine precision.
The matrix diagonal and the eigenvalue are promoted to double-double
exactly, so a reference run answers "what does this exact binary64
problem evaluate to" -- the right baseline for judging the binary64
implementations at identical inputs.

Two independent reruns exist for the eigenvector:

* ``dd_coordinates_simplified`` -- the plain two-sided recurrence glued
  at the turning index (cheap; the production reference), and
* ``dd_coordinates_staged`` -- the full staged pipeline with complex
  rotation coefficients carried across the oscillatory region.

``reference_eigenvector`` runs the first and, unless told otherwise,
cross-validates it against the second to 25 significant digits before
handing it out.  The staged rerun also evaluates the radius identity
4(|z|^2 + cos(t)·Re(z^2 e^{it})) = x_j^2 + x_{j+1}^2 at every sweep
position and records the worst relative residual.

The reruns do not rescale: any intermediate leaving [1e-150, 1e150] in
magnitude raises ``NumericalError``.  That range covers every supported
benchmark; refusing keeps the oracle simple enough to audit.

Angles are recomputed here in double-double: arccos(x) as
atan2(sqrt((1-x)(1+x)), x) on top of the dd sqrt and the
argument-reduced arctangent series of the arithmetic layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .ddreal import (
    DD_ONE,
    DD_ZERO,
    DDReal,
    dd,
    dd_abs,
    dd_acos,
    dd_add,
    dd_compare,
    dd_cos,
    dd_div,
    dd_div_f,
    dd_mul,
    dd_mul_f,
    dd_neg,
    dd_sin,
    dd_sqr,
    dd_sqrt,
    dd_sub,
    dd_sum,
)
from .errors import ConsistencyError, DomainError, NumericalError
from .hira import RegionPartition, classify_regions
from .matrix import TridiagMatrix

__all__ = [
    "DDComplex",
    "ReferenceRun",
    "dd_coordinates_simplified",
    "dd_coordinates_staged",
    "reference_eigenvector",
    "relative_errors",
    "absolute_errors",
    "agreement_digits",
    "bessel_series_dd",
    "bessel_backward_dd",
]

_RANGE_LIMIT = 1e150
# Cross-route agreement demanded of the two extended-precision reruns.
ROUTE_AGREEMENT_TOL = 1e-25


# ---------------------------------------------------------------------------
# complex double-double helpers

class DDComplex(NamedTuple):
    """A complex number with double-double real and imaginary parts."""

    re: DDReal
    im: DDReal


def _c_mul(a: DDComplex, b: DDComplex) -> DDComplex:
    return DDComplex(
        dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im)),
        dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re)),
    )


def _c_sqr(a: DDComplex) -> DDComplex:
    return DDComplex(
        dd_sub(dd_sqr(a.re), dd_sqr(a.im)),
        dd_mul_f(dd_mul(a.re, a.im), 2.0),
    )


def _c_abs2(a: DDComplex) -> DDReal:
    return dd_add(dd_sqr(a.re), dd_sqr(a.im))


def _is_zero(a: DDReal) -> bool:
    return a.hi == 0.0 and a.lo == 0.0


def _guard(v: DDReal, what: str) -> None:
    if not math.isfinite(v.hi) or abs(v.hi) > _RANGE_LIMIT:
        raise NumericalError(
            f"{what}: extended-precision rerun left the supported range "
            "(|value| > 1e150); the reference oracle does not rescale")


# ---------------------------------------------------------------------------
# recurrences in double-double

def _dd_forward(ddA: Sequence[DDReal], lam_dd: DDReal, stop: int) -> list[DDReal]:
    """Coordinates x_1..x_stop with x_1 = 1, by the forward recurrence."""
    xs = [DD_ONE]
    if stop == 1:
        return xs
    prev = DD_ONE
    cur = dd_sub(lam_dd, ddA[0])
    xs.append(cur)
    for j in range(2, stop):
        co = dd_sub(lam_dd, ddA[j - 1])
        nxt = dd_sub(dd_mul(co, cur), prev)
        _guard(nxt, "forward rerun")
        prev, cur = cur, nxt
        xs.append(cur)
    return xs


def _dd_backward(ddA: Sequence[DDReal], lam_dd: DDReal, stop: int, n: int,
                 flip_index: int | None = None) -> list[DDReal]:
    """Coordinates xhat_stop..xhat_n with xhat_n = 1, backward recurrence.

    With ``flip_index`` given, all signs are flipped if the coordinate at
    that matrix index came out negative.
    """
    rxs = [DD_ONE]
    if stop < n:
        prev = DD_ONE
        cur = dd_sub(lam_dd, ddA[n - 1])
        rxs.append(cur)
        for j in range(n - 1, stop, -1):
            co = dd_sub(lam_dd, ddA[j - 1])
            nxt = dd_sub(dd_mul(co, cur), prev)
            _guard(nxt, "backward rerun")
            prev, cur = cur, nxt
            rxs.append(cur)
    rxs.reverse()
    if flip_index is not None and rxs[flip_index - stop].hi < 0.0:
        rxs = [dd_neg(v) for v in rxs]
    return rxs


def _dd_glue(x_p: DDReal, x_p1: DDReal, xh_p: DDReal, xh_p1: DDReal) -> DDReal:
    """Scale s making s*xhat continue the left coordinates (larger |xhat|
    denominator, mirroring the binary64 rule)."""
    if _is_zero(xh_p) and _is_zero(xh_p1):
        raise ConsistencyError("both overlap coordinates on the xhat side are zero")
    if dd_compare(dd_abs(xh_p), dd_abs(xh_p1)) >= 0:
        s = dd_div(x_p, xh_p)
        if _is_zero(s) and not _is_zero(xh_p1):
            s = dd_div(x_p1, xh_p1)
    else:
        s = dd_div(x_p1, xh_p1)
        if _is_zero(s) and not _is_zero(xh_p):
            s = dd_div(x_p, xh_p)
    if _is_zero(s) or not math.isfinite(s.hi):
        raise ConsistencyError("glue scale of the rerun came out zero or non-finite")
    return s


# ---------------------------------------------------------------------------
# oscillatory sweep in double-double

def _dd_alpha_init(x: DDReal, y: DDReal, theta: DDReal) -> DDComplex:
    """Rotation coefficient with 2 Re(z) = x and 2 Re(z e^{i theta}) = y."""
    st = dd_sin(theta)
    if st.hi <= 0.0:
        raise DomainError("rerun angle outside (0, pi); basis is singular")
    re = dd_mul_f(x, 0.5)
    im = dd_div(dd_sub(dd_mul(x, dd_cos(theta)), y), dd_mul_f(st, 2.0))
    return DDComplex(re, im)


def _dd_sweep(angles: Sequence[DDReal], z0: DDComplex,
              cos_diffs: Sequence[DDReal],
              ) -> tuple[list[DDComplex], list[DDReal], list[DDReal]]:
    """Carry the rotation coefficient along the angles; returns
    (coefficients, cosines, sines)."""
    cs = [dd_cos(t) for t in angles]
    ss = [dd_sin(t) for t in angles]
    out = [z0]
    z = z0
    for t in range(len(angles) - 1):
        avg = dd_mul_f(dd_add(angles[t], angles[t + 1]), 0.5)
        ca = dd_cos(avg)
        sa = dd_sin(avg)
        denom = dd_mul(ss[t + 1], sa)
        if denom.hi == 0.0:
            raise NumericalError(f"rerun sweep step {t} has a degenerate angle")
        g = dd_div(cos_diffs[t], denom)
        rot = _c_mul(z, DDComplex(cs[t], ss[t]))
        w = _c_mul(rot, DDComplex(ca, sa))
        z = DDComplex(rot.re, dd_sub(rot.im, dd_mul(g, w.im)))
        _guard(z.re, "sweep rerun")
        _guard(z.im, "sweep rerun")
        out.append(z)
    return out, cs, ss


def _dd_radius_rel(z: DDComplex, ct: DDReal, st: DDReal) -> float:
    """Relative residual of the radius identity at one sweep position:

        4 (|z|^2 + cos t * Re(z^2 e^{it}))  vs  (2 Re z)^2 + (2 Re(z e^{it}))^2.
    """
    zz = _c_sqr(z)
    re_rot = dd_sub(dd_mul(zz.re, ct), dd_mul(zz.im, st))
    lhs = dd_mul_f(dd_add(_c_abs2(z), dd_mul(ct, re_rot)), 4.0)
    x = dd_mul_f(z.re, 2.0)
    y = dd_mul_f(dd_sub(dd_mul(z.re, ct), dd_mul(z.im, st)), 2.0)
    rhs = dd_add(dd_sqr(x), dd_sqr(y))
    if rhs.hi <= 0.0:
        raise ConsistencyError("radius identity undefined: zero coordinate pair")
    return abs(dd_sub(lhs, rhs).hi / rhs.hi)


def _radius_max(zs: Sequence[DDComplex], cs: Sequence[DDReal],
                ss: Sequence[DDReal]) -> float:
    worst = 0.0
    for z, ct, st in zip(zs, cs, ss):
        worst = max(worst, _dd_radius_rel(z, ct, st))
    return worst


# ---------------------------------------------------------------------------
# reference eigenvector runs

@dataclass(frozen=True, eq=False)
class ReferenceRun:
    """A normalized eigenvector computed in double-double.

    ``coordinates`` hold the unit vector (first coordinate positive),
    ``norm`` the normalizer of the underlying x_1 = 1 anchored build, and
    ``glue_scale`` the scale applied to the backward-built half.  The
    radius fields are populated by the staged rerun only; ``validated``
    and ``validation_max_rel`` are filled in by ``reference_eigenvector``
    when the two independent reruns have been compared.
    """

    coordinates: tuple[DDReal, ...]
    norm: DDReal
    glue_scale: DDReal
    partition: RegionPartition
    method: str
    alpha_radius_max_rel: float = float("nan")
    gamma_radius_max_rel: float = float("nan")
    validated: bool = False
    validation_max_rel: float = float("nan")

    def floats(self) -> np.ndarray:
        """The coordinates rounded to binary64."""
        return np.fromiter((c.hi for c in self.coordinates), dtype=float,
                           count=len(self.coordinates))


def _normalize(coords: list[DDReal]) -> tuple[tuple[DDReal, ...], DDReal]:
    d = dd_sqrt(dd_sum(dd_sqr(v) for v in coords))
    if d.hi <= 0.0:
        raise ConsistencyError("rerun produced a zero vector")
    return tuple(dd_div(v, d) for v in coords), d


def dd_coordinates_simplified(M: TridiagMatrix, lam: float) -> ReferenceRun:
    """Rerun of the plain two-sided recurrence in double-double.

    Forward covers matrix indices 1..p+1 and backward covers p..n (p from
    the shared region classification); the halves are glued on the overlap
    and the result normalized by the direct sum of squares.  When
    lambda - A_j keeps one sign, a single recurrence covers everything.
    """
    part = classify_regions(M, lam)
    n, p = part.n, part.p
    lam_dd = dd(float(lam))
    ddA = [dd(v) for v in M.diagonal()]

    if p >= n:
        coords = _dd_forward(ddA, lam_dd, n)
        s = DD_ONE
    elif p < 1:
        xh = _dd_backward(ddA, lam_dd, 1, n)
        s = DD_ONE if xh[0].hi > 0.0 else dd(-1.0)
        coords = [dd_mul(s, v) for v in xh]
    else:
        xs = _dd_forward(ddA, lam_dd, p + 1)
        xh = _dd_backward(ddA, lam_dd, p, n)
        s = _dd_glue(xs[p - 1], xs[p], xh[0], xh[1])
        coords = xs + [dd_mul(s, v) for v in xh[2:]]

    unit, d = _normalize(coords)
    return ReferenceRun(coordinates=unit, norm=d, glue_scale=s,
                        partition=part, method="dd-simplified")


def dd_coordinates_staged(M: TridiagMatrix, lam: float) -> ReferenceRun:
    """Rerun of the staged pipeline in double-double.

    Mirrors the binary64 staged evaluation index for index: grow forward
    to k+l-1, carry the rotation coefficient up to p, decay backward to
    m-r+2 (signs flipped so the coordinate at m is positive), carry the
    mirror coefficient down to p-1, glue, and normalize directly.  The
    radius identity is evaluated at every sweep position and the worst
    relative residual per sweep is recorded on the result.
    """
    part = classify_regions(M, lam)
    if part.degenerate:
        raise DomainError(f"degenerate region layout: {part.reason}")
    k, l, p, m, r = part.k, part.l, part.p, part.m, part.r
    n = part.n
    lam_dd = dd(float(lam))
    A = M.diagonal()
    ddA = [dd(v) for v in A]

    # left: x_1..x_{k+l-1} by recurrence, then coefficients up to p
    xs = _dd_forward(ddA, lam_dd, k + l - 1)
    thetas = [dd_acos(dd_mul_f(dd_sub(lam_dd, ddA[j]), 0.5))
              for j in range(k + l - 2, p + 1)]
    alpha0 = _dd_alpha_init(xs[k + l - 3], xs[k + l - 2], thetas[0])
    cd = [dd_mul_f(dd_sub(ddA[j + 1], ddA[j]), 0.5)
          for j in range(k + l - 2, p)]
    alphas, cs_l, ss_l = _dd_sweep(thetas, alpha0, cd)
    alpha_worst = _radius_max(alphas, cs_l, ss_l)

    left = list(xs)
    for j in range(k + l, p + 1):
        left.append(dd_mul_f(alphas[j - (k + l - 2)].re, 2.0))
    a_p = alphas[-1]
    left.append(dd_mul_f(
        dd_sub(dd_mul(a_p.re, cs_l[-1]), dd_mul(a_p.im, ss_l[-1])), 2.0))

    # right: xhat_{m-r+2}..xhat_n by recurrence, then coefficients down to p-1
    xh = _dd_backward(ddA, lam_dd, m - r + 2, n, flip_index=m)
    j0 = m - r + 1
    phis = [dd_acos(dd_mul_f(dd_sub(ddA[j], lam_dd), 0.5))
            for j in range(j0, p - 2, -1)]
    z1 = xh[0]
    z2 = xh[1]
    if r % 2 == 1:
        z1 = dd_neg(z1)
    else:
        z2 = dd_neg(z2)
    gamma0 = _dd_alpha_init(z2, z1, phis[0])
    cdr = [dd_mul_f(dd_sub(ddA[j], ddA[j - 1]), 0.5)
           for j in range(j0, p - 1, -1)]
    gammas, cs_r, ss_r = _dd_sweep(phis, gamma0, cdr)
    gamma_worst = _radius_max(gammas, cs_r, ss_r)

    head: list[DDReal] = []
    for j in range(p + 1, m - r + 2):
        g = gammas[j0 - (j - 2)]
        v = dd_mul_f(g.re, 2.0)
        head.append(dd_neg(v) if (m - j) % 2 else v)
    t_last = j0 - (p - 1)
    g_last = gammas[t_last]
    xhat_p = dd_mul_f(
        dd_sub(dd_mul(g_last.re, cs_r[t_last]), dd_mul(g_last.im, ss_r[t_last])),
        2.0)
    if (m - p) % 2:
        xhat_p = dd_neg(xhat_p)
    right = [xhat_p, *head, *xh]        # xhat_p .. xhat_n

    s = _dd_glue(left[p - 1], left[p], right[0], right[1])
    coords = left + [dd_mul(s, v) for v in right[2:]]
    unit, d = _normalize(coords)
    return ReferenceRun(coordinates=unit, norm=d, glue_scale=s,
                        partition=part, method="dd-staged",
                        alpha_radius_max_rel=alpha_worst,
                        gamma_radius_max_rel=gamma_worst)


def _max_rel_disagreement(a: Sequence[DDReal], b: Sequence[DDReal]) -> float:
    """Worst difference relative to the local envelope of b.

    The denominator for coordinate j is max(|b_k|) over k in
    {j-1, j, j+1}.  Where a coordinate is comparable to its neighbors
    this is the plain relative difference; at interior near-zeros of an
    oscillation both reruns carry roundoff at the scale of the
    neighboring amplitude, so a plain per-coordinate quotient would
    saturate there at (working epsilon)/(dip depth) no matter how the
    vectors were computed.
    """
    worst = 0.0
    n = len(a)
    for j, (va, vb) in enumerate(zip(a, b)):
        env = 0.0
        for k in range(max(0, j - 1), min(n, j + 2)):
            env = max(env, abs(b[k].hi))
        if env == 0.0:
            if not _is_zero(va):
                return float("inf")
            continue
        worst = max(worst, abs(dd_sub(va, vb).hi) / env)
    return worst


def reference_eigenvector(M: TridiagMatrix, lam: float, *,
                          validate: bool = True,
                          agreement_tol: float = ROUTE_AGREEMENT_TOL,
                          ) -> ReferenceRun:
    """The production reference vector: the simplified rerun, optionally
    cross-validated against the independent staged rerun.

    With ``validate`` (the default) and a non-degenerate region layout,
    the two reruns must agree to ``agreement_tol`` at every coordinate,
    measured relative to the local envelope (the plain relative
    difference away from interior near-zeros of the oscillation), else
    ConsistencyError; the worst disagreement is recorded on the
    returned run.  Validation is intended once per matrix: pass
    ``validate=False`` on further eigenvalues of an already-validated
    matrix to save the second rerun.
    """
    run = dd_coordinates_simplified(M, lam)
    if not validate or run.partition.degenerate:
        return run
    staged = dd_coordinates_staged(M, lam)
    worst = _max_rel_disagreement(run.coordinates, staged.coordinates)
    if not worst <= agreement_tol:
        raise ConsistencyError(
            "extended-precision reruns disagree: max envelope-relative "
            f"difference {worst:.3e} exceeds {agreement_tol:.1e}")
    return replace(run, validated=True, validation_max_rel=worst)


# ---------------------------------------------------------------------------
# error measurement against a reference

def _reference_coords(reference: ReferenceRun | Sequence[DDReal],
                      ) -> tuple[DDReal, ...]:
    if isinstance(reference, ReferenceRun):
        return reference.coordinates
    return tuple(reference)


def relative_errors(values: Sequence[float],
                    reference: ReferenceRun | Sequence[DDReal]) -> np.ndarray:
    """Per-coordinate |v - ref| / |ref|, evaluated in double-double.

    Coordinates whose reference is exactly zero get NaN (the caller
    decides how to aggregate those).
    """
    coords = _reference_coords(reference)
    if len(values) != len(coords):
        raise DomainError(
            f"length mismatch: {len(values)} values vs {len(coords)} reference")
    out = np.empty(len(coords))
    for j, ref in enumerate(coords):
        if _is_zero(ref):
            out[j] = float("nan")
            continue
        value = float(values[j])
        diff = dd_sub(dd(value), ref)
        q = abs(dd_div(diff, ref).hi)
        if math.isnan(q) and not math.isnan(value):
            # |diff/ref| overflowed binary64 (tiny subnormal reference);
            # keep NaN as the zero-reference marker only
            q = math.inf
        out[j] = q
    return out


def absolute_errors(values: Sequence[float],
                    reference: ReferenceRun | Sequence[DDReal]) -> np.ndarray:
    """Per-coordinate |v - ref|, evaluated in double-double."""
    coords = _reference_coords(reference)
    if len(values) != len(coords):
        raise DomainError(
            f"length mismatch: {len(values)} values vs {len(coords)} reference")
    out = np.empty(len(coords))
    for j, ref in enumerate(coords):
        out[j] = abs(dd_sub(dd(float(values[j])), ref).hi)
    return out


def agreement_digits(x: float, y: float) -> float:
    """Significant decimal digits to which two binary64 values agree.

    Defined as -log10(|x-y| / max(|x|, |y|)); equal values (including
    both zero) give +inf, and a sign disagreement gives 0 or less.
    """
    if x == y:
        return float("inf")
    denom = max(abs(x), abs(y))
    if denom == 0.0 or not math.isfinite(denom):
        return float("inf") if x == y else 0.0
    rel = abs(x - y) / denom
    if rel == 0.0:
        return float("inf")
    return -math.log10(rel)


# ---------------------------------------------------------------------------
# Bessel references

def bessel_series_dd(x: float, order: int, *, tol: float = 1e-40) -> DDReal:
    """J_order(x) by the ascending power series in double-double.

    Restricted to 0 < x <= 10: the series alternates, and its largest
    term exceeds the result by roughly e^x for small orders, so by x = 10
    about five of the thirty-one digits are spent on cancellation; beyond
    that the oracle would quietly degrade.  Terms are added until they
    fall below ``tol`` relative to the running sum.
    """
    if not 0.0 < x <= 10.0:
        raise DomainError(
            "series reference restricted to 0 < x <= 10 (cancellation budget)")
    if order < 0:
        raise DomainError("order must be nonnegative")
    half = dd_mul_f(dd(x), 0.5)
    h2 = dd_sqr(half)
    term = DD_ONE
    for i in range(1, order + 1):        # (x/2)^order / order!
        term = dd_div_f(dd_mul(term, half), float(i))
    acc = term
    for mth in range(1, 200):
        term = dd_div_f(dd_mul(term, h2), -float(mth * (order + mth)))
        acc = dd_add(acc, term)
        if abs(term.hi) <= tol * abs(acc.hi):
            return acc
    raise NumericalError("series reference failed to converge in 200 terms")


def bessel_backward_dd(x: float, n: int, N: int) -> list[DDReal]:
    """J_0(x)..J_n(x) by the backward recurrence in double-double.

    Starts from (1, 0) at orders (N, N+1), recurs down to order 0, and
    normalizes by sqrt(t_0^2 + 2 sum_{k=1..N} t_k^2).  The start order N
    must satisfy N > n and N > x; its truncation error falls off so fast
    in N - x that a margin of a few dozen above the binary64 choice makes
    truncation negligible at double-double precision.
    """
    if x <= 0.0:
        raise DomainError("argument must be positive")
    if n < 0:
        raise DomainError("order must be nonnegative")
    if not (N > n and N > x):
        raise DomainError(f"start order {N} must exceed both n={n} and x={x}")
    inv_x = dd_div(dd(2.0), dd(x))
    nxt = DD_ZERO          # t_{k+1}
    cur = DD_ONE           # t_k, starting at k = N
    out: list[DDReal | None] = [None] * (n + 1)
    sumsq = dd_sqr(cur)    # sum of t_k^2 over k = 1..N
    for kk in range(N, 0, -1):
        prev = dd_sub(dd_mul(dd_mul_f(inv_x, float(kk)), cur), nxt)
        _guard(prev, "backward recurrence rerun")
        nxt, cur = cur, prev          # cur is now t_{kk-1}
        if kk - 1 >= 1:
            sumsq = dd_add(sumsq, dd_sqr(cur))
        if kk - 1 <= n:
            out[kk - 1] = cur
    d = dd_sqrt(dd_add(dd_sqr(cur), dd_mul_f(sumsq, 2.0)))
    return [dd_div(v, d) for v in out]  # type: ignore[arg-type]
