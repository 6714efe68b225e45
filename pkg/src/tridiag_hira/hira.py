"""Eigenvector evaluation with high relative accuracy per coordinate.

For a symmetric tridiagonal matrix with unit off-diagonals and a strictly
increasing diagonal, an eigenvector splits into a growth region, an
oscillatory region, and a decay region.  The three-term recurrence is run
only where it is stable (forward through growth, backward through decay);
across the oscillatory region the coordinates are carried by complex
rotation coefficients whose update never subtracts nearly equal numbers.
The two halves are glued at the middle and normalized.

A simplified variant runs the plain recurrences all the way to the middle
and serves both as a fallback for degenerate region layouts and as an
independent cross-check.
"""

from __future__ import annotations

import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, DomainError, NumericalError
from .matrix import TridiagMatrix

_EPS = sys.float_info.epsilon

# Mantissas of the scaled recurrences are kept inside [2^-512, 2^512];
# crossing either bound shifts the running pair by a power of two.
_BAND_EXP = 512
_BAND_HI = 2.0 ** _BAND_EXP
_BAND_LO = 2.0 ** -_BAND_EXP

# Slack for assertions that are strict inequalities in exact arithmetic.
_CHAIN_SLACK = 1e-13

__all__ = [
    "RegionPartition",
    "ScaledSequence",
    "OscillatorySweep",
    "EigenvectorResult",
    "StabilityReport",
    "classify_regions",
    "region_tag",
    "grow_forward",
    "decay_backward",
    "alpha_init",
    "alpha_sweep",
    "gamma_sweep",
    "glue",
    "norm_factor",
    "hira_eigenvector",
    "simplified_eigenvector",
    "stability_report",
    "basis_condition",
    "power_law_error_exponent",
]


# ---------------------------------------------------------------------------
# scaled scalars (mantissa * 2^shift), used so that norms of vectors whose
# coordinates span hundreds of orders of magnitude never overflow

class _Scaled(NamedTuple):
    mantissa: float
    shift: int


_S_ZERO = _Scaled(0.0, 0)


def _s_norm(mantissa: float, shift: int) -> _Scaled:
    if mantissa == 0.0:
        return _S_ZERO
    frac, exp = math.frexp(mantissa)
    return _Scaled(frac, shift + exp)


def _s_add(a: _Scaled, b: _Scaled) -> _Scaled:
    if a.mantissa == 0.0:
        return b
    if b.mantissa == 0.0:
        return a
    if a.shift < b.shift:
        a, b = b, a
    # ldexp underflows to zero when b is ~300 orders below a; such a term
    # could not affect the sum anyway.
    return _s_norm(a.mantissa + math.ldexp(b.mantissa, b.shift - a.shift), a.shift)


def _s_mul(a: _Scaled, b: _Scaled) -> _Scaled:
    return _s_norm(a.mantissa * b.mantissa, a.shift + b.shift)


def _s_div(a: _Scaled, b: _Scaled) -> _Scaled:
    if b.mantissa == 0.0:
        raise ZeroDivisionError("scaled division by zero")
    return _s_norm(a.mantissa / b.mantissa, a.shift - b.shift)


def _s_sqrt(a: _Scaled) -> _Scaled:
    if a.mantissa < 0.0:
        raise ValueError("scaled sqrt of a negative number")
    if a.mantissa == 0.0:
        return _S_ZERO
    m, sh = a
    if sh % 2:
        m *= 2.0
        sh -= 1
    return _s_norm(math.sqrt(m), sh // 2)


def _s_from(x: float) -> _Scaled:
    return _s_norm(x, 0)


def _s_float(a: _Scaled) -> float:
    return math.ldexp(a.mantissa, a.shift)


def _s_float_clamped(a: _Scaled) -> float:
    """Like _s_float, but overflow reports signed infinity.

    Used for diagnostic scalars (glue scale, norms) on results whose
    coordinate span exceeds binary64 range; the coordinates themselves
    are assembled mantissa-by-mantissa and merely underflow to zero.
    """
    try:
        return math.ldexp(a.mantissa, a.shift)
    except OverflowError:
        return math.copysign(math.inf, a.mantissa)


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class RegionPartition:
    """Indices splitting an eigenvector into its qualitative regions.

    ``k`` is the last growth index, ``p`` the last index with
    lambda - A_p >= 0, ``m`` the last index with lambda - A_m > -2.
    ``l`` and ``r`` are the widths of the leftmost and rightmost
    oscillatory runs that the plain recurrences may still cross safely.
    When the general layout 1 <= k < k+l+1 <= p < p+1 <= m-r < m < n
    cannot be realized, ``degenerate`` is set and ``reason`` names the
    first failed condition.
    """

    k: int
    l: int
    p: int
    m: int
    r: int
    n: int
    degenerate: bool = False
    reason: str = ""
    # Whether cos(pi/(2l-1)) also lies above the next threshold value, the
    # second half of the run-length selection window. The maximal safe run
    # is used either way; these flags only record how the scan ended.
    left_window_exact: bool = True
    right_window_exact: bool = True


@dataclass
class ScaledSequence:
    """Recurrence coordinates as mantissa * 2^shift pairs.

    ``mantissas[i]`` with ``exponent_shifts[i]`` holds the coordinate with
    1-based matrix index ``first_index + i``.  Shifts are constant within
    blocks and change only where the running pair was rescaled.
    """

    first_index: int
    mantissas: list[float]
    exponent_shifts: list[int]

    def __len__(self) -> int:
        return len(self.mantissas)

    @property
    def last_index(self) -> int:
        return self.first_index + len(self.mantissas) - 1

    def _pos(self, j: int) -> int:
        pos = j - self.first_index
        if not 0 <= pos < len(self.mantissas):
            raise IndexError(f"index {j} outside [{self.first_index}, {self.last_index}]")
        return pos

    def mantissa(self, j: int) -> float:
        return self.mantissas[self._pos(j)]

    def shift(self, j: int) -> int:
        return self.exponent_shifts[self._pos(j)]

    def value(self, j: int) -> float:
        """Coordinate j as a plain float; may overflow for extreme shifts."""
        pos = self._pos(j)
        return math.ldexp(self.mantissas[pos], self.exponent_shifts[pos])

    def values(self) -> list[float]:
        return [math.ldexp(m, s) for m, s in zip(self.mantissas, self.exponent_shifts)]

    def pair(self, j: int) -> tuple[float, float, int]:
        """Mantissas of coordinates (j, j+1) aligned to a common shift."""
        p0, p1 = self._pos(j), self._pos(j + 1)
        m0, s0 = self.mantissas[p0], self.exponent_shifts[p0]
        m1, s1 = self.mantissas[p1], self.exponent_shifts[p1]
        sh = max(s0, s1)
        return math.ldexp(m0, s0 - sh), math.ldexp(m1, s1 - sh), sh


@dataclass
class OscillatorySweep:
    """Complex rotation coefficients carried across an oscillatory span.

    Entry ``t`` belongs to coefficient index ``first_j + direction*t``.
    The true coefficient equals ``alphas[t] * 2^base_shift``; the implicit
    conjugate partner ``beta`` is never stored.  ``radii`` and ``phases``
    are the polar parts of the stored mantissa-scale values.
    """

    first_j: int
    direction: int  # +1 for the left sweep, -1 for the right sweep
    thetas: list[float]
    alphas: list[complex]
    base_shift: int
    radii: list[float] = field(default_factory=list)
    phases: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.radii:
            self.radii = [abs(a) for a in self.alphas]
        if not self.phases:
            self.phases = [math.atan2(a.imag, a.real) for a in self.alphas]

    def index_of(self, j: int) -> int:
        t = (j - self.first_j) * self.direction
        if not 0 <= t < len(self.alphas):
            raise IndexError(f"coefficient index {j} not in sweep")
        return t

    def beta(self, t: int) -> complex:
        th = self.thetas[t]
        return complex(math.cos(th), -math.sin(th)) * self.alphas[t].conjugate()


@dataclass(frozen=True, eq=False)
class EigenvectorResult:
    X: np.ndarray
    eigenvalue: float
    partition: RegionPartition
    s: float
    d: float
    d_l: float
    d_r: float
    predicted_rel_bound: float
    method: str
    used_fallback: bool


@dataclass(frozen=True)
class StabilityReport:
    """A-priori diagnostics for one (matrix, eigenvalue) pair."""

    max_step_ratio_left: float
    max_step_ratio_right: float
    init_condition_left: float
    init_condition_right: float
    kappa_left: float
    kappa_right: float
    predicted_rel_bound: float
    bound_ok: bool


# ---------------------------------------------------------------------------
# region classification

def _run_scan(width_cap: int, cos_arg) -> tuple[int, bool]:
    """Longest run w in [3, width_cap] with cos_arg(w) > cos(pi/(2w-1)).

    Returns (w, window_exact) with w = 0 when even width 3 fails.
    window_exact records whether cos(pi/(2w-1)) >= cos_arg(w+1), the
    second half of the selection window; the bound can jump past that
    window between consecutive widths, in which case the maximal safe
    width is kept and the flag is False.
    """
    w = 0
    for cand in range(3, width_cap + 1):
        if cos_arg(cand) > math.cos(math.pi / (2 * cand - 1)):
            w = cand
        else:
            break
    if w == 0:
        return 0, False
    tau = math.cos(math.pi / (2 * w - 1))
    return w, tau >= cos_arg(w + 1)


def classify_regions(M: TridiagMatrix, lam: float) -> RegionPartition:
    """Locate the growth/oscillatory/decay layout of the lambda-eigenvector.

    k, p, m come from threshold scans of the monotone sequence lambda - A_j.
    The run widths l and r grow from 3 for as long as the half-angle bound
    cos(pi/(2w-1)) stays below the corresponding (lambda - A)/2 value, so the
    plain recurrence provably keeps positive, slowly varying coordinates
    across the run.  Degeneracy is data, not an error.
    """
    A = np.asarray(M.diagonal())
    n = M.n
    k = int(np.searchsorted(A, lam - 2.0, side="right"))
    p = int(np.searchsorted(A, lam, side="right"))
    m = int(np.searchsorted(A, lam + 2.0, side="left"))

    def degenerate(reason: str, l: int = 0, r: int = 0) -> RegionPartition:
        return RegionPartition(k=k, l=l, p=p, m=m, r=r, n=n,
                               degenerate=True, reason=reason,
                               left_window_exact=False, right_window_exact=False)

    if k < 1:
        return degenerate("growth region empty")
    if m >= n:
        return degenerate("decay region empty")
    if p - k < 4:
        return degenerate("left oscillatory run too short")
    if m - p < 4:
        return degenerate("right oscillatory run too short")

    l, left_exact = _run_scan(p - k - 1, lambda w: (lam - A[k + w]) / 2.0)
    if l == 0:
        return degenerate("no safe leftmost oscillatory run")
    r, right_exact = _run_scan(m - p - 1, lambda w: (A[m - w - 1] - lam) / 2.0)
    if r == 0:
        return degenerate("no safe rightmost oscillatory run", l=l)

    return RegionPartition(k=k, l=l, p=p, m=m, r=r, n=n,
                           left_window_exact=left_exact,
                           right_window_exact=right_exact)


def region_tag(part: RegionPartition, j: int) -> str:
    """Tag for 1-based index j: G, OL, O, OR or D."""
    if not 1 <= j <= part.n:
        raise IndexError(f"index {j} outside 1..{part.n}")
    if j <= part.k:
        return "G"
    if j <= part.k + part.l:
        return "OL"
    if j <= part.m - part.r:
        return "O"
    if j <= part.m:
        return "OR"
    return "D"


# ---------------------------------------------------------------------------
# plain recurrences with dynamic rescaling

def _forward(M: TridiagMatrix, lam: float, stop: int, checked: bool) -> ScaledSequence:
    A = M.diagonal()
    n = M.n
    if not 1 <= stop <= n:
        raise DomainError(f"stop index {stop} outside 1..{n}")
    mants = [1.0]
    shifts = [0]
    if stop == 1:
        return ScaledSequence(1, mants, shifts)

    sh = 0
    prev = 1.0
    cur = lam - A[0]
    if checked and cur <= 0.0:
        raise NumericalError("coordinate 2 is not positive; lambda inconsistent "
                             "with the requested span")
    mants.append(cur)
    shifts.append(sh)
    last_ratio = cur  # x_2 / x_1

    for j in range(2, stop):
        co = lam - A[j - 1]
        nxt = co * cur - prev
        if not math.isfinite(nxt):
            raise NumericalError(f"forward recurrence lost finiteness at index {j + 1}")
        if checked:
            if nxt <= 0.0:
                raise NumericalError(
                    f"coordinate {j + 1} is not positive; lambda inconsistent "
                    "with the requested span")
            if co >= 2.0 and nxt <= cur:
                raise NumericalError(
                    f"growth monotonicity failed at index {j + 1}")
            ratio = nxt / cur
            if ratio > last_ratio * (1.0 + _CHAIN_SLACK):
                raise NumericalError(
                    f"growth ratio chain increased at index {j + 1}")
            last_ratio = ratio
        prev, cur = cur, nxt
        if abs(cur) >= _BAND_HI:
            cur = math.ldexp(cur, -_BAND_EXP)
            prev = math.ldexp(prev, -_BAND_EXP)
            sh += _BAND_EXP
        elif 0.0 < max(abs(cur), abs(prev)) <= _BAND_LO:
            cur = math.ldexp(cur, _BAND_EXP)
            prev = math.ldexp(prev, _BAND_EXP)
            sh -= _BAND_EXP
        mants.append(cur)
        shifts.append(sh)
    return ScaledSequence(1, mants, shifts)


def grow_forward(M: TridiagMatrix, lam: float, stop: int) -> ScaledSequence:
    """Coordinates x_1..x_stop by the forward recurrence, x_1 = 1.

    Meant for stop <= k+l-1, where every coordinate is provably positive,
    strictly increasing through the growth region, with a decreasing ratio
    chain; violations raise NumericalError since they mean lambda and the
    requested span are inconsistent.
    """
    return _forward(M, lam, stop, checked=True)


def _backward(M: TridiagMatrix, lam: float, stop: int, checked: bool,
              flip_index: int | None = None) -> ScaledSequence:
    A = M.diagonal()
    n = M.n
    if not 1 <= stop <= n:
        raise DomainError(f"stop index {stop} outside 1..{n}")
    rmants = [1.0]
    rshifts = [0]
    if stop < n:
        sh = 0
        prev = 1.0              # xhat_{j+1} mantissa
        cur = lam - A[n - 1]    # xhat_{n-1}
        rmants.append(cur)
        rshifts.append(sh)
        for j in range(n - 1, stop, -1):
            co = lam - A[j - 1]
            nxt = co * cur - prev
            if not math.isfinite(nxt):
                raise NumericalError(
                    f"backward recurrence lost finiteness at index {j - 1}")
            if checked and co <= -2.0:
                if nxt * cur >= 0.0:
                    raise NumericalError(
                        f"decay sign alternation failed at index {j - 1}; "
                        "lambda inconsistent with the requested span")
                if abs(nxt) <= abs(cur):
                    raise NumericalError(
                        f"decay magnitude growth failed at index {j - 1}")
            prev, cur = cur, nxt
            if abs(cur) >= _BAND_HI:
                cur = math.ldexp(cur, -_BAND_EXP)
                prev = math.ldexp(prev, -_BAND_EXP)
                sh += _BAND_EXP
            elif 0.0 < max(abs(cur), abs(prev)) <= _BAND_LO:
                cur = math.ldexp(cur, _BAND_EXP)
                prev = math.ldexp(prev, _BAND_EXP)
                sh -= _BAND_EXP
            rmants.append(cur)
            rshifts.append(sh)
    rmants.reverse()
    rshifts.reverse()
    seq = ScaledSequence(stop, rmants, rshifts)
    if flip_index is not None and seq.mantissa(flip_index) < 0.0:
        seq.mantissas = [-m for m in seq.mantissas]
    return seq


def decay_backward(M: TridiagMatrix, lam: float, stop: int,
                   flip_index: int | None = None) -> ScaledSequence:
    """Coordinates xhat_stop..xhat_n by the backward recurrence, xhat_n = 1.

    Signs alternate and magnitudes grow while lambda - A_j <= -2; violations
    raise NumericalError.  With ``flip_index`` given (normally m), all signs
    are flipped if the coordinate there came out negative, making the
    oscillatory continuation start from a positive value.
    """
    return _backward(M, lam, stop, checked=True, flip_index=flip_index)


# ---------------------------------------------------------------------------
# complexified oscillatory sweeps

def alpha_init(x_pair: tuple[float, float], theta: float) -> complex:
    """Rotation coefficient matching the coordinate pair (x_j, x_{j+1}).

    Solves the 2x2 system so that 2 Re(alpha) = x_j exactly and
    2 Re(alpha e^{i theta}) = x_{j+1}.
    """
    if not 0.0 < theta < math.pi:
        raise DomainError(f"theta {theta} outside (0, pi); basis is singular")
    st = math.sin(theta)
    if st == 0.0:
        raise DomainError("sin(theta) underflowed to zero; basis is singular")
    x, y = x_pair
    return complex(0.5 * x, 0.5 * (x * math.cos(theta) - y) / st)


def _sweep(angles: Sequence[float], z0: complex,
           cos_diffs: Sequence[float] | None) -> list[complex]:
    out = [complex(z0)]
    z = complex(z0)
    cs = [math.cos(t) for t in angles]
    ss = [math.sin(t) for t in angles]
    for t in range(len(angles) - 1):
        th = angles[t]
        tn = angles[t + 1]
        num = cos_diffs[t] if cos_diffs is not None else cs[t] - cs[t + 1]
        avg = 0.5 * (th + tn)
        denom = ss[t + 1] * math.sin(avg)
        if denom == 0.0:
            raise NumericalError(f"sweep step {t} has a degenerate angle")
        g = num / denom
        rot = z * complex(cs[t], ss[t])
        w = rot * complex(math.cos(avg), math.sin(avg))
        # the correction is purely imaginary, so Re(z) stays exactly Re(rot)
        z = complex(rot.real, rot.imag - g * w.imag)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise NumericalError(f"sweep lost finiteness at step {t + 1}")
        out.append(z)
    return out


def _check_angles(angles: Sequence[float], increasing: bool, what: str) -> None:
    if len(angles) == 0:
        raise DomainError(f"{what}: empty angle sequence")
    for t, a in enumerate(angles):
        if not 0.0 < a < math.pi:
            raise DomainError(f"{what}: angle {a} at position {t} outside (0, pi)")
        if t:
            # ties are fine: the step correction vanishes with them
            prev = angles[t - 1]
            if increasing and a < prev:
                raise DomainError(f"{what}: angles decrease at position {t}")
            if not increasing and a > prev:
                raise DomainError(f"{what}: angles increase at position {t}")


def alpha_sweep(thetas: Sequence[float], alpha0: complex,
                cos_diffs: Sequence[float] | None = None) -> list[complex]:
    """Carry the rotation coefficient up the oscillatory region.

    thetas must be non-decreasing inside (0, pi); a constant stretch makes
    the steps pure rotations.  Each step rotates by
    e^{i theta_j} and subtracts a purely imaginary correction whose size is
    at most |alpha_j| * (cos theta_j - cos theta_{j+1}) / (sin theta_{j+1}
    sin((theta_j+theta_{j+1})/2)).  ``cos_diffs`` optionally supplies the
    cosine differences; pass (A_{j+2} - A_{j+1})/2, which equals them exactly
    and avoids the cancellation in subtracting nearly equal cosines.
    """
    _check_angles(thetas, increasing=True, what="alpha_sweep")
    if cos_diffs is not None and len(cos_diffs) != len(thetas) - 1:
        raise DomainError("alpha_sweep: cos_diffs length must be len(thetas)-1")
    return _sweep(thetas, alpha0, cos_diffs)


def gamma_sweep(phis: Sequence[float], gamma0: complex,
                cos_diffs: Sequence[float] | None = None) -> list[complex]:
    """Mirror of alpha_sweep, run toward decreasing coefficient indices.

    phis are passed in sweep order.  They must be non-increasing in the
    coefficient index, hence non-decreasing as visited, inside (0, pi).
    ``cos_diffs``, when given, are (A_{j+1} - A_j)/2 for the step from
    coefficient j to j-1.
    """
    _check_angles(phis, increasing=True, what="gamma_sweep")
    if cos_diffs is not None and len(cos_diffs) != len(phis) - 1:
        raise DomainError("gamma_sweep: cos_diffs length must be len(phis)-1")
    return _sweep(phis, gamma0, cos_diffs)


# ---------------------------------------------------------------------------
# glue and normalization

def glue(x_p: float, x_p1: float, xhat_p: float, xhat_p1: float) -> float:
    """Scale s making s*xhat continue the left-side coordinates.

    The denominator with the larger magnitude is used.  The sign alignment
    step (flipping the xhat side when the inner product over the overlap is
    negative) cancels out of the returned ratio, which always refers to the
    xhat values as passed in.
    """
    if xhat_p == 0.0 and xhat_p1 == 0.0:
        raise ConsistencyError("both overlap coordinates on the xhat side are zero")
    if abs(xhat_p) >= abs(xhat_p1):
        s = x_p / xhat_p
        if s == 0.0 and xhat_p1 != 0.0:
            s = x_p1 / xhat_p1
    else:
        s = x_p1 / xhat_p1
        if s == 0.0 and xhat_p != 0.0:
            s = x_p / xhat_p
    if s == 0.0 or not math.isfinite(s):
        raise ConsistencyError(f"glue scale came out as {s}")
    return s


def _radius_term(alpha: complex, ct: float, st: float) -> float:
    # 4 (|alpha|^2 + cos(theta) Re(alpha^2 e^{i theta})), which equals
    # x_j^2 + x_{j+1}^2 and is nonnegative for any alpha and real angle
    a, b = alpha.real, alpha.imag
    sq = a * a + b * b
    re_rot = (a * a - b * b) * ct - 2.0 * a * b * st
    return 4.0 * (sq + ct * re_rot)


def _sweep_norm_sum(sweep: OscillatorySweep, j_lo: int, j_hi: int) -> _Scaled:
    """Sum of radius terms for coefficient indices j_lo..j_hi (inclusive)."""
    total = 0.0
    for j in range(j_lo, j_hi + 1):
        t = sweep.index_of(j)
        th = sweep.thetas[t]
        ct = math.cos(th)
        a = sweep.alphas[t]
        term = _radius_term(a, ct, math.sin(th))
        if term < 0.0:
            scale = 4.0 * (abs(a) ** 2) * (1.0 + abs(ct))
            if scale > 0.0 and term < -1e-10 * scale:
                raise ConsistencyError(
                    f"norm summand at coefficient {j} is negative beyond "
                    f"tolerance: {term:.3e} against scale {scale:.3e}")
            term = 0.0
        total += term
    return _s_norm(total, 2 * sweep.base_shift)


def _sq_sum(seq: ScaledSequence, j_lo: int, j_hi: int) -> _Scaled:
    """Sum of squared coordinates over matrix indices [j_lo, j_hi]."""
    acc_m = 0.0
    acc_sh = 0
    for j in range(j_lo, j_hi + 1):
        pos = j - seq.first_index
        m = seq.mantissas[pos]
        if m == 0.0:
            continue
        frac, e = math.frexp(m)
        sq_sh = 2 * (seq.exponent_shifts[pos] + e)
        sq_m = frac * frac
        if acc_m == 0.0:
            acc_m, acc_sh = sq_m, sq_sh
            continue
        if sq_sh > acc_sh:
            acc_m = math.ldexp(acc_m, acc_sh - sq_sh) + sq_m
            acc_sh = sq_sh
        else:
            acc_m += math.ldexp(sq_m, sq_sh - acc_sh)
        if acc_m >= _BAND_HI:
            acc_m = math.ldexp(acc_m, -_BAND_EXP)
            acc_sh += _BAND_EXP
    return _s_norm(acc_m, acc_sh)


def _scaled_square(seq: ScaledSequence, j: int) -> _Scaled:
    pos = j - seq.first_index
    return _s_mul(_s_norm(seq.mantissas[pos], seq.exponent_shifts[pos]),
                  _s_norm(seq.mantissas[pos], seq.exponent_shifts[pos]))


def norm_factor(left: ScaledSequence, right: ScaledSequence,
                s_mantissa: float, s_shift: int, part: RegionPartition,
                left_sweep: OscillatorySweep | None = None,
                right_sweep: OscillatorySweep | None = None,
                ) -> tuple[_Scaled, float, float]:
    """Normalizer d of the glued eigenvector, plus the partial sums d_l, d_r.

    With both sweeps given, d^2 is assembled as

        sum_{j<k+l-1} x_j^2
        + (x_{k+l-1}^2 + d_l + s^2 d_r + (s xhat_{m-r+3})^2) / 2
        + sum_{j>m-r+3} (s xhat_j)^2,

    where d_l and d_r are the radius-identity sums of the two sweeps; each
    of their summands equals x_j^2 + x_{j+1}^2, so consecutive interior
    coordinates are counted twice and the boundary terms once, which the
    halving corrects.  Without sweeps (the simplified variant) d^2 is the
    direct sum of squares, the left side owning indices 1..p+1.

    Returns (d as a scaled scalar, d_l, d_r).  Every summand is nonnegative;
    a violation beyond 1e-10 relative raises ConsistencyError.
    """
    k, l, p, m, r = part.k, part.l, part.p, part.m, part.r
    n = part.n
    s_sc = _s_norm(s_mantissa, s_shift)
    s_sq = _s_mul(s_sc, s_sc)

    if left_sweep is None or right_sweep is None:
        if left_sweep is not None or right_sweep is not None:
            raise DomainError("norm_factor needs both sweeps or neither")
        acc = _sq_sum(left, 1, p + 1)
        acc = _s_add(acc, _s_mul(s_sq, _sq_sum(right, p + 2, n)))
        d = _s_sqrt(acc)
        return d, 0.0, 0.0

    dl = _sweep_norm_sum(left_sweep, k + l - 1, p)
    dr = _sweep_norm_sum(right_sweep, p, m - r + 1)

    acc = _sq_sum(left, 1, k + l - 2)
    half = _s_add(_scaled_square(left, k + l - 1), dl)
    half = _s_add(half, _s_mul(s_sq, dr))
    half = _s_add(half, _s_mul(s_sq, _scaled_square(right, m - r + 3)))
    acc = _s_add(acc, _s_mul(half, _Scaled(0.5, 0)))
    acc = _s_add(acc, _s_mul(s_sq, _sq_sum(right, m - r + 4, n)))
    d = _s_sqrt(acc)
    return d, _s_float_clamped(dl), _s_float_clamped(dr)


# ---------------------------------------------------------------------------
# the full pipeline

@contextmanager
def _stage(name: str):
    try:
        yield
    except NumericalError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def _rebase_pair(seq: ScaledSequence, j: int) -> tuple[float, float, int]:
    """Pair (j, j+1) rebased so the second mantissa lands in [0.5, 1)."""
    m0, m1, sh = seq.pair(j)
    anchor = m1 if m1 != 0.0 else m0
    _, e = math.frexp(anchor)
    return math.ldexp(m0, -e), math.ldexp(m1, -e), sh + e


@dataclass
class HiraStages:
    """Intermediate products of one eigenvector evaluation."""

    partition: RegionPartition
    left: ScaledSequence        # x_1 .. x_{p+1}
    right: ScaledSequence       # xhat_p .. xhat_n, sign-canonical at m
    left_sweep: OscillatorySweep
    right_sweep: OscillatorySweep
    s_mantissa: float
    s_shift: int


def hira_stages(M: TridiagMatrix, lam: float) -> HiraStages:
    """Run the staged pipeline; the partition must not be degenerate."""
    part = classify_regions(M, lam)
    if part.degenerate:
        raise DomainError(f"degenerate region layout: {part.reason}")
    k, l, p, m, r = part.k, part.l, part.p, part.m, part.r
    A = M.diagonal()
    lam = float(lam)

    # left side: grow through x_{k+l-1}, then carry alpha up to p
    with _stage("grow_forward"):
        left = grow_forward(M, lam, k + l - 1)
    # thetas[t] is the angle for coefficient index j = k+l-2+t; the angle
    # of coefficient j is acos((lambda - A_{j+1})/2)
    thetas = [math.acos((lam - A[j]) / 2.0) for j in range(k + l - 2, p + 1)]
    with _stage("alpha_init"):
        x0m, x1m, S0 = _rebase_pair(left, k + l - 2)
        alpha0 = alpha_init((x0m, x1m), thetas[0])
    with _stage("alpha_sweep"):
        cd = [(A[j + 1] - A[j]) / 2.0 for j in range(k + l - 2, p)]
        alphas = alpha_sweep(thetas, alpha0, cos_diffs=cd)
    left_sweep = OscillatorySweep(first_j=k + l - 2, direction=1,
                                  thetas=thetas, alphas=alphas, base_shift=S0)

    lm = list(left.mantissas)
    ls = list(left.exponent_shifts)
    for j in range(k + l, p + 1):
        lm.append(2.0 * alphas[j - (k + l - 2)].real)
        ls.append(S0)
    th_p = thetas[-1]
    a_p = alphas[-1]
    lm.append(2.0 * (a_p.real * math.cos(th_p) - a_p.imag * math.sin(th_p)))
    ls.append(S0)
    left_full = ScaledSequence(1, lm, ls)

    # right side: decay through xhat_{m-r+2}, then carry gamma down to p-1
    with _stage("decay_backward"):
        right = decay_backward(M, lam, m - r + 2, flip_index=m)
    j0 = m - r + 1
    # phis[t] is the angle for coefficient index j = j0 - t
    phis = [math.acos(-(lam - A[j]) / 2.0) for j in range(j0, p - 2, -1)]
    with _stage("gamma_init"):
        z1m, z2m, T0 = _rebase_pair(right, m - r + 2)
        if r % 2 == 1:          # (-1)^(r-2) flips the first pair entry
            z1m = -z1m
        else:                   # (-1)^(r-3) flips the second
            z2m = -z2m
        gamma0 = alpha_init((z2m, z1m), phis[0])
    with _stage("gamma_sweep"):
        cdr = [(A[j] - A[j - 1]) / 2.0 for j in range(j0, p - 1, -1)]
        gammas = gamma_sweep(phis, gamma0, cos_diffs=cdr)
    right_sweep = OscillatorySweep(first_j=j0, direction=-1,
                                   thetas=phis, alphas=gammas, base_shift=T0)

    rm = list(right.mantissas)
    rs = list(right.exponent_shifts)
    head_m: list[float] = []
    head_s: list[int] = []
    for j in range(p + 1, m - r + 2):       # xhat_j from gamma_{j-2}
        g = gammas[j0 - (j - 2)]
        sign = -1.0 if (m - j) % 2 else 1.0
        head_m.append(2.0 * g.real * sign)
        head_s.append(T0)
    g_last = gammas[j0 - (p - 1)]
    ph_last = phis[j0 - (p - 1)]
    sign_p = -1.0 if (m - p) % 2 else 1.0
    xhat_p_m = 2.0 * (g_last.real * math.cos(ph_last)
                      - g_last.imag * math.sin(ph_last)) * sign_p
    right_full = ScaledSequence(p, [xhat_p_m, *head_m, *rm],
                                [T0, *head_s, *rs])

    with _stage("glue"):
        xp_m = left_full.mantissa(p)
        xp1_m = left_full.mantissa(p + 1)
        s_mant = glue(xp_m, xp1_m, right_full.mantissa(p), right_full.mantissa(p + 1))
    s_shift = S0 - T0
    return HiraStages(partition=part, left=left_full, right=right_full,
                      left_sweep=left_sweep, right_sweep=right_sweep,
                      s_mantissa=s_mant, s_shift=s_shift)


def _emit(left: ScaledSequence, right: ScaledSequence, split: int,
          s_sc: _Scaled, d: _Scaled, n: int) -> np.ndarray:
    """Divide the glued coordinates by d; left side owns 1..split."""
    X = np.empty(n)
    for j in range(1, split + 1):
        pos = j - left.first_index
        X[j - 1] = math.ldexp(left.mantissas[pos] / d.mantissa,
                              left.exponent_shifts[pos] - d.shift)
    for j in range(split + 1, n + 1):
        pos = j - right.first_index
        mant = s_sc.mantissa * right.mantissas[pos] / d.mantissa
        X[j - 1] = math.ldexp(mant,
                              s_sc.shift + right.exponent_shifts[pos] - d.shift)
    return X


def hira_eigenvector(M: TridiagMatrix, lam: float) -> EigenvectorResult:
    """Unit eigenvector for the eigenvalue lam, first coordinate positive.

    Pipeline: classify regions, grow the left coordinates, sweep the complex
    coefficients across the oscillatory middle from both sides, glue, and
    normalize.  Falls back to simplified_eigenvector when the region layout
    is degenerate; the result records which method ran.
    """
    part = classify_regions(M, lam)
    if part.degenerate:
        res = simplified_eigenvector(M, lam)
        return replace(res, used_fallback=True)

    st = hira_stages(M, lam)
    with _stage("norm_factor"):
        d, d_l, d_r = norm_factor(st.left, st.right, st.s_mantissa, st.s_shift,
                                  part, st.left_sweep, st.right_sweep)
    s_sc = _s_norm(st.s_mantissa, st.s_shift)
    X = _emit(st.left, st.right, part.p + 1, s_sc, d, part.n)
    bound = _EPS * (part.l ** 4 + part.r ** 4)
    return EigenvectorResult(X=X, eigenvalue=float(lam), partition=part,
                             s=_s_float_clamped(s_sc), d=_s_float_clamped(d),
                             d_l=d_l, d_r=d_r,
                             predicted_rel_bound=bound, method="hira",
                             used_fallback=False)


def simplified_eigenvector(M: TridiagMatrix, lam: float) -> EigenvectorResult:
    """Eigenvector via plain recurrences run toward the middle from both ends.

    Forward covers 1..p+1 and backward covers n..p, each stopping where its
    direction stops being the stable one; the halves are glued and the norm
    is the direct sum of squares.  When lambda - A_j keeps one sign, a single
    recurrence covers everything.
    """
    part = classify_regions(M, lam)
    n, p = part.n, part.p
    lam = float(lam)

    if p >= n:
        seq = _forward(M, lam, n, checked=False)
        d = _s_sqrt(_sq_sum(seq, 1, n))
        s_sc = _Scaled(1.0, 0)
        X = _emit(seq, seq, n, s_sc, d, n)
    elif p < 1:
        seq = _backward(M, lam, 1, checked=False)
        sign = 1.0 if seq.mantissa(1) > 0.0 else -1.0
        d = _s_sqrt(_sq_sum(seq, 1, n))
        s_sc = _Scaled(sign, 0)
        X = _emit(seq, seq, 0, s_sc, d, n)
    else:
        with _stage("forward"):
            left = _forward(M, lam, p + 1, checked=False)
        with _stage("backward"):
            right = _backward(M, lam, p, checked=False)
        with _stage("glue"):
            xlm0, xlm1, S0 = left.pair(p)
            xrm0, xrm1, T0 = right.pair(p)
            s_mant = glue(xlm0, xlm1, xrm0, xrm1)
        s_shift = S0 - T0
        with _stage("norm_factor"):
            d, _, _ = norm_factor(left, right, s_mant, s_shift, part)
        s_sc = _s_norm(s_mant, s_shift)
        X = _emit(left, right, p + 1, s_sc, d, n)

    return EigenvectorResult(X=X, eigenvalue=lam, partition=part,
                             s=_s_float_clamped(s_sc), d=_s_float_clamped(d),
                             d_l=0.0, d_r=0.0,
                             predicted_rel_bound=float("nan"),
                             method="simplified", used_fallback=False)


# ---------------------------------------------------------------------------
# diagnostics

def basis_condition(theta: float) -> float:
    """Condition number of the 2x2 rotation basis: max(tan, cot) of theta/2."""
    if not 0.0 < theta < math.pi:
        raise DomainError(f"theta {theta} outside (0, pi)")
    t = math.tan(0.5 * theta)
    return max(t, 1.0 / t)


def power_law_error_exponent(a: float) -> float:
    """Exponent b in the error growth O(c^b) for the profile (j/c)^a."""
    if a <= 0.0:
        raise DomainError("profile exponent must be positive")
    return 4.0 * a / (a + 2.0)


def stability_report(M: TridiagMatrix, lam: float,
                     part: RegionPartition) -> StabilityReport:
    """A-priori accuracy diagnostics for the staged evaluation.

    The step ratios bound how fast the sweep corrections grow relative to
    the distance from the region edge; both sweeps keep roughly constant
    relative accuracy when every ratio stays below 1/2.  The init conditions
    estimate the accuracy loss when converting a coordinate pair into a
    rotation coefficient, and kappa_left/right are the basis condition
    numbers at the two sweep entry angles.
    """
    if part.degenerate:
        raise DomainError(f"degenerate region layout: {part.reason}")
    k, l, p, m, r = part.k, part.l, part.p, part.m, part.r
    A = M.diagonal()
    lam = float(lam)

    left_ratios = [(A[j + 1] - A[j]) / (A[j] - A[k])
                   for j in range(k + l - 1, p + 1)]
    right_ratios = [(A[j + 1] - A[j]) / (A[m - 1] - A[j])
                    for j in range(p - 1, m - r + 2)]
    init_left = 4.0 / (A[k + l - 1] - A[k - 1])
    init_right = 4.0 / (A[m - 1] - A[m - r - 1])
    kappa_l = basis_condition(math.acos((lam - A[k + l - 2]) / 2.0))
    kappa_r = basis_condition(math.acos(-(lam - A[m - r + 1]) / 2.0))
    max_left = max(left_ratios)
    max_right = max(right_ratios)
    return StabilityReport(
        max_step_ratio_left=max_left,
        max_step_ratio_right=max_right,
        init_condition_left=init_left,
        init_condition_right=init_right,
        kappa_left=kappa_l,
        kappa_right=kappa_r,
        predicted_rel_bound=_EPS * (l ** 4 + r ** 4),
        bound_ok=max_left < 0.5 and max_right < 0.5,
    )
