"""Double-double arithmetic: unevaluated sums of two binary64 values.

A ``DDReal`` carries about 106 significand bits (roughly 31 decimal
digits) as a pair (hi, lo) with hi = fl(hi + lo).  All operations are
built from the classical error-free transformations (two_sum, Dekker
product) and keep the pair non-overlapping, so results stay accurate to
a couple of units in the 106-bit last place.

The layer exists to rerun selected computations in extended precision
and serve as a reference for the binary64 code paths.  It is pure
Python on purpose: slow but dependency-free and easy to audit.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from .errors import DomainError

_SPLITTER = 134217729.0  # 2**27 + 1, splits a 53-bit significand in half


class DDReal(NamedTuple):
    hi: float
    lo: float

    def __repr__(self) -> str:  # keep full precision visible in dumps
        return f"DDReal({self.hi!r}, {self.lo!r})"


def dd(x: float | int | DDReal) -> DDReal:
    """Exact injection of a float or int into DDReal form."""
    if isinstance(x, DDReal):
        return x
    if isinstance(x, int) and abs(x) > 2**53:
        hi = float(x)
        return DDReal(hi, float(x - int(hi)))
    return DDReal(float(x), 0.0)


DD_ZERO = DDReal(0.0, 0.0)
DD_ONE = DDReal(1.0, 0.0)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _fast_two_sum(a: float, b: float) -> tuple[float, float]:
    # requires |a| >= |b| (or a == 0)
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    # Dekker's product; no math.fma in Python 3.10
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(a: DDReal, b: DDReal) -> DDReal:
    s1, s2 = _two_sum(a.hi, b.hi)
    t1, t2 = _two_sum(a.lo, b.lo)
    s2 += t1
    s1, s2 = _fast_two_sum(s1, s2)
    s2 += t2
    return DDReal(*_fast_two_sum(s1, s2))


def dd_neg(a: DDReal) -> DDReal:
    return DDReal(-a.hi, -a.lo)


def dd_sub(a: DDReal, b: DDReal) -> DDReal:
    return dd_add(a, DDReal(-b.hi, -b.lo))


def dd_mul(a: DDReal, b: DDReal) -> DDReal:
    p1, p2 = _two_prod(a.hi, b.hi)
    p2 += a.hi * b.lo + a.lo * b.hi + a.lo * b.lo
    return DDReal(*_fast_two_sum(p1, p2))


def dd_sqr(a: DDReal) -> DDReal:
    p1, p2 = _two_prod(a.hi, a.hi)
    p2 += 2.0 * a.hi * a.lo + a.lo * a.lo
    return DDReal(*_fast_two_sum(p1, p2))


def dd_div(a: DDReal, b: DDReal) -> DDReal:
    if b.hi == 0.0 and b.lo == 0.0:
        raise DomainError("division by zero")
    q1 = a.hi / b.hi
    r = dd_sub(a, dd_mul_f(b, q1))
    q2 = r.hi / b.hi
    r = dd_sub(r, dd_mul_f(b, q2))
    q3 = r.hi / b.hi
    q1, q2 = _fast_two_sum(q1, q2)
    return dd_add_f(DDReal(q1, q2), q3)


def dd_sqrt(a: DDReal) -> DDReal:
    if a.hi == 0.0 and a.lo == 0.0:
        return DD_ZERO
    if a.hi < 0.0:
        raise DomainError("sqrt of negative value")
    # one Newton correction on top of the hardware sqrt (Karp's trick)
    x = 1.0 / math.sqrt(a.hi)
    ax = a.hi * x
    err = dd_sub(a, dd_sqr(dd(ax))).hi * (x * 0.5)
    return DDReal(*_fast_two_sum(ax, err))


# Mixed DDReal (op) float variants; cheaper and exact in the same sense.

def dd_add_f(a: DDReal, b: float) -> DDReal:
    s1, s2 = _two_sum(a.hi, b)
    s2 += a.lo
    return DDReal(*_fast_two_sum(s1, s2))


def dd_sub_f(a: DDReal, b: float) -> DDReal:
    return dd_add_f(a, -b)


def dd_mul_f(a: DDReal, b: float) -> DDReal:
    p1, p2 = _two_prod(a.hi, b)
    p2 += a.lo * b
    return DDReal(*_fast_two_sum(p1, p2))


def dd_div_f(a: DDReal, b: float) -> DDReal:
    if b == 0.0:
        raise DomainError("division by zero")
    q1 = a.hi / b
    p1, p2 = _two_prod(q1, b)
    s, e = _two_sum(a.hi, -p1)
    e += a.lo - p2
    q2 = (s + e) / b
    return DDReal(*_fast_two_sum(q1, q2))


def f_sub_dd(a: float, b: DDReal) -> DDReal:
    return dd_add_f(DDReal(-b.hi, -b.lo), a)


def dd_abs(a: DDReal) -> DDReal:
    return DDReal(-a.hi, -a.lo) if a.hi < 0.0 or (a.hi == 0.0 and a.lo < 0.0) else a


def dd_compare(a: DDReal, b: DDReal) -> int:
    """Total order on represented values: -1, 0, or 1."""
    d = dd_sub(a, b)
    if d.hi > 0.0 or (d.hi == 0.0 and d.lo > 0.0):
        return 1
    if d.hi < 0.0 or (d.hi == 0.0 and d.lo < 0.0):
        return -1
    return 0


def dd_arith(op: str, a: DDReal, b: DDReal | None = None) -> DDReal:
    """Dispatch by name: op in {add, sub, mul, div, sqrt}.

    sqrt is unary; the others require both operands.
    """
    if op == "sqrt":
        return dd_sqrt(a)
    if b is None:
        raise DomainError(f"operation {op!r} needs two operands")
    if op == "add":
        return dd_add(a, b)
    if op == "sub":
        return dd_sub(a, b)
    if op == "mul":
        return dd_mul(a, b)
    if op == "div":
        return dd_div(a, b)
    raise DomainError(f"unknown operation {op!r}")


def dd_to_float(a: DDReal) -> float:
    return a.hi


def dd_sum(values: Iterable[DDReal]) -> DDReal:
    acc = DD_ZERO
    for v in values:
        acc = dd_add(acc, v)
    return acc


# Pi family, hi/lo pairs of the correctly rounded binary64 leading term
# plus its correctly rounded remainder.
DD_PI = DDReal(3.141592653589793, 1.2246467991473532e-16)
DD_2PI = DDReal(6.283185307179586, 2.4492935982947064e-16)
DD_PI_2 = DDReal(1.5707963267948966, 6.123233995736766e-17)
DD_PI_4 = DDReal(0.7853981633974483, 3.061616997868383e-17)


def _sin_taylor(x: DDReal) -> DDReal:
    # |x| <= pi/4; terms fall below 1e-35 well before k = 20
    x2 = dd_sqr(x)
    term = x
    acc = x
    k = 1
    while abs(term.hi) > 1e-35 * abs(acc.hi) or k < 3:
        term = dd_mul(term, x2)
        term = dd_div_f(term, -float((2 * k) * (2 * k + 1)))
        acc = dd_add(acc, term)
        k += 1
        if k > 40:
            break
    return acc


def _cos_taylor(x: DDReal) -> DDReal:
    x2 = dd_sqr(x)
    term = DD_ONE
    acc = DD_ONE
    k = 1
    while abs(term.hi) > 1e-35 or k < 3:
        term = dd_mul(term, x2)
        term = dd_div_f(term, -float((2 * k - 1) * (2 * k)))
        acc = dd_add(acc, term)
        k += 1
        if k > 40:
            break
    return acc


def _reduce_pi2(x: DDReal) -> tuple[DDReal, int]:
    """x = y + q*(pi/2) with |y| <= pi/4 (+rounding); returns (y, q mod 4).

    Accurate for the moderate arguments used here (|x| within a few
    thousand); not a full Payne-Hanek reduction.
    """
    q = math.floor(x.hi / DD_PI_2.hi + 0.5)
    if q == 0:
        return x, 0
    y = dd_sub(x, dd_mul_f(DD_PI_2, float(q)))
    return y, q % 4


def dd_sin(x: DDReal) -> DDReal:
    y, q = _reduce_pi2(x)
    if q == 0:
        return _sin_taylor(y)
    if q == 1:
        return _cos_taylor(y)
    if q == 2:
        return dd_neg(_sin_taylor(y))
    return dd_neg(_cos_taylor(y))


def dd_cos(x: DDReal) -> DDReal:
    y, q = _reduce_pi2(x)
    if q == 0:
        return _cos_taylor(y)
    if q == 1:
        return dd_neg(_sin_taylor(y))
    if q == 2:
        return dd_neg(_cos_taylor(y))
    return _sin_taylor(y)


def _atan_taylor(t: DDReal) -> DDReal:
    # |t| < 0.1, series sum (-1)^k t^(2k+1)/(2k+1)
    t2 = dd_sqr(t)
    term = t
    acc = t
    k = 1
    while abs(term.hi) > 1e-35 * abs(acc.hi) or k < 3:
        term = dd_mul(term, t2)
        term = dd_neg(term)
        acc = dd_add(acc, dd_div_f(term, float(2 * k + 1)))
        k += 1
        if k > 60:
            break
    return acc


def dd_atan(t: DDReal) -> DDReal:
    neg = t.hi < 0.0 or (t.hi == 0.0 and t.lo < 0.0)
    if neg:
        t = dd_neg(t)
    invert = dd_compare(t, DD_ONE) > 0
    if invert:
        t = dd_div(DD_ONE, t)
    # three halvings: atan(t) = 2*atan(t / (1 + sqrt(1 + t^2)))
    for _ in range(3):
        t = dd_div(t, dd_add(DD_ONE, dd_sqrt(dd_add(DD_ONE, dd_sqr(t)))))
    r = dd_mul_f(_atan_taylor(t), 8.0)
    if invert:
        r = dd_sub(DD_PI_2, r)
    return dd_neg(r) if neg else r


def dd_atan2(y: DDReal, x: DDReal) -> DDReal:
    x_zero = x.hi == 0.0 and x.lo == 0.0
    y_zero = y.hi == 0.0 and y.lo == 0.0
    if x_zero and y_zero:
        raise DomainError("atan2(0, 0) undefined")
    if x_zero:
        return DD_PI_2 if y.hi > 0.0 or (y.hi == 0.0 and y.lo > 0.0) else dd_neg(DD_PI_2)
    base = dd_atan(dd_div(y, x))
    if x.hi > 0.0:
        return base
    if y_zero or y.hi > 0.0 or (y.hi == 0.0 and y.lo > 0.0):
        return dd_add(base, DD_PI)
    return dd_sub(base, DD_PI)


def dd_acos(x: DDReal) -> DDReal:
    one_minus = f_sub_dd(1.0, x)
    one_plus = dd_add_f(x, 1.0)
    if one_minus.hi < 0.0 or one_plus.hi < 0.0:
        raise DomainError("acos argument outside [-1, 1]")
    s = dd_sqrt(dd_mul(one_minus, one_plus))
    return dd_atan2(s, x)


def dd_asin(x: DDReal) -> DDReal:
    return dd_sub(DD_PI_2, dd_acos(x))
