"""Tests for the double-double layer.

The heavy check compares a million random add/mul results against
gmpy2's binary128-significand floats; the rest are invariant and
identity checks plus trig verification against mpmath.
"""

import math
import random
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiag_hira.ddreal import (
    DD_2PI,
    DD_ONE,
    DD_PI,
    DD_PI_2,
    DD_PI_4,
    DD_ZERO,
    DDReal,
    dd,
    dd_abs,
    dd_acos,
    dd_add,
    dd_add_f,
    dd_arith,
    dd_asin,
    dd_atan,
    dd_atan2,
    dd_compare,
    dd_cos,
    dd_div,
    dd_mul,
    dd_neg,
    dd_sin,
    dd_sqr,
    dd_sqrt,
    dd_sub,
    dd_to_float,
)
from tridiag_hira.errors import DomainError


def mp(a: DDReal) -> mpmath.mpf:
    return mpmath.mpf(a.hi) + mpmath.mpf(a.lo)


def rel_err_mp(a: DDReal, exact) -> float:
    with mpmath.workdps(60):
        e = mpmath.mpf(exact)
        if e == 0:
            return float(abs(mp(a)))
        return float(abs((mp(a) - e) / e))


def random_dd(rnd: random.Random, max_exp: int = 20) -> DDReal:
    hi = rnd.uniform(-1.0, 1.0) * 10.0 ** rnd.randint(-max_exp, max_exp)
    lo = hi * rnd.uniform(-1.0, 1.0) * 2.0**-53
    return dd_add_f(dd(hi), lo)


# ---------------------------------------------------------------- exact cases


def test_add_small_tail_exact():
    r = dd_add(dd(1.0), dd(2.0**-60))
    assert r.hi == 1.0
    assert r.lo == 2.0**-60


def test_cancellation_against_integer_arithmetic():
    r = dd_sub(dd_add(dd(float(10**16)), DD_ONE), dd(float(10**16)))
    assert (r.hi, r.lo) == (float((10**16 + 1) - 10**16), 0.0)
    assert r.hi == 1.0


def test_mul_by_one_is_identity():
    rnd = random.Random(7)
    for _ in range(50):
        x = random_dd(rnd)
        assert dd_mul(x, DD_ONE) == x


def test_dispatcher_routes_all_ops():
    a, b = dd(9.0), dd(4.0)
    assert dd_arith("add", a, b) == dd_add(a, b)
    assert dd_arith("sub", a, b) == dd_sub(a, b)
    assert dd_arith("mul", a, b) == dd_mul(a, b)
    assert dd_arith("div", a, b) == dd_div(a, b)
    assert dd_arith("sqrt", a) == dd(3.0)
    with pytest.raises(DomainError):
        dd_arith("pow", a, b)
    with pytest.raises(DomainError):
        dd_arith("add", a)


def test_domain_errors():
    with pytest.raises(DomainError):
        dd_div(DD_ONE, DD_ZERO)
    with pytest.raises(DomainError):
        dd_sqrt(dd(-2.0))
    with pytest.raises(DomainError):
        dd_acos(dd(1.0000001))
    with pytest.raises(DomainError):
        dd_atan2(DD_ZERO, DD_ZERO)


def test_compare_ordering():
    one_plus = dd_add(DD_ONE, dd(2.0**-60))
    one_minus = dd_sub(DD_ONE, dd(2.0**-60))
    assert dd_compare(one_plus, DD_ONE) == 1
    assert dd_compare(one_minus, DD_ONE) == -1
    assert dd_compare(one_plus, one_plus) == 0
    assert dd_compare(dd(-3.0), dd(2.0)) == -1


def test_helpers():
    assert dd_abs(dd(-2.5)) == dd(2.5)
    assert dd_neg(dd(2.5)) == dd(-2.5)
    assert dd_to_float(dd_add(dd(0.5), dd(2.0**-80))) == 0.5
    big = dd(10**40)
    assert rel_err_mp(big, 10**40) < 1e-30


# ------------------------------------------------------- 128-bit float oracle


def test_add_mul_against_binary128_oracle():
    """10^6 random pairs: add and mul match gmpy2 at 128-bit significand."""
    n_pairs = 10**6
    tol = gmpy2.mpfr("1e-30")
    rnd = random.Random(20260816)
    with gmpy2.context(precision=128):
        worst = gmpy2.mpfr(0)
        for _ in range(n_pairs):
            a = random_dd(rnd)
            b = random_dd(rnd)
            am = gmpy2.mpfr(a.hi) + gmpy2.mpfr(a.lo)
            bm = gmpy2.mpfr(b.hi) + gmpy2.mpfr(b.lo)
            s = dd_add(a, b)
            p = dd_mul(a, b)
            s_ref = am + bm
            p_ref = am * bm
            if s_ref != 0:
                err = abs((gmpy2.mpfr(s.hi) + gmpy2.mpfr(s.lo)) / s_ref - 1)
                if err > worst:
                    worst = err
            if p_ref != 0:
                err = abs((gmpy2.mpfr(p.hi) + gmpy2.mpfr(p.lo)) / p_ref - 1)
                if err > worst:
                    worst = err
        assert worst <= tol, f"worst relative error {worst}"


def test_div_sqrt_against_binary128_oracle():
    n_pairs = 10**4
    rnd = random.Random(11)
    with gmpy2.context(precision=128):
        for _ in range(n_pairs):
            a = random_dd(rnd)
            b = random_dd(rnd)
            if b.hi == 0.0:
                continue
            q = dd_div(a, b)
            am = gmpy2.mpfr(a.hi) + gmpy2.mpfr(a.lo)
            bm = gmpy2.mpfr(b.hi) + gmpy2.mpfr(b.lo)
            q_ref = am / bm
            if q_ref != 0:
                err = abs((gmpy2.mpfr(q.hi) + gmpy2.mpfr(q.lo)) / q_ref - 1)
                assert err <= gmpy2.mpfr("1e-30")
            aa = dd_abs(a)
            r = dd_sqrt(aa)
            r_ref = gmpy2.sqrt(abs(am))
            if r_ref != 0:
                err = abs((gmpy2.mpfr(r.hi) + gmpy2.mpfr(r.lo)) / r_ref - 1)
                assert err <= gmpy2.mpfr("1e-30")


# ------------------------------------------------------------------ invariants

finite = st.floats(
    allow_nan=False,
    allow_infinity=False,
    allow_subnormal=False,
    min_value=-1e120,
    max_value=1e120,
)
tails = st.floats(
    allow_nan=False,
    allow_infinity=False,
    allow_subnormal=False,
    min_value=-1.0,
    max_value=1.0,
)


def canonical(hi: float, frac: float) -> DDReal:
    return dd_add_f(dd(hi), hi * frac * 2.0**-53)


def assert_nonoverlap(r: DDReal):
    if r.hi == 0.0:
        assert r.lo == 0.0
    else:
        assert abs(r.lo) <= math.ulp(r.hi) / 2.0


@settings(max_examples=300, deadline=None)
@given(finite, tails, finite, tails)
def test_nonoverlap_after_add_sub_mul(ah, af, bh, bf):
    a = canonical(ah, af)
    b = canonical(bh, bf)
    assert_nonoverlap(dd_add(a, b))
    assert_nonoverlap(dd_sub(a, b))
    assert_nonoverlap(dd_mul(a, b))
    assert_nonoverlap(dd_sqr(a))


@settings(max_examples=300, deadline=None)
@given(finite, tails, finite, tails)
def test_nonoverlap_after_div_sqrt(ah, af, bh, bf):
    a = canonical(ah, af)
    b = canonical(bh, bf)
    if b.hi != 0.0 and abs(b.hi) > 1e-100:
        assert_nonoverlap(dd_div(a, b))
    assert_nonoverlap(dd_sqrt(dd_abs(a)))


@settings(max_examples=300, deadline=None)
@given(finite, tails, finite, tails)
def test_compare_is_antisymmetric_and_consistent(ah, af, bh, bf):
    a = canonical(ah, af)
    b = canonical(bh, bf)
    c = dd_compare(a, b)
    assert c == -dd_compare(b, a)
    # exact rational arithmetic as the ordering reference
    av = Fraction(a.hi) + Fraction(a.lo)
    bv = Fraction(b.hi) + Fraction(b.lo)
    if c == 0:
        assert av == bv
    else:
        assert (av > bv) == (c == 1)


@settings(max_examples=200, deadline=None)
@given(finite, tails)
def test_sub_self_is_zero(ah, af):
    a = canonical(ah, af)
    assert dd_sub(a, a) == DD_ZERO


# ------------------------------------------------------------------------ trig


def test_pi_constants_match_mpmath():
    with mpmath.workdps(50):
        assert abs(mp(DD_PI) - mpmath.pi) < mpmath.mpf("1e-32")
        assert abs(mp(DD_2PI) - 2 * mpmath.pi) < mpmath.mpf("1e-31")
        assert abs(mp(DD_PI_2) - mpmath.pi / 2) < mpmath.mpf("1e-32")
        assert abs(mp(DD_PI_4) - mpmath.pi / 4) < mpmath.mpf("1e-32")


def test_sin_cos_against_mpmath():
    rnd = random.Random(3)
    with mpmath.workdps(50):
        for _ in range(300):
            x = rnd.uniform(-8.0, 8.0)
            xd = dd_add_f(dd(x), rnd.uniform(-1, 1) * x * 2.0**-55)
            xe = mp(xd)
            s, c = dd_sin(xd), dd_cos(xd)
            assert abs(mp(s) - mpmath.sin(xe)) < mpmath.mpf("1e-30")
            assert abs(mp(c) - mpmath.cos(xe)) < mpmath.mpf("1e-30")
            ident = dd_add(dd_sqr(s), dd_sqr(c))
            assert abs(mp(ident) - 1) < mpmath.mpf("1e-30")


def test_sin_small_angle_relative_accuracy():
    with mpmath.workdps(50):
        for x in (1e-3, 1e-6, 1e-9, 0.05):
            s = dd_sin(dd(x))
            assert rel_err_mp(s, mpmath.sin(mpmath.mpf(x))) < 1e-29


def test_atan_atan2_against_mpmath():
    rnd = random.Random(4)
    with mpmath.workdps(50):
        for _ in range(300):
            y = rnd.uniform(-1, 1) * 10.0 ** rnd.randint(-6, 6)
            x = rnd.uniform(-1, 1) * 10.0 ** rnd.randint(-6, 6)
            if x == 0.0:
                continue
            r = dd_atan2(dd(y), dd(x))
            exact = mpmath.atan2(mpmath.mpf(y), mpmath.mpf(x))
            assert abs(mp(r) - exact) < mpmath.mpf("1e-30")
        assert rel_err_mp(dd_atan(dd(1.0)), mpmath.pi / 4) < 1e-30
        assert abs(mp(dd_atan2(DD_ONE, DD_ZERO)) - mpmath.pi / 2) < mpmath.mpf("1e-31")


def test_acos_asin_against_mpmath():
    rnd = random.Random(5)
    with mpmath.workdps(50):
        for _ in range(300):
            u = rnd.uniform(-1.0, 1.0)
            r = dd_acos(dd(u))
            exact = mpmath.acos(mpmath.mpf(u))
            assert abs(mp(r) - exact) < mpmath.mpf("1e-30")
            assert abs(mp(dd_asin(dd(u))) - mpmath.asin(mpmath.mpf(u))) < mpmath.mpf(
                "1e-30"
            )
        # endpoint and near-endpoint behavior
        assert dd_acos(dd(1.0)) == DD_ZERO
        assert rel_err_mp(dd_acos(dd(-1.0)), mpmath.pi) < 1e-30
        u = 1.0 - 2.0**-40
        assert rel_err_mp(dd_acos(dd(u)), mpmath.acos(mpmath.mpf(u))) < 1e-29


def test_acos_cos_roundtrip_relative():
    # angles spread over (0, pi); cos then acos must return the angle
    with mpmath.workdps(50):
        for k in range(1, 200):
            theta = dd_div(dd_mul(DD_PI, dd(float(k))), dd(200.0))
            back = dd_acos(dd_cos(theta))
            assert rel_err_mp(back, mp(theta)) < 1e-28
