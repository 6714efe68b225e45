"""Symmetric tridiagonal matrices with unit off-diagonals and strictly
increasing diagonal entries A_j = 2 + f_j.

The matrix class is represented by its diagonal profile alone; the unit
off-diagonals are implicit.  This module provides profile constructors,
matrix-vector products, Sturm sign-agreement counts, eigenvalue
brackets, and bit-exact profile serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DiagonalProfile",
    "TridiagMatrix",
    "SturmScan",
    "power_law_profile",
    "bessel_profile",
    "apply",
    "residual_inf",
    "sturm_count",
    "sign_agreements",
    "eigen_bounds",
    "save_profile_text",
    "load_profile_text",
    "save_profile_binary",
    "load_profile_binary",
]


@dataclass(frozen=True)
class DiagonalProfile:
    """The sequence f_1 < f_2 < ... < f_n defining the diagonal 2 + f_j.

    Strict positivity and strict monotonicity are enforced with zero
    tolerance.  Constant or non-positive profiles (used by tests for
    closed-form comparisons) must go through ``relaxed_for_tests``.
    """

    f: tuple[float, ...]
    relaxed: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(float(v) for v in self.f))
        if len(self.f) < 1:
            raise ValueError("empty profile")
        if not all(math.isfinite(v) for v in self.f):
            raise ValueError("profile entries must be finite")
        if self.relaxed:
            return
        if self.f[0] <= 0.0:
            raise ValueError("profile must be strictly positive")
        for a, b in zip(self.f, self.f[1:]):
            if b <= a:
                raise ValueError("profile must be strictly increasing")

    @classmethod
    def relaxed_for_tests(cls, f: Sequence[float]) -> "DiagonalProfile":
        """Skip monotonicity checks; only for closed-form test matrices."""
        return cls(tuple(float(v) for v in f), relaxed=True)

    @property
    def n(self) -> int:
        return len(self.f)


@dataclass(frozen=True)
class TridiagMatrix:
    """Profile-backed matrix; diag(j) = 2 + f_j, off-diagonals = 1."""

    profile: DiagonalProfile
    _diag: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_diag", tuple(2.0 + v for v in self.profile.f)
        )

    @property
    def n(self) -> int:
        return len(self._diag)

    def diagonal(self) -> tuple[float, ...]:
        """All diagonal entries (A_1, ..., A_n)."""
        return self._diag

    def diag_entry(self, j: int) -> float:
        """A_j, 1-based."""
        if not 1 <= j <= self.n:
            raise IndexError(f"diagonal index {j} outside 1..{self.n}")
        return self._diag[j - 1]


class SturmScan(NamedTuple):
    sigma: float
    agreements: int
    signs: tuple[int, ...]


def power_law_profile(a: float, c: float, n: int) -> DiagonalProfile:
    """f_j = (j/c)^a for j = 1..n; requires a >= 1, c >= 1, n >= 2."""
    if a < 1.0:
        raise ValueError(f"exponent a={a} below 1")
    if c < 1.0:
        raise ValueError(f"scale c={c} below 1")
    if n < 2:
        raise ValueError(f"dimension n={n} below 2")
    return DiagonalProfile(tuple((j / c) ** a for j in range(1, n + 1)))


def bessel_profile(x: float, N: int) -> DiagonalProfile:
    """f_j = 2j/x for j = 1..2N+1; the (2N+1)-dimensional profile."""
    if x <= 0.0:
        raise ValueError(f"argument x={x} must be positive")
    if N < 1:
        raise ValueError(f"half-dimension N={N} below 1")
    return DiagonalProfile(tuple(2.0 * j / x for j in range(1, 2 * N + 2)))


def apply(M: TridiagMatrix, v: Sequence[float]) -> np.ndarray:
    """Matrix-vector product M v."""
    v = np.asarray(v, dtype=np.float64)
    n = M.n
    if v.shape != (n,):
        raise ValueError(f"vector shape {v.shape} does not match n={n}")
    out = np.array(M.diagonal()) * v
    if n > 1:
        out[:-1] += v[1:]
        out[1:] += v[:-1]
    return out


def residual_inf(M: TridiagMatrix, lam: float, v: Sequence[float]) -> float:
    """max_j |(M v - lam v)_j| for a unit vector v."""
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"input vector norm {norm} is not 1 within 1e-12")
    return float(np.max(np.abs(apply(M, v) - lam * v)))


_STURM_TINY = 1e-300


def sturm_count(M: TridiagMatrix, sigma: float) -> SturmScan:
    """Sign-agreement count of the characteristic-polynomial sequence.

    agreements equals the number of eigenvalues strictly larger than
    sigma.  Uses the ratio form q_j = (A_j - sigma) - 1/q_{j-1}, which
    cannot overflow where the raw polynomial values would; an exact zero
    ratio is replaced by -1e-300, reproducing the convention that a zero
    entry takes the sign opposite to its predecessor.
    """
    diag = M.diagonal()
    agreements = 0
    signs = [1]
    q_prev = None
    for a in diag:
        q = (a - sigma) if q_prev is None else (a - sigma) - 1.0 / q_prev
        if q > 0.0:
            agreements += 1
            signs.append(signs[-1])
        else:
            signs.append(-signs[-1])
        if q == 0.0:
            q = -_STURM_TINY
        q_prev = q
    return SturmScan(sigma=float(sigma), agreements=agreements, signs=tuple(signs))


def sign_agreements(v: Sequence[float]) -> int:
    """Number of adjacent pairs with agreeing sign.

    A pair (a, b) agrees when ab > 0, or when a = 0 and b != 0; it
    disagrees when ab < 0 or b = 0.
    """
    v = list(v)
    if all(x == 0.0 for x in v):
        raise ValueError("zero vector has no sign pattern")
    count = 0
    for a, b in zip(v, v[1:]):
        if (a * b > 0.0) or (a == 0.0 and b != 0.0):
            count += 1
    return count


def eigen_bounds(M: TridiagMatrix, k: int) -> tuple[float, float]:
    """Open-below/closed-above bracket (lo, hi] containing lambda_k.

    lambda_k is the k-th smallest eigenvalue.  lo combines the constant
    -profile lower bound 2(1 - cos(pi k/(n+1))) with A_k - 2 = f_k; the
    upper bound is A_k + 2.
    """
    n = M.n
    if not 1 <= k <= n:
        raise IndexError(f"eigenvalue index {k} outside 1..{n}")
    a_k = M.diag_entry(k)
    lo = max(2.0 * (1.0 - math.cos(math.pi * k / (n + 1))), a_k - 2.0)
    return lo, a_k + 2.0


# ------------------------------------------------------------- serialization
#
# Text format: one coordinate per line, repr round-trip (shortest string
# that parses back to the identical binary64).  Binary format: raw
# little-endian float64 array.


def save_profile_text(profile: DiagonalProfile, path: str | Path) -> None:
    Path(path).write_text(
        "".join(f"{v!r}\n" for v in profile.f), encoding="ascii"
    )


def load_profile_text(path: str | Path, relaxed: bool = False) -> DiagonalProfile:
    values = tuple(
        float(line) for line in Path(path).read_text(encoding="ascii").split()
    )
    if relaxed:
        return DiagonalProfile.relaxed_for_tests(values)
    return DiagonalProfile(values)


def save_profile_binary(profile: DiagonalProfile, path: str | Path) -> None:
    np.asarray(profile.f, dtype="<f8").tofile(str(path))


def load_profile_binary(path: str | Path, relaxed: bool = False) -> DiagonalProfile:
    values = tuple(float(v) for v in np.fromfile(str(path), dtype="<f8"))
    if relaxed:
        return DiagonalProfile.relaxed_for_tests(values)
    return DiagonalProfile(values)
