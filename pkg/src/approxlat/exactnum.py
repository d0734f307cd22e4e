"""Exact arithmetic in Z[sqrt(D)] and Z[1/p].

Every order decision here is made with integer arithmetic only. Floats are
produced solely by the ``__float__`` helpers used for report output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import numpy as np

from .errors import SchemeError

Rational = Fraction

SQUAREFREE_LIMIT = 10**6


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    return Fraction(x)


def round_up(r, den: int = 10**9) -> Fraction:
    """Smallest multiple of 1/den that is >= r (keeps margins short)."""
    r = as_fraction(r)
    return Fraction(-((-r.numerator * den) // r.denominator), den)


def is_squarefree(D: int) -> bool:
    if D < 2:
        return False
    if D > SQUAREFREE_LIMIT:
        raise SchemeError(f"D={D} exceeds the square-free validation limit {SQUAREFREE_LIMIT}")
    d = 2
    while d * d <= D:
        if D % (d * d) == 0:
            return False
        d += 1
    return True


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_D(D: int) -> int:
    if not isinstance(D, (int, np.integer)) or not is_squarefree(int(D)):
        raise SchemeError(f"D must be a square-free integer >= 2, got {D!r}")
    return int(D)


def check_p(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise SchemeError(f"p must be prime, got {p!r}")
    return int(p)


def _sgn(x: int) -> int:
    return (x > 0) - (x < 0)


def quad_sign(a: int, b: int, D: int) -> int:
    """Sign of a + b*sqrt(D) for integers a, b and non-square D."""
    sa, sb = _sgn(a), _sgn(b)
    if sa == sb:
        return sa
    dom = _sgn(a * a - D * b * b)
    if dom > 0:
        return sa
    if dom < 0:
        return sb
    return 0


def floor_mul_sqrt(n: int, D: int) -> int:
    """floor(n * sqrt(D))."""
    r = math.isqrt(D * n * n)
    if n >= 0:
        return r
    # n*sqrt(D) = -sqrt(D n^2) is irrational unless n == 0
    return -r - 1


def sqrt_bounds(D: int, digits: int = 18) -> tuple[Fraction, Fraction]:
    """Rational lo < sqrt(D) < hi with hi - lo = 10**-digits."""
    scale = 10**digits
    r = math.isqrt(D * scale * scale)
    return Fraction(r, scale), Fraction(r + 1, scale)


@total_ordering
@dataclass(frozen=True, slots=True)
class QuadInt:
    """m + n*sqrt(D) in Z[sqrt(D)]."""

    m: int
    n: int
    D: int

    def _check(self, other: QuadInt) -> None:
        if self.D != other.D:
            raise SchemeError(f"mismatched D: {self.D} vs {other.D}")

    def _coerce(self, other) -> QuadInt:
        if isinstance(other, QuadInt):
            self._check(other)
            return other
        if isinstance(other, (int, np.integer)):
            return QuadInt(int(other), 0, self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.m + o.m, self.n + o.n, self.D)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.m - o.m, self.n - o.n, self.D)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.m, -self.n, self.D)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.m * o.m + self.D * self.n * o.n, self.m * o.n + self.n * o.m, self.D)

    __rmul__ = __mul__

    def star(self) -> QuadInt:
        return QuadInt(self.m, -self.n, self.D)

    def norm(self) -> int:
        return self.m * self.m - self.D * self.n * self.n

    def sign(self) -> int:
        return quad_sign(self.m, self.n, self.D)

    def __abs__(self) -> QuadInt:
        return -self if self.sign() < 0 else self

    def cmp_rational(self, r) -> int:
        """Sign of self - r for rational r."""
        r = as_fraction(r)
        q, p = r.denominator, r.numerator
        return quad_sign(q * self.m - p, q * self.n, self.D)

    def __lt__(self, other) -> bool:
        if isinstance(other, QuadInt):
            return (self - other).sign() < 0
        if isinstance(other, (int, Fraction)):
            return self.cmp_rational(other) < 0
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadInt):
            return (self.m, self.n, self.D) == (other.m, other.n, other.D)
        if isinstance(other, (int, Fraction)):
            return self.n == 0 and self.m == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.m, self.n, self.D))

    def __float__(self) -> float:
        return self.m + self.n * math.sqrt(self.D)

    def abs_upper(self) -> Fraction:
        """A rational upper bound on |self|, tight to about 1e-18 * |n|."""
        lo, hi = sqrt_bounds(self.D)
        v = self.m + self.n * lo
        return abs(v) + abs(self.n) * (hi - lo)

    def coords(self) -> tuple[int, int]:
        return (self.m, self.n)

    def __repr__(self) -> str:
        sgn = "+" if self.n >= 0 else "-"
        return f"({self.m}{sgn}{abs(self.n)}√{self.D})"


def quad_add(x: QuadInt, y: QuadInt) -> QuadInt:
    return x + y


def quad_mul(x: QuadInt, y: QuadInt) -> QuadInt:
    return x * y


def quad_star(x: QuadInt) -> QuadInt:
    return x.star()


def quad_abs_leq(x: QuadInt, r) -> bool:
    """Exact test |m + n sqrt(D)| <= r."""
    r = as_fraction(r)
    if r < 0:
        raise SchemeError("radius must be non-negative")
    q, p = r.denominator, r.numerator
    return (quad_sign(q * x.m - p, q * x.n, x.D) <= 0
            and quad_sign(q * x.m + p, q * x.n, x.D) >= 0)


def quad_abs_lt(x: QuadInt, r) -> bool:
    r = as_fraction(r)
    if r < 0:
        raise SchemeError("radius must be non-negative")
    q, p = r.denominator, r.numerator
    return (quad_sign(q * x.m - p, q * x.n, x.D) < 0
            and quad_sign(q * x.m + p, q * x.n, x.D) > 0)


def vp(a: int, p: int) -> int:
    """p-adic valuation of a nonzero integer by trial division."""
    if a == 0:
        raise ValueError("valuation of 0")
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@total_ordering
@dataclass(frozen=True, slots=True)
class PadicRat:
    """a / p**k in Z[1/p], kept canonical: k == 0 or p does not divide a."""

    a: int
    k: int
    p: int

    def __post_init__(self):
        if self.k < 0:
            raise SchemeError("exponent k must be non-negative")
        a, k = self.a, self.k
        if a == 0:
            k = 0
        while k > 0 and a % self.p == 0:
            a //= self.p
            k -= 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_fraction(cls, x, p: int) -> PadicRat:
        x = as_fraction(x)
        den = x.denominator
        k = 0
        while den % p == 0:
            den //= p
            k += 1
        if den != 1:
            raise SchemeError(f"{x} is not in Z[1/{p}]")
        return cls(x.numerator, k, p)

    def _coerce(self, other) -> PadicRat:
        if isinstance(other, PadicRat):
            if other.p != self.p:
                raise SchemeError(f"mismatched p: {self.p} vs {other.p}")
            return other
        if isinstance(other, (int, np.integer)):
            return PadicRat(int(other), 0, self.p)
        return NotImplemented

    def at_exponent(self, K: int) -> int:
        """Numerator of self over p**K; requires K >= k."""
        if K < self.k:
            raise ValueError("exponent too small")
        return self.a * self.p ** (K - self.k)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        K = max(self.k, o.k)
        return PadicRat(self.at_exponent(K) + o.at_exponent(K), K, self.p)

    __radd__ = __add__

    def __neg__(self) -> PadicRat:
        return PadicRat(-self.a, self.k, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicRat(self.a * o.a, self.k + o.k, self.p)

    __rmul__ = __mul__

    def val(self) -> float | int:
        if self.a == 0:
            return math.inf
        return vp(self.a, self.p) - self.k

    def level(self) -> int | None:
        """-v_p(x), i.e. |x|_p = p**level; None for zero."""
        if self.a == 0:
            return None
        return -self.val()

    def to_fraction(self) -> Fraction:
        return Fraction(self.a, self.p**self.k)

    def arch_abs(self) -> Fraction:
        return abs(self.to_fraction())

    def __lt__(self, other) -> bool:
        if isinstance(other, PadicRat):
            return self.to_fraction() < other.to_fraction()
        return NotImplemented

    def __float__(self) -> float:
        return self.a / self.p**self.k

    def coords(self) -> tuple[int, int]:
        return (self.a, self.k)

    def __repr__(self) -> str:
        return f"{self.a}/{self.p}^{self.k}"


def padic_add(x: PadicRat, y: PadicRat) -> PadicRat:
    return x + y


def padic_mul(x: PadicRat, y: PadicRat) -> PadicRat:
    return x * y


def padic_val(x: PadicRat):
    return x.val()


def arch_abs(x: PadicRat) -> Fraction:
    return x.arch_abs()
