"""
p-adic Scalars, Absolute Values and Mobius Transformations

Version: 1.0

Description:
    Exact arithmetic layer for points of the projective line with rational
    coordinates, read inside Q_p.

    - Valuations and absolute values are exact. An absolute value is a pair
      (prime, exponent) standing for prime ** exponent; exponents are rationals
      so that radii of discs over finite extensions can be represented.
    - Mobius transformations are 2x2 rational matrices up to scalar multiples.
    - Closed discs {x : |x - c|_p <= p^rho} with rational center and rational
      radius exponent rho.

    Floats never appear here except in p_power() for non-integral exponents.

Usage:
    m = Mobius.from_rows([[9, 0], [8, 1]], prime=3)
    mobius_apply(m, 2)             # ProjectivePoint(18/17)
    mobius_derivative_abs(m, 2)    # AbsValue(3, -2)
    Disc(2, -1, 3).contains(5)     # True
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

from scripts.errors import ConfigError, PoleError

Number = Union[Fraction, float]
RationalLike = Union[int, str, Fraction]

HYPERBOLIC = "hyperbolic"
NONHYPERBOLIC = "nonhyperbolic"


def as_fraction(x: RationalLike) -> Fraction:
    """
    Converts an integer, a Fraction or a "num/den" string to a Fraction.

    Raises:
        ConfigError: If x is a float or cannot be parsed.
    """
    if isinstance(x, bool) or isinstance(x, float):
        raise ConfigError(f"Expected an exact rational, got {x!r}")
    try:
        return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"Invalid rational {x!r}: {e}") from e


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def check_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise ConfigError(f"{p!r} is not a prime number")
    return p


def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(x: RationalLike, p: int) -> Union[int, float]:
    """Exact p-adic valuation of a rational; math.inf for zero."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    return _int_valuation(abs(x.numerator), p) - _int_valuation(x.denominator, p)


def p_power(p: int, exponent: Union[Fraction, int, float]) -> Number:
    """
    Returns p ** exponent, exactly as a Fraction when the exponent is an integer.

    Args:
        p (int): The prime.
        exponent: Rational exponent, or -inf (gives 0).
    """
    if exponent == -math.inf:
        return Fraction(0)
    if exponent == math.inf:
        return math.inf
    e = Fraction(exponent)
    if e.denominator == 1:
        return Fraction(p) ** int(e)
    return float(p) ** float(e)


@dataclass(frozen=True, order=True)
class AbsValue:
    """
    Exact p-adic absolute value prime ** exponent.

    The absolute value of zero has exponent -inf.
    """
    prime: int
    exponent: Union[Fraction, float]

    @classmethod
    def of(cls, x: RationalLike, p: int) -> "AbsValue":
        v = vp(x, p)
        return cls(p, -math.inf if v == math.inf else Fraction(-v))

    @property
    def is_zero(self) -> bool:
        return self.exponent == -math.inf

    def _same_prime(self, other: "AbsValue"):
        if self.prime != other.prime:
            raise ValueError(f"Cannot combine |.|_{self.prime} with |.|_{other.prime}")

    def __mul__(self, other: "AbsValue") -> "AbsValue":
        self._same_prime(other)
        if self.is_zero or other.is_zero:
            return AbsValue(self.prime, -math.inf)
        return AbsValue(self.prime, self.exponent + other.exponent)

    def __truediv__(self, other: "AbsValue") -> "AbsValue":
        self._same_prime(other)
        if other.is_zero:
            raise ZeroDivisionError("division by |0|")
        if self.is_zero:
            return self
        return AbsValue(self.prime, self.exponent - other.exponent)

    def __pow__(self, s: RationalLike) -> "AbsValue":
        s = Fraction(s)
        if self.is_zero:
            if s <= 0:
                raise ZeroDivisionError("|0| raised to a non-positive power")
            return self
        return AbsValue(self.prime, self.exponent * s)

    def value(self) -> Number:
        return p_power(self.prime, self.exponent)

    def __float__(self) -> float:
        return float(self.value())

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return f"{self.prime}^({self.exponent})"


@dataclass(frozen=True)
class PAdicScalar:
    """Exact rational number interpreted in Q_p."""
    value: Fraction
    prime: int

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        check_prime(self.prime)

    def _coerce(self, other) -> Fraction:
        if isinstance(other, PAdicScalar):
            if other.prime != self.prime:
                raise ValueError("Scalars over different primes")
            return other.value
        return as_fraction(other)

    def __add__(self, other):
        return PAdicScalar(self.value + self._coerce(other), self.prime)

    def __sub__(self, other):
        return PAdicScalar(self.value - self._coerce(other), self.prime)

    def __mul__(self, other):
        return PAdicScalar(self.value * self._coerce(other), self.prime)

    def __truediv__(self, other):
        return PAdicScalar(self.value / self._coerce(other), self.prime)

    def __neg__(self):
        return PAdicScalar(-self.value, self.prime)

    __radd__ = __add__
    __rmul__ = __mul__


def valuation(x: PAdicScalar) -> Union[int, float]:
    """Exact v_p(x); math.inf for x = 0."""
    return vp(x.value, x.prime)


def abs_p(x: PAdicScalar) -> AbsValue:
    """Exact |x|_p = p^(-v_p(x))."""
    return AbsValue.of(x.value, x.prime)


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of P^1(Q): a finite rational, or infinity when value is None."""
    value: Optional[Fraction] = None

    @classmethod
    def finite(cls, x: RationalLike) -> "ProjectivePoint":
        return cls(as_fraction(x))

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        return "inf" if self.is_infinity else str(self.value)


INFINITY = ProjectivePoint()


@dataclass(frozen=True, eq=False)
class Mobius:
    """
    Mobius transformation z -> (a z + b) / (c z + d) in PGL_2(Q_p).

    Equality and hashing are projective: matrices differing by a nonzero
    rational scalar compare equal.
    """
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    prime: int

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        check_prime(self.prime)
        if self.det == 0:
            raise ConfigError(f"Singular matrix {self.rows()}")

    @classmethod
    def identity(cls, prime: int) -> "Mobius":
        return cls(1, 0, 0, 1, prime)

    @classmethod
    def from_rows(cls, rows, prime: int) -> "Mobius":
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ConfigError(f"Expected a 2x2 matrix, got {rows!r}")
        (a, b), (c, d) = rows
        return cls(a, b, c, d, prime)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> Fraction:
        return self.a + self.d

    def __matmul__(self, other: "Mobius") -> "Mobius":
        """Composition: (self @ other)(z) = self(other(z))."""
        if other.prime != self.prime:
            raise ValueError("Mobius maps over different primes")
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.prime,
        )

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a, self.prime)

    @property
    def pole(self) -> ProjectivePoint:
        if self.c == 0:
            return INFINITY
        return ProjectivePoint(-self.d / self.c)

    def __call__(self, x: RationalLike) -> Fraction:
        """
        Image of a finite point that is not sent to infinity.

        Raises:
            PoleError: If x is the pole of the transformation.
        """
        x = Fraction(x)
        den = self.c * x + self.d
        if den == 0:
            raise PoleError(f"{x} is the pole of {self.rows()}")
        return (self.a * x + self.b) / den

    def _canonical(self):
        entries = (self.a, self.b, self.c, self.d)
        lead = next(e for e in entries if e != 0)
        return tuple(e / lead for e in entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mobius):
            return NotImplemented
        return self.prime == other.prime and self._canonical() == other._canonical()

    def __hash__(self) -> int:
        return hash((self.prime, self._canonical()))

    def __repr__(self) -> str:
        return f"Mobius([[{self.a}, {self.b}], [{self.c}, {self.d}]], p={self.prime})"


def _point(x) -> ProjectivePoint:
    if isinstance(x, ProjectivePoint):
        return x
    if isinstance(x, PAdicScalar):
        return ProjectivePoint(x.value)
    return ProjectivePoint.finite(x)


def mobius_apply(m: Mobius, x) -> ProjectivePoint:
    """Total action of m on P^1 with exact pole handling."""
    x = _point(x)
    if x.is_infinity:
        return INFINITY if m.c == 0 else ProjectivePoint(m.a / m.c)
    den = m.c * x.value + m.d
    if den == 0:
        return INFINITY
    return ProjectivePoint((m.a * x.value + m.b) / den)


def mobius_derivative_abs(m: Mobius, x) -> AbsValue:
    """
    Exact |m'(x)|_p = |det m|_p / |c x + d|_p^2.

    Raises:
        PoleError: If x is the pole of m.
    """
    x = x.value if isinstance(x, PAdicScalar) else as_fraction(x)
    den = m.c * x + m.d
    if den == 0:
        raise PoleError(f"{x} is the pole of {m!r}")
    return AbsValue.of(m.det, m.prime) / (AbsValue.of(den, m.prime) ** 2)


def classify(m: Mobius) -> str:
    """Hyperbolic iff v_p(tr^2 / det) < 0."""
    t = m.trace ** 2 / m.det
    if t == 0:
        return NONHYPERBOLIC
    return HYPERBOLIC if vp(t, m.prime) < 0 else NONHYPERBOLIC


@dataclass(frozen=True)
class Disc:
    """
    Closed disc {x : |x - center|_p <= p^radius}; `radius` is the exponent rho.
    """
    center: Fraction
    radius: Fraction
    prime: int

    def __post_init__(self):
        object.__setattr__(self, "center", as_fraction(self.center))
        object.__setattr__(self, "radius", as_fraction(self.radius))
        check_prime(self.prime)

    @property
    def diameter(self) -> AbsValue:
        return AbsValue(self.prime, self.radius)

    def contains(self, x: RationalLike) -> bool:
        return vp(Fraction(x) - self.center, self.prime) >= -self.radius

    def contains_open(self, x: RationalLike) -> bool:
        return vp(Fraction(x) - self.center, self.prime) > -self.radius

    def contains_disc(self, other: "Disc") -> bool:
        return other.radius <= self.radius and self.contains(other.center)

    def disjoint(self, other: "Disc") -> bool:
        return vp(self.center - other.center, self.prime) < -max(self.radius, other.radius)

    def same_as(self, other: "Disc") -> bool:
        """Set equality of closed discs."""
        return self.radius == other.radius and self.contains(other.center)

    def distance_to(self, other: "Disc") -> AbsValue:
        """Distance between any point of self and any point of a disjoint disc."""
        if not self.disjoint(other):
            raise ValueError(f"{self} and {other} are not disjoint")
        return AbsValue.of(self.center - other.center, self.prime)

    def __str__(self) -> str:
        return f"D({self.center}, {self.prime}^{self.radius})"
