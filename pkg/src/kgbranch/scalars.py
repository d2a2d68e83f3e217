"""Exact real scalars used by the interval models.

Two kinds of values flow through the package:

* ``Fraction`` -- every affine coordinate and every user-supplied endpoint.
* ``Surd`` -- a signed product ``s * p1**e1 * ... * pn**en`` over primes with
  rational exponents.  Images of rational points under monomial maps
  ``c*x**r`` live here, e.g. ``(1/4)**(1/4) = 2**(-1/2)``.

``Surd`` values that happen to be modest rationals are collapsed back to
``Fraction`` by :func:`normalize`, so a ``Surd`` instance never compares equal
to a small ``Fraction``.  Ordering is exact: the sign of
``sum(e_i * log p_i)`` is decided by integer arithmetic when the exponents are
small, and by rigorous interval arithmetic otherwise (the sum vanishes only
when every exponent does, because logarithms of distinct primes are linearly
independent over the rationals).

:class:`RadicalScalar` is the additive closure: a finite formal sum
``sum q_i * m_i`` where each ``m_i`` is a radical monomial with exponents in
``[0, 1)``.  Distinct such monomials are linearly independent over Q, so the
dictionary form is a normal form and equality is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

from mpmath import iv
from sympy import factorint

__all__ = [
    "Surd",
    "RadicalScalar",
    "UnsupportedArithmetic",
    "Real",
    "as_fraction",
    "normalize",
    "rcmp",
    "rpow",
    "rsign",
    "fmt",
    "parse_rational",
]

# results of at most this many bits are kept as Fraction
_FRACTION_BITS = 2048
# beyond this many bits the ordering test switches to interval arithmetic
_EXACT_CMP_BITS = 4096


class UnsupportedArithmetic(ArithmeticError):
    """The result would leave the closed class of representable scalars."""


@lru_cache(maxsize=4096)
def _factor_int(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


def _factor_fraction(q: Fraction) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for p, e in _factor_int(abs(q.numerator)):
        out[p] = out.get(p, Fraction(0)) + e
    for p, e in _factor_int(q.denominator):
        out[p] = out.get(p, Fraction(0)) - e
    return out


def _bits(exps) -> float:
    return sum(abs(e) * math.log2(p) for p, e in exps)


class Surd:
    __slots__ = ("sign", "exps", "_hash")

    def __init__(self, sign: int, exps=()):
        if sign == 0:
            exps = ()
        else:
            exps = tuple(sorted((p, Fraction(e)) for p, e in dict(exps).items() if e != 0))
        self.sign = int(sign)
        self.exps = exps
        self._hash = hash(("surd", self.sign, self.exps))

    @classmethod
    def of(cls, x) -> "Surd":
        if isinstance(x, Surd):
            return x
        return _surd_of_rational(Fraction(x))

    # -- structure ------------------------------------------------------
    def is_rational(self) -> bool:
        return all(e.denominator == 1 for _, e in self.exps)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise UnsupportedArithmetic(f"{self} is irrational")
        if _bits(self.exps) > 8 * _FRACTION_BITS:
            raise UnsupportedArithmetic(f"{self} is too large to expand")
        num, den = 1, 1
        for p, e in self.exps:
            if e > 0:
                num *= p ** int(e)
            else:
                den *= p ** int(-e)
        return Fraction(self.sign * num, den)

    def split(self) -> tuple[Fraction, tuple]:
        """Return ``(q, key)`` with ``self == q * radical(key)`` and key exponents in (0,1)."""
        rat: dict[int, Fraction] = {}
        rad = []
        for p, e in self.exps:
            fl = math.floor(e)
            if fl:
                rat[p] = Fraction(fl)
            if e != fl:
                rad.append((p, e - fl))
        q = Surd(self.sign, rat).to_fraction() if self.sign else Fraction(0)
        return q, tuple(rad)

    # -- arithmetic -----------------------------------------------------
    def __neg__(self):
        return normalize(Surd(-self.sign, self.exps))

    def __abs__(self):
        return normalize(Surd(abs(self.sign), self.exps))

    def __mul__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        o = Surd.of(other)
        if self.sign == 0 or o.sign == 0:
            return Fraction(0)
        exps = dict(self.exps)
        for p, e in o.exps:
            exps[p] = exps.get(p, Fraction(0)) + e
        return normalize(Surd(self.sign * o.sign, exps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self * _inverse(Surd.of(other))

    def __rtruediv__(self, other):
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return Surd.of(other) * _inverse(self)

    def __pow__(self, q):
        return rpow(self, q)

    def __add__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return _add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return _add(self, -Surd.of(other))

    def __rsub__(self, other):
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return _add(Surd.of(other), -self)

    # -- ordering -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Surd):
            return self.sign == other.sign and self.exps == other.exps
        if isinstance(other, (int, Fraction)):
            return rcmp(self, other) == 0
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return rcmp(self, other) < 0

    def __le__(self, other):
        return rcmp(self, other) <= 0

    def __gt__(self, other):
        return rcmp(self, other) > 0

    def __ge__(self, other):
        return rcmp(self, other) >= 0

    def __float__(self):
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(sum(float(e) * math.log(p) for p, e in self.exps))

    def __repr__(self):
        return f"Surd({fmt(self)})"

    def __str__(self):
        return fmt(self)


Real = Union[Fraction, Surd]


@lru_cache(maxsize=8192)
def _surd_of_rational(q: Fraction) -> Surd:
    if q == 0:
        return Surd(0)
    return Surd(1 if q > 0 else -1, _factor_fraction(q))


def _inverse(s: Surd) -> Surd:
    if s.sign == 0:
        raise ZeroDivisionError("division by zero")
    return Surd(s.sign, {p: -e for p, e in s.exps})


def normalize(x) -> Real:
    """Collapse a modest rational ``Surd`` into a ``Fraction``."""
    if type(x) is Fraction:
        return x
    if isinstance(x, Surd):
        if x.sign == 0:
            return Fraction(0)
        if x.is_rational() and _bits(x.exps) <= _FRACTION_BITS:
            return x.to_fraction()
        return x
    return Fraction(x)


def as_fraction(x) -> Fraction:
    x = normalize(x)
    if isinstance(x, Surd):
        raise UnsupportedArithmetic(f"{fmt(x)} is not a (small) rational")
    return x


def rsign(x) -> int:
    if isinstance(x, Surd):
        return x.sign
    return (x > 0) - (x < 0)


def _cmp_one(exps) -> int:
    """Sign of log(prod p**e), i.e. compare the positive number to 1."""
    if not exps:
        return 0
    if all(e > 0 for _, e in exps):
        return 1
    if all(e < 0 for _, e in exps):
        return -1
    den = 1
    for _, e in exps:
        den = den * e.denominator // math.gcd(den, e.denominator)
    if _bits(exps) * den <= _EXACT_CMP_BITS:
        big, small = 1, 1
        for p, e in exps:
            k = int(e * den)
            if k > 0:
                big *= p**k
            else:
                small *= p ** (-k)
        return (big > small) - (big < small)
    prec = 64
    while True:
        iv.prec = prec
        total = iv.mpf(0)
        for p, e in exps:
            total += iv.mpf(e.numerator) / e.denominator * iv.log(p)
        if total.a > 0:
            return 1
        if total.b < 0:
            return -1
        prec *= 2


def rcmp(a, b) -> int:
    """Exact three-way comparison of two reals."""
    if not isinstance(a, Surd) and not isinstance(b, Surd):
        return (a > b) - (a < b)
    sa, sb = rsign(a), rsign(b)
    if sa != sb:
        return (sa > sb) - (sa < sb)
    if sa == 0:
        return 0
    ea, eb = dict(Surd.of(a).exps), Surd.of(b).exps
    for p, e in eb:
        ea[p] = ea.get(p, Fraction(0)) - e
    c = _cmp_one(tuple((p, e) for p, e in ea.items() if e != 0))
    return c if sa > 0 else -c


def rpow(x, q) -> Real:
    """``x ** q`` for a rational exponent ``q`` (``x >= 0`` unless q is an integer)."""
    q = Fraction(q)
    if q == 0:
        return Fraction(1)
    if not isinstance(x, Surd) and q.denominator == 1:
        if x == 0 and q < 0:
            raise ZeroDivisionError("0 to a negative power")
        if abs(q) <= 64 and (x == 0 or abs(math.log2(abs(x.numerator) + 1) + math.log2(x.denominator)) * abs(q) < _FRACTION_BITS):
            return Fraction(x) ** int(q)
    s = Surd.of(x)
    if s.sign == 0:
        if q < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Fraction(0)
    sign = s.sign
    if sign < 0:
        if q.denominator != 1:
            raise UnsupportedArithmetic("fractional power of a negative number")
        sign = -1 if q.numerator % 2 else 1
    return normalize(Surd(sign, {p: e * q for p, e in s.exps}))


def _add(a, b) -> Real:
    a, b = normalize(a), normalize(b)
    if not isinstance(a, Surd) and not isinstance(b, Surd):
        return a + b
    sa, sb = Surd.of(a), Surd.of(b)
    if sa.sign == 0:
        return b
    if sb.sign == 0:
        return a
    qa, ka = sa.split()
    qb, kb = sb.split()
    if ka != kb:
        raise UnsupportedArithmetic(f"cannot add {fmt(a)} and {fmt(b)} exactly")
    return normalize(Surd.of(qa + qb) * Surd(1, ka)) if qa + qb else Fraction(0)


def fmt(x) -> str:
    """Canonical text form: ``p/q`` for rationals, ``c*2^(1/2)*3^(-1/4)`` for surds."""
    x = normalize(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    q, key = x.split() if _bits(x.exps) <= _FRACTION_BITS else (None, x.exps)
    parts = []
    if q is None:
        parts.append("-1" if x.sign < 0 else "1")
    elif q != 1:
        parts.append(fmt(q))
    for p, e in key:
        parts.append(f"{p}^({fmt(e)})")
    return "*".join(parts) if parts else "1"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


class RadicalScalar:
    """Finite formal sum of rational multiples of distinct radical monomials."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[key] = c
        self.terms: dict[tuple, Fraction] = clean
        self._hash = hash(frozenset(clean.items()))

    @classmethod
    def of(cls, x) -> "RadicalScalar":
        if isinstance(x, RadicalScalar):
            return x
        s = Surd.of(normalize(x))
        if s.sign == 0:
            return cls()
        q, key = s.split()
        return cls({key: q})

    @classmethod
    def sqrt(cls, x) -> "RadicalScalar":
        return cls.of(rpow(x, Fraction(1, 2)))

    def is_zero(self) -> bool:
        return not self.terms

    def as_real(self) -> Real:
        """The value as a single Surd; only for one-term sums."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) > 1:
            raise UnsupportedArithmetic(f"{self} is a sum of several radicals")
        (key, q), = self.terms.items()
        return Surd.of(q) * Surd(1, key)

    def power(self, q) -> "RadicalScalar":
        return RadicalScalar.of(rpow(self.as_real(), q))

    def __add__(self, other):
        other = RadicalScalar.of(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return RadicalScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return RadicalScalar({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-RadicalScalar.of(other))

    def __mul__(self, other):
        other = RadicalScalar.of(other)
        out: dict[tuple, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                q, key = Surd.of(Surd(1, k1) * Surd(1, k2)).split()
                out[key] = out.get(key, Fraction(0)) + c1 * c2 * q
        return RadicalScalar(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (RadicalScalar, Surd, int, Fraction)):
            return NotImplemented
        return self.terms == RadicalScalar.of(other).terms

    def __hash__(self):
        return self._hash

    def evaluate(self, prec: int = 64):
        """Rigorous interval enclosure (used only by tests as a cross-check)."""
        iv.prec = prec
        total = iv.mpf(0)
        for key, c in self.terms.items():
            term = iv.mpf(c.numerator) / c.denominator
            for p, e in key:
                term *= iv.exp(iv.mpf(e.numerator) / e.denominator * iv.log(p))
            total += term
        return total

    def __repr__(self):
        return f"RadicalScalar({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, c in sorted(self.terms.items()):
            parts.append(fmt(Surd.of(c) * Surd(1, key)))
        return " + ".join(parts)
