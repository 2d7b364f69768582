"""Exact scalars and Z2-grading bookkeeping shared by every other module.

Scalars live in Q(i) and are represented by :class:`GQ`.  A scalar may also
carry one factor of the odd parameter theta (:class:`GradedScalar`); two such
factors multiply to zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

__all__ = [
    "GQ",
    "Grade",
    "GradedScalar",
    "Check",
    "koszul_sign",
    "gq_arith",
    "as_gq",
    "parse_gq",
]


def _frac(x):
    # integral values are kept as int (much faster); everything else as Fraction
    if type(x) is int:
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or string")
    if isinstance(x, int):
        return int(x)
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f


class GQ:
    """Gaussian rational re + im*i with arbitrary-precision parts (int or Fraction)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    # construction helpers
    @staticmethod
    def i() -> "GQ":
        return GQ(0, 1)

    @staticmethod
    def one() -> "GQ":
        return GQ(1)

    @staticmethod
    def zero() -> "GQ":
        return GQ(0)

    # predicates
    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self) -> bool:
        return not self.is_zero()

    # ring operations
    def __add__(self, other):
        o = as_gq(other)
        if o is None:
            return NotImplemented
        return _mk(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_gq(other)
        if o is None:
            return NotImplemented
        return _mk(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = as_gq(other)
        if o is None:
            return NotImplemented
        return GQ(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = as_gq(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return _mk(self.re * o.re, 0)
        return _mk(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __pos__(self):
        return self

    def conj(self) -> "GQ":
        return GQ(self.re, -self.im)

    def norm2(self):
        return self.re * self.re + self.im * self.im

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("GQ is a ring; negative powers are not provided")
        out = GQ(1)
        for _ in range(n):
            out = out * self
        return out

    # comparison / hashing
    def __eq__(self, other):
        o = as_gq(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GQ({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return "i" if self.im == 1 else ("-i" if self.im == -1 else f"{self.im}i")
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))


def _mk(re, im) -> GQ:
    # results of ring operations; normalize integral Fractions back to int
    g = GQ.__new__(GQ)
    g.re = re.numerator if type(re) is Fraction and re.denominator == 1 else re
    g.im = im.numerator if type(im) is Fraction and im.denominator == 1 else im
    return g


def as_gq(x) -> GQ | None:
    """Coerce ints, Fractions and GQ to GQ; anything else gives None."""
    if isinstance(x, GQ):
        return x
    if isinstance(x, (int, Fraction)):
        return GQ(x)
    return None


def parse_gq(text: str | int) -> GQ:
    """Parse strings like ``"3/2"``, ``"-i/2"``, ``"1/2+3i"``, ``"2-i"``."""
    if isinstance(text, int):
        return GQ(text)
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if "i" not in s:
        return GQ(Fraction(s))
    # split real and imaginary part at the last sign that is not leading
    cut = max(s.rfind("+", 1), s.rfind("-", 1))
    while cut > 0 and s[cut - 1] in "eE/":
        cut = max(s.rfind("+", 1, cut), s.rfind("-", 1, cut))
    re_part, im_part = ("0", s) if cut <= 0 else (s[:cut], s[cut:])
    if "i" in re_part:
        re_part, im_part = im_part, re_part
    im_part = im_part.replace("*", "")
    num, _, den = im_part.partition("/")
    num = num.replace("i", "")
    if num in ("", "+"):
        num = "1"
    elif num == "-":
        num = "-1"
    im = Fraction(num) / Fraction(den or 1)
    return GQ(Fraction(re_part) if re_part else 0, im)


def gq_arith(a: GQ, b: GQ | None, op: str) -> GQ:
    """Dispatch a named ring operation: add, mul, neg or conj."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "conj":
        return a.conj()
    if op in ("div", "truediv"):
        raise ValueError("division is not provided; Gaussian rationals are used as a ring")
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class Grade:
    """Element of Z2."""

    parity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "parity", self.parity % 2)

    def __add__(self, other):
        return Grade(self.parity + _parity(other))

    __radd__ = __add__

    def __int__(self):
        return self.parity

    def __index__(self):
        return self.parity

    @property
    def odd(self) -> bool:
        return self.parity == 1


EVEN = Grade(0)
ODD = Grade(1)


def _parity(g) -> int:
    return g.parity if isinstance(g, Grade) else int(g) % 2


def koszul_sign(left: Iterable, right: Iterable) -> int:
    """Sign picked up when moving the block ``right`` past the block ``left``."""
    sl = sum(_parity(g) for g in left) % 2
    sr = sum(_parity(g) for g in right) % 2
    return -1 if sl and sr else 1


@dataclass(frozen=True)
class GradedScalar:
    """``value`` or ``value * theta``; theta is odd and squares to zero."""

    value: GQ
    theta: bool = False

    @property
    def grade(self) -> Grade:
        return ODD if self.theta else EVEN

    def __add__(self, other: "GradedScalar") -> "GradedScalar":
        if self.value.is_zero():
            return other
        if other.value.is_zero():
            return self
        if self.theta != other.theta:
            raise ValueError("cannot add scalars of different theta content")
        return GradedScalar(self.value + other.value, self.theta)

    def __mul__(self, other: "GradedScalar") -> "GradedScalar":
        if self.theta and other.theta:
            return GradedScalar(GQ(0), False)
        return GradedScalar(self.value * other.value, self.theta or other.theta)

    def __neg__(self):
        return GradedScalar(-self.value, self.theta)

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def __str__(self):
        return f"{self.value}*theta" if self.theta else str(self.value)


class Check(NamedTuple):
    """One line of a verification report."""

    name: str
    passed: bool
    witness: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}
