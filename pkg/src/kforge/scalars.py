"""Exact Gaussian-rational arithmetic: complex numbers with rational parts.

Every computation in this package runs over this field so that all
identities downstream (splittings, equivariance, residuals) can be asserted
as exact equalities rather than tolerances.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction

from .errors import InputError

_RAT = r"[+-]?\d+(?:/\d+)?"
_PURE_IM = _re.compile(rf"^([+-]|{_RAT})?\s*\*?\s*i$")
_RE_PLUS_IM = _re.compile(rf"^({_RAT})\s*([+-])\s*((?:\d+(?:/\d+)?)?)\s*\*?\s*i$")


class GaussianRational:
    """An element of Q(i), stored as a pair of reduced Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = qi(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = qi(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return qi(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        other = qi(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = qi(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return qi(other) / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    # -- comparison / hashing --------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self):
        return not self

    # -- rendering --------------------------------------------------------

    def __repr__(self):
        return f"qi({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.im > 0:
            sign, mag = "+", self.im
        else:
            sign, mag = "-", -self.im
        unit = "i" if mag == 1 else f"{mag}i"
        if self.re == 0:
            return unit if sign == "+" else f"-{unit}"
        return f"{self.re}{sign}{unit}"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
HALF = GaussianRational(Fraction(1, 2))


def qi(value, im=None) -> GaussianRational:
    """Coerce ints / Fractions / GaussianRationals into the field."""
    if im is not None:
        return GaussianRational(value, im)
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")


def _fraction_from_string(text, path):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{path}: invalid rational {text!r}") from exc


def scalar_from_json(value, path="scalar") -> GaussianRational:
    """Decode the wire form: ["p/q", "r/s"], integer shorthand, or bare "p/q"."""
    if isinstance(value, bool):
        raise InputError(f"{path}: booleans are not scalars")
    if isinstance(value, int):
        return GaussianRational(value)
    if isinstance(value, str):
        return GaussianRational(_fraction_from_string(value, path))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InputError(f"{path}: scalar array must have exactly two entries")
        parts = []
        for k, part in enumerate(value):
            if isinstance(part, bool) or not isinstance(part, (int, str)):
                raise InputError(f"{path}[{k}]: expected integer or rational string")
            parts.append(part if isinstance(part, int) else _fraction_from_string(part, f"{path}[{k}]"))
        return GaussianRational(parts[0], parts[1])
    raise InputError(f"{path}: unrecognized scalar encoding {value!r}")


def scalar_to_json(value: GaussianRational):
    """Canonical wire form: two reduced-fraction strings, "/1" omitted."""
    return [str(value.re), str(value.im)]


def scalar_from_text(text: str) -> GaussianRational:
    """Parse human-entered scalars such as "3", "-1/2", "i", "1+i", "2-3/4i"."""
    s = text.strip()
    if not s:
        raise InputError("empty scalar")
    m = _PURE_IM.match(s)
    if m:
        coeff = m.group(1)
        if coeff in (None, "", "+"):
            return I
        if coeff == "-":
            return -I
        return GaussianRational(0, _fraction_from_string(coeff, "scalar"))
    m = _RE_PLUS_IM.match(s)
    if m:
        re_part = _fraction_from_string(m.group(1), "scalar")
        mag = _fraction_from_string(m.group(3), "scalar") if m.group(3) else Fraction(1)
        return GaussianRational(re_part, mag if m.group(2) == "+" else -mag)
    return GaussianRational(_fraction_from_string(s, "scalar"))
