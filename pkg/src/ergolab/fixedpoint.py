"""Exact dyadic fixed-point scalars.

Every real input (polynomial coefficient, rotation frequency, flow time,
suspension height) is quantized once, at construction, to the grid 2**-64.
After that all arithmetic is exact: sums and differences stay dyadic,
products of two scalars live on a finer dyadic grid, and floor/fractional
part reduce to integer operations.  That is what lets identities such as
``[x + {y}] + [y] == [x + y]`` hold bit-for-bit in tests instead of
"up to epsilon".

A value is stored as ``numer / 2**shift`` with ``numer`` a Python integer.
Construction from a decimal string or a named constant rounds to the nearest
multiple of 2**-64 (ties away from zero) and records whether the rounding was
exact; the ``exact`` flag is what downstream code uses to decide whether a
coefficient counts as "declared rational" (e.g. for periodicity of fractional
parts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

FRAC_BITS = 64
#: Quantization unit 2**-64.
ULP = Fraction(1, 1 << FRAC_BITS)

#: Hard cap on numerator size; anything beyond this is a construction error
#: upstream (e.g. an iterate magnitude outside the declared headroom).
HEADROOM_BITS = 1024


class HeadroomError(ArithmeticError):
    """An exact computation would exceed the declared integer headroom."""


def _quantize(value: Fraction) -> tuple[int, bool]:
    """Round ``value`` to the nearest multiple of 2**-64.

    Returns ``(raw, exact)`` where ``raw`` is the integer numerator over
    2**64 and ``exact`` tells whether no rounding occurred.  Ties round away
    from zero, which keeps the map odd: q(-x) == -q(x).
    """
    num = value.numerator << FRAC_BITS
    den = value.denominator
    q, r = divmod(abs(num), den)
    if 2 * r >= den:
        q += 1
    raw = q if num >= 0 else -q
    return raw, r == 0


def _constant_raw(name: str) -> int:
    if name in ("sqrt2", "sqrt3", "sqrt5", "sqrt6"):
        radicand = int(name[4:])
        return math.isqrt(radicand << (2 * FRAC_BITS))
    if name == "phi":
        return ((1 << FRAC_BITS) + math.isqrt(5 << (2 * FRAC_BITS))) // 2
    if name in ("pi", "e"):
        with mpmath.workprec(4 * FRAC_BITS):
            x = mpmath.pi if name == "pi" else mpmath.e
            return int(mpmath.floor(x * (1 << FRAC_BITS) + mpmath.mpf("0.5")))
    raise ValueError(f"unknown named constant {name!r}")


@dataclass(frozen=True, order=False)
class FixedReal:
    """A dyadic rational ``numer / 2**shift``, normalized so that either
    ``shift == 0`` or ``numer`` is odd.  Immutable and totally ordered."""

    numer: int
    shift: int
    exact: bool = field(default=True, compare=False)

    # -- constructors -------------------------------------------------

    @staticmethod
    def _make(numer: int, shift: int, exact: bool = True) -> "FixedReal":
        if numer.bit_length() > HEADROOM_BITS:
            raise HeadroomError(
                f"fixed-point numerator needs {numer.bit_length()} bits "
                f"(limit {HEADROOM_BITS})"
            )
        while shift > 0 and numer % 2 == 0:
            numer //= 2
            shift -= 1
        if numer == 0:
            shift = 0
        return FixedReal(numer, shift, exact)

    @classmethod
    def from_raw64(cls, raw: int) -> "FixedReal":
        """Value ``raw / 2**64``, exact by definition."""
        return cls._make(raw, FRAC_BITS)

    @classmethod
    def from_int(cls, value: int) -> "FixedReal":
        return cls._make(value, 0)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "FixedReal":
        raw, exact = _quantize(value)
        return cls._make(raw, FRAC_BITS, exact)

    @classmethod
    def from_decimal(cls, text: str) -> "FixedReal":
        """Parse a decimal string (e.g. "0.5", "-3", "1/3") or a named
        constant ("sqrt2", "sqrt3", "sqrt5", "sqrt6", "phi", "e", "pi")."""
        text = text.strip()
        if text in ("sqrt2", "sqrt3", "sqrt5", "sqrt6", "phi", "e", "pi"):
            return cls._make(_constant_raw(text), FRAC_BITS, exact=False)
        return cls.from_fraction(Fraction(text))

    @classmethod
    def from_float(cls, value: float) -> "FixedReal":
        return cls.from_fraction(Fraction(value))

    @classmethod
    def coerce(cls, value) -> "FixedReal":
        if isinstance(value, FixedReal):
            return value
        if isinstance(value, int):
            return cls.from_int(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        if isinstance(value, float):
            return cls.from_float(value)
        if isinstance(value, str):
            return cls.from_decimal(value)
        raise TypeError(f"cannot convert {type(value).__name__} to FixedReal")

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other) -> "FixedReal":
        other = FixedReal.coerce(other)
        s = max(self.shift, other.shift)
        a = self.numer << (s - self.shift)
        b = other.numer << (s - other.shift)
        return FixedReal._make(a + b, s, self.exact and other.exact)

    __radd__ = __add__

    def __sub__(self, other) -> "FixedReal":
        return self + (-FixedReal.coerce(other))

    def __rsub__(self, other) -> "FixedReal":
        return FixedReal.coerce(other) + (-self)

    def __neg__(self) -> "FixedReal":
        return FixedReal._make(-self.numer, self.shift, self.exact)

    def __mul__(self, other) -> "FixedReal":
        other = FixedReal.coerce(other)
        return FixedReal._make(
            self.numer * other.numer,
            self.shift + other.shift,
            self.exact and other.exact,
        )

    __rmul__ = __mul__

    def __abs__(self) -> "FixedReal":
        return FixedReal._make(abs(self.numer), self.shift, self.exact)

    # -- comparisons (total order on exact values) --------------------

    def _aligned(self, other: "FixedReal") -> tuple[int, int]:
        s = max(self.shift, other.shift)
        return self.numer << (s - self.shift), other.numer << (s - other.shift)

    def __lt__(self, other) -> bool:
        a, b = self._aligned(FixedReal.coerce(other))
        return a < b

    def __le__(self, other) -> bool:
        a, b = self._aligned(FixedReal.coerce(other))
        return a <= b

    def __gt__(self, other) -> bool:
        a, b = self._aligned(FixedReal.coerce(other))
        return a > b

    def __ge__(self, other) -> bool:
        a, b = self._aligned(FixedReal.coerce(other))
        return a >= b

    # -- floor / fractional part --------------------------------------

    def floor(self) -> int:
        return self.numer >> self.shift

    def frac(self) -> "FixedReal":
        """Fractional part, always in [0, 1)."""
        mask = (1 << self.shift) - 1
        return FixedReal._make(self.numer & mask, self.shift, self.exact)

    # -- conversions --------------------------------------------------

    @property
    def raw64(self) -> int:
        """Numerator over 2**64.  Raises if the value is finer than 2**-64."""
        if self.shift > FRAC_BITS:
            raise ValueError(
                f"value has {self.shift} fractional bits, not representable "
                f"on the 2**-{FRAC_BITS} grid"
            )
        return self.numer << (FRAC_BITS - self.shift)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numer, 1 << self.shift)

    def __float__(self) -> float:
        return self.numer / (1 << self.shift)

    def __repr__(self) -> str:
        return f"FixedReal({float(self):.12g})"


ZERO = FixedReal.from_int(0)
ONE = FixedReal.from_int(1)


def floor_identity_holds(x: FixedReal, y: FixedReal) -> bool:
    """Check ``[x + {y}] + [y] == [x + y]`` bit-exactly for a pair."""
    lhs = (x + y.frac()).floor() + y.floor()
    return lhs == (x + y).floor()
