"""Log-scaled complex arithmetic.

The resolvent and transform assemblies multiply gamma functions, powers and
series whose individual magnitudes can reach 1e+-400 while the assembled
result is perfectly ordinary. Values are carried as ``mant * exp(logscale)``
with ``|mant|`` kept near 1 so no intermediate ever overflows a double.
"""

from __future__ import annotations

import cmath
import math

_NEG_INF = float("-inf")


class Scaled:
    """A complex number represented as mant * exp(logscale)."""

    __slots__ = ("mant", "logscale")

    def __init__(self, mant: complex, logscale: float = 0.0):
        am = abs(mant)
        if am == 0.0 or logscale == _NEG_INF:
            self.mant = 0j
            self.logscale = _NEG_INF
        elif 0.25 < am < 4.0:
            self.mant = complex(mant)
            self.logscale = float(logscale)
        else:
            self.mant = mant / am
            self.logscale = logscale + math.log(am)

    @classmethod
    def from_log(cls, logvalue: complex) -> "Scaled":
        return cls(cmath.exp(1j * logvalue.imag), logvalue.real)

    @property
    def is_zero(self) -> bool:
        return self.logscale == _NEG_INF

    def __mul__(self, other):
        if isinstance(other, Scaled):
            if self.is_zero or other.is_zero:
                return _ZERO
            return Scaled(self.mant * other.mant, self.logscale + other.logscale)
        return Scaled(self.mant * other, self.logscale)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scaled):
            return Scaled(self.mant / other.mant, self.logscale - other.logscale)
        return Scaled(self.mant / other, self.logscale)

    def __add__(self, other):
        if not isinstance(other, Scaled):
            other = Scaled(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self, other) if self.logscale >= other.logscale else (other, self)
        shift = lo.logscale - hi.logscale
        if shift < -745.0:  # exp underflows; lo is invisible
            return hi
        return Scaled(hi.mant + lo.mant * math.exp(shift), hi.logscale)

    def __sub__(self, other):
        if not isinstance(other, Scaled):
            other = Scaled(other)
        return self + Scaled(-other.mant, other.logscale)

    def __neg__(self):
        return Scaled(-self.mant, self.logscale)

    def abs_log(self) -> float:
        """log(|value|); -inf for zero."""
        if self.is_zero:
            return _NEG_INF
        return self.logscale + math.log(abs(self.mant))

    def to_complex(self) -> complex:
        """Collapse to an ordinary complex; overflows to inf past ~1e308."""
        if self.is_zero:
            return 0j
        if self.logscale > 700.0:
            return self.mant * math.inf
        if self.logscale < -745.0:
            return 0j
        return self.mant * math.exp(self.logscale)

    def __repr__(self):
        return f"Scaled({self.mant!r}, {self.logscale!r})"


_ZERO = Scaled(0j, _NEG_INF)


def szero() -> Scaled:
    return _ZERO
