"""Registry of named irrational constants usable as coefficients and matrix entries.

Every entry carries a 50-digit decimal expansion so that values can be
converted exactly-enough into double-double pairs or Fractions at any
working precision below that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class NamedConstant:
    name: str
    decimal: str  # 50 significant digits
    irrational: bool

    def as_fraction(self) -> Fraction:
        """Rational approximation carrying the full stored precision."""
        return Fraction(self.decimal)

    def as_float(self) -> float:
        return float(self.as_fraction())


REGISTRY: dict[str, NamedConstant] = {
    c.name: c
    for c in [
        NamedConstant("sqrt2", "1.4142135623730950488016887242096980785696718753769", True),
        NamedConstant("phi", "1.6180339887498948482045868343656381177203091798058", True),
        NamedConstant("pi", "3.1415926535897932384626433832795028841971693993751", True),
        NamedConstant("e", "2.7182818284590452353602874713526624977572470937000", True),
        NamedConstant("sqrt3", "1.7320508075688772935274463415058723669428052538104", True),
        NamedConstant("sqrt5", "2.2360679774997896964091736687312762354406183596115", True),
    ]
}


def lookup(name: str) -> NamedConstant:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown constant name {name!r}; registered: {sorted(REGISTRY)}") from None
