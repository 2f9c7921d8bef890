"""Compensated double-double arithmetic, vectorized over numpy arrays.

A value is a pair ``(hi, lo)`` of float64 scalars or same-shaped arrays with
``hi + lo`` the represented number and ``|lo| <= ulp(hi)/2``, giving about
31 significant decimal digits.  That headroom is what keeps fractional parts
of orbit coordinates meaningful: entries grow like a(n)^(d-1) (~1e18 for the
Heisenberg instances at N = 1e7) and still retain ~1e-14 absolute accuracy
mod 1.

Two kernels share one interface so the orbit engine can be swapped between
precisions:

* ``DD``  -- double-double pairs (default),
* ``FP``  -- plain float64 (fast, for cross-checks and low-N work).

All functions are branch-free numpy expressions, so they accept scalars and
arrays alike and never disturb summation order.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split constant


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


class _DDKernel:
    """Double-double pair operations."""

    name = "dd"

    @staticmethod
    def from_float(x):
        return np.asarray(x, dtype=np.float64), np.zeros_like(np.asarray(x, dtype=np.float64))

    @staticmethod
    def from_fraction(f: Fraction):
        hi = float(f)
        lo = float(f - Fraction(hi))
        return np.float64(hi), np.float64(lo)

    @staticmethod
    def from_int_array(n):
        # exact for |n| < 2^53; larger integers get a correction limb
        a = np.asarray(n)
        hi = a.astype(np.float64)
        lo = (a - hi.astype(a.dtype)).astype(np.float64) if np.issubdtype(a.dtype, np.integer) else np.zeros_like(hi)
        return hi, lo

    @staticmethod
    def to_float(x):
        return x[0] + x[1]

    @staticmethod
    def add(x, y):
        s1, s2 = _two_sum(x[0], y[0])
        t1, t2 = _two_sum(x[1], y[1])
        s2 = s2 + t1
        s1, s2 = _quick_two_sum(s1, s2)
        s2 = s2 + t2
        return _quick_two_sum(s1, s2)

    @staticmethod
    def sub(x, y):
        return _DDKernel.add(x, (-y[0], -y[1]))

    @staticmethod
    def neg(x):
        return -x[0], -x[1]

    @staticmethod
    def abs(x):
        m = np.where(x[0] < 0, -1.0, 1.0)
        return m * x[0], m * x[1]

    @staticmethod
    def mul(x, y):
        p1, p2 = _two_prod(x[0], y[0])
        p2 = p2 + (x[0] * y[1] + x[1] * y[0])
        return _quick_two_sum(p1, p2)

    @staticmethod
    def mul_float(x, c):
        p1, p2 = _two_prod(x[0], c)
        p2 = p2 + x[1] * c
        return _quick_two_sum(p1, p2)

    @staticmethod
    def div(x, y):
        q1 = x[0] / y[0]
        r = _DDKernel.sub(x, _DDKernel.mul_float(y, q1))
        q2 = r[0] / y[0]
        r = _DDKernel.sub(r, _DDKernel.mul_float(y, q2))
        q3 = r[0] / y[0]
        s1, s2 = _quick_two_sum(q1, q2)
        return _DDKernel.add((s1, s2), (q3, np.zeros_like(q3)))

    @staticmethod
    def ldexp(x, k):
        return np.ldexp(x[0], k), np.ldexp(x[1], k)

    @staticmethod
    def npow(x, n: int):
        """Integer power by binary squaring; exact on exact integer inputs
        while results stay below 2^106."""
        if n == 0:
            return _DDKernel.from_float(np.ones_like(x[0]))
        m = abs(n)
        acc = None
        base = x
        while m:
            if m & 1:
                acc = base if acc is None else _DDKernel.mul(acc, base)
            m >>= 1
            if m:
                base = _DDKernel.mul(base, base)
        if n < 0:
            acc = _DDKernel.div(_DDKernel.from_float(np.ones_like(x[0])), acc)
        return acc

    @staticmethod
    def floor(x):
        fh = np.floor(x[0])
        fl = np.where(fh == x[0], np.floor(x[1]), 0.0)
        return _two_sum(fh, fl)

    @staticmethod
    def frac(x):
        """Fractional part in [0, 1) up to representation rounding."""
        return _DDKernel.sub(x, _DDKernel.floor(x))

    @staticmethod
    def exp(x):
        """exp for |x| <~ 700; ~1e-31 relative accuracy."""
        k = np.round(x[0] / _LN2F)
        r = _DDKernel.sub(x, _DDKernel.mul_float(_LN2, k))
        # scale r down 2^9 so the expm1 Taylor series needs ~10 terms
        r = _DDKernel.ldexp(r, -9)
        acc = (np.full_like(r[0], _INV_FACT[-1][0]), np.full_like(r[0], _INV_FACT[-1][1]))
        for c in reversed(_INV_FACT[:-1]):
            acc = _DDKernel.mul(r, acc)
            acc = _DDKernel.add(acc, (np.full_like(r[0], c[0]), np.full_like(r[0], c[1])))
        s = _DDKernel.mul(r, acc)  # expm1(r/2^9)
        for _ in range(9):
            s = _DDKernel.add(_DDKernel.ldexp(s, 1), _DDKernel.mul(s, s))
        e = _DDKernel.add(s, _DDKernel.from_float(np.ones_like(s[0])))
        return _DDKernel.ldexp(e, k.astype(np.int64))

    @staticmethod
    def ln(x):
        """Natural log for positive x: float seed plus one Newton step."""
        y0 = np.log(x[0])
        m = _DDKernel.mul(x, _DDKernel.exp((-y0, np.zeros_like(y0))))
        corr = _DDKernel.sub(m, _DDKernel.from_float(np.ones_like(y0)))
        return _DDKernel.add((y0, np.zeros_like(y0)), corr)

    @staticmethod
    def pow_fraction(x, a: Fraction):
        if a.denominator == 1:
            return _DDKernel.npow(x, a.numerator)
        return _DDKernel.pow_fraction_ln(x, a, _DDKernel.ln(x))

    @staticmethod
    def pow_fraction_ln(x, a: Fraction, lnx):
        """x^a reusing a precomputed ln(x); integer exponents skip it."""
        if a.denominator == 1:
            return _DDKernel.npow(x, a.numerator)
        e = _DDKernel.from_fraction(a)
        ea = (np.broadcast_to(e[0], np.shape(lnx[0])), np.broadcast_to(e[1], np.shape(lnx[0])))
        return _DDKernel.exp(_DDKernel.mul(ea, lnx))


class _FPKernel:
    """Plain float64 operations behind the same interface.

    Values are bare arrays (no pair), so callers must go through the kernel
    for every operation.
    """

    name = "double"

    @staticmethod
    def from_float(x):
        return np.asarray(x, dtype=np.float64)

    @staticmethod
    def from_fraction(f: Fraction):
        return np.float64(float(f))

    @staticmethod
    def from_int_array(n):
        return np.asarray(n).astype(np.float64)

    @staticmethod
    def to_float(x):
        return x

    add = staticmethod(np.add)
    sub = staticmethod(np.subtract)
    neg = staticmethod(np.negative)
    abs = staticmethod(np.abs)
    mul = staticmethod(np.multiply)
    mul_float = staticmethod(np.multiply)
    div = staticmethod(np.divide)
    floor = staticmethod(np.floor)
    exp = staticmethod(np.exp)
    ln = staticmethod(np.log)

    @staticmethod
    def ldexp(x, k):
        return np.ldexp(x, k)

    @staticmethod
    def npow(x, n: int):
        return np.power(x, n)

    @staticmethod
    def frac(x):
        return x - np.floor(x)

    @staticmethod
    def pow_fraction(x, a: Fraction):
        if a.denominator == 1:
            return np.power(x, a.numerator)
        return np.power(x, float(a))

    @staticmethod
    def pow_fraction_ln(x, a: Fraction, lnx):
        if a.denominator == 1:
            return np.power(x, a.numerator)
        return np.exp(float(a) * lnx)


DD = _DDKernel
FP = _FPKernel

KERNELS = {"dd": DD, "double": FP}


def _fraction_pair(f: Fraction):
    hi = float(f)
    return hi, float(f - Fraction(hi))


def _ln2_pair():
    from mpmath import mp

    with mp.workdps(50):
        v = mp.ln(2)
        hi = float(v)
        lo = float(v - mp.mpf(hi))
    return hi, lo


_LN2 = _ln2_pair()
_LN2F = _LN2[0]
_INV_FACT = [_fraction_pair(Fraction(1, __import__("math").factorial(j))) for j in range(1, 13)]
# _INV_FACT[j-1] = 1/j!; the expm1 Horner runs highest order first


class Double2:
    """Scalar double-double with operator sugar, wrapping the DD kernel."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @classmethod
    def from_pair(cls, p):
        return cls(float(p[0]), float(p[1]))

    @classmethod
    def from_fraction(cls, f: Fraction):
        return cls.from_pair(DD.from_fraction(f))

    def pair(self):
        return np.float64(self.hi), np.float64(self.lo)

    def __float__(self):
        return self.hi + self.lo

    def _coerce(self, other):
        if isinstance(other, Double2):
            return other
        if isinstance(other, Fraction):
            return Double2.from_fraction(other)
        return Double2(float(other))

    def __add__(self, other):
        return Double2.from_pair(DD.add(self.pair(), self._coerce(other).pair()))

    __radd__ = __add__

    def __sub__(self, other):
        return Double2.from_pair(DD.sub(self.pair(), self._coerce(other).pair()))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return Double2.from_pair(DD.mul(self.pair(), self._coerce(other).pair()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Double2.from_pair(DD.div(self.pair(), self._coerce(other).pair()))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return Double2(-self.hi, -self.lo)

    def __abs__(self):
        return Double2(-self.hi, -self.lo) if self.hi < 0 else self

    def __repr__(self):
        return f"Double2({self.hi!r}, {self.lo!r})"

    def floor(self) -> int:
        p = DD.floor(self.pair())
        return int(p[0]) + int(p[1])

    def frac(self) -> "Double2":
        return Double2.from_pair(DD.frac(self.pair()))

    def nearest_int_distance(self) -> float:
        f = float(self.frac())
        return min(f, 1.0 - f)
