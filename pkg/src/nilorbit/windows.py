"""Taylor-window machinery: admissible window classes and certified expansions.

For a strongly non-polynomial f growing at least like a positive power, the
window class of order k collects the sub-linear growths L with

    |f^(k)|^(-1/k)  <=  L  <  |f^(k+1)|^(-1/(k+1))     (lower inclusive),

exactly the L(t) for which f restricted to [N, N+L(N)] is a degree-k
polynomial plus o_N(1).  Bounds are exact exponent pairs computed from the
symbolic derivatives, consecutive classes tile the growth axis up to t, and
a common window for several functions is found by ascending pure powers t^c
toward c = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ddmath import Double2
from .hardy import (
    HardyExpr,
    LimitKind,
    PreconditionError,
    classify,
    derivative,
    differentiate,
    evaluate,
    evaluate_dd,
)

BoundPair = tuple[Fraction, Fraction]


class WindowSearchError(RuntimeError):
    """Common-window search exhausted its depth; carries the diagnostics."""

    def __init__(self, depth: int, detail: str):
        super().__init__(f"window search exceeded depth {depth}: {detail}")
        self.depth = depth


@dataclass(frozen=True)
class ClassBounds:
    """Growth-order interval [lower, upper) of the order-k window class."""

    k: int
    lower: BoundPair
    upper: BoundPair
    lower_inclusive: bool = True


@dataclass(frozen=True)
class WindowPlan:
    L: HardyExpr
    gamma: Fraction
    orders: tuple[int, ...]
    inputs: tuple[HardyExpr, ...]

    def validate(self) -> bool:
        return all(member(self.L, f, k) for f, k in zip(self.inputs, self.orders))


@dataclass(frozen=True)
class TaylorWindow:
    """Degree-k expansion of f at N with a certified sup-norm remainder over
    [N, N + L(N)]."""

    base: int
    coeffs: tuple[Double2, ...]  # q_j = f^(j)(N) / j!
    remainder_bound: float


def _window_precheck(f: HardyExpr) -> None:
    g = classify(f)
    if not g.is_strongly_nonpolynomial or g.tends_to is LimitKind.ZERO:
        raise PreconditionError(f"{f} is not strongly non-polynomial with growth")
    if f.dominant.power <= 0:
        raise PreconditionError(f"{f} does not dominate any positive power t^delta")


def _inverse_root_pair(g: HardyExpr, k: int) -> BoundPair:
    """Growth pair of |g|^(-1/k)."""
    a, b = g.dominant.growth
    return (-a / k, Fraction(-b, k))


def min_order(f: HardyExpr, cap: int = 256) -> int:
    """Smallest k with f^(k) -> 0 (the first order whose class is defined)."""
    _window_precheck(f)
    g = f
    for k in range(1, cap + 1):
        g = differentiate(g)
        if g.is_zero:
            raise PreconditionError(f"{f} has vanishing derivatives (polynomial?)")
        if classify(g).tends_to is LimitKind.ZERO:
            return k
    raise PreconditionError(f"no decaying derivative of {f} below order {cap}")


def class_bounds(f: HardyExpr, k: int) -> ClassBounds:
    """Exact exponent pairs of the order-k window class of f."""
    _window_precheck(f)
    gk = derivative(f, k)
    if gk.is_zero or classify(gk).tends_to is not LimitKind.ZERO:
        raise PreconditionError(f"order {k} too small: f^({k}) does not tend to 0")
    gk1 = differentiate(gk)
    return ClassBounds(k, _inverse_root_pair(gk, k), _inverse_root_pair(gk1, k + 1))


def _growth_pair(L: HardyExpr) -> BoundPair:
    a, b = L.dominant.growth
    return (a, Fraction(b))


def member(L: HardyExpr, f: HardyExpr, k: int) -> bool:
    """Window-class membership: lower <= L < upper in growth order, L sub-linear."""
    if L.is_zero:
        return False
    b = class_bounds(f, k)
    p = _growth_pair(L)
    return b.lower <= p < b.upper and p < (Fraction(1), Fraction(0))


def order_for_power(f: HardyExpr, gamma: Fraction) -> Optional[int]:
    """The unique k whose class contains t^gamma, if any.

    Consecutive classes tile [lower(min_order), 1) exactly (the upper bound
    of order k is the lower bound of order k+1), so at most one k matches.
    """
    p = (gamma, Fraction(0))
    k = min_order(f)
    b = class_bounds(f, k)
    if p < b.lower:
        return None
    while not (b.lower <= p < b.upper):
        k += 1
        b = class_bounds(f, k)
    return k


def find_common_window(inputs: Sequence[HardyExpr], max_depth: int = 64) -> WindowPlan:
    """Pick L(t) = t^gamma with an admissible order for every input.

    Ascends the Stern-Brocot path from 1/2 toward 1 (candidates d/(d+1)),
    stopping at the first gamma every input accepts; such gamma exist for
    all c < 1 close enough to 1.
    """
    inputs = tuple(inputs)
    if not inputs:
        raise PreconditionError("find_common_window needs at least one input")
    for f in inputs:
        _window_precheck(f)
    for depth in range(1, max_depth + 1):
        gamma = Fraction(depth, depth + 1)
        orders = [order_for_power(f, gamma) for f in inputs]
        if all(k is not None for k in orders):
            plan = WindowPlan(HardyExpr.monomial(1, gamma), gamma, tuple(orders), inputs)
            assert plan.validate()
            return plan
    detail = "; ".join(
        f"{f}: lower(min_order)={class_bounds(f, min_order(f)).lower}" for f in inputs)
    raise WindowSearchError(max_depth, detail)


# --------------------------------------------------------------------------
# certified eventual signs and monotonicity

def eventual_sign(f: HardyExpr) -> tuple[int, float]:
    """Sign of f(t) for all t past a certified threshold.

    Past the threshold every non-dominant/dominant term ratio is decreasing
    (each ratio t^a log^b with (a,b) < (0,0) decreases once log t > b/(-a))
    and their sum is at most 1/2, so the dominant term's sign wins.
    """
    if f.is_zero:
        return 0, 1.0
    dom = f.dominant
    sign = 1 if dom.coeff > 0 else -1
    if len(f.terms) == 1:
        return sign, 2.0
    t_mono = 2.0
    for term in f.terms[1:]:
        a = term.power - dom.power
        b = term.logpow - dom.logpow
        if a < 0 and b > 0:
            t_mono = max(t_mono, math.exp(float(Fraction(b) / -a)))
    ratio_sum = lambda t: sum(
        abs(evaluate(HardyExpr((term,)), t)) for term in f.terms[1:]
    ) / abs(evaluate(HardyExpr((dom,)), t))
    t = t_mono
    for _ in range(2200):  # doubling cannot run away: ratios decay like a power of t
        if ratio_sum(t) <= 0.5:
            return sign, t
        t *= 2.0
    raise PreconditionError(f"could not certify the eventual sign of {f}")


def decreasing_abs_threshold(f: HardyExpr) -> float:
    """Threshold past which |f| is certified strictly decreasing."""
    sf, tf = eventual_sign(f)
    sdf, tdf = eventual_sign(differentiate(f))
    if sf == 0 or sdf == 0 or sf * sdf > 0:
        raise PreconditionError(f"|{f}| is not eventually decreasing")
    return max(tf, tdf)


def taylor_window(f: HardyExpr, N: int, k: int, L_at_N: float) -> TaylorWindow:
    """Expansion coefficients q_j = f^(j)(N)/j! and a certified remainder bound.

    The Lagrange remainder over h in [0, L] is at most
    |f^(k+1)(N)| L^(k+1) / (k+1)!  once |f^(k+1)| is decreasing past N; the
    operation refuses below the certified threshold instead of guessing.
    """
    if k < 1:
        raise PreconditionError("window order must be at least 1")
    coeffs = []
    g = f
    for j in range(k + 1):
        coeffs.append(evaluate_dd(g, N) * Fraction(1, math.factorial(j)))
        g = differentiate(g)
    # g is now f^(k+1)
    if g.is_zero:
        return TaylorWindow(N, tuple(coeffs), 0.0)
    threshold = decreasing_abs_threshold(g)
    if N < threshold:
        raise PreconditionError(
            f"N={N} below certified monotonicity threshold {threshold:.6g} for |f^({k + 1})|")
    bound = abs(float(evaluate_dd(g, N))) * L_at_N ** (k + 1) / math.factorial(k + 1)
    return TaylorWindow(N, tuple(coeffs), bound)
