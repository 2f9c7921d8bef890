from __future__ import annotations

from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from nilorbit.hardy import HardyExpr, HardyTerm

settings.register_profile(
    "numeric", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("numeric")


@st.composite
def rationals(draw, min_num=-20, max_num=20, max_den=6, nonzero=False):
    num = draw(st.integers(min_num, max_num))
    if nonzero and num == 0:
        num = 1
    den = draw(st.integers(1, max_den))
    return Fraction(num, den)


@st.composite
def hardy_terms(draw, min_power=-3, max_power=3, max_logpow=2):
    coeff = draw(rationals(nonzero=True))
    power = draw(rationals(min_num=min_power * 2, max_num=max_power * 2, max_den=4))
    if power < min_power:
        power = Fraction(min_power)
    if power > max_power:
        power = Fraction(max_power)
    logpow = draw(st.integers(-max_logpow, max_logpow))
    return HardyTerm(coeff, power, logpow)


@st.composite
def hardy_exprs(draw, max_terms=6, allow_zero=True, **term_kw):
    n = draw(st.integers(0 if allow_zero else 1, max_terms))
    expr = HardyExpr([draw(hardy_terms(**term_kw)) for _ in range(n)])
    if not allow_zero and expr.is_zero:
        expr = HardyExpr([draw(hardy_terms(**term_kw))])
        if expr.is_zero:
            expr = HardyExpr([HardyTerm(Fraction(1), Fraction(1, 2), 0)])
    return expr


@st.composite
def snp_exprs(draw, max_terms=4):
    """Strongly non-polynomial exprs dominated by a fractional positive power."""
    num = draw(st.integers(1, 11))
    den = draw(st.sampled_from([2, 3, 4]))
    while num % den == 0:
        num += 1
    dominant = HardyTerm(draw(rationals(nonzero=True)), Fraction(num, den), 0)
    lower = [draw(hardy_terms(max_power=0)) for _ in range(draw(st.integers(0, max_terms - 1)))]
    lower = [t for t in lower if t.growth < dominant.growth]
    return HardyExpr([dominant] + lower)
