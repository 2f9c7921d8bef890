"""Multiple ergodic averages over product nilmanifolds, and floor diagnostics.

A k-factor experiment is realized as a single block-diagonal product group,
so the orbit engine that powers single-orbit statistics also evaluates
(1/N) sum_n  F_1(b_1^(a_1(n)) x_1) ... F_k(b_k^(a_k(n)) x_k).  Test functions
come from the registered dictionary (known Haar integrals), which makes the
predicted limit for declared-full closures a product of integrals.

Integer-part handling is exact: floors are computed symbolically/with
escalating precision, and the floor-correction sequence
e(n) = floor(a2(n)) - floor(a1(n)) - floor(c) for (P2)-close pairs is
available as a pointwise diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .ddmath import Double2
from .hardy import HardyExpr, PreconditionError, check_P2, evaluate, floor_at
from .orbits import (
    FloorMode,
    OrbitConfig,
    TestFunction,
    iter_sample_chunks,
    make_test_function,
    tree_sum,
)
from .windows import decreasing_abs_threshold


@dataclass(frozen=True)
class Factor:
    """One factor: a generator acting in its own block with its own test function."""

    block_dim: int
    generator: tuple[Double2, ...]
    function: HardyExpr
    base: tuple[Double2, ...]
    test: TestFunction

    @property
    def coords_dim(self) -> int:
        return self.block_dim * (self.block_dim - 1) // 2


@dataclass(frozen=True)
class AverageExperiment:
    factors: tuple[Factor, ...]
    floor_mode: FloorMode
    declared_closure: str  # "full" | "undeclared"
    n_grid: tuple[int, ...]
    precision: str = "dd"
    n_cap: int = 10 ** 7
    allow_beyond_cap: bool = False

    def __post_init__(self):
        if self.declared_closure not in ("full", "undeclared"):
            raise ValueError("declared_closure must be 'full' or 'undeclared'")
        if any(a >= b for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("N grid must be strictly increasing")

    def orbit_config(self) -> OrbitConfig:
        base = []
        for f in self.factors:
            base.extend(f.base)
        return OrbitConfig(
            dim=sum(f.block_dim for f in self.factors),
            blocks=tuple(f.block_dim for f in self.factors),
            generators=tuple(f.generator for f in self.factors),
            functions=tuple(f.function for f in self.factors),
            base_point=tuple(base),
            floor_mode=self.floor_mode,
            precision=self.precision,
            n_cap=self.n_cap,
            allow_beyond_cap=self.allow_beyond_cap,
        )

    def integrand(self):
        """Product of the factor test functions on their coordinate slices."""
        slices = []
        c0 = h0 = 0
        for f in self.factors:
            slices.append((slice(c0, c0 + f.coords_dim), slice(h0, h0 + f.block_dim - 1)))
            c0 += f.coords_dim
            h0 += f.block_dim - 1

        def fn(ns, coords, horiz):
            out = None
            for f, (cs, hs) in zip(self.factors, slices):
                v = f.test(coords[:, cs], horiz[:, hs])
                out = v if out is None else out * v
            return out

        return fn


def make_factor(block_dim: int, generator, function: HardyExpr, base=None,
                test: TestFunction | dict | None = None) -> Factor:
    """Convenience constructor accepting raw entries and test-function specs."""
    from .orbits import as_entry

    m = block_dim * (block_dim - 1) // 2
    gen = tuple(as_entry(v) for v in generator)
    base = tuple(as_entry(v) for v in (base if base is not None else [0] * m))
    if test is None:
        test = {"type": "one"}
    if isinstance(test, dict):
        test = make_test_function(test, m, block_dim - 1)
    return Factor(block_dim, gen, function, base, test)


def multiple_average(exp: AverageExperiment, N: int, workers: int = 1) -> complex:
    """(1/N) sum_{n<=N} of the product integrand, deterministic summation."""
    cfg = exp.orbit_config()
    integrand = exp.integrand()
    partials = []
    for ns, coords, horiz in iter_sample_chunks(cfg, 1, N, workers):
        partials.append(complex(np.sum(integrand(ns, coords, horiz))))
    return tree_sum(partials) / N


def predicted_limit(exp: AverageExperiment) -> Optional[complex]:
    """Product of the factor integrals when every closure is declared full."""
    if exp.declared_closure != "full":
        return None
    out = 1 + 0j
    for f in exp.factors:
        if f.test.integral is None:
            return None
        out *= f.test.integral
    return out


@dataclass(frozen=True)
class SeriesRow:
    N: int
    value: complex
    limit: Optional[complex]
    abs_err: Optional[float]
    cauchy_increment: Optional[float]  # |A_N - A_{previous grid point}|


@dataclass(frozen=True)
class ConvergenceSeries:
    rows: tuple[SeriesRow, ...]


def convergence_series(exp: AverageExperiment, n_grid: Optional[Sequence[int]] = None,
                       workers: int = 1) -> ConvergenceSeries:
    """Averages along the grid in one pass, reusing prefix sums across rows.

    Chunks are aligned at n = 1 exactly as in :func:`multiple_average`, and a
    grid point inside a chunk sums a prefix of that chunk's values, so every
    row is bit-identical to a standalone multiple_average call.
    """
    grid = tuple(n_grid) if n_grid is not None else exp.n_grid
    if not grid:
        raise PreconditionError("empty N grid")
    if any(a >= b for a, b in zip(grid, grid[1:])):
        raise PreconditionError("N grid must be strictly increasing")
    cfg = exp.orbit_config()
    integrand = exp.integrand()
    limit = predicted_limit(exp)

    rows: list[SeriesRow] = []
    partials: list[complex] = []
    prev: Optional[complex] = None
    gi = 0
    for ns, coords, horiz in iter_sample_chunks(cfg, 1, grid[-1], workers):
        vals = integrand(ns, coords, horiz)
        a, b = int(ns[0]), int(ns[-1])
        while gi < len(grid) and grid[gi] <= b:
            Ng = grid[gi]
            head = complex(np.sum(vals[: Ng - a + 1]))
            A = tree_sum(partials + [head]) / Ng
            rows.append(SeriesRow(
                Ng, A, limit,
                abs(A - limit) if limit is not None else None,
                abs(A - prev) if prev is not None else None))
            prev = A
            gi += 1
        partials.append(complex(np.sum(vals)))
    return ConvergenceSeries(tuple(rows))


# --------------------------------------------------------------------------
# floor-correction diagnostics

def _floor_of_limit(limit_term) -> int:
    if limit_term is None:
        return 0
    if limit_term.const is None:
        return math.floor(limit_term.coeff)
    v = limit_term.coeff_fraction_approx()
    f = v - math.floor(v)
    if min(f, 1 - f) < Fraction(1, 10 ** 40):
        raise PreconditionError("limit too close to an integer to floor reliably")
    return math.floor(v)


def floor_discrepancy(a1: HardyExpr, a2: HardyExpr, n: int) -> int:
    """Exact e(n) = floor(a2(n)) - floor(a1(n)) - floor(c), c = lim (a2 - a1).

    Requires the difference to satisfy (P2); past the threshold reported by
    :func:`floor_discrepancy_threshold` the value lies in {0, +-1, +-2}.
    """
    diff = a2 - a1
    p2 = check_P2(diff)
    if not p2.holds:
        raise PreconditionError("(P2) fails for a2 - a1")
    return floor_at(a2, n) - floor_at(a1, n) - _floor_of_limit(p2.limit)


def floor_discrepancy_threshold(a1: HardyExpr, a2: HardyExpr) -> int:
    """Certified n past which the correction term x(t) = a2 - a1 - c has
    constant sign and |x| < 1/2."""
    diff = a2 - a1
    p2 = check_P2(diff)
    if not p2.holds:
        raise PreconditionError("(P2) fails for a2 - a1")
    x = diff - HardyExpr((p2.limit,)) if p2.limit is not None else diff
    if x.is_zero:
        return 1
    t = decreasing_abs_threshold(x)
    for _ in range(200):
        if abs(evaluate(x, t)) < 0.5:
            return max(1, math.ceil(t))
        t *= 2.0
    raise PreconditionError("could not certify |a2 - a1 - c| < 1/2")
