"""Orbit generation on unitriangular nilmanifolds and equidistribution statistics.

The engine evaluates g(n) = b_1^(a_1(n)) ... b_k^(a_k(n)) x and reduces it to
fundamental-domain coordinates, vectorized over blocks of n in double-double
precision (group entries grow like a(n)^(d-1), far beyond float64 once
a(n) ~ 1e9).  Since log b is nilpotent, every entry of b^s is a polynomial in
s, so a generator is precompiled to entry-polynomial coefficients once.

Statistics on top of the samples: Weyl sums against horizontal characters,
anchored-box discrepancy against Lebesgue measure, smoothness norms of window
polynomials in the binomial basis, and the character-obstruction search that
mirrors the quantitative equidistribution test.

Summation discipline: values are accumulated per fixed-size chunk with
numpy's pairwise sum and chunk partials are merged along a fixed binary
tree, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .ddmath import DD, KERNELS, Double2
from .hardy import (
    HardyExpr,
    LimitKind,
    PreconditionError,
    classify,
    decompose,
    evaluate,
    evaluate_kernel,
)
from .windows import WindowPlan, taylor_window
from . import nilpotent

CHUNK = 1 << 16
DEFAULT_N_CAP = 10 ** 7


class PrecisionCapError(RuntimeError):
    """Requested range exceeds the documented precision cap."""


class FloorMode(enum.Enum):
    REAL = "real"
    FLOOR = "floor"


# --------------------------------------------------------------------------
# configuration

def as_entry(v) -> Double2:
    """Coerce a config entry (number, rational string, or constant name)."""
    from .constants import REGISTRY

    if isinstance(v, Double2):
        return v
    if isinstance(v, str):
        if v in REGISTRY:
            return Double2.from_fraction(REGISTRY[v].as_fraction())
        return Double2.from_fraction(Fraction(v))
    if isinstance(v, Fraction):
        return Double2.from_fraction(v)
    if isinstance(v, int):
        return Double2.from_fraction(Fraction(v))
    return Double2(float(v))


@dataclass(frozen=True)
class OrbitConfig:
    """Combined-orbit instance b_1^(a_1(n)) ... b_k^(a_k(n)) x on one group.

    ``blocks`` declares a block-diagonal product structure: with several
    blocks, generator i lives in block i (commuting by construction) and
    sample coordinates are listed factor-major.  With a single block all
    generators act on the full group and must commute.
    """

    dim: int
    blocks: tuple[int, ...]
    generators: tuple[tuple[Double2, ...], ...]
    functions: tuple[HardyExpr, ...]
    base_point: tuple[Double2, ...]
    floor_mode: FloorMode = FloorMode.REAL
    precision: str = "dd"
    n_cap: int = DEFAULT_N_CAP
    allow_beyond_cap: bool = False

    def __post_init__(self):
        if sum(self.blocks) != self.dim:
            raise ValueError("blocks must sum to dim")
        if any(b < 2 for b in self.blocks):
            raise ValueError("every block needs dimension >= 2")
        if len(self.generators) != len(self.functions):
            raise ValueError("one function per generator")
        if len(self.blocks) > 1 and len(self.generators) != len(self.blocks):
            raise ValueError("product configs pair one generator with each block")
        if self.precision not in KERNELS:
            raise ValueError(f"precision must be one of {sorted(KERNELS)}")
        for f in self.functions:
            if any(t.logpow < 0 for t in f.terms):
                raise PreconditionError(
                    "functions with negative log powers are undefined at n=1")
        expected = sum(b * (b - 1) // 2 for b in self.blocks)
        if len(self.base_point) != expected:
            raise ValueError(f"base point needs {expected} block-local coordinates")
        for gi, g in enumerate(self.generators):
            b = self.blocks[gi] if len(self.blocks) > 1 else self.dim
            if len(g) != b * (b - 1) // 2:
                raise ValueError(f"generator {gi} needs {b * (b - 1) // 2} coordinates")
        if len(self.blocks) == 1 and len(self.generators) > 1:
            self._check_commuting()

    def _check_commuting(self):
        els = [nilpotent.UnitriangularElement.from_coords(
            self.dim, [float(e) for e in g]) for g in self.generators]
        for a in range(len(els)):
            for b in range(a + 1, len(els)):
                c = nilpotent.commutator(els[a], els[b])
                if np.abs(c.mat - np.eye(self.dim)).max() > 1e-12:
                    raise PreconditionError(
                        f"generators {a} and {b} do not commute (combined mode)")

    @property
    def coords_dim(self) -> int:
        return sum(b * (b - 1) // 2 for b in self.blocks)

    @property
    def horiz_dim(self) -> int:
        return sum(b - 1 for b in self.blocks)


@dataclass(frozen=True)
class OrbitSample:
    n: int
    coords: np.ndarray  # factor-major Malcev coordinates, in [0, 1)
    horiz: np.ndarray   # factor-major horizontal-torus coordinates


# --------------------------------------------------------------------------
# compiled engine

def _mat_mul_dd(A, B, d):
    """Unitriangular product of scalar Double2 matrices given as dicts."""
    C = {}
    for i in range(d):
        for j in range(i + 1, d):
            acc = A.get((i, j), Double2(0)) + B.get((i, j), Double2(0))
            for m in range(i + 1, j):
                acc = acc + A.get((i, m), Double2(0)) * B.get((m, j), Double2(0))
            C[(i, j)] = acc
    return C


def _log_dd(entries: dict, d: int) -> dict:
    """Nilpotent matrix log of I + U given U's strict-upper entries."""
    acc: dict[tuple[int, int], Double2] = {}
    power = dict(entries)
    sign = 1
    for j in range(1, d):
        for k, v in power.items():
            acc[k] = acc.get(k, Double2(0)) + v * Fraction(sign, j)
        power = _mat_mul_strict(power, entries, d)
        sign = -sign
        if not power:
            break
    return acc


class _CompiledGenerator:
    """Entry polynomials of s -> b^s for one generator inside its block."""

    __slots__ = ("block", "poly")

    def __init__(self, block: int, entries: Sequence[Double2], d: int):
        self.block = block
        lam = _log_dd({k: v for k, v in zip(nilpotent.coordinate_order(d),
                                            entries) if float(v) != 0.0}, d)
        lam = {k: v for k, v in lam.items() if not (v.hi == 0 and v.lo == 0)}
        # M_j = lam^j / j!; entry (r, c) of b^s is sum_{j>=1} M_j[r, c] s^j
        poly: dict[tuple[int, int], list] = {}
        power = lam
        fact = 1
        for j in range(1, d):
            fact *= j
            inv = Fraction(1, fact)
            for k, v in power.items():
                coeffs = poly.setdefault(k, [])
                while len(coeffs) < j:
                    coeffs.append(Double2(0))
                coeffs[j - 1] = v * inv
            power = _mat_mul_strict(power, lam, d)
            if not power:
                break
        self.poly = poly  # (r, c) -> [c_1, c_2, ...] with entry = sum c_j s^j


def _mat_mul_strict(A: dict, B: dict, d: int) -> dict:
    out = {}
    for i in range(d):
        for j in range(i + 1, d):
            s = None
            for m in range(i + 1, j):
                a = A.get((i, m))
                b = B.get((m, j))
                if a is not None and b is not None:
                    s = a * b if s is None else s + a * b
            if s is not None:
                out[(i, j)] = s
    return out


def _const_pair(K, c: Double2, shape):
    if K is DD:
        return (np.broadcast_to(np.float64(c.hi), shape),
                np.broadcast_to(np.float64(c.lo), shape))
    return np.broadcast_to(np.float64(float(c)), shape)


def _ensure_shape(K, v, shape):
    if K is DD:
        return (np.broadcast_to(v[0], shape), np.broadcast_to(v[1], shape))
    return np.broadcast_to(v, shape)


class OrbitEngine:
    """Precompiled orbit evaluator for one configuration."""

    def __init__(self, cfg: OrbitConfig):
        self.cfg = cfg
        self.K = KERNELS[cfg.precision]
        d_blocks = cfg.blocks
        self.compiled: list[list[tuple[int, _CompiledGenerator]]] = [[] for _ in d_blocks]
        for gi, entries in enumerate(cfg.generators):
            block = gi if len(d_blocks) > 1 else 0
            self.compiled[block].append(
                (gi, _CompiledGenerator(block, entries, d_blocks[block])))
        # base point split into block-local entry dicts
        self.base: list[dict] = []
        pos = 0
        for b in d_blocks:
            m = b * (b - 1) // 2
            block_entries = cfg.base_point[pos:pos + m]
            pos += m
            self.base.append({k: v for k, v in zip(nilpotent.coordinate_order(b),
                                                   block_entries) if float(v) != 0.0})

    # -- per-chunk computation ----------------------------------------------

    def exponents(self, ns: np.ndarray):
        K = self.K
        t = K.from_int_array(ns)
        out = []
        for f in self.cfg.functions:
            s = evaluate_kernel(f, K, t)
            s = _ensure_shape(K, s, ns.shape)
            if self.cfg.floor_mode is FloorMode.FLOOR:
                s = K.floor(s)
            out.append(s)
        return out

    def _generator_matrix(self, comp: _CompiledGenerator, s, shape, d):
        K = self.K
        out = {}
        for (r, c), coeffs in comp.poly.items():
            acc = None
            for cj in reversed(coeffs):
                if acc is None:
                    acc = _const_pair(K, cj, shape)
                else:
                    acc = K.add(K.mul(acc, s), _const_pair(K, cj, shape))
            out[(r, c)] = K.mul(acc, s)
        return out

    def _block_product(self, mats: list[dict], d: int, shape):
        K = self.K
        acc = None
        for m in mats:
            if acc is None:
                acc = m
                continue
            nxt = {}
            for i in range(d):
                for j in range(i + 1, d):
                    terms = []
                    if (i, j) in acc:
                        terms.append(acc[(i, j)])
                    if (i, j) in m:
                        terms.append(m[(i, j)])
                    for k in range(i + 1, j):
                        if (i, k) in acc and (k, j) in m:
                            terms.append(K.mul(acc[(i, k)], m[(k, j)]))
                    if terms:
                        s = terms[0]
                        for t in terms[1:]:
                            s = K.add(s, t)
                        nxt[(i, j)] = s
            acc = nxt
        return acc if acc is not None else {}

    def _reduce_block(self, E: dict, d: int, shape):
        """In-place lattice reduction; returns entries with values in [0, 1)."""
        K = self.K
        for (i, j) in nilpotent.coordinate_order(d):
            entry = E.get((i, j))
            if entry is None:
                E[(i, j)] = _const_pair(K, Double2(0), shape)
                continue
            m = K.floor(entry)
            E[(i, j)] = K.sub(entry, m)
            neg_m = K.neg(m)
            for r in range(i):
                col_i = E.get((r, i))
                if col_i is not None:
                    prev = E.get((r, j))
                    upd = K.mul(neg_m, col_i)
                    E[(r, j)] = upd if prev is None else K.add(prev, upd)
        return E

    def samples(self, n0: int, n1: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinates for n in [n0, n1] inclusive: (ns, coords, horiz)."""
        cap = self.cfg.n_cap
        if n1 > cap:
            if not self.cfg.allow_beyond_cap:
                raise PrecisionCapError(
                    f"n={n1} exceeds the precision cap {cap}; pass allow_beyond_cap "
                    "to accept growing coordinate error")
            warnings.warn(
                f"evaluating beyond the precision cap (n={n1} > {cap}); "
                "coordinate error grows with a(n)^(d-1)", stacklevel=2)
        ns = np.arange(n0, n1 + 1, dtype=np.int64)
        shape = ns.shape
        K = self.K
        expo = self.exponents(ns)
        coords_cols = []
        horiz_cols = []
        for bi, d in enumerate(self.cfg.blocks):
            mats = [self._generator_matrix(comp, expo[gi], shape, d)
                    for gi, comp in self.compiled[bi]]
            if self.base[bi]:
                mats.append({k: _const_pair(K, v, shape) for k, v in self.base[bi].items()})
            E = self._block_product(mats, d, shape)
            E = self._reduce_block(E, d, shape)
            block_coords = []
            for (i, j) in nilpotent.coordinate_order(d):
                f = K.to_float(E[(i, j)])
                f = np.where(f >= 1.0, 0.0, np.where(f < 0.0, 0.0, f))
                block_coords.append(f)
            coords_cols.extend(block_coords)
            horiz_cols.extend(block_coords[: d - 1])
        coords = np.column_stack(coords_cols) if coords_cols else np.zeros((len(ns), 0))
        horiz = np.column_stack(horiz_cols) if horiz_cols else np.zeros((len(ns), 0))
        return ns, coords, horiz


def orbit_point(cfg: OrbitConfig, n: int) -> OrbitSample:
    """Single reduced orbit point (runs the vectorized engine on one index)."""
    if n < 1:
        raise PreconditionError("orbit index must be >= 1")
    ns, coords, horiz = OrbitEngine(cfg).samples(n, n)
    return OrbitSample(n, coords[0], horiz[0])


def iter_sample_chunks(cfg: OrbitConfig, n0: int, n1: int, workers: int = 1,
                       engine: Optional[OrbitEngine] = None):
    """Yield (ns, coords, horiz) chunks covering [n0, n1] in order.

    Chunks are fixed-size and independent, so any worker count produces the
    same chunks in the same order.
    """
    engine = engine or OrbitEngine(cfg)
    if n1 > cfg.n_cap and not cfg.allow_beyond_cap:
        raise PrecisionCapError(
            f"n={n1} exceeds the precision cap {cfg.n_cap}; pass allow_beyond_cap "
            "to accept growing coordinate error")
    ranges = [(a, min(a + CHUNK - 1, n1)) for a in range(n0, n1 + 1, CHUNK)]
    if workers <= 1:
        for a, b in ranges:
            yield engine.samples(a, b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(lambda r: engine.samples(r[0], r[1]), ranges)


def tree_sum(parts: Sequence[complex]) -> complex:
    """Fixed-shape pairwise reduction, independent of how parts were produced."""
    parts = list(parts)
    if not parts:
        return 0j
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def chunked_mean(cfg: OrbitConfig, integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
                 n0: int, n1: int, workers: int = 1) -> complex:
    """Mean of integrand(ns, coords, horiz) over [n0, n1], deterministic order."""
    partials = []
    for ns, coords, horiz in iter_sample_chunks(cfg, n0, n1, workers):
        partials.append(complex(np.sum(integrand(ns, coords, horiz))))
    return tree_sum(partials) / (n1 - n0 + 1)


# --------------------------------------------------------------------------
# test-function dictionary

def _e(phase: np.ndarray) -> np.ndarray:
    return np.exp(2j * np.pi * (phase - np.floor(phase)))


@dataclass(frozen=True)
class TestFunction:
    """Dictionary entry with a known Haar/Lebesgue integral.

    Coordinate characters are discontinuous on the nilmanifold (only
    horizontal characters are genuine continuous test functions); they still
    probe Lebesgue-coordinate equidistribution since their discontinuity set
    is null, and are flagged ``continuous=False``.
    """

    label: str
    integral: Optional[complex]
    continuous: bool
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]  # (coords, horiz) -> values

    def __call__(self, coords: np.ndarray, horiz: np.ndarray) -> np.ndarray:
        return self.fn(coords, horiz)


def make_test_function(spec: dict, coords_dim: int, horiz_dim: int) -> TestFunction:
    kind = spec.get("type")
    if kind == "one":
        return TestFunction("one", 1 + 0j, True,
                            lambda coords, horiz: np.ones(len(coords), dtype=complex))
    if kind == "horizontal_character":
        k = np.asarray(spec["k"], dtype=np.int64)
        if k.shape != (horiz_dim,):
            raise ValueError(f"horizontal character needs {horiz_dim} frequencies")
        integral = 1 + 0j if not k.any() else 0j
        return TestFunction(f"chi{tuple(int(x) for x in k)}", integral, True,
                            lambda coords, horiz: _e(horiz @ k))
    if kind == "coordinate_character":
        m = np.asarray(spec["m"], dtype=np.int64)
        if m.shape != (coords_dim,):
            raise ValueError(f"coordinate character needs {coords_dim} frequencies")
        integral = 1 + 0j if not m.any() else 0j
        return TestFunction(f"coord{tuple(int(x) for x in m)}", integral, False,
                            lambda coords, horiz: _e(coords @ m))
    if kind == "bump":
        idx = tuple(spec.get("coords", range(coords_dim)))
        if any(i < 0 or i >= coords_dim for i in idx):
            raise ValueError("bump coordinate index out of range")
        integral = complex(Fraction(1, 2 ** len(idx)))

        def bump(coords, horiz, idx=idx):
            out = np.ones(len(coords))
            for i in idx:
                out = out * (1 + np.cos(2 * np.pi * coords[:, i])) / 2
            return out.astype(complex)

        return TestFunction(f"bump{idx}", integral, True, bump)
    raise ValueError(f"unknown test function type {kind!r}")


# --------------------------------------------------------------------------
# statistics

def weyl_sum(cfg: OrbitConfig, m: Sequence[int], N: int, workers: int = 1) -> complex:
    """(1/N) sum_{n<=N} e(m . horiz(orbit_point(n))) with tree summation."""
    m = np.asarray(m, dtype=np.int64)
    if m.shape != (cfg.horiz_dim,):
        raise ValueError(f"frequency vector needs {cfg.horiz_dim} components")
    return chunked_mean(cfg, lambda ns, coords, horiz: _e(horiz @ m), 1, N, workers)


def window_average(cfg: OrbitConfig, test: TestFunction | dict, N: int,
                   L_at_N: int, workers: int = 1) -> complex:
    """Average of a dictionary function over orbit points n in [N, N + L(N)]."""
    if isinstance(test, dict):
        test = make_test_function(test, cfg.coords_dim, cfg.horiz_dim)
    return chunked_mean(cfg, lambda ns, coords, horiz: test(coords, horiz),
                        N, N + L_at_N, workers)


def histogram_counts(samples: np.ndarray, grid_res: int) -> np.ndarray:
    """Cell counts of samples in [0,1)^dim on a grid_res^dim grid."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n, dim = samples.shape
    idx = np.clip((samples * grid_res).astype(np.int64), 0, grid_res - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (grid_res,) * dim)
    return np.bincount(flat, minlength=grid_res ** dim).reshape((grid_res,) * dim)


def discrepancy_from_histogram(hist: np.ndarray, total: int) -> float:
    """Max over anchored grid boxes of |empirical mass - Lebesgue volume|."""
    if total <= 0:
        raise PreconditionError("empty sample set")
    dim = hist.ndim
    g = hist.shape[0]
    c = hist.astype(np.int64)
    for ax in range(dim):
        c = np.cumsum(c, axis=ax)
    axis = np.arange(1, g + 1) / g
    vol = axis
    for _ in range(dim - 1):
        vol = np.multiply.outer(vol, axis)
    return float(np.max(np.abs(c / total - vol)))


def box_discrepancy(samples: np.ndarray | Iterable[np.ndarray], grid_res: int) -> float:
    """Anchored-box discrepancy of samples (array or iterable of chunks)."""
    if grid_res < 2:
        raise PreconditionError("grid resolution must be >= 2")
    if isinstance(samples, np.ndarray):
        samples = [samples]
    hist = None
    total = 0
    for chunk in samples:
        chunk = np.atleast_2d(np.asarray(chunk, dtype=np.float64))
        if chunk.size == 0:
            continue
        h = histogram_counts(chunk, grid_res)
        hist = h if hist is None else hist + h
        total += len(chunk)
    if hist is None or total == 0:
        raise PreconditionError("empty sample set")
    return discrepancy_from_histogram(hist, total)


def orbit_discrepancy(cfg: OrbitConfig, N: int, grid_res: Optional[int] = None,
                      workers: int = 1) -> float:
    """Discrepancy of the first N reduced orbit points, streamed by chunk."""
    if grid_res is None:
        grid_res = 8 if cfg.coords_dim >= 3 else 16
    hist = None
    for ns, coords, horiz in iter_sample_chunks(cfg, 1, N, workers):
        h = histogram_counts(coords, grid_res)
        hist = h if hist is None else hist + h
    return discrepancy_from_histogram(hist, N)


# --------------------------------------------------------------------------
# binomial basis and smoothness norms

@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


@lru_cache(maxsize=None)
def _stirling1_signed(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return _stirling1_signed(n - 1, k - 1) - (n - 1) * _stirling1_signed(n - 1, k)


@dataclass(frozen=True)
class BinomialPolynomial:
    """p(n) = sum_i binom(n, i) a_i; trailing zero coefficients trimmed."""

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and _is_zero(c[-1]):
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _is_zero(x) -> bool:
    if isinstance(x, Double2):
        return x.hi == 0 and x.lo == 0
    return x == 0


def to_binomial_basis(monomial_coeffs: Sequence) -> BinomialPolynomial:
    """Exact change of basis n^j = sum_i S2(j, i) i! binom(n, i).

    Works on any coefficient type with + and * (Fraction for exactness,
    Double2 for windowed norms).
    """
    d = len(monomial_coeffs) - 1
    out = []
    for i in range(d + 1):
        acc = None
        for j in range(i, d + 1):
            w = _stirling2(j, i) * math.factorial(i)
            if w == 0:
                continue
            term = monomial_coeffs[j] * w
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0)
    return BinomialPolynomial(tuple(out))


def binomial_to_monomial(p: BinomialPolynomial) -> tuple:
    """Inverse change of basis via signed Stirling numbers:
    binom(n, i) = sum_j s1(i, j) n^j / i!."""
    d = p.degree
    out = []
    for j in range(d + 1):
        acc = None
        for i in range(j, d + 1):
            s = _stirling1_signed(i, j)
            if s == 0:
                continue
            term = p.coeffs[i] * Fraction(s, math.factorial(i))
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0)
    return tuple(out)


def _torus_distance(x) -> float:
    if isinstance(x, Double2):
        return x.nearest_int_distance()
    if isinstance(x, Fraction):
        f = x - math.floor(x)
        return float(min(f, 1 - f))
    f = float(x) % 1.0
    return min(f, 1.0 - f)


def cinfty_norm(p: BinomialPolynomial, N: int) -> float:
    """max over i >= 1 of N^i * distance(a_i, nearest integer)."""
    if N < 1:
        raise PreconditionError("norm scale N must be >= 1")
    best = 0.0
    for i in range(1, p.degree + 1):
        best = max(best, float(N) ** i * _torus_distance(p.coeffs[i]))
    return best


# --------------------------------------------------------------------------
# character-obstruction search (the computational content of the
# quantitative equidistribution test on windows)

@dataclass(frozen=True)
class ObstructionReport:
    N: int
    M_max: int
    L_at_N: float
    min_norm: float
    argmin: tuple[int, ...]
    norms_by_frequency: Optional[dict] = None


def _poly_shift_coeffs(p: HardyExpr, N: int) -> list[Fraction]:
    """Exact h-coefficients of p(N + h) for a polynomial part p."""
    deg = max((int(t.power) for t in p.terms), default=0)
    out = [Fraction(0)] * (deg + 1)
    for t in p.terms:
        a = int(t.power)
        for j in range(a + 1):
            out[j] += t.coeff * math.comb(a, j) * Fraction(N) ** (a - j)
    return out


def generator_horizontal_lifts(cfg: OrbitConfig) -> list[list[Double2]]:
    """Superdiagonal entries of each generator on the product horizontal
    torus (zero outside the generator's own block)."""
    lifts = []
    for gi, entries in enumerate(cfg.generators):
        row = [Double2(0)] * cfg.horiz_dim
        if len(cfg.blocks) > 1:
            d = cfg.blocks[gi]
            offset = sum(b - 1 for b in cfg.blocks[:gi])
        else:
            d = cfg.dim
            offset = 0
        order = nilpotent.coordinate_order(d)
        for (i, j), v in zip(order, entries):
            if j == i + 1:
                row[offset + i] = v
        lifts.append(row)
    return lifts


def obstruction_search(cfg: OrbitConfig, window: Optional[WindowPlan], N: int,
                       M_max: int, keep_norms: bool = False) -> ObstructionReport:
    """Minimum window-polynomial smoothness norm over nonzero frequencies.

    For each frequency vector k with 0 < |k|_inf <= M_max, builds the window
    polynomial sum_i (q_i,N(h) + p_i,N(h)) (k . u_i) in the binomial basis
    over h in [0, L(N)] and takes its C^inf[L(N)] norm; a large minimum
    certifies that no small character obstructs equidistribution on the
    window.  Sub-fractional parts contribute only constants and are skipped.

    ``window`` may be None only when every function is polynomial plus
    sub-fractional; the interval length then defaults to sqrt(N).
    """
    if M_max < 1:
        raise PreconditionError("M_max must be >= 1")
    snp_parts = []
    poly_parts = []
    for f in cfg.functions:
        poly, rest = decompose(f)
        g = classify(rest)
        if rest.is_zero or g.is_subfractional or g.tends_to is LimitKind.ZERO:
            snp_parts.append(None)
        else:
            snp_parts.append(rest)
        poly_parts.append(poly)

    active = [x for x in snp_parts if x is not None]
    if active:
        if window is None:
            raise PreconditionError("window plan required for non-polynomial parts")
        if tuple(active) != tuple(window.inputs):
            raise PreconditionError(
                "window plan inputs do not match the functions' non-polynomial parts")
        if not window.validate():
            raise PreconditionError("window plan fails its own membership checks")
        L_at_N = evaluate(window.L, float(N))
    else:
        L_at_N = math.sqrt(N)

    # binomial-basis coefficient vector of q_i(h) + p_i(N+h) per function
    vecs: list[list] = []
    order_iter = iter(window.orders) if window is not None else iter(())
    for snp, poly in zip(snp_parts, poly_parts):
        mono: list = [Fraction(0)]
        if snp is not None:
            k_i = next(order_iter)
            tw = taylor_window(snp, N, k_i, L_at_N)
            mono = list(tw.coeffs)
        for j, c in enumerate(_poly_shift_coeffs(poly, N)):
            if j < len(mono):
                mono[j] = mono[j] + c
            else:
                mono.append(c)
        vecs.append(list(to_binomial_basis(mono).coeffs))

    lifts = generator_horizontal_lifts(cfg)
    dh = cfg.horiz_dim
    maxdeg = max(len(v) for v in vecs)

    best = None
    norms = {} if keep_norms else None
    for flat in np.ndindex(*((2 * M_max + 1,) * dh)):
        k = tuple(x - M_max for x in flat)
        if not any(k):
            continue
        coeff_per_fn = []
        for lift in lifts:
            c = Double2(0)
            for kj, u in zip(k, lift):
                if kj:
                    c = c + u * kj
            coeff_per_fn.append(c)
        combined = [Double2(0)] * maxdeg
        for c, v in zip(coeff_per_fn, vecs):
            if _is_zero(c):
                continue
            for j, a in enumerate(v):
                combined[j] = combined[j] + a * c
        norm = cinfty_norm(BinomialPolynomial(tuple(combined)), max(1, int(L_at_N)))
        if norms is not None:
            norms[k] = norm
        if best is None or norm < best[0]:
            best = (norm, k)
    return ObstructionReport(N, M_max, L_at_N, best[0], best[1], norms)
