from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nilorbit import hardy as H, nilpotent as NP, orbits as O, windows as W
from nilorbit.ddmath import Double2

E = O.as_entry


def torus_cfg(alpha, fn="t", **kw):
    return O.OrbitConfig(dim=2, blocks=(2,), generators=((E(alpha),),),
                         functions=(H.parse(fn),), base_point=(E(0),), **kw)


def heis_cfg(a12, a23, fn, base=(0, 0, 0), **kw):
    return O.OrbitConfig(dim=3, blocks=(3,), generators=((E(a12), E(a23), E(0)),),
                         functions=(H.parse(fn),),
                         base_point=tuple(E(v) for v in base), **kw)


PAIR_CFG = O.OrbitConfig(
    dim=6, blocks=(3, 3),
    generators=((E("phi"), E("sqrt2"), E(0)), (E("pi"), E("e"), E(0))),
    functions=(H.parse("t^{3/2}"), H.parse("t*log(t)")),
    base_point=tuple(E(0) for _ in range(6)),
)


class TestConfig:
    def test_commuting_required_in_combined_mode(self):
        with pytest.raises(H.PreconditionError, match="commute"):
            O.OrbitConfig(dim=3, blocks=(3,),
                          generators=((E(1), E(0), E(0)), (E(0), E(1), E(0))),
                          functions=(H.parse("t"), H.parse("t^{1/2}")),
                          base_point=(E(0), E(0), E(0)))

    def test_negative_logpow_rejected(self):
        with pytest.raises(H.PreconditionError, match="log"):
            torus_cfg("phi", fn="t*log(t)^{-1}")

    def test_block_shape_validation(self):
        with pytest.raises(ValueError, match="coordinates"):
            O.OrbitConfig(dim=6, blocks=(3, 3),
                          generators=((E(1), E(1), E(0)), (E(1),)),
                          functions=(H.parse("t"), H.parse("t")),
                          base_point=tuple(E(0) for _ in range(6)))


class TestOrbitPoint:
    def test_zero_functions_reduce_base(self):
        cfg = heis_cfg(1, 1, "0", base=("2.3", "0.7", 0))
        s = O.orbit_point(cfg, 5)
        assert np.allclose(s.coords, [0.3, 0.7, 0.0])

    def test_circle_rotation(self):
        cfg = torus_cfg("1/3")
        s = O.orbit_point(cfg, 7)
        assert s.coords[0] == pytest.approx((7 / 3) % 1.0, abs=1e-14)

    def test_integer_power_oracle(self):
        # floor mode at n=4 gives exponent 8; compare against b multiplied
        # out eight times in the scalar group
        b = NP.UnitriangularElement.from_coords(3, [1.0, 1.0, 0.0])
        x = NP.UnitriangularElement.from_coords(3, [0.25, 0.125, 0.5])
        want, _ = NP.reduce_mod_lattice(NP.multiply(NP.power_int(b, 8), x))
        cfg = heis_cfg(1, 1, "t^{3/2}", base=("1/4", "1/8", "1/2"),
                       floor_mode=O.FloorMode.FLOOR)
        s = O.orbit_point(cfg, 4)
        assert np.abs(s.coords - want.values).max() < 1e-12

    def test_engine_matches_scalar_path(self):
        from nilorbit.constants import REGISTRY

        phi = REGISTRY["phi"].as_float()
        r2 = REGISTRY["sqrt2"].as_float()
        cfg = heis_cfg("phi", "sqrt2", "t^{3/2}", base=("1/4", "1/8", "1/2"))
        b = NP.UnitriangularElement.from_coords(3, [phi, r2, 0.0])
        x = NP.UnitriangularElement.from_coords(3, [0.25, 0.125, 0.5])
        ns, coords, horiz = O.OrbitEngine(cfg).samples(50, 60)
        for i, n in enumerate(range(50, 61)):
            ref, _ = NP.reduce_mod_lattice(NP.multiply(NP.power_real(b, n ** 1.5), x))
            diff = np.abs(ref.values - coords[i])
            assert np.minimum(diff, 1 - diff).max() < 1e-9

    def test_index_must_be_positive(self):
        with pytest.raises(H.PreconditionError):
            O.orbit_point(torus_cfg("phi"), 0)

    def test_combined_mode_two_generators(self):
        # commuting generators inside one group: b1^{a1(n)} b2^{a2(n)}
        from nilorbit.constants import REGISTRY

        cfg = O.OrbitConfig(
            dim=3, blocks=(3,),
            generators=((E("phi"), E(0), E(0)), (E("sqrt3"), E(0), E(0))),
            functions=(H.parse("t"), H.parse("t^{1/2}")),
            base_point=(E(0), E(0), E(0)))
        phi = REGISTRY["phi"].as_float()
        r3 = REGISTRY["sqrt3"].as_float()
        for n in (7, 50, 1234):
            s = O.orbit_point(cfg, n)
            want = (n * phi + math.sqrt(n) * r3) % 1.0
            diff = abs(s.coords[0] - want)
            assert min(diff, 1 - diff) < 1e-10
            assert s.coords[1] == 0 and s.coords[2] == 0


class TestPrecision:
    def test_cap_enforced(self):
        cfg = torus_cfg("phi", fn="t^{3/2}", n_cap=10 ** 5)
        with pytest.raises(O.PrecisionCapError):
            O.weyl_sum(cfg, [1], 2 * 10 ** 5)

    def test_cap_override_warns(self):
        cfg = torus_cfg("phi", fn="t", n_cap=10 ** 3, allow_beyond_cap=True)
        with pytest.warns(UserWarning, match="precision cap"):
            O.weyl_sum(cfg, [1], 2 * 10 ** 3)

    def test_double_mode_close_to_dd_at_moderate_n(self):
        cfg_dd = torus_cfg("phi", fn="t^{3/2}")
        cfg_fp = torus_cfg("phi", fn="t^{3/2}", precision="double")
        s1 = O.weyl_sum(cfg_dd, [1], 2000)
        s2 = O.weyl_sum(cfg_fp, [1], 2000)
        assert abs(s1 - s2) < 1e-6


class TestWeylSum:
    def test_zero_frequency(self):
        assert O.weyl_sum(torus_cfg("phi"), [0], 500) == 1 + 0j

    def test_rational_resonance_exact(self):
        assert O.weyl_sum(torus_cfg("1/2"), [2], 1000) == 1 + 0j

    def test_golden_rotation_closed_form(self):
        from nilorbit.constants import REGISTRY

        phi = REGISTRY["phi"].as_float()
        N = 10 ** 4
        S = O.weyl_sum(torus_cfg("phi"), [1], N)
        closed = abs(math.sin(math.pi * N * phi) / math.sin(math.pi * (phi % 1.0))) / N
        assert abs(S) == pytest.approx(closed, abs=1e-10)
        assert abs(S) <= 0.01

    def test_noise_tolerant_decay(self):
        prev = None
        for N in (10 ** 3, 10 ** 4, 10 ** 5):
            s = abs(O.weyl_sum(PAIR_CFG, [1, 0, 0, 1], N))
            if prev is not None:
                assert s < prev + 0.005
            prev = s

    def test_workers_bit_identical(self):
        a = O.weyl_sum(PAIR_CFG, [1, 1, 0, 0], 3 * 10 ** 5, workers=1)
        b = O.weyl_sum(PAIR_CFG, [1, 1, 0, 0], 3 * 10 ** 5, workers=4)
        assert a == b


class TestDiscrepancy:
    def test_single_sample(self):
        assert O.box_discrepancy(np.array([[0.0]]), 2) == 0.5

    def test_exact_lattice(self):
        M = 64
        samples = (np.arange(M) / M).reshape(-1, 1)
        assert O.box_discrepancy(samples, 16) <= 1 / M + 1e-12

    def test_uniform_random_bound(self):
        rng = np.random.default_rng(42)
        d = O.box_discrepancy(rng.random((10 ** 5, 3)), 8)
        assert d <= 0.01  # ~6x the 3-sigma Monte Carlo scale

    def test_empty_rejected(self):
        with pytest.raises(H.PreconditionError, match="empty"):
            O.box_discrepancy(np.zeros((0, 2)), 4)

    def test_rotation_decreasing_over_decades(self):
        cfg = torus_cfg("phi")
        vals = [O.orbit_discrepancy(cfg, N, 16) for N in (10 ** 2, 10 ** 3, 10 ** 4)]
        assert vals[0] > vals[1] > vals[2]

    def test_streaming_matches_array(self):
        rng = np.random.default_rng(1)
        xs = rng.random((1000, 2))
        whole = O.box_discrepancy(xs, 8)
        chunked = O.box_discrepancy([xs[:300], xs[300:]], 8)
        assert whole == chunked


class TestBinomialBasis:
    def test_square(self):
        p = O.to_binomial_basis([F(0), F(0), F(1)])
        assert p.coeffs == (F(0), F(1), F(2))

    def test_scaled_square(self):
        p = O.to_binomial_basis([F(0), F(0), F(1, 4)])
        assert p.coeffs == (F(0), F(1, 4), F(1, 2))

    def test_constant(self):
        p = O.to_binomial_basis([F(7)])
        assert p.coeffs == (F(7),) and p.degree == 0

    @given(st.lists(st.integers(-30, 30), min_size=1, max_size=9))
    def test_roundtrip_exact(self, coeffs):
        coeffs = [F(c) for c in coeffs]
        back = O.binomial_to_monomial(O.to_binomial_basis(coeffs))
        trimmed = list(coeffs)
        while len(trimmed) > 1 and trimmed[-1] == 0:
            trimmed.pop()
        assert list(back) == trimmed

    def test_binomial_identity_numeric(self):
        p = O.to_binomial_basis([F(1), F(-2), F(3), F(5)])
        for n in range(0, 12):
            direct = 1 - 2 * n + 3 * n ** 2 + 5 * n ** 3
            viabin = sum(a * math.comb(n, i) for i, a in enumerate(p.coeffs))
            assert direct == viabin


class TestCinftyNorm:
    def test_linear(self):
        p = O.BinomialPolynomial((0.0, 0.3))
        assert O.cinfty_norm(p, 10) == pytest.approx(3.0)

    def test_worked_quadratic(self):
        p = O.to_binomial_basis([F(0), F(0), F(1, 4)])
        assert O.cinfty_norm(p, 10) == 50.0

    def test_integer_coefficients_vanish(self):
        p = O.to_binomial_basis([F(3), F(-7), F(2), F(11)])
        assert O.cinfty_norm(p, 1000) == 0.0

    @given(st.lists(st.integers(-5, 5), min_size=2, max_size=6),
           st.lists(st.integers(-9, 9), min_size=6, max_size=6))
    def test_integer_shift_invariance(self, coeffs, shifts):
        base = [F(c, 4) for c in coeffs]
        p = O.to_binomial_basis(base)
        shifted = O.BinomialPolynomial(tuple(
            a + s for a, s in zip(p.coeffs, shifts)))
        # distances to Z are invariant under integer shifts of each a_i
        assert O.cinfty_norm(p, 50) == pytest.approx(
            O.cinfty_norm(O.BinomialPolynomial(p.coeffs[:len(shifted.coeffs)]), 50))
        assert O.cinfty_norm(shifted, 50) == pytest.approx(O.cinfty_norm(p, 50))


class TestObstruction:
    def test_degenerate_generator_detected(self):
        r = O.obstruction_search(torus_cfg(0), None, 10 ** 4, 3)
        assert r.min_norm == 0.0

    def test_rational_resonance(self):
        r = O.obstruction_search(torus_cfg("2/5"), None, 10 ** 4, 5, keep_norms=True)
        assert r.min_norm == 0.0
        assert r.norms_by_frequency[(5,)] == 0.0

    def test_torus_growth(self):
        cfg = torus_cfg("phi", fn="t^{3/2}")
        plan = W.find_common_window([H.parse("t^{3/2}")])
        norms = [O.obstruction_search(cfg, plan, N, 3).min_norm
                 for N in (10 ** 3, 10 ** 4, 10 ** 5)]
        assert norms[0] < norms[1] < norms[2]
        assert norms[2] >= 10 ** 2

    def test_window_mismatch_rejected(self):
        plan = W.find_common_window([H.parse("t^{5/4}")])
        with pytest.raises(H.PreconditionError, match="match"):
            O.obstruction_search(torus_cfg("phi", fn="t^{3/2}"), plan, 10 ** 3, 2)


class TestTestFunctionDictionary:
    def test_coordinate_character_flagged_discontinuous(self):
        f = O.make_test_function({"type": "coordinate_character", "m": [0, 0, 1]}, 3, 2)
        assert not f.continuous and f.integral == 0j
        coords = np.array([[0.1, 0.2, 0.25], [0.0, 0.0, 0.75]])
        vals = f(coords, coords[:, :2])
        assert vals[0] == pytest.approx(np.exp(2j * np.pi * 0.25))

    def test_trivial_frequencies_have_integral_one(self):
        f = O.make_test_function({"type": "horizontal_character", "k": [0, 0]}, 3, 2)
        assert f.integral == 1 + 0j and f.continuous

    def test_frequency_length_validated(self):
        with pytest.raises(ValueError, match="frequencies"):
            O.make_test_function({"type": "horizontal_character", "k": [1]}, 3, 2)

    def test_bump_index_validated(self):
        with pytest.raises(ValueError, match="out of range"):
            O.make_test_function({"type": "bump", "coords": [5]}, 3, 2)

    def test_unknown_type(self):
        with pytest.raises(ValueError, match="unknown test function"):
            O.make_test_function({"type": "mystery"}, 3, 2)

    def test_bump_values_and_integral(self):
        f = O.make_test_function({"type": "bump", "coords": [0, 1]}, 2, 1)
        assert f.integral == complex(F(1, 4))
        coords = np.array([[0.0, 0.0], [0.5, 0.5], [0.25, 0.0]])
        vals = f(coords, coords[:, :1])
        assert vals[0] == 1.0 and vals[1] == 0.0
        assert vals[2] == pytest.approx(0.5)


class TestWindowAverage:
    def test_constant_function(self):
        v = O.window_average(torus_cfg("phi", fn="t^{3/2}"), {"type": "one"},
                             10 ** 4, 600)
        assert v == 1 + 0j

    def test_equidistributed_window_small(self):
        # well inside the admissible window L = N^{3/5} the character average
        # is already small at N = 1e6 (threshold from the full-range run)
        N = 10 ** 6
        v = O.window_average(torus_cfg("phi", fn="t^{3/2}"),
                             {"type": "horizontal_character", "k": [1]},
                             N, int(N ** 0.6))
        assert abs(v) < 0.05

    def test_constant_orbit_degenerate(self):
        # exponents converge, so the window average approaches F at the
        # limiting point b^2 x
        cfg = heis_cfg("phi", "sqrt2", "2 + t^{-1}", base=("1/4", "1/8", "1/2"))
        fixed_cfg = heis_cfg("phi", "sqrt2", "2", base=("1/4", "1/8", "1/2"))
        test = {"type": "bump", "coords": [0, 1, 2]}
        v = O.window_average(cfg, test, 10 ** 4, 500)
        fixed = O.window_average(fixed_cfg, test, 10 ** 4, 500)
        assert abs(v - fixed) < 1e-3


class TestSampleDump:
    def test_chunks_cover_range_in_order(self):
        cfg = torus_cfg("phi")
        seen = []
        for ns, coords, horiz in O.iter_sample_chunks(cfg, 1, 200000, workers=3):
            seen.append((int(ns[0]), int(ns[-1])))
            assert coords.shape == (len(ns), 1) and horiz.shape == (len(ns), 1)
            assert np.all(coords >= 0) and np.all(coords < 1)
        assert seen[0][0] == 1 and seen[-1][1] == 200000
        for (a, b), (c, d) in zip(seen, seen[1:]):
            assert c == b + 1
