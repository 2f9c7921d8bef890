from __future__ import annotations

import numpy as np
import pytest

from nilorbit import nilpotent as NP


def rand_element(rng, d, scale=2.0):
    m = np.eye(d)
    for i, j in NP.coordinate_order(d):
        m[i, j] = rng.normal(scale=scale)
    return NP.UnitriangularElement(m)


def rand_lattice(rng, d, span=3):
    m = np.eye(d)
    for i, j in NP.coordinate_order(d):
        m[i, j] = float(rng.integers(-span, span + 1))
    return NP.UnitriangularElement(m)


class TestMultiply:
    def test_identity(self):
        rng = np.random.default_rng(0)
        g = rand_element(rng, 4)
        assert np.allclose(NP.multiply(g, NP.UnitriangularElement.identity(4)).mat, g.mat)

    def test_heisenberg_composition(self):
        g = NP.UnitriangularElement.from_coords(3, [1.5, 2.5, 0.0])
        h = NP.UnitriangularElement.from_coords(3, [0.25, 4.0, 1.0])
        gh = NP.multiply(g, h)
        assert gh.mat[0, 2] == 0.0 + 1.0 + 1.5 * 4.0

    def test_inverse(self):
        rng = np.random.default_rng(1)
        g = rand_element(rng, 5)
        assert np.allclose(NP.multiply(g, NP.inverse(g)).mat, np.eye(5), atol=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            NP.multiply(NP.UnitriangularElement.identity(3),
                        NP.UnitriangularElement.identity(4))

    def test_associativity_randomized(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            g, h, k = (rand_element(rng, d) for _ in range(3))
            lhs = NP.multiply(NP.multiply(g, h), k).mat
            rhs = NP.multiply(g, NP.multiply(h, k)).mat
            assert np.abs(lhs - rhs).max() < 1e-12


class TestExpLog:
    def test_series_terminates(self):
        X = NP.LieAlgebraElement(np.array([[0., 1, 0], [0, 0, 1], [0, 0, 0]]))
        e = NP.exp(X)
        assert (e.mat[0, 1], e.mat[1, 2], e.mat[0, 2]) == (1.0, 1.0, 0.5)

    def test_log_identity(self):
        assert np.all(NP.log(NP.UnitriangularElement.identity(4)).mat == 0)

    def test_roundtrip_randomized(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            d = int(rng.integers(2, 7))
            X = NP.LieAlgebraElement(np.triu(rng.normal(size=(d, d)), 1))
            back = NP.log(NP.exp(X))
            assert np.abs(back.mat - X.mat).max() <= 1e-12


class TestPowerReal:
    def test_unit_power(self):
        rng = np.random.default_rng(4)
        b = rand_element(rng, 4)
        assert np.abs(NP.power_real(b, 1.0).mat - b.mat).max() < 1e-12

    def test_heisenberg_symbolic_oracle(self):
        # for b with (1,2)=(2,3)=1, (1,3)=0: log b has (1,3) = -1/2, so
        # b^s = exp(s log b) has (1,3) = s^2/2 - s/2
        b = NP.UnitriangularElement.from_coords(3, [1.0, 1.0, 0.0])
        for s in (0.5, 2.0, -1.25, 7.75):
            bs = NP.power_real(b, s)
            assert bs.mat[0, 1] == pytest.approx(s, abs=1e-13)
            assert bs.mat[1, 2] == pytest.approx(s, abs=1e-13)
            assert bs.mat[0, 2] == pytest.approx(s * s / 2 - s / 2, abs=1e-12)

    def test_integer_power_consistency(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            b = rand_element(rng, d, scale=1.0)
            m = int(rng.integers(-6, 7))
            assert np.abs(NP.power_real(b, m).mat - NP.power_int(b, m).mat).max() <= 1e-12

    def test_one_parameter_subgroup(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            b = rand_element(rng, d, scale=1.0)
            s, t = rng.normal(scale=3.0, size=2)
            lhs = NP.power_real(b, s + t).mat
            rhs = NP.multiply(NP.power_real(b, s), NP.power_real(b, t)).mat
            assert np.abs(lhs - rhs).max() <= 1e-12


class TestReduce:
    def test_worked_example(self):
        g = NP.UnitriangularElement.from_coords(3, [2.3, 0.7, 0.0])
        coords, gamma = NP.reduce_mod_lattice(g)
        assert np.allclose(coords.values, [0.3, 0.7, 0.0])

    def test_lattice_element(self):
        g = NP.UnitriangularElement.from_coords(3, [2.0, 3.0, 5.0])
        coords, gamma = NP.reduce_mod_lattice(g)
        assert np.all(coords.values == 0)
        assert np.allclose(g.mat @ gamma, np.eye(3))  # gamma = g^{-1}

    def test_witness(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            g = rand_element(rng, d, scale=5.0)
            coords, gamma = NP.reduce_mod_lattice(g)
            assert np.all(np.abs(np.tril(gamma, -1)) == 0) and np.all(np.diag(gamma) == 1)
            red = g.mat @ gamma
            vals = np.array([red[i, j] for i, j in NP.coordinate_order(d)])
            assert np.allclose(vals, coords.values, atol=1e-12)
            assert np.all(vals >= -1e-12) and np.all(vals < 1 + 1e-12)

    def test_brute_force_small_witness(self):
        # cross-check the elementary reduction against search over small gamma
        g = NP.UnitriangularElement.from_coords(3, [1.4, -0.6, 0.9])
        coords, _ = NP.reduce_mod_lattice(g)
        best = None
        for a in range(-3, 4):
            for b in range(-3, 4):
                for c in range(-3, 4):
                    gam = NP.UnitriangularElement.from_coords(3, [a, b, c])
                    m = NP.multiply(g, gam).mat
                    vals = np.array([m[0, 1], m[1, 2], m[0, 2]])
                    if np.all(vals >= 0) and np.all(vals < 1):
                        best = vals
        assert best is not None and np.allclose(best, coords.values)

    def test_right_invariance_randomized(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            d = int(rng.integers(2, 5))
            g = rand_element(rng, d, scale=4.0)
            gam = rand_lattice(rng, d)
            a, _ = NP.reduce_mod_lattice(g)
            b, _ = NP.reduce_mod_lattice(NP.multiply(g, gam))
            assert np.abs(a.values - b.values).max() <= 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            g = rand_element(rng, d, scale=4.0)
            coords, _ = NP.reduce_mod_lattice(g)
            again, _ = NP.reduce_mod_lattice(
                NP.UnitriangularElement.from_coords(d, coords.values))
            assert np.abs(coords.values - again.values).max() <= 1e-12


class TestHorizontal:
    def test_identity(self):
        assert np.all(NP.horizontal_projection(NP.UnitriangularElement.identity(4)) == 0)

    def test_heisenberg(self):
        g = NP.UnitriangularElement.from_coords(3, [1.25, -0.5, 9.0])
        assert np.allclose(NP.horizontal_projection(g), [0.25, 0.5])

    def test_homomorphism(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            g, h = rand_element(rng, d), rand_element(rng, d)
            lhs = NP.horizontal_projection(NP.multiply(g, h))
            rhs = (NP.horizontal_projection(g) + NP.horizontal_projection(h)) % 1.0
            diff = np.abs(lhs - rhs)
            assert np.minimum(diff, 1 - diff).max() <= 1e-12


class TestHaarInvariance:
    def test_left_translation_preserves_uniformity(self):
        # push uniform Malcev coordinates through a fixed left translation and
        # re-reduce; cell counts stay flat (chi^2 with generous 5-sigma slack)
        rng = np.random.default_rng(11)
        d, n, grid = 3, 20000, 4
        g = rand_element(rng, d, scale=1.5)
        cells = np.zeros((grid,) * 3, dtype=int)
        for _ in range(n):
            x = NP.UnitriangularElement.from_coords(d, rng.random(3))
            y, _ = NP.reduce_mod_lattice(NP.multiply(g, x))
            idx = tuple(np.minimum((y.values * grid).astype(int), grid - 1))
            cells[idx] += 1
        k = cells.size
        expected = n / k
        chi2 = float(((cells - expected) ** 2 / expected).sum())
        assert chi2 < (k - 1) + 5 * np.sqrt(2 * (k - 1))


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(12)
        g = rand_element(rng, 4)
        back = NP.UnitriangularElement.deserialize(g.serialize())
        assert np.all(back.mat == g.mat)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            NP.UnitriangularElement.deserialize("3;1.0")
