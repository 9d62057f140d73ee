import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import integrate, special as sc

from edgeeta.cache import ZeroCache
from edgeeta.geometry import LinkSpectrum
from edgeeta.model_spectra import (
    Spectrum,
    circle_dirac_spectrum,
    cone_eigenvalues,
    load_spectrum,
    save_spectrum,
    sphere_dirac_spectrum,
    spin_cone_heat_kernel,
    spin_cone_heat_kernel_array,
    spin_cone_nu,
    unit_disk_spectrum,
)

from conftest import J01_SQUARED, SPIN_KERNEL_32_2, SPIN_KERNEL_HALF_1


class TestCircle:
    def test_half(self):
        s = circle_dirac_spectrum(0.5, 3)
        assert sorted(s.lam.tolist()) == [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]
        assert s.kernel_dim == 0

    def test_zero(self):
        s = circle_dirac_spectrum(0.0, 2)
        assert sorted(s.lam.tolist()) == [-2.0, -1.0, 1.0, 2.0]
        assert s.kernel_dim == 1

    def test_quarter_by_enumeration(self):
        s = circle_dirac_spectrum(0.25, 2)
        brute = [n + 0.25 for n in range(-5, 5) if abs(n + 0.25) <= 2]
        assert s.lam.tolist() == sorted(brute, key=abs)
        assert s.lam.tolist() == [0.25, -0.75, 1.25, -1.75]

    @pytest.mark.parametrize("a", [0.0, 0.1, 0.25, 0.5, 0.75, 0.9])
    def test_symmetry(self, a):
        assert circle_dirac_spectrum(a, 10).is_symmetric() == (a in (0.0, 0.5))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            circle_dirac_spectrum(1.0, 5)
        with pytest.raises(ValueError):
            circle_dirac_spectrum(0.2, 0.5)

    def test_sorted_by_magnitude(self):
        s = circle_dirac_spectrum(0.3, 20)
        assert np.all(np.diff(np.abs(s.lam)) >= 0)

    def test_tail_model_bounds_count(self):
        s = circle_dirac_spectrum(0.3, 500)
        for x in (1.0, 10.0, 100.0, 499.0):
            assert s.count(x) <= s.tail.weyl_const * x**s.tail.weyl_power


class TestSphere:
    def test_two_sphere(self):
        s = sphere_dirac_spectrum(2, 2)
        assert s.entries == [(-1.0, 2), (1.0, 2), (-2.0, 4), (2.0, 4)]

    def test_one_sphere_matches_circle(self):
        s = sphere_dirac_spectrum(1, 10)
        c = circle_dirac_spectrum(0.5, 10)
        assert s.entries == c.entries

    def test_weyl_growth(self):
        f = 3
        s = sphere_dirac_spectrum(f, 80)
        xs = np.array([40.0, 60.0, 80.0])
        counts = np.array([s.count(x) for x in xs])
        slope = np.polyfit(np.log(xs), np.log(counts), 1)[0]
        assert slope == pytest.approx(f, abs=0.15)
        assert np.all(counts <= s.tail.weyl_const * xs**f)


class TestSpinNu:
    def test_examples(self):
        assert spin_cone_nu(F(1, 2)) == (0, 1)
        assert spin_cone_nu(F(3, 2)) == (1, 2)
        assert spin_cone_nu(0) == (F(1, 2), F(1, 2))
        assert spin_cone_nu(0.5) == (0.0, 1.0)


class TestCone:
    def test_half_order_mode(self):
        link = LinkSpectrum(((F(0), 4),))
        c = cone_eigenvalues(link, lambda mu: F(1, 2), k_max=6)
        assert c.squared
        for k, (lam, mult) in enumerate(c.entries, start=1):
            assert lam == pytest.approx((k * math.pi) ** 2, rel=1e-13)
            assert mult == 4

    def test_disk_first_eigenvalue(self):
        d = unit_disk_spectrum(200)
        assert d.lam[0] == pytest.approx(J01_SQUARED, rel=1e-13)

    def test_disk_count_against_double_loop(self):
        cutoff = 400.0
        d = unit_disk_spectrum(cutoff)
        brute = 0
        for n in range(0, 25):
            zeros = [z for z in sc.jn_zeros(n, 20) if z * z <= cutoff]
            brute += len(zeros) * (1 if n == 0 else 2)
        assert d.count(cutoff) == brute

    def test_disk_weyl(self):
        d = unit_disk_spectrum(1e4)
        assert d.count(1e4) / 1e4 == pytest.approx(0.25, rel=0.05)
        assert np.all(d.lam > 0) and np.all(np.diff(d.lam) >= 0)

    def test_cache_cold_warm_identical(self, cache_dir):
        cold = unit_disk_spectrum(900, zero_cache=ZeroCache(cache_dir))
        ZeroCache(cache_dir)  # reading alone must not alter anything
        c1 = ZeroCache(cache_dir)
        cold_c = unit_disk_spectrum(900, zero_cache=c1)
        c1.flush()
        warm = unit_disk_spectrum(900, zero_cache=ZeroCache(cache_dir))
        assert np.array_equal(cold.lam, warm.lam)
        assert np.array_equal(cold_c.lam, warm.lam)

    def test_k_max_cache(self, cache_dir):
        c = ZeroCache(cache_dir)
        link = LinkSpectrum(((F(1, 2), 1),))
        spec = cone_eigenvalues(link, spin_cone_nu, k_max=3, zero_cache=c)
        c.flush()
        assert len(ZeroCache(cache_dir)) == 6
        assert spec.count(math.inf) >= 3


class TestSpinKernel:
    def test_symmetry(self):
        a = spin_cone_heat_kernel(F(3, 2), "+", 2, 0.3, 0.7, 1.1)
        b = spin_cone_heat_kernel(F(3, 2), "+", 2, 0.3, 1.1, 0.7)
        assert a == b
        assert a == pytest.approx(SPIN_KERNEL_32_2, rel=1e-13)

    def test_order_zero(self):
        v = spin_cone_heat_kernel(F(1, 2), "+", 1, 0.5, 1.0, 1.0)
        assert v == pytest.approx(SPIN_KERNEL_HALF_1, rel=1e-13)
        assert v == pytest.approx(1.0 * sc.i0(1.0) * math.exp(-1.0), rel=1e-13)

    def test_semigroup(self):
        mu, f, t, tp, s, st = F(1, 2), 1, 0.5, 0.5, 1.0, 1.0
        val, _ = integrate.quad(
            lambda r: spin_cone_heat_kernel(mu, "+", f, t, s, r) * spin_cone_heat_kernel(mu, "+", f, tp, r, st) * r**f,
            0, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert abs(val - spin_cone_heat_kernel(mu, "+", f, t + tp, s, st)) < 1e-8

    def test_positive_and_decreasing(self):
        # fixed midpoint c, points c -+ d: s s~ shrinks while |s - s~| grows
        t, c = 2.0, 0.3
        vals = [spin_cone_heat_kernel(F(1, 2), "-", 1, t, c - d, c + d) for d in (0.0, 0.05, 0.1, 0.2)]
        assert all(v > 0 for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_large_argument_no_overflow(self):
        v = spin_cone_heat_kernel(F(1, 2), "+", 1, 1e-4, 5.0, 5.0)
        assert math.isfinite(v) and v > 0

    def test_array_version(self):
        rs = np.array([0.5, 1.0, 2.0])
        arr = spin_cone_heat_kernel_array(F(3, 2), "-", 2, 0.4, 0.9, rs)
        for r, v in zip(rs, arr):
            assert v == pytest.approx(spin_cone_heat_kernel(F(3, 2), "-", 2, 0.4, 0.9, r), rel=1e-12)

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            spin_cone_heat_kernel(0, "x", 1, 1, 1, 1)


class TestSpectrumType:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([0.0, 1.0]), np.array([1, 1]))
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0]), np.array([0]))

    def test_negated_and_scaled(self):
        s = circle_dirac_spectrum(0.25, 5)
        n = s.negated()
        assert n.lattice == (0.75, 1.0)
        assert sorted(n.lam.tolist()) == sorted((-s.lam).tolist())
        sc2 = s.scaled(2.0)
        assert sc2.cutoff == 10.0 and sc2.lattice == (0.25, 2.0)

    def test_merge(self):
        a = circle_dirac_spectrum(0.25, 5)
        b = circle_dirac_spectrum(0.5, 5)
        m = a.merged(b)
        assert len(m) == len(a) + len(b)

    def test_round_trip(self, tmp_path):
        s = circle_dirac_spectrum(0.1, 7)
        save_spectrum(s, tmp_path / "s.csv")
        t = load_spectrum(tmp_path / "s.csv")
        assert np.array_equal(s.lam, t.lam) and np.array_equal(s.mult, t.mult)
        assert t.tail == s.tail and t.lattice == s.lattice and t.kernel_dim == s.kernel_dim
