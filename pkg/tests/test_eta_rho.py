import math
from fractions import Fraction

import pytest

from edgeeta.errors import DomainError
from edgeeta.eta_rho import (
    EtaResult,
    RhoResult,
    eta_function,
    eta_lattice,
    eta_numeric,
    line_gamma_trace_integrand,
    rho_aps,
    rho_cheeger_gromov_model,
    rho_from_spectra,
    rho_invariance_check,
)
from edgeeta.model_spectra import Spectrum, TailModel, circle_dirac_spectrum, sphere_dirac_spectrum

A_VALUES = (0.1, 0.25, 0.4, 0.49)


class TestLattice:
    @pytest.mark.parametrize("a", (0.5, 0.25, 0.1, 0.9))
    def test_closed_form(self, a):
        r = eta_lattice(a)
        assert r.value == pytest.approx(1 - 2 * a, abs=1e-12)
        assert r.method == "hurwitz_exact" and r.regular

    def test_zero_mode(self):
        with pytest.raises(DomainError):
            eta_lattice(0)
        with pytest.raises(DomainError):
            eta_lattice(1.2)

    def test_eta_function_at_one(self):
        # sum of sign(n + 1/4)/|n + 1/4| is the Leibniz series times 4
        v = eta_function(circle_dirac_spectrum(0.25, 50), 1.0)
        assert v.value == pytest.approx(math.pi, abs=1e-12)

    def test_eta_function_direct_needs_convergence(self):
        s = Spectrum.from_entries([(1.0, 1), (-2.0, 1)], cutoff=2.0, tail=None)
        assert eta_function(s, 1.0).value == pytest.approx(0.5)


class TestNumeric:
    @pytest.mark.parametrize("a", A_VALUES)
    def test_circle(self, a):
        r = eta_numeric(circle_dirac_spectrum(a, 200))
        assert r.method == "heat_continuation" and r.regular
        assert r.value == pytest.approx(1 - 2 * a, abs=1e-6)
        assert abs(r.value - (1 - 2 * a)) <= max(r.error_bound, 1e-9)

    @pytest.mark.parametrize("a", (0.0, 0.5))
    def test_symmetric_exact_zero(self, a):
        assert eta_numeric(circle_dirac_spectrum(a, 200)).value == 0.0

    def test_symmetric_sphere(self):
        assert eta_numeric(sphere_dirac_spectrum(2, 50)).value == 0.0

    def test_negation(self):
        s = circle_dirac_spectrum(0.3, 200)
        assert eta_numeric(s.negated()).value == pytest.approx(-eta_numeric(s).value, abs=1e-9)

    def test_direct_sum(self):
        r = eta_numeric(Spectrum.from_entries([(1.0, 2), (-2.0, 1), (3.0, 1)]))
        assert r.method == "direct_sum" and r.value == 2.0

    @pytest.mark.parametrize("c", (0.5, 2.0, 3.0, 10.0))
    def test_scaled_bound_is_honest(self, c):
        r = eta_numeric(circle_dirac_spectrum(0.25, 200).scaled(c))
        assert abs(r.value - 0.5) <= r.error_bound

    def test_cutoff_too_small(self):
        with pytest.raises(DomainError):
            eta_numeric(circle_dirac_spectrum(0.25, 10))


class TestResults:
    def test_irregular_needs_pole(self):
        with pytest.raises(ValueError):
            EtaResult(None, "heat_continuation", 0.0, regular=False)
        r = EtaResult(None, "heat_continuation", 0.0, regular=False, pole=(1.0, 0.0))
        assert r.to_json()["pole"]["residue"] == 1.0

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            EtaResult(0.0, "guess", 0.0)

    def test_rho_consistency(self):
        with pytest.raises(ValueError):
            RhoResult(1.0, "APS", (0.5, 0.0))
        with pytest.raises(ValueError):
            RhoResult(0.0, "other", (0.0, 0.0))


class TestRho:
    def test_aps_example(self):
        r = rho_aps(0.25, 0.75)
        assert r.value == pytest.approx(1.0, abs=1e-12)
        assert r.components == pytest.approx((0.5, -0.5), abs=1e-12)

    @pytest.mark.parametrize("a,b", [(0.1, 0.6), (0.3, 0.45), (0.2, 0.9)])
    def test_aps_closed_form_and_antisymmetry(self, a, b):
        assert rho_aps(a, b).value == pytest.approx(2 * (b - a), abs=1e-12)
        assert rho_aps(b, a).value == pytest.approx(-rho_aps(a, b).value, abs=1e-12)

    def test_gamma_integrand_vanishes(self):
        for t in (1e-3, 0.5, 10.0):
            for x in (-2.0, 0.0, 3.7):
                assert line_gamma_trace_integrand(t, x) == 0.0

    @pytest.mark.parametrize("a", A_VALUES)
    def test_cheeger_gromov(self, a):
        r = rho_cheeger_gromov_model(a)
        assert r.flavor == "CheegerGromov"
        assert r.value == pytest.approx(2 * a - 1, abs=1e-12)
        assert r.components[0] == 0.0

    def test_cheeger_gromov_example(self):
        assert rho_cheeger_gromov_model(0.25).value == pytest.approx(-0.5, abs=1e-12)

    def test_from_spectra(self):
        r = rho_from_spectra(circle_dirac_spectrum(0.25, 200), circle_dirac_spectrum(0.75, 200))
        assert r.value == pytest.approx(1.0, abs=1e-12)


class TestInvariance:
    a = circle_dirac_spectrum(0.25, 200)
    b = circle_dirac_spectrum(0.75, 200)

    def test_same_pair(self):
        assert rho_invariance_check((self.a, self.b), (self.a, self.b))

    def test_other_twists_same_difference(self):
        pair = (circle_dirac_spectrum(0.1, 200), circle_dirac_spectrum(0.6, 200))
        assert rho_invariance_check((self.a, self.b), pair)

    def test_rescaled_metric(self):
        assert rho_invariance_check((self.a, self.b), (self.a.scaled(2.0), self.b.scaled(2.0)))

    @pytest.mark.parametrize("block", [circle_dirac_spectrum(0.5, 200), sphere_dirac_spectrum(2, 100)])
    def test_common_symmetric_block(self, block):
        assert rho_invariance_check((self.a, self.b), (self.a.merged(block), self.b.merged(block)))

    def test_detects_change(self):
        pair = (circle_dirac_spectrum(0.1, 200), circle_dirac_spectrum(0.3, 200))
        assert not rho_invariance_check((self.a, self.b), pair)

    def test_irregular_rejected(self):
        with pytest.raises(DomainError):
            rho_from_spectra(_irregular(), self.b)


def _irregular(k_scale=20):
    # eigenvalues e^{k/K}: eta(s) = sum e^{-sk/K} has a simple pole with residue K
    lam = [math.exp(k / k_scale) for k in range(1, 10 * k_scale + 1)]
    return Spectrum.from_entries([(x, 1) for x in lam], cutoff=lam[-1],
                                 tail=TailModel(1, k_scale / math.e))


def test_irregular_result_has_pole():
    # geometric spacing produces integer powers as well
    r = eta_numeric(_irregular(), skeleton=[(Fraction(j, 2), 0) for j in range(-1, 5)])
    assert not r.regular and r.value is None
    assert r.pole[0] == pytest.approx(20, rel=1e-4)
    assert abs(r.pole[1]) < 1e-3


def test_positive_integers_zeta_value():
    # odd trace 1/(2t) - 1/12 + O(t^inf): eta is zeta(0) = -1/2
    s = Spectrum.from_entries([(float(n), 1) for n in range(1, 501)], cutoff=500.0, tail=TailModel(1, 1.0))
    sk = [(Fraction(j, 2), 0) for j in range(-2, 7)]
    r = eta_numeric(s, skeleton=sk, max_exponent=3)
    assert r.regular and r.value == pytest.approx(-0.5, abs=1e-8)
