import math
from fractions import Fraction as F

import mpmath as mp
import numpy as np
import pytest

from edgeeta.errors import IllConditioned, InsufficientSamples, TailUnbounded
from edgeeta.heat_trace import (
    ExpansionModel,
    TraceSample,
    aps_K,
    detect_logs,
    fit_expansion,
    heat_trace,
    mellin_check,
    min_time,
    odd_heat_trace,
    pole_structure,
    samples_to_csv,
    samples_to_json,
    t_grid,
    trace_samples,
)
from edgeeta.index_families import heat_trace_family, smooth_skeleton
from edgeeta.model_spectra import Spectrum, circle_dirac_spectrum, unit_disk_spectrum

from conftest import CIRCLE_A0_HEAT_T1, CIRCLE_QUARTER_K_T1, CIRCLE_QUARTER_ODD_T1, MINUS_FOUR_CATALAN

HALF = F(1, 2)


def sym():
    return Spectrum.from_entries([(1.0, 1), (-1.0, 1)])


class TestTraces:
    def test_symmetric_pair(self):
        assert heat_trace(sym(), 1.0).value == pytest.approx(2 * math.exp(-1), abs=1e-16)

    def test_theta_value(self):
        s = heat_trace(circle_dirac_spectrum(0.0, 50), 1.0)
        assert s.value == pytest.approx(CIRCLE_A0_HEAT_T1, abs=1e-14)
        assert s.truncation_bound < 1e-300 or s.truncation_bound < 1e-12

    def test_large_t_limit(self):
        s = circle_dirac_spectrum(0.0, 50)
        assert heat_trace(s, 60.0).value == pytest.approx(1.0, abs=1e-20)

    def test_decreasing(self):
        s = circle_dirac_spectrum(0.3, 100)
        vals = [heat_trace(s, t).value for t in t_grid(0.01, 10, points=30)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_odd_symmetric_exact_zero(self):
        for a in (0.0, 0.5):
            s = circle_dirac_spectrum(a, 100)
            for t in (0.01, 0.3, 2.0):
                assert odd_heat_trace(s, t).value == 0.0

    def test_odd_quarter_value(self):
        # frozen 40-digit direct summation
        v = odd_heat_trace(circle_dirac_spectrum(0.25, 50), 1.0).value
        assert v == pytest.approx(CIRCLE_QUARTER_ODD_T1, abs=1e-14)

    def test_odd_scaling(self):
        s = circle_dirac_spectrum(0.25, 100)
        c = 2.0
        lhs = odd_heat_trace(s.scaled(c), 0.1).value
        rhs = c * odd_heat_trace(s, c * c * 0.1).value
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_odd_decays(self):
        s = circle_dirac_spectrum(0.25, 50)
        assert abs(odd_heat_trace(s, 500.0).value) < 1e-12

    def test_tail_unbounded(self):
        s = circle_dirac_spectrum(0.25, 10)
        with pytest.raises(TailUnbounded):
            heat_trace(s, 0.1)

    def test_tail_bound_is_valid(self):
        # truncated sum plus bound must cover a longer sum
        short = circle_dirac_spectrum(0.3, 20)
        long_ = circle_dirac_spectrum(0.3, 200)
        t = min_time(short)
        a, b = heat_trace(short, t), heat_trace(long_, t)
        assert 0 <= b.value - a.value <= a.truncation_bound

    def test_squared_uses_linear_exponent(self):
        s = Spectrum.from_entries([(4.0, 1)], squared=True)
        assert heat_trace(s, 0.5).value == pytest.approx(math.exp(-2.0))


class TestAPSK:
    def test_symmetric(self):
        s = circle_dirac_spectrum(0.0, 50)
        assert aps_K(s, 0.7) == -0.5

    def test_large_t(self):
        assert aps_K(circle_dirac_spectrum(0.0, 50), 1e4) == pytest.approx(-0.5)

    def test_quarter(self):
        assert aps_K(circle_dirac_spectrum(0.25, 50), 1.0) == pytest.approx(CIRCLE_QUARTER_K_T1, abs=1e-14)


class TestFit:
    def test_exact_member(self):
        ts = np.geomspace(1e-3, 1e-1, 20)
        m = fit_expansion([TraceSample(t, 1 / t) for t in ts], [(-1, 0), (-HALF, 0), (0, 0)])
        assert m.coefficient(-1) == pytest.approx(1.0, abs=1e-10)
        assert abs(m.coefficient(-HALF)) < 1e-10 and abs(m.coefficient(0)) < 1e-10

    def test_log_coefficients(self):
        ts = np.geomspace(1e-3, 1e-1, 20)
        data = [TraceSample(t, 2 * t**-0.5 + 3 * t**-0.5 * math.log(t)) for t in ts]
        m = fit_expansion(data, [(-HALF, 0), (-HALF, 1)])
        assert m.coefficient(-HALF, 0) == pytest.approx(2, abs=1e-8)
        assert m.coefficient(-HALF, 1) == pytest.approx(3, abs=1e-8)

    def test_insufficient(self):
        with pytest.raises(InsufficientSamples):
            fit_expansion([TraceSample(t, t) for t in (0.1, 0.2, 0.3)], [(0, 0), (1, 0)])

    def test_ill_conditioned(self):
        ts = np.geomspace(0.5, 0.51, 30)
        terms = [(F(k, 2), 0) for k in range(8)]
        with pytest.raises(IllConditioned) as info:
            fit_expansion([TraceSample(t, t) for t in ts], terms)
        assert info.value.condition_estimate > 1e8
        flagged = fit_expansion([TraceSample(t, t) for t in ts], terms, refuse=False)
        assert flagged.ill_conditioned

    def test_disk_area_coefficient(self):
        d = unit_disk_spectrum(1e4)
        ts = t_grid(min_time(d), 1e-2)
        m = fit_expansion(trace_samples(d, ts), [(-1, 0), (-HALF, 0), (0, 0)])
        assert m.coefficient(-1) == pytest.approx(0.25, rel=0.01)

    def test_skeleton_inputs(self):
        ts = np.geomspace(1e-3, 1e-1, 30)
        data = [TraceSample(t, t**-1.5 + t**-0.5) for t in ts]
        sk = heat_trace_family(3, 1, 1, "even", "odd_trace")
        m = fit_expansion(data, sk, max_exponent=HALF)
        assert m.coefficient(F(-3, 2)) == pytest.approx(1, abs=1e-6)
        m2 = fit_expansion(data, smooth_skeleton(3, "odd_trace"), max_exponent=HALF)
        assert m2.coefficient(-HALF) == pytest.approx(1, abs=1e-6)

    def test_model_order(self):
        with pytest.raises(ValueError):
            ExpansionModel(((F(1), 0, 1.0), (F(0), 0, 1.0)), 0.0, 1.0)

    def test_export(self, tmp_path):
        s = trace_samples(circle_dirac_spectrum(0.25, 50), [0.1, 0.2], "odd_trace")
        samples_to_csv(s, tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == "t,value,bound"
        assert samples_to_json(s)[0]["t"] == 0.1


class TestLogs:
    ts = np.geomspace(1e-3, 1e-1, 30)
    base = [(-HALF, 0), (0, 0), (HALF, 0)]

    def test_genuine_log(self):
        data = [TraceSample(t, 2 * t**-0.5 + 3 * t**-0.5 * math.log(t) + 1) for t in self.ts]
        assert detect_logs(data, self.base, slots=[-HALF]).detected

    def test_pure_powers(self):
        data = [TraceSample(t, 2 * t**-0.5 + 1 + t**0.5) for t in self.ts]
        assert not detect_logs(data, self.base, slots=[-HALF]).detected

    def test_circle_odd_trace(self):
        s = circle_dirac_spectrum(0.25, 200)
        data = trace_samples(s, t_grid(min_time(s), 0.1), "odd_trace")
        r = detect_logs(data, smooth_skeleton(1, "odd_trace"), max_exponent=F(3, 2))
        assert not r.detected


class TestPoles:
    def _model(self, c, d):
        return ExpansionModel(((-HALF, 0, c), (-HALF, 1, d)), 0.0, 1.0)

    def test_no_terms(self):
        m = ExpansionModel(((F(0), 0, 1.0),), 0.0, 1.0)
        assert pole_structure(m) == (0.0, 0.0)

    def test_unit_residue(self):
        res, dbl = pole_structure(self._model(math.sqrt(math.pi) / 2, 0.0))
        assert res == pytest.approx(1.0) and dbl == 0.0

    def test_double_pole(self):
        # Laurent data checked against the integral identity with mpmath
        c, d = 0.3, 0.7
        res, dbl = pole_structure(self._model(c, d))
        assert dbl == pytest.approx(-4 * d / math.sqrt(math.pi))
        mp.mp.dps = 30
        g = lambda s: (2 * c / s - 4 * d / s**2) / mp.gamma((s + 1) / 2)  # noqa: E731
        eps = mp.mpf("1e-8")
        # the odd part of g isolates the 1/s term (plus O(eps) from 1/s^3)
        residue = (g(eps) - g(-eps)) / 2 * eps
        assert float(residue) == pytest.approx(res, rel=1e-6)

    def test_circle_regular(self):
        s = circle_dirac_spectrum(0.25, 200)
        data = trace_samples(s, t_grid(min_time(s), 0.1), "odd_trace")
        m = fit_expansion(data, smooth_skeleton(1, "odd_trace"), max_exponent=F(3, 2))
        res, dbl = pole_structure(m)
        assert abs(res) < 1e-8 and abs(dbl) < 1e-8


class TestMellin:
    def test_catalan(self):
        r = mellin_check(circle_dirac_spectrum(0.25, 200), 1.0)
        assert r.rhs == pytest.approx(MINUS_FOUR_CATALAN, abs=1e-12)
        assert r.difference < 1e-4

    @pytest.mark.parametrize("a", [0.1, 0.25, 0.4])
    @pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
    def test_identity(self, a, s):
        assert mellin_check(circle_dirac_spectrum(a, 200), s).difference < 1e-4

    def test_symmetric(self):
        r = mellin_check(circle_dirac_spectrum(0.5, 200), 1.0)
        assert r.lhs == 0.0 and r.rhs == 0.0

    def test_scaled(self):
        r = mellin_check(circle_dirac_spectrum(0.25, 200).scaled(2.0), 1.0)
        assert r.difference < 1e-4
