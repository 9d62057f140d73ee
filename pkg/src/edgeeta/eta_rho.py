"""Eta invariants (exact for lattice spectra, heat-continued in general) and rho invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import integrate

from . import special_functions as sf
from .errors import DomainError, QuadratureFailure
from .heat_trace import (
    ExpansionModel,
    _erfc_sum,
    fit_expansion,
    min_time,
    odd_heat_trace,
    pole_structure,
    skeleton_terms,
    t_grid,
)
from .index_families import smooth_skeleton
from .model_spectra import Spectrum

FIT_T_MAX = 0.1
SLOT_ATOL = 1e-8


@dataclass(frozen=True)
class EtaResult:
    """Value of eta(D) or, when eta(D, s) has a pole at 0, its Laurent data.

    ``pole`` is ``(residue, double_pole_coeff)`` and ``value`` is None when
    ``regular`` is False.
    """

    value: Optional[float]
    method: str
    error_bound: float
    regular: bool = True
    pole: Optional[tuple] = None
    model: Optional[ExpansionModel] = None

    def __post_init__(self):
        if self.method not in ("hurwitz_exact", "heat_continuation", "direct_sum"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.regular and (self.value is not None or self.pole is None):
            raise ValueError("an irregular eta carries pole data and no value")

    def to_json(self):
        out = {"value": self.value, "method": self.method, "error_bound": self.error_bound,
               "regular": self.regular}
        if self.pole is not None:
            out["pole"] = {"residue": self.pole[0], "double_pole_coeff": self.pole[1]}
        return out


@dataclass(frozen=True)
class RhoResult:
    value: float
    flavor: str
    components: tuple
    error_bound: float = 0.0

    def __post_init__(self):
        if self.flavor not in ("APS", "CheegerGromov"):
            raise ValueError(f"unknown rho flavor {self.flavor!r}")
        e1, e2 = self.components
        if abs(self.value - (e1 - e2)) > self.error_bound + 1e-15:
            raise ValueError("rho value disagrees with its components")

    def to_json(self):
        return {"value": self.value, "flavor": self.flavor, "components": list(self.components),
                "error_bound": self.error_bound}


def eta_lattice(a) -> EtaResult:
    """eta of {n + a : n in Z} at s = 0 from zeta_H(0, a) - zeta_H(0, 1 - a)."""
    a = float(a)
    if a == 0.0:
        raise DomainError("a = 0 has a zero mode; the lattice eta needs a in (0, 1)")
    if not 0.0 < a < 1.0:
        raise DomainError(f"lattice shift must lie in (0, 1), got {a}")
    r = sf.hurwitz_zeta_difference(0.0, a, 1.0 - a)
    return EtaResult(r.value, "hurwitz_exact", r.abs_error_bound)


def eta_function(spec: Spectrum, z) -> sf.RealEval:
    """eta(D, z) = sum sign(lam) |lam|^{-z} for z above the convergence abscissa.

    Lattice spectra use the Hurwitz difference and are valid for every z.
    Other spectra are summed directly with a Weyl-tail bound, which needs
    z greater than the tail power.
    """
    if spec.squared:
        raise ValueError("eta needs a Dirac-type spectrum")
    if spec.is_symmetric():
        return sf.RealEval(0.0, 0.0)
    if spec.lattice is not None:
        a, scale = spec.lattice
        if a == 0.0:
            return sf.RealEval(0.0, 0.0)
        r = sf.hurwitz_zeta_difference(z, a, 1.0 - a)
        f = scale ** (-z)
        return sf.RealEval(f * r.value, f * r.abs_error_bound)
    mag, net = spec.signed_net()
    value = float(np.dot(net, mag ** (-float(z))))
    if spec.tail is None:
        return sf.RealEval(value, 4 * sf.EPS * len(mag) * abs(value))
    p, c = spec.tail.weyl_power, spec.tail.weyl_const
    if z <= p:
        raise DomainError(f"direct eta sum diverges for z={z} <= tail power {p}")
    lam = spec.cutoff
    tail = c * z / (z - p) * lam ** (p - z)
    return sf.RealEval(value, tail)


def _closed_form_log_integral(beta, p, T):
    """int_0^T t^{beta-1} (log t)^p dt for beta > 0."""
    lt = math.log(T)
    val = T**beta / beta
    for k in range(1, p + 1):
        val = T**beta * lt**k / beta - k / beta * val
    return val


def eta_numeric(spec: Spectrum, skeleton=None, points_per_decade=40, max_exponent=Fraction(3, 2),
                quad_target=1e-10) -> EtaResult:
    """eta(D) through the heat representation continued to s = 0.

    eta(D) = pi^{-1/2} int_0^inf t^{-1/2} Tr D e^{-tD^2} dt, where the terms
    with exponent <= -1/2 of the fitted short-time expansion are integrated
    over (0, 1] by analytic continuation, the remainder is integrated
    numerically on [t_lo, 1] and through the fit on (0, t_lo), and
    (1, inf) is summed in closed form with erfc.

    Args:
        spec: a Dirac-type spectrum.
        skeleton: expansion template for the odd trace (default: the smooth
            one-dimensional template).
        points_per_decade: fit grid density on [t_lo, 0.1].
        max_exponent: drop template terms above this exponent.
        quad_target: absolute target for the quadrature on [t_lo, 1].
    """
    if spec.squared:
        raise ValueError("eta needs a Dirac-type spectrum")
    if spec.is_symmetric():
        return EtaResult(0.0, "heat_continuation", 0.0)
    if skeleton is None:
        skeleton = smooth_skeleton(1, "odd_trace")
    terms = skeleton_terms(skeleton, max_exponent)
    t_lo = min_time(spec)
    if t_lo == 0.0:
        # complete finite spectrum: the sum itself is exact
        mag, net = spec.signed_net()
        return EtaResult(float(np.dot(net, np.ones_like(mag))), "direct_sum", 0.0)
    if t_lo >= FIT_T_MAX / 10:
        raise DomainError(f"cutoff {spec.cutoff:g} too small: fit window starts at t={t_lo:g}")
    first = _continue(spec, terms, t_lo, FIT_T_MAX, points_per_decade, quad_target)
    if not first.regular or t_lo >= FIT_T_MAX / 20:
        return first
    # a second window exposes terms the template misses
    second = _continue(spec, terms, t_lo, FIT_T_MAX / 2, points_per_decade, quad_target)
    if not second.regular:
        return first
    spread = abs(first.value - second.value)
    return EtaResult(first.value, "heat_continuation", first.error_bound + spread, model=first.model)


def _continue(spec, terms, t_lo, t_max, points_per_decade, quad_target) -> EtaResult:
    ts = t_grid(t_lo, t_max, points_per_decade)
    samples = [odd_heat_trace(spec, t) for t in ts]
    model = fit_expansion(samples, terms)

    half = Fraction(-1, 2)
    c_half = model.coefficient(half, 0)
    d_half = model.coefficient(half, 1)
    slot_tol = lambda lp: max(SLOT_ATOL, 10 * model.coefficient_uncertainty(half, lp))  # noqa: E731
    if abs(c_half) > slot_tol(0) or abs(d_half) > slot_tol(1):
        return EtaResult(None, "heat_continuation", 0.0, regular=False, pole=pole_structure(model), model=model)

    singular = [(a, p, c) for a, p, c in model.terms if a <= half]
    regular = [(a, p, c) for a, p, c in model.terms if a > half]
    mag, net = spec.signed_net()

    # continuation of int_0^1 t^{a - 1/2} (log t)^p dt to s = 0
    sing_val = 0.0
    for a, p, c in singular:
        if a == half:
            continue
        sing_val += c * (-1) ** p * math.factorial(p) / float(a + Fraction(1, 2)) ** (p + 1)

    def regular_part(t):
        return float(np.dot(net, mag * np.exp(-t * mag * mag))) - sum(
            c * t ** float(a) * math.log(t) ** p for a, p, c in singular
        )

    head = sum(c * _closed_form_log_integral(float(a) + 0.5, p, t_lo) for a, p, c in regular)
    # integrate in u = sqrt(t) to remove the t^{-1/2} weight
    mid, qerr = integrate.quad(lambda u: 2.0 * regular_part(u * u), math.sqrt(t_lo), 1.0,
                               epsabs=quad_target, epsrel=1e-12, limit=500)
    if qerr > 100 * quad_target:
        raise QuadratureFailure(f"eta quadrature error {qerr:.3g}")
    erfc_val, erfc_bound, erfc_noise = _erfc_sum(spec, 1.0)
    rp = math.sqrt(math.pi)
    value = erfc_val + (sing_val + head + mid) / rp
    fit_err = sum(u * (_closed_form_log_integral(float(a) + 0.5, p, t_lo) if a > half else 1.0)
                  for (a, p, _), u in zip(model.terms, model.uncertainty))
    bound = erfc_bound + erfc_noise + (qerr + abs(fit_err)) / rp
    return EtaResult(float(value), "heat_continuation", float(bound), model=model)


def rho_aps(a, b) -> RhoResult:
    """APS rho of the circle twisted by characters e^{2 pi i a} and e^{2 pi i b}: 2(b - a)."""
    ea, eb = eta_lattice(a), eta_lattice(b)
    value = ea.value - eb.value
    return RhoResult(value, "APS", (ea.value, eb.value), ea.error_bound + eb.error_bound + 1e-15)


def line_gamma_trace_integrand(t, x) -> float:
    """Diagonal of the kernel of -i d/dx e^{-t Delta} on the real line at (x, x).

    The kernel derivative is proportional to (x - y) e^{-(x-y)^2/4t}, which
    vanishes on the diagonal for every t and x.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    diff = x - x
    return -diff / (2 * t) * math.exp(-diff * diff / (4 * t)) / math.sqrt(4 * math.pi * t)


def rho_cheeger_gromov_model(a) -> RhoResult:
    """Cheeger-Gromov rho for the Z-cover of the circle by the line.

    The lifted operator is translation invariant and its Gamma-trace
    integrand vanishes pointwise, so the von Neumann eta is 0 and
    rho = -eta(D_a).
    """
    a = float(a)
    if not 0.0 < a < 1.0:
        raise DomainError(f"twist parameter must lie in (0, 1), got {a}")
    eta_gamma = 0.0
    e = eta_lattice(a)
    return RhoResult(eta_gamma - e.value, "CheegerGromov", (eta_gamma, e.value), e.error_bound)


def _eta_of(spec: Spectrum) -> EtaResult:
    if spec.lattice is not None and spec.lattice[0] != 0.0:
        return eta_lattice(spec.lattice[0])
    return eta_numeric(spec)


def rho_from_spectra(spec_alpha: Spectrum, spec_beta: Spectrum) -> RhoResult:
    ea, eb = _eta_of(spec_alpha), _eta_of(spec_beta)
    if not (ea.regular and eb.regular):
        raise DomainError("rho from irregular etas needs the cancellation model")
    return RhoResult(ea.value - eb.value, "APS", (ea.value, eb.value), ea.error_bound + eb.error_bound)


def rho_invariance_check(pair_before, pair_after, atol=1e-9) -> bool:
    """True iff two spectrum pairs give the same rho within their error bounds."""
    r1 = rho_from_spectra(*pair_before)
    r2 = rho_from_spectra(*pair_after)
    return abs(r1.value - r2.value) <= r1.error_bound + r2.error_bound + atol
