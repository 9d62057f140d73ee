"""Heat traces of spectra, short-time expansion fits, and the cylinder term K(t).

Spectral sums are truncated at the spectrum cutoff; the omitted tail is
bounded through the spectrum's Weyl model (``N(x) <= C x^p`` beyond the
cutoff), which turns each tail into an upper incomplete gamma function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy import special as sc

from .errors import IllConditioned, InsufficientSamples, QuadratureFailure, TailUnbounded
from .index_families import HeatSkeleton, IndexSet
from .model_spectra import Spectrum

# Gaussian tail e^{-25} below double precision relative to O(1) traces
TAIL_EXPONENT = 25.0
COND_LIMIT = 1e8
LOG_THRESHOLD = 10.0
POINTS_PER_DECADE = 40
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TraceSample:
    """One evaluation of a spectral sum.

    ``noise`` estimates floating-point rounding in ``value`` (it scales with
    the sum of absolute terms, which matters for the odd trace).
    """

    t: float
    value: float
    truncation_bound: float = 0.0
    noise: float = 0.0

    def __post_init__(self):
        for name in ("t", "value", "truncation_bound", "noise"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.t <= 0:
            raise ValueError("sample time must be positive")
        if self.truncation_bound < 0 or self.noise < 0:
            raise ValueError("error bounds must be non-negative")


def t_grid(t_min=1e-4, t_max=1e-1, points_per_decade=POINTS_PER_DECADE, points=None) -> np.ndarray:
    """Log-spaced sample times; ``points`` overrides the per-decade density."""
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if points is None:
        points = max(int(round(points_per_decade * math.log10(t_max / t_min))) + 1, 2)
    return np.geomspace(t_min, t_max, points)


def min_time(spec: Spectrum) -> float:
    """Smallest t at which the truncated sum is trusted."""
    if spec.tail is None:
        return 0.0
    if spec.squared:
        return TAIL_EXPONENT / spec.cutoff
    return TAIL_EXPONENT / spec.cutoff**2


def _upper_gamma(a, x):
    return float(sc.gammaincc(a, x) * sc.gamma(a))


def _check_tail(spec: Spectrum, t):
    if spec.tail is None:
        return
    x = t * (spec.cutoff if spec.squared else spec.cutoff**2)
    if x < TAIL_EXPONENT:
        raise TailUnbounded(
            f"t={t:g} is below the truncation limit {min_time(spec):g} for cutoff {spec.cutoff:g}"
        )


def _tail_bound(spec: Spectrum, t, which):
    """Bound on the omitted part of a spectral sum beyond the cutoff."""
    if spec.tail is None:
        return 0.0
    p, c = spec.tail.weyl_power, spec.tail.weyl_const
    lam = spec.cutoff
    if spec.squared:
        if which != "heat":
            raise ValueError("odd sums need a Dirac-type spectrum")
        return c * t ** (-p) * _upper_gamma(p + 1.0, t * lam)
    x = t * lam * lam
    if which == "heat":
        return c * t ** (-p / 2) * _upper_gamma(1.0 + p / 2, x)
    if which == "odd":
        return c * t ** (-(p + 1) / 2) * _upper_gamma((p + 3) / 2, x)
    if which == "erfc":
        return c / math.sqrt(math.pi) * t ** (-p / 2) * _upper_gamma((p + 1) / 2, x)
    raise ValueError(which)


def heat_trace(spec: Spectrum, t) -> TraceSample:
    """Tr e^{-tD^2} = h + sum mult e^{-t lam^2} (e^{-t lam} for Laplace-type spectra)."""
    if t <= 0:
        raise ValueError("t must be positive")
    _check_tail(spec, t)
    arg = spec.lam if spec.squared else spec.lam * spec.lam
    terms = spec.mult * np.exp(-t * arg)
    value = spec.kernel_dim + float(np.sum(terms))
    return TraceSample(float(t), value, _tail_bound(spec, t, "heat"), EPS * max(len(terms), 1) * abs(value))


def odd_heat_trace(spec: Spectrum, t) -> TraceSample:
    """Tr D e^{-tD^2}, summed over magnitudes with net multiplicities.

    Eigenvalues +lam and -lam are paired before summing, so a symmetric
    spectrum gives exactly 0.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    _check_tail(spec, t)
    mag, net = spec.signed_net()
    if len(mag) == 0:
        return TraceSample(float(t), 0.0, 0.0, 0.0)
    terms = mag * np.exp(-t * mag * mag)
    value = float(np.dot(net, terms))
    abs_sum = float(np.dot(np.abs(net), terms))
    return TraceSample(float(t), value, _tail_bound(spec, t, "odd"), 4 * EPS * len(mag) * abs_sum)


def trace_samples(spec: Spectrum, ts, kind="trace") -> list:
    fn = {"trace": heat_trace, "odd_trace": odd_heat_trace}[kind]
    return [fn(spec, float(t)) for t in ts]


def _erfc_sum(spec: Spectrum, t):
    """sum net * erfc(|lam| sqrt t) with its tail bound and rounding noise."""
    mag, net = spec.signed_net()
    if len(mag) == 0:
        return 0.0, 0.0, 0.0
    terms = sc.erfc(mag * math.sqrt(t))
    value = float(np.dot(net, terms))
    noise = 4 * EPS * len(mag) * float(np.dot(np.abs(net), terms))
    return value, _tail_bound(spec, t, "erfc"), noise


def aps_K(spec: Spectrum, t) -> float:
    """Cylinder contribution K(t) = -(1/2) sum sign(lam) erfc(|lam| sqrt t) - h/2."""
    if t <= 0:
        raise ValueError("t must be positive")
    _check_tail(spec, t)
    value, _, _ = _erfc_sum(spec, t)
    return -0.5 * value - 0.5 * spec.kernel_dim


def aps_K_sample(spec: Spectrum, t) -> TraceSample:
    """K(t) + h/2 as a sample with its truncation bound."""
    _check_tail(spec, t)
    value, bound, noise = _erfc_sum(spec, t)
    return TraceSample(float(t), -0.5 * value, 0.5 * bound, 0.5 * noise)


# ---------------------------------------------------------------------------
# expansion fitting


def skeleton_terms(skeleton, max_exponent=None) -> list:
    """Normalise a skeleton to a sorted list of ``(Fraction exponent, log_power)``."""
    if isinstance(skeleton, HeatSkeleton):
        points = skeleton.terms()
    elif isinstance(skeleton, IndexSet):
        points = sorted(skeleton.points)
    else:
        points = []
        for item in skeleton:
            if isinstance(item, (tuple, list)):
                exp, logp = item[0], int(item[1]) if len(item) > 1 else 0
            else:
                exp, logp = item, 0
            points.append((Fraction(exp).limit_denominator(10**6), logp))
        points = sorted(set(points))
    if max_exponent is not None:
        points = [p for p in points if p[0] <= Fraction(max_exponent)]
    return points


def _basis(ts, terms):
    ts = np.asarray(ts, dtype=float)
    log_t = np.log(ts)
    cols = [ts ** float(a) * log_t**p for a, p in terms]
    return np.column_stack(cols)


@dataclass(frozen=True)
class ExpansionModel:
    """Fitted coefficients of sum_j c_j t^{a_j} (log t)^{p_j}.

    ``residual_norm`` is the RMS of the weighted residuals; each row is
    weighted by t^{-a_min} so all samples count on a comparable scale.
    ``uncertainty`` holds a per-coefficient error estimate propagated from
    the residuals and the sample error bounds.
    """

    terms: tuple
    residual_norm: float
    condition_estimate: float
    uncertainty: tuple = ()
    noise_floor: float = 0.0
    n_samples: int = 0
    ill_conditioned: bool = False

    def __post_init__(self):
        keys = [(a, p) for a, p, _ in self.terms]
        if keys != sorted(set(keys)):
            raise ValueError("terms must be strictly increasing in (exponent, log_power)")
        if self.residual_norm < 0:
            raise ValueError("residual_norm must be non-negative")

    def coefficient(self, exponent, log_power=0) -> float:
        key = (Fraction(exponent), log_power)
        for a, p, c in self.terms:
            if (a, p) == key:
                return c
        return 0.0

    def coefficient_uncertainty(self, exponent, log_power=0) -> float:
        key = (Fraction(exponent), log_power)
        for (a, p, _), u in zip(self.terms, self.uncertainty):
            if (a, p) == key:
                return u
        return 0.0

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, p, c in self.terms:
            out = out + c * t ** float(a) * np.log(t) ** p
        return out

    def to_json(self) -> dict:
        return {
            "terms": [
                {"exponent": str(a), "log_power": p, "coefficient": c, "uncertainty": u}
                for (a, p, c), u in zip(self.terms, self.uncertainty or (None,) * len(self.terms))
            ],
            "residual_norm": self.residual_norm,
            "condition_estimate": self.condition_estimate,
            "noise_floor": self.noise_floor,
            "n_samples": self.n_samples,
            "ill_conditioned": self.ill_conditioned,
        }


def _sample_arrays(samples):
    ts = np.array([s.t for s in samples], dtype=float)
    ys = np.array([s.value for s in samples], dtype=float)
    err = np.array([s.truncation_bound + s.noise for s in samples], dtype=float)
    return ts, ys, err


def fit_arrays(ts, ys, terms, err=None, cond_limit=COND_LIMIT, refuse=True) -> ExpansionModel:
    """Weighted least squares on the basis t^a (log t)^p (see :func:`fit_expansion`)."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    err = np.zeros_like(ts) if err is None else np.asarray(err, dtype=float)
    if len(terms) == 0:
        raise ValueError("empty skeleton")
    if len(ts) < 2 * len(terms):
        raise InsufficientSamples(f"{len(ts)} samples for {len(terms)} terms; need at least {2 * len(terms)}")
    if np.any(ts <= 0):
        raise ValueError("sample times must be positive")
    a_min = float(min(a for a, _ in terms))
    w = ts ** (-a_min)
    A = _basis(ts, terms) * w[:, None]
    b = ys * w
    col = np.linalg.norm(A, axis=0)
    col[col == 0] = 1.0
    An = A / col
    sv = np.linalg.svd(An, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > cond_limit and refuse:
        raise IllConditioned(f"condition estimate {cond:.3g} exceeds {cond_limit:.3g}", condition_estimate=cond)
    coef_n, *_ = np.linalg.lstsq(An, b, rcond=None)
    coef = coef_n / col
    resid = b - An @ coef_n
    rms = float(np.sqrt(np.mean(resid**2)))
    pinv = np.linalg.pinv(An)
    spread = np.abs(resid) + err * w
    unc = (np.abs(pinv) @ spread) / col
    floor = float(np.sqrt(np.mean((err * w) ** 2)))
    out = tuple((a, p, float(c)) for (a, p), c in zip(terms, coef))
    return ExpansionModel(out, rms, cond, tuple(float(u) for u in unc), floor, len(ts), cond > cond_limit)


def fit_expansion(samples, skeleton, max_exponent=None, cond_limit=COND_LIMIT, refuse=True) -> ExpansionModel:
    """Fit the short-time expansion prescribed by ``skeleton`` to trace samples.

    Args:
        samples: sequence of :class:`TraceSample`, ideally on a log grid.
        skeleton: a :class:`HeatSkeleton`, an :class:`IndexSet`, or an iterable
            of ``(exponent, log_power)`` pairs.
        max_exponent: drop skeleton terms above this exponent.
        cond_limit: refuse fits whose column-normalised condition number
            exceeds this value.
        refuse: when False, flag ill-conditioned fits instead of raising.

    Raises:
        InsufficientSamples: fewer than two samples per term.
        IllConditioned: the design matrix is too close to singular.
    """
    terms = skeleton_terms(skeleton, max_exponent)
    ts, ys, err = _sample_arrays(samples)
    return fit_arrays(ts, ys, terms, err, cond_limit, refuse)


@dataclass(frozen=True)
class LogDetection:
    detected: bool
    improvement: float
    base: ExpansionModel
    augmented: ExpansionModel
    slots: tuple = field(default_factory=tuple)

    def to_json(self):
        return {"detected": self.detected, "improvement": self.improvement,
                "slots": [str(s) for s in self.slots],
                "base": self.base.to_json(), "augmented": self.augmented.to_json()}


def detect_logs(samples, base_skeleton, slots=None, threshold=LOG_THRESHOLD, max_exponent=None) -> LogDetection:
    """Test whether adding t^a log t terms improves the fit markedly.

    ``slots`` lists the exponents that receive a log partner (default: every
    exponent of the base skeleton). Logs are reported when the residual
    drops by more than ``threshold`` and the base residual is not already at
    the sample noise level.
    """
    base_terms = [(a, 0) for a, p in skeleton_terms(base_skeleton, max_exponent) if p == 0]
    base_terms = sorted(set(base_terms))
    if slots is None:
        slots = [a for a, _ in base_terms]
    slots = tuple(sorted({Fraction(s) for s in slots}))
    aug_terms = sorted(set(base_terms) | {(s, 1) for s in slots})
    ts, ys, err = _sample_arrays(samples)
    base = fit_arrays(ts, ys, base_terms, err)
    aug = fit_arrays(ts, ys, aug_terms, err)
    # rounding in the data sets the smallest residual worth comparing
    floor = max(base.noise_floor, aug.noise_floor, 1e-300)
    if base.residual_norm <= 10 * floor:
        ratio = 1.0
    else:
        ratio = base.residual_norm / max(aug.residual_norm, floor)
    return LogDetection(bool(ratio > threshold), float(ratio), base, aug, slots)


# ---------------------------------------------------------------------------
# pole structure and the Mellin identity


PSI_HALF = -np.euler_gamma - 2 * math.log(2)


def pole_structure(model: ExpansionModel):
    """Laurent data of eta(D, s) at s = 0 from the fitted t^{-1/2} slots.

    With Tr D e^{-tD^2} ~ c t^{-1/2} + d t^{-1/2} log t + ... one has
    Gamma((s+1)/2) eta(s) = 2c/s - 4d/s^2 + regular. Dividing by
    Gamma((s+1)/2) = sqrt(pi) (1 + psi(1/2) s / 2 + ...) gives the returned
    ``(residue, double_pole_coeff)``; for d = 0 the residue is 2c/sqrt(pi).
    """
    c = model.coefficient(Fraction(-1, 2), 0)
    d = model.coefficient(Fraction(-1, 2), 1)
    rp = math.sqrt(math.pi)
    return (2 * c + 2 * d * PSI_HALF) / rp, -4 * d / rp


@dataclass(frozen=True)
class MellinResult:
    s: float
    lhs: float
    rhs: float
    difference: float
    quad_error: float

    def to_json(self):
        return {"s": self.s, "lhs": self.lhs, "rhs": self.rhs, "difference": self.difference,
                "quad_error": self.quad_error}


def _quad(fn, a, b, target, what):
    val, err = integrate.quad(fn, a, b, epsabs=target * 1e-2, epsrel=1e-10, limit=500)
    if not math.isfinite(val) or err > target:
        raise QuadratureFailure(f"{what}: error estimate {err:.3g} above target {target:.3g}")
    return val, err


def mellin_lhs(spec: Spectrum, s, target=1e-6, splice_span=30.0):
    """Integral of (K(t) + h/2) t^{s-1} over (0, infinity).

    (0, 1] is integrated in u = sqrt(t). Below the truncation limit t_c the
    integrand is replaced by a fit c_0 + c_1 t^{1/2} + c_2 t + c_3 t^{3/2}
    over [t_c, splice_span * t_c], integrated in closed form.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    mag, net = spec.signed_net()
    if len(mag) == 0:
        return 0.0, 0.0

    def g(t):
        return -0.5 * float(np.dot(net, sc.erfc(mag * math.sqrt(t))))

    t_c = min_time(spec)
    head = 0.0
    if t_c > 0:
        if splice_span * t_c >= 1:
            raise TailUnbounded("cutoff too small for the short-time splice")
        ts = np.geomspace(t_c, splice_span * t_c, 40)
        samples = [aps_K_sample(spec, t) for t in ts]
        terms = [(Fraction(j, 2), 0) for j in range(4)]
        model = fit_expansion(samples, terms)
        head = sum(c * t_c ** (float(a) + s) / (float(a) + s) for a, _, c in model.terms)
    u_c = math.sqrt(t_c)
    mid, e1 = _quad(lambda u: 2.0 * u ** (2 * s - 1) * g(u * u), u_c, 1.0, target, "mellin (0,1]")
    tail, e2 = _quad(lambda t: t ** (s - 1) * g(t), 1.0, math.inf, target, "mellin (1,inf)")
    return head + mid + tail, e1 + e2


def mellin_check(spec: Spectrum, s, target=1e-6) -> MellinResult:
    """Compare both sides of int (K + h/2) t^{s-1} dt = -Gamma(s+1/2)/(2s sqrt pi) eta(2s)."""
    from .eta_rho import eta_function

    lhs, qerr = mellin_lhs(spec, s, target)
    if spec.is_symmetric():
        rhs = 0.0
    else:
        eta = eta_function(spec, 2 * s).value
        rhs = -math.gamma(s + 0.5) / (2 * s * math.sqrt(math.pi)) * eta
    return MellinResult(float(s), lhs, rhs, abs(lhs - rhs), qerr)


# ---------------------------------------------------------------------------
# export


def samples_to_csv(samples, path):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value", "bound"])
        for smp in samples:
            w.writerow([repr(smp.t), repr(smp.value), repr(smp.truncation_bound + smp.noise)])


def samples_to_json(samples) -> list:
    return [{"t": s.t, "value": s.value, "bound": s.truncation_bound + s.noise} for s in samples]
