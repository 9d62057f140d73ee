"""Special functions consumed by the numerical modules.

Every evaluator returns a :class:`RealEval` carrying the value together with
an absolute error bound. Bessel functions of large or transitional argument
are delegated to :mod:`scipy.special` (AMOS/Cephes); everything else, the
Hurwitz zeta function and the Bessel zero finder in particular, is computed
here with explicit remainder bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, DomainError, PoleError

EPS = np.finfo(float).eps

NU_MAX = 500.0
X_MAX = 1e6
K_MAX = 10**6

DEFAULT_J_TOL = 1e-12
DEFAULT_I_RTOL = 1e-10
DEFAULT_ZETA_TOL = 1e-10


@dataclass(frozen=True)
class RealEval:
    """A real value with an absolute error bound.

    ``precision_loss`` is set when the requested tolerance could not be met;
    the bound is still reported honestly in that case.
    """

    value: float
    abs_error_bound: float
    precision_loss: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "abs_error_bound", float(self.abs_error_bound))
        object.__setattr__(self, "precision_loss", bool(self.precision_loss))

    def __float__(self):
        return float(self.value)


def _check_order_arg(nu, x):
    if nu < 0 or x < 0 or math.isnan(nu) or math.isnan(x):
        raise DomainError(f"order and argument must be non-negative, got nu={nu}, x={x}")
    if nu > NU_MAX or x > X_MAX:
        raise DomainError(f"supported range is nu <= {NU_MAX}, x <= {X_MAX:g}")


# ---------------------------------------------------------------------------
# Bessel J


def _j_series(nu, x, max_terms=400):
    """Ascending series for J_nu(x).

    Returns ``(value, bound)`` where the bound covers rounding in the
    alternating sum (proportional to the sum of absolute terms) and the
    truncated tail, or ``None`` when the series did not settle.
    """
    half = 0.5 * x
    log_pref = nu * math.log(half) - math.lgamma(nu + 1.0) if x > 0 else 0.0
    q = half * half
    term = 1.0
    total = 1.0
    abs_total = 1.0
    for k in range(1, max_terms):
        term *= -q / (k * (k + nu))
        total += term
        abs_total += abs(term)
        ratio = q / ((k + 1) * (k + 1 + nu))
        if abs(term) < EPS * abs_total and ratio < 0.5:
            tail = abs(term) * ratio / (1.0 - ratio)
            pref = math.exp(log_pref)
            value = pref * total
            bound = pref * (tail + 4.0 * (k + 2) * EPS * abs_total)
            return value, bound
    return None


def _wronskian_bound(nu, x, value):
    # J_nu Y_{nu+1} - J_{nu+1} Y_nu = -2 / (pi x); the residual measures the
    # library's accuracy at this point.
    jn1 = sc.jv(nu + 1.0, x)
    yn = sc.yv(nu, x)
    yn1 = sc.yv(nu + 1.0, x)
    w = value * yn1 - jn1 * yn
    target = -2.0 / (math.pi * x)
    if not (math.isfinite(w) and math.isfinite(yn) and math.isfinite(yn1)):
        return 8.0 * EPS * max(1.0, abs(value))
    rel = abs(w - target) / abs(target)
    return max(rel, 8.0 * EPS) * max(1.0, abs(value))


def bessel_j(nu, x, tol=DEFAULT_J_TOL):
    """Bessel function of the first kind J_nu(x) for real nu, x >= 0.

    The ascending series is used whenever its rounding bound meets ``tol``
    (relative to ``max(1, |J|)``); otherwise the value comes from
    ``scipy.special.jv`` and its error is estimated from the Wronskian
    residual against Y_nu.
    """
    nu = float(nu)
    x = float(x)
    _check_order_arg(nu, x)
    if x == 0.0:
        return RealEval(1.0 if nu == 0.0 else 0.0, 0.0)
    if x <= 25.0 or x * x <= 4.0 * (nu + 1.0):
        res = _j_series(nu, x)
        if res is not None:
            value, bound = res
            if bound <= tol * max(1.0, abs(value)):
                return RealEval(value, bound)
    value = float(sc.jv(nu, x))
    bound = _wronskian_bound(nu, x, value)
    return RealEval(value, bound, precision_loss=bound > tol * max(1.0, abs(value)))


def bessel_j_array(nu, x):
    """Vectorised J_nu(x) without error bookkeeping (scan/quadrature helper)."""
    return sc.jv(nu, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Bessel I


def _i_series(nu, x, max_terms=5000):
    """Positive-term series sum_k q^k / (k! (nu+1)_k), q = x^2/4.

    Returns ``(sum, relative bound)``; the caller multiplies by
    (x/2)^nu / Gamma(nu+1). Every term is a product of at most k+1 roundings,
    so the relative error stays ~ k * eps.
    """
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, max_terms):
        term *= q / (k * (k + nu))
        total += term
        ratio = q / ((k + 1) * (k + 1 + nu))
        if ratio < 0.5 and term < EPS * total:
            tail = term * ratio / (1.0 - ratio)
            return total, tail / total + 2.0 * (k + 2) * EPS
    return None


def bessel_i(nu, x, scaled=False, rtol=DEFAULT_I_RTOL):
    """Modified Bessel function I_nu(x), optionally scaled by e^{-x}.

    Raises :class:`OverflowError` if the unscaled value is not representable
    and ``scaled`` is False.
    """
    nu = float(nu)
    x = float(x)
    _check_order_arg(nu, x)
    if x == 0.0:
        return RealEval(1.0 if nu == 0.0 else 0.0, 0.0)
    log_pref = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
    res = _i_series(nu, x) if x <= 500.0 and abs(log_pref) < 600.0 else None
    if res is not None:
        total, rel = res
        pref = math.exp(log_pref)
        # exp of a rounded argument: relative error ~ |argument| * eps
        rel += (abs(log_pref) + 1.0) * 2.0 * EPS
        value = pref * total
        if math.isinf(value) or (value == 0.0 and total > 0 and pref > 0):
            res = None
        else:
            if scaled:
                value *= math.exp(-x)
            elif math.isinf(value):
                raise OverflowError(f"I_{nu}({x}) overflows; request scaled=True")
            return RealEval(value, rel * value, precision_loss=rel > rtol)
    value = float(sc.ive(nu, x))
    rel = 16.0 * EPS
    if not scaled:
        logv = math.log(value) + x if value > 0 else -math.inf
        if logv > 709.0:
            raise OverflowError(f"I_{nu}({x}) overflows; request scaled=True")
        value = math.exp(logv)
        rel += abs(logv) * EPS
    return RealEval(value, rel * value, precision_loss=rel > rtol)


def bessel_ive_array(nu, x):
    """Vectorised e^{-x} I_nu(x) without error bookkeeping."""
    return sc.ive(nu, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Zeros of J


def mcmahon_zero(nu, k):
    """McMahon's large-k expansion for the k-th positive zero of J_nu."""
    beta = (k + 0.5 * nu - 0.25) * math.pi
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    )


def _j_and_deriv(nu, x):
    j = float(sc.jv(nu, x))
    dj = (nu / x) * j - float(sc.jv(nu + 1.0, x))
    return j, dj


def _refine_zero(nu, lo, hi, max_iter=100):
    """Safeguarded Newton on a sign-changing bracket ``[lo, hi]``."""
    flo = float(sc.jv(nu, lo))
    fhi = float(sc.jv(nu, hi))
    if flo == 0.0:
        return lo, 0.0
    if fhi == 0.0:
        return hi, 0.0
    if flo * fhi > 0:
        raise ConvergenceError(f"bracket [{lo}, {hi}] does not enclose a zero of J_{nu}")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f, df = _j_and_deriv(nu, x)
        if f == 0.0:
            return x, 0.0
        if f * flo < 0:
            hi = x
        else:
            lo, flo = x, f
        step = f / df if df != 0.0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 2.0 * EPS * x or hi - lo <= 4.0 * EPS * x:
            f, df = _j_and_deriv(nu, x_new)
            err = abs(f / df) if df != 0.0 else hi - lo
            return x_new, err + 2.0 * EPS * x_new
        x = x_new
    raise ConvergenceError(f"zero refinement of J_{nu} exceeded {max_iter} iterations")


def _scan_zeros(nu, count=None, x_max=None, step=0.5):
    """Locate sign changes of J_nu starting at x = nu (no zeros below).

    Stops after ``count`` zeros or beyond ``x_max``. Returns brackets.
    """
    brackets = []
    x0 = max(nu, 1e-3)
    chunk = 256
    start = x0
    prev_x, prev_f = start, float(sc.jv(nu, start))
    while True:
        xs = start + step * np.arange(1, chunk + 1)
        fs = sc.jv(nu, xs)
        for xi, fi in zip(xs, fs):
            if x_max is not None and prev_x > x_max:
                return brackets
            if prev_f == 0.0:
                brackets.append((prev_x - step * 0.5, prev_x + step * 0.5))
            elif prev_f * fi < 0:
                brackets.append((prev_x, float(xi)))
            if count is not None and len(brackets) >= count:
                return brackets
            prev_x, prev_f = float(xi), float(fi)
        start = float(xs[-1])


def _mcmahon_valid(nu, k):
    return (k + 0.5 * nu - 0.25) * math.pi >= max(3.0 * nu, 12.0)


def bessel_j_zero(nu, k, tol=1e-12):
    """The k-th positive zero j_{nu,k} of J_nu.

    The bracket comes from McMahon's expansion when k is large compared with
    nu, and from a sign-change scan starting at x = nu otherwise; the root is
    then polished with safeguarded Newton (bisection fallback).
    """
    nu = float(nu)
    if nu < 0 or nu > NU_MAX:
        raise DomainError(f"order must lie in [0, {NU_MAX}], got {nu}")
    if int(k) != k or k < 1 or k > K_MAX:
        raise DomainError(f"zero index must be an integer in [1, {K_MAX}], got {k}")
    k = int(k)
    bracket = None
    if _mcmahon_valid(nu, k):
        g = mcmahon_zero(nu, k)
        lo, hi = g - 1.0, g + 1.0
        if sc.jv(nu, lo) * sc.jv(nu, hi) < 0:
            bracket = (lo, hi)
    if bracket is None:
        bracket = _scan_zeros(nu, count=k)[k - 1]
    x, err = _refine_zero(nu, *bracket)
    return RealEval(x, err, precision_loss=err > tol)


def bessel_j_zeros_below(nu, x_max):
    """All positive zeros of J_nu not exceeding ``x_max``, ascending."""
    nu = float(nu)
    if nu < 0 or nu > NU_MAX:
        raise DomainError(f"order must lie in [0, {NU_MAX}], got {nu}")
    if x_max <= nu:
        return []
    out = []
    for lo, hi in _scan_zeros(nu, x_max=x_max):
        x, _ = _refine_zero(nu, lo, hi)
        if x <= x_max:
            out.append(x)
    return out


# ---------------------------------------------------------------------------
# erfc and log-gamma


def erfc(x):
    """Complementary error function with reflection for negative x."""
    x = float(x)
    if x < 0:
        v = 2.0 - math.erfc(-x)
        return RealEval(v, 4.0 * EPS * v)
    v = math.erfc(x)
    return RealEval(v, 4.0 * EPS * v)


def erfc_array(x):
    """Vectorised erfc (scipy.special)."""
    return sc.erfc(np.asarray(x, dtype=float))


def log_gamma(x):
    """log |Gamma(x)| for real x not a non-positive integer."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    v = math.lgamma(x)
    return RealEval(v, 4.0 * EPS * max(1.0, abs(v)))


# ---------------------------------------------------------------------------
# Hurwitz zeta


@lru_cache(maxsize=None)
def bernoulli_even(n_max):
    """Exact Bernoulli numbers B_0, B_2, ..., B_{2 n_max} (Akiyama-Tanigawa)."""
    m_top = 2 * n_max
    a = [Fraction(0)] * (m_top + 1)
    b = []
    for m in range(m_top + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        b.append(a[0])
    return tuple(b[0::2])


_EM_TERMS = 20


def _em_parts(s, a):
    """Euler-Maclaurin pieces of zeta(s, a) excluding the pole term.

    Returns ``(regular_sum, N + a, bound)`` with
    zeta(s, a) = regular_sum + (N + a)^{1-s} / (s - 1).
    """
    N = max(0, int(math.ceil(abs(s) + 2 * _EM_TERMS / math.pi + 2 - a)))
    direct = [(n + a) ** (-s) for n in range(N)]
    x = N + a
    head = math.fsum(direct) + 0.5 * x ** (-s)
    bern = bernoulli_even(_EM_TERMS + 1)
    corr = []
    poch = s  # rising factorial (s)_{2j-1}
    fact = 2.0  # (2j)!
    for j in range(1, _EM_TERMS + 1):
        corr.append(float(bern[j]) / fact * poch * x ** (-s - 2 * j + 1))
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    # poch is now (s)_{2M+1}; bound uses (s)_{2M} = poch / (s + 2M) when defined.
    sigma_eff = s + 2 * _EM_TERMS - 1
    poch_2m = 1.0
    for i in range(2 * _EM_TERMS):
        poch_2m *= s + i
    remainder = 4.0 * abs(poch_2m) / (2 * math.pi) ** (2 * _EM_TERMS) * x ** (-sigma_eff) / sigma_eff
    total = head + math.fsum(corr)
    rounding = 4.0 * EPS * (math.fsum(abs(d) for d in direct) + 0.5 * x ** (-s) + math.fsum(abs(c) for c in corr))
    return total, x, remainder + rounding


def hurwitz_zeta(s, a, tol=DEFAULT_ZETA_TOL):
    """Hurwitz zeta function zeta(s, a) for real s != 1 and a > 0.

    Euler-Maclaurin summation with the standard rigorous remainder bound.
    Arguments a > 2 are accepted (the direct part of the sum absorbs the
    shift recurrence).
    """
    s = float(s)
    a = float(a)
    if a <= 0:
        raise DomainError(f"Hurwitz zeta needs a > 0, got {a}")
    if s == 1.0:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    reg, x, bound = _em_parts(s, a)
    pole = x ** (1.0 - s) / (s - 1.0)
    value = reg + pole
    bound += 4.0 * EPS * abs(pole)
    return RealEval(value, bound, precision_loss=bound > tol)


def hurwitz_zeta_difference(s, a, b, tol=DEFAULT_ZETA_TOL):
    """zeta(s, a) - zeta(s, b); entire in s, so s = 1 is allowed."""
    s = float(s)
    a = float(a)
    b = float(b)
    if a <= 0 or b <= 0:
        raise DomainError("Hurwitz zeta needs positive shifts")
    reg_a, xa, ba = _em_parts(s, a)
    reg_b, xb, bb = _em_parts(s, b)
    la, lb = math.log(xa), math.log(xb)
    if s == 1.0:
        pole_diff = lb - la
    else:
        # (xa^{1-s} - xb^{1-s}) / (s - 1), cancellation-free near s = 1
        pole_diff = -(xb ** (1.0 - s)) * math.expm1((1.0 - s) * (la - lb)) / (1.0 - s)
    value = reg_a - reg_b + pole_diff
    bound = ba + bb + 4.0 * EPS * (abs(pole_diff) + abs(reg_a) + abs(reg_b))
    return RealEval(value, bound, precision_loss=bound > tol)


def riemann_zeta(s):
    """Riemann zeta(s) = zeta(s, 1)."""
    return hurwitz_zeta(s, 1.0)
