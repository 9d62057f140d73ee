"""Closed-form spectra of model links and cones, and the spin cone heat kernel."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import special as sc

from . import special_functions as sf
from .geometry import LinkSpectrum


@dataclass(frozen=True)
class TailModel:
    """Upper bound N(x) <= weyl_const * x**weyl_power on the counting function.

    N(x) counts eigenvalues (with multiplicity) of magnitude at most x; the
    bound is assumed for every x >= the spectrum's cutoff.
    """

    weyl_power: float
    weyl_const: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Finite window of a discrete spectrum.

    ``lam`` holds the non-zero eigenvalues, ``mult`` their multiplicities;
    zero modes live in ``kernel_dim``. Every eigenvalue with ``|lam| <=
    cutoff`` is present. When ``squared`` is True the entries are eigenvalues
    of a Laplace-type operator (heat traces use e^{-t lam}); otherwise they
    are eigenvalues of a Dirac-type operator (heat traces use e^{-t lam^2}).
    ``tail=None`` marks a complete, finite spectrum with nothing beyond the
    cutoff. ``lattice`` records ``(a, scale)`` for spectra of the form
    scale * {n + a : n in Z}, which have an exact eta function.
    """

    lam: np.ndarray
    mult: np.ndarray
    kernel_dim: int = 0
    cutoff: float = math.inf
    tail: Optional[TailModel] = None
    squared: bool = False
    lattice: Optional[tuple] = None
    label: str = ""

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).ravel()
        mult = np.asarray(self.mult, dtype=np.int64).ravel()
        if lam.shape != mult.shape:
            raise ValueError("eigenvalue and multiplicity arrays differ in length")
        if np.any(mult <= 0):
            raise ValueError("multiplicities must be positive")
        if np.any(lam == 0):
            raise ValueError("zero eigenvalues belong in kernel_dim, not in the entries")
        if self.kernel_dim < 0:
            raise ValueError("kernel_dim must be non-negative")
        if self.squared and np.any(lam < 0):
            raise ValueError("Laplace-type spectra must be positive")
        if np.any(np.abs(lam) > self.cutoff):
            raise ValueError("entries beyond the cutoff")
        order = np.lexsort((lam, np.abs(lam)))
        object.__setattr__(self, "lam", lam[order])
        object.__setattr__(self, "mult", mult[order])

    @classmethod
    def from_entries(cls, entries, kernel_dim=0, **kw) -> "Spectrum":
        entries = list(entries)
        lam = [e[0] for e in entries]
        mult = [e[1] for e in entries]
        return cls(np.array(lam, dtype=float), np.array(mult, dtype=np.int64), kernel_dim, **kw)

    def __len__(self):
        return len(self.lam)

    @property
    def entries(self):
        return list(zip(self.lam.tolist(), self.mult.tolist()))

    def count(self, x) -> int:
        """Eigenvalues (with multiplicity) of magnitude at most x."""
        return int(self.mult[np.abs(self.lam) <= x].sum())

    def signed_net(self):
        """Pair eigenvalues by magnitude: ``(|lam|, mult(+|lam|) - mult(-|lam|))``.

        Terms with zero net multiplicity are dropped, so odd spectral sums of
        a symmetric spectrum are exactly zero.
        """
        if self.squared:
            raise ValueError("signed quantities need a Dirac-type spectrum")
        if len(self.lam) == 0:
            return np.zeros(0), np.zeros(0, dtype=np.int64)
        mag, inv = np.unique(np.abs(self.lam), return_inverse=True)
        net = np.bincount(inv, weights=np.where(self.lam > 0, self.mult, -self.mult), minlength=len(mag))
        net = np.rint(net).astype(np.int64)
        keep = net != 0
        return mag[keep], net[keep]

    def is_symmetric(self) -> bool:
        return len(self.signed_net()[0]) == 0

    def negated(self) -> "Spectrum":
        lat = None
        if self.lattice is not None:
            a, scale = self.lattice
            lat = ((1.0 - a) % 1.0, scale)
        return replace(self, lam=-self.lam, lattice=lat)

    def scaled(self, c) -> "Spectrum":
        """Spectrum of c * D (c > 0)."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        lat = None if self.lattice is None else (self.lattice[0], self.lattice[1] * c)
        tail = None
        if self.tail is not None:
            tail = TailModel(self.tail.weyl_power, self.tail.weyl_const * c ** (-self.tail.weyl_power))
        return replace(self, lam=self.lam * c, cutoff=self.cutoff * c, tail=tail, lattice=lat)

    def merged(self, other: "Spectrum") -> "Spectrum":
        """Direct sum of two spectra of the same type."""
        if self.squared != other.squared:
            raise ValueError("cannot merge Dirac-type and Laplace-type spectra")
        cutoff = min(self.cutoff, other.cutoff)
        lam = np.concatenate([self.lam, other.lam])
        mult = np.concatenate([self.mult, other.mult])
        keep = np.abs(lam) <= cutoff
        tail = None
        if self.tail is not None or other.tail is not None:
            tails = [t for t in (self.tail, other.tail) if t is not None]
            power = max(t.weyl_power for t in tails)
            # valid for x >= cutoff >= 1
            const = sum(t.weyl_const for t in tails)
            tail = TailModel(power, const)
        return Spectrum(lam[keep], mult[keep], self.kernel_dim + other.kernel_dim, cutoff, tail,
                        self.squared, None, f"{self.label}+{other.label}")


def estimate_tail(lam, mult, safety=2.0) -> TailModel:
    """Power-law envelope of the counting function fitted on the upper half."""
    mag = np.sort(np.abs(np.asarray(lam, dtype=float)))
    order = np.argsort(np.abs(np.asarray(lam, dtype=float)))
    counts = np.cumsum(np.asarray(mult)[order])
    sel = mag >= 0.5 * mag[-1]
    if sel.sum() < 3 or mag[-1] <= 1:
        return TailModel(1.0, safety * counts[-1] / max(mag[-1], 1.0))
    p = np.polyfit(np.log(mag[sel]), np.log(counts[sel]), 1)[0]
    p = max(float(p), 0.5)
    const = float(np.max(counts[sel] / mag[sel] ** p))
    return TailModel(p, safety * const)


# ---------------------------------------------------------------------------
# model spectra


def circle_dirac_spectrum(a, cutoff) -> Spectrum:
    """Spectrum {n + a : n in Z} of -i d/dtheta + a on the unit circle."""
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise ValueError(f"twist parameter must lie in [0, 1), got {a}")
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    n_hi = int(math.floor(cutoff - a))
    n_lo = -int(math.floor(cutoff + a))
    n = np.arange(n_lo, n_hi + 1)
    lam = n + a
    lam = lam[np.abs(lam) <= cutoff]
    kernel = int(np.sum(lam == 0))
    lam = lam[lam != 0]
    return Spectrum(lam, np.ones(len(lam), dtype=np.int64), kernel, float(cutoff),
                    TailModel(1.0, 3.0), lattice=(a, 1.0), label=f"circle(a={a})")


def sphere_dirac_spectrum(f: int, cutoff) -> Spectrum:
    """Dirac spectrum of the round unit sphere S^f: +-(f/2 + k) with binomial multiplicities."""
    if f < 1:
        raise ValueError("sphere dimension must be at least 1")
    base = 2 ** (f // 2)
    lam, mult = [], []
    k = 0
    while f / 2 + k <= cutoff:
        d = base * math.comb(k + f - 1, k)
        lam += [f / 2 + k, -(f / 2 + k)]
        mult += [d, d]
        k += 1
    const = 2.0 * base * 2.0**f / math.factorial(f)
    return Spectrum(np.array(lam), np.array(mult, dtype=np.int64), 0, float(cutoff),
                    TailModel(float(f), const), label=f"sphere(f={f})")


def spin_cone_nu(mu):
    """Bessel orders (nu_plus, nu_minus) = (|2 mu - 1| / 2, |2 mu + 1| / 2)."""
    if isinstance(mu, (int, Fraction)):
        mu = Fraction(mu)
        return abs(2 * mu - 1) / 2, abs(2 * mu + 1) / 2
    return abs(2 * mu - 1) / 2, abs(2 * mu + 1) / 2


def _as_orders(value):
    if isinstance(value, (tuple, list)):
        return list(value)
    return [value]


def nu_key(nu) -> str:
    """Exact rational string for a Bessel order (cache key)."""
    return str(Fraction(nu))


def cone_eigenvalues(link: LinkSpectrum, nu_map: Callable, k_max=None, cutoff=None,
                     boundary="dirichlet", zero_cache=None, tail=None, label="cone") -> Spectrum:
    """Dirichlet eigenvalues j_{nu(mu), k}^2 of the unit-radius exact cone.

    ``nu_map`` sends a link eigenvalue to one Bessel order or a tuple of
    orders (e.g. both spin orders). Either ``k_max`` (zeros per mode) or
    ``cutoff`` (largest eigenvalue kept) must be given. The result is a
    Laplace-type spectrum.
    """
    if boundary != "dirichlet":
        raise ValueError("only the Dirichlet condition at the outer boundary is implemented")
    if (k_max is None) == (cutoff is None):
        raise ValueError("give exactly one of k_max and cutoff")
    lam, mult = [], []
    seen = {}
    for mu, m in link.entries:
        for nu in _as_orders(nu_map(mu)):
            key = nu_key(nu)
            if key not in seen:
                seen[key] = _zeros_for(float(nu), k_max, cutoff, zero_cache)
            for j in seen[key]:
                lam.append(j * j)
                mult.append(m)
    lam = np.array(lam, dtype=float)
    mult = np.array(mult, dtype=np.int64)
    if cutoff is None:
        # every mode was cut at k_max: only eigenvalues below the smallest
        # per-mode maximum are guaranteed complete
        cutoff = float(lam.max()) if len(lam) else 1.0
        complete = min(max(zs) for zs in seen.values() if zs) ** 2 if seen else cutoff
        keep = lam <= complete
        lam, mult, cutoff = lam[keep], mult[keep], complete
    if tail is None and len(lam):
        tail = estimate_tail(lam, mult)
    return Spectrum(lam, mult, 0, float(cutoff), tail, squared=True, label=label)


def _zeros_for(nu, k_max, cutoff, zero_cache):
    if k_max is not None:
        if zero_cache is not None:
            return [zero_cache.get_or_compute(nu, k) for k in range(1, k_max + 1)]
        return [sf.bessel_j_zero(nu, k).value for k in range(1, k_max + 1)]
    x_max = math.sqrt(cutoff)
    if zero_cache is not None:
        return zero_cache.zeros_below(nu, x_max)
    return sf.bessel_j_zeros_below(nu, x_max)


def unit_disk_spectrum(cutoff, zero_cache=None) -> Spectrum:
    """Dirichlet Laplacian on the unit disk, the exact cone over the unit circle.

    Modes e^{i n theta} have Bessel order |n|; eigenvalues up to ``cutoff``.
    """
    n_max = int(math.floor(math.sqrt(cutoff)))
    link = LinkSpectrum(tuple((n, 1) for n in range(-n_max, n_max + 1)))
    # Dirichlet counting function of the disk stays below lambda / 4
    return cone_eigenvalues(link, abs, cutoff=cutoff, zero_cache=zero_cache,
                            tail=TailModel(1.0, 0.3), label="unit-disk")


def spin_cone_heat_kernel(mu, sign, f, t, s, s_tilde) -> float:
    """Radial heat kernel of the spin Laplacian on the model cone C(F).

    H(t, s, s~) = (1/2t) (s s~)^{(1-f)/2} I_nu(s s~ / 2t) exp(-(s^2 + s~^2) / 4t),
    with nu = nu_plus(mu) for ``sign='+'`` and nu_minus(mu) for ``sign='-'``.
    Evaluated through e^{-z} I_nu(z) so large arguments do not overflow.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    if t <= 0 or s <= 0 or s_tilde <= 0:
        raise ValueError("t, s and s_tilde must be positive")
    nu_p, nu_m = spin_cone_nu(mu)
    nu = float(nu_p if sign == "+" else nu_m)
    z = s * s_tilde / (2.0 * t)
    ive = sf.bessel_i(nu, z, scaled=True).value
    gauss = math.exp(-((s - s_tilde) ** 2) / (4.0 * t))
    return (0.5 / t) * (s * s_tilde) ** ((1.0 - f) / 2.0) * ive * gauss


def spin_cone_heat_kernel_array(mu, sign, f, t, s, r):
    """Vectorised kernel in the last argument (quadrature helper)."""
    nu_p, nu_m = spin_cone_nu(mu)
    nu = float(nu_p if sign == "+" else nu_m)
    r = np.asarray(r, dtype=float)
    z = s * r / (2.0 * t)
    return (0.5 / t) * (s * r) ** ((1.0 - f) / 2.0) * sc.ive(nu, z) * np.exp(-((s - r) ** 2) / (4.0 * t))


# ---------------------------------------------------------------------------
# persistence


def save_spectrum(spec: Spectrum, csv_path) -> Path:
    """Write ``lambda,multiplicity`` rows plus a JSON sidecar next to the CSV.

    Eigenvalues are written with ``repr`` so a round trip is bit-exact.
    """
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "multiplicity"])
        for lam, mult in zip(spec.lam.tolist(), spec.mult.tolist()):
            w.writerow([repr(float(lam)), int(mult)])
    meta = {
        "kernel_dim": spec.kernel_dim,
        "cutoff": spec.cutoff if math.isfinite(spec.cutoff) else None,
        "tail": None if spec.tail is None else [spec.tail.weyl_power, spec.tail.weyl_const],
        "squared": spec.squared,
        "lattice": None if spec.lattice is None else list(spec.lattice),
        "label": spec.label,
    }
    sidecar = csv_path.with_suffix(".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def load_spectrum(csv_path) -> Spectrum:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    lam, mult = [], []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            lam.append(float(row["lambda"]))
            mult.append(int(row["multiplicity"]))
    tail = None if meta.get("tail") is None else TailModel(*meta["tail"])
    cutoff = math.inf if meta.get("cutoff") is None else float(meta["cutoff"])
    lattice = None if meta.get("lattice") is None else tuple(meta["lattice"])
    return Spectrum(np.array(lam), np.array(mult, dtype=np.int64), int(meta.get("kernel_dim", 0)), cutoff,
                    tail, bool(meta.get("squared", False)), lattice, meta.get("label", ""))
