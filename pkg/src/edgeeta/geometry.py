"""Edge-space and operator descriptors, Witt conditions, and bounding cones."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .errors import InvalidDimensions, KindDimensionMismatch, NotApplicable, Unscalable

OPERATOR_KINDS = ("GaussBonnet", "Signature", "OddSignature", "SpinDirac", "AllowableCustom")
GEOMETRIC_KINDS = ("GaussBonnet", "Signature", "OddSignature", "SpinDirac")
HODGE_KINDS = ("GaussBonnet", "Signature", "OddSignature")

DEFAULT_WITT_TOL = 1e-12


class BorderlineWittWarning(UserWarning):
    """A link eigenvalue sits within tolerance of the Witt gap edge."""


@dataclass(frozen=True)
class LinkSpectrum:
    """Spectrum of the vertical Dirac operator D_F on the link F.

    ``entries`` is a tuple of ``(eigenvalue, multiplicity)``; eigenvalues may
    be floats or exact :class:`~fractions.Fraction` values.
    """

    entries: tuple
    middle_cohomology_dim: int = 0
    symmetric: bool = False

    def __post_init__(self):
        entries = tuple(sorted(((lam, int(mult)) for lam, mult in self.entries), key=lambda e: e[0]))
        object.__setattr__(self, "entries", entries)
        if any(mult <= 0 for _, mult in entries):
            raise ValueError("link multiplicities must be positive")
        if self.middle_cohomology_dim < 0:
            raise ValueError("middle_cohomology_dim must be non-negative")
        if self.symmetric and not self.is_symmetric():
            raise ValueError("link spectrum flagged symmetric but not closed under negation")

    def is_symmetric(self) -> bool:
        counts = {}
        for lam, mult in self.entries:
            counts[lam] = counts.get(lam, 0) + mult
        return all(counts.get(-lam, 0) == mult for lam, mult in counts.items() if lam != 0)

    def scaled(self, c) -> "LinkSpectrum":
        return replace(self, entries=tuple((lam * c, mult) for lam, mult in self.entries))

    def nonzero(self) -> list:
        return [lam for lam, _ in self.entries if lam != 0]


@dataclass(frozen=True)
class EdgeStratum:
    """An edge B of dimension b whose cone fibres have links of dimension f."""

    b: int
    f: int
    link_spectrum: Optional[LinkSpectrum] = None


@dataclass(frozen=True)
class ConePoint:
    """Isolated singular point with an exact cone metric dx^2 + x^2 g_link.

    Exact cone points contribute no log coefficients to heat traces and are
    exempt from the dimensional eta-existence conditions.
    """

    link: Optional["EdgeDescriptor"] = None
    exempt: bool = True


@dataclass(frozen=True)
class EdgeDescriptor:
    """Admissible incomplete edge space of dimension m."""

    m: int
    edges: tuple = ()
    exact_cone_points: tuple = ()
    has_boundary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "exact_cone_points", tuple(self.exact_cone_points))
        if self.m < 1:
            raise InvalidDimensions(f"dimension must be positive, got m={self.m}")
        for i, e in enumerate(self.edges):
            if e.f < 1:
                raise InvalidDimensions(f"stratum {i}: fibre dimension f={e.f} must be >= 1")
            if e.b < 0:
                raise InvalidDimensions(f"stratum {i}: edge dimension b={e.b} must be >= 0")
            if e.b + e.f + 1 != self.m:
                raise InvalidDimensions(
                    f"stratum {i}: b + f + 1 = {e.b + e.f + 1} does not equal m = {self.m}"
                )

    @property
    def is_smooth(self) -> bool:
        return not self.edges and not self.exact_cone_points


@dataclass(frozen=True)
class OperatorDescriptor:
    """Dirac-type operator on an edge space.

    ``declared_parity`` is required for ``AllowableCustom``; ``base_kind``
    names the geometric operator an allowable perturbation is built on and is
    what the Witt condition is checked against.
    """

    kind: str
    declared_parity: Optional[str] = None
    twist_rank: int = 1
    base_kind: Optional[str] = None

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.twist_rank < 1:
            raise ValueError("twist_rank must be a positive integer")
        if self.declared_parity not in (None, "even", "odd"):
            raise ValueError(f"declared_parity must be 'even' or 'odd', got {self.declared_parity!r}")
        if self.kind == "AllowableCustom" and self.declared_parity is None:
            raise ValueError("AllowableCustom operators must declare their parity")
        if self.base_kind is not None and self.base_kind not in GEOMETRIC_KINDS:
            raise ValueError(f"base_kind must be geometric, got {self.base_kind!r}")

    @property
    def is_geometric(self) -> bool:
        return self.kind in GEOMETRIC_KINDS

    def check_dimension(self, m: int):
        if self.kind == "Signature" and m % 2:
            raise KindDimensionMismatch(f"signature operator needs even m, got m={m}")
        if self.kind == "OddSignature" and m % 2 == 0:
            raise KindDimensionMismatch(f"odd signature operator needs odd m, got m={m}")


@dataclass(frozen=True)
class WittReport:
    passed: bool
    witness: object = None
    reason: str = ""
    borderline: tuple = field(default_factory=tuple)


def _witt_kind(op: OperatorDescriptor) -> str:
    kind = op.kind if op.kind != "AllowableCustom" else op.base_kind
    if kind is None:
        raise NotApplicable("AllowableCustom needs base_kind to check the Witt condition")
    return kind


def _gap_radius(kind: str):
    return Fraction(1, 2) if kind == "SpinDirac" else Fraction(1)


def _inside_gap(lam, radius, tol):
    """Return 'inside', 'edge' (within tolerance of the boundary) or 'outside'."""
    a = abs(lam)
    if isinstance(lam, (int, Fraction)):
        return "inside" if a < radius else "outside"
    r = float(radius)
    if abs(a - r) <= tol:
        return "edge"
    return "inside" if a < r else "outside"


def witt_check(op: OperatorDescriptor, link: LinkSpectrum, tol=DEFAULT_WITT_TOL) -> WittReport:
    """Geometric Witt condition on the link spectrum.

    Spin: no eigenvalue in (-1/2, 1/2). Gauss-Bonnet/signature: no non-zero
    eigenvalue in (-1, 1) and vanishing middle cohomology. Twisting by a flat
    bundle does not change the condition, so ``op.twist_rank`` is ignored.
    """
    kind = _witt_kind(op)
    radius = _gap_radius(kind)
    candidates = [lam for lam, _ in link.entries if kind == "SpinDirac" or lam != 0]
    violators = []
    borderline = []
    for lam in candidates:
        where = _inside_gap(lam, radius, tol)
        if where == "inside":
            violators.append(lam)
        elif where == "edge":
            borderline.append(lam)
    if borderline:
        warnings.warn(
            f"link eigenvalues {borderline} lie within {tol:g} of the Witt gap edge {radius}",
            BorderlineWittWarning,
            stacklevel=2,
        )
    if violators:
        witness = min(violators, key=lambda lam: (abs(lam), -lam))
        return WittReport(False, witness, f"eigenvalue {witness} inside the gap (-{radius}, {radius})",
                          tuple(borderline))
    if kind in HODGE_KINDS and link.middle_cohomology_dim != 0:
        return WittReport(False, None, "middle-degree cohomology of the link is non-zero", tuple(borderline))
    return WittReport(True, None, "", tuple(borderline))


def suggest_scaling(op: OperatorDescriptor, link: LinkSpectrum):
    """Smallest factor c >= 1 such that c * Spec(D_F) satisfies the Witt gap."""
    kind = _witt_kind(op)
    radius = _gap_radius(kind)
    if kind in HODGE_KINDS and link.middle_cohomology_dim != 0:
        raise Unscalable("non-zero middle cohomology cannot be scaled away")
    if kind == "SpinDirac" and any(lam == 0 for lam, _ in link.entries):
        raise Unscalable("0 in the link spectrum cannot be scaled out of the spin gap")
    nonzero = link.nonzero()
    if not nonzero:
        raise Unscalable("link spectrum has no non-zero eigenvalues")
    smallest = min(abs(lam) for lam in nonzero)
    if isinstance(smallest, (int, Fraction)):
        c = Fraction(radius) / smallest
    else:
        c = float(radius) / smallest
    return max(c, 1)


def cone_over(M: EdgeDescriptor) -> EdgeDescriptor:
    """Finite cone X = C(M): dimension m + 1, edges (b, f) -> (b + 1, f), one tip."""
    edges = tuple(replace(e, b=e.b + 1) for e in M.edges)
    return EdgeDescriptor(
        m=M.m + 1,
        edges=edges,
        exact_cone_points=M.exact_cone_points + (ConePoint(link=M),),
        has_boundary=True,
    )


def operator_parity(op: OperatorDescriptor, m: int, b: int) -> str:
    """'even', 'odd' or 'unclassified' for the operator near an edge of dimension b."""
    op.check_dimension(m)
    if op.kind == "GaussBonnet":
        return "even"
    if op.kind == "OddSignature":
        return "even" if (m - b) % 2 == 0 else "odd"
    if op.kind == "Signature":
        return "even" if b % 2 == 0 else "unclassified"
    if op.kind == "SpinDirac":
        return "even" if (m - b) % 2 == 0 else "unclassified"
    return op.declared_parity
