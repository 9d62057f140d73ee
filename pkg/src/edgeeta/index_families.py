"""Exact algebra of polyhomogeneous index sets.

An index set is infinite upward, so we only ever track the points with
exponent strictly below a rational ``cap``. Exponents are
:class:`fractions.Fraction` throughout; the classification logic is pure
arithmetic in halves and must never see a float.

Index sets here carry a ``step``: the set is closed under adding integer
multiples of ``step`` to an exponent. Melrose index sets have ``step = 1``;
the diagonal parity filters produce ``step = 2`` sets such as ``-m + 2N_0``,
and halving those yields ``step = 1`` again.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import CapMismatch, InvalidDimensions, NotApplicable

DEFAULT_CAP = Fraction(4)

FACES = ("ff", "td", "tf", "rf", "lf", "cf")
GEOMETRIC_KINDS = ("GaussBonnet", "Signature", "OddSignature", "SpinDirac")

Point = tuple  # (Fraction exponent, int log power)


def _q(x) -> Fraction:
    if isinstance(x, float):
        # floats are only accepted when they are exact dyadic halves etc.
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


def _frac_lcm(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.lcm(a.numerator, b.numerator), math.gcd(a.denominator, b.denominator))


@dataclass(frozen=True)
class IndexSet:
    """Finite window of an index set: all points ``(gamma, p)`` with gamma < cap.

    Use :meth:`generated` to build a set from generators (closures are
    completed automatically); the raw constructor stores exactly what it is
    given, which is what :func:`validate` inspects.
    """

    points: frozenset
    cap: Fraction = DEFAULT_CAP
    step: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "cap", _q(self.cap))
        object.__setattr__(self, "step", _q(self.step))
        object.__setattr__(self, "points", frozenset((_q(g), int(p)) for g, p in self.points))
        if self.step <= 0:
            raise ValueError("step must be positive")

    @classmethod
    def generated(cls, generators: Iterable, cap=DEFAULT_CAP, step=1) -> "IndexSet":
        """Closure of ``generators`` under log-lowering and step shifts."""
        cap = _q(cap)
        step = _q(step)
        pts = set()
        for g, p in generators:
            g = _q(g)
            while g < cap:
                for pp in range(int(p) + 1):
                    pts.add((g, pp))
                g += step
        return cls(frozenset(pts), cap, step)

    @classmethod
    def empty(cls, cap=DEFAULT_CAP, step=1) -> "IndexSet":
        return cls(frozenset(), cap, step)

    def __contains__(self, point) -> bool:
        g, p = point
        g = _q(g)
        if g >= self.cap:
            raise ValueError(f"membership of exponent {g} is undecidable above cap {self.cap}")
        return (g, int(p)) in self.points

    def __iter__(self):
        return iter(sorted(self.points))

    def __len__(self):
        return len(self.points)

    def __bool__(self):
        return bool(self.points)

    def exponents(self) -> list:
        """Distinct exponents, ascending."""
        return sorted({g for g, _ in self.points})

    def max_log(self, gamma) -> int:
        """Largest log power at ``gamma``; -1 if gamma is absent."""
        gamma = _q(gamma)
        return max((p for g, p in self.points if g == gamma), default=-1)

    def truncate(self, cap) -> "IndexSet":
        cap = _q(cap)
        return IndexSet(frozenset(pt for pt in self.points if pt[0] < cap), cap, self.step)

    def log_points(self) -> list:
        return sorted(pt for pt in self.points if pt[1] > 0)

    def to_json(self) -> dict:
        return {
            "generators": [[g.numerator, g.denominator, p] for g, p in sorted(self.points)],
            "cap": [self.cap.numerator, self.cap.denominator],
            "step": [self.step.numerator, self.step.denominator],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "IndexSet":
        pts = frozenset((Fraction(n, d), int(p)) for n, d, p in data["generators"])
        cap = Fraction(*data["cap"])
        step = Fraction(*data.get("step", [1, 1]))
        return cls(pts, cap, step)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __str__(self):
        inner = ", ".join(f"({g}, {p})" for g, p in self)
        return f"{{{inner}}} below {self.cap}"


def validate(index_set: IndexSet):
    """Check the three index-set hypotheses below the cap.

    Returns ``(ok, violations)`` with human-readable violation strings.
    Finiteness below the cap is automatic for a stored window, but points at
    or above the cap are reported.
    """
    violations = []
    pts = index_set.points
    cap = index_set.cap
    for g, p in sorted(pts):
        if g >= cap:
            violations.append(f"point ({g}, {p}) lies at or above cap {cap}")
            continue
        for pp in range(p):
            if (g, pp) not in pts:
                violations.append(f"log-closure: ({g}, {p}) present but ({g}, {pp}) missing")
        nxt = g + index_set.step
        if nxt < cap and (nxt, p) not in pts:
            violations.append(f"shift-closure: ({g}, {p}) present but ({nxt}, {p}) missing")
    return not violations, violations


def shift(index_set: IndexSet, c) -> IndexSet:
    """Multiply by rho^c: every exponent (and the cap) moves by ``c``."""
    c = _q(c)
    return IndexSet(frozenset((g + c, p) for g, p in index_set.points), index_set.cap + c, index_set.step)


def halve(index_set: IndexSet) -> IndexSet:
    """Pushforward along t = rho^2: exponents halve, log powers are kept."""
    return IndexSet(
        frozenset((g / 2, p) for g, p in index_set.points), index_set.cap / 2, index_set.step / 2
    )


def extended_union(a: IndexSet, b: IndexSet) -> IndexSet:
    """A ∪ B ∪ {(z, p + q + 1) : (z, p) in A, (z, q) in B}."""
    if a.cap != b.cap:
        raise CapMismatch(f"caps differ: {a.cap} vs {b.cap}")
    step = _frac_lcm(a.step, b.step)
    pts = set(a.points) | set(b.points)
    for z in set(a.exponents()) & set(b.exponents()):
        top = a.max_log(z) + b.max_log(z) + 1
        pts.update((z, p) for p in range(top + 1))
    return IndexSet.generated(pts, a.cap, step)


def parity_filter(index_set: IndexSet, parity: str, origin) -> IndexSet:
    """Keep exponents with gamma - origin an even (or odd) integer."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    origin = _q(origin)
    want = 0 if parity == "even" else 1
    kept = frozenset(
        (g, p)
        for g, p in index_set.points
        if (g - origin).denominator == 1 and (g - origin).numerator % 2 == want
    )
    return IndexSet(kept, index_set.cap, _frac_lcm(index_set.step, Fraction(2)))


@dataclass(frozen=True)
class IndexFamily:
    """Index sets attached to boundary faces of the heat space or its diagonal."""

    face_sets: Mapping = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.face_sets) - set(FACES)
        if unknown:
            raise ValueError(f"unknown faces: {sorted(unknown)}")

    def __getitem__(self, face) -> IndexSet:
        return self.face_sets[face]

    def corner_trace_class(self) -> bool:
        """True when E_lf + E_rf > -1, so cf contributes no boundary terms."""
        lf, rf = self.face_sets.get("lf"), self.face_sets.get("rf")
        if lf is None or rf is None:
            return True
        if not lf or not rf:
            return True
        return min(lf.exponents()) + min(rf.exponents()) > -1


# ---------------------------------------------------------------------------
# Heat-trace expansion skeletons


@dataclass(frozen=True)
class HeatSkeleton:
    """Predicted short-time structure of Tr e^{-tD^2} or Tr D e^{-tD^2}.

    ``interior`` is the branch coming from the temporal diagonal (integrals
    over M), ``edge`` the branch from the front face (integrals over the
    edge boundary), and ``combined`` their extended union: the full set of
    powers t^gamma (log t)^p that may occur.
    """

    m: int
    b: int
    f: int
    parity: str
    kind: str
    interior: IndexSet
    edge: IndexSet
    combined: IndexSet
    identically_zero: bool = False

    @property
    def index_set(self) -> IndexSet:
        return self.combined

    @property
    def edge_origin(self) -> Fraction:
        """Leading edge exponent: -b/2, or -(b+1)/2 for odd D in odd traces."""
        if self.kind == "odd_trace" and self.parity == "odd":
            return Fraction(-(self.b + 1), 2)
        return Fraction(-self.b, 2)

    def terms(self) -> list:
        return sorted(self.combined.points)

    def has(self, exponent, log_power=0) -> bool:
        exponent = _q(exponent)
        if exponent >= self.combined.cap:
            raise ValueError("exponent above cap")
        return (exponent, log_power) in self.combined.points

    def residue_sources(self) -> dict:
        """Which branches put a term at t^{-1/2}: the eta residue slot."""
        half = Fraction(-1, 2)
        return {
            "interior": (half, 0) in self.interior.points,
            "edge": (half, 0) in self.edge.points,
            "log": self.combined.max_log(half) >= 1,
        }

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "b": self.b,
            "f": self.f,
            "parity": self.parity,
            "kind": self.kind,
            "identically_zero": self.identically_zero,
            "interior": self.interior.to_json(),
            "edge": self.edge.to_json(),
            "combined": self.combined.to_json(),
        }


def check_dimensions(m: int, b: int, f: int):
    if f < 1 or b < 0 or m != b + f + 1:
        raise InvalidDimensions(f"need m = b + f + 1 with f >= 1, b >= 0; got m={m}, b={b}, f={f}")


# The density 2 rho_ff rho_cf beta^*(x^f) mu_b shifts the front-face index set by f + 1.
def ff_weight_shift(f: int) -> int:
    return f + 1


def heat_trace_family(m, b, f, op_parity="even", kind="trace", cap=DEFAULT_CAP) -> HeatSkeleton:
    """Exponent/log structure of a heat trace on an edge space, below ``cap``.

    ``kind='trace'`` gives Tr e^{-tD^2}, whose kernel always lies in the even
    calculus (``op_parity`` is then irrelevant); ``kind='odd_trace'`` gives
    Tr D e^{-tD^2}, where the front-face parity follows that of D.
    """
    check_dimensions(m, b, f)
    if op_parity not in ("even", "odd"):
        raise ValueError(f"op_parity must be 'even' or 'odd', got {op_parity!r}")
    if kind not in ("trace", "odd_trace"):
        raise ValueError(f"kind must be 'trace' or 'odd_trace', got {kind!r}")
    cap = _q(cap)
    shift_ff = ff_weight_shift(f)
    if kind == "trace":
        lead = -m
        ff_parity = "even"
    else:
        lead = -1 - m
        ff_parity = op_parity
    td_base = IndexSet.generated([(lead, 0)], 2 * cap)
    ff_base = IndexSet.generated([(lead, 0)], 2 * cap - shift_ff)
    g_td = parity_filter(td_base, "even", -m)
    g_ff = parity_filter(ff_base, ff_parity, -m)
    interior = halve(g_td)
    edge = halve(shift(g_ff, shift_ff))
    return HeatSkeleton(m, b, f, op_parity, kind, interior, edge, extended_union(interior, edge))


def geometric_vanishing(skeleton: HeatSkeleton, m=None, operator_kind=None, rule="edge_threshold") -> HeatSkeleton:
    """Apply the local vanishing of interior coefficients for geometric D.

    For m even the odd trace vanishes identically. For m odd the interior
    coefficients of t^{l - m/2} vanish for 2l - m < 1, so the interior branch
    starts at t^{1/2}. Log terms need an interior partner: with
    ``rule='extended_union'`` they are recomputed from the truncated branches;
    with ``rule='edge_threshold'`` (default) they are additionally restricted to
    edge-branch indices l >= (m + 1)/2.
    """
    if operator_kind is not None and operator_kind not in GEOMETRIC_KINDS:
        raise NotApplicable(f"{operator_kind} is not a geometric Dirac operator")
    if skeleton.kind != "odd_trace":
        raise NotApplicable("vanishing applies to Tr D e^{-tD^2} only")
    if rule not in ("edge_threshold", "extended_union"):
        raise ValueError(f"unknown rule {rule!r}")
    m = skeleton.m if m is None else m
    if m != skeleton.m:
        raise InvalidDimensions(f"skeleton built for m={skeleton.m}, got m={m}")
    cap = skeleton.combined.cap
    if m % 2 == 0:
        empty = IndexSet.empty(cap)
        return HeatSkeleton(
            skeleton.m, skeleton.b, skeleton.f, skeleton.parity, skeleton.kind,
            empty, empty, empty, identically_zero=True,
        )
    half = Fraction(1, 2)
    interior = IndexSet(
        frozenset(pt for pt in skeleton.interior.points if pt[0] >= half), cap, skeleton.interior.step
    )
    combined = extended_union(interior, skeleton.edge)
    if rule == "edge_threshold":
        threshold = Fraction(m + 1, 2) + skeleton.edge_origin
        combined = IndexSet(
            frozenset(pt for pt in combined.points if pt[1] == 0 or pt[0] >= threshold),
            cap,
            combined.step,
        )
    return HeatSkeleton(
        skeleton.m, skeleton.b, skeleton.f, skeleton.parity, skeleton.kind,
        interior, skeleton.edge, combined,
    )


def smooth_skeleton(m, kind="odd_trace", cap=DEFAULT_CAP) -> IndexSet:
    """Index set of a heat trace on a closed smooth m-manifold.

    Tr e^{-tD^2} ~ t^{-m/2 + l}; Tr D e^{-tD^2} ~ t^{-m/2 + l} with l >= 0,
    both stepping by 1 in t (no logs).
    """
    return IndexSet.generated([(Fraction(-m, 2), 0)], cap)
