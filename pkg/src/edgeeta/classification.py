"""Decide whether eta and rho invariants exist on an edge space.

Verdicts carry rule tags (stable identifiers, listed in :data:`RULES`) so
that every report can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .errors import RankMismatch, UnclassifiedParity
from .geometry import EdgeDescriptor, OperatorDescriptor, operator_parity, witt_check


class Verdict(IntEnum):
    """Eta-regularity verdicts, ordered from best to worst."""

    IdenticallyZero = 0
    WellDefined = 1
    ResidueInteriorOnly = 2
    ResidueInteriorAndEdge = 3
    PossibleDoublePole = 4
    Unclassified = 5


RULES = {
    "symmetric-spectrum-even-m": "geometric operator on even-dimensional M: spectrum symmetric, eta vanishes",
    "no-fibered-edges": "no fibered edge strata: the smooth-case regularity applies",
    "exact-cone-point-exempt": "exact cone points contribute no log or pole terms",
    "parity-match-even-m": "m even and (D, b) of equal parity: no t^{-1/2} terms",
    "parity-match-odd-m": "m odd and (D, b) of equal parity: only the interior t^{-1/2} term",
    "edge-term-no-log": "t^{-1/2} term from the edge branch but no t^{-1/2} log t term",
    "log-term-double-pole": "t^{-1/2} log t term cannot be excluded: second order pole possible",
    "geometric-odd-m-edge-residue": "geometric D, m odd: interior terms vanish, residue from the edge only",
    "geometric-odd-m-regular": "geometric D, m odd: no t^{-1/2} term survives",
    "unclassified-parity": "operator has no even/odd classification at this edge",
    "worst-case-aggregation": "several strata: the worst stratum verdict is reported",
    "galois-verbatim": "the same table applies verbatim to Galois coverings",
    "boundary-dimension-condition": "(dim X - b_i) odd or b_i odd for every edge of X",
    "non-geometric-cone-point": "cone points are exempt only for geometric operators",
    "rho-individually-regular": "both eta invariants exist, rho is their difference",
    "rho-cancellation": "local expansion coefficients depend on the twist rank only and cancel",
    "rho-witt-failure": "a link violates the geometric Witt condition",
}


@dataclass(frozen=True)
class StratumReport:
    b: int
    f: int
    parity: str
    verdict: Verdict
    reasons: tuple

    def to_json(self):
        return {"b": self.b, "f": self.f, "parity": self.parity,
                "verdict": self.verdict.name, "reasons": list(self.reasons)}


@dataclass(frozen=True)
class EtaStatus:
    verdict: Verdict
    reasons: tuple
    strata: tuple = ()
    aggregated: bool = False
    galois_applies: bool = True

    def __post_init__(self):
        if not self.reasons:
            raise ValueError("every verdict needs at least one reason")

    @property
    def regular(self) -> bool:
        return self.verdict <= Verdict.WellDefined

    def to_json(self):
        return {
            "verdict": self.verdict.name,
            "reasons": list(self.reasons),
            "rules": {r: RULES[r] for r in self.reasons},
            "strata": [s.to_json() for s in self.strata],
            "aggregated": self.aggregated,
            "galois_applies": self.galois_applies,
        }


def _allowable_verdict(m: int, b: int, parity: str):
    """Pole verdict for an even/odd allowable operator at one edge."""
    d_even = parity == "even"
    same = d_even == (b % 2 == 0)
    if m % 2 == 0 and same:
        return Verdict.WellDefined, "parity-match-even-m"
    if m % 2 == 1 and same:
        return Verdict.ResidueInteriorOnly, "parity-match-odd-m"
    mb_even = (m - b) % 2 == 0
    if (d_even and mb_even and b % 2 == 1) or (not d_even and not mb_even and b % 2 == 0):
        return Verdict.PossibleDoublePole, "log-term-double-pole"
    return Verdict.ResidueInteriorAndEdge, "edge-term-no-log"


def _geometric_odd_verdict(b: int, parity: str):
    # Interior coefficients below t^{1/2} vanish and log terms start above
    # t^{-1/2}; only the leading edge term can sit at t^{-1/2}.
    edge_origin_twice = -b if parity == "even" else -(b + 1)
    if edge_origin_twice % 2 == 1:
        return Verdict.ResidueInteriorAndEdge, "geometric-odd-m-edge-residue"
    return Verdict.WellDefined, "geometric-odd-m-regular"


def classify_eta(M: EdgeDescriptor, op: OperatorDescriptor, strict=False) -> EtaStatus:
    """Regularity of eta(D, s) at s = 0 for an operator on an edge space.

    With ``strict=True`` an unclassifiable operator raises
    :class:`UnclassifiedParity`; otherwise the verdict is ``Unclassified``.
    """
    op.check_dimension(M.m)
    m = M.m
    extra = ("exact-cone-point-exempt",) if M.exact_cone_points else ()
    if op.is_geometric and m % 2 == 0:
        return EtaStatus(Verdict.IdenticallyZero, ("symmetric-spectrum-even-m",) + extra)
    if not M.edges:
        return EtaStatus(Verdict.WellDefined, ("no-fibered-edges",) + extra)
    strata = []
    for e in M.edges:
        parity = operator_parity(op, m, e.b)
        if parity == "unclassified":
            if strict:
                raise UnclassifiedParity(f"{op.kind} has no parity at an edge with m={m}, b={e.b}")
            verdict, tag = Verdict.Unclassified, "unclassified-parity"
        elif op.is_geometric:
            verdict, tag = _geometric_odd_verdict(e.b, parity)
        else:
            verdict, tag = _allowable_verdict(m, e.b, parity)
        strata.append(StratumReport(e.b, e.f, parity, verdict, (tag,)))
    worst = max(strata, key=lambda s: s.verdict)
    reasons = worst.reasons
    aggregated = len(strata) > 1
    if aggregated:
        reasons = reasons + ("worst-case-aggregation",)
    return EtaStatus(worst.verdict, reasons + extra, tuple(strata), aggregated)


@dataclass(frozen=True)
class BoundaryReport:
    exists: bool
    strata: tuple
    reasons: tuple

    def to_json(self):
        return {"exists": self.exists, "strata": list(self.strata), "reasons": list(self.reasons),
                "rules": {r: RULES[r] for r in self.reasons}}


def classify_boundary_case(X: EdgeDescriptor, op: OperatorDescriptor = None) -> BoundaryReport:
    """Existence of eta(D) for the tangential operator on the boundary of X.

    ``X`` has dimension m + 1. Every fibered edge of X must have
    (m + 1 - b_i) odd or b_i odd. Exact cone points are exempt when the
    operator is geometric (or unspecified).
    """
    dim = X.m
    rows = []
    ok = True
    for e in X.edges:
        a = (dim - e.b) % 2 == 1
        c = e.b % 2 == 1
        rows.append({"b": e.b, "codim_odd": a, "b_odd": c, "ok": a or c})
        ok = ok and (a or c)
    reasons = ["boundary-dimension-condition"]
    if X.exact_cone_points:
        if op is not None and not op.is_geometric:
            ok = False
            reasons.append("non-geometric-cone-point")
        else:
            reasons.append("exact-cone-point-exempt")
    return BoundaryReport(ok, tuple(rows), tuple(reasons))


@dataclass(frozen=True)
class RhoReport:
    defined: bool
    reason: str
    eta_status: EtaStatus = None
    witt_failures: tuple = ()

    def to_json(self):
        return {
            "defined": self.defined,
            "reason": self.reason,
            "rule": RULES[self.reason],
            "eta_status": None if self.eta_status is None else self.eta_status.to_json(),
            "witt_failures": [list(w) for w in self.witt_failures],
        }


def classify_rho(M: EdgeDescriptor, op: OperatorDescriptor, twist_ranks) -> RhoReport:
    """Whether the APS rho invariant of two flat twists of D is defined.

    Both twisted operators share the Witt condition of the untwisted one. The
    heat-trace coefficients depend on the twist only through its rank, so
    with equal ranks every pole of eta(D_alpha, s) - eta(D_beta, s) cancels.
    """
    r_alpha, r_beta = twist_ranks
    if r_alpha != r_beta:
        raise RankMismatch(f"twist ranks differ: {r_alpha} vs {r_beta}")
    failures = []
    for i, e in enumerate(M.edges):
        if e.link_spectrum is not None and (op.is_geometric or op.base_kind is not None):
            rep = witt_check(op, e.link_spectrum)
            if not rep.passed:
                failures.append((i, rep.reason))
    if failures:
        return RhoReport(False, "rho-witt-failure", None, tuple(failures))
    status = classify_eta(M, op)
    if status.regular:
        return RhoReport(True, "rho-individually-regular", status)
    return RhoReport(True, "rho-cancellation", status)
