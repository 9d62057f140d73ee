"""Shared oracles for the test suite.

Numerical constants were computed once with mpmath at 40 digits and are
frozen here; the brute-force helpers re-derive structural results from
their defining formulas without using the package code under test.
"""

from fractions import Fraction

import pytest

J01 = 2.404825557695772768621631879326454643124
J01_SQUARED = 5.783185962946784521175995758455807035071
MINUS_FOUR_CATALAN = -3.663862376708876060218414059729536443097
CIRCLE_A0_HEAT_T1 = 1.772637204826652153031250551157858481343
CIRCLE_QUARTER_ODD_T1 = 0.0005760233316480552119759085373380095321072
CIRCLE_QUARTER_K_T1 = -0.249983535998486401492938968251238671379
HURWITZ_HALF_03 = 0.01115278030996985609203788596443481729696
HURWITZ_3_07 = 3.217496437095461847158581462494877105632
HURWITZ_M15_04 = 0.005387898774060426199777052086821231923231
BESSEL_I_25_37 = 3.414958395937986979011311329442436494943
BESSEL_J_15_73 = -0.1209530109736306102856304715442724210299
BESSEL_J_405_30 = 0.0002383810598062451948995827706112089246483
SPIN_KERNEL_32_2 = 0.3607419234618096541384756114037221220986
SPIN_KERNEL_HALF_1 = 0.4657596075936404365019015295632099987329

HALF = Fraction(1, 2)


def lattice(origin, cap, step=1, log=0):
    """All (origin + k * step, p) below cap with p <= log."""
    origin, cap, step = Fraction(origin), Fraction(cap), Fraction(step)
    out = set()
    g = origin
    while g < cap:
        for p in range(log + 1):
            out.add((g, p))
        g += step
    return out


def expected_expansion(m, b, parity, kind, cap=4):
    """Closed-form exponent/log pattern of the heat-trace expansions.

    Interior exponents l - m/2; edge exponents l - b/2, or l - (b+1)/2 for
    the odd trace of an odd operator; one log power wherever the two
    lattices meet.
    """
    interior = lattice(Fraction(-m, 2), cap)
    odd_shift = kind == "odd_trace" and parity == "odd"
    edge_origin = Fraction(-(b + 1), 2) if odd_shift else Fraction(-b, 2)
    edge = lattice(edge_origin, cap)
    logs = {(g, 1) for g, _ in interior & edge}
    return interior, edge, interior | edge | logs


def grid(m_max=8):
    """All (m, b, f) with m <= m_max, 1 <= b <= m - 2 and f = m - b - 1."""
    for m in range(3, m_max + 1):
        for b in range(1, m - 1):
            yield m, b, m - b - 1


def allowable_verdict_oracle(m, b, parity):
    """Regularity table for even/odd allowable operators, by case.

    Cases (i)/(ii) (equal parity of D and b) take precedence; then the
    double-pole case; every remaining configuration carries an edge residue.
    """
    d_even = parity == "even"
    b_even = b % 2 == 0
    if d_even == b_even:
        return "WellDefined" if m % 2 == 0 else "ResidueInteriorOnly"
    mb_even = (m - b) % 2 == 0
    if (d_even and mb_even and not b_even) or (not d_even and not mb_even and b_even):
        return "PossibleDoublePole"
    return "ResidueInteriorAndEdge"


@pytest.fixture
def cache_dir(tmp_path):
    return tmp_path / "zero-cache"
