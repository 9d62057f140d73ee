from fractions import Fraction as F

import pytest

from edgeeta.errors import InvalidDimensions, KindDimensionMismatch, NotApplicable, Unscalable
from edgeeta.geometry import (
    BorderlineWittWarning,
    EdgeDescriptor,
    EdgeStratum,
    LinkSpectrum,
    OperatorDescriptor,
    cone_over,
    operator_parity,
    suggest_scaling,
    witt_check,
)

SPIN = OperatorDescriptor("SpinDirac")
GB = OperatorDescriptor("GaussBonnet")


def test_descriptor_names_bad_stratum():
    with pytest.raises(InvalidDimensions, match="stratum 1"):
        EdgeDescriptor(5, [EdgeStratum(1, 3), EdgeStratum(2, 3)])


def test_fibre_dimension_positive():
    with pytest.raises(InvalidDimensions):
        EdgeDescriptor(3, [EdgeStratum(2, 0)])


def test_custom_needs_parity():
    with pytest.raises(ValueError):
        OperatorDescriptor("AllowableCustom")


def test_kind_dimension():
    with pytest.raises(KindDimensionMismatch):
        OperatorDescriptor("Signature").check_dimension(5)
    with pytest.raises(KindDimensionMismatch):
        OperatorDescriptor("OddSignature").check_dimension(4)


class TestWitt:
    def test_spin_gap_violation(self):
        rep = witt_check(SPIN, LinkSpectrum(((F(-1, 4), 1), (F(1, 4), 1), (F(3, 2), 2))))
        assert not rep.passed
        assert rep.witness == F(1, 4)

    def test_spin_exact_edge_passes(self):
        assert witt_check(SPIN, LinkSpectrum(((F(-1, 2), 1), (F(1, 2), 1)))).passed

    def test_float_edge_warns(self):
        with pytest.warns(BorderlineWittWarning):
            rep = witt_check(SPIN, LinkSpectrum(((0.5 - 1e-14, 1),)))
        assert rep.passed and rep.borderline

    def test_hodge_zero_allowed_but_cohomology_not(self):
        assert witt_check(GB, LinkSpectrum(((0, 3), (F(2), 1), (F(-2), 1)))).passed
        rep = witt_check(GB, LinkSpectrum(((0, 3), (F(2), 1)), middle_cohomology_dim=1))
        assert not rep.passed and "cohomology" in rep.reason

    def test_twist_rank_ignored(self):
        link = LinkSpectrum(((F(1, 4), 1),))
        r1 = witt_check(SPIN, link)
        r2 = witt_check(OperatorDescriptor("SpinDirac", twist_rank=3), link)
        assert r1 == r2

    def test_custom_needs_base(self):
        with pytest.raises(NotApplicable):
            witt_check(OperatorDescriptor("AllowableCustom", "even"), LinkSpectrum(((1, 1),)))
        op = OperatorDescriptor("AllowableCustom", "even", base_kind="SpinDirac")
        assert witt_check(op, LinkSpectrum(((1, 1),))).passed

    def test_suggest_scaling(self):
        link = LinkSpectrum(((F(-1, 4), 1), (F(1, 4), 1)))
        c = suggest_scaling(SPIN, link)
        assert c == 2
        assert witt_check(SPIN, link.scaled(c)).passed
        assert suggest_scaling(SPIN, LinkSpectrum(((F(3), 1),))) == 1

    def test_unscalable(self):
        with pytest.raises(Unscalable):
            suggest_scaling(SPIN, LinkSpectrum(((0, 1), (1, 1))))
        with pytest.raises(Unscalable):
            suggest_scaling(GB, LinkSpectrum(((F(1, 2), 1),), middle_cohomology_dim=2))


def test_cone_over():
    M = EdgeDescriptor(5, [EdgeStratum(2, 2)])
    X = cone_over(M)
    assert X.m == 6
    assert X.edges[0].b == 3 and X.edges[0].f == 2
    assert len(X.exact_cone_points) == 1 and X.has_boundary


def test_link_symmetry():
    assert LinkSpectrum(((1, 2), (-1, 2))).is_symmetric()
    with pytest.raises(ValueError):
        LinkSpectrum(((1, 2), (-1, 1)), symmetric=True)


class TestParity:
    def test_gauss_bonnet_even(self):
        assert all(operator_parity(GB, m, b) == "even" for m in range(3, 9) for b in range(1, m - 1))

    def test_odd_signature(self):
        op = OperatorDescriptor("OddSignature")
        assert operator_parity(op, 5, 1) == "even"
        assert operator_parity(op, 5, 2) == "odd"

    def test_signature(self):
        op = OperatorDescriptor("Signature")
        assert operator_parity(op, 6, 2) == "even"
        assert operator_parity(op, 6, 1) == "unclassified"

    def test_spin(self):
        assert operator_parity(SPIN, 5, 1) == "even"
        assert operator_parity(SPIN, 5, 2) == "unclassified"

    def test_custom_declared(self):
        assert operator_parity(OperatorDescriptor("AllowableCustom", "odd"), 5, 2) == "odd"


def test_cone_over_three_dimensional():
    X = cone_over(EdgeDescriptor(3, [EdgeStratum(1, 1)]))
    assert X.m == 4 and (X.edges[0].b, X.edges[0].f) == (2, 1)
    assert len(X.exact_cone_points) == 1
