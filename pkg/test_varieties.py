import pytest

from algebra_core import AlgebraError, FiniteAlgebra, Signature, holds_identity
from algebra_files import load_fixture, load_witness_fixture
from factor import quotient
from lattice_gen import enumerate_lattices
from relations import all_tolerances, from_pairs
from varieties import (
    Variety,
    VarietyError,
    alter_ego_quotient,
    boolean_rotation,
    builtin,
    essential_arity_probe,
    lat_to_latt,
    lattice_sample,
    latt_to_lat,
    lift_rot,
    lift_set,
    make_rotational,
    member_of,
    parse_variety,
    power_of_set_n,
    probe_properties,
    projection_algebra,
    rot_containment_spot_check,
    rot_corpus,
    rotated_blocks_are_blocks,
    set_identities,
    set_sample,
    vmn_member,
    werner_probe,
)


@pytest.mark.parametrize("text, name, is_join", [
    ("Lat", "Lat", False),
    ("LatT", "LatT", False),
    ("Set2", "Set2", True),
    ("Set3^2", "Set3^2", False),
    ("Rot3", "Rot3", False),
    ("V23", "V23", True),
    ("RotLift:2,2", "Rot2[tau22]", False),
    ("V:2,2", "V22", True),
])
def test_parse_variety(text, name, is_join):
    V = parse_variety(text)
    assert V.name == name
    assert (V.join is not None) == is_join


@pytest.mark.parametrize("text", ["Group", "Set0", "Set2^3", "SetX", "V:2"])
def test_parse_variety_rejects(text):
    with pytest.raises(VarietyError):
        parse_variety(text)


def test_lattice_membership():
    lat, dist = builtin("Lat"), builtin("Dist")
    assert member_of(lat, load_fixture("C3"))
    assert member_of(dist, load_fixture("B4"))
    five = [L for L in enumerate_lattices(5) if L.size == 5]
    # the diamond and the pentagon
    assert sum(not member_of(dist, L) for L in five) == 2


def test_membership_rejects_signature_mismatch():
    with pytest.raises(AlgebraError):
        member_of(builtin("Lat"), load_fixture("PaperBand"))


def test_latt_converters_round_trip():
    latt = builtin("LatT")
    for L in enumerate_lattices(4):
        B = lat_to_latt(L)
        assert member_of(latt, B)
        assert latt_to_lat(B).tables == L.tables


def test_converters_reject_non_members():
    with pytest.raises(VarietyError):
        lat_to_latt(FiniteAlgebra.from_functions(
            2, load_fixture("C3").signature, {"join": min, "meet": min}
        ))


def test_set_identities():
    V = builtin("Set", n=2)
    assert len(set_identities(2)) == 3
    for A in set_sample(2, 2):
        assert member_of(V, A)
    A = FiniteAlgebra.from_functions(3, V.signature, {"e2": lambda x, y: max(x, y)})
    assert not member_of(V, A)
    assert member_of(builtin("Set", n=2, i=1), projection_algebra(3, 2, 1))
    assert not member_of(builtin("Set", n=2, i=1), projection_algebra(3, 2, 2))


def test_essential_arity_of_set_n():
    assert power_of_set_n(3).size == 8
    report = essential_arity_probe(2)
    assert report.passed
    assert report.essential == frozenset({0, 1})
    assert report.terms_checked > 2


def test_rotational_lattices():
    A = boolean_rotation(3)
    assert member_of(builtin("Rot", n=3), A)
    assert not member_of(builtin("Rot", n=2), A)
    assert all(rot_containment_spot_check(2, 4, [boolean_rotation(2)]))
    for T in all_tolerances(A):
        assert rotated_blocks_are_blocks(A, T)


def test_make_rotational_checks_automorphism():
    C3 = load_fixture("C3")
    with pytest.raises(VarietyError, match="automorphism"):
        make_rotational(C3, (2, 1, 0), 2)
    B4 = load_fixture("B4")
    with pytest.raises(VarietyError, match="identity"):
        make_rotational(B4, (0, 2, 1, 3), 3)


def test_rot_corpus():
    corpus = rot_corpus(4, orders=(2,))
    # four chains with the identity, plus B4 with the identity and the swap
    assert len(corpus) == 6
    assert all(n == 2 for n, _ in corpus)


def test_lifted_algebras_and_vmn_members():
    rot = boolean_rotation(2)
    band = projection_algebra(2, 2, 1)
    assert member_of(builtin("RotLift", m=2, n=2), lift_rot(rot, 2))
    assert member_of(builtin("SetLift", m=2, n=2), lift_set(band))
    assert not member_of(builtin("RotLift", m=2, n=2), lift_set(band))
    A = vmn_member(rot, band)
    assert A.size == 8
    assert member_of(builtin("V", m=2, n=2), A)


def test_lattice_probe_on_small_sample():
    report = probe_properties(builtin("Lat"), lattice_sample(4), "lattices of size <= 4")
    assert report.scope == "sample"
    for prop in ("P1", "P2", "P3", "P4"):
        assert report.verdict(prop).holds
    assert report.tolerances_checked == 1 + 2 + 5 + 14 + 4
    assert all("on this sample" in line for line in report.lines()[1:])


def test_probe_reports_failures():
    """A constant unary map sends a block into two blocks at once."""
    signature = Signature.of(("f", 1))
    anything = Variety("Unary", signature, ())
    A = FiniteAlgebra(3, signature, ((1, 1, 1),), "K3")
    report = probe_properties(anything, [A])
    assert not report.verdict("P1").holds
    assert not report.verdict("P2").holds
    assert not report.verdict("P3").holds
    assert "K3" in report.verdict("P1").witness


def test_probe_rejects_non_members():
    with pytest.raises(VarietyError):
        probe_properties(builtin("Dist"), [L for L in enumerate_lattices(5) if L.size == 5])


def test_alter_ego_quotient_of_witness():
    fixture = load_witness_fixture()
    B = lat_to_latt(fixture.lattice)
    Q = alter_ego_quotient(B, fixture.tolerance)
    assert Q.size == 5
    assert member_of(builtin("LatT"), Q)


def test_werner_probe_on_chain():
    probe = werner_probe(load_fixture("C3"))
    assert not probe.permutable
    assert str(probe.proper_tolerance) == "Δ∪{01,12}"


def test_set_n_quotients_satisfy_projection_identity():
    Q = quotient(load_fixture("PaperBand"), from_pairs(3, [(0, 1), (1, 2)]))
    assert holds_identity(Q, builtin("Set", n=2, i=1).identities[0])
