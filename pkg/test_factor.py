import pytest

from algebra_core import find_isomorphism, is_homomorphism
from algebra_files import load_fixture, load_witness_fixture
from factor import (
    Factorable,
    NotFactorable,
    NotFactorableError,
    covering_construction,
    find_nonfactorable_witness,
    is_factorable,
    is_tolerance_factorable_algebra,
    quotient,
)
from lattice_gen import enumerate_lattices
from parallel import fan_out
from relations import (
    Budget,
    all_congruences,
    all_tolerances,
    classes,
    classical_quotient,
    diagonal,
    from_pairs,
    image_relation,
    total,
)
from varieties import builtin, lat_to_latt, member_of, rot_corpus


def test_projection_algebra_quotient():
    """Blocks {0,1} and {1,2}; the quotient is again a first projection."""
    A = load_fixture("PaperBand")
    verdict = is_factorable(A, from_pairs(3, [(0, 1), (1, 2)]))
    assert isinstance(verdict, Factorable)
    assert verdict.quotient.size == 2
    assert verdict.quotient.table("e2") == (0, 0, 1, 1)
    assert verdict.block_index == ((0,), (0, 1), (1,))


def test_chain_quotient_matches_fixture():
    C3 = load_fixture("C3")
    Q = quotient(C3, from_pairs(3, [(0, 1), (1, 2)]))
    expected = load_fixture("C3_quotient")
    assert Q.tables == expected.tables


@pytest.mark.parametrize("T, size", [(diagonal(3), 3), (total(3), 1)])
def test_trivial_quotients(T, size):
    assert quotient(load_fixture("C3"), T).size == size


def test_latt_form_of_witness_lattice_is_not_factorable():
    fixture = load_witness_fixture()
    assert is_factorable(fixture.lattice, fixture.tolerance)
    verdict = is_factorable(lat_to_latt(fixture.lattice), fixture.tolerance)
    assert isinstance(verdict, NotFactorable)
    assert verdict.witness.symbol in ("tjoin", "tmeet")
    assert len(verdict.witness.containers) >= 2


def test_quotient_raises_with_witness():
    fixture = load_witness_fixture()
    with pytest.raises(NotFactorableError) as info:
        quotient(lat_to_latt(fixture.lattice), fixture.tolerance)
    assert len(info.value.witness.containers) >= 2


def test_covering_construction_on_chain():
    C3 = load_fixture("C3")
    T = from_pairs(3, [(0, 1), (1, 2)])
    cover = covering_construction(C3, T)
    assert cover.pairs == ((0, 0), (1, 0), (1, 1), (2, 1))
    assert cover.phi.values == (0, 1, 1, 2)
    assert classes(cover.theta) == [(0, 1), (2, 3)]
    assert image_relation(cover.phi, cover.theta) == T
    assert is_homomorphism(cover.phi)
    # D is the 4-chain
    assert cover.D.table("join") == tuple(max(a, b) for a in range(4) for b in range(4))
    assert member_of(builtin("Lat"), cover.D)


def test_covering_construction_needs_factorable_tolerance():
    fixture = load_witness_fixture()
    with pytest.raises(NotFactorableError):
        covering_construction(lat_to_latt(fixture.lattice), fixture.tolerance)


def test_algebra_level_factorability():
    verdict = is_tolerance_factorable_algebra(load_fixture("C3"))
    assert verdict.factorable
    assert verdict.checked == 5


def test_native_lattices_have_no_witness():
    assert find_nonfactorable_witness(enumerate_lattices(5)) is None


def test_search_stops_at_first_witness():
    fixture = load_witness_fixture()
    stream = [lat_to_latt(L) for L in enumerate_lattices(3)] + [lat_to_latt(fixture.lattice)]
    hit = find_nonfactorable_witness(stream)
    assert hit is not None
    assert hit.algebra.name == fixture.lattice.name == "L7.38"
    assert not is_factorable(hit.algebra, hit.tolerance)


def test_fan_out_keeps_input_order():
    assert fan_out(abs, [-3, 1, -2, 5], max_workers=2) == [3, 1, 2, 5]
    assert fan_out(abs, [-1], max_workers=4) == [1]


def _congruence_corpus():
    corpus = list(enumerate_lattices(5)) + [A for _, A in rot_corpus(4, orders=(1, 2))]
    return corpus + [load_fixture("PaperBand"), load_fixture("B4")]


@pytest.mark.parametrize("A", _congruence_corpus(), ids=lambda A: A.name)
def test_congruence_quotient_matches_classical_quotient(A):
    for theta in all_congruences(A):
        classical, _ = classical_quotient(A, theta)
        phi = find_isomorphism(quotient(A, theta), classical)
        assert phi is not None, (A.name, str(theta))
        assert is_homomorphism(phi)


def test_nine_element_lattice_fits_default_budget():
    """LatT form of a nine-element lattice: enumeration stays inside Budget()."""
    B = lat_to_latt(load_fixture("L9"))
    tolerances = all_tolerances(B, Budget())
    assert len(tolerances) == 19
    T = from_pairs(9, [(0, 2), (1, 3), (1, 6), (3, 6), (3, 7), (6, 7)])
    assert T in tolerances
    assert isinstance(is_factorable(B, T), NotFactorable)
    assert not is_tolerance_factorable_algebra(B, Budget())
