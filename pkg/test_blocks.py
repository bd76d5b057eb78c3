import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from algebra_files import load_fixture, load_witness_fixture
from blocks import (
    Block,
    block_images,
    blocks,
    blocks_determine,
    covering_block,
    maximal_cliques,
    op_image_over_blocks,
)
from lattice_gen import enumerate_lattices
from relations import NotATolerance, all_tolerances, diagonal, from_pairs, total
from varieties import boolean_rotation, rot_corpus


def test_blocks_of_proper_chain_tolerance():
    C3 = load_fixture("C3")
    block_set = blocks(C3, from_pairs(3, [(0, 1), (1, 2)]))
    assert [B.elements for B in block_set] == [(0, 1), (1, 2)]
    assert block_set.containing([1]) == [0, 1]
    assert block_set.containing([0]) == [0]


def test_trivial_tolerances():
    C3 = load_fixture("C3")
    assert [B.elements for B in blocks(C3, diagonal(3))] == [(0,), (1,), (2,)]
    assert [B.elements for B in blocks(C3, total(3))] == [(0, 1, 2)]


def test_blocks_need_a_tolerance():
    with pytest.raises(NotATolerance):
        blocks(load_fixture("C3"), from_pairs(3, [(0, 2)]))


def test_isolated_element_is_a_singleton_block():
    T = from_pairs(4, [(0, 1), (1, 2), (0, 2)])
    assert [B.elements for B in maximal_cliques(T)] == [(0, 1, 2), (3,)]


def test_covering_block():
    T = from_pairs(3, [(0, 1), (1, 2)])
    assert covering_block(T, [1]) == Block((0, 1))
    assert covering_block(T, [2, 1]) == Block((1, 2))
    assert covering_block(T, [0, 2]) is None


def test_image_over_blocks_lists_every_container():
    C3 = load_fixture("C3")
    block_set = blocks(C3, from_pairs(3, [(0, 1), (1, 2)]))
    image = op_image_over_blocks(C3, "join", (block_set[0], block_set[0]), block_set)
    assert image.image == (0, 1)
    assert image.containers == (Block((0, 1)),)
    image = op_image_over_blocks(C3, "meet", (block_set[1], block_set[1]), block_set)
    assert image.containers == (Block((1, 2)),)


def test_rotated_blocks_stay_blocks():
    A = boolean_rotation(2)
    images = block_images(A, total(4), "g")
    assert [r.is_block for r in images] == [True]


def test_lattice_witness_blocks():
    """The stored seven-element tolerance has three non-trivial blocks."""
    fixture = load_witness_fixture()
    block_set = blocks(fixture.lattice, fixture.tolerance)
    assert [B.elements for B in block_set] == [(0,), (1,), (2, 3), (3, 4), (5, 6)]


def test_nine_element_lattice_blocks():
    L9 = load_fixture("L9")
    block_set = blocks(L9, from_pairs(9, [(0, 2), (1, 3), (1, 6), (3, 6), (3, 7), (6, 7)]))
    assert [B.elements for B in block_set] == [(0, 2), (1, 3, 6), (3, 6, 7), (4,), (5,), (8,)]


def _covering_corpus():
    corpus = list(enumerate_lattices(5)) + [A for _, A in rot_corpus(4, orders=(2,))]
    return corpus + [load_fixture("C3"), load_fixture("PaperBand")]


@pytest.mark.parametrize("A", _covering_corpus(), ids=lambda A: A.name)
def test_small_sets_are_covered_exactly_when_pairwise_related(A):
    subsets = [X for k in (1, 2, 3) for X in itertools.combinations(range(A.size), k)]
    for T in all_tolerances(A):
        block_set = blocks(A, T)
        for X in subsets:
            related = all((a, b) in T for a in X for b in X)
            B = covering_block(T, X)
            assert (B is not None) == related, (A.name, str(T), X)
            if B is not None:
                assert set(X) <= set(B.elements)
                assert B in block_set.blocks


def graphs_on(n):
    pairs = list(itertools.combinations(range(n), 2))
    return st.lists(st.sampled_from(pairs), unique=True).map(lambda ps: from_pairs(n, ps))


@settings(max_examples=100)
@given(graphs_on(7))
def test_cliques_match_networkx(T):
    G = nx.Graph()
    G.add_nodes_from(range(T.size))
    G.add_edges_from(T.off_diagonal_pairs())
    expected = sorted(tuple(sorted(c)) for c in nx.find_cliques(G))
    assert [B.elements for B in maximal_cliques(T)] == expected


@settings(max_examples=100)
@given(graphs_on(6))
def test_blocks_cover_the_relation(T):
    """Every pair of T lies in some block; blocks recover T exactly."""
    found = maximal_cliques(T)
    for a, b in T:
        assert any(a in B and b in B for B in found)
    assert blocks_determine(T)
