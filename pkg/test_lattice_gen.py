import numpy as np
import pytest

from algebra_core import find_isomorphism
from lattice_gen import (
    LatticeBoundError,
    brute_force_lattices,
    enumerate_lattices,
    hasse_diagram,
    lattice_counts,
    lattice_from_order,
    order_of,
)
from varieties import builtin, member_of


def test_counts_up_to_six():
    assert lattice_counts(6) == {1: 1, 2: 1, 3: 1, 4: 2, 5: 5, 6: 15}


@pytest.mark.parametrize("size, count", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 5), (6, 15)])
def test_brute_force_counts(size, count):
    assert len(brute_force_lattices(size)) == count


def test_generated_lattices_are_lattices_with_bottom_zero():
    lat = builtin("Lat")
    for L in enumerate_lattices(5):
        assert member_of(lat, L)
        leq = order_of(L)
        assert leq[0].all() and leq[:, L.size - 1].all()
        # index order is a linear extension
        assert not np.tril(leq, -1).any()


def test_generated_lattices_are_pairwise_non_isomorphic():
    sample = [L for L in enumerate_lattices(6) if L.size == 6]
    for i, A in enumerate(sample):
        for B in sample[i + 1:]:
            assert find_isomorphism(A, B) is None


def test_generator_agrees_with_oracle_up_to_isomorphism():
    generated = [L for L in enumerate_lattices(5) if L.size == 5]
    for O in brute_force_lattices(5):
        assert sum(find_isomorphism(O, L) is not None for L in generated) == 1


def test_names_follow_size_and_generation_order():
    names = [L.name for L in enumerate_lattices(4)]
    assert names == ["L1.1", "L2.1", "L3.1", "L4.1", "L4.2"]


def test_hasse_diagram_of_diamond():
    leq = np.array([
        [1, 1, 1, 1],
        [0, 1, 0, 1],
        [0, 0, 1, 1],
        [0, 0, 0, 1],
    ], dtype=bool)
    assert sorted(hasse_diagram(leq).edges) == [(0, 1), (0, 2), (1, 3), (2, 3)]
    L = lattice_from_order(leq)
    assert L.apply("join", 1, 2) == 3
    assert L.apply("meet", 1, 2) == 0


def test_size_bound():
    with pytest.raises(LatticeBoundError):
        list(enumerate_lattices(9))
