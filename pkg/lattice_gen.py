"""Small lattices up to isomorphism.

The primary generator grows every lattice of size n+1 out of one of size n:
removing a join-irreducible element x from a finite lattice leaves a lattice,
so adding x back with a unique lower cover l and an up-set U of strict upper
bounds recovers every lattice of the next size. Isomorphic results are
rejected on their Hasse diagrams.

The oracle enumerates order relations directly and deduplicates by a
canonical form. It is slow and only meant to cross-check counts.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import networkx as nx
import numpy as np

from algebra_core import FiniteAlgebra, Signature

MAX_LATTICE_SIZE = 8

LAT_SIGNATURE = Signature((("join", 2), ("meet", 2)))


class LatticeBoundError(ValueError):
    pass


def lattice_from_order(leq: np.ndarray, name: str = "") -> FiniteAlgebra:
    """Join/meet tables of a lattice whose index order is a linear extension
    of `leq`, with 0 the bottom and n-1 the top."""
    n = leq.shape[0]
    join = []
    meet = []
    for a in range(n):
        for b in range(n):
            # in a linear extension the least upper bound has the smallest index
            upper = np.flatnonzero(leq[a] & leq[b])
            lower = np.flatnonzero(leq[:, a] & leq[:, b])
            join.append(int(upper[0]))
            meet.append(int(lower[-1]))
    return FiniteAlgebra(n, LAT_SIGNATURE, (tuple(join), tuple(meet)), name)


def order_of(L: FiniteAlgebra) -> np.ndarray:
    """a <= b iff a ∨ b = b."""
    n = L.size
    join = L.table("join")
    return np.array([[join[a * n + b] == b for b in range(n)] for a in range(n)], dtype=bool)


def hasse_diagram(leq: np.ndarray) -> nx.DiGraph:
    n = leq.shape[0]
    G = nx.DiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from((a, b) for a in range(n) for b in range(n) if a != b and leq[a, b])
    return nx.transitive_reduction(G)


def _relabel(leq: np.ndarray) -> np.ndarray:
    """Renumber along the smallest-index-first topological order."""
    order = list(nx.lexicographical_topological_sort(hasse_diagram(leq)))
    return leq[np.ix_(order, order)]


def _up_masks(leq: np.ndarray) -> list[int]:
    n = leq.shape[0]
    return [sum(1 << b for b in range(n) if leq[a, b]) for a in range(n)]


def _least(mask: int, up: list[int]) -> bool:
    """Whether the set `mask` has a least element."""
    x = 0
    m = mask
    while m:
        if m & 1 and mask & ~up[x] == 0:
            return True
        m >>= 1
        x += 1
    return False


def one_point_extensions(leq: np.ndarray) -> Iterator[np.ndarray]:
    """Every lattice obtained by adding one join-irreducible element."""
    n = leq.shape[0]
    up = _up_masks(leq)
    for lower in range(n):
        candidates = up[lower] & ~(1 << lower)
        members = [y for y in range(n) if candidates >> y & 1]
        outside = [y for y in range(n) if not leq[y, lower]]
        for bits in range(1 << len(members)):
            U = 0
            for k, y in enumerate(members):
                if bits >> k & 1:
                    U |= 1 << y
            if any(U >> y & 1 and up[y] & ~U for y in members):
                continue
            if not all(_least(U & up[y], up) for y in outside):
                continue
            grown = np.zeros((n + 1, n + 1), dtype=bool)
            grown[:n, :n] = leq
            grown[n, n] = True
            for y in range(n):
                if leq[y, lower]:
                    grown[y, n] = True
                if U >> y & 1:
                    grown[n, y] = True
            yield grown


class _IsomorphRejector:
    def __init__(self):
        self.buckets: dict[str, list[nx.DiGraph]] = {}

    def admit(self, leq: np.ndarray) -> bool:
        G = hasse_diagram(leq)
        key = nx.weisfeiler_lehman_graph_hash(G)
        bucket = self.buckets.setdefault(key, [])
        if any(nx.is_isomorphic(G, H) for H in bucket):
            return False
        bucket.append(G)
        return True


def lattice_orders(max_size: int, bound: int = MAX_LATTICE_SIZE) -> Iterator[np.ndarray]:
    if max_size > bound:
        raise LatticeBoundError(f"Lattices of size {max_size} requested, bound is {bound}")
    if max_size < 1:
        return
    level = [np.ones((1, 1), dtype=bool)]
    yield level[0]
    for _ in range(2, max_size + 1):
        rejector = _IsomorphRejector()
        grown = []
        for leq in level:
            for candidate in one_point_extensions(leq):
                if rejector.admit(candidate):
                    grown.append(_relabel(candidate))
        yield from grown
        level = grown


def enumerate_lattices(max_size: int, bound: int = MAX_LATTICE_SIZE) -> Iterator[FiniteAlgebra]:
    """All lattices with at most max_size elements up to isomorphism, ordered
    by size and then by generation order."""
    counts: dict[int, int] = {}
    for leq in lattice_orders(max_size, bound):
        n = leq.shape[0]
        counts[n] = counts.get(n, 0) + 1
        yield lattice_from_order(leq, f"L{n}.{counts[n]}")


def lattice_counts(max_size: int, bound: int = MAX_LATTICE_SIZE) -> dict[int, int]:
    counts = {n: 0 for n in range(1, max_size + 1)}
    for leq in lattice_orders(max_size, bound):
        counts[leq.shape[0]] += 1
    return counts


# -- oracle -----------------------------------------------------------------

def _transitive(pairs: set[tuple[int, int]]) -> bool:
    return all((a, c) in pairs for a, b in pairs for b2, c in pairs if b == b2)


def _is_lattice(leq: np.ndarray) -> bool:
    n = leq.shape[0]
    for a in range(n):
        for b in range(a + 1, n):
            upper = np.flatnonzero(leq[a] & leq[b])
            if not leq[upper[0]][upper].all():
                return False
    return True


def brute_force_lattices(size: int) -> list[FiniteAlgebra]:
    """Lattices of one size by filtering every order on 0 < middle < n-1
    whose index order is a linear extension."""
    if size <= 2:
        return [lattice_from_order(np.triu(np.ones((size, size), dtype=bool)), f"O{size}.1")]
    middle = list(range(1, size - 1))
    slots = list(itertools.combinations(middle, 2))
    seen: dict[tuple, np.ndarray] = {}
    for mask in range(1 << len(slots)):
        pairs = {slots[k] for k in range(len(slots)) if mask >> k & 1}
        if not _transitive(pairs):
            continue
        leq = np.eye(size, dtype=bool)
        leq[0, :] = True
        leq[:, size - 1] = True
        for a, b in pairs:
            leq[a, b] = True
        if not _is_lattice(leq):
            continue
        canonical = min(
            tuple(sorted((perm[a - 1], perm[b - 1]) for a, b in pairs))
            for perm in itertools.permutations(middle)
        )
        seen.setdefault(canonical, leq)
    return [lattice_from_order(leq, f"O{size}.{i + 1}") for i, leq in enumerate(seen.values())]
