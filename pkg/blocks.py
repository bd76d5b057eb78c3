"""Blocks of a tolerance: the maximal cliques of the graph (universe, T)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from algebra_core import AlgebraError, FiniteAlgebra, encode
from relations import BinaryRelation, NotATolerance, from_blocks, is_tolerance


@dataclass(frozen=True, order=True)
class Block:
    elements: tuple[int, ...]

    @property
    def mask(self) -> int:
        bits = 0
        for x in self.elements:
            bits |= 1 << x
        return bits

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self.elements

    def __str__(self):
        return "{" + ",".join(str(x) for x in self.elements) + "}"


def _members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class BlockSet:
    tolerance: BinaryRelation
    blocks: tuple[Block, ...]

    def __len__(self):
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    def __getitem__(self, i: int) -> Block:
        return self.blocks[i]

    def index(self, block: Block) -> int:
        return self.blocks.index(block)

    def containing(self, elements: Iterable[int]) -> list[int]:
        """Indices of the blocks that contain every given element."""
        mask = 0
        for x in elements:
            mask |= 1 << x
        return [i for i, B in enumerate(self.blocks) if mask & ~B.mask == 0]


def _degeneracy_order(neighbours: list[int]) -> list[int]:
    remaining = set(range(len(neighbours)))
    alive = (1 << len(neighbours)) - 1
    order = []
    while remaining:
        v = min(remaining, key=lambda u: (bin(neighbours[u] & alive).count("1"), u))
        order.append(v)
        remaining.discard(v)
        alive &= ~(1 << v)
    return order


def _bron_kerbosch(R: int, P: int, X: int, neighbours: list[int], found: list[int]) -> None:
    if not P and not X:
        found.append(R)
        return
    candidates = P | X
    # pivot: the vertex covering the most of P
    pivot = max(_members(candidates), key=lambda u: bin(P & neighbours[u]).count("1"))
    for v in _members(P & ~neighbours[pivot]):
        bit = 1 << v
        _bron_kerbosch(R | bit, P & neighbours[v], X & neighbours[v], neighbours, found)
        P &= ~bit
        X |= bit


@lru_cache(maxsize=4096)
def maximal_cliques(T: BinaryRelation) -> tuple[Block, ...]:
    """Maximal cliques of the off-diagonal graph of T, sorted. An element
    with no neighbours comes out as a singleton block."""
    neighbours = [T.neighbours(v) for v in range(T.size)]
    found: list[int] = []
    order = _degeneracy_order(neighbours)
    position = {v: i for i, v in enumerate(order)}
    for v in order:
        later = 0
        earlier = 0
        for u in _members(neighbours[v]):
            if position[u] > position[v]:
                later |= 1 << u
            else:
                earlier |= 1 << u
        _bron_kerbosch(1 << v, later, earlier, neighbours, found)
    return tuple(sorted(Block(_members(mask)) for mask in found))


def blocks(A: FiniteAlgebra, T: BinaryRelation) -> BlockSet:
    """Maximal blocks of the tolerance T of A, in canonical order."""
    if not is_tolerance(A, T):
        raise NotATolerance(f"{T} is not a tolerance of {A.label()}")
    return BlockSet(T, maximal_cliques(T))


def covering_block(T: BinaryRelation, X: Iterable[int]) -> Block | None:
    """The first block containing X when X² ⊆ T."""
    X = sorted(set(X))
    for a, b in itertools.combinations(X, 2):
        if (a, b) not in T:
            return None
    mask = 0
    for x in X:
        mask |= 1 << x
    for B in maximal_cliques(T):
        if mask & ~B.mask == 0:
            return B
    return None


def blocks_determine(T: BinaryRelation) -> bool:
    """Whether the union of the squares of the blocks is T."""
    return from_blocks(T.size, maximal_cliques(T)) == T


@dataclass(frozen=True)
class BlockImage:
    symbol: str
    blocks: tuple[Block, ...]
    image: tuple[int, ...]
    containers: tuple[Block, ...]


def image_mask(A: FiniteAlgebra, symbol: str, tuple_blocks: Sequence[Block]) -> int:
    arity = A.signature.arity(symbol)
    if len(tuple_blocks) != arity:
        raise AlgebraError(
            f"{symbol!r} has arity {arity}, got a tuple of {len(tuple_blocks)} blocks"
        )
    table = A.table(symbol)
    radices = [A.size] * arity
    mask = 0
    for args in itertools.product(*(B.elements for B in tuple_blocks)):
        mask |= 1 << table[encode(args, radices)]
    return mask


def op_image_over_blocks(
    A: FiniteAlgebra, symbol: str, tuple_blocks: Sequence[Block], block_set: BlockSet
) -> BlockImage:
    """Elementwise image of a block tuple and every block that contains it."""
    mask = image_mask(A, symbol, tuple_blocks)
    containers = tuple(B for B in block_set if mask & ~B.mask == 0)
    return BlockImage(symbol, tuple(tuple_blocks), _members(mask), containers)


@dataclass(frozen=True)
class RotatedBlock:
    block: Block
    image: tuple[int, ...]
    is_block: bool


def block_images(A: FiniteAlgebra, T: BinaryRelation, symbol: str) -> list[RotatedBlock]:
    """Elementwise image of every block under a unary operation."""
    if A.signature.arity(symbol) != 1:
        raise AlgebraError(f"{symbol!r} is not unary")
    block_set = blocks(A, T)
    table = A.table(symbol)
    out = []
    for B in block_set:
        image = tuple(sorted({table[x] for x in B}))
        out.append(RotatedBlock(B, image, Block(image) in block_set.blocks))
    return out
