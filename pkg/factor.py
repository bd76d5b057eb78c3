"""Factorability of an algebra by a tolerance, quotients A/T, the covering
construction, and the search for non-factorability witnesses."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import partial
from typing import Iterable

from algebra_core import (
    AlgebraMap,
    FiniteAlgebra,
    direct_product,
    encode,
    is_homomorphism,
    subalgebra,
)
from blocks import Block, BlockSet, blocks, image_mask
from parallel import fan_out
from relations import (
    BinaryRelation,
    Budget,
    all_tolerances,
    image_relation,
    is_congruence,
)

WITNESS_SEARCH_MAX_SIZE = 10


class NotFactorableError(ValueError):
    def __init__(self, witness: NonFactorableWitness, algebra: FiniteAlgebra | None = None):
        self.witness = witness
        where = f" of {algebra.label()}" if algebra is not None else ""
        super().__init__(f"Tolerance{where} is not factorable: {witness}")


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class NonFactorableWitness:
    symbol: str
    tuple: tuple[Block, ...]
    image: tuple[int, ...]
    containers: tuple[Block, ...]

    def __str__(self):
        args = ", ".join(str(B) for B in self.tuple)
        image = "{" + ",".join(str(x) for x in self.image) + "}"
        holders = " and ".join(str(B) for B in self.containers)
        return f"{self.symbol}({args}) = {image} lies in {holders}"


@dataclass(frozen=True)
class Factorable:
    quotient: FiniteAlgebra
    block_set: BlockSet
    block_index: tuple[tuple[int, ...], ...]

    factorable = True

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotFactorable:
    witness: NonFactorableWitness
    block_set: BlockSet

    factorable = False

    def __bool__(self):
        return False


FactorabilityVerdict = Factorable | NotFactorable


def quotient_map_choices(block_set: BlockSet, size: int) -> tuple[tuple[int, ...], ...]:
    """For every element, the indices of the blocks containing it."""
    return tuple(tuple(block_set.containing([x])) for x in range(size))


def is_factorable(A: FiniteAlgebra, T: BinaryRelation) -> FactorabilityVerdict:
    """Decide whether every block tuple has a unique container; witnesses
    come in (signature order, lexicographic block-tuple index) order."""
    block_set = blocks(A, T)
    masks = [B.mask for B in block_set]
    m = len(block_set)
    tables = []
    for symbol, arity in A.signature.symbols:
        table = []
        for indices in itertools.product(range(m), repeat=arity):
            tuple_blocks = tuple(block_set[i] for i in indices)
            mask = image_mask(A, symbol, tuple_blocks)
            holders = [j for j, b in enumerate(masks) if mask & ~b == 0]
            if len(holders) != 1:
                image = tuple(x for x in range(A.size) if mask >> x & 1)
                witness = NonFactorableWitness(
                    symbol, tuple_blocks, image, tuple(block_set[j] for j in holders)
                )
                return NotFactorable(witness, block_set)
            table.append(holders[0])
        tables.append(tuple(table))
    name = f"{A.name}/T" if A.name else ""
    Q = FiniteAlgebra(m, A.signature, tuple(tables), name)
    return Factorable(Q, block_set, quotient_map_choices(block_set, A.size))


def quotient(A: FiniteAlgebra, T: BinaryRelation) -> FiniteAlgebra:
    verdict = is_factorable(A, T)
    if isinstance(verdict, NotFactorable):
        raise NotFactorableError(verdict.witness, A)
    return verdict.quotient


@dataclass(frozen=True)
class CoverResult:
    D: FiniteAlgebra
    theta: BinaryRelation
    phi: AlgebraMap
    pairs: tuple[tuple[int, int], ...]
    quotient: FiniteAlgebra


def covering_construction(A: FiniteAlgebra, T: BinaryRelation) -> CoverResult:
    """D = {(x, Y) : x ∈ Y} inside A × A/T, Θ the kernel of the second
    coordinate and φ the first projection, so that φ(Θ) = T."""
    verdict = is_factorable(A, T)
    if isinstance(verdict, NotFactorable):
        raise NotFactorableError(verdict.witness, A)
    Q = verdict.quotient
    C, _ = direct_product([A, Q])
    radices = [A.size, Q.size]
    members = sorted(
        encode((x, Y), radices)
        for Y, block in enumerate(verdict.block_set)
        for x in block
    )
    try:
        D, embedding = subalgebra(C, members, name=f"D({A.name})" if A.name else "")
    except ValueError as exc:
        raise ConstructionError(f"Pairs (x, Y) with x ∈ Y are not closed: {exc}") from exc

    pairs = tuple(divmod(embedding(d), Q.size) for d in range(D.size))
    phi = AlgebraMap(D, A, tuple(x for x, _ in pairs))
    theta = BinaryRelation(
        D.size,
        tuple(
            sum(1 << j for j, (_, Z) in enumerate(pairs) if Z == Y)
            for _, Y in pairs
        ),
    )

    # every x extends to a block, so φ is onto
    if not phi.is_surjective:
        raise ConstructionError("First projection of D is not surjective")
    if not is_homomorphism(phi):
        raise ConstructionError("First projection of D is not a homomorphism")
    if not is_congruence(D, theta):
        raise ConstructionError("Kernel of the second coordinate is not a congruence of D")
    if image_relation(phi, theta) != T:
        raise ConstructionError("φ(Θ) differs from the tolerance")
    return CoverResult(D, theta, phi, pairs, Q)


@dataclass(frozen=True)
class AlgebraFactorability:
    failing_tolerance: BinaryRelation | None = None
    witness: NonFactorableWitness | None = None
    checked: int = 0

    @property
    def factorable(self) -> bool:
        return self.failing_tolerance is None

    def __bool__(self):
        return self.factorable


def is_tolerance_factorable_algebra(A: FiniteAlgebra, budget: Budget | None = None) -> AlgebraFactorability:
    tolerances = all_tolerances(A, budget)
    for T in tolerances:
        verdict = is_factorable(A, T)
        if isinstance(verdict, NotFactorable):
            return AlgebraFactorability(T, verdict.witness, len(tolerances))
    return AlgebraFactorability(checked=len(tolerances))


@dataclass(frozen=True)
class WitnessHit:
    algebra: FiniteAlgebra
    tolerance: BinaryRelation
    witness: NonFactorableWitness


def _first_witness(A: FiniteAlgebra, budget: Budget | None) -> WitnessHit | None:
    verdict = is_tolerance_factorable_algebra(A, budget)
    if verdict.factorable:
        return None
    return WitnessHit(A, verdict.failing_tolerance, verdict.witness)


def find_nonfactorable_witness(
    generator: Iterable[FiniteAlgebra],
    budget: Budget | None = None,
    max_workers: int = 1,
    verbose: bool = False,
) -> WitnessHit | None:
    """First witness in stream order. With several workers, algebras are
    checked in batches and the earliest hit in the stream wins."""
    budget = budget or Budget.from_env()
    check = partial(_first_witness, budget=budget)
    if max_workers <= 1:
        for count, A in enumerate(generator, start=1):
            hit = check(A)
            if verbose and count % 100 == 0:
                print(f"  [{count}] algebras scanned")
            if hit is not None:
                return hit
        return None

    batch_size = max_workers * 16
    iterator = iter(generator)
    while True:
        batch = list(itertools.islice(iterator, batch_size))
        if not batch:
            return None
        for hit in fan_out(check, batch, max_workers=max_workers, verbose=verbose):
            if hit is not None:
                return hit
