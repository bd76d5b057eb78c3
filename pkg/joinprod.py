"""Products and independent joins: decomposing tolerances, blocks and
subalgebras over a product, splitting a join member along its decomposition
term, and checking that quotients commute with products."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from algebra_core import (
    AlgebraMap,
    FiniteAlgebra,
    Identity,
    Signature,
    Term,
    Var,
    check_term,
    decode,
    direct_product,
    encode,
    eval_term,
    find_isomorphism,
    holds_identity,
    is_homomorphism,
    is_subuniverse,
    term_variables,
)
from blocks import Block, maximal_cliques
from factor import quotient
from relations import (
    BinaryRelation,
    classical_quotient,
    from_pairs,
    is_congruence,
    product_relation,
    project_relation,
)


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class ProductStructure:
    product: FiniteAlgebra
    factors: tuple[FiniteAlgebra, ...]
    projections: tuple[AlgebraMap, ...]

    @property
    def radices(self) -> list[int]:
        return [F.size for F in self.factors]

    def encode(self, coords: Sequence[int]) -> int:
        return encode(coords, self.radices)

    def decode(self, index: int) -> tuple[int, ...]:
        return decode(index, self.radices)


def product_structure(factors: Sequence[FiniteAlgebra], name: str = "") -> ProductStructure:
    """Direct product of the factors together with its projections."""
    product, projections = direct_product(factors, name)
    return ProductStructure(product, tuple(factors), tuple(projections))


@dataclass(frozen=True)
class JoinSpec:
    signature: Signature
    subvariety_identities: tuple[tuple[Identity, ...], ...]
    d: Term

    def __post_init__(self):
        check_term(self.signature, self.d)
        n = len(self.subvariety_identities)
        if term_variables(self.d) != set(range(n)):
            raise DecompositionError(
                f"Decomposition term {self.d} must use exactly the variables x0..x{n - 1}"
            )
        for i, identities in enumerate(self.subvariety_identities):
            if self.projection_identity(i) not in identities:
                raise DecompositionError(
                    f"Subvariety {i + 1} lacks the identity {self.projection_identity(i)}"
                )

    @property
    def n(self) -> int:
        return len(self.subvariety_identities)

    def projection_identity(self, i: int) -> Identity:
        return Identity(self.d, Var(i), self.n)


# -- tolerances and blocks --------------------------------------------------

@dataclass(frozen=True)
class ToleranceDecomposition:
    parts: tuple[BinaryRelation, ...]
    exact: bool


def decompose_tolerance(P: ProductStructure, T: BinaryRelation) -> ToleranceDecomposition:
    """Project T onto each factor and check T is the product of its projections."""
    if T.size != P.product.size:
        raise DecompositionError(
            f"Relation on {T.size} elements for a product of size {P.product.size}"
        )
    parts = tuple(project_relation(T, P.radices, i) for i in range(len(P.factors)))
    return ToleranceDecomposition(parts, product_relation(parts) == T)


@dataclass(frozen=True)
class BlockDecompositionReport:
    blocks: tuple[Block, ...]
    factor_blocks: tuple[tuple[Block, ...], ...]
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed


def _product_block(P: ProductStructure, parts: Sequence[Iterable[int]]) -> Block:
    return Block(tuple(sorted(P.encode(c) for c in itertools.product(*parts))))


def decompose_blocks(P: ProductStructure, T: BinaryRelation) -> BlockDecompositionReport:
    """Every block is a product of factor blocks, and every product of factor
    blocks is a block."""
    decomposition = decompose_tolerance(P, T)
    if not decomposition.exact:
        raise DecompositionError(f"{T} is not the product of its projections")
    block_list = maximal_cliques(T)
    factor_blocks = tuple(maximal_cliques(part) for part in decomposition.parts)
    failures = []

    for B in block_list:
        coords = [P.decode(x) for x in B]
        projections = [
            Block(tuple(sorted({c[i] for c in coords}))) for i in range(len(P.factors))
        ]
        if _product_block(P, projections) != B:
            failures.append(f"block {B} is not the product of its projections")
        for i, proj in enumerate(projections):
            if proj not in factor_blocks[i]:
                failures.append(f"projection {proj} of block {B} is not a block of factor {i + 1}")

    expected = 1
    for fb in factor_blocks:
        expected *= len(fb)
    if len(block_list) != expected:
        failures.append(f"{len(block_list)} blocks, expected {expected} = product of factor counts")
    for combo in itertools.product(*factor_blocks):
        B = _product_block(P, combo)
        if B not in block_list:
            failures.append(f"product {' x '.join(str(b) for b in combo)} is not a block")

    return BlockDecompositionReport(tuple(block_list), factor_blocks, tuple(failures))


# -- subalgebras ------------------------------------------------------------

@dataclass(frozen=True)
class SubalgebraDecomposition:
    parts: tuple[tuple[int, ...], ...]
    missing: tuple[int, ...] | None = None

    @property
    def is_product(self) -> bool:
        return self.missing is None


def decompose_subalgebra(P: ProductStructure, S: Iterable[int]) -> SubalgebraDecomposition:
    """Split a subuniverse of the product into its factor projections."""
    S = set(S)
    if not S or not is_subuniverse(P.product, S):
        raise DecompositionError(f"{sorted(S)} is not a subuniverse of {P.product.label()}")
    coords = [P.decode(x) for x in S]
    parts = tuple(
        tuple(sorted({c[i] for c in coords})) for i in range(len(P.factors))
    )
    for combo in itertools.product(*parts):
        if P.encode(combo) not in S:
            return SubalgebraDecomposition(parts, combo)
    return SubalgebraDecomposition(parts)


# -- independent joins ------------------------------------------------------

@dataclass(frozen=True)
class JoinDecomposition:
    etas: tuple[BinaryRelation, ...]
    quotients: tuple[FiniteAlgebra, ...] = ()
    iso: AlgebraMap | None = None
    failed_check: str | None = None

    @property
    def member(self) -> bool:
        return self.failed_check is None

    def __bool__(self):
        return self.member


def decomposition_kernel(A: FiniteAlgebra, d: Term, n: int, i: int) -> BinaryRelation:
    """η_i = {(a, b) : d(b, ..., a, ..., b) = b with a in slot i}."""
    pairs = []
    for a in range(A.size):
        for b in range(A.size):
            assignment = [b] * n
            assignment[i] = a
            if eval_term(A, d, assignment) == b:
                pairs.append((a, b))
    return from_pairs(A.size, pairs, tolerant=False)


def decompose_algebra(A: FiniteAlgebra, spec: JoinSpec) -> JoinDecomposition:
    """Split A along the decomposition term of spec into quotients by the kernels."""
    if A.signature != spec.signature:
        raise DecompositionError(f"{A.label()} is not in the signature {spec.signature}")
    etas = tuple(decomposition_kernel(A, spec.d, spec.n, i) for i in range(spec.n))
    for i, eta in enumerate(etas):
        if not is_congruence(A, eta):
            return JoinDecomposition(etas, failed_check=f"η{i + 1} is not a congruence")

    quotients = []
    natural = []
    for i, eta in enumerate(etas):
        Q, nat = classical_quotient(A, eta)
        quotients.append(Q)
        natural.append(nat)
    for i, (Q, identities) in enumerate(zip(quotients, spec.subvariety_identities)):
        for identity in identities:
            verdict = holds_identity(Q, identity)
            if not verdict:
                return JoinDecomposition(
                    etas, tuple(quotients),
                    failed_check=f"A/η{i + 1} fails {identity} at {verdict.counterexample}",
                )

    P = product_structure(quotients)
    iso = AlgebraMap(
        A, P.product, tuple(P.encode([nat(a) for nat in natural]) for a in range(A.size))
    )
    if not iso.is_bijective:
        return JoinDecomposition(etas, tuple(quotients), failed_check="natural map is not bijective")
    if not is_homomorphism(iso):
        return JoinDecomposition(etas, tuple(quotients), failed_check="natural map is not a homomorphism")
    return JoinDecomposition(etas, tuple(quotients), iso)


@dataclass(frozen=True)
class IndependenceEntry:
    member: str
    subvariety: int
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class IndependenceReport:
    entries: tuple[IndependenceEntry, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __bool__(self):
        return self.passed


def verify_independence(
    spec: JoinSpec, members: Sequence[tuple[int, FiniteAlgebra]]
) -> IndependenceReport:
    """Each member tagged i must satisfy subvariety i, including d(x̄) = x_i.
    Tags count from 1."""
    entries = []
    for tag, A in members:
        label = A.label()
        if not 1 <= tag <= spec.n:
            entries.append(IndependenceEntry(label, tag, False, f"no subvariety {tag}"))
            continue
        failure = ""
        for identity in spec.subvariety_identities[tag - 1]:
            verdict = holds_identity(A, identity)
            if not verdict:
                failure = f"fails {identity} at {verdict.counterexample}"
                break
        entries.append(IndependenceEntry(label, tag, not failure, failure))
    return IndependenceReport(tuple(entries))


def verify_quotient_product(P: ProductStructure, T: BinaryRelation) -> bool:
    """A/T ≅ A_1/T_1 x ... x A_n/T_n, checked with find_isomorphism."""
    decomposition = decompose_tolerance(P, T)
    if not decomposition.exact:
        raise DecompositionError(f"{T} is not the product of its projections")
    factor_quotients = [quotient(F, part) for F, part in zip(P.factors, decomposition.parts)]
    right, _ = direct_product(factor_quotients)
    left = quotient(P.product, T)
    return find_isomorphism(left, right) is not None
