"""Binary relations as packed bit rows, and the tolerances of finite algebras.

Row i of a relation is a Python int whose bit j is set iff (i, j) is in the
relation. Relations sort by their row-major bitstring, which is the
canonical order of every list this module returns.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from algebra_core import AlgebraError, AlgebraMap, FiniteAlgebra, decode, encode

BRUTE_FORCE_THRESHOLD = 5

MAX_ELEMENTS = 64
MAX_TOLERANCES = 100_000
MAX_STEPS = 1_000_000_000


class BudgetExceeded(RuntimeError):
    pass


class NotATolerance(ValueError):
    pass


class ToleranceEnumerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Budget:
    """Resource limits for tolerance enumeration. `max_steps` counts
    operation-tuple evaluations across all closures of one enumeration."""
    max_elements: int = MAX_ELEMENTS
    max_tolerances: int = MAX_TOLERANCES
    max_steps: int = MAX_STEPS

    @classmethod
    def from_env(cls) -> Budget:
        return cls(
            max_elements=int(os.environ.get("TOLERANCE_MAX_ELEMENTS", MAX_ELEMENTS)),
            max_tolerances=int(os.environ.get("TOLERANCE_MAX_TOLERANCES", MAX_TOLERANCES)),
            max_steps=int(os.environ.get("TOLERANCE_MAX_STEPS", MAX_STEPS)),
        )


class _StepCounter:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.steps = 0

    def charge(self, count: int) -> None:
        self.steps += count
        if self.steps > self.budget.max_steps:
            raise BudgetExceeded(
                f"Closure work exceeded {self.budget.max_steps} tuple evaluations"
            )


@dataclass(frozen=True)
class BinaryRelation:
    size: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.size:
            raise AlgebraError(f"{len(self.rows)} rows for a relation on {self.size} elements")

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> BinaryRelation:
        rows = []
        for row in np.asarray(matrix, dtype=bool):
            bits = 0
            for j in np.flatnonzero(row):
                bits |= 1 << int(j)
            rows.append(bits)
        return cls(len(rows), tuple(rows))

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=bool)
        for i, bits in enumerate(self.rows):
            for j in range(self.size):
                if bits >> j & 1:
                    m[i, j] = True
        return m

    @cached_property
    def bitstring(self) -> str:
        return "".join(
            "1" if bits >> j & 1 else "0"
            for bits in self.rows for j in range(self.size)
        )

    def __contains__(self, pair: tuple[int, int]) -> bool:
        a, b = pair
        return bool(self.rows[a] >> b & 1)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for a, bits in enumerate(self.rows):
            for b in range(self.size):
                if bits >> b & 1:
                    yield a, b

    def __len__(self):
        return sum(bin(bits).count("1") for bits in self.rows)

    def __or__(self, other: BinaryRelation) -> BinaryRelation:
        _check_sizes(self, other)
        return BinaryRelation(self.size, tuple(a | b for a, b in zip(self.rows, other.rows)))

    def __and__(self, other: BinaryRelation) -> BinaryRelation:
        _check_sizes(self, other)
        return BinaryRelation(self.size, tuple(a & b for a, b in zip(self.rows, other.rows)))

    def __le__(self, other: BinaryRelation) -> bool:
        _check_sizes(self, other)
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def sort_key(self) -> str:
        return self.bitstring

    def neighbours(self, a: int) -> int:
        return self.rows[a] & ~(1 << a)

    def off_diagonal_pairs(self) -> list[tuple[int, int]]:
        """Unordered pairs a < b in the relation."""
        return [(a, b) for a, b in self if a < b]

    @property
    def is_reflexive(self) -> bool:
        return all(bits >> i & 1 for i, bits in enumerate(self.rows))

    @property
    def is_symmetric(self) -> bool:
        return all((b, a) in self for a, b in self)

    @property
    def is_transitive(self) -> bool:
        return compose(self, self) <= self

    def literal(self) -> str:
        """Command-line form: unordered off-diagonal pairs, diagonal implied."""
        sep = "" if self.size <= 10 else "-"
        return ",".join(f"{a}{sep}{b}" for a, b in self.off_diagonal_pairs())

    def __str__(self):
        pairs = self.off_diagonal_pairs()
        if not pairs:
            return "Δ"
        if len(pairs) == self.size * (self.size - 1) // 2:
            return "∇"
        return "Δ∪{" + ",".join(f"{a}{b}" if self.size <= 10 else f"{a}-{b}" for a, b in pairs) + "}"


def _check_sizes(*relations: BinaryRelation) -> None:
    sizes = {R.size for R in relations}
    if len(sizes) > 1:
        raise AlgebraError(f"Relation size mismatch: {sorted(sizes)}")


def _check_algebra(A: FiniteAlgebra, R: BinaryRelation) -> None:
    if R.size != A.size:
        raise AlgebraError(f"Relation on {R.size} elements given for {A.label()} of size {A.size}")


def diagonal(n: int) -> BinaryRelation:
    """The equality relation on n elements."""
    return BinaryRelation(n, tuple(1 << i for i in range(n)))


def total(n: int) -> BinaryRelation:
    return BinaryRelation(n, tuple((1 << n) - 1 for _ in range(n)))


def from_pairs(n: int, pairs: Iterable[tuple[int, int]], tolerant: bool = True) -> BinaryRelation:
    """Relation from pairs; with `tolerant` the reflexive-symmetric closure."""
    rows = [1 << i if tolerant else 0 for i in range(n)]
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise AlgebraError(f"Pair ({a}, {b}) outside 0..{n - 1}")
        rows[a] |= 1 << b
        if tolerant:
            rows[b] |= 1 << a
    return BinaryRelation(n, tuple(rows))


def from_blocks(n: int, groups: Iterable[Iterable[int]]) -> BinaryRelation:
    """Union of X² over the given sets, plus the diagonal."""
    rows = [1 << i for i in range(n)]
    for group in groups:
        mask = 0
        for x in group:
            mask |= 1 << x
        for x in group:
            rows[x] |= mask
    return BinaryRelation(n, tuple(rows))


def compose(R: BinaryRelation, S: BinaryRelation) -> BinaryRelation:
    """R∘S = {(a, c) : (a, b) ∈ R and (b, c) ∈ S for some b}."""
    _check_sizes(R, S)
    rows = []
    for bits in R.rows:
        row = 0
        for b in range(R.size):
            if bits >> b & 1:
                row |= S.rows[b]
        rows.append(row)
    return BinaryRelation(R.size, tuple(rows))


def kernel(phi: AlgebraMap) -> BinaryRelation:
    n = phi.domain.size
    return from_pairs(n, [(a, b) for a in range(n) for b in range(n) if phi(a) == phi(b)], tolerant=False)


def classes(theta: BinaryRelation) -> list[tuple[int, ...]]:
    """Equivalence classes, ordered by least element."""
    seen = 0
    found = []
    for a in range(theta.size):
        if seen >> a & 1:
            continue
        members = tuple(b for b in range(theta.size) if theta.rows[a] >> b & 1)
        for b in members:
            seen |= 1 << b
        found.append(members)
    return found


def classical_quotient(A: FiniteAlgebra, theta: BinaryRelation) -> tuple[FiniteAlgebra, AlgebraMap]:
    """A/θ for a congruence θ, with its natural map. Classes are ordered by
    their least element."""
    if not is_congruence(A, theta):
        raise NotATolerance(f"{theta} is not a congruence of {A.label()}")
    parts = classes(theta)
    index = {}
    for i, part in enumerate(parts):
        for x in part:
            index[x] = i
    k = len(parts)
    tables = []
    for symbol, arity in A.signature.symbols:
        table = A.table(symbol)
        tables.append(tuple(
            index[table[encode([parts[c][0] for c in args], [A.size] * arity)]]
            for args in itertools.product(range(k), repeat=arity)
        ))
    Q = FiniteAlgebra(k, A.signature, tuple(tables), f"{A.name}/θ" if A.name else "")
    return Q, AlgebraMap(A, Q, tuple(index[x] for x in range(A.size)))


# -- compatibility ----------------------------------------------------------

def _pair_arrays(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    left, right = np.nonzero(m)
    return left.astype(np.int64), right.astype(np.int64)


def _tuple_images(
    table: np.ndarray, n: int, coordinates: Sequence[tuple[np.ndarray, np.ndarray]]
) -> tuple[np.ndarray, np.ndarray]:
    """Image pairs of every tuple of pairs drawn from the per-position pair
    arrays; left and right indices advance in lockstep."""
    left = np.zeros(1, dtype=np.int64)
    right = np.zeros(1, dtype=np.int64)
    for lefts, rights in coordinates:
        left = (left[:, None] * n + lefts[None, :]).ravel()
        right = (right[:, None] * n + rights[None, :]).ravel()
    return table[left], table[right]


def _compatible(A: FiniteAlgebra, m: np.ndarray) -> bool:
    n = A.size
    pairs = _pair_arrays(m)
    for symbol, arity in A.signature.symbols:
        if arity == 0:
            continue
        table = A.arrays[symbol]
        if arity == 1:
            lhs, rhs = _tuple_images(table, n, [pairs])
            if not m[lhs, rhs].all():
                return False
            continue
        # one chunk per pair in the first slot so a violation exits early
        for a, b in zip(*pairs):
            head = (np.array([a]), np.array([b]))
            lhs, rhs = _tuple_images(table, n, [head] + [pairs] * (arity - 1))
            if not m[lhs, rhs].all():
                return False
    return True


def is_tolerance(A: FiniteAlgebra, R: BinaryRelation) -> bool:
    """Reflexive, symmetric and compatible with every operation of A."""
    _check_algebra(A, R)
    if not (R.is_reflexive and R.is_symmetric):
        return False
    if len(R) == A.size * A.size:
        return True
    return _compatible(A, R.matrix)


def is_congruence(A: FiniteAlgebra, R: BinaryRelation) -> bool:
    return is_tolerance(A, R) and R.is_transitive


def _closure(
    A: FiniteAlgebra,
    seed: BinaryRelation,
    counter: _StepCounter | None,
    settled: BinaryRelation | None = None,
) -> BinaryRelation:
    """Least tolerance containing seed. `settled`, when given, must be a
    tolerance inside seed; only the pairs outside it start the worklist."""
    n = A.size
    m = seed.matrix | seed.matrix.T
    np.fill_diagonal(m, True)
    frontier = m.copy() if settled is None else m & ~settled.matrix
    while frontier.any():
        new_pairs = _pair_arrays(frontier)
        old_pairs = _pair_arrays(m & ~frontier)
        all_pairs = _pair_arrays(m)
        added = np.zeros_like(m)
        for symbol, arity in A.signature.symbols:
            if arity == 0:
                continue
            table = A.arrays[symbol]
            # semi-naive: position i takes a frontier pair, earlier positions
            # settled pairs, later positions any pair
            for i in range(arity):
                coordinates = [old_pairs] * i + [new_pairs] + [all_pairs] * (arity - 1 - i)
                if counter is not None:
                    work = 1
                    for lefts, _ in coordinates:
                        work *= len(lefts)
                    counter.charge(work)
                lhs, rhs = _tuple_images(table, n, coordinates)
                added[lhs, rhs] = True
        added &= ~m
        m |= added
        frontier = added
    return BinaryRelation.from_matrix(m)


def compatibility_closure(A: FiniteAlgebra, seed: BinaryRelation) -> BinaryRelation:
    """Least tolerance of A containing seed."""
    _check_algebra(A, seed)
    return _closure(A, seed, None)


def principal_tolerance(A: FiniteAlgebra, a: int, b: int) -> BinaryRelation:
    if not (0 <= a < A.size and 0 <= b < A.size):
        raise AlgebraError(f"Pair ({a}, {b}) outside the universe of {A.label()}")
    return compatibility_closure(A, from_pairs(A.size, [(a, b)]))


def tolerance_join(A: FiniteAlgebra, S: BinaryRelation, T: BinaryRelation) -> BinaryRelation:
    """Least tolerance containing both S and T."""
    for R in (S, T):
        if not is_tolerance(A, R):
            raise NotATolerance(f"{R} is not a tolerance of {A.label()}")
    return _closure(A, S | T, None, settled=S if len(S) >= len(T) else T)


def relation_meet(S: BinaryRelation, T: BinaryRelation) -> BinaryRelation:
    return S & T


# -- enumeration ------------------------------------------------------------

@dataclass(frozen=True)
class ToleranceSet:
    algebra: FiniteAlgebra
    members: tuple[BinaryRelation, ...]

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[BinaryRelation]:
        return iter(self.members)

    def __getitem__(self, i: int) -> BinaryRelation:
        return self.members[i]

    def __contains__(self, R: object) -> bool:
        return R in self.members

    @property
    def bitstrings(self) -> set[str]:
        return {R.bitstring for R in self.members}

    def congruences(self) -> list[BinaryRelation]:
        return [R for R in self.members if R.is_transitive]

    def proper(self) -> list[BinaryRelation]:
        return [R for R in self.members if not R.is_transitive]


def brute_force_tolerances(A: FiniteAlgebra) -> list[BinaryRelation]:
    """Filter every reflexive symmetric relation through is_tolerance."""
    n = A.size
    candidates = list(itertools.combinations(range(n), 2))
    found = []
    for mask in range(1 << len(candidates)):
        pairs = [p for k, p in enumerate(candidates) if mask >> k & 1]
        R = from_pairs(n, pairs)
        if is_tolerance(A, R):
            found.append(R)
    return sorted(found, key=BinaryRelation.sort_key)


def all_tolerances(
    A: FiniteAlgebra, budget: Budget | None = None, verify: bool = True
) -> ToleranceSet:
    """Every tolerance of A, as the join-closure of the principal tolerances
    and Δ. Small algebras are cross-checked against brute force."""
    budget = budget or Budget.from_env()
    n = A.size
    if n > budget.max_elements:
        raise BudgetExceeded(f"{A.label()} has {n} elements, budget allows {budget.max_elements}")
    counter = _StepCounter(budget)
    found: dict[str, BinaryRelation] = {}

    def admit(R: BinaryRelation) -> bool:
        if R.bitstring in found:
            return False
        if len(found) >= budget.max_tolerances:
            raise BudgetExceeded(
                f"{A.label()} has more than {budget.max_tolerances} tolerances"
            )
        found[R.bitstring] = R
        return True

    admit(diagonal(n))
    principals: list[BinaryRelation] = []
    for a, b in itertools.combinations(range(n), 2):
        P = _closure(A, from_pairs(n, [(a, b)]), counter)
        admit(P)
        if P not in principals:
            principals.append(P)

    queue = list(found.values())
    while queue:
        R = queue.pop()
        for P in principals:
            if P <= R:
                continue
            J = _closure(A, R | P, counter, settled=R if len(R) >= len(P) else P)
            if admit(J):
                queue.append(J)

    members = tuple(sorted(found.values(), key=BinaryRelation.sort_key))
    if verify and n <= BRUTE_FORCE_THRESHOLD:
        expected = brute_force_tolerances(A)
        if [R.bitstring for R in expected] != [R.bitstring for R in members]:
            raise ToleranceEnumerationError(
                f"Join-closure found {len(members)} tolerances of {A.label()}, "
                f"brute force found {len(expected)}"
            )
    return ToleranceSet(A, members)


def all_congruences(A: FiniteAlgebra, budget: Budget | None = None) -> list[BinaryRelation]:
    """The transitive members of all_tolerances(A)."""
    return all_tolerances(A, budget).congruences()


# -- images and products ----------------------------------------------------

def image_relation(phi: AlgebraMap, theta: BinaryRelation) -> BinaryRelation:
    if theta.size != phi.domain.size:
        raise AlgebraError("Relation does not live on the domain of the map")
    if not phi.is_surjective:
        raise AlgebraError("image_relation needs a surjective map")
    return from_pairs(phi.codomain.size, [(phi(x), phi(y)) for x, y in theta], tolerant=False)


def product_relation(parts: Sequence[BinaryRelation]) -> BinaryRelation:
    """((a_1..a_n), (b_1..b_n)) related iff (a_i, b_i) ∈ T_i for every i,
    with elements encoded first factor most significant."""
    if not parts:
        raise AlgebraError("product_relation needs at least one part")
    radices = [R.size for R in parts]
    size = 1
    for r in radices:
        size *= r
    elements = [decode(i, radices) for i in range(size)]
    rows = []
    for a in elements:
        row = 0
        for j, b in enumerate(elements):
            if all((x, y) in R for x, y, R in zip(a, b, parts)):
                row |= 1 << j
        rows.append(row)
    return BinaryRelation(size, tuple(rows))


def project_relation(R: BinaryRelation, radices: Sequence[int], i: int) -> BinaryRelation:
    """{(a_i, b_i) : (a, b) ∈ R} on the i-th factor."""
    total_size = 1
    for r in radices:
        total_size *= r
    if total_size != R.size:
        raise AlgebraError(f"Relation on {R.size} elements does not match radices {list(radices)}")
    elements = [decode(x, radices) for x in range(R.size)]
    return from_pairs(radices[i], [(elements[a][i], elements[b][i]) for a, b in R], tolerant=False)


@dataclass(frozen=True)
class PermutabilityVerdict:
    witness: tuple[BinaryRelation, BinaryRelation] | None = None

    @property
    def permute(self) -> bool:
        return self.witness is None

    def __bool__(self):
        return self.permute


def congruences_permute(A: FiniteAlgebra, budget: Budget | None = None) -> PermutabilityVerdict:
    """Whether every pair of congruences of A commutes under composition."""
    congruences = all_congruences(A, budget)
    for theta, psi in itertools.combinations(congruences, 2):
        if compose(theta, psi) != compose(psi, theta):
            return PermutabilityVerdict((theta, psi))
    return PermutabilityVerdict()
