"""Finite algebras over the universe 0..n-1: terms, identities, products,
homomorphisms and isomorphism search.

Operation tables are stored flat and row-major: the entry for the argument
tuple (a_1, ..., a_k) sits at index a_1*n^(k-1) + ... + a_k, so the first
argument is the most significant digit. Products encode their elements the
same way, first factor most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise AlgebraError(f"Duplicate operation symbols in {names}")
        for name, arity in self.symbols:
            if arity < 0:
                raise AlgebraError(f"Symbol {name!r} has negative arity {arity}")

    @classmethod
    def of(cls, *symbols: tuple[str, int]) -> Signature:
        return cls(tuple(symbols))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def arity(self, name: str) -> int:
        for symbol, arity in self.symbols:
            if symbol == name:
                return arity
        raise AlgebraError(f"Unknown operation symbol {name!r}")

    def __str__(self):
        return "{" + ", ".join(f"{name}/{arity}" for name, arity in self.symbols) + "}"


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple[Term, ...] = ()

    def __str__(self):
        return f"{self.symbol}({', '.join(str(a) for a in self.args)})"


Term = Var | App


def app(symbol: str, *args: Term) -> App:
    return App(symbol, tuple(args))


def term_variables(t: Term) -> set[int]:
    if isinstance(t, Var):
        return {t.index}
    found: set[int] = set()
    for arg in t.args:
        found |= term_variables(arg)
    return found


def term_depth(t: Term) -> int:
    """Height of the term tree; variables have depth 0."""
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(a) for a in t.args), default=0)


def substitute(t: Term, mapping: dict[str, Callable[..., Term]]) -> Term:
    """Rewrite every application of a symbol in `mapping` through its builder."""
    if isinstance(t, Var):
        return t
    args = tuple(substitute(a, mapping) for a in t.args)
    if t.symbol in mapping:
        return mapping[t.symbol](*args)
    return App(t.symbol, args)


def instantiate(t: Term, args: Sequence[Term]) -> Term:
    """Replace each variable x_k by args[k]."""
    if isinstance(t, Var):
        return args[t.index]
    return App(t.symbol, tuple(instantiate(a, args) for a in t.args))


def binary_terms(signature: Signature, depth: int) -> Iterator[Term]:
    """All terms in the variables x0, x1 of depth at most `depth`."""
    seen: list[Term] = [Var(0), Var(1)]
    yield from seen
    for level in range(depth):
        fresh: list[Term] = []
        for name, arity in signature.symbols:
            if arity == 0:
                if level == 0:
                    fresh.append(App(name))
                continue
            for args in itertools.product(seen, repeat=arity):
                # at least one argument sits on the previous level
                if all(term_depth(a) < level for a in args):
                    continue
                fresh.append(App(name, tuple(args)))
        seen.extend(fresh)
        yield from fresh


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term
    nvars: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        used = term_variables(self.lhs) | term_variables(self.rhs)
        if used and max(used) >= self.nvars:
            raise AlgebraError(
                f"Identity {self} uses variable x{max(used)} but quantifies over {self.nvars}"
            )

    @classmethod
    def of(cls, lhs: Term, rhs: Term, label: str = "") -> Identity:
        used = term_variables(lhs) | term_variables(rhs)
        return cls(lhs, rhs, max(used, default=-1) + 1, label)

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


# -- algebras ---------------------------------------------------------------

def encode(coords: Sequence[int], radices: Sequence[int]) -> int:
    """Mixed-radix index of a coordinate tuple, first coordinate most significant."""
    index = 0
    for c, r in zip(coords, radices):
        index = index * r + c
    return index


def decode(index: int, radices: Sequence[int]) -> tuple[int, ...]:
    """Inverse of encode."""
    coords = []
    for r in reversed(radices):
        index, c = divmod(index, r)
        coords.append(c)
    return tuple(reversed(coords))


@dataclass(frozen=True)
class FiniteAlgebra:
    size: int
    signature: Signature
    tables: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.size < 1:
            raise AlgebraError(f"Universe must be nonempty, got size {self.size}")
        if len(self.tables) != len(self.signature.symbols):
            raise AlgebraError(
                f"{len(self.tables)} tables for signature {self.signature}"
            )
        for (name, arity), table in zip(self.signature.symbols, self.tables):
            if len(table) != self.size ** arity:
                raise AlgebraError(
                    f"Table of {name!r} has {len(table)} entries, expected {self.size ** arity}"
                )
            bad = [v for v in table if not 0 <= v < self.size]
            if bad:
                raise AlgebraError(f"Table of {name!r} has entry {bad[0]} outside 0..{self.size - 1}")

    @classmethod
    def from_functions(
        cls,
        size: int,
        signature: Signature,
        functions: dict[str, Callable[..., int]],
        name: str = "",
    ) -> FiniteAlgebra:
        tables = []
        for symbol, arity in signature.symbols:
            f = functions[symbol]
            tables.append(tuple(
                f(*args) for args in itertools.product(range(size), repeat=arity)
            ))
        return cls(size, signature, tuple(tables), name)

    @classmethod
    def from_nested(
        cls, size: int, signature: Signature, nested: dict[str, object], name: str = ""
    ) -> FiniteAlgebra:
        tables = []
        for symbol, arity in signature.symbols:
            tables.append(tuple(_flatten(nested[symbol], arity)))
        return cls(size, signature, tuple(tables), name)

    def table(self, symbol: str) -> tuple[int, ...]:
        try:
            return self.tables[self.signature.names.index(symbol)]
        except ValueError:
            raise AlgebraError(f"Unknown operation symbol {symbol!r}") from None

    def nested_table(self, symbol: str):
        return _nest(self.table(symbol), self.size, self.signature.arity(symbol))

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        return {
            name: np.array(table, dtype=np.int64)
            for (name, _), table in zip(self.signature.symbols, self.tables)
        }

    def apply(self, symbol: str, *args: int) -> int:
        return self.table(symbol)[encode(args, [self.size] * len(args))]

    def elements(self) -> range:
        return range(self.size)

    def label(self) -> str:
        return self.name or f"<{self.size}-element {self.signature}>"


def _flatten(nested, arity: int) -> list[int]:
    if arity == 0:
        return [nested]
    out: list[int] = []
    for row in nested:
        out.extend(_flatten(row, arity - 1))
    return out


def _nest(flat: Sequence[int], size: int, arity: int):
    if arity == 0:
        return flat[0]
    if arity == 1:
        return list(flat)
    step = size ** (arity - 1)
    return [_nest(flat[i * step:(i + 1) * step], size, arity - 1) for i in range(size)]


@dataclass(frozen=True)
class AlgebraMap:
    domain: FiniteAlgebra
    codomain: FiniteAlgebra
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.domain.size:
            raise AlgebraError(
                f"Map has {len(self.values)} values for a {self.domain.size}-element domain"
            )
        if any(not 0 <= v < self.codomain.size for v in self.values):
            raise AlgebraError("Map value outside the codomain")

    def __call__(self, x: int) -> int:
        return self.values[x]

    @property
    def is_surjective(self) -> bool:
        return len(set(self.values)) == self.codomain.size

    @property
    def is_bijective(self) -> bool:
        return self.domain.size == self.codomain.size and self.is_surjective

    def inverse(self) -> AlgebraMap:
        if not self.is_bijective:
            raise AlgebraError("Only bijective maps can be inverted")
        values = [0] * self.codomain.size
        for x, y in enumerate(self.values):
            values[y] = x
        return AlgebraMap(self.codomain, self.domain, tuple(values))

    def then(self, other: AlgebraMap) -> AlgebraMap:
        return AlgebraMap(self.domain, other.codomain, tuple(other(v) for v in self.values))


# -- evaluation -------------------------------------------------------------

def check_term(signature: Signature, t: Term) -> None:
    """Raise AlgebraError on unknown symbols or wrong arities."""
    if isinstance(t, Var):
        if t.index < 0:
            raise AlgebraError(f"Negative variable index in {t}")
        return
    arity = signature.arity(t.symbol)
    if arity != len(t.args):
        raise AlgebraError(
            f"{t.symbol!r} has arity {arity} but is applied to {len(t.args)} arguments"
        )
    for arg in t.args:
        check_term(signature, arg)


def _evaluate(A: FiniteAlgebra, t: Term, assignment: Sequence[int]) -> int:
    if isinstance(t, Var):
        return assignment[t.index]
    index = 0
    for arg in t.args:
        index = index * A.size + _evaluate(A, arg, assignment)
    return A.table(t.symbol)[index]


def eval_term(A: FiniteAlgebra, t: Term, assignment: Sequence[int]) -> int:
    """Value of t in A under the given assignment of variables."""
    check_term(A.signature, t)
    used = term_variables(t)
    if used and max(used) >= len(assignment):
        raise AlgebraError(f"Assignment of length {len(assignment)} does not cover {t}")
    if any(not 0 <= v < A.size for v in assignment):
        raise AlgebraError(f"Assignment {tuple(assignment)} leaves the universe of size {A.size}")
    return _evaluate(A, t, assignment)


def term_operation(A: FiniteAlgebra, t: Term, nvars: int) -> tuple[int, ...]:
    """Table of the nvars-ary term operation induced by t, row-major."""
    check_term(A.signature, t)
    return tuple(
        _evaluate(A, t, assignment)
        for assignment in itertools.product(range(A.size), repeat=nvars)
    )


@dataclass(frozen=True)
class IdentityVerdict:
    identity: Identity
    counterexample: tuple[int, ...] | None = None

    @property
    def holds(self) -> bool:
        return self.counterexample is None

    def __bool__(self):
        return self.holds


def holds_identity(A: FiniteAlgebra, identity: Identity) -> IdentityVerdict:
    """Check every assignment in lexicographic order; stops at the first counterexample."""
    check_term(A.signature, identity.lhs)
    check_term(A.signature, identity.rhs)
    for assignment in itertools.product(range(A.size), repeat=identity.nvars):
        if _evaluate(A, identity.lhs, assignment) != _evaluate(A, identity.rhs, assignment):
            return IdentityVerdict(identity, assignment)
    return IdentityVerdict(identity)


# -- products ---------------------------------------------------------------

def direct_product(
    factors: Sequence[FiniteAlgebra], name: str = ""
) -> tuple[FiniteAlgebra, list[AlgebraMap]]:
    """Product of the factors on encoded tuples, with its projection maps."""
    if not factors:
        raise AlgebraError("direct_product needs at least one factor")
    signature = factors[0].signature
    for F in factors[1:]:
        if F.signature != signature:
            raise AlgebraError(f"Signature mismatch: {signature} vs {F.signature}")
    radices = [F.size for F in factors]
    size = 1
    for r in radices:
        size *= r
    elements = [decode(i, radices) for i in range(size)]

    tables = []
    for symbol, arity in signature.symbols:
        factor_tables = [F.table(symbol) for F in factors]
        table = []
        for args in itertools.product(range(size), repeat=arity):
            coords = []
            for i, F in enumerate(factors):
                index = 0
                for a in args:
                    index = index * F.size + elements[a][i]
                coords.append(factor_tables[i][index])
            table.append(encode(coords, radices))
        tables.append(tuple(table))

    if not name:
        name = " x ".join(F.name or f"A{i + 1}" for i, F in enumerate(factors))
    product = FiniteAlgebra(size, signature, tuple(tables), name)
    projections = [
        AlgebraMap(product, F, tuple(e[i] for e in elements))
        for i, F in enumerate(factors)
    ]
    return product, projections


def is_homomorphism(phi: AlgebraMap) -> bool:
    """Whether phi commutes with every operation of its domain."""
    A, B = phi.domain, phi.codomain
    if A.signature != B.signature:
        return False
    for symbol, arity in A.signature.symbols:
        table_a, table_b = A.table(symbol), B.table(symbol)
        for index, args in enumerate(itertools.product(range(A.size), repeat=arity)):
            image = encode([phi(a) for a in args], [B.size] * arity)
            if phi(table_a[index]) != table_b[image]:
                return False
    return True


# -- subalgebras ------------------------------------------------------------

def subuniverse_generate(A: FiniteAlgebra, seed: Iterable[int]) -> frozenset[int]:
    """Least subset of A containing seed and closed under all operations."""
    current = set(seed)
    if any(not 0 <= x < A.size for x in current):
        raise AlgebraError(f"Seed {sorted(current)} leaves the universe of size {A.size}")
    for symbol, arity in A.signature.symbols:
        if arity == 0:
            current.add(A.table(symbol)[0])
    frontier = set(current)
    while frontier:
        fresh = set()
        ordered = sorted(current)
        for symbol, arity in A.signature.symbols:
            if arity == 0:
                continue
            table = A.table(symbol)
            for args in itertools.product(ordered, repeat=arity):
                if frontier.isdisjoint(args):
                    continue
                value = table[encode(args, [A.size] * arity)]
                if value not in current:
                    fresh.add(value)
        current |= fresh
        frontier = fresh
    return frozenset(current)


def is_subuniverse(A: FiniteAlgebra, subset: Iterable[int]) -> bool:
    subset = frozenset(subset)
    return subuniverse_generate(A, subset) == subset


def subalgebra(A: FiniteAlgebra, subset: Iterable[int], name: str = "") -> tuple[FiniteAlgebra, AlgebraMap]:
    """Re-index a closed subset to 0..k-1 in increasing order; returns the
    subalgebra and its embedding into A."""
    members = sorted(set(subset))
    if not members or not is_subuniverse(A, members):
        raise AlgebraError(f"{members} is not a nonempty subuniverse of {A.label()}")
    position = {x: i for i, x in enumerate(members)}
    k = len(members)
    tables = []
    for symbol, arity in A.signature.symbols:
        table = A.table(symbol)
        tables.append(tuple(
            position[table[encode(args, [A.size] * arity)]]
            for args in itertools.product(members, repeat=arity)
        ))
    sub = FiniteAlgebra(k, A.signature, tuple(tables), name)
    return sub, AlgebraMap(sub, A, tuple(members))


def reduct(A: FiniteAlgebra, symbols: Sequence[str], name: str = "") -> FiniteAlgebra:
    """A restricted to the named operation symbols."""
    signature = Signature(tuple((s, A.signature.arity(s)) for s in symbols))
    return FiniteAlgebra(A.size, signature, tuple(A.table(s) for s in symbols), name or A.name)


# -- dependence -------------------------------------------------------------

def _essential(table: Sequence[int], size: int, arity: int) -> set[int]:
    found = set()
    for i in range(arity):
        stride = size ** (arity - 1 - i)
        for index in range(len(table)):
            digit = (index // stride) % size
            if digit == 0:
                base = table[index]
                if any(table[index + d * stride] != base for d in range(1, size)):
                    found.add(i)
                    break
    return found


def essential_coordinates(A: FiniteAlgebra, symbol: str) -> set[int]:
    """Argument positions the basic operation actually depends on."""
    return _essential(A.table(symbol), A.size, A.signature.arity(symbol))


def term_essential_coordinates(A: FiniteAlgebra, t: Term, nvars: int) -> set[int]:
    return _essential(term_operation(A, t, nvars), A.size, nvars)


# -- isomorphisms -----------------------------------------------------------

def _element_profiles(A: FiniteAlgebra) -> list[tuple]:
    """Per-element invariants preserved by isomorphisms."""
    profiles = []
    for x in range(A.size):
        profile = []
        for symbol, arity in A.signature.symbols:
            table = A.table(symbol)
            if arity == 0:
                profile.append(table[0] == x)
            elif arity == 1:
                profile.append((table.count(x), table[x] == x))
            else:
                diagonal = encode([x] * arity, [A.size] * arity)
                profile.append((table.count(x), table[diagonal] == x))
        profiles.append(tuple(profile))
    return profiles


def _propagate(A: FiniteAlgebra, B: FiniteAlgebra, mapping: list[int], used: list[bool]) -> bool:
    """Force images of operation results whose arguments are all mapped."""
    changed = True
    while changed:
        changed = False
        for symbol, arity in A.signature.symbols:
            table_a, table_b = A.table(symbol), B.table(symbol)
            for index, args in enumerate(itertools.product(range(A.size), repeat=arity)):
                if any(mapping[a] < 0 for a in args):
                    continue
                target = table_b[encode([mapping[a] for a in args], [B.size] * arity)]
                value = table_a[index]
                if mapping[value] < 0:
                    if used[target]:
                        return False
                    mapping[value] = target
                    used[target] = True
                    changed = True
                elif mapping[value] != target:
                    return False
    return True


def iter_isomorphisms(A: FiniteAlgebra, B: FiniteAlgebra) -> Iterator[AlgebraMap]:
    """Yield every isomorphism A -> B, backtracking in element order."""
    if A.signature != B.signature:
        raise AlgebraError(f"Signature mismatch: {A.signature} vs {B.signature}")
    if A.size != B.size:
        return
    profiles_a, profiles_b = _element_profiles(A), _element_profiles(B)
    if sorted(profiles_a) != sorted(profiles_b):
        return

    def extend(mapping: list[int], used: list[bool]) -> Iterator[AlgebraMap]:
        try:
            x = mapping.index(-1)
        except ValueError:
            yield AlgebraMap(A, B, tuple(mapping))
            return
        for y in range(B.size):
            if used[y] or profiles_b[y] != profiles_a[x]:
                continue
            trial, trial_used = list(mapping), list(used)
            trial[x], trial_used[y] = y, True
            if _propagate(A, B, trial, trial_used):
                yield from extend(trial, trial_used)

    start, start_used = [-1] * A.size, [False] * B.size
    if _propagate(A, B, start, start_used):
        yield from extend(start, start_used)


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra) -> AlgebraMap | None:
    """First isomorphism A -> B, or None."""
    return next(iter_isomorphisms(A, B), None)


def automorphisms(A: FiniteAlgebra) -> list[AlgebraMap]:
    return list(iter_isomorphisms(A, A))
