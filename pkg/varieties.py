"""Variety catalog, membership, lattice/LatT converters, rotational lattices
and sample-level probes of the factorability properties.

Probe reports describe the sample they ran on and nothing more; a verdict
that holds on every sample algebra is still only a sample verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

from algebra_core import (
    AlgebraError,
    AlgebraMap,
    FiniteAlgebra,
    Identity,
    Signature,
    Term,
    Var,
    app,
    automorphisms,
    binary_terms,
    direct_product,
    holds_identity,
    instantiate,
    is_homomorphism,
    substitute,
    term_essential_coordinates,
)
from blocks import block_images
from factor import (
    NotFactorable,
    covering_construction,
    is_factorable,
    quotient,
)
from joinprod import JoinSpec, decompose_algebra
from lattice_gen import LAT_SIGNATURE, enumerate_lattices
from parallel import fan_out
from relations import (
    BinaryRelation,
    Budget,
    all_tolerances,
    congruences_permute,
    image_relation,
)

LATT_SIGNATURE = Signature((("tjoin", 3), ("tmeet", 3)))
ROT_SIGNATURE = Signature((("join", 2), ("meet", 2), ("g", 1)))

X, Y, Z = Var(0), Var(1), Var(2)


class VarietyError(ValueError):
    pass


def join(a: Term, b: Term) -> Term:
    return app("join", a, b)


def meet(a: Term, b: Term) -> Term:
    return app("meet", a, b)


def lattice_laws() -> tuple[Identity, ...]:
    return (
        Identity.of(join(X, Y), join(Y, X), "join commutative"),
        Identity.of(meet(X, Y), meet(Y, X), "meet commutative"),
        Identity.of(join(join(X, Y), Z), join(X, join(Y, Z)), "join associative"),
        Identity.of(meet(meet(X, Y), Z), meet(X, meet(Y, Z)), "meet associative"),
        Identity.of(X, join(X, meet(X, Y)), "absorption"),
        Identity.of(X, meet(X, join(X, Y)), "dual absorption"),
    )


def set_signature(n: int) -> Signature:
    return Signature(((f"e{n}", n),))


def tau_signature(n: int) -> Signature:
    """Symbols of the combined rotational/projection algebras; the order m of
    g only shows up in the identities."""
    return Signature((("join", 2), ("meet", 2), ("g", 1), (f"e{n}", n), ("star", 2)))


def _e(n: int, args: Sequence[Term]) -> Term:
    return app(f"e{n}", *args)


def _iterate(symbol: str, t: Term, times: int) -> Term:
    for _ in range(times):
        t = app(symbol, t)
    return t


def set_identities(n: int) -> tuple[Identity, ...]:
    """Idempotence plus e(x_1, .., e(y_1..y_n) at slot i, .., x_n) =
    e(x_1, .., y_i, .., x_n); these axiomatize the n-ary projection joins."""
    found = [Identity.of(_e(n, [X] * n), X, "idempotent")]
    if n == 1:
        return tuple(found)
    for i in range(n):
        # outer slots j != i take x-variables, the inner term takes y-variables
        outer = {j: Var(j if j < i else j - 1) for j in range(n) if j != i}
        inner = [Var(n - 1 + k) for k in range(n)]
        lhs_args = [outer[j] if j != i else _e(n, inner) for j in range(n)]
        rhs_args = [outer[j] if j != i else inner[i] for j in range(n)]
        found.append(Identity.of(_e(n, lhs_args), _e(n, rhs_args), f"slot {i + 1} absorbs"))
    return tuple(found)


def projection_identity(n: int, i: int) -> Identity:
    """e_n(x_1..x_n) = x_i, with i counted from 1."""
    return Identity(_e(n, [Var(k) for k in range(n)]), Var(i - 1), n, f"e{n} = x{i}")


def rot_identities(n: int) -> tuple[Identity, ...]:
    return lattice_laws() + (
        Identity.of(_iterate("g", X, n), X, f"g^{n} = id"),
        Identity.of(app("g", join(X, Y)), join(app("g", X), app("g", Y)), "g preserves join"),
        Identity.of(app("g", meet(X, Y)), meet(app("g", X), app("g", Y)), "g preserves meet"),
    )


def _as_latt(t: Term) -> Term:
    return substitute(t, {
        "join": lambda a, b: app("tjoin", a, b, b),
        "meet": lambda a, b: app("tmeet", a, b, b),
    })


def latt_identities() -> tuple[Identity, ...]:
    rewritten = tuple(
        Identity(_as_latt(i.lhs), _as_latt(i.rhs), i.nvars, i.label) for i in lattice_laws()
    )
    return rewritten + (
        Identity.of(
            app("tjoin", X, Y, Z),
            app("tjoin", X, app("tmeet", Y, Z, Z), app("tmeet", Y, Z, Z)),
            "tjoin unfolds",
        ),
        Identity.of(
            app("tmeet", X, Y, Z),
            app("tmeet", X, app("tjoin", Y, Z, Z), app("tjoin", Y, Z, Z)),
            "tmeet unfolds",
        ),
    )


def distributive_laws() -> tuple[Identity, ...]:
    return lattice_laws() + (
        Identity.of(meet(X, join(Y, Z)), join(meet(X, Y), meet(X, Z)), "distributive"),
    )


@dataclass(frozen=True)
class AlterEgo:
    """A term-equivalent variety with converters both ways."""
    variety: str
    forward: Callable[[FiniteAlgebra], FiniteAlgebra]
    backward: Callable[[FiniteAlgebra], FiniteAlgebra]


@dataclass(frozen=True)
class Variety:
    name: str
    signature: Signature
    identities: tuple[Identity, ...]
    join: JoinSpec | None = None
    alter_ego: AlterEgo | None = None
    params: tuple[tuple[str, int], ...] = field(default=(), compare=False)


def _lifted_rot_identities(m: int, n: int) -> tuple[Identity, ...]:
    return rot_identities(m) + (
        Identity(_e(n, [Var(k) for k in range(n)]), X, n, f"e{n} = x1"),
        Identity(app("star", X, Y), X, 2, "star = x"),
    )


def _lifted_set_identities(n: int) -> tuple[Identity, ...]:
    return set_identities(n) + (
        Identity.of(join(X, Y), X, "join = x"),
        Identity.of(meet(X, Y), X, "meet = x"),
        Identity.of(app("g", X), X, "g = id"),
        Identity(app("star", X, Y), Y, 2, "star = y"),
    )


def builtin(name: str, **params: int) -> Variety:
    if name == "Lat":
        return Variety("Lat", LAT_SIGNATURE, lattice_laws())
    if name == "Dist":
        return Variety("Dist", LAT_SIGNATURE, distributive_laws())
    if name == "LatT":
        return Variety(
            "LatT", LATT_SIGNATURE, latt_identities(),
            alter_ego=AlterEgo("Lat", latt_to_lat, lat_to_latt),
        )
    if name == "Set":
        n = params.get("n", 0)
        if n < 1:
            raise VarietyError(f"Set needs n >= 1, got {params}")
        i = params.get("i")
        if i is not None:
            if not 1 <= i <= n:
                raise VarietyError(f"Set_{n}^{i} needs 1 <= i <= {n}")
            return Variety(f"Set{n}^{i}", set_signature(n), (projection_identity(n, i),),
                           params=(("n", n), ("i", i)))
        spec = JoinSpec(
            set_signature(n),
            tuple((projection_identity(n, k),) for k in range(1, n + 1)),
            _e(n, [Var(k) for k in range(n)]),
        )
        return Variety(f"Set{n}", set_signature(n), set_identities(n), spec, params=(("n", n),))
    if name == "Rot":
        n = params.get("n", 0)
        if n < 1:
            raise VarietyError(f"Rot needs n >= 1, got {params}")
        return Variety(f"Rot{n}", ROT_SIGNATURE, rot_identities(n), params=(("n", n),))
    if name in ("RotLift", "SetLift", "V"):
        m, n = params.get("m", 0), params.get("n", 0)
        if m < 1 or n < 1:
            raise VarietyError(f"{name} needs m, n >= 1, got {params}")
        signature = tau_signature(n)
        rot_part = _lifted_rot_identities(m, n)
        set_part = _lifted_set_identities(n)
        if name == "RotLift":
            return Variety(f"Rot{m}[tau{m}{n}]", signature, rot_part, params=(("m", m), ("n", n)))
        if name == "SetLift":
            return Variety(f"Set{n}[tau{m}{n}]", signature, set_part, params=(("m", m), ("n", n)))
        spec = JoinSpec(signature, (rot_part, set_part), app("star", X, Y))
        return Variety(f"V{m}{n}", signature, (), spec, params=(("m", m), ("n", n)))
    raise VarietyError(f"Unknown variety {name!r}")


def parse_variety(text: str) -> Variety:
    """Catalog names as typed on the command line: Lat, Dist, LatT, Set2,
    Set2^1, Rot3, V23 style names with single-digit parameters, or
    RotLift:m,n / SetLift:m,n / V:m,n."""
    if ":" in text:
        name, _, args = text.partition(":")
        values = [int(v) for v in args.split(",")]
        if len(values) != 2:
            raise VarietyError(f"{name} needs two parameters, got {args!r}")
        return builtin(name, m=values[0], n=values[1])
    if text in ("Lat", "Dist", "LatT"):
        return builtin(text)
    try:
        if text.startswith("Set"):
            n, _, i = text[3:].partition("^")
            return builtin("Set", n=int(n), **({"i": int(i)} if i else {}))
        if text.startswith("Rot"):
            return builtin("Rot", n=int(text[3:]))
        if text.startswith("V") and len(text) == 3:
            return builtin("V", m=int(text[1]), n=int(text[2]))
    except ValueError as exc:
        raise VarietyError(f"Cannot read variety name {text!r}") from exc
    raise VarietyError(f"Unknown variety {text!r}")


# -- membership -------------------------------------------------------------

@dataclass(frozen=True)
class MembershipVerdict:
    variety: str
    failed_identity: Identity | None = None
    assignment: tuple[int, ...] | None = None
    failed_check: str | None = None

    @property
    def member(self) -> bool:
        return self.failed_identity is None and self.failed_check is None

    def __bool__(self):
        return self.member

    def __str__(self):
        if self.member:
            return f"member of {self.variety}"
        if self.failed_identity is not None:
            return f"not in {self.variety}: {self.failed_identity} fails at {self.assignment}"
        return f"not in {self.variety}: {self.failed_check}"


def member_of(V: Variety, A: FiniteAlgebra) -> MembershipVerdict:
    """Check the signature, every identity of V, and the join decomposition when V has one."""
    if A.signature != V.signature:
        raise AlgebraError(f"{A.label()} has signature {A.signature}, {V.name} has {V.signature}")
    for identity in V.identities:
        verdict = holds_identity(A, identity)
        if not verdict:
            return MembershipVerdict(V.name, identity, verdict.counterexample)
    if V.join is not None:
        decomposition = decompose_algebra(A, V.join)
        if not decomposition:
            return MembershipVerdict(V.name, failed_check=decomposition.failed_check)
    return MembershipVerdict(V.name)


def _require(V: Variety, A: FiniteAlgebra) -> None:
    verdict = member_of(V, A)
    if not verdict:
        raise VarietyError(f"{A.label()} is {verdict}")


# -- converters -------------------------------------------------------------

def lat_to_latt(A: FiniteAlgebra) -> FiniteAlgebra:
    _require(builtin("Lat"), A)
    return FiniteAlgebra.from_functions(A.size, LATT_SIGNATURE, {
        "tjoin": lambda x, y, z: A.apply("join", x, A.apply("meet", y, z)),
        "tmeet": lambda x, y, z: A.apply("meet", x, A.apply("join", y, z)),
    }, name=A.name)


def latt_to_lat(B: FiniteAlgebra) -> FiniteAlgebra:
    _require(builtin("LatT"), B)
    return FiniteAlgebra.from_functions(B.size, LAT_SIGNATURE, {
        "join": lambda x, y: B.apply("tjoin", x, y, y),
        "meet": lambda x, y: B.apply("tmeet", x, y, y),
    }, name=B.name)


def alter_ego_quotient(A: FiniteAlgebra, T: BinaryRelation) -> FiniteAlgebra:
    """A/T for a LatT algebra taken through its lattice alter ego; defined
    even when A itself is not T-factorable."""
    return lat_to_latt(quotient(latt_to_lat(A), T))


# -- builders ---------------------------------------------------------------

def projection_algebra(size: int, n: int, i: int, name: str = "") -> FiniteAlgebra:
    """({0..size-1}, e_n) with e_n the i-th projection, i counted from 1."""
    return FiniteAlgebra.from_functions(
        size, set_signature(n), {f"e{n}": lambda *args: args[i - 1]},
        name=name or f"P{size}^{i}",
    )


def power_of_set_n(n: int) -> FiniteAlgebra:
    """The 2^n-element member of Set_n whose i-th factor is the two-element
    i-th projection algebra."""
    product, _ = direct_product([projection_algebra(2, n, i) for i in range(1, n + 1)])
    return product


def make_rotational(L: FiniteAlgebra, g: Sequence[int], n: int, name: str = "") -> FiniteAlgebra:
    if L.signature != LAT_SIGNATURE:
        raise VarietyError(f"{L.label()} is not in the lattice signature")
    g = tuple(g)
    if sorted(g) != list(range(L.size)):
        raise VarietyError(f"{g} is not a permutation of {L.label()}")
    if not is_homomorphism(AlgebraMap(L, L, g)):
        raise VarietyError(f"{g} is not an automorphism of {L.label()}")
    x = list(range(L.size))
    for _ in range(n):
        x = [g[v] for v in x]
    if x != list(range(L.size)):
        raise VarietyError(f"g^{n} is not the identity")
    return FiniteAlgebra(
        L.size, ROT_SIGNATURE, (L.table("join"), L.table("meet"), g),
        name or f"({L.name}, g={''.join(map(str, g)) if L.size <= 10 else g})",
    )


def boolean_rotation(n: int) -> FiniteAlgebra:
    """The boolean lattice of subsets of n atoms with g rotating the atoms."""
    size = 1 << n
    L = FiniteAlgebra.from_functions(size, LAT_SIGNATURE, {
        "join": lambda a, b: a | b,
        "meet": lambda a, b: a & b,
    }, name=f"B{size}")
    mask = size - 1
    g = [((a << 1) | (a >> (n - 1))) & mask if n > 1 else a for a in range(size)]
    return make_rotational(L, g, n, name=f"B{size} rotated")


def automorphism_order(g: Sequence[int]) -> int:
    order = 1
    x = list(g)
    while x != list(range(len(g))):
        x = [g[v] for v in x]
        order += 1
    return order


def rot_corpus(max_size: int, orders: Iterable[int] = (1, 2, 3)) -> list[tuple[int, FiniteAlgebra]]:
    """(n, member of Rot_n) for every lattice automorphism g whose order
    divides n."""
    orders = list(orders)
    corpus = []
    for L in enumerate_lattices(max_size):
        for phi in automorphisms(L):
            k = automorphism_order(phi.values)
            for n in orders:
                if n % k == 0:
                    corpus.append((n, make_rotational(L, phi.values, n)))
    return corpus


def lift_rot(A: FiniteAlgebra, n: int) -> FiniteAlgebra:
    """A Rot_m member as a tau_mn algebra: e_n and star act as first projections."""
    return FiniteAlgebra(
        A.size, tau_signature(n),
        (A.table("join"), A.table("meet"), A.table("g"),
         tuple(args[0] for args in itertools.product(range(A.size), repeat=n)),
         tuple(a for a in range(A.size) for _ in range(A.size))),
        name=f"{A.name}^tau" if A.name else "",
    )


def lift_set(A: FiniteAlgebra) -> FiniteAlgebra:
    """A Set_n member as a tau_mn algebra: join, meet and g act as first
    projections, star as the second projection."""
    (symbol, n), = A.signature.symbols
    size = A.size
    first = tuple(a for a in range(size) for _ in range(size))
    second = tuple(b for _ in range(size) for b in range(size))
    return FiniteAlgebra(
        size, tau_signature(n),
        (first, first, tuple(range(size)), A.table(symbol), second),
        name=f"{A.name}^tau" if A.name else "",
    )


def vmn_member(rot_part: FiniteAlgebra, set_part: FiniteAlgebra) -> FiniteAlgebra:
    (_, n), = set_part.signature.symbols
    product, _ = direct_product([lift_rot(rot_part, n), lift_set(set_part)])
    return product


# -- probes -----------------------------------------------------------------

@dataclass(frozen=True)
class PropertyVerdict:
    holds: bool
    witness: str = ""


@dataclass(frozen=True)
class AlgebraProbe:
    algebra: str
    tolerances: int
    p1: PropertyVerdict
    p2: PropertyVerdict
    p3: PropertyVerdict
    p4: PropertyVerdict


@dataclass(frozen=True)
class PropertyReport:
    variety: str
    sample_description: str
    probes: tuple[AlgebraProbe, ...]

    scope = "sample"

    def verdict(self, prop: str) -> PropertyVerdict:
        key = prop.lower()
        if key == "p4":
            for probe in self.probes:
                if probe.p4.holds:
                    return probe.p4
            return PropertyVerdict(False, "no proper tolerance in the sample")
        for probe in self.probes:
            v = getattr(probe, key)
            if not v.holds:
                return v
        return PropertyVerdict(True)

    @property
    def tolerances_checked(self) -> int:
        return sum(p.tolerances for p in self.probes)

    def lines(self) -> list[str]:
        head = (
            f"{self.variety} on {self.sample_description}: "
            f"{len(self.probes)} algebras, {self.tolerances_checked} tolerances"
        )
        out = [head]
        names = {
            "P1": "every tolerance factorable",
            "P2": "every quotient in the variety",
            "P3": "every tolerance an image of a congruence",
            "P4": "some tolerance proper",
        }
        for key, text in names.items():
            v = self.verdict(key)
            mark = "✓" if v.holds else "✗"
            line = f"  {mark} {key} ({text}) on this sample"
            if v.witness:
                line += f": {v.witness}"
            out.append(line)
        return out


def _probe_one(V: Variety, A: FiniteAlgebra, budget: Budget | None) -> AlgebraProbe:
    _require(V, A)
    tolerances = all_tolerances(A, budget)
    p1 = p2 = p3 = PropertyVerdict(True)
    p4 = PropertyVerdict(False)
    label = A.label()
    for T in tolerances:
        if not p4.holds and not T.is_transitive:
            p4 = PropertyVerdict(True, f"{T} on {label}")
        verdict = is_factorable(A, T)
        if isinstance(verdict, NotFactorable):
            if p1.holds:
                p1 = PropertyVerdict(False, f"{T} on {label}: {verdict.witness}")
                p2 = PropertyVerdict(False, f"{T} on {label} has no quotient")
        elif p2.holds:
            membership = member_of(V, verdict.quotient)
            if not membership:
                p2 = PropertyVerdict(False, f"{label}/{T} is {membership}")
        if p3.holds:
            failure = _image_check(V, A, T, verdict)
            if failure:
                p3 = PropertyVerdict(False, f"{T} on {label}: {failure}")
    return AlgebraProbe(label, len(tolerances), p1, p2, p3, p4)


def _image_check(V: Variety, A: FiniteAlgebra, T: BinaryRelation, verdict) -> str:
    """Realize T as φ(Θ) with D in V; '' on success."""
    if isinstance(verdict, NotFactorable):
        if V.alter_ego is None:
            return "not factorable, no covering construction"
        cover = covering_construction(V.alter_ego.forward(A), T)
        D = V.alter_ego.backward(cover.D)
        phi = AlgebraMap(D, A, cover.phi.values)
        if not is_homomorphism(phi):
            return "converted first projection is not a homomorphism"
    else:
        cover = covering_construction(A, T)
        D, phi = cover.D, cover.phi
    membership = member_of(V, D)
    if not membership:
        return f"D is {membership}"
    if image_relation(phi, cover.theta) != T:
        return "φ(Θ) differs from T"
    return ""


def probe_properties(
    V: Variety,
    sample: Sequence[FiniteAlgebra],
    description: str = "",
    budget: Budget | None = None,
    max_workers: int = 1,
    verbose: bool = False,
) -> PropertyReport:
    probes = fan_out(
        partial(_probe_one, V, budget=budget), list(sample),
        max_workers=max_workers, verbose=verbose,
    )
    return PropertyReport(V.name, description or f"{len(sample)} algebras", tuple(probes))


def lattice_sample(max_size: int) -> list[FiniteAlgebra]:
    return list(enumerate_lattices(max_size))


def set_sample(n: int, max_factor: int) -> list[FiniteAlgebra]:
    """Products of projection algebras, one factor per coordinate, each of
    size at most max_factor."""
    sample = []
    for sizes in itertools.product(range(1, max_factor + 1), repeat=n):
        factors = [projection_algebra(s, n, i + 1) for i, s in enumerate(sizes)]
        product, _ = direct_product(factors)
        sample.append(product)
    return sample


# -- spot checks ------------------------------------------------------------

@dataclass(frozen=True)
class EssentialArityReport:
    n: int
    essential: frozenset[int]
    terms_checked: int
    failing_term: Term | None = None

    @property
    def passed(self) -> bool:
        return self.essential == frozenset(range(self.n)) and self.failing_term is None


def essential_arity_probe(n: int, depth: int = 2) -> EssentialArityReport:
    """On the 2^n-element member of Set_n, e_n depends on all n variables
    while every binary term s satisfies s(x, s(y, x)) = x."""
    A = power_of_set_n(n)
    essential = frozenset(term_essential_coordinates(A, app(f"e{n}", *map(Var, range(n))), n))
    checked = 0
    for s in binary_terms(A.signature, depth):
        identity = Identity(instantiate(s, [X, instantiate(s, [Y, X])]), X, 2)
        checked += 1
        if not holds_identity(A, identity):
            return EssentialArityReport(n, essential, checked, s)
    return EssentialArityReport(n, essential, checked)


def rot_containment_spot_check(n: int, m: int, sample: Iterable[FiniteAlgebra]) -> list[MembershipVerdict]:
    """Membership in Rot_m of Rot_n members; all should pass when n | m."""
    target = builtin("Rot", n=m)
    source = builtin("Rot", n=n)
    verdicts = []
    for A in sample:
        _require(source, A)
        verdicts.append(member_of(target, A))
    return verdicts


def rotated_blocks_are_blocks(A: FiniteAlgebra, T: BinaryRelation) -> bool:
    return all(r.is_block for r in block_images(A, T, "g"))


@dataclass(frozen=True)
class WernerProbe:
    permutable: bool
    proper_tolerance: BinaryRelation | None


def werner_probe(A: FiniteAlgebra, budget: Budget | None = None) -> WernerProbe:
    proper = all_tolerances(A, budget).proper()
    return WernerProbe(
        congruences_permute(A, budget).permute, proper[0] if proper else None
    )
