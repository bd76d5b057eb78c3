"""Acceptance suite: every instance-level construction and example checked
exhaustively at desk scale.

Each check returns '' when it passes or a description of the first failure.
BudgetExceeded is not caught here; the CLI turns it into exit code 3.

Usage:
    python paper_verify.py [--quick] [--budget N] [--workers N]
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable

import pandas as pd

from algebra_core import FiniteAlgebra, find_isomorphism, holds_identity, reduct
from algebra_files import FIXTURES_DIR, load_fixture, load_witness_fixture, verify_witness_fixture
from factor import (
    WITNESS_SEARCH_MAX_SIZE,
    ConstructionError,
    NotFactorable,
    covering_construction,
    find_nonfactorable_witness,
    is_factorable,
)
from joinprod import decompose_blocks, decompose_subalgebra, decompose_tolerance, product_structure, verify_quotient_product
from lattice_gen import brute_force_lattices, enumerate_lattices, lattice_counts
from parallel import fan_out
from relations import (
    Budget,
    all_tolerances,
    brute_force_tolerances,
    classical_quotient,
    from_pairs,
    image_relation,
    is_tolerance,
)
from varieties import (
    Variety,
    builtin,
    essential_arity_probe,
    lat_to_latt,
    member_of,
    projection_algebra,
    projection_identity,
    rot_containment_spot_check,
    rot_corpus,
    rotated_blocks_are_blocks,
    werner_probe,
)

EXPECTED_LATTICE_COUNTS = {1: 1, 2: 1, 3: 1, 4: 2, 5: 5, 6: 15}


def time_function(func, *args, **kwargs):
    start = time.time()
    result = func(*args, **kwargs)
    return result, time.time() - start


@dataclass(frozen=True)
class VerifyContext:
    budget: Budget
    fixtures_dir: Path
    max_workers: int = 1
    quick: bool = False
    search_size: int = 7

    def sized(self, full: int, quick: int) -> int:
        return quick if self.quick else full


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    failure: str
    detail: str
    elapsed: float

    @property
    def passed(self) -> bool:
        return not self.failure


@dataclass
class SuiteResult:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_records(self) -> list[dict]:
        # elapsed is left out so reports compare equal across runs
        return [
            {"check": c.number, "title": c.title, "passed": c.passed,
             "detail": c.failure or c.detail}
            for c in self.checks
        ]

    def table(self) -> pd.DataFrame:
        df = pd.DataFrame(self.as_records())
        df["seconds"] = [round(c.elapsed, 2) for c in self.checks]
        return df


# Each check returns (failure, detail).
CheckOutcome = tuple[str, str]


def _first_failure(results: list[str]) -> str:
    return next((r for r in results if r), "")


# -- 1 ----------------------------------------------------------------------

def _oracle_corpus(ctx: VerifyContext) -> list[FiniteAlgebra]:
    corpus = list(enumerate_lattices(ctx.sized(5, 4)))
    corpus += [lat_to_latt(L) for L in enumerate_lattices(ctx.sized(4, 3))]
    corpus += [load_fixture(name, ctx.fixtures_dir) for name in ("C3", "PaperBand", "B4")]
    corpus += [projection_algebra(s, 2, i) for s in (2, 3) for i in (1, 2)]
    corpus += [A for _, A in rot_corpus(ctx.sized(4, 3), orders=(2,))]
    return corpus


def _oracle_one(A: FiniteAlgebra, budget: Budget) -> str:
    found = all_tolerances(A, budget, verify=False).bitstrings
    expected = {R.bitstring for R in brute_force_tolerances(A)}
    if found != expected:
        return f"{A.label()}: {len(found)} tolerances, brute force finds {len(expected)}"
    return ""


def check_tolerance_oracle(ctx: VerifyContext) -> CheckOutcome:
    corpus = _oracle_corpus(ctx)
    results = fan_out(partial(_oracle_one, budget=ctx.budget), corpus, ctx.max_workers)
    return _first_failure(results), f"{len(corpus)} algebras"


# -- 2 ----------------------------------------------------------------------

def check_proper_tolerance_witness(ctx: VerifyContext) -> CheckOutcome:
    A = load_fixture("PaperBand", ctx.fixtures_dir)
    T = from_pairs(3, [(0, 1), (1, 2)])
    if not is_tolerance(A, T):
        return f"{T} is not a tolerance of {A.label()}", ""
    if T.is_transitive:
        return f"{T} is transitive", ""
    verdict = is_factorable(A, T)
    if isinstance(verdict, NotFactorable):
        return f"{T} is not factorable: {verdict.witness}", ""
    Q = verdict.quotient
    identity = projection_identity(2, 1)
    if not holds_identity(Q, identity):
        return f"quotient fails {identity}", ""
    return "", f"quotient of size {Q.size} satisfies {identity}"


# -- 3 ----------------------------------------------------------------------

def _lat_one(A: FiniteAlgebra, budget: Budget) -> tuple[str, int]:
    lat = builtin("Lat")
    tolerances = all_tolerances(A, budget)
    for T in tolerances:
        verdict = is_factorable(A, T)
        if isinstance(verdict, NotFactorable):
            return f"{A.label()} by {T}: {verdict.witness}", len(tolerances)
        membership = member_of(lat, verdict.quotient)
        if not membership:
            return f"{A.label()}/{T} is {membership}", len(tolerances)
        if T.is_transitive and find_isomorphism(verdict.quotient, classical_quotient(A, T)[0]) is None:
            return f"{A.label()}/{T} differs from the classical quotient", len(tolerances)
    return "", len(tolerances)


def _fixture_quotient(ctx: VerifyContext) -> str:
    C3 = load_fixture("C3", ctx.fixtures_dir)
    expected = load_fixture("C3_quotient", ctx.fixtures_dir)
    T = from_pairs(3, [(0, 1), (1, 2)])
    Q = is_factorable(C3, T).quotient
    if (Q.size, Q.signature) != (expected.size, expected.signature):
        return f"C3/{T} has size {Q.size}, fixture C3_quotient has {expected.size}"
    for symbol in Q.signature.names:
        if Q.table(symbol) != expected.table(symbol):
            return f"C3/{T} {symbol} table differs from fixture C3_quotient"
    return ""


def check_lattice_quotients(ctx: VerifyContext) -> CheckOutcome:
    max_size = ctx.sized(6, 5)
    sample = list(enumerate_lattices(max_size))
    results = fan_out(partial(_lat_one, budget=ctx.budget), sample, ctx.max_workers)
    failure = _first_failure([r for r, _ in results]) or _fixture_quotient(ctx)
    if not failure and not ctx.quick and len(sample) != 25:
        failure = f"{len(sample)} lattices of size <= 6, expected 25"
    return failure, f"{len(sample)} lattices, {sum(n for _, n in results)} tolerances"


# -- 4 ----------------------------------------------------------------------

def _cover_one(item: tuple[Variety, FiniteAlgebra], budget: Budget) -> tuple[str, int]:
    V, A = item
    tolerances = all_tolerances(A, budget)
    for T in tolerances:
        try:
            cover = covering_construction(A, T)
        except ConstructionError as exc:
            return f"{A.label()} by {T}: {exc}", len(tolerances)
        membership = member_of(V, cover.D)
        if not membership:
            return f"D for {A.label()} by {T} is {membership}", len(tolerances)
        if not cover.phi.is_surjective or image_relation(cover.phi, cover.theta) != T:
            return f"φ(Θ) differs from {T} on {A.label()}", len(tolerances)
    return "", len(tolerances)


def check_covering_construction(ctx: VerifyContext) -> CheckOutcome:
    lat = builtin("Lat")
    items = [(lat, L) for L in enumerate_lattices(ctx.sized(5, 4))]
    items += [(builtin("Rot", n=n), A) for n, A in rot_corpus(ctx.sized(5, 4), orders=(2, 3))]
    results = fan_out(partial(_cover_one, budget=ctx.budget), items, ctx.max_workers)
    return _first_failure([r for r, _ in results]), (
        f"{len(items)} algebras, {sum(n for _, n in results)} tolerances"
    )


# -- 5, 6 -------------------------------------------------------------------

def _set2_products(ctx: VerifyContext):
    top = ctx.sized(3, 2)
    for s in range(1, top + 1):
        for t in range(1, top + 1):
            first = projection_algebra(s, 2, 1)
            second = projection_algebra(t, 2, 2)
            yield product_structure([first, second])
            yield product_structure([second, first])


def check_product_blocks(ctx: VerifyContext) -> CheckOutcome:
    checked = 0
    for P in _set2_products(ctx):
        for T in all_tolerances(P.product, ctx.budget):
            checked += 1
            if not decompose_tolerance(P, T).exact:
                return f"{T} on {P.product.label()} is not a product of its projections", ""
            report = decompose_blocks(P, T)
            if not report:
                return f"{T} on {P.product.label()}: {report.failures[0]}", ""
    arity = essential_arity_probe(2)
    if not arity.passed:
        return f"e2 on the 4-element Set2 member: essential {sorted(arity.essential)}, failing term {arity.failing_term}", ""
    return "", f"{checked} tolerances, {arity.terms_checked} binary terms absorb"


def check_product_quotients(ctx: VerifyContext) -> CheckOutcome:
    checked = 0
    for P in _set2_products(ctx):
        for T in all_tolerances(P.product, ctx.budget):
            checked += 1
            if not verify_quotient_product(P, T):
                return f"{P.product.label()}/{T} is not the product of the factor quotients", ""
    return "", f"{checked} tolerances"


# -- 7 ----------------------------------------------------------------------

def check_latt_witness(ctx: VerifyContext) -> CheckOutcome:
    fixture = load_witness_fixture(ctx.fixtures_dir / "latt_witness.json")
    if fixture.lattice.size > WITNESS_SEARCH_MAX_SIZE:
        return f"fixture lattice has {fixture.lattice.size} elements", ""
    reason = verify_witness_fixture(fixture)
    if reason:
        return f"stored witness does not hold: {reason}", ""
    if isinstance(is_factorable(fixture.lattice, fixture.tolerance), NotFactorable):
        return "stored tolerance is not factorable on the lattice itself", ""
    detail = f"fixture {fixture.lattice.label()} re-verified"
    if ctx.search_size:
        native = find_nonfactorable_witness(
            enumerate_lattices(ctx.search_size, bound=WITNESS_SEARCH_MAX_SIZE),
            ctx.budget, ctx.max_workers,
        )
        if native is not None:
            return f"native lattice {native.algebra.label()} is not factorable by {native.tolerance}", ""
        converted = find_nonfactorable_witness(
            (lat_to_latt(L) for L in enumerate_lattices(ctx.search_size, bound=WITNESS_SEARCH_MAX_SIZE)),
            ctx.budget, ctx.max_workers,
        )
        if converted is None:
            return f"no LatT witness among lattices of size <= {ctx.search_size}", ""
        if ctx.search_size >= fixture.lattice.size and (
            converted.algebra.tables != lat_to_latt(fixture.lattice).tables
            or converted.tolerance != fixture.tolerance
        ):
            return (f"search found {converted.algebra.label()} by {converted.tolerance}, "
                    f"fixture records {fixture.lattice.label()} by {fixture.tolerance}"), ""
        detail += (f"; lattices <= {ctx.search_size}: native none, "
                   f"LatT {converted.algebra.label()} by {converted.tolerance}")
    return "", detail


# -- 8 ----------------------------------------------------------------------

def check_alter_ego_tolerances(ctx: VerifyContext) -> CheckOutcome:
    sample = list(enumerate_lattices(ctx.sized(5, 4)))
    for L in sample:
        before = all_tolerances(L, ctx.budget).bitstrings
        after = all_tolerances(lat_to_latt(L), ctx.budget).bitstrings
        if before != after:
            return f"{L.label()}: {len(before)} tolerances as a lattice, {len(after)} in LatT form", ""
    return "", f"{len(sample)} lattices"


# -- 9 ----------------------------------------------------------------------

def _rot_one(item: tuple[int, FiniteAlgebra], budget: Budget) -> tuple[str, int]:
    n, A = item
    V = builtin("Rot", n=n)
    tolerances = all_tolerances(A, budget)
    for T in tolerances:
        verdict = is_factorable(A, T)
        if isinstance(verdict, NotFactorable):
            return f"{A.label()} by {T}: {verdict.witness}", len(tolerances)
        membership = member_of(V, verdict.quotient)
        if not membership:
            return f"{A.label()}/{T} is {membership}", len(tolerances)
        if not rotated_blocks_are_blocks(A, T):
            return f"g moves a block of {T} on {A.label()} off the block set", len(tolerances)
        if not is_tolerance(reduct(A, ["join", "meet"]), T):
            return f"{T} is not a tolerance of the lattice reduct of {A.label()}", len(tolerances)
    return "", len(tolerances)


def check_rotational(ctx: VerifyContext) -> CheckOutcome:
    corpus = rot_corpus(ctx.sized(6, 4), orders=(1, 2, 3))
    results = fan_out(partial(_rot_one, budget=ctx.budget), corpus, ctx.max_workers)
    for n in (1, 2, 3):
        members = [A for k, A in corpus if k == n]
        for A, verdict in zip(members, rot_containment_spot_check(n, 2 * n, members)):
            if not verdict:
                return f"{A.label()} in Rot{n} but {verdict}", ""
    return _first_failure([r for r, _ in results]), (
        f"{len(corpus)} members, {sum(n for _, n in results)} tolerances"
    )


# -- 10 ---------------------------------------------------------------------

def check_werner(ctx: VerifyContext) -> CheckOutcome:
    C3 = load_fixture("C3", ctx.fixtures_dir)
    probe = werner_probe(C3, ctx.budget)
    if probe.permutable:
        return "congruences of C3 permute", ""
    if probe.proper_tolerance is None:
        return "C3 has no proper tolerance", ""
    return "", f"non-permutable, proper tolerance {probe.proper_tolerance}"


# -- 11 ---------------------------------------------------------------------

def check_lattice_counts(ctx: VerifyContext) -> CheckOutcome:
    max_size = ctx.sized(6, 5)
    expected = {n: c for n, c in EXPECTED_LATTICE_COUNTS.items() if n <= max_size}
    counts = lattice_counts(max_size)
    if counts != expected:
        return f"extension method counts {counts}, expected {expected}", ""
    oracle = {n: len(brute_force_lattices(n)) for n in expected}
    if oracle != expected:
        return f"brute force counts {oracle}, expected {expected}", ""
    return "", ", ".join(str(c) for c in counts.values())


# -- 12 ---------------------------------------------------------------------

def check_negative_control(ctx: VerifyContext) -> CheckOutcome:
    C2 = next(L for L in enumerate_lattices(2) if L.size == 2)
    P = product_structure([C2, C2])
    for T in all_tolerances(P.product, ctx.budget):
        if not decompose_tolerance(P, T).exact:
            return "", f"{T} on C2 x C2 is not a product"
    diagonal = [P.encode((0, 0)), P.encode((1, 1))]
    split = decompose_subalgebra(P, diagonal)
    if split.is_product:
        return "C2 x C2: every tolerance is a product and the diagonal subalgebra splits", ""
    return "", f"diagonal subalgebra misses {split.missing}"


CHECKS: list[tuple[str, Callable[[VerifyContext], CheckOutcome]]] = [
    ("tolerance enumeration matches brute force", check_tolerance_oracle),
    ("proper tolerance of the projection algebra", check_proper_tolerance_witness),
    ("lattice quotients stay lattices", check_lattice_quotients),
    ("covering construction", check_covering_construction),
    ("Set2 tolerances and blocks split over factors", check_product_blocks),
    ("Set2 quotients split over factors", check_product_quotients),
    ("LatT non-factorability witness", check_latt_witness),
    ("LatT conversion keeps tolerances", check_alter_ego_tolerances),
    ("rotational lattices", check_rotational),
    ("non-permutable congruences with a proper tolerance", check_werner),
    ("lattice counts under both generators", check_lattice_counts),
    ("negative control on C2 x C2", check_negative_control),
]


def paper_verify(
    budget: Budget | None = None,
    max_workers: int = 1,
    fixtures_dir: Path | None = None,
    quick: bool = False,
    search_size: int = 7,
    only: list[int] | None = None,
) -> SuiteResult:
    ctx = VerifyContext(
        budget or Budget.from_env(), fixtures_dir or FIXTURES_DIR, max_workers, quick, search_size
    )
    suite = SuiteResult()
    for number, (title, check) in enumerate(CHECKS, start=1):
        if only and number not in only:
            continue
        print(f"Step {number}: {title}...")
        (failure, detail), elapsed = time_function(check, ctx)
        mark = "✗" if failure else "✓"
        print(f"  {mark} {failure or detail} ({elapsed:.2f}s)")
        suite.checks.append(CheckResult(number, title, failure, detail, elapsed))

    print()
    print(suite.table().to_string(index=False))
    passed = sum(c.passed for c in suite.checks)
    print(f"\n{passed}/{len(suite.checks)} checks passed")
    return suite


if __name__ == "__main__":
    from cli import main

    raise SystemExit(main(["paper-verify", *sys.argv[1:]]))
