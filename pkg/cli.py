"""Command-line front end for the tolerance workbench.

Exit codes: 0 computed, 1 property violated or witness found, 2 usage or
schema error, 3 budget exceeded.

Usage:
    python cli.py tolerances fixtures/C3.json
    python cli.py factorable fixtures/PaperBand.json --tolerance 01,12
    python cli.py probe --variety Lat --sample lattices --max-size 6
    python cli.py paper-verify
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import pandas as pd

from algebra_core import AlgebraError, FiniteAlgebra
from algebra_files import (
    AlgebraFileError,
    build_report,
    parse_algebra,
    parse_tolerance,
    serialize_algebra,
    write_algebra,
    write_report,
)
from blocks import blocks
from factor import (
    WITNESS_SEARCH_MAX_SIZE,
    NotFactorable,
    NotFactorableError,
    covering_construction,
    find_nonfactorable_witness,
    is_factorable,
)
from joinprod import (
    DecompositionError,
    decompose_algebra,
    decompose_blocks,
    decompose_tolerance,
    product_structure,
)
from lattice_gen import LatticeBoundError, brute_force_lattices, enumerate_lattices, lattice_counts
from relations import Budget, BudgetExceeded, NotATolerance, all_tolerances, classes
from varieties import (
    VarietyError,
    lat_to_latt,
    lattice_sample,
    member_of,
    parse_variety,
    probe_properties,
    rot_corpus,
    set_sample,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class Outcome:
    code: int
    verdict: str
    lines: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)
    witnesses: list[Any] = field(default_factory=list)
    table: pd.DataFrame | None = None


def _budget(args) -> Budget:
    budget = Budget.from_env()
    if args.budget is not None:
        budget = Budget(budget.max_elements, args.budget, budget.max_steps)
    return budget


def _algebra_and_tolerance(args) -> tuple[FiniteAlgebra, Any]:
    A = parse_algebra(args.algebra)
    return A, parse_tolerance(args.tolerance, A.size)


def _relation_rows(A: FiniteAlgebra, tolerances) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "index": i,
            "tolerance": str(T),
            "pairs": T.literal(),
            "congruence": T.is_transitive,
            "blocks": " ".join(str(B) for B in blocks(A, T)),
        }
        for i, T in enumerate(tolerances)
    ])


def cmd_tolerances(args) -> Outcome:
    A = parse_algebra(args.algebra)
    tolerances = all_tolerances(A, _budget(args))
    table = _relation_rows(A, tolerances)
    lines = [f"{A.label()}: {len(tolerances)} tolerances, {len(tolerances.proper())} proper"]
    lines += [f"  {row.index}: {row.tolerance}" for row in table.itertuples()]
    return Outcome(EXIT_OK, "computed", lines,
                   {"count": len(tolerances), "tolerances": [T.literal() for T in tolerances]},
                   table=table)


def cmd_blocks(args) -> Outcome:
    A, T = _algebra_and_tolerance(args)
    block_set = blocks(A, T)
    lines = [f"{A.label()} modulo {T}: {len(block_set)} blocks"]
    lines += [f"  B{i}: {B}" for i, B in enumerate(block_set)]
    return Outcome(EXIT_OK, "computed", lines,
                   {"blocks": [list(B.elements) for B in block_set]})


def _witness_dict(w) -> dict[str, Any]:
    return {
        "symbol": w.symbol,
        "tuple": [list(B.elements) for B in w.tuple],
        "image": list(w.image),
        "containers": [list(B.elements) for B in w.containers],
    }


def cmd_factorable(args) -> Outcome:
    A, T = _algebra_and_tolerance(args)
    verdict = is_factorable(A, T)
    if isinstance(verdict, NotFactorable):
        return Outcome(EXIT_VIOLATED, "not factorable",
                       [f"✗ {A.label()} is not factorable by {T}", f"  {verdict.witness}"],
                       witnesses=[_witness_dict(verdict.witness)])
    Q = verdict.quotient
    lines = [f"✓ {A.label()} is factorable by {T}; quotient has {Q.size} elements"]
    lines += serialize_algebra(Q).splitlines()
    return Outcome(EXIT_OK, "factorable", lines,
                   {"quotient_size": Q.size,
                    "block_index": [list(c) for c in verdict.block_index]})


def cmd_quotient(args) -> Outcome:
    outcome = cmd_factorable(args)
    if outcome.code == EXIT_OK and args.write:
        A, T = _algebra_and_tolerance(args)
        write_algebra(is_factorable(A, T).quotient, args.write)
        outcome.lines.append(f"Wrote quotient to {args.write}")
    return outcome


def cmd_cover(args) -> Outcome:
    A, T = _algebra_and_tolerance(args)
    try:
        cover = covering_construction(A, T)
    except NotFactorableError as exc:
        return Outcome(EXIT_VIOLATED, "not factorable", [f"✗ {exc}"],
                       witnesses=[_witness_dict(exc.witness)])
    lines = [f"✓ D has {cover.D.size} elements, Θ has {len(classes(cover.theta))} classes, φ(Θ) = {T}"]
    lines += [f"  d{i} = ({x}, B{Y})" for i, (x, Y) in enumerate(cover.pairs)]
    return Outcome(EXIT_OK, "computed", lines,
                   {"D_size": cover.D.size, "pairs": [list(p) for p in cover.pairs]})


def cmd_decompose(args) -> Outcome:
    if bool(args.variety) == bool(args.factors) or (args.variety and not args.algebra):
        return Outcome(EXIT_USAGE, "usage error",
                       ["✗ decompose takes an algebra with --variety, or --factors"])
    if args.variety:
        A = parse_algebra(args.algebra)
        V = parse_variety(args.variety)
        if V.join is None:
            raise VarietyError(f"{V.name} is not given as an independent join")
        result = decompose_algebra(A, V.join)
        if not result:
            return Outcome(EXIT_VIOLATED, "not a join member",
                           [f"✗ {A.label()} does not split over {V.name}: {result.failed_check}"])
        lines = [f"✓ {A.label()} ≅ " + " x ".join(f"A/η{i + 1} ({Q.size})" for i, Q in enumerate(result.quotients))]
        lines += [f"  η{i + 1} = {eta}" for i, eta in enumerate(result.etas)]
        return Outcome(EXIT_OK, "computed", lines,
                       {"quotient_sizes": [Q.size for Q in result.quotients],
                        "iso": list(result.iso.values)})

    factors = [parse_algebra(path) for path in args.factors]
    P = product_structure(factors)
    tolerances = all_tolerances(P.product, _budget(args))
    rows = []
    for T in tolerances:
        d = decompose_tolerance(P, T)
        report = decompose_blocks(P, T) if d.exact else None
        rows.append({
            "tolerance": str(T),
            "exact": d.exact,
            "blocks_ok": bool(report) if report is not None else None,
        })
    table = pd.DataFrame(rows)
    failures = int((~table["exact"]).sum())
    lines = [f"{P.product.label()}: {len(tolerances)} tolerances, {failures} not products"]
    code = EXIT_OK if failures == 0 else EXIT_VIOLATED
    return Outcome(code, "computed" if code == EXIT_OK else "not exact", lines,
                   {"tolerances": len(tolerances), "non_product": failures}, table=table)


def cmd_member(args) -> Outcome:
    A = parse_algebra(args.algebra)
    V = parse_variety(args.variety)
    verdict = member_of(V, A)
    mark = "✓" if verdict else "✗"
    return Outcome(EXIT_OK if verdict else EXIT_VIOLATED, str(verdict),
                   [f"{mark} {A.label()}: {verdict}"])


def _sample(args, V) -> tuple[list[FiniteAlgebra], str]:
    if args.files:
        return [parse_algebra(p) for p in args.files], f"{len(args.files)} files"
    if args.sample == "lattices":
        sample = lattice_sample(args.max_size)
        if V.name == "LatT":
            sample = [lat_to_latt(L) for L in sample]
        return sample, f"lattices of size <= {args.max_size}"
    if args.sample == "set":
        n = dict(V.params).get("n", 2)
        return set_sample(n, args.max_factor), f"Set{n} products, factors of size <= {args.max_factor}"
    if args.sample == "rot":
        n = dict(V.params).get("n", 1)
        members = [A for _, A in rot_corpus(args.max_size, orders=(n,))]
        return members, f"Rot{n} members on lattices of size <= {args.max_size}"
    raise VarietyError(f"No sample given for {V.name}")


def cmd_probe(args) -> Outcome:
    V = parse_variety(args.variety)
    sample, description = _sample(args, V)
    report = probe_properties(V, sample, description, _budget(args), args.workers)
    failed = [p for p in ("P1", "P2", "P3") if not report.verdict(p).holds]
    table = pd.DataFrame([
        {"algebra": p.algebra, "tolerances": p.tolerances,
         "P1": p.p1.holds, "P2": p.p2.holds, "P3": p.p3.holds, "P4": p.p4.holds}
        for p in report.probes
    ])
    details = {
        key: {"holds": report.verdict(key).holds, "witness": report.verdict(key).witness}
        for key in ("P1", "P2", "P3", "P4")
    }
    details["scope"] = f"{report.scope}: {description}"
    return Outcome(EXIT_VIOLATED if failed else EXIT_OK,
                   "violated on sample" if failed else "holds on sample",
                   report.lines(), details, table=table)


def cmd_witness_search(args) -> Outcome:
    stream = enumerate_lattices(args.max_size, bound=WITNESS_SEARCH_MAX_SIZE)
    if not args.native:
        stream = (lat_to_latt(L) for L in stream)
    hit = find_nonfactorable_witness(stream, _budget(args), args.workers, verbose=True)
    signature = "lattice" if args.native else "LatT"
    if hit is None:
        return Outcome(EXIT_OK, "no witness",
                       [f"No witness among {signature} algebras of size <= {args.max_size}"])
    lines = [
        f"✗ Witness on {hit.algebra.label()} ({hit.algebra.size} elements)",
        f"  tolerance {hit.tolerance} ({hit.tolerance.literal()})",
        f"  {hit.witness}",
    ]
    if args.write:
        write_algebra(hit.algebra, args.write)
        lines.append(f"Wrote witness algebra to {args.write}")
    return Outcome(EXIT_VIOLATED, "witness found", lines,
                   {"algebra": hit.algebra.name, "size": hit.algebra.size,
                    "tolerance": hit.tolerance.literal()},
                   [_witness_dict(hit.witness)])


def cmd_lattices(args) -> Outcome:
    counts = lattice_counts(args.max_size)
    rows = [{"size": n, "extension": c} for n, c in counts.items()]
    if args.oracle:
        for row in rows:
            row["brute_force"] = len(brute_force_lattices(row["size"]))
    table = pd.DataFrame(rows)
    mismatch = args.oracle and not (table["extension"] == table["brute_force"]).all()
    return Outcome(EXIT_VIOLATED if mismatch else EXIT_OK, "computed",
                   table.to_string(index=False).splitlines(), {"counts": counts}, table=table)


def cmd_paper_verify(args) -> Outcome:
    from paper_verify import paper_verify

    suite = paper_verify(
        budget=_budget(args),
        max_workers=args.workers,
        fixtures_dir=Path(args.fixtures) if args.fixtures else None,
        quick=args.quick,
        search_size=args.search_size,
    )
    code = EXIT_OK if suite.passed else EXIT_VIOLATED
    return Outcome(code, "all passed" if suite.passed else "failed",
                   [], {"checks": suite.as_records()}, table=suite.table())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write a machine-readable JSON report here")
    common.add_argument("--csv", help="write the result table as CSV here")
    common.add_argument("--budget", type=int, default=None,
                        help="maximum tolerances per algebra (0 fails immediately)")
    common.add_argument("--workers", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable[[Any], Outcome], help_text: str, algebra=True, tolerance=False):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if algebra:
            sp.add_argument("algebra", help="algebra JSON file")
        if tolerance:
            sp.add_argument("--tolerance", "-t", required=True, help='pairs like "01,12"')
        sp.set_defaults(func=func)
        return sp

    add("tolerances", cmd_tolerances, "list all tolerances")
    add("blocks", cmd_blocks, "blocks of a tolerance", tolerance=True)
    add("factorable", cmd_factorable, "decide factorability", tolerance=True)
    add("quotient", cmd_quotient, "quotient algebra A/T", tolerance=True).add_argument(
        "--write", help="write the quotient algebra file here")
    add("cover", cmd_cover, "covering construction D, Θ, φ", tolerance=True)
    dp = add("decompose", cmd_decompose, "product or independent-join decomposition", algebra=False)
    dp.add_argument("algebra", nargs="?", help="algebra to split along a join variety")
    dp.add_argument("--variety", help="join variety, e.g. Set2 or V:2,2")
    dp.add_argument("--factors", nargs="+", default=[], help="factor files whose product is checked")
    add("member", cmd_member, "variety membership").add_argument("--variety", required=True)

    pp = add("probe", cmd_probe, "probe P1-P4 over a sample", algebra=False)
    pp.add_argument("--variety", required=True)
    pp.add_argument("--sample", choices=["lattices", "set", "rot"], default="lattices")
    pp.add_argument("--max-size", type=int, default=5)
    pp.add_argument("--max-factor", type=int, default=3)
    pp.add_argument("files", nargs="*", help="explicit sample algebra files")

    ws = add("witness-search", cmd_witness_search, "search lattices for a LatT witness", algebra=False)
    ws.add_argument("--max-size", type=int, default=8)
    ws.add_argument("--native", action="store_true", help="search native lattice signature instead")
    ws.add_argument("--write", help="write the witness algebra here")

    lp = add("lattices", cmd_lattices, "count lattices by size", algebra=False)
    lp.add_argument("--max-size", type=int, default=6)
    lp.add_argument("--oracle", action="store_true", help="cross-check with brute force")

    vp = add("paper-verify", cmd_paper_verify, "run the acceptance suite", algebra=False)
    vp.add_argument("--fixtures", help="fixture directory")
    vp.add_argument("--quick", action="store_true", help="smaller corpora")
    vp.add_argument("--search-size", type=int, default=7,
                    help="lattice size bound for the live witness search")
    return p


def run_command(argv: list[str]) -> tuple[int, dict[str, Any] | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else EXIT_USAGE), None

    start = time.time()
    try:
        outcome = args.func(args)
    except BudgetExceeded as exc:
        outcome = Outcome(EXIT_BUDGET, "budget exceeded", [f"✗ Budget exceeded: {exc}"])
    except (AlgebraFileError, AlgebraError, VarietyError, NotATolerance, DecompositionError,
            LatticeBoundError) as exc:
        outcome = Outcome(EXIT_USAGE, "usage error", [f"✗ {exc}"])
    elapsed = time.time() - start

    for line in outcome.lines:
        print(line)
    inputs = [a for a in [getattr(args, "algebra", None), *getattr(args, "factors", []),
                          *getattr(args, "files", [])] if a and Path(a).exists()]
    report = build_report(argv, inputs, outcome.verdict, outcome.details, outcome.witnesses, elapsed)
    if args.out:
        write_report(report, args.out)
    if args.csv and outcome.table is not None:
        outcome.table.to_csv(args.csv, index=False)
    return outcome.code, report


def main(argv: list[str]) -> int:
    code, _ = run_command(argv)
    return code


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
