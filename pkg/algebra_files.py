"""Algebra files, tolerance literals, fixtures and machine-readable reports.

An algebra file is JSON with the fields name, size and operations; each
operation carries its symbol, arity and a table nested `arity` levels deep,
row-major with the first argument outermost. serialize_algebra writes the
canonical layout: two-space indent with innermost rows on one line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from algebra_core import FiniteAlgebra, Signature
from blocks import Block, blocks, op_image_over_blocks
from factor import NotFactorable, is_factorable
from relations import BinaryRelation, from_pairs, is_tolerance
from varieties import lat_to_latt

FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"
SCHEMA_VERSION = 1


class AlgebraFileError(ValueError):
    pass


# -- parsing ----------------------------------------------------------------

def _table_entries(value: Any, arity: int, size: int, where: str) -> list[int]:
    if arity == 0:
        if not isinstance(value, int) or isinstance(value, bool):
            raise AlgebraFileError(f"{where}: expected an element, got {value!r}")
        if not 0 <= value < size:
            raise AlgebraFileError(f"{where}: entry {value} outside 0..{size - 1}")
        return [value]
    if not isinstance(value, list) or len(value) != size:
        raise AlgebraFileError(f"{where}: expected a list of {size} rows")
    out: list[int] = []
    for i, row in enumerate(value):
        out.extend(_table_entries(row, arity - 1, size, f"{where}[{i}]"))
    return out


def algebra_from_dict(data: Any, where: str = "") -> FiniteAlgebra:
    prefix = f"{where}." if where else ""
    if not isinstance(data, dict):
        raise AlgebraFileError(f"{where or 'top level'}: expected an object")
    for key in ("name", "size", "operations"):
        if key not in data:
            raise AlgebraFileError(f"{prefix}{key}: missing")
    name, size, operations = data["name"], data["size"], data["operations"]
    if not isinstance(name, str):
        raise AlgebraFileError(f"{prefix}name: expected a string")
    if not isinstance(size, int) or isinstance(size, bool) or size < 1:
        raise AlgebraFileError(f"{prefix}size: expected a positive integer, got {size!r}")
    if not isinstance(operations, list):
        raise AlgebraFileError(f"{prefix}operations: expected a list")

    symbols = []
    tables = []
    for k, op in enumerate(operations):
        here = f"{prefix}operations[{k}]"
        if not isinstance(op, dict):
            raise AlgebraFileError(f"{here}: expected an object")
        symbol, arity = op.get("symbol"), op.get("arity")
        if not isinstance(symbol, str) or not symbol:
            raise AlgebraFileError(f"{here}.symbol: expected a name")
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
            raise AlgebraFileError(f"{here}.arity: expected a nonnegative integer")
        if "table" not in op:
            raise AlgebraFileError(f"{here}.table: missing")
        symbols.append((symbol, arity))
        tables.append(tuple(_table_entries(op["table"], arity, size, f"{here}.table")))
    if len({s for s, _ in symbols}) != len(symbols):
        raise AlgebraFileError(f"{prefix}operations: duplicate symbols")
    return FiniteAlgebra(size, Signature(tuple(symbols)), tuple(tables), name)


def _load_json(path: Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AlgebraFileError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_algebra(path: str | Path) -> FiniteAlgebra:
    data = _load_json(Path(path))
    try:
        return algebra_from_dict(data)
    except AlgebraFileError as exc:
        raise AlgebraFileError(f"{path}: {exc}") from exc


# -- serialization ----------------------------------------------------------

def _format_table(value: Any, arity: int, indent: int) -> str:
    if arity == 0:
        return str(value)
    if arity == 1:
        return "[" + ", ".join(str(v) for v in value) + "]"
    pad = " " * (indent + 2)
    rows = ",\n".join(pad + _format_table(row, arity - 1, indent + 2) for row in value)
    return "[\n" + rows + "\n" + " " * indent + "]"


def serialize_algebra(A: FiniteAlgebra, indent: int = 0) -> str:
    pad = " " * indent
    ops = []
    for symbol, arity in A.signature.symbols:
        table = _format_table(A.nested_table(symbol), arity, indent + 6)
        ops.append(
            f"{pad}    {{\n"
            f"{pad}      \"symbol\": {json.dumps(symbol)},\n"
            f"{pad}      \"arity\": {arity},\n"
            f"{pad}      \"table\": {table}\n"
            f"{pad}    }}"
        )
    body = ",\n".join(ops)
    operations = f"[\n{body}\n{pad}  ]" if ops else "[]"
    return (
        f"{{\n"
        f"{pad}  \"name\": {json.dumps(A.name, ensure_ascii=False)},\n"
        f"{pad}  \"size\": {A.size},\n"
        f"{pad}  \"operations\": {operations}\n"
        f"{pad}}}"
    )


def write_algebra(A: FiniteAlgebra, path: str | Path) -> None:
    Path(path).write_text(serialize_algebra(A) + "\n", encoding="utf-8")


# -- tolerance literals -----------------------------------------------------

def parse_tolerance(literal: str, size: int) -> BinaryRelation:
    """"01,12" style pairs, or "0-1,1-2" once elements need two digits; the
    diagonal is implied and pairs are unordered."""
    pairs = []
    for token in literal.replace(" ", "").split(","):
        if not token:
            continue
        if "-" in token:
            a, _, b = token.partition("-")
        elif len(token) == 2:
            a, b = token
        else:
            raise AlgebraFileError(f"Cannot read tolerance pair {token!r}")
        try:
            pair = (int(a), int(b))
        except ValueError:
            raise AlgebraFileError(f"Cannot read tolerance pair {token!r}") from None
        if not all(0 <= x < size for x in pair):
            raise AlgebraFileError(f"Pair {token!r} outside 0..{size - 1}")
        pairs.append(pair)
    return from_pairs(size, pairs)


# -- fixtures ---------------------------------------------------------------

def load_fixture(name: str, fixtures_dir: Path | None = None) -> FiniteAlgebra:
    return parse_algebra((fixtures_dir or FIXTURES_DIR) / f"{name}.json")


@dataclass(frozen=True)
class WitnessFixture:
    lattice: FiniteAlgebra
    tolerance: BinaryRelation
    symbol: str
    tuple: tuple[Block, ...]
    image: tuple[int, ...]
    containers: tuple[Block, ...]


def load_witness_fixture(path: str | Path | None = None) -> WitnessFixture:
    path = Path(path) if path else FIXTURES_DIR / "latt_witness.json"
    data = _load_json(path)
    try:
        if data.get("schema_version") != SCHEMA_VERSION:
            raise AlgebraFileError(f"schema_version: expected {SCHEMA_VERSION}")
        lattice = algebra_from_dict(data.get("algebra"), "algebra")
        witness = data["witness"]
        return WitnessFixture(
            lattice,
            parse_tolerance(data["tolerance"], lattice.size),
            witness["symbol"],
            tuple(Block(tuple(b)) for b in witness["tuple"]),
            tuple(witness["image"]),
            tuple(Block(tuple(b)) for b in witness["containers"]),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise AlgebraFileError(f"{path}: malformed witness fixture ({exc})") from exc


def verify_witness_fixture(fixture: WitnessFixture) -> str:
    """Re-check a stored LatT witness; '' when it holds, else what broke."""
    A = lat_to_latt(fixture.lattice)
    T = fixture.tolerance
    if not is_tolerance(A, T):
        return f"{T} is not a tolerance"
    block_set = blocks(A, T)
    for B in fixture.tuple + fixture.containers:
        if B not in block_set.blocks:
            return f"{B} is not a block of {T}"
    found = op_image_over_blocks(A, fixture.symbol, fixture.tuple, block_set)
    if found.image != fixture.image:
        return f"image is {found.image}, fixture records {fixture.image}"
    if found.containers != fixture.containers or len(found.containers) < 2:
        return f"image lies in {[str(B) for B in found.containers]}"
    if not isinstance(is_factorable(A, T), NotFactorable):
        return "tolerance turned out factorable"
    return ""


# -- reports ----------------------------------------------------------------

def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_report(
    command: list[str],
    inputs: list[str],
    verdict: str,
    details: dict[str, Any],
    witnesses: list[Any],
    elapsed: float,
) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": {p: digest(p) for p in inputs},
        "verdict": verdict,
        "details": details,
        "witnesses": witnesses,
        "timing_seconds": round(elapsed, 3),
    }


def write_report(report: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
