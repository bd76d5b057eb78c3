import json

import pytest

from algebra_files import (
    FIXTURES_DIR,
    AlgebraFileError,
    algebra_from_dict,
    build_report,
    load_witness_fixture,
    parse_algebra,
    parse_tolerance,
    serialize_algebra,
    verify_witness_fixture,
    write_algebra,
    write_report,
)
from relations import from_pairs


def test_parse_chain():
    C3 = parse_algebra(FIXTURES_DIR / "C3.json")
    assert C3.size == 3
    assert C3.nested_table("join") == [[0, 1, 2], [1, 1, 2], [2, 2, 2]]
    assert C3.nested_table("meet") == [[0, 0, 0], [0, 1, 1], [0, 1, 2]]


def test_parse_projection_algebra():
    A = parse_algebra(FIXTURES_DIR / "PaperBand.json")
    assert A.table("e2") == (0, 0, 0, 1, 1, 1, 2, 2, 2)


@pytest.mark.parametrize("name", ["C3", "PaperBand", "B4", "C3_quotient", "L9"])
def test_canonical_files_serialize_byte_identically(name):
    path = FIXTURES_DIR / f"{name}.json"
    text = path.read_text(encoding="utf-8")
    assert serialize_algebra(parse_algebra(path)) + "\n" == text


def test_write_then_parse(tmp_path):
    C3 = parse_algebra(FIXTURES_DIR / "C3.json")
    out = tmp_path / "copy.json"
    write_algebra(C3, out)
    assert parse_algebra(out) == C3


def chain_dict(**overrides):
    data = {
        "name": "C2",
        "size": 2,
        "operations": [{"symbol": "join", "arity": 2, "table": [[0, 1], [1, 1]]}],
    }
    data.update(overrides)
    return data


@pytest.mark.parametrize("data, where", [
    (chain_dict(size=0), "size"),
    (chain_dict(operations=[{"symbol": "join", "arity": 2, "table": [[0, 1], [1, 5]]}]),
     "operations[0].table[1][1]"),
    (chain_dict(operations=[{"symbol": "join", "arity": 2, "table": [[0, 1]]}]),
     "operations[0].table"),
    (chain_dict(operations=[{"symbol": "join", "table": [[0, 1], [1, 1]]}]),
     "operations[0].arity"),
    ({"size": 2, "operations": []}, "name"),
])
def test_schema_errors_name_the_field(data, where):
    with pytest.raises(AlgebraFileError) as info:
        algebra_from_dict(data)
    assert where in str(info.value)


def test_entry_out_of_range_in_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(chain_dict(size=3, operations=[
        {"symbol": "g", "arity": 1, "table": [0, 1, 5]},
    ])))
    with pytest.raises(AlgebraFileError, match="outside 0..2"):
        parse_algebra(path)


def test_broken_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  "size": \n}')
    with pytest.raises(AlgebraFileError, match="line 4"):
        parse_algebra(path)


def test_missing_file():
    with pytest.raises(AlgebraFileError):
        parse_algebra(FIXTURES_DIR / "missing.json")


@pytest.mark.parametrize("literal, pairs", [
    ("01,12", [(0, 1), (1, 2)]),
    ("0-1, 1-2", [(0, 1), (1, 2)]),
    ("", []),
])
def test_parse_tolerance(literal, pairs):
    assert parse_tolerance(literal, 3) == from_pairs(3, pairs)


@pytest.mark.parametrize("literal", ["013", "0-x", "05"])
def test_parse_tolerance_rejects(literal):
    with pytest.raises(AlgebraFileError):
        parse_tolerance(literal, 3)


def test_stored_witness_re_verifies():
    fixture = load_witness_fixture()
    assert fixture.lattice.size == 7
    assert verify_witness_fixture(fixture) == ""


def test_tampered_witness_is_caught(tmp_path):
    data = json.loads((FIXTURES_DIR / "latt_witness.json").read_text(encoding="utf-8"))
    data["witness"]["image"] = [2]
    path = tmp_path / "witness.json"
    path.write_text(json.dumps(data))
    assert "image" in verify_witness_fixture(load_witness_fixture(path))


def test_witness_schema_version(tmp_path):
    data = json.loads((FIXTURES_DIR / "latt_witness.json").read_text(encoding="utf-8"))
    data["schema_version"] = 99
    path = tmp_path / "witness.json"
    path.write_text(json.dumps(data))
    with pytest.raises(AlgebraFileError, match="schema_version"):
        load_witness_fixture(path)


def test_report_fields_in_fixed_order(tmp_path):
    report = build_report(["tolerances", "C3.json"], [str(FIXTURES_DIR / "C3.json")],
                          "computed", {"count": 5}, [], 0.01234)
    assert list(report) == [
        "schema_version", "command", "inputs", "verdict", "details", "witnesses", "timing_seconds",
    ]
    assert len(next(iter(report["inputs"].values()))) == 64
    out = tmp_path / "report.json"
    write_report(report, out)
    assert json.loads(out.read_text(encoding="utf-8")) == report
