import json

import pandas as pd
import pytest

from algebra_files import FIXTURES_DIR, load_witness_fixture, parse_algebra, write_algebra
from cli import main, run_command
from varieties import lat_to_latt, power_of_set_n, projection_algebra

C3 = str(FIXTURES_DIR / "C3.json")
BAND = str(FIXTURES_DIR / "PaperBand.json")


def test_tolerances_of_chain(capsys):
    code, report = run_command(["tolerances", C3])
    assert code == 0
    assert report["details"]["count"] == 5
    assert report["details"]["tolerances"] == ["", "12", "01", "01,12", "01,02,12"]
    assert "5 tolerances" in capsys.readouterr().out


def test_factorable_projection_algebra():
    code, report = run_command(["factorable", BAND, "--tolerance", "01,12"])
    assert code == 0
    assert report["verdict"] == "factorable"
    assert report["details"]["quotient_size"] == 2


def test_factorable_reports_witness(tmp_path):
    path = tmp_path / "latt.json"
    fixture = load_witness_fixture()
    write_algebra(lat_to_latt(fixture.lattice), path)
    code, report = run_command(["factorable", str(path), "--tolerance", fixture.tolerance.literal()])
    assert code == 1
    witness = report["witnesses"][0]
    assert witness["symbol"] in ("tjoin", "tmeet")
    assert len(witness["containers"]) >= 2


def test_blocks_and_cover():
    code, report = run_command(["blocks", C3, "-t", "01,12"])
    assert code == 0
    assert report["details"]["blocks"] == [[0, 1], [1, 2]]
    code, report = run_command(["cover", C3, "-t", "01,12"])
    assert code == 0
    assert report["details"]["pairs"] == [[0, 0], [1, 0], [1, 1], [2, 1]]


def test_quotient_written_to_file(tmp_path):
    out = tmp_path / "q.json"
    code, _ = run_command(["quotient", C3, "-t", "01,12", "--write", str(out)])
    assert code == 0
    assert parse_algebra(out) == parse_algebra(FIXTURES_DIR / "C3_quotient.json")


def test_decompose_join_member(tmp_path):
    path = tmp_path / "set2.json"
    write_algebra(power_of_set_n(2), path)
    code, report = run_command(["decompose", str(path), "--variety", "Set2"])
    assert code == 0
    assert report["details"]["quotient_sizes"] == [2, 2]


def test_decompose_product_of_factor_files(tmp_path):
    second = tmp_path / "second.json"
    write_algebra(projection_algebra(3, 2, 2), second)
    code, report = run_command(["decompose", "--factors", BAND, str(second)])
    assert code == 0
    assert report["details"]["non_product"] == 0
    assert report["details"]["tolerances"] == 64


def test_member():
    assert run_command(["member", C3, "--variety", "Dist"])[0] == 0
    assert run_command(["member", BAND, "--variety", "Set2^2"])[0] == 1


def test_probe_writes_csv(tmp_path):
    csv = tmp_path / "probe.csv"
    code, report = run_command(["probe", "--variety", "Lat", "--max-size", "4", "--csv", str(csv)])
    assert code == 0
    assert report["details"]["P1"]["holds"]
    table = pd.read_csv(csv)
    assert len(table) == 5
    assert table["P1"].all()


def test_witness_search_native_lattices():
    code, report = run_command(["witness-search", "--native", "--max-size", "4"])
    assert code == 0
    assert report["verdict"] == "no witness"


def test_lattice_counts_with_oracle():
    code, report = run_command(["lattices", "--max-size", "5", "--oracle"])
    assert code == 0
    assert report["details"]["counts"] == {1: 1, 2: 1, 3: 1, 4: 2, 5: 5}


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["tolerances", str(FIXTURES_DIR / "missing.json")],
    ["factorable", C3, "--tolerance", "02"],
    ["member", BAND, "--variety", "Lat"],
    ["member", C3, "--variety", "Group"],
    ["decompose", C3],
    ["lattices", "--max-size", "9"],
    ["lattices", "--max-size", "12"],
])
def test_usage_errors_exit_two(argv):
    assert main(argv) == 2


def test_zero_budget_exits_three():
    assert main(["tolerances", C3, "--budget", "0"]) == 3


def test_out_report_is_stable(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    run_command(["tolerances", C3, "--out", str(first)])
    run_command(["tolerances", C3, "--out", str(second), "--workers", "2"])
    a = json.loads(first.read_text(encoding="utf-8"))
    b = json.loads(second.read_text(encoding="utf-8"))
    for report in (a, b):
        report.pop("timing_seconds")
        report.pop("command")
    assert a == b
    assert a["schema_version"] == 1
