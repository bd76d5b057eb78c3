import json
import shutil

import pytest

from algebra_files import FIXTURES_DIR
from cli import main
from paper_verify import CHECKS, paper_verify
from relations import Budget, BudgetExceeded


@pytest.fixture
def fixtures_copy(tmp_path):
    target = tmp_path / "fixtures"
    shutil.copytree(FIXTURES_DIR, target)
    return target


def test_quick_suite_passes(capsys):
    suite = paper_verify(quick=True, search_size=0)
    assert len(suite.checks) == len(CHECKS) == 12
    failed = [(c.number, c.failure) for c in suite.checks if not c.passed]
    assert failed == []
    out = capsys.readouterr().out
    assert "Step 1:" in out and "12/12 checks passed" in out


def test_live_search_finds_the_stored_witness():
    suite = paper_verify(only=[7], search_size=7)
    assert suite.passed
    assert "LatT L7.38" in suite.checks[0].detail


def test_live_search_without_a_witness_fails():
    suite = paper_verify(only=[7], search_size=5)
    assert not suite.passed
    assert "no LatT witness" in suite.checks[0].failure


@pytest.mark.parametrize("number", [2, 10, 11, 12])
def test_single_checks(number):
    suite = paper_verify(only=[number])
    assert [c.number for c in suite.checks] == [number]
    assert suite.passed


def test_corrupted_quotient_fixture_fails(fixtures_copy):
    path = fixtures_copy / "C3_quotient.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    data["operations"][0]["table"] = [[0, 0], [0, 1]]
    path.write_text(json.dumps(data), encoding="utf-8")
    suite = paper_verify(fixtures_dir=fixtures_copy, quick=True, only=[3])
    assert not suite.passed
    assert "C3_quotient" in suite.checks[0].failure
    assert main(["paper-verify", "--quick", "--fixtures", str(fixtures_copy), "--search-size", "0"]) == 1


def test_corrupted_witness_fixture_fails(fixtures_copy):
    path = fixtures_copy / "latt_witness.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    data["witness"]["containers"] = [[1, 3, 6]]
    path.write_text(json.dumps(data), encoding="utf-8")
    suite = paper_verify(fixtures_dir=fixtures_copy, search_size=0, only=[7])
    assert "stored witness" in suite.checks[0].failure


def test_zero_budget():
    with pytest.raises(BudgetExceeded):
        paper_verify(budget=Budget(max_tolerances=0), only=[1])
    assert main(["paper-verify", "--quick", "--budget", "0"]) == 3


def test_records_leave_out_timing():
    suite = paper_verify(only=[10])
    assert list(suite.as_records()[0]) == ["check", "title", "passed", "detail"]
    assert "seconds" in suite.table().columns
