"""Command line: exit codes over the fixture corpus, reports, error routing."""
import json
import subprocess
import sys

import pytest

from dgda.cli import main

import support

NAMES = sorted(support.EXPECTED_EXIT)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", NAMES)
def test_exit_codes(capsys, name):
    path = str(support.FIXTURES / f"{name}.json")
    code, out, err = run_cli(capsys, support.fixture_command(name), path)
    assert code == support.EXPECTED_EXIT[name], out + err
    if code >= 2:
        assert err.strip()


@pytest.mark.parametrize("name", [n for n in NAMES if support.EXPECTED_EXIT[n] < 2])
def test_golden_reports(capsys, name):
    path = str(support.FIXTURES / f"{name}.json")
    code, out, _ = run_cli(capsys, support.fixture_command(name), path, "--json", "-")
    assert out == (support.FIXTURES / "golden" / f"{name}.json").read_text()
    assert json.loads(out)["status"] == ("pass" if code == 0 else "fail")


def test_json_to_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text, _ = run_cli(capsys, "homology", str(support.FIXTURES / "sphere_homology.json"), "--json", str(out))
    assert code == 0
    assert "status: pass" in text
    assert json.loads(out.read_text())["command"] == "homology"


def test_timing_is_opt_in(capsys):
    path = str(support.FIXTURES / "sphere_homology.json")
    _, out, _ = run_cli(capsys, "homology", path, "--json", "-")
    assert "timing_s" not in json.loads(out)
    _, out, _ = run_cli(capsys, "homology", path, "--json", "-", "--timing")
    assert json.loads(out)["timing_s"] >= 0


def test_allow_flags(capsys):
    path = str(support.FIXTURES / "flagged_homology.json")
    assert run_cli(capsys, "homology", path)[0] == 1
    assert run_cli(capsys, "homology", path, "--allow-flags")[0] == 0


def test_flag_overrides(capsys):
    path = str(support.FIXTURES / "sphere_homology.json")
    _, out, _ = run_cli(capsys, "homology", path, "--trunc-degree", "4", "--word-len", "1", "--json", "-")
    t = json.loads(out)["truncation"]
    assert t["N"] == 4 and t["L"] == 1
    # expectations must stay inside the window
    code, _, err = run_cli(capsys, "homology", path, "--trunc-degree", "2")
    assert code == 2 and "outside the window" in err


def test_bad_flags(capsys):
    path = str(support.FIXTURES / "sphere_homology.json")
    assert run_cli(capsys, "homology", path, "--trunc-degree", "-1")[0] == 2
    assert run_cli(capsys, "homology", path, "--bogus")[0] == 2
    assert run_cli(capsys, "nonsense", path)[0] == 2


def test_missing_file(capsys, tmp_path):
    assert run_cli(capsys, "homology", str(tmp_path / "none.json"))[0] == 2


def test_stdin_and_module_entry_point():
    doc = (support.FIXTURES / "dsq_good.json").read_text()
    r = subprocess.run([sys.executable, "-m", "dgda", "verify", "-", "--json", "-"], input=doc,
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["status"] == "pass"


def test_bad_expression_is_parse_error(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"algebras": {"B": {"generators": [{"name": "e", "degree": 2}]}},
                             "homology": {"algebra": "B"}, "truncation": {"N": 2},
                             "description": "x"}))
    assert run_cli(capsys, "homology", str(p))[0] == 0
    p.write_text(json.dumps({"algebras": {"B": {"generators": [{"name": "e", "degree": 2}],
                                                "d": {"e": "e +* 1"}}},
                             "homology": {"algebra": "B"}, "truncation": {"N": 2}}))
    assert run_cli(capsys, "homology", str(p))[0] == 2
