import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from ppt_lab import cli
from ppt_lab.config import ConfigError, RunConfig, read_config_file

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("PPT_LAB_UPDATE_GOLDEN") == "1"
CFG = str(GOLDEN / "lamplighter-t1t2.cfg")


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    status = cli.run(argv, stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


GOLDEN_CASES = {
    "nf": ["nf", "--group", "lamplighter", "--element", "lamps=2;shift=0", "--side", "right"],
    "disp": ["disp", "--group", "bs", "--n", "2", "--space", "h2", "--element", "k=1;q=0"],
    "audit": ["audit", "--config", CFG, "--L", "8", "--r", "0,1,2,3"],
    "classify": ["classify", "--group", "bs", "--n", "2", "--space", "tn,h2"],
    "tits": ["tits", "--group", "bs", "--n", "2", "--space", "tn,h2"],
    "busemann": ["busemann", "--group", "bs", "--n", "2", "--space", "tn,h2",
                 "--element", "t|a|k=-2;q=3/4"],
    "confining": ["confining", "--radius", "8", "--samples", "20"],
    "rank-obstruction": ["rank-obstruction", "--matrix", "1,-1,2;0,1/2,1"],
    "pingpong": ["pingpong", "--group", "free", "--space", "cayley", "--g", "x", "--h", "y",
                 "--N", "2", "--W", "5"],
    "growth": ["growth", "--group", "zn", "--dim", "2", "--L", "6"],
    "stabilizer": ["stabilizer", "--group", "bs", "--n", "2", "--space", "tn", "--L", "4"],
    "oracle-check": ["oracle-check", "--group", "lamplighter", "--space", "t2", "--L", "4"],
}


def test_every_subcommand_has_a_golden_case():
    assert set(GOLDEN_CASES) == set(cli.COMMANDS)


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_output(name):
    status, out, err = run(GOLDEN_CASES[name])
    assert status == 0, err
    path = GOLDEN / f"{name}.json"
    if UPDATE:
        path.write_text(out, encoding="utf-8")
    assert out == path.read_text(encoding="utf-8")


@pytest.mark.parametrize("name", sorted(cli.COMMANDS))
def test_help_contract(name):
    proc = subprocess.run([sys.executable, "-m", "ppt_lab.cli", name, "--help"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith(f"usage: ppt-lab {name}")
    for flag in ("--config", "--format", "--output", "--threads"):
        assert flag in proc.stdout
    for key in cli.COMMANDS[name][2]:
        assert cli._flag(key) in proc.stdout


def test_top_level_help_lists_every_command():
    proc = subprocess.run([sys.executable, "-m", "ppt_lab.cli", "--help"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    for name in cli.COMMANDS:
        assert name in proc.stdout


# --------------------------------------------------------------------------
# contract examples


def test_nf_example():
    status, out, _ = run(GOLDEN_CASES["nf"])
    result = json.loads(out)["result"]
    assert (result["k_R"], result["m_R"]) == (2, 2)


def test_disp_example_is_log_two():
    status, out, _ = run(GOLDEN_CASES["disp"])
    doc = json.loads(out)
    assert doc["schema"] == "ppt-lab/1"
    assert abs(doc["result"]["rows"][0]["displacement"] - math.log(2)) < 1e-9


def test_audit_example():
    status, out, _ = run(GOLDEN_CASES["audit"])
    rows = json.loads(out)["result"]["rows"]
    assert rows[0]["r"] == 0 and rows[0]["N"] == 2
    assert all(row["stable"] for row in rows)


# --------------------------------------------------------------------------
# determinism and formats


def test_byte_identical_output_and_threads_do_not_matter():
    a = run(GOLDEN_CASES["classify"])[1]
    b = run(GOLDEN_CASES["classify"] + ["--threads", "8"])[1]
    assert a == b


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngroup = bs\nn = 3\nelement = t\n", encoding="utf-8")
    _, out, _ = run(["nf", "--config", str(cfg), "--n", "2", "--element", "a*t"])
    doc = json.loads(out)
    assert doc["config"]["n"] == 2
    assert doc["config"]["element"] == "a*t"


def test_config_file_alone(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("group = zn\ndim = 2\nL = 4\n", encoding="utf-8")
    status, out, _ = run(["growth", "--config", str(cfg)])
    assert status == 0
    assert json.loads(out)["result"]["sizes"] == [1, 5, 13, 25, 41]


def test_csv_and_text_formats():
    status, out, _ = run(["growth", "--group", "free", "--L", "4", "--format", "csv"])
    assert out.splitlines()[:3] == ["L,size", "0,1", "1,5"]
    status, out, _ = run(["audit", "--config", CFG, "--L", "6", "--r", "0,1",
                          "--format", "text"])
    assert out.startswith("# ppt-lab/1 audit")
    assert "proper-evidence" in out


def test_output_file(tmp_path):
    target = tmp_path / "report.json"
    status, out, _ = run(GOLDEN_CASES["rank-obstruction"] + ["--output", str(target)])
    assert status == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "rank-obstruction"


def test_oracle_edge_export(tmp_path):
    target = tmp_path / "edges.tsv"
    status, out, _ = run(["oracle-check", "--group", "bs", "--n", "2", "--space", "tn",
                          "--L", "3", "--edges", str(target)])
    assert status == 0
    lines = target.read_text().splitlines()
    assert len(lines) == json.loads(out)["result"]["edges"]
    assert all(len(line.split("\t")) == 4 for line in lines)


# --------------------------------------------------------------------------
# exit codes


@pytest.mark.parametrize("argv", [
    ["nf", "--group", "bs", "--element", "a"],                 # missing n
    ["nf", "--group", "lamplighter", "--element", "lamps=x"],  # bad element
    ["disp", "--group", "bs", "--n", "2", "--space", "t1", "--element", "a"],
    ["audit", "--group", "zn", "--dim", "2", "--space", "line(1)", "--L", "3", "--r", "0"],
    ["growth", "--group", "free", "--L", "-1"],
    ["nf", "--group", "bs", "--n", "2"],                       # missing element
    ["bogus-command"],
    ["nf", "--nonsense", "1"],
])
def test_validation_errors_exit_2(argv):
    status, out, err = run(argv)
    assert status == 2
    assert out == ""


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("group = bs\ncolour = blue\n", encoding="utf-8")
    status, _, err = run(["nf", "--config", str(cfg), "--element", "a"])
    assert status == 2
    assert "colour" in err


def test_resource_budget_exits_3():
    status, out, err = run(["growth", "--group", "free", "--L", "8", "--budget", "50"])
    assert status == 3
    assert "budget" in err


def test_undetermined_exits_4_with_report():
    status, out, err = run(["tits", "--group", "bs", "--n", "2", "--space", "tn"])
    assert status == 4
    assert json.loads(out)["result"]["verdict"] == "undecided"


def test_console_script_is_declared():
    text = (Path(__file__).parents[1] / "pyproject.toml").read_text()
    assert 'ppt-lab = "ppt_lab.cli:main"' in text


# --------------------------------------------------------------------------
# config parsing


def test_read_config_file_rejects_duplicates(tmp_path):
    cfg = tmp_path / "dup.cfg"
    cfg.write_text("L = 3\nL = 4\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(str(cfg))


def test_run_config_conversion():
    cfg = RunConfig.from_sources({"space": "t1,t2", "r": "0,2", "reverse": "yes"},
                                 {"L": "6"})
    assert cfg.actions == "t1,t2"
    assert cfg.r == [0, 2]
    assert cfg.reverse is True
    assert cfg.L == 6
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"L": "six"})
