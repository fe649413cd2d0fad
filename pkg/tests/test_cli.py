import json
import subprocess
import sys

import pytest

from fluidcomp.cli import main
from fluidcomp.harness import read_rows
from fluidcomp.model import load_scenario, validate_scenario
from fluidcomp.workload import (
    SLOTS,
    CheckinRow,
    EnergyRow,
    GeneratorConfig,
    write_checkins,
    write_energy,
)

GEN = GeneratorConfig(n_services=15, n_requests=4, horizon_ticks=100, disconnection_freq=1.0)


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "gen.json"
    p.write_text(json.dumps(GEN.to_dict()))
    return p


@pytest.fixture
def scen(tmp_path, config):
    out = tmp_path / "s.json"
    assert main(["gen", "--config", str(config), "--out", str(out)]) == 0
    return out


def test_gen_writes_a_valid_scenario(scen):
    s = load_scenario(scen)
    assert validate_scenario(s) == [] and len(s.services) == 15


def test_ingest(tmp_path, config):
    c, e, out = tmp_path / "c.csv", tmp_path / "e.csv", tmp_path / "s.json"
    write_checkins([CheckinRow("b", 1, h, h + 1) for h in range(24)], c)
    write_energy([EnergyRow("h", "2013-07-01", (5.0,) * SLOTS, (2.0,) * SLOTS)], e)
    args = ["ingest", "--checkins", str(c), "--energy", str(e), "--config", str(config)]
    assert main(args + ["--out", str(out)]) == 0
    assert len(load_scenario(out).requests) == GEN.n_requests


def test_perturb(tmp_path, scen):
    out = tmp_path / "p.json"
    assert main(["perturb", "--in", str(scen), "--freq", "3", "--seed", "1", "--out", str(out)]) == 0
    before, after = load_scenario(scen), load_scenario(out)
    assert [s.qos for s in before.services] == [s.qos for s in after.services]
    assert before != after


@pytest.mark.parametrize("algo", ["fluid", "brute", "static", "lossy"])
def test_compose(tmp_path, scen, algo):
    out = tmp_path / "plans.json"
    assert main(["compose", "--scenario", str(scen), "--algo", algo, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {r.rid for r in load_scenario(scen).requests}
    for entry in doc.values():
        assert {"plan", "report"} <= set(entry)


def test_bench_and_report(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"generator": GEN.to_dict(), "axis": "frequency",
                                "axis_values": [0, 2], "seeds": [0, 1]}))
    csv_out, json_out = tmp_path / "m.csv", tmp_path / "m.json"
    assert main(["bench", "--spec", str(spec), "--out", str(csv_out)]) == 0
    assert len(csv_out.read_text().splitlines()) == 1 + 2 * 4
    assert main(["report", "--in", str(csv_out), "--format", "json", "--out", str(json_out)]) == 0
    assert read_rows(json_out) == read_rows(csv_out)


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n_servicez": 1}))
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "x.json")]) == 1
    assert "fluidcomp gen: error" in capsys.readouterr().err
    assert main(["compose", "--scenario", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o.json")]) == 1
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"generator": GEN.to_dict(), "algorithms": ["magic"]}))
    assert main(["bench", "--spec", str(spec), "--out", str(tmp_path / "m.csv")]) == 1


def test_invalid_scenario_is_refused(tmp_path, scen):
    doc = json.loads(scen.read_text())
    doc["services"][0]["qos"]["end_tick"] = doc["services"][0]["qos"]["start_tick"]
    scen.write_text(json.dumps(doc))
    out = tmp_path / "o.json"
    assert main(["compose", "--scenario", str(scen), "--out", str(out)]) == 1
    assert not out.exists()


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["compose"])
    assert exc.value.code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fluidcomp", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "bench" in r.stdout
