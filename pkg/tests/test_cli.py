import json
import math
from pathlib import Path

import pytest

from capplan.cli import main

ROOT = Path(__file__).resolve().parents[1]
DEMO = ROOT / "configs" / "demo.toml"


def run(*argv):
    return main([str(a) for a in argv])


def test_scale_reproduces_model_table(tmp_path):
    assert run("scale", "--sigma", "0.030", "--lambda", "0.002", "--x52", "57605",
               "--x52-hi", "75859", "--p", "52,64", "--out", tmp_path) == 0
    t = json.loads((tmp_path / "scaling_table.json").read_text())
    assert t["rows"] == ["52-way", "64-way"] and t["columns"] == ["333/4", "400/8"]
    assert abs(t["cells"][1][0] - 60875) <= 1 and abs(t["cells"][1][1] - 80165) <= 1
    assert round(t["pct_both"], 2) == 0.39
    csv_text = (tmp_path / "scaling_table.csv").read_text().splitlines()
    assert csv_text[0] == "System,333/4,400/8,dCLK,Percentage"


def test_scale_vendor_mode(tmp_path):
    vendor = tmp_path / "vendor.csv"
    vendor.write_text('System,333/4,400/8\n52-way,"115,755","152,432"\n64-way,"133,629","175,969"\n')
    assert run("scale", "--vendor", vendor, "--out", tmp_path) == 0
    t = json.loads((tmp_path / "scaling_table.json").read_text())
    assert [round(x, 2) for x in t["pct_cpu"]] == [0.15, 0.15]
    assert t["meta"]["mode"] == "vendor"


def test_trend_exact(tmp_path):
    peaks = tmp_path / "peaks.csv"
    peaks.write_text("week,peak_demand\n" + "".join(
        f"{w},{100 * math.exp(0.05 * w)!r}\n" for w in range(8)))
    assert run("trend", "--peaks", peaks, "--out", tmp_path, "--horizon", "10") == 0
    g = json.loads((tmp_path / "growth.json").read_text())
    assert g["U0"] == pytest.approx(100, rel=1e-10)
    assert g["b"] == pytest.approx(0.05, abs=1e-10)
    assert g["doubling_weeks"] == pytest.approx(math.log(2) / 0.05, rel=1e-10)
    assert len((tmp_path / "projection.csv").read_text().splitlines()) == 12


def test_synth_ingest_demand_chain(tmp_path):
    assert run("synth", "--days", "2", "--scale", "150", "--noise", "2", "--seed", "3", "--out", tmp_path) == 0
    assert run("ingest", "--input", tmp_path / "metrics.csv", "--window", "15", "--out", tmp_path) == 0
    v = json.loads((tmp_path / "validation.json").read_text())
    assert v["rows"] == 192 and v["findings"] == 0
    assert run("demand", "--input", tmp_path / "ingested.csv", "--out", tmp_path) == 0
    lines = (tmp_path / "demand.csv").read_text().splitlines()
    assert lines[0] == "timestamp,U,U_star" and len(lines) == 193
    assert max(float(r.split(",")[2]) for r in lines[1:]) > 100
    d = json.loads((tmp_path / "demand.json").read_text())
    assert len(d["models"]) == 2
    assert (tmp_path / "peaks.csv").read_text().startswith("week,peak_demand\n0,")


def test_scenario_from_table(tmp_path):
    run("scale", "--x52", "57605", "--x52-hi", "75859", "--out", tmp_path)
    assert run("scenario", "--u0", "80.62", "--b", "0.0309", "--scenario", "baseline=0",
               "--table", tmp_path / "scaling_table.json", "--from", "52-way:333/4",
               "--to", "64-way:400/8", "--name", "combined", "--out", tmp_path) == 0
    base = json.loads((tmp_path / "scenario_baseline.json").read_text())
    comb = json.loads((tmp_path / "scenario_combined.json").read_text())
    assert base["crossings"][0]["week"] == pytest.approx(6.97, abs=0.01)
    assert comb["delta"] == pytest.approx(0.3916, abs=1e-4)
    assert comb["crossings"][0]["week"] > base["crossings"][0]["week"]
    assert (tmp_path / "scenario_combined.csv").read_text().startswith("week,baseline_pct,deflated_pct")


def test_scenario_from_growth_file(tmp_path):
    (tmp_path / "growth.json").write_text(json.dumps({"U0": 80.62, "b": 0.0309}))
    assert run("scenario", "--growth", tmp_path / "growth.json", "--scenario", "clock=0.317",
               "--out", tmp_path) == 0
    rows = (tmp_path / "scenario_clock.csv").read_text().splitlines()
    assert rows[21].startswith("20,149.5")
    assert abs(float(rows[21].split(",")[2]) - 102.15) < 0.05


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run("frobnicate")
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run("scale", "--bogus")
    assert exc.value.code == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    assert run("scale", "--sigma", "-1", "--x52", "1000", "--out", tmp_path) == 1
    assert "sigma" in capsys.readouterr().err
    assert run("scenario", "--u0", "80", "--b", "0.03", "--scenario", "x=1.2", "--out", tmp_path) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,U,X1\n")
    assert run("demand", "--input", bad, "--out", tmp_path) == 1
    assert run("trend", "--peaks", tmp_path / "missing.csv") == 1


def test_config_supplies_defaults_and_flags_override(tmp_path, monkeypatch):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[scale]\nsigma = 0.0\nlam = 0.0\nx_base = 100.0\np = "1,4"\n')
    assert run("scale", "--config", cfg, "--out", tmp_path) == 0
    t = json.loads((tmp_path / "scaling_table.json").read_text())
    assert t["cells"] == [[100.0], [400.0]]
    monkeypatch.setenv("CAPPLAN_CONFIG", str(cfg))
    assert run("scale", "--p", "1,2", "--out", tmp_path) == 0
    t = json.loads((tmp_path / "scaling_table.json").read_text())
    assert t["cells"] == [[100.0], [200.0]]


def test_pipeline_end_to_end(tmp_path):
    assert run("pipeline", "--config", DEMO, "--seed", "42", "--out", tmp_path) == 0
    for name in ("demand.csv", "peaks.csv", "growth.json", "scaling_table.csv", "scaling_table.json",
                 "scenario_baseline.csv", "scenario_clock400.json", "pipeline.json"):
        assert (tmp_path / name).exists(), name
    g = json.loads((tmp_path / "growth.json").read_text())
    # planted weekly rate 0.0309; median-recovery tolerance of the growth fit
    assert abs(g["b"] - 0.0309) <= 0.10 * 0.0309
    clock = json.loads((tmp_path / "scenario_clock400.json").read_text())
    assert clock["delta"] == pytest.approx(0.317, abs=1e-3)


def test_pipeline_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("pipeline", "--config", DEMO, "--seed", "42", "--out", a) == 0
    assert run("pipeline", "--config", DEMO, "--seed", "42", "--out", b) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_pipeline_from_input_files(tmp_path):
    assert run("synth", "--days", "14", "--scale", "100", "--rate", "0.05", "--noise", "1",
               "--seed", "8", "--out", tmp_path) == 0
    cfg = tmp_path / "run.toml"
    cfg.write_text('[input]\npaths = ["metrics.csv"]\n[run]\nout = "result"\n'
                   '[[scenario]]\nname = "half"\ndelta = 0.5\n')
    assert run("pipeline", "--config", cfg) == 0
    out = tmp_path / "result"
    rep = json.loads((out / "scenario_half.json").read_text())
    assert rep["delta"] == 0.5
    assert len(json.loads((out / "pipeline.json").read_text())["weekly_peaks"]) == 2


def test_pipeline_missing_input(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[input]\npaths = ["nope.csv"]\n')
    assert run("pipeline", "--config", cfg) == 1
