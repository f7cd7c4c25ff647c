import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from improper_ic import cli, harness
from improper_ic.harness import (
    SCHEMAS, ConfigError, ExperimentConfig, gen_channel, gen_channels, literal_channel,
    run_maxmin, run_ratio, run_region, run_table_case, snr_to_power,
)

FAST = dict(grid=[7, 3, 12, 1], L=50, tol=1e-3)


def _parse(text):
    lines = text.splitlines()
    head = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return head, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_channels_are_seeded_per_index():
    a = gen_channels(7, 5)
    b = gen_channels(7, 5)
    assert all(np.array_equal(x.h, y.h) for x, y in zip(a, b))
    assert np.array_equal(gen_channel(7, 3).h, a[3].h)
    assert not np.array_equal(gen_channels(8, 1)[0].h, a[0].h)


def test_channel_variances():
    ch = gen_channels(1, 4000, var_direct=1.0, var_cross=0.2)
    g = np.array([c.gains for c in ch])
    assert g[:, [0, 1], [0, 1]].mean() == pytest.approx(1.0, rel=0.05)
    assert g[:, [0, 1], [1, 0]].mean() == pytest.approx(0.2, rel=0.05)


def test_literal_channels():
    inst = literal_channel("H2", 10.0)
    assert inst.P == (10.0, 10.0) and snr_to_power(-10) == pytest.approx(0.1)
    assert abs(inst.h[0, 0]) == pytest.approx(4.0)
    with pytest.raises(ConfigError):
        literal_channel("H3")


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})
    for bad in ({"units": "dB"}, {"tol": 0}, {"grid": [1, 2]}, {"methods": ["wmmse"]},
                {"var_cross": -1}, {"failure_threshold": 2}, {"grid": [1, 3, 3, 1]}):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"count": 3, "seed": 2}))
    cfg = ExperimentConfig.load(p, seed=5, count=None)
    assert cfg.count == 3 and cfg.seed == 5
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")


def test_region_run_and_csv():
    cfg = ExperimentConfig.from_dict(dict(kind="region", channel="H1", n_alpha=3,
                                          methods=["proper", "separate"], **FAST))
    rows, text = run_region(cfg)
    head, parsed = _parse(text)
    assert head[0].startswith("# config:") and '"units": "bits"' in head[1]
    assert list(parsed[0]) == SCHEMAS["region"]
    assert len(parsed) == 6 and all(r["status"] == "ok" for r in parsed)
    by = {(r["alpha1"], r["method"]): float(r["profile_value"]) for r in parsed}
    for a in {r["alpha1"] for r in parsed}:
        assert by[(a, "separate")] >= by[(a, "proper")] - 1e-9


def test_ratio_run_summary():
    cfg = ExperimentConfig.from_dict(dict(kind="ratio", count=2, **FAST))
    rows, summary, text = run_ratio(cfg)
    assert summary["ok"] == 2 and summary["failed"] == 0
    for r in rows:
        assert r["joint_R"] <= r["R_sdr"] + 1e-6


def test_maxmin_run_orders_rows(tmp_path):
    cfg = ExperimentConfig.from_dict(dict(kind="maxmin", count=2, snr_db=[0.0, 10.0],
                                          methods=["proper", "tdma"], **FAST))
    summary, detail, text = run_maxmin(cfg, str(tmp_path / "d.csv"))
    assert [(s["snr_db"], s["method"]) for s in summary] == \
        [(0.0, "proper"), (0.0, "tdma"), (10.0, "proper"), (10.0, "tdma")]
    assert [d["index"] for d in detail[:4]] == [0, 0, 1, 1]
    _, parsed = _parse((tmp_path / "d.csv").read_text())
    assert list(parsed[0]) == SCHEMAS["maxmin-detail"]


def test_parallel_matches_serial():
    base = dict(kind="maxmin", count=3, snr_db=[0.0], methods=["proper", "separate"], **FAST)
    a = run_maxmin(ExperimentConfig.from_dict(dict(base, workers=1)))[1]
    b = run_maxmin(ExperimentConfig.from_dict(dict(base, workers=2)))[1]
    assert [(d["index"], d["method"], d["minrate"]) for d in a] == \
        [(d["index"], d["method"], d["minrate"]) for d in b]


def test_table_report():
    cfg = ExperimentConfig.from_dict(dict(kind="table", methods=["separate"], tol=1e-4))
    report, text = run_table_case(cfg)
    sep = report["separate"]
    assert sep["sum"] == pytest.approx(sum(sep["rates"]))
    assert sep["improvement_pct"] > 0
    u = sep["users"][0]
    assert np.trace(np.array(u["Q"])) == pytest.approx(u["C"])
    assert json.loads(text)["channel"] == "table"


def test_failure_threshold(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("synthetic")
    monkeypatch.setattr(harness, "improper_pareto_point", boom)
    assert cli.main(["region", "--n-alpha", "2", "--methods", "separate"]) == cli.EXIT_SOLVER
    cfg = ExperimentConfig.from_dict(dict(kind="region", n_alpha=2, methods=["proper", "separate"],
                                          failure_threshold=0.6))
    rows, _ = run_region(cfg)
    assert sum(r["status"].startswith("error") for r in rows) == 2


def test_cli_schema_and_version(capsys):
    assert cli.main(["--schema"]) == 0
    out = capsys.readouterr().out
    assert "region: " + ",".join(SCHEMAS["region"]) in out
    with pytest.raises(SystemExit):
        cli.main(["--version"])
    assert cli.main([]) == cli.EXIT_CONFIG


def test_cli_convert(capsys):
    assert cli.main(["convert", "--C", "10", "--ct-polar", "9.546", "0.5512"]) == 0
    q = json.loads(capsys.readouterr().out)["Q"]
    assert np.allclose(q, [[9.0660, 2.4998], [2.4998, 0.9340]], atol=1e-3)
    assert cli.main(["convert", "--Q", "7.5137", "4.3221", "2.4863"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["Ct_arg"] == pytest.approx(1.0441, abs=1e-3)
    assert cli.main(["convert"]) == cli.EXIT_CONFIG


def test_cli_gen_channels(tmp_path, capsys):
    out = tmp_path / "ch.json"
    assert cli.main(["gen-channels", "--count", "3", "--seed", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["channels"]) == 3 and doc["seed"] == 4
    assert cli.main(["gen-channels", "--count", "2"]) == 0
    _, parsed = _parse(capsys.readouterr().out)
    assert len(parsed) == 2 and list(parsed[0]) == SCHEMAS["channels"]
    # the file feeds back into an ensemble run
    assert cli.main(["ratio", "--channel-file", str(out), "--grid", "5", "3", "6", "0",
                     "--L", "20", "--tol", "1e-2", "--out", str(tmp_path / "r.csv")]) == 0
    _, rows = _parse((tmp_path / "r.csv").read_text())
    assert len(rows) == 3


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": True}))
    assert cli.main(["region", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["maxmin", "--grid", "1", "1", "1", "0"]) == cli.EXIT_CONFIG
    assert cli.main(["precode-demo", "--C", "1", "--ct", "2", "0"]) == cli.EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_cli_precode_demo(capsys):
    assert cli.main(["precode-demo", "--n", "20000", "--seed", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["empirical"]["C"] == pytest.approx(1.0, rel=0.05)
    assert d["empirical"]["Ct"]["im"] == pytest.approx(0.8, abs=0.05)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "improper_ic", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == harness.__version__
