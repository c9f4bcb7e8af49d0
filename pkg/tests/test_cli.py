import json
import os

import pytest

from chaos_market.cli import main

# CLI tests invoke main() in-process; each run writes into its own tmp dir.


def run_cli(args):
    return main(args)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def tree_bytes(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            full = os.path.join(dirpath, name)
            out[os.path.relpath(full, root)] = read(full)
    return out


@pytest.fixture()
def small_sim_config(tmp_path):
    path = tmp_path / "sim.json"
    path.write_text(json.dumps({"a1_list": [0.049, 0.26], "horizon": 400}))
    return str(path)


def test_simulate_preset_outputs(tmp_path):
    out = tmp_path / "fig2"
    assert run_cli(["simulate", "--preset", "fig2", "--out", str(out)]) == 0
    names = sorted(os.listdir(out))
    assert names == ["manifest.json", "summary.json",
                     "trajectory_a1_0.049.csv", "trajectory_a1_0.26.csv",
                     "trajectory_a1_0.39.csv"]
    summary = json.loads((out / "summary.json").read_text())
    regimes = {r["a1"]: r["regime"] for r in summary["runs"]}
    assert regimes == {0.049: "convergent", 0.26: "chaotic", 0.39: "oscillating"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["figure"] == "fig2"
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 12345


def test_rerun_is_byte_identical(tmp_path, small_sim_config):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["simulate", "--config", small_sim_config, "--out", str(a),
                    "--seed", "7"]) == 0
    assert run_cli(["simulate", "--config", small_sim_config, "--out", str(b),
                    "--seed", "7", "--threads", "3"]) == 0
    ta, tb = tree_bytes(a), tree_bytes(b)
    assert ta.keys() == tb.keys()
    for name in ta:
        assert ta[name] == tb[name], f"{name} differs between reruns"


def test_threads_do_not_change_ensemble_outputs(tmp_path):
    cfg = tmp_path / "ind.json"
    cfg.write_text(json.dumps({"runs": 40, "horizon": 30, "N1": 10, "N2": 20,
                               "acf": {"r0": 0.01, "horizon": 3000,
                                       "burn_in": 500, "max_lag": 10}}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["independence", "--config", str(cfg), "--out", str(a)]) == 0
    assert run_cli(["independence", "--config", str(cfg), "--out", str(b),
                    "--threads", "4"]) == 0
    assert tree_bytes(a) == tree_bytes(b)


def test_seed_changes_ensemble_outputs(tmp_path):
    cfg = tmp_path / "lyap.json"
    cfg.write_text(json.dumps({"runs": 60, "horizon": 60, "v0": 1e-6}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(a), "--seed", "1"]) == 0
    assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(b), "--seed", "2"]) == 0
    assert read(a / "volatility_v0_1e-06.csv") != read(b / "volatility_v0_1e-06.csv")


def test_env_var_seed_fallback(tmp_path, monkeypatch, small_sim_config):
    monkeypatch.setenv("CHAOS_MARKET_SEED", "4242")
    out = tmp_path / "env"
    assert run_cli(["simulate", "--config", small_sim_config, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 4242


def test_flag_seed_beats_config_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CHAOS_MARKET_SEED", "1")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 2, "a1_list": [0.2], "horizon": 300}))
    out = tmp_path / "o"
    assert run_cli(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 3


def test_config_seed_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CHAOS_MARKET_SEED", "1")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 2, "a1_list": [0.2], "horizon": 300}))
    out = tmp_path / "o"
    assert run_cli(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 2


def test_usage_errors_exit_1(tmp_path):
    assert run_cli(["simulate", "--preset", "nope", "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 1
    missing = str(tmp_path / "missing.json")
    assert run_cli(["simulate", "--config", missing, "--out", str(tmp_path)]) == 1
    s1 = tmp_path / "s1.json"
    s1.write_text(json.dumps({"runs": 1}))
    assert run_cli(["independence", "--config", str(s1), "--out", str(tmp_path)]) == 1
    empty_grid = tmp_path / "eg.json"
    empty_grid.write_text(json.dumps({"kind": "zones",
                                      "a1_grid": {"start": 0.1, "stop": 0.1, "step": 0.01}}))
    assert run_cli(["sweep", "--config", str(empty_grid), "--out", str(tmp_path)]) == 1


def test_numeric_failure_exits_2(tmp_path):
    cfg = tmp_path / "conv.json"
    cfg.write_text(json.dumps({"a1": 0.02, "runs": 50, "horizon": 60}))
    assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_sweep_fig1_demand_curve(tmp_path):
    out = tmp_path / "fig1"
    assert run_cli(["sweep", "--preset", "fig1", "--out", str(out)]) == 0
    lines = (out / "demand_curve.csv").read_text().splitlines()
    assert lines[0] == "x,ed1,a1_ed1,zone"
    assert len(lines) == 802
    mid = lines[len(lines) // 2].split(",")
    assert abs(float(mid[0])) < 1e-12 and float(mid[1]) == 0.0


def test_sweep_fig13_reports_zero_crossing(tmp_path):
    cfg = tmp_path / "small13.json"
    cfg.write_text(json.dumps({
        "kind": "independence_vs_a1", "runs": 80, "horizon": 50,
        "a1_grid": {"start": 0.12, "stop": 0.1801, "step": 0.02},
    }))
    out = tmp_path / "o"
    assert run_cli(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "independence_summary.json").read_text())
    assert summary["sweep"] == "a1"
    assert 0.11 < summary["zero_crossing"] < 0.17


def test_distribution_zero_shock_degenerate_flag(tmp_path):
    cfg = tmp_path / "d.json"
    cfg.write_text(json.dumps({"r0": 0.0, "horizon": 5000, "burn_in": 100,
                               "bins": 30, "emit": ["histogram"]}))
    out = tmp_path / "o"
    assert run_cli(["distribution", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "distribution_summary.json").read_text())
    assert summary["degenerate_variance"] is True
    assert summary["excess_kurtosis"] is None


def test_distribution_default_outputs(tmp_path):
    cfg = tmp_path / "d.json"
    cfg.write_text(json.dumps({"horizon": 6000, "burn_in": 500, "bins": 40}))
    out = tmp_path / "o"
    assert run_cli(["distribution", "--config", str(cfg), "--out", str(out)]) == 0
    files = set(os.listdir(out))
    assert {"attractor.csv", "histogram.csv", "distribution_summary.json",
            "manifest.json"} <= files


def test_equilibrium_default_all_unstable(tmp_path):
    out = tmp_path / "eq"
    assert run_cli(["equilibrium", "--out", str(out)]) == 0
    certs = json.loads((out / "certificates.json").read_text())
    assert certs["all_unstable"] is True
    assert len(certs["records"]) == 7 * 2 * 2 * 3
    lines = (out / "linear_model.csv").read_text().splitlines()
    assert len(lines) == 6
    gain = (out / "gain_comparison.csv").read_text().splitlines()
    rows = [line.split(",") for line in gain[1:]]
    for row in rows:
        assert float(row[1]) == pytest.approx(float(row[2]), rel=1e-6)
    assert float(rows[1][3]) == pytest.approx(14.6)


ALL_PRESETS = [
    ("simulate", ["fig2", "fig4", "fig5"]),
    ("sweep", ["fig1", "fig3", "fig10", "fig11", "fig13", "fig14"]),
    ("lyapunov", ["fig6", "fig7", "fig8", "fig9", "figA1"]),
    ("independence", ["fig12", "fig15"]),
    ("distribution", ["fig16", "fig17"]),
]


@pytest.mark.parametrize("command,presets", ALL_PRESETS)
def test_every_figure_preset_runs(tmp_path, command, presets):
    for preset in presets:
        out = tmp_path / preset
        assert run_cli([command, "--preset", preset, "--out", str(out)]) == 0, preset
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["figure"] == preset
        assert manifest["outputs"]
        for name in manifest["outputs"]:
            assert (out / name).stat().st_size > 0


def test_fig13_preset_zero_crossing_near_locus(tmp_path):
    out = tmp_path / "fig13"
    assert run_cli(["sweep", "--preset", "fig13", "--out", str(out)]) == 0
    summary = json.loads((out / "independence_summary.json").read_text())
    assert abs(summary["zero_crossing"] - 0.1428) < 0.02


def test_fig11_preset_flat_at_small_w(tmp_path):
    out = tmp_path / "fig11"
    assert run_cli(["sweep", "--preset", "fig11", "--out", str(out)]) == 0
    lines = (out / "volatility_vs_w.csv").read_text().splitlines()[1:]
    rows = [line.split(",") for line in lines]
    # tiny w sits in the oscillation zone: measured v_inf equals 0.2 a1
    for row in rows:
        a1, w, v_mc = float(row[0]), float(row[1]), float(row[2])
        if w <= 0.001:
            assert v_mc == pytest.approx(0.2 * a1, rel=1e-3)


def test_manifest_lists_outputs_without_paths(tmp_path, small_sim_config):
    out = tmp_path / "m"
    assert run_cli(["simulate", "--config", small_sim_config, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["outputs"]:
        assert os.sep not in name
        assert (out / name).exists()
    assert "threads" not in manifest


def test_short_lyapunov_horizon_is_usage_error(tmp_path):
    cfg = tmp_path / "short.json"
    cfg.write_text(json.dumps({"runs": 30, "horizon": 10}))
    assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_json_outputs_avoid_nonstandard_tokens(tmp_path):
    # a sweep crossing the divergent band must still emit strictly valid JSON
    cfg = tmp_path / "div.json"
    cfg.write_text(json.dumps({"kind": "vol_vs_a1", "runs": 10, "horizon": 2500,
                               "a1_grid": {"start": 0.06, "stop": 0.0601,
                                           "step": 0.01}}))
    out = tmp_path / "o"
    assert run_cli(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    for name in os.listdir(out):
        if name.endswith(".json"):
            text = (out / name).read_text()
            json.loads(text)
            assert "NaN" not in text and "Infinity" not in text


def test_cross_process_reruns_are_byte_identical(tmp_path):
    import subprocess
    import sys

    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"a1_list": [0.26], "horizon": 500}))
    outs = [tmp_path / "p1", tmp_path / "p2"]
    for out in outs:
        proc = subprocess.run(
            [sys.executable, "-m", "chaos_market", "simulate",
             "--config", str(cfg), "--out", str(out), "--seed", "9"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    assert tree_bytes(outs[0]) == tree_bytes(outs[1])
    # and the in-process runner produces the same bytes
    out3 = tmp_path / "p3"
    assert run_cli(["simulate", "--config", str(cfg), "--out", str(out3),
                    "--seed", "9"]) == 0
    assert tree_bytes(out3) == tree_bytes(outs[0])
