import csv
import json

import numpy as np
import pytest

from coopetition.cli import main
from coopetition.experiment import (
    ExperimentConfig,
    cmd_run,
    cmd_sweep_k1,
    cmd_table1,
    cmd_validate,
    linear_initial_state,
    benchmark_preset,
    prepare,
)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_preset_matches_benchmark_constants():
    cfg = benchmark_preset()
    assert (cfg.lambda1, cfg.lambda2) == (1.0, 0.5)
    assert (cfg.n_stages, cfg.period, cfg.t0) == (5, 1.0, 0.0)
    assert cfg.rho_mode == "final" and cfg.initial == "linear"
    setup = prepare(cfg)
    assert setup.params.schedule == tuple((float(k), 1.0) for k in range(1, 6))
    np.testing.assert_allclose(setup.x0, [0.4 + n / 100 for n in range(1, 51)])
    np.testing.assert_array_equal(linear_initial_state(4), [0.525, 0.65, 0.775, 0.9])


def test_default_budgets_carry_margin():
    setup = prepare(benchmark_preset())
    assert setup.params.budget1 == pytest.approx(1.1 * setup.thresholds[0])
    assert setup.params.budget2 == pytest.approx(1.1 * setup.thresholds[1])


def test_run_writes_artifacts(tmp_path):
    summary = cmd_run(benchmark_preset().replace(out=str(tmp_path)))
    assert summary["convergence_stage"] == 5
    assert summary["ne_convergence_stage"] == 5
    assert summary["equilibrium_prediction"]["regime"] == "unique-eta"
    assert summary["budget_thresholds"][0] == pytest.approx(10.951007225, abs=1e-6)
    rows = read_csv(tmp_path / "trajectory.csv")
    assert set(rows[0]) == {"k", "t", "node", "opinion"}
    assert {int(r["node"]) for r in rows} == {1, 15, 50}
    history = json.loads((tmp_path / "history.json").read_text())
    assert len(history["stages"]) == 5
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["U1"] == summary["U1"]


def test_run_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cmd_run(benchmark_preset().replace(out=str(a), profile="coopetition:2"))
    cmd_run(benchmark_preset().replace(out=str(b), profile="coopetition:2"))
    for name in ("trajectory.csv", "history.json", "stages.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_larger_network_convergence(tmp_path):
    summary = cmd_run(benchmark_preset(100).replace(out=str(tmp_path)))
    # K = 5 campaigns are not enough; extended equilibrium play settles at 7
    assert summary["convergence_stage"] is None
    assert summary["ne_convergence_stage"] == 7


def test_sweep(tmp_path):
    rows = cmd_sweep_k1(benchmark_preset().replace(out=str(tmp_path)))
    base = rows[0]
    assert base["profile"] == "repeated-ne"
    by_k1 = {r["k1"]: r for r in rows[1:]}
    assert sorted(by_k1) == [0, 1, 2, 3, 4, 5]
    for k1 in (1, 2, 3, 4):
        assert by_k1[k1]["sustainable"]
    assert (by_k1[5]["U1"], by_k1[5]["U2"]) == (base["U1"], base["U2"])
    assert len(read_csv(tmp_path / "sweep.csv")) == 7


def test_sweep_single_campaign(tmp_path):
    rows = cmd_sweep_k1(benchmark_preset().replace(out=str(tmp_path), n_stages=1, k1_range=[0]))
    assert [r["k1"] for r in rows] == [None, 0]


def test_sweep_parallel_matches_sequential(tmp_path):
    seq = cmd_sweep_k1(benchmark_preset().replace(out=str(tmp_path / "s")))
    par = cmd_sweep_k1(benchmark_preset().replace(out=str(tmp_path / "p"), jobs=4))
    assert seq == par
    assert (tmp_path / "s" / "sweep.csv").read_bytes() == (tmp_path / "p" / "sweep.csv").read_bytes()


def test_table1_single(tmp_path):
    rows = cmd_table1(benchmark_preset().replace(out=str(tmp_path), table1_nodes=[50]))
    row = rows[0]
    assert row["convergence_stage"] == 5
    assert (row["proposed_u1_rounded"], row["ne_u1_rounded"], row["ne_u2_rounded"]) == (17, 13, 30)
    assert read_csv(tmp_path / "table1.csv")[0]["n_nodes"] == "50"


def test_validate():
    report = cmd_validate(benchmark_preset())
    assert report["n_edges"] == 170
    assert report["strongly_connected"] is False
    assert report["root_nodes"] > 0


def test_cli_run(tmp_path, capsys):
    assert main(["run", "--preset", "paper", "--nodes", "50", "--profile", "repeated-ne",
                 "--out", str(tmp_path)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["convergence_stage"] == 5


def test_cli_bad_graph(tmp_path, capsys):
    assert main(["run", "--graph", "cascading:7", "--out", str(tmp_path)]) != 0
    assert "multiple of 5" in capsys.readouterr().err


def test_cli_budget_violation(tmp_path, capsys):
    assert main(["run", "--preset", "paper", "--budget1", "1", "--out", str(tmp_path)]) != 0
    err = capsys.readouterr().err
    assert "threshold 10.95" in err


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"graph": "cascading:10", "lambda2": 0.25, "profile": "zero"}))
    assert main(["validate", "--config", str(cfg), "--lambda2", "0.5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["n_nodes"] == 10 and report["eta"] == pytest.approx(1 / 3)


def test_cli_graph_file(tmp_path, capsys):
    from coopetition import cascading_benchmark
    path = tmp_path / "g.json"
    cascading_benchmark(10).save(path)
    assert main(["run", "--graph", str(path), "--out", str(tmp_path / "o"), "--plot-nodes", "1,10"]) == 0


def test_cli_integral_mode(tmp_path, capsys):
    assert main(["sweep-k1", "--preset", "paper", "--rho-mode", "integral", "--k1-range", "1-2",
                 "--out", str(tmp_path)]) == 0
    assert "coopetition:2" in capsys.readouterr().out


def test_unknown_config_key():
    with pytest.raises(Exception):
        ExperimentConfig.from_dict({"nodes": 5})


def test_cli_preset_names_agree(capsys):
    assert main(["validate", "--preset", "benchmark"]) == 0
    a = capsys.readouterr().out
    assert main(["validate", "--preset", "paper"]) == 0
    assert capsys.readouterr().out == a
