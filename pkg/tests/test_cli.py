import json
from pathlib import Path

import pytest

from nslearn.cli import main


def _files_digest(folder: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir())}


class TestGenerators:
    def test_wno_gen_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["wno-gen", "--n", "6", "--count", "3", "--seed", "7", "--out", str(a)]) == 0
        assert main(["wno-gen", "--n", "6", "--count", "3", "--seed", "7", "--out", str(b)]) == 0
        assert _files_digest(a) == _files_digest(b)
        assert len(list(a.iterdir())) == 3

    def test_mip_gen_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        args = ["mip-gen", "--family", "knapsack-conflicts", "--count", "2", "--seed", "3",
                "--n-items", "30", "--n-conflicts", "20"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert _files_digest(a) == _files_digest(b)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Small end-to-end artifact chain shared by the CLI tests."""
    root = tmp_path_factory.mktemp("pipeline")
    assert main(["wno-gen", "--n", "6", "--count", "4", "--seed", "50", "--out", str(root / "wno")]) == 0
    assert main([
        "label-wno", "--instances", str(root / "wno"), "--iterations", "3",
        "--seed", "0", "--out", str(root / "data"),
    ]) == 0
    assert main([
        "split", "--data", str(root / "data" / "drop.jsonl"), "--seed", "1",
        "--out", str(root / "split"),
    ]) == 0
    assert main([
        "train", "--task", "drop", "--data", str(root / "split"), "--lambda", "0.8",
        "--epochs", "4", "--hidden", "8", "--seed", "0", "--out", str(root / "drop.bin"),
    ]) == 0
    return root


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        assert (pipeline / "data" / "drop.jsonl").exists()
        assert (pipeline / "data" / "add.jsonl").exists()
        assert (pipeline / "data" / "manifest.json").exists()
        assert (pipeline / "split" / "train.jsonl").exists()
        assert (pipeline / "drop.bin").exists()

    def test_manifest_reports_rates(self, pipeline):
        manifest = json.loads((pipeline / "data" / "manifest.json").read_text())
        assert "positive_rate" in manifest["drop"]
        assert "positive_rate" in manifest["add"]

    def test_grad_check_prints_small_error(self, pipeline, capsys):
        assert main(["grad-check", "--model", str(pipeline / "drop.bin")]) == 0
        out = capsys.readouterr().out
        err = float(out.strip().split()[-1])
        assert err < 1e-4

    def test_run_ts_modes(self, pipeline, tmp_path):
        inst = str(next((pipeline / "wno").glob("*.json")))
        out = tmp_path / "ts.json"
        assert main([
            "run-ts", "--instance", inst, "--mode", "gnn-drop",
            "--drop-model", str(pipeline / "drop.bin"),
            "--iterations", "3", "--out", str(out),
        ]) == 0
        payload = json.loads(out.read_text())
        assert payload["mode"] == "gnn-drop" and payload["iterations"] == 3

    def test_train_repro_bitwise(self, pipeline, tmp_path):
        out2 = tmp_path / "again.bin"
        assert main([
            "train", "--task", "drop", "--data", str(pipeline / "split"), "--lambda", "0.8",
            "--epochs", "4", "--hidden", "8", "--seed", "0", "--out", str(out2),
        ]) == 0
        assert out2.read_bytes() == (pipeline / "drop.bin").read_bytes()


class TestMipCommands:
    def test_run_lns_and_report(self, tmp_path):
        assert main([
            "mip-gen", "--family", "set-cover", "--count", "1", "--seed", "5",
            "--n-cols", "40", "--n-rows", "30", "--density", "0.1", "--out", str(tmp_path),
        ]) == 0
        inst = str(next(tmp_path.glob("setcover*.json")))
        out = tmp_path / "lns.json"
        assert main([
            "run-lns", "--instance", inst, "--policy", "random", "--iterations", "4",
            "--repair-node-limit", "1000", "--out", str(out),
        ]) == 0
        payload = json.loads(out.read_text())
        assert payload["iterations"] == 4
        assert main([
            "run-lns", "--instance", inst, "--policy", "lb", "--iterations", "2",
            "--repair-node-limit", "1000",
        ]) == 0

    def test_experiment_and_report_csv(self, tmp_path, capsys):
        assert main([
            "mip-gen", "--family", "set-cover", "--count", "2", "--seed", "9",
            "--n-cols", "40", "--n-rows", "30", "--density", "0.1", "--out", str(tmp_path / "inst"),
        ]) == 0
        cfg = {
            "format_version": 1,
            "application": "mip",
            "instances": sorted(str(p) for p in (tmp_path / "inst").glob("*.json")),
            "algorithms": ["lns-random"],
            "seeds": [0],
            "t_max": 5.0,
            "max_iterations": 3,
            "out_dir": str(tmp_path / "results"),
            "repair_node_limit": 1000,
            "initial_node_limit": 500,
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run-experiment", "--config", str(cfg_path)]) == 0
        capsys.readouterr()
        assert main(["report", "--in", str(tmp_path / "results"), "--format", "csv"]) == 0
        out = capsys.readouterr().out
        header = out.splitlines()[0]
        assert header == "instance,algorithm,seed,primal_integral,iterations,best_value,time_to_best"


class TestExitCodes:
    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_instance_is_invalid_argument(self, tmp_path):
        assert main(["run-ts", "--instance", str(tmp_path / "nope.json"), "--iterations", "1"]) == 2

    def test_bad_model_file_is_invalid_argument(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"not a model\nxxxx")
        assert main(["grad-check", "--model", str(bad)]) == 2

    def test_invalid_density_is_invalid_argument(self, tmp_path):
        assert main([
            "mip-gen", "--family", "set-cover", "--count", "1", "--seed", "1",
            "--n-cols", "40", "--n-rows", "5", "--density", "0.001", "--out", str(tmp_path),
        ]) == 2
