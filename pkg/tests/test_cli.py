import json
import math
import os

import numpy as np
import pytest

from echoevo.cli import (ConfigError, RunConfig, load_run_config, main,
                         run_config_from_dict, run_experiment, summary_stats)
from echoevo.evolution import minimal_echo_genome, EvolutionConfig
from echoevo.genome_io import save_genome
from echoevo.task_harness import (GenerationRecord, RunMetrics,
                                  write_metrics_csv)


def tiny_run_args(out_dir, seed=0, extra=()):
    return ["run", "--network", "echo", "--data", "synthetic",
            "--out", str(out_dir), "--seed", str(seed), "--repeats", "2",
            "--population-size", "14", "--generations", "4",
            "--island-count", "2", "--elite-count", "2",
            "--subset-fraction", "0.5",
            "--synth-train-size", "16", "--synth-validation-size", "8",
            "--synth-test-size", "8", *extra]


class TestConfigHandling:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({"networks": "echo"})

    def test_unknown_section_key_rejected(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({"evolution": {"population": 10}})

    def test_real_data_requires_directory(self):
        with pytest.raises(ConfigError):
            RunConfig(data="real").validate()

    def test_section_values_are_validated(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({"synth": {"train_size": 7}}).validate()

    def test_nested_config_round_trip(self):
        cfg = run_config_from_dict({
            "network": "rnn",
            "seed": 11,
            "evolution": {"population_size": 40},
            "task": {"window_width": 4},
        })
        assert cfg.network == "rnn"
        assert cfg.evolution.population_size == 40
        assert cfg.task.window_width == 4
        assert cfg.evolution.generations == EvolutionConfig().generations

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 3, "repeats": 2}))
        cfg = load_run_config(path)
        assert cfg.seed == 3 and cfg.repeats == 2


class TestSummaryStats:
    def test_two_values(self):
        stats = summary_stats([0.5, 0.7])
        assert stats["mean"] == pytest.approx(0.6)
        assert stats["std"] == pytest.approx(0.7071067811865476 * 0.2)
        assert stats["min"] == 0.5 and stats["max"] == 0.7
        assert stats["count"] == 2

    def test_single_value_has_zero_std(self):
        assert summary_stats([0.8])["std"] == 0.0


class TestRunCommand:
    def test_tiny_run_produces_artifacts(self, tmp_path, capsys):
        out = tmp_path / "exp"
        assert main(tiny_run_args(out)) == 0
        stdout = capsys.readouterr().out
        assert "test accuracy" in stdout
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["runs"]) == 2
        assert 0.0 <= manifest["summary"]["mean"] <= 1.0
        for r in range(2):
            run_dir = out / f"run_{r:02d}"
            assert (run_dir / "metrics.csv").exists()
            assert (run_dir / "champion_final.json").exists()
            assert (run_dir / "champion_final.dot").exists()
            assert (run_dir / "config.json").exists()
            assert list((run_dir / "champions").glob("champion_gen*.json"))

    def test_flags_reach_the_recorded_config(self, tmp_path):
        out = tmp_path / "exp"
        assert main(tiny_run_args(out, seed=7)) == 0
        recorded = json.loads((out / "run_00" / "config.json").read_text())
        assert recorded["run_index"] == 0
        assert recorded["seed"] == 7
        assert recorded["evolution"]["population_size"] == 14
        assert recorded["synth"]["train_size"] == 16

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "base.json"
        cfg_path.write_text(json.dumps({
            "seed": 1,
            "repeats": 1,
            "evolution": {"population_size": 12, "generations": 3,
                          "elite_count": 2},
            "synth": {"train_size": 12, "validation_size": 6, "test_size": 6},
        }))
        out = tmp_path / "exp"
        code = main(["run", "--config", str(cfg_path), "--seed", "9",
                     "--out", str(out)])
        assert code == 0
        recorded = json.loads((out / "run_00" / "config.json").read_text())
        assert recorded["seed"] == 9                       # flag wins
        assert recorded["evolution"]["population_size"] == 12  # file survives

    def test_same_seed_reproduces_artifacts_byte_for_byte(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(tiny_run_args(out_a, seed=5)) == 0
        assert main(tiny_run_args(out_b, seed=5)) == 0
        for r in range(2):
            for name in ("metrics.csv", "champion_final.json",
                         "champion_final.dot"):
                pa = out_a / f"run_{r:02d}" / name
                pb = out_b / f"run_{r:02d}" / name
                assert pa.read_bytes() == pb.read_bytes(), name
            champs_a = sorted(p.name for p in
                              (out_a / f"run_{r:02d}" / "champions").iterdir())
            champs_b = sorted(p.name for p in
                              (out_b / f"run_{r:02d}" / "champions").iterdir())
            assert champs_a == champs_b
            for name in champs_a:
                assert (out_a / f"run_{r:02d}" / "champions" / name).read_bytes() == \
                    (out_b / f"run_{r:02d}" / "champions" / name).read_bytes()

    def test_different_seeds_diverge(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(tiny_run_args(out_a, seed=0)) == 0
        assert main(tiny_run_args(out_b, seed=123)) == 0
        # the tiny task can saturate fitness, so compare the genomes
        assert (out_a / "run_00" / "champion_final.json").read_bytes() != \
            (out_b / "run_00" / "champion_final.json").read_bytes()

    def test_rnn_network_runs(self, tmp_path):
        out = tmp_path / "exp"
        args = tiny_run_args(out)
        args[args.index("--network") + 1] = "rnn"
        assert main(args) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["network"] == "rnn"


class TestExportDot:
    def test_to_stdout(self, tmp_path, capsys):
        genome = minimal_echo_genome(EvolutionConfig(), np.random.default_rng(0))
        path = tmp_path / "g.json"
        save_genome(genome, path)
        assert main(["export-dot", str(path), "--name", "sample"]) == 0
        out = capsys.readouterr().out
        assert out.startswith('digraph "sample" {')

    def test_to_file(self, tmp_path):
        genome = minimal_echo_genome(EvolutionConfig(), np.random.default_rng(0))
        path = tmp_path / "g.json"
        save_genome(genome, path)
        out_path = tmp_path / "g.dot"
        assert main(["export-dot", str(path), "--out", str(out_path)]) == 0
        assert out_path.read_text().startswith("digraph")

    def test_missing_file_is_a_data_error(self, tmp_path):
        assert main(["export-dot", str(tmp_path / "absent.json")]) == 3


class TestSummarize:
    def write_run(self, run_dir, network, test_accuracy):
        os.makedirs(run_dir)
        metrics = RunMetrics(
            records=[GenerationRecord(0, 2.0, 1, 0.5, True)],
            champion_generation=0, test_accuracy=test_accuracy)
        write_metrics_csv(metrics, os.path.join(run_dir, "metrics.csv"))
        with open(os.path.join(run_dir, "config.json"), "w") as fh:
            json.dump({"network": network}, fh)

    def test_grouped_table(self, tmp_path, capsys):
        self.write_run(tmp_path / "run_00", "echo", 0.5)
        self.write_run(tmp_path / "run_01", "echo", 0.7)
        self.write_run(tmp_path / "run_02", "rnn", 0.9)
        assert main(["summarize", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        echo_line = next(l for l in out.splitlines() if l.startswith("echo"))
        fields = echo_line.split()
        assert fields[1] == "2"
        assert float(fields[2]) == pytest.approx(0.6)
        assert float(fields[3]) == pytest.approx(math.sqrt(0.02), abs=1e-4)
        assert float(fields[4]) == 0.5 and float(fields[5]) == 0.7
        rnn_line = next(l for l in out.splitlines() if l.startswith("rnn"))
        assert rnn_line.split()[1] == "1"

    def test_empty_directory_is_a_data_error(self, tmp_path):
        assert main(["summarize", str(tmp_path)]) == 3


class TestExitCodes:
    def test_config_errors_exit_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"no_such_key": 1}))
        assert main(["run", "--config", str(bad)]) == 2
        assert main(["run", "--data", "real", "--out", str(tmp_path / "x")]) == 2
        assert main(["run", "--synth-train-size", "7",
                     "--out", str(tmp_path / "y")]) == 2

    def test_missing_data_directory_exits_three(self, tmp_path):
        assert main(["run", "--data", "real",
                     "--data-dir", str(tmp_path / "absent"),
                     "--out", str(tmp_path / "out")]) == 3


class TestRunExperimentApi:
    def test_returns_manifest_and_calls_log(self, tmp_path):
        cfg = run_config_from_dict({
            "out_dir": str(tmp_path / "exp"),
            "repeats": 1,
            "evolution": {"population_size": 10, "generations": 3,
                          "elite_count": 2},
            "synth": {"train_size": 12, "validation_size": 6, "test_size": 6},
        })
        lines = []
        manifest = run_experiment(cfg, log=lines.append)
        assert manifest["summary"]["count"] == 1
        assert len(lines) == 1 and lines[0].startswith("run 0:")
