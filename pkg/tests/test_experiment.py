"""End-to-end experiment orchestration and its on-disk artifacts."""

import json
from pathlib import Path

import numpy as np
import pytest

from spikeplast.config import ExperimentConfig
from spikeplast.errors import DegenerateSplitError
from spikeplast.experiment import (
    prepare_dataset,
    run_experiment,
    run_tuning,
    summarize_output_dir,
    write_stats_artifacts,
)
from spikeplast.plasticity import compute_firing_stats


def tiny_config(**overrides) -> ExperimentConfig:
    doc = {
        "seed": 6,
        "dataset": {"synthetic": {
            "class_count": 2, "channel_count": 6, "timepoint_count": 64,
            "per_class_count": 6, "seed": 2,
        }},
        "network": {"hidden_count": 40, "lif": {"v_init": 0.02}},
        "approaches": ["stdp_only", "ensemble_pruned"],
        "evaluation": {"kfold": 3, "train_fraction": 0.7, "repeats": 2},
    }
    doc.update(overrides)
    return ExperimentConfig.from_dict(doc)


def tree_bytes(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestPrepareDataset:
    def test_synthetic_with_reduction(self):
        config = tiny_config(preprocess={"reduce_window": 4})
        dataset = prepare_dataset(config)
        assert len(dataset) == 12
        assert dataset.samples[0].values.shape == (6, 16)

    def test_manifest_source(self, tmp_path):
        from spikeplast.data import generate_synthetic, save_csv_dataset

        base = tiny_config()
        manifest = save_csv_dataset(generate_synthetic(base.synthetic), tmp_path / "d")
        config = tiny_config(dataset={"manifest": str(manifest)})
        dataset = prepare_dataset(config)
        assert len(dataset) == 12
        assert dataset.channel_count == 6


class TestRunExperiment:
    def test_writes_the_full_artifact_tree(self, tmp_path):
        out = run_experiment(tiny_config(), tmp_path / "run")
        status = json.loads((out / "status.json").read_text())
        assert status["failed"] is None
        assert status["completed"] == [
            "dataset", "eval_stdp_only", "eval_ensemble_pruned", "final_model",
        ]
        for approach in ("stdp_only", "ensemble_pruned"):
            for name in ("eval_kfold.json", "eval_split.json",
                         "runs_kfold.csv", "runs_split.csv"):
                assert (out / approach / name).exists()
        for name in ("model.npz", "firing_stats.json", "rate_histogram.csv",
                     "avalanche_histogram.csv", "raster.csv"):
            assert (out / "final" / name).exists()
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["seed"] == 6

    def test_rerun_reproduces_every_file_byte_for_byte(self, tmp_path):
        config = tiny_config()
        first = run_experiment(config, tmp_path / "a")
        second = run_experiment(config, tmp_path / "b")
        a, b = tree_bytes(first), tree_bytes(second)
        assert sorted(a) == sorted(b)
        differing = [name for name in a if a[name] != b[name]]
        assert differing == []

    def test_prune_sweep_stage(self, tmp_path):
        config = tiny_config(pruning={"thresholds": [0.0005, 0.001]})
        out = run_experiment(config, tmp_path / "run")
        sweep = json.loads((out / "final" / "prune_sweep.json").read_text())
        assert [r["threshold"] for r in sweep["reports"]] == [0.0005, 0.001]
        status = json.loads((out / "status.json").read_text())
        assert status["completed"][-1] == "prune_sweep"
        # threshold sweep must not leave the final snapshot masked
        from spikeplast.network import load_model

        assert load_model(out / "final" / "model.npz").active_mask.all()

    def test_tuning_stage_rewrites_the_resolved_config(self, tmp_path):
        grid = {"enabled": True, "pos_grid": [1e-3, 5e-3], "neg_grid": [1e-5]}
        out = run_experiment(tiny_config(tuning=grid), tmp_path / "run")
        assert (out / "tuning_table.csv").exists()
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["network"]["ip"]["theta_pos"] in (1e-3, 5e-3)
        assert resolved["network"]["ip"]["theta_neg"] == 1e-5
        status = json.loads((out / "status.json").read_text())
        assert status["completed"][1] == "tuning"

    def test_failure_names_the_stage_and_reraises(self, tmp_path):
        config = tiny_config(evaluation={"kfold": 10, "repeats": 1})
        with pytest.raises(DegenerateSplitError):
            run_experiment(config, tmp_path / "run")
        status = json.loads((tmp_path / "run" / "status.json").read_text())
        assert status["failed"] == "eval_stdp_only"
        assert status["completed"] == ["dataset"]
        assert "DegenerateSplitError" in status["error"]

    def test_summary_lists_each_approach_and_scheme(self, tmp_path):
        config = tiny_config()
        out = run_experiment(config, tmp_path / "run")
        summary = summarize_output_dir(out, config.approaches)
        lines = summary.splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("stdp_only")
        assert "acc" in lines[0] and "kappa" in lines[0]


class TestTuning:
    def test_tuning_is_deterministic(self):
        config = tiny_config(tuning={"enabled": True,
                                     "pos_grid": [1e-3, 5e-3], "neg_grid": [1e-5]})
        dataset = prepare_dataset(config)
        best_a, points_a = run_tuning(config, dataset)
        best_b, points_b = run_tuning(config, dataset)
        assert best_a == best_b
        assert points_a == points_b
        assert len(points_a) == 2


class TestStatsArtifacts:
    def test_histogram_files_parse_back(self, tmp_path, rng):
        counts = rng.integers(0, 50, size=30)
        step_totals = [rng.integers(0, 4, size=100)]
        stats = compute_firing_stats(counts, 200, step_totals=step_totals)
        write_stats_artifacts(stats, tmp_path)
        doc = json.loads((tmp_path / "firing_stats.json").read_text())
        assert doc["entropy_bits"] == stats.entropy_bits
        assert doc["rates"] == [float(r) for r in stats.rates]
        rows = (tmp_path / "rate_histogram.csv").read_text().strip().splitlines()
        header, body = rows[0], rows[1:]
        assert header == "bin_left,bin_right,probability"
        probabilities = [float(line.split(",")[2]) for line in body]
        np.testing.assert_allclose(sum(probabilities), 1.0, rtol=1e-12)
        avalanche = (tmp_path / "avalanche_histogram.csv").read_text().strip().splitlines()
        assert avalanche[0] == "size,count"
        assert len(avalanche) - 1 == len(stats.avalanche_sizes)
