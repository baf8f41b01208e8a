"""Experiment orchestration: dataset to artifact directory, deterministically.

A run writes, under the output directory:

    resolved_config.json        the exact configuration used
    status.json                 completed stages, or the failing stage
    tuning_table.csv            one row per grid point (when tuning is on)
    <approach>/eval_kfold.json  cross-validation report
    <approach>/eval_split.json  repeated split report
    <approach>/runs_*.csv       one row per run
    final/model.npz             trained network snapshot
    final/firing_stats.json     rates, entropy, activation breadth
    final/rate_histogram.csv    rate PDF bins
    final/avalanche_histogram.csv
    final/raster.csv            hidden raster of the first training sample
    final/prune_sweep.json      per-threshold reports (when thresholds given)

No artifact embeds a timestamp or hostname: rerunning the same config in the
same environment reproduces every file byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .data import Dataset, generate_synthetic, load_csv_dataset, reduce_dataset
from .evaluation import (
    APPROACH_PRUNED,
    encode_dataset,
    run_kfold,
    run_split_repeats,
    stratified_split,
    write_runs_csv,
)
from .network import Network, save_model
from .neuron import IpRates
from .plasticity import FiringStats, TuningPoint, select_ip_rates, sweep_ip_rates
from .pruning import PruneReport, prune_by_rate

FINAL_DIR = "final"


def prepare_dataset(config: ExperimentConfig) -> Dataset:
    """Load or generate the dataset and apply window reduction."""
    if config.dataset_manifest is not None:
        dataset = load_csv_dataset(config.dataset_manifest)
    else:
        dataset = generate_synthetic(config.synthetic)
    if config.reduce_window is not None:
        dataset = reduce_dataset(dataset, config.reduce_window)
    return dataset


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_stats_artifacts(stats: FiringStats, directory: Path) -> None:
    """Persist one training pass's firing statistics as JSON plus histograms."""
    directory.mkdir(parents=True, exist_ok=True)
    _write_json(directory / "firing_stats.json", {
        "entropy_bits": stats.entropy_bits,
        "active_fraction": stats.active_fraction,
        "mean_rate": stats.mean_rate,
        "rates": [float(r) for r in stats.rates],
    })
    with open(directory / "rate_histogram.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_left", "bin_right", "probability"])
        for i, p in enumerate(stats.rate_pdf):
            writer.writerow([
                repr(float(stats.bin_edges[i])),
                repr(float(stats.bin_edges[i + 1])),
                repr(float(p)),
            ])
    with open(directory / "avalanche_histogram.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["size", "count"])
        for size, count in zip(stats.avalanche_sizes, stats.avalanche_counts):
            writer.writerow([int(size), int(count)])


def write_raster_csv(raster: np.ndarray, path: Path) -> None:
    np.savetxt(path, np.asarray(raster, dtype=np.int64), delimiter=",", fmt="%d")


def write_tuning_table(points: list[TuningPoint], path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta_pos", "theta_neg", "active_fraction", "entropy_bits"])
        for point in points:
            writer.writerow([
                repr(point.theta_pos), repr(point.theta_neg),
                repr(point.active_fraction), repr(point.entropy_bits),
            ])


def run_tuning(
    config: ExperimentConfig,
    dataset: Dataset,
) -> tuple[IpRates, list[TuningPoint]]:
    """Grid-search adaptation rates on a stratified training split.

    Every grid point trains a fresh network from the same derived seed, so
    the comparison isolates the rate setting.
    """
    spikes = encode_dataset(dataset, config.encoding_factor,
                            literal_negative=config.literal_negative)
    harness = np.random.default_rng(config.seed)
    train_idx, _ = stratified_split(dataset.labels, config.train_fraction, harness)
    train_spikes = [spikes[i] for i in train_idx]
    net_seed = int(harness.integers(0, 2**63))
    net_config = config.network_config(dataset.channel_count)

    def train_fn(rates: IpRates) -> FiringStats:
        network = Network(replace(net_config, ip=rates, seed=net_seed))
        return network.train_unsupervised(train_spikes, "ensemble")

    points = sweep_ip_rates(train_fn, list(config.tuning_pos_grid),
                            list(config.tuning_neg_grid))
    return select_ip_rates(points), points


def _prune_report_dict(report: PruneReport) -> dict:
    return {
        "threshold": report.threshold,
        "pruned_count": int(report.pruned_indices.size),
        "pruned_fraction": report.pruned_fraction,
        "surviving_count": report.surviving_count,
        "pruned_indices": [int(i) for i in report.pruned_indices],
    }


def run_experiment(config: ExperimentConfig, output_dir=None) -> Path:
    """Execute every configured stage; returns the output directory.

    ``status.json`` lists the completed stages. On error it additionally
    names the failing stage and message, partial artifacts stay on disk and
    the exception propagates.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(config.to_json() + "\n")
    completed: list[str] = []
    stage = "dataset"
    try:
        dataset = prepare_dataset(config)
        completed.append(stage)

        if config.tuning_enabled:
            stage = "tuning"
            best, points = run_tuning(config, dataset)
            write_tuning_table(points, out / "tuning_table.csv")
            config = replace(config, ip=best)
            (out / "resolved_config.json").write_text(config.to_json() + "\n")
            completed.append(stage)

        net_config = config.network_config(dataset.channel_count)
        prune_setting = (
            config.prune_thresholds[0] if config.prune_thresholds else "auto"
        )
        for approach in config.approaches:
            stage = f"eval_{approach}"
            approach_dir = out / approach
            approach_dir.mkdir(exist_ok=True)
            threshold = prune_setting if approach == APPROACH_PRUNED else None
            kfold_report = run_kfold(
                dataset, net_config, approach, config.kfold,
                aer_factor=config.encoding_factor,
                literal_negative=config.literal_negative,
                base_seed=config.seed,
                prune_threshold=threshold,
            )
            split_report = run_split_repeats(
                dataset, net_config, approach, config.train_fraction, config.repeats,
                aer_factor=config.encoding_factor,
                literal_negative=config.literal_negative,
                base_seed=config.seed,
                prune_threshold=threshold,
            )
            (approach_dir / "eval_kfold.json").write_text(kfold_report.to_json() + "\n")
            (approach_dir / "eval_split.json").write_text(split_report.to_json() + "\n")
            write_runs_csv(kfold_report, approach_dir / "runs_kfold.csv")
            write_runs_csv(split_report, approach_dir / "runs_split.csv")
            completed.append(stage)

        stage = "final_model"
        final_dir = out / FINAL_DIR
        final_dir.mkdir(exist_ok=True)
        spikes = encode_dataset(dataset, config.encoding_factor,
                                literal_negative=config.literal_negative)
        harness = np.random.default_rng(config.seed)
        train_idx, _ = stratified_split(dataset.labels, config.train_fraction, harness)
        final_seed = int(harness.integers(0, 2**63))
        mode = "stdp_only" if list(config.approaches) == ["stdp_only"] else "ensemble"
        network = Network(replace(net_config, seed=final_seed))
        train_spikes = [spikes[i] for i in train_idx]
        stats = network.train_unsupervised(train_spikes, mode)
        network.train_classifier(train_spikes, [dataset.labels[i] for i in train_idx])
        save_model(network, final_dir / "model.npz")
        write_stats_artifacts(stats, final_dir)
        write_raster_csv(network.propagate(train_spikes[0]), final_dir / "raster.csv")
        completed.append(stage)

        if config.prune_thresholds:
            stage = "prune_sweep"
            reports = []
            for threshold in config.prune_thresholds:
                network.restore_all()
                reports.append(_prune_report_dict(prune_by_rate(network, threshold)))
            network.restore_all()
            _write_json(final_dir / "prune_sweep.json", {"reports": reports})
            completed.append(stage)
    except Exception as exc:
        _write_json(out / "status.json", {
            "completed": completed,
            "failed": stage,
            "error": f"{type(exc).__name__}: {exc}",
        })
        raise
    _write_json(out / "status.json", {"completed": completed, "failed": None, "error": None})
    return out


def summarize_output_dir(out: Path, approaches) -> str:
    """Console summary from a run's artifacts: one line per approach and scheme."""
    lines = []
    for approach in approaches:
        for scheme, filename in (("kfold", "eval_kfold.json"), ("split", "eval_split.json")):
            path = out / approach / filename
            if not path.exists():
                continue
            agg = json.loads(path.read_text())["aggregate"]
            lines.append(
                f"{approach:16s} {scheme:6s} "
                f"acc {agg['accuracy']['mean']:.3f} +/- {agg['accuracy']['std']:.3f}  "
                f"f1 {agg['f1_macro']['mean']:.3f}  kappa {agg['kappa']['mean']:.3f}"
            )
    return "\n".join(lines)
