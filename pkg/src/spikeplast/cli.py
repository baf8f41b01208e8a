"""Command line interface.

Subcommands cover the whole workflow: generate or encode data, run a full
experiment from a config file, and inspect or prune a trained snapshot.
All outputs are deterministic for a fixed config and environment.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .data import (
    FAMILY_SINUSOID,
    FAMILY_TRANSIENT,
    SyntheticSpec,
    generate_synthetic,
    load_csv_dataset,
    save_csv_dataset,
)
from .encoding import aer_encode
from .errors import SpikePlastError
from .experiment import (
    prepare_dataset,
    run_experiment,
    run_tuning,
    summarize_output_dir,
    write_raster_csv,
    write_stats_artifacts,
    write_tuning_table,
    _prune_report_dict,
)
from .network import load_model, save_model
from .plasticity import compute_firing_stats
from .pruning import prune_by_rate, suggest_thresholds


def _cmd_print_defaults(args) -> int:
    print(ExperimentConfig.defaults().to_json())
    return 0


def _cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(
        class_count=args.classes,
        channel_count=args.channels,
        timepoint_count=args.timepoints,
        per_class_count=args.per_class,
        family=args.family,
        noise_level=args.noise,
        base_frequency=args.base_frequency,
        frequency_step=args.frequency_step,
        seed=args.seed,
    )
    manifest = save_csv_dataset(generate_synthetic(spec), args.output)
    print(manifest)
    return 0


def _cmd_encode(args) -> int:
    dataset = load_csv_dataset(args.manifest)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, (sample, label) in enumerate(zip(dataset.samples, dataset.labels)):
        train = aer_encode(sample, args.factor, literal_negative=args.literal_negative)
        name = f"e{index:04d}.csv"
        np.savetxt(out / name, train.events, delimiter=",", fmt="%d")
        entries.append({"file": name, "label": label})
    (out / "manifest.json").write_text(json.dumps(
        {"class_names": dataset.class_names, "samples": entries},
        indent=2, sort_keys=True,
    ) + "\n")
    print(out / "manifest.json")
    return 0


def _cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    out = run_experiment(config, args.output)
    summary = summarize_output_dir(out, config.approaches)
    if summary:
        print(summary)
    print(out)
    return 0


def _cmd_tune(args) -> int:
    config = ExperimentConfig.load(args.config)
    dataset = prepare_dataset(config)
    best, points = run_tuning(config, dataset)
    out = Path(args.output if args.output is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_tuning_table(points, out / "tuning_table.csv")
    (out / "best_rates.json").write_text(json.dumps(
        {"theta_pos": best.theta_pos, "theta_neg": best.theta_neg},
        indent=2, sort_keys=True,
    ) + "\n")
    print(f"theta_pos={best.theta_pos:g} theta_neg={best.theta_neg:g}")
    return 0


def _cmd_stats(args) -> int:
    network = load_model(args.model)
    dataset = load_csv_dataset(args.manifest)
    spikes = [
        aer_encode(s, args.factor, literal_negative=args.literal_negative)
        for s in dataset.samples
    ]
    counts = np.zeros(network.config.hidden_count, dtype=np.int64)
    step_totals = []
    total_steps = 0
    for train in spikes:
        raster = network.propagate(train)
        counts += raster.sum(axis=1, dtype=np.int64)
        step_totals.append(raster.sum(axis=0, dtype=np.int64))
        total_steps += train.timepoint_count
    active = network.active_mask
    stats = compute_firing_stats(counts[active], total_steps, step_totals=step_totals)
    out = Path(args.output)
    write_stats_artifacts(stats, out)
    write_raster_csv(network.propagate(spikes[0]), out / "raster.csv")
    print(out)
    return 0


def _cmd_prune(args) -> int:
    network = load_model(args.model)
    if network.training_rates is None:
        raise SpikePlastError("snapshot has no recorded training rates; cannot prune")
    if args.threshold:
        thresholds = list(args.threshold)
    else:
        thresholds = suggest_thresholds(network.training_rates, 1)
    reports = []
    for threshold in thresholds:
        network.restore_all()
        reports.append(_prune_report_dict(prune_by_rate(network, threshold)))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "prune_reports.json").write_text(
        json.dumps({"reports": reports}, indent=2, sort_keys=True) + "\n"
    )
    if args.save_model is not None:
        save_model(network, args.save_model)
    for report in reports:
        print(
            f"threshold {report['threshold']:g}: pruned {report['pruned_count']} "
            f"({report['pruned_fraction']:.1%}), surviving {report['surviving_count']}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikeplast",
        description="Spiking network experiments on multichannel time series.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("print-defaults", help="emit the full default config as JSON")
    p.set_defaults(func=_cmd_print_defaults)

    p = sub.add_parser("gen-synthetic", help="generate a labelled synthetic dataset")
    p.add_argument("-o", "--output", required=True, help="dataset directory")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--channels", type=int, default=14)
    p.add_argument("--timepoints", type=int, default=128)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--family", choices=[FAMILY_SINUSOID, FAMILY_TRANSIENT],
                   default=FAMILY_SINUSOID)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--base-frequency", type=float, default=5.0)
    p.add_argument("--frequency-step", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("encode", help="encode a dataset into event trains")
    p.add_argument("manifest", help="dataset manifest path")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--factor", type=float, default=0.5)
    p.add_argument("--literal-negative", action="store_true")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("-o", "--output", default=None, help="override output_dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("tune", help="grid-search threshold adaptation rates")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("-o", "--output", default=None, help="override output_dir")
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("stats", help="firing statistics of a snapshot on a dataset")
    p.add_argument("model", help="model snapshot (.npz)")
    p.add_argument("manifest", help="dataset manifest path")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--factor", type=float, default=0.5)
    p.add_argument("--literal-negative", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("prune", help="prune a snapshot at given thresholds")
    p.add_argument("model", help="model snapshot (.npz)")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("-t", "--threshold", type=float, action="append",
                   help="rate threshold, repeatable; default: suggest one")
    p.add_argument("--save-model", default=None,
                   help="write the snapshot pruned at the last threshold here")
    p.set_defaults(func=_cmd_prune)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SpikePlastError as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
