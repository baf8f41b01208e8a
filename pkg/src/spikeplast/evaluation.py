"""Evaluation harness: metrics, stratified resampling and significance tests.

Approaches under comparison:

    "stdp_only"        synaptic plasticity alone during unsupervised training
    "ensemble"         synaptic plasticity plus threshold adaptation
    "ensemble_pruned"  ensemble training followed by spike-rate pruning

Each run trains a fresh network (its seed drawn from the harness seed and
recorded), grows the classifier gallery, optionally prunes, and scores the
held-out samples with accuracy, macro-averaged F1 and Cohen's kappa.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace, asdict

import numpy as np
from scipy.special import stdtr

from .data import Dataset
from .encoding import SpikeTrain, aer_encode
from .errors import DegenerateSplitError, InsufficientDataError
from .network import MODE_ENSEMBLE, MODE_STDP_ONLY, Network, NetworkConfig
from .pruning import prune_by_rate, suggest_thresholds

APPROACH_STDP = "stdp_only"
APPROACH_ENSEMBLE = "ensemble"
APPROACH_PRUNED = "ensemble_pruned"
APPROACHES = (APPROACH_STDP, APPROACH_ENSEMBLE, APPROACH_PRUNED)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Integer confusion counts, rows = true class, columns = predicted."""

    counts: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        c = len(self.class_names)
        if counts.shape != (c, c):
            raise ValueError(f"counts shape {counts.shape} != ({c}, {c})")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_predictions(cls, y_true, y_pred, class_names: list[str]) -> "ConfusionMatrix":
        if len(y_true) != len(y_pred):
            raise ValueError(f"{len(y_true)} truths vs {len(y_pred)} predictions")
        index = {name: i for i, name in enumerate(class_names)}
        counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
        for truth, pred in zip(y_true, y_pred):
            if truth not in index or pred not in index:
                raise ValueError(f"label outside class table: {truth!r} / {pred!r}")
            counts[index[truth], index[pred]] += 1
        return cls(counts=counts, class_names=list(class_names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    f1_macro: float
    kappa: float


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """Accuracy, macro-averaged F1 and Cohen's kappa from one confusion matrix.

    Per-class F1 treats an undefined precision, recall or F1 as zero; the
    macro average runs over every class in the table. Kappa degenerates to
    1.0 when chance agreement is total and observed agreement is too, else
    0.0 in that case.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    diag = np.diag(counts)
    accuracy = float(diag.sum() / total)

    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    f1_values = []
    for i in range(len(cm.class_names)):
        precision = diag[i] / col[i] if col[i] > 0 else 0.0
        recall = diag[i] / row[i] if row[i] > 0 else 0.0
        f1_values.append(
            2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        )
    f1_macro = float(np.mean(f1_values))

    p_observed = accuracy
    p_expected = float((row * col).sum() / (total * total))
    if p_expected == 1.0:
        kappa = 1.0 if p_observed == 1.0 else 0.0
    else:
        kappa = (p_observed - p_expected) / (1.0 - p_expected)
    return Metrics(accuracy=accuracy, f1_macro=f1_macro, kappa=float(kappa))


# --- stratified resampling ---


def stratified_folds(labels: list[str], k: int, rng: np.random.Generator) -> np.ndarray:
    """Assign each sample to one of k folds, class-balanced.

    Within each class the (shuffled) members go round-robin over folds.
    Raises DegenerateSplitError when any class has fewer than k samples.
    """
    if k < 2:
        raise DegenerateSplitError(f"k must be >= 2, got {k}")
    labels = np.asarray(labels)
    assignment = np.empty(len(labels), dtype=np.int64)
    for name in np.unique(labels):
        members = np.flatnonzero(labels == name)
        if members.size < k:
            raise DegenerateSplitError(
                f"class {name!r} has {members.size} samples, fewer than k={k}"
            )
        members = rng.permutation(members)
        assignment[members] = np.arange(members.size) % k
    return assignment


def stratified_split(
    labels: list[str],
    train_fraction: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Class-balanced train/test index split; both sides keep every class."""
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    labels = np.asarray(labels)
    train_idx, test_idx = [], []
    for name in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == name))
        n_train = int(members.size * train_fraction + 0.5)
        if n_train < 1 or n_train >= members.size:
            raise DegenerateSplitError(
                f"class {name!r} with {members.size} samples cannot give both "
                f"train and test members at fraction {train_fraction}"
            )
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx))


# --- the per-run pipeline ---


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one train/evaluate cycle."""

    run_index: int
    network_seed: int
    accuracy: float
    f1_macro: float
    kappa: float
    mean_training_rate: float
    prune_threshold: float | None = None
    surviving_count: int | None = None


@dataclass(frozen=True)
class EvalReport:
    """All runs of one approach under one resampling scheme, plus aggregates."""

    approach: str
    scheme: str
    base_seed: int
    class_names: list[str]
    runs: list[RunRecord]
    confusion_total: np.ndarray

    def metric_values(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.runs], dtype=np.float64)

    def aggregate(self) -> dict:
        out = {}
        for name in ("accuracy", "f1_macro", "kappa", "mean_training_rate"):
            values = self.metric_values(name)
            out[name] = {
                "mean": float(values.mean()),
                "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
                "min": float(values.min()),
                "max": float(values.max()),
            }
        return out

    def to_dict(self) -> dict:
        return {
            "approach": self.approach,
            "scheme": self.scheme,
            "base_seed": self.base_seed,
            "class_names": list(self.class_names),
            "aggregate": self.aggregate(),
            "confusion_total": self.confusion_total.tolist(),
            "runs": [asdict(r) for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def write_runs_csv(report: EvalReport, path) -> None:
    """One row per run: seed, metrics and pruning outcome."""
    fields = [
        "run_index", "network_seed", "accuracy", "f1_macro", "kappa",
        "mean_training_rate", "prune_threshold", "surviving_count",
    ]
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        for run in report.runs:
            writer.writerow({k: ("" if v is None else v) for k, v in asdict(run).items()})


def encode_dataset(
    dataset: Dataset,
    factor: float = 0.5,
    *,
    literal_negative: bool = False,
) -> list[SpikeTrain]:
    return [aer_encode(s, factor, literal_negative=literal_negative) for s in dataset.samples]


def execute_run(
    train_spikes: list[SpikeTrain],
    train_labels: list[str],
    test_spikes: list[SpikeTrain],
    test_labels: list[str],
    class_names: list[str],
    config: NetworkConfig,
    approach: str,
    network_seed: int,
    prune_threshold: float | str | None = None,
) -> tuple[Metrics, ConfusionMatrix, RunRecord]:
    """Train one fresh network and score it on the held-out samples."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}")
    network = Network(replace(config, seed=network_seed))
    mode = MODE_STDP_ONLY if approach == APPROACH_STDP else MODE_ENSEMBLE
    stats = network.train_unsupervised(train_spikes, mode)
    network.train_classifier(train_spikes, train_labels)
    threshold = surviving = None
    if approach == APPROACH_PRUNED:
        if prune_threshold in (None, "auto"):
            resolved = suggest_thresholds(stats, 1)[0]
        else:
            resolved = float(prune_threshold)
        prune = prune_by_rate(network, resolved)
        threshold, surviving = prune.threshold, prune.surviving_count
    predictions = [network.infer(s)[0] for s in test_spikes]
    cm = ConfusionMatrix.from_predictions(test_labels, predictions, class_names)
    metrics = compute_metrics(cm)
    record = RunRecord(
        run_index=-1,
        network_seed=network_seed,
        accuracy=metrics.accuracy,
        f1_macro=metrics.f1_macro,
        kappa=metrics.kappa,
        mean_training_rate=stats.mean_rate,
        prune_threshold=threshold,
        surviving_count=surviving,
    )
    return metrics, cm, record


def run_kfold(
    dataset: Dataset,
    config: NetworkConfig,
    approach: str,
    k: int = 5,
    *,
    aer_factor: float = 0.5,
    literal_negative: bool = False,
    base_seed: int | None = None,
    prune_threshold: float | str | None = None,
) -> EvalReport:
    """Stratified k-fold cross-validation of one approach."""
    base_seed = config.seed if base_seed is None else base_seed
    spikes = encode_dataset(dataset, aer_factor, literal_negative=literal_negative)
    harness = np.random.default_rng(base_seed)
    assignment = stratified_folds(dataset.labels, k, harness)
    seeds = harness.integers(0, 2**63, size=k)
    labels = np.asarray(dataset.labels)
    runs = []
    confusion_total = np.zeros((len(dataset.class_names),) * 2, dtype=np.int64)
    for fold in range(k):
        test_mask = assignment == fold
        train_idx = np.flatnonzero(~test_mask)
        test_idx = np.flatnonzero(test_mask)
        _, cm, record = execute_run(
            [spikes[i] for i in train_idx], list(labels[train_idx]),
            [spikes[i] for i in test_idx], list(labels[test_idx]),
            dataset.class_names, config, approach, int(seeds[fold]), prune_threshold,
        )
        runs.append(replace(record, run_index=fold))
        confusion_total += cm.counts
    return EvalReport(
        approach=approach, scheme=f"kfold{k}", base_seed=base_seed,
        class_names=list(dataset.class_names), runs=runs, confusion_total=confusion_total,
    )


def run_split_repeats(
    dataset: Dataset,
    config: NetworkConfig,
    approach: str,
    train_fraction: float = 0.7,
    repeats: int = 30,
    *,
    aer_factor: float = 0.5,
    literal_negative: bool = False,
    base_seed: int | None = None,
    prune_threshold: float | str | None = None,
) -> EvalReport:
    """Repeated stratified train/test splits, a fresh split and seed per repeat."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    base_seed = config.seed if base_seed is None else base_seed
    spikes = encode_dataset(dataset, aer_factor, literal_negative=literal_negative)
    harness = np.random.default_rng(base_seed)
    labels = np.asarray(dataset.labels)
    runs = []
    confusion_total = np.zeros((len(dataset.class_names),) * 2, dtype=np.int64)
    for repeat in range(repeats):
        train_idx, test_idx = stratified_split(dataset.labels, train_fraction, harness)
        seed = int(harness.integers(0, 2**63))
        _, cm, record = execute_run(
            [spikes[i] for i in train_idx], list(labels[train_idx]),
            [spikes[i] for i in test_idx], list(labels[test_idx]),
            dataset.class_names, config, approach, seed, prune_threshold,
        )
        runs.append(replace(record, run_index=repeat))
        confusion_total += cm.counts
    return EvalReport(
        approach=approach, scheme=f"split{train_fraction:g}x{repeats}", base_seed=base_seed,
        class_names=list(dataset.class_names), runs=runs, confusion_total=confusion_total,
    )


# --- significance ---


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    dof: float


def two_sample_t(a, b) -> TTestResult:
    """Welch's two-sample t-test, two-sided.

    Handles the zero-variance corner explicitly: identical means give
    t = 0, p = 1; different means with no variance give an infinite
    statistic and p = 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InsufficientDataError("both samples need at least 2 observations")
    mean_a, mean_b = a.mean(), b.mean()
    se_a = a.var(ddof=1) / a.size
    se_b = b.var(ddof=1) / b.size
    se2 = se_a + se_b
    if se2 == 0.0:
        if mean_a == mean_b:
            return TTestResult(0.0, 1.0, float(a.size + b.size - 2))
        return TTestResult(
            float(np.inf) if mean_a > mean_b else float(-np.inf), 0.0,
            float(a.size + b.size - 2),
        )
    t = float((mean_a - mean_b) / np.sqrt(se2))
    dof = float(se2**2 / (se_a**2 / (a.size - 1) + se_b**2 / (b.size - 1)))
    p = float(2.0 * stdtr(dof, -abs(t)))
    return TTestResult(t, p, dof)
