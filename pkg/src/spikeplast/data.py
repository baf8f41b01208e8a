"""Dataset loading, window reduction and synthetic signal generation.

A dataset on disk is a JSON manifest next to one CSV file per sample. Each
CSV holds one sample as rows of comma-separated floats, one row per channel.
The manifest lists the class names and the (file, label) pairs:

    {
      "class_names": ["left", "right"],
      "samples": [
        {"file": "s0000.csv", "label": "left"},
        ...
      ]
    }

Synthetic datasets come in two families. "sinusoid_mix" gives every class a
distinct fundamental frequency whose harmonics are mixed with per-channel
amplitudes and phases, plus per-sample phase jitter. "band_transient" rides
a class-timed oscillatory burst on top of smoothed background noise, so
classes differ in when the transient lands. Both are pure functions of their
spec (the seed lives inside it).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import AnalogSample
from .errors import (
    DatasetParseError,
    InvalidSpecError,
    MissingLabelError,
    MixedChannelCountsError,
    NonFiniteInputError,
)

FAMILY_SINUSOID = "sinusoid_mix"
FAMILY_TRANSIENT = "band_transient"


@dataclass(frozen=True)
class Dataset:
    """In-memory dataset: parallel sample and label lists plus the class table."""

    samples: list[AnalogSample]
    labels: list[str]
    class_names: list[str]

    def __post_init__(self):
        if len(self.samples) != len(self.labels):
            raise MissingLabelError(
                f"{len(self.samples)} samples but {len(self.labels)} labels"
            )
        unknown = set(self.labels) - set(self.class_names)
        if unknown:
            raise MissingLabelError(f"labels outside the class table: {sorted(unknown)}")
        channel_counts = {s.channel_count for s in self.samples}
        if len(channel_counts) > 1:
            raise MixedChannelCountsError(
                f"samples disagree on channel count: {sorted(channel_counts)}"
            )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def channel_count(self) -> int:
        return self.samples[0].channel_count if self.samples else 0


def _read_sample_csv(path: Path) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except OSError as exc:
        raise DatasetParseError(f"{path}: {exc}") from exc
    except ValueError as exc:
        # loadtxt reports the offending line number in its message
        raise DatasetParseError(f"{path}: {exc}") from exc
    bad_rows = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if bad_rows.size:
        raise NonFiniteInputError(
            f"{path}: non-finite values in row(s) {bad_rows.tolist()}"
        )
    return values


def load_csv_dataset(manifest_path) -> Dataset:
    """Load a dataset from its JSON manifest; file paths resolve relative to it."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise DatasetParseError(f"{manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetParseError(f"{manifest_path}: invalid JSON ({exc})") from exc
    if not isinstance(manifest, dict) or "samples" not in manifest:
        raise DatasetParseError(f"{manifest_path}: manifest must be an object with 'samples'")
    entries = manifest["samples"]
    class_names = manifest.get("class_names")

    samples, labels = [], []
    base = manifest_path.parent
    for position, entry in enumerate(entries):
        if not isinstance(entry, dict) or "file" not in entry:
            raise DatasetParseError(
                f"{manifest_path}: sample entry {position} lacks a 'file' field"
            )
        if "label" not in entry or entry["label"] is None:
            raise MissingLabelError(
                f"{manifest_path}: sample entry {position} ({entry['file']}) has no label"
            )
        values = _read_sample_csv(base / entry["file"])
        samples.append(AnalogSample(values))
        labels.append(str(entry["label"]))

    if class_names is None:
        class_names = sorted(set(labels))
    class_names = [str(name) for name in class_names]

    shapes = {s.values.shape for s in samples}
    if len({shape[0] for shape in shapes}) > 1:
        raise MixedChannelCountsError(
            f"{manifest_path}: samples disagree on channel count: "
            f"{sorted({shape[0] for shape in shapes})}"
        )
    if len({shape[1] for shape in shapes}) > 1:
        raise DatasetParseError(
            f"{manifest_path}: samples disagree on timepoint count: "
            f"{sorted({shape[1] for shape in shapes})}"
        )
    return Dataset(samples=samples, labels=labels, class_names=class_names)


def save_csv_dataset(dataset: Dataset, directory, manifest_name: str = "manifest.json") -> Path:
    """Write a dataset as one CSV per sample plus a manifest; returns the manifest path.

    Floats are written with enough digits to round-trip exactly, so
    load(save(dataset)) is value-identical.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, (sample, label) in enumerate(zip(dataset.samples, dataset.labels)):
        name = f"s{index:04d}.csv"
        np.savetxt(directory / name, sample.values, delimiter=",", fmt="%.17g")
        entries.append({"file": name, "label": label})
    manifest = {"class_names": dataset.class_names, "samples": entries}
    manifest_path = directory / manifest_name
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def reduce_window(sample: AnalogSample, window: int) -> AnalogSample:
    """Average non-overlapping blocks of ``window`` timepoints per channel.

    A trailing block shorter than the window is averaged over its actual
    length. The output has ceil(timepoints / window) columns.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    values = sample.values
    channels, timepoints = values.shape
    blocks = math.ceil(timepoints / window)
    if blocks < 2:
        raise ValueError(
            f"window {window} leaves {blocks} timepoint(s); encoding needs at least 2"
        )
    full = timepoints // window
    reduced = np.empty((channels, blocks))
    if full:
        reduced[:, :full] = values[:, : full * window].reshape(channels, full, window).mean(axis=2)
    if blocks > full:
        reduced[:, full] = values[:, full * window :].mean(axis=1)
    return AnalogSample(reduced)


def reduce_dataset(dataset: Dataset, window: int) -> Dataset:
    """Apply ``reduce_window`` to every sample."""
    return Dataset(
        samples=[reduce_window(s, window) for s in dataset.samples],
        labels=list(dataset.labels),
        class_names=list(dataset.class_names),
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic dataset; generation is pure in this object."""

    class_count: int = 3
    channel_count: int = 14
    timepoint_count: int = 128
    per_class_count: int = 20
    family: str = FAMILY_SINUSOID
    noise_level: float = 0.05
    base_frequency: float = 5.0
    frequency_step: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.class_count < 2:
            raise InvalidSpecError("need at least 2 classes")
        if self.channel_count < 1 or self.timepoint_count < 4:
            raise InvalidSpecError("need >= 1 channel and >= 4 timepoints")
        if self.per_class_count < 1:
            raise InvalidSpecError("need >= 1 sample per class")
        if self.family not in (FAMILY_SINUSOID, FAMILY_TRANSIENT):
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if self.noise_level < 0 or not math.isfinite(self.noise_level):
            raise InvalidSpecError("noise_level must be finite and >= 0")
        if self.base_frequency <= 0 or self.frequency_step <= 0:
            raise InvalidSpecError("base_frequency and frequency_step must be > 0")


def wrist_like_spec(**overrides) -> SyntheticSpec:
    """Shape of a forearm-sensor gesture set: 14 channels, 128-step windows.

    The noise level is calibrated so the plain-STDP regime is visibly harder
    than the regulated one, mirroring the operating point the approach
    comparison is about.
    """
    base = dict(
        class_count=3, channel_count=14, timepoint_count=128, per_class_count=20,
        family=FAMILY_SINUSOID, noise_level=0.1, seed=0,
    )
    base.update(overrides)
    return SyntheticSpec(**base)


def deap_like_spec(**overrides) -> SyntheticSpec:
    """Shape of a 32-channel EEG trial set with long windows."""
    base = dict(
        class_count=2, channel_count=32, timepoint_count=8064, per_class_count=12,
        family=FAMILY_SINUSOID, noise_level=0.05, seed=0,
    )
    base.update(overrides)
    return SyntheticSpec(**base)


def _sinusoid_class_bank(spec: SyntheticSpec, rng: np.random.Generator):
    fundamentals = spec.base_frequency + spec.frequency_step * np.arange(spec.class_count)
    amplitudes = rng.uniform(0.5, 1.0, size=(spec.class_count, spec.channel_count, 3))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(spec.class_count, spec.channel_count, 3))
    return fundamentals, amplitudes, phases


def _sinusoid_sample(spec, rng, fundamentals, amplitudes, phases, cls) -> np.ndarray:
    t = np.arange(spec.timepoint_count) / spec.timepoint_count
    harmonics = fundamentals[cls] * np.array([1.0, 2.0, 3.0])
    jitter = rng.uniform(-0.3, 0.3, size=(spec.channel_count, 3))
    values = np.zeros((spec.channel_count, spec.timepoint_count))
    for k in range(3):
        angle = (
            2.0 * np.pi * harmonics[k] * t[None, :]
            + (phases[cls, :, k] + jitter[:, k])[:, None]
        )
        values += amplitudes[cls, :, k][:, None] * np.sin(angle)
    if spec.noise_level > 0:
        values += spec.noise_level * rng.standard_normal(values.shape)
    return values


def _transient_class_bank(spec: SyntheticSpec, rng: np.random.Generator):
    centers = (np.arange(spec.class_count) + 1.0) / (spec.class_count + 1.0)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(spec.class_count, spec.channel_count))
    return centers, phases


def _transient_sample(spec, rng, centers, phases, cls) -> np.ndarray:
    n = spec.timepoint_count
    t = np.arange(n) / n
    background = rng.standard_normal((spec.channel_count, n))
    kernel = np.ones(5) / 5.0
    for ch in range(spec.channel_count):
        background[ch] = np.convolve(background[ch], kernel, mode="same")
    center = centers[cls] + rng.uniform(-0.02, 0.02)
    width = 1.0 / 12.0
    envelope = np.exp(-0.5 * ((t - center) / width) ** 2)
    carrier = np.sin(2.0 * np.pi * 8.0 * t[None, :] + phases[cls][:, None])
    values = 0.3 * background + 1.5 * envelope[None, :] * carrier
    if spec.noise_level > 0:
        values += spec.noise_level * rng.standard_normal(values.shape)
    return values


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Generate a labelled synthetic dataset deterministically from its spec.

    Class-level structure (frequencies or transient timing, channel phases,
    amplitudes) is drawn first, then per-sample jitter and noise, all from
    one seeded generator, so equal specs give identical datasets.
    """
    rng = np.random.default_rng(spec.seed)
    class_names = [f"class{c}" for c in range(spec.class_count)]
    samples, labels = [], []
    if spec.family == FAMILY_SINUSOID:
        fundamentals, amplitudes, phases = _sinusoid_class_bank(spec, rng)
        for cls in range(spec.class_count):
            for _ in range(spec.per_class_count):
                values = _sinusoid_sample(spec, rng, fundamentals, amplitudes, phases, cls)
                samples.append(AnalogSample(values))
                labels.append(class_names[cls])
    else:
        centers, phases = _transient_class_bank(spec, rng)
        for cls in range(spec.class_count):
            for _ in range(spec.per_class_count):
                values = _transient_sample(spec, rng, centers, phases, cls)
                samples.append(AnalogSample(values))
                labels.append(class_names[cls])
    return Dataset(samples=samples, labels=labels, class_names=class_names)
