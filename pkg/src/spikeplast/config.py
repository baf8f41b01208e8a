"""Experiment configuration: a strict JSON schema over all pipeline knobs.

Unknown keys are rejected at every level with the offending key path, so a
typo cannot silently fall back to a default. ``ExperimentConfig.defaults()``
materialises the full default document; a loaded config always serialises
back to a complete document via ``to_dict``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .classifier import RankOrderParams
from .data import SyntheticSpec
from .errors import InvalidConfigError, SpikePlastError
from .evaluation import APPROACHES
from .network import NetworkConfig
from .neuron import IpRates, LifParams
from .plasticity import StdpParams

_MISSING = object()


def _check_keys(doc: dict, allowed: tuple[str, ...], path: str) -> None:
    if not isinstance(doc, dict):
        raise InvalidConfigError(f"{path}: expected an object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise InvalidConfigError(f"{path}: unknown key(s) {unknown}")


def _get(doc: dict, key: str, kinds, path: str, default=_MISSING):
    if key not in doc:
        if default is _MISSING:
            raise InvalidConfigError(f"{path}.{key}: missing required key")
        return default
    value = doc[key]
    if kinds is bool:
        if not isinstance(value, bool):
            raise InvalidConfigError(f"{path}.{key}: expected a boolean")
        return value
    if kinds is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidConfigError(f"{path}.{key}: expected an integer")
        return value
    if kinds is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidConfigError(f"{path}.{key}: expected a number")
        return float(value)
    if kinds is str:
        if not isinstance(value, str):
            raise InvalidConfigError(f"{path}.{key}: expected a string")
        return value
    raise TypeError(f"unsupported kind {kinds!r}")


def _float_list(doc: dict, key: str, path: str, default=_MISSING) -> tuple[float, ...]:
    value = doc.get(key, _MISSING)
    if value is _MISSING:
        if default is _MISSING:
            raise InvalidConfigError(f"{path}.{key}: missing required key")
        return default
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise InvalidConfigError(f"{path}.{key}: expected a list of numbers")
    return tuple(float(v) for v in value)


def _build(cls, kwargs: dict, path: str):
    try:
        return cls(**kwargs)
    except (ValueError, SpikePlastError) as exc:
        raise InvalidConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description; every field has a concrete value."""

    seed: int
    output_dir: str
    dataset_manifest: str | None
    synthetic: SyntheticSpec | None
    reduce_window: int | None
    encoding_factor: float
    literal_negative: bool
    hidden_count: int
    permute_input_mapping: bool
    lif: LifParams
    stdp: StdpParams
    ip: IpRates
    rank_order: RankOrderParams
    approaches: tuple[str, ...]
    kfold: int
    train_fraction: float
    repeats: int
    tuning_enabled: bool
    tuning_pos_grid: tuple[float, ...]
    tuning_neg_grid: tuple[float, ...]
    prune_thresholds: tuple[float, ...] | None
    auto_suggest: int

    def __post_init__(self):
        if (self.dataset_manifest is None) == (self.synthetic is None):
            raise InvalidConfigError(
                "dataset: exactly one of 'manifest' and 'synthetic' must be set"
            )
        for approach in self.approaches:
            if approach not in APPROACHES:
                raise InvalidConfigError(
                    f"approaches: {approach!r} is not one of {list(APPROACHES)}"
                )
        if not self.approaches:
            raise InvalidConfigError("approaches: need at least one")
        if self.kfold < 2:
            raise InvalidConfigError(f"evaluation.kfold: must be >= 2, got {self.kfold}")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfigError("evaluation.train_fraction: must lie in (0, 1)")
        if self.repeats < 1:
            raise InvalidConfigError("evaluation.repeats: must be >= 1")
        if self.reduce_window is not None and self.reduce_window < 1:
            raise InvalidConfigError("preprocess.reduce_window: must be >= 1 or null")
        if self.auto_suggest < 1:
            raise InvalidConfigError("pruning.auto_suggest: must be >= 1")
        if self.encoding_factor < 0:
            raise InvalidConfigError("encoding.factor: must be >= 0")

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        return cls.from_dict({})

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        _check_keys(doc, (
            "seed", "output_dir", "dataset", "preprocess", "encoding",
            "network", "approaches", "evaluation", "tuning", "pruning",
        ), "config")

        dataset = doc.get("dataset", {"synthetic": {}})
        _check_keys(dataset, ("manifest", "synthetic"), "dataset")
        manifest = _get(dataset, "manifest", str, "dataset", None)
        if manifest is not None and "synthetic" in dataset:
            raise InvalidConfigError(
                "dataset: exactly one of 'manifest' and 'synthetic' must be set"
            )
        synthetic = None
        if "synthetic" in dataset:
            sdoc = dataset["synthetic"]
            _check_keys(sdoc, (
                "class_count", "channel_count", "timepoint_count", "per_class_count",
                "family", "noise_level", "base_frequency", "frequency_step", "seed",
            ), "dataset.synthetic")
            synthetic = _build(SyntheticSpec, {
                "class_count": _get(sdoc, "class_count", int, "dataset.synthetic", 3),
                "channel_count": _get(sdoc, "channel_count", int, "dataset.synthetic", 14),
                "timepoint_count": _get(sdoc, "timepoint_count", int, "dataset.synthetic", 128),
                "per_class_count": _get(sdoc, "per_class_count", int, "dataset.synthetic", 20),
                "family": _get(sdoc, "family", str, "dataset.synthetic", "sinusoid_mix"),
                "noise_level": _get(sdoc, "noise_level", float, "dataset.synthetic", 0.05),
                "base_frequency": _get(sdoc, "base_frequency", float, "dataset.synthetic", 5.0),
                "frequency_step": _get(sdoc, "frequency_step", float, "dataset.synthetic", 1.0),
                "seed": _get(sdoc, "seed", int, "dataset.synthetic", 0),
            }, "dataset.synthetic")

        preprocess = doc.get("preprocess", {})
        _check_keys(preprocess, ("reduce_window",), "preprocess")
        reduce_window = preprocess.get("reduce_window")
        if reduce_window is not None and (
            isinstance(reduce_window, bool) or not isinstance(reduce_window, int)
        ):
            raise InvalidConfigError("preprocess.reduce_window: expected an integer or null")

        encoding = doc.get("encoding", {})
        _check_keys(encoding, ("factor", "literal_negative"), "encoding")

        network = doc.get("network", {})
        _check_keys(network, (
            "hidden_count", "permute_input_mapping", "lif", "stdp", "ip", "rank_order",
        ), "network")
        lif_doc = network.get("lif", {})
        _check_keys(lif_doc, (
            "v_init", "v_rest", "resistance", "capacitance",
            "t_refractory", "dt", "threshold_floor",
        ), "network.lif")
        lif = _build(LifParams, {
            "v_init": _get(lif_doc, "v_init", float, "network.lif", 0.05),
            "v_rest": _get(lif_doc, "v_rest", float, "network.lif", 0.0),
            "resistance": _get(lif_doc, "resistance", float, "network.lif", 1.0),
            "capacitance": _get(lif_doc, "capacitance", float, "network.lif", 10.0),
            "t_refractory": _get(lif_doc, "t_refractory", int, "network.lif", 5),
            "dt": _get(lif_doc, "dt", float, "network.lif", 1.0),
            "threshold_floor": (
                None if lif_doc.get("threshold_floor") is None
                else _get(lif_doc, "threshold_floor", float, "network.lif")
            ),
        }, "network.lif")
        stdp_doc = network.get("stdp", {})
        _check_keys(stdp_doc, ("a_pos", "a_neg", "tau_pos", "tau_neg", "w_max", "w_min"),
                    "network.stdp")
        stdp = _build(StdpParams, {
            "a_pos": _get(stdp_doc, "a_pos", float, "network.stdp", 0.001),
            "a_neg": _get(stdp_doc, "a_neg", float, "network.stdp", 0.001),
            "tau_pos": _get(stdp_doc, "tau_pos", float, "network.stdp", 10.0),
            "tau_neg": _get(stdp_doc, "tau_neg", float, "network.stdp", 10.0),
            "w_max": _get(stdp_doc, "w_max", float, "network.stdp", 0.1),
            "w_min": _get(stdp_doc, "w_min", float, "network.stdp", -0.1),
        }, "network.stdp")
        ip_doc = network.get("ip", {})
        _check_keys(ip_doc, ("theta_pos", "theta_neg"), "network.ip")
        ip = _build(IpRates, {
            "theta_pos": _get(ip_doc, "theta_pos", float, "network.ip", 1e-3),
            "theta_neg": _get(ip_doc, "theta_neg", float, "network.ip", 1e-5),
        }, "network.ip")
        rank_doc = network.get("rank_order", {})
        _check_keys(rank_doc, ("alpha", "mod", "drift", "drift_domain"), "network.rank_order")
        rank_order = _build(RankOrderParams, {
            "alpha": _get(rank_doc, "alpha", float, "network.rank_order", 1.0),
            "mod": _get(rank_doc, "mod", float, "network.rank_order", 0.8),
            "drift": _get(rank_doc, "drift", float, "network.rank_order", 0.001),
            "drift_domain": _get(rank_doc, "drift_domain", str, "network.rank_order",
                                 "whole_window"),
        }, "network.rank_order")

        approaches = doc.get("approaches", ["stdp_only", "ensemble", "ensemble_pruned"])
        if not isinstance(approaches, list) or not all(isinstance(a, str) for a in approaches):
            raise InvalidConfigError("approaches: expected a list of strings")

        evaluation = doc.get("evaluation", {})
        _check_keys(evaluation, ("kfold", "train_fraction", "repeats"), "evaluation")

        tuning = doc.get("tuning", {})
        _check_keys(tuning, ("enabled", "pos_grid", "neg_grid"), "tuning")

        pruning = doc.get("pruning", {})
        _check_keys(pruning, ("thresholds", "auto_suggest"), "pruning")
        thresholds = pruning.get("thresholds")
        if thresholds is not None:
            thresholds = _float_list(pruning, "thresholds", "pruning")

        return cls(
            seed=_get(doc, "seed", int, "config", 0),
            output_dir=_get(doc, "output_dir", str, "config", "results"),
            dataset_manifest=manifest,
            synthetic=synthetic,
            reduce_window=reduce_window,
            encoding_factor=_get(encoding, "factor", float, "encoding", 0.5),
            literal_negative=_get(encoding, "literal_negative", bool, "encoding", False),
            hidden_count=_get(network, "hidden_count", int, "network", 200),
            permute_input_mapping=_get(network, "permute_input_mapping", bool, "network", True),
            lif=lif, stdp=stdp, ip=ip, rank_order=rank_order,
            approaches=tuple(approaches),
            kfold=_get(evaluation, "kfold", int, "evaluation", 5),
            train_fraction=_get(evaluation, "train_fraction", float, "evaluation", 0.7),
            repeats=_get(evaluation, "repeats", int, "evaluation", 30),
            tuning_enabled=_get(tuning, "enabled", bool, "tuning", False),
            tuning_pos_grid=_float_list(tuning, "pos_grid", "tuning",
                                        (1e-4, 1e-3, 1e-2)),
            tuning_neg_grid=_float_list(tuning, "neg_grid", "tuning",
                                        (1e-6, 1e-5, 1e-4)),
            prune_thresholds=thresholds,
            auto_suggest=_get(pruning, "auto_suggest", int, "pruning", 1),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise InvalidConfigError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        dataset: dict = {}
        if self.dataset_manifest is not None:
            dataset["manifest"] = self.dataset_manifest
        else:
            s = self.synthetic
            dataset["synthetic"] = {
                "class_count": s.class_count,
                "channel_count": s.channel_count,
                "timepoint_count": s.timepoint_count,
                "per_class_count": s.per_class_count,
                "family": s.family,
                "noise_level": s.noise_level,
                "base_frequency": s.base_frequency,
                "frequency_step": s.frequency_step,
                "seed": s.seed,
            }
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "dataset": dataset,
            "preprocess": {"reduce_window": self.reduce_window},
            "encoding": {
                "factor": self.encoding_factor,
                "literal_negative": self.literal_negative,
            },
            "network": {
                "hidden_count": self.hidden_count,
                "permute_input_mapping": self.permute_input_mapping,
                "lif": {
                    "v_init": self.lif.v_init,
                    "v_rest": self.lif.v_rest,
                    "resistance": self.lif.resistance,
                    "capacitance": self.lif.capacitance,
                    "t_refractory": self.lif.t_refractory,
                    "dt": self.lif.dt,
                    "threshold_floor": self.lif.threshold_floor,
                },
                "stdp": {
                    "a_pos": self.stdp.a_pos,
                    "a_neg": self.stdp.a_neg,
                    "tau_pos": self.stdp.tau_pos,
                    "tau_neg": self.stdp.tau_neg,
                    "w_max": self.stdp.w_max,
                    "w_min": self.stdp.w_min,
                },
                "ip": {"theta_pos": self.ip.theta_pos, "theta_neg": self.ip.theta_neg},
                "rank_order": {
                    "alpha": self.rank_order.alpha,
                    "mod": self.rank_order.mod,
                    "drift": self.rank_order.drift,
                    "drift_domain": self.rank_order.drift_domain,
                },
            },
            "approaches": list(self.approaches),
            "evaluation": {
                "kfold": self.kfold,
                "train_fraction": self.train_fraction,
                "repeats": self.repeats,
            },
            "tuning": {
                "enabled": self.tuning_enabled,
                "pos_grid": list(self.tuning_pos_grid),
                "neg_grid": list(self.tuning_neg_grid),
            },
            "pruning": {
                "thresholds": None if self.prune_thresholds is None
                else list(self.prune_thresholds),
                "auto_suggest": self.auto_suggest,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def network_config(self, channel_count: int) -> NetworkConfig:
        return NetworkConfig(
            channel_count=channel_count,
            hidden_count=self.hidden_count,
            lif=self.lif,
            stdp=self.stdp,
            ip=self.ip,
            rank_order=self.rank_order,
            seed=self.seed,
            permute_input_mapping=self.permute_input_mapping,
        )
