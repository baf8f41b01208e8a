"""Two-layer spiking network with ensemble plasticity.

Every input channel owns a pair of pass-through input neurons: positive
events fire the excitatory one (weights in [0, w_max]), negative events the
inhibitory one (weights in [w_min, 0]). The hidden layer is made of adaptive
LIF neurons, fully connected to the inputs.

Training is unsupervised: samples are presented in a seeded shuffled order,
each window is simulated step by step, and STDP is applied once per sample
over all spike pairs in the window. In ensemble mode every hidden neuron
additionally adapts its threshold each step (up after a spike, down after
silence). Membrane and refractory state reset between samples; weights,
thresholds and spike counts persist.

The supervised stage and inference run with all plasticity frozen; they only
read spike rasters out of the trained layer.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .classifier import OutputNeuron, RankOrderParams, classify, evolve_output_neuron
from .encoding import SpikeTrain
from .errors import (
    NotTrainedError,
    ShapeMismatchError,
    SnapshotFormatError,
)
from .neuron import IpRates, LifParams, threshold_steps
from .plasticity import FiringStats, StdpParams, SynapseMatrix, apply_stdp, compute_firing_stats

MODE_ENSEMBLE = "ensemble"
MODE_STDP_ONLY = "stdp_only"
SNAPSHOT_VERSION = 1


def adapt_thresholds(
    v_thr: np.ndarray,
    anchor: np.ndarray,
    up: np.ndarray,
    down: np.ndarray,
    spiked: np.ndarray,
    active: np.ndarray,
    q_pos: float,
    q_neg: float,
    floor: float,
) -> None:
    """One step of layer-wide threshold adaptation, in place.

    Vectorised twin of ``neuron.ip_update``: lanes that spiked raise their
    threshold by q_pos, silent active lanes lower it by q_neg, and a floor
    hit rebases the affine representation. The per-lane arithmetic matches
    the scalar path bit for bit.
    """
    silent = active & ~spiked
    up[spiked] += 1
    down[silent] += 1
    fresh = anchor + (up * q_pos - down * q_neg)
    clipped = active & (fresh < floor)
    fresh[clipped] = floor
    anchor[clipped] = floor
    up[clipped] = 0
    down[clipped] = 0
    v_thr[active] = fresh[active]


@dataclass(frozen=True)
class NetworkConfig:
    """Geometry, seeding and all per-stage parameter groups."""

    channel_count: int
    hidden_count: int = 200
    lif: LifParams = field(default_factory=LifParams)
    stdp: StdpParams = field(default_factory=StdpParams)
    ip: IpRates = field(default_factory=IpRates)
    rank_order: RankOrderParams = field(default_factory=RankOrderParams)
    seed: int = 0
    permute_input_mapping: bool = True

    def __post_init__(self):
        if self.channel_count < 1:
            raise ValueError("channel_count must be >= 1")
        if self.hidden_count < 1:
            raise ValueError("hidden_count must be >= 1")

    @property
    def input_count(self) -> int:
        return 2 * self.channel_count


class Network:
    """Stateful two-layer spiking network; all randomness flows from the seed."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        self._rng = np.random.default_rng(config.seed)
        n_in, n_hid = config.input_count, config.hidden_count
        stdp = config.stdp
        u = self._rng.random((n_in, n_hid))
        weights = np.empty((n_in, n_hid))
        weights[0::2] = u[0::2] * stdp.w_max
        weights[1::2] = u[1::2] * stdp.w_min
        self.synapses = SynapseMatrix(weights)
        if config.permute_input_mapping:
            self._mapping = self._rng.permutation(config.channel_count)
        else:
            self._mapping = np.arange(config.channel_count)
        lif = config.lif
        self._v_thr = np.full(n_hid, lif.v_init)
        self._thr_anchor = np.full(n_hid, lif.v_init)
        self._thr_up = np.zeros(n_hid, dtype=np.int64)
        self._thr_down = np.zeros(n_hid, dtype=np.int64)
        self._active = np.ones(n_hid, dtype=bool)
        self._train_rates: np.ndarray | None = None
        self._train_stats: FiringStats | None = None
        self._gallery: list[OutputNeuron] = []

    # --- read-only views ---

    @property
    def active_mask(self) -> np.ndarray:
        return self._active.copy()

    @property
    def thresholds(self) -> np.ndarray:
        return self._v_thr.copy()

    @property
    def training_rates(self) -> np.ndarray | None:
        """Per-neuron firing rates of the last unsupervised pass, or None."""
        return None if self._train_rates is None else self._train_rates.copy()

    @property
    def training_stats(self) -> FiringStats | None:
        return self._train_stats

    @property
    def gallery(self) -> list[OutputNeuron]:
        return list(self._gallery)

    # --- simulation ---

    def _input_raster(self, train: SpikeTrain) -> np.ndarray:
        if train.channel_count != self.config.channel_count:
            raise ShapeMismatchError(
                f"sample has {train.channel_count} channels, network expects "
                f"{self.config.channel_count}"
            )
        events = train.events
        raster = np.zeros((self.config.input_count, train.timepoint_count), dtype=np.uint8)
        raster[2 * self._mapping] = events == 1
        raster[2 * self._mapping + 1] = events == -1
        return raster

    def _run_window(
        self,
        input_raster: np.ndarray,
        *,
        plastic: bool,
        ensemble: bool,
        spike_counts: np.ndarray | None = None,
    ) -> np.ndarray:
        """Simulate one sample window; returns the hidden raster.

        Membrane and refractory state live on the stack: every window starts
        from rest. Threshold adaptation (when ``ensemble`` and ``plastic``)
        mutates the persistent threshold arrays.
        """
        lif = self.config.lif
        n_hid = self.config.hidden_count
        steps = input_raster.shape[1]
        active = self._active
        weights = self.synapses.weights
        leak, v_rest, resistance = lif.leak_rate, lif.v_rest, lif.resistance
        adapt = plastic and ensemble
        if adapt:
            q_pos, q_neg = threshold_steps(self.config.ip, int(active.sum()), lif)
            floor = lif.floor

        v = np.full(n_hid, v_rest)
        refractory = np.zeros(n_hid, dtype=np.int64)
        raster = np.zeros((n_hid, steps), dtype=np.uint8)
        for t in range(steps):
            firing_inputs = np.flatnonzero(input_raster[:, t])
            if firing_inputs.size:
                current = weights[firing_inputs].sum(axis=0)
            else:
                current = np.zeros(n_hid)
            in_refractory = refractory > 0
            integrating = active & ~in_refractory
            # same expression order as the scalar step, applied lane-wise
            v_next = v + leak * (v_rest - v + resistance * current)
            spiked = integrating & (v_next >= self._v_thr)
            v = np.where(integrating, v_next, v)
            v[spiked] = v_rest
            refractory[in_refractory & active] -= 1
            refractory[spiked] = lif.t_refractory
            raster[:, t] = spiked
            if spike_counts is not None:
                spike_counts[spiked] += 1
            if adapt:
                adapt_thresholds(
                    self._v_thr,
                    self._thr_anchor,
                    self._thr_up,
                    self._thr_down,
                    spiked,
                    active,
                    q_pos,
                    q_neg,
                    floor,
                )
        return raster

    @staticmethod
    def _spike_times(raster: np.ndarray) -> list[np.ndarray]:
        rows, cols = np.nonzero(raster)
        splits = np.searchsorted(rows, np.arange(1, raster.shape[0]))
        return np.split(cols, splits)

    def train_unsupervised(
        self,
        samples: list[SpikeTrain],
        mode: str = MODE_ENSEMBLE,
    ) -> FiringStats:
        """One unsupervised pass over the samples in seeded shuffled order.

        STDP runs in both modes; threshold adaptation only in "ensemble".
        Returns the pass's firing statistics over the active neurons and
        records the per-neuron rates for later pruning.
        """
        if mode not in (MODE_ENSEMBLE, MODE_STDP_ONLY):
            raise ValueError(f"unknown training mode {mode!r}")
        if not samples:
            raise ShapeMismatchError("training needs at least one sample")
        ensemble = mode == MODE_ENSEMBLE
        counts = np.zeros(self.config.hidden_count, dtype=np.int64)
        step_totals: list[np.ndarray] = []
        total_steps = 0
        order = self._rng.permutation(len(samples))
        for idx in order:
            input_raster = self._input_raster(samples[idx])
            raster = self._run_window(
                input_raster, plastic=True, ensemble=ensemble, spike_counts=counts
            )
            apply_stdp(
                self.synapses,
                self._spike_times(input_raster),
                self._spike_times(raster),
                self.config.stdp,
            )
            step_totals.append(raster.sum(axis=0, dtype=np.int64))
            total_steps += input_raster.shape[1]
        self._train_rates = counts / float(total_steps)
        self._train_stats = compute_firing_stats(
            counts[self._active], total_steps, step_totals=step_totals
        )
        return self._train_stats

    def train_classifier(
        self,
        samples: list[SpikeTrain],
        labels: list,
    ) -> list[OutputNeuron]:
        """Grow one output neuron per sample, in the given order, frozen weights."""
        if len(samples) != len(labels):
            raise ShapeMismatchError(
                f"got {len(samples)} samples but {len(labels)} labels"
            )
        gallery = []
        for sample_id, (sample, label) in enumerate(zip(samples, labels)):
            raster = self._run_window(
                self._input_raster(sample), plastic=False, ensemble=False
            )
            gallery.append(
                evolve_output_neuron(raster, label, self.config.rank_order, sample_id)
            )
        self._gallery = gallery
        return list(gallery)

    def propagate(self, sample: SpikeTrain) -> np.ndarray:
        """Frozen pass over one sample; returns the hidden raster."""
        return self._run_window(self._input_raster(sample), plastic=False, ensemble=False)

    def infer(self, sample: SpikeTrain) -> tuple[object, float]:
        """Classify one sample against the trained gallery; returns (label, distance)."""
        if not self._gallery:
            raise NotTrainedError("classifier gallery is empty; run train_classifier first")
        raster = self.propagate(sample)
        probe = evolve_output_neuron(raster, None, self.config.rank_order, sample_id=-1)
        return classify(probe.weights, self._gallery, active_mask=self._active)

    # --- pruning hooks ---

    def set_active_mask(self, mask: np.ndarray) -> None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self._active.shape:
            raise ShapeMismatchError(
                f"mask shape {mask.shape} != hidden layer {self._active.shape}"
            )
        self._active = mask.copy()

    def restore_all(self) -> None:
        """Reactivate every hidden neuron, undoing any pruning."""
        self._active = np.ones(self.config.hidden_count, dtype=bool)


# --- snapshots ---


def _config_to_dict(config: NetworkConfig) -> dict:
    return {
        "channel_count": config.channel_count,
        "hidden_count": config.hidden_count,
        "seed": config.seed,
        "permute_input_mapping": config.permute_input_mapping,
        "lif": {
            "v_init": config.lif.v_init,
            "v_rest": config.lif.v_rest,
            "resistance": config.lif.resistance,
            "capacitance": config.lif.capacitance,
            "t_refractory": config.lif.t_refractory,
            "dt": config.lif.dt,
            "threshold_floor": config.lif.threshold_floor,
        },
        "stdp": {
            "a_pos": config.stdp.a_pos,
            "a_neg": config.stdp.a_neg,
            "tau_pos": config.stdp.tau_pos,
            "tau_neg": config.stdp.tau_neg,
            "w_max": config.stdp.w_max,
            "w_min": config.stdp.w_min,
        },
        "ip": {"theta_pos": config.ip.theta_pos, "theta_neg": config.ip.theta_neg},
        "rank_order": {
            "alpha": config.rank_order.alpha,
            "mod": config.rank_order.mod,
            "drift": config.rank_order.drift,
            "drift_domain": config.rank_order.drift_domain,
        },
    }


def _config_from_dict(doc: dict) -> NetworkConfig:
    return NetworkConfig(
        channel_count=doc["channel_count"],
        hidden_count=doc["hidden_count"],
        seed=doc["seed"],
        permute_input_mapping=doc["permute_input_mapping"],
        lif=LifParams(**doc["lif"]),
        stdp=StdpParams(**doc["stdp"]),
        ip=IpRates(**doc["ip"]),
        rank_order=RankOrderParams(**doc["rank_order"]),
    )


def save_model(network: Network, path) -> None:
    """Write a self-contained snapshot of a network to an .npz file.

    The file holds every persistent array plus the configuration as JSON;
    identical networks produce byte-identical files.
    """
    gallery = network._gallery
    payload = {
        "format_version": np.int64(SNAPSHOT_VERSION),
        "config_json": np.frombuffer(
            json.dumps(_config_to_dict(network.config), sort_keys=True).encode(), dtype=np.uint8
        ),
        "weights": network.synapses.weights,
        "mapping": network._mapping,
        "v_thr": network._v_thr,
        "thr_anchor": network._thr_anchor,
        "thr_up": network._thr_up,
        "thr_down": network._thr_down,
        "active": network._active,
        "has_rates": np.bool_(network._train_rates is not None),
        "train_rates": (
            network._train_rates
            if network._train_rates is not None
            else np.empty(0)
        ),
        "gallery_weights": (
            np.stack([n.weights for n in gallery])
            if gallery
            else np.empty((0, network.config.hidden_count))
        ),
        "gallery_labels": np.frombuffer(
            json.dumps([n.label for n in gallery]).encode(), dtype=np.uint8
        ),
        "gallery_sample_ids": np.array([n.sample_id for n in gallery], dtype=np.int64),
    }
    # plain np.savez stamps zip entries with the wall clock; write the
    # members by hand with a pinned date so identical networks produce
    # byte-identical files
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_STORED) as archive:
        for key, value in payload.items():
            blob = io.BytesIO()
            np.lib.format.write_array(blob, np.asanyarray(value))
            entry = zipfile.ZipInfo(key + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            archive.writestr(entry, blob.getvalue())
    with open(path, "wb") as handle:
        handle.write(buffer.getvalue())


def load_model(path) -> Network:
    """Rebuild a network from a snapshot written by ``save_model``."""
    try:
        data = np.load(path)
    except (OSError, ValueError) as exc:
        raise SnapshotFormatError(f"cannot read snapshot {path}: {exc}") from exc
    with data:
        if "format_version" not in data:
            raise SnapshotFormatError(f"{path} is not a network snapshot")
        version = int(data["format_version"])
        if version != SNAPSHOT_VERSION:
            raise SnapshotFormatError(
                f"snapshot version {version} is not supported (expected {SNAPSHOT_VERSION})"
            )
        config = _config_from_dict(json.loads(bytes(data["config_json"]).decode()))
        network = Network.__new__(Network)
        network.config = config
        network._rng = np.random.default_rng(config.seed)
        network.synapses = SynapseMatrix(data["weights"].copy())
        network._mapping = data["mapping"].copy()
        network._v_thr = data["v_thr"].copy()
        network._thr_anchor = data["thr_anchor"].copy()
        network._thr_up = data["thr_up"].copy()
        network._thr_down = data["thr_down"].copy()
        network._active = data["active"].copy()
        network._train_rates = data["train_rates"].copy() if bool(data["has_rates"]) else None
        network._train_stats = None
        labels = json.loads(bytes(data["gallery_labels"]).decode())
        gallery_weights = data["gallery_weights"]
        sample_ids = data["gallery_sample_ids"]
        network._gallery = [
            OutputNeuron(
                weights=gallery_weights[i].copy(),
                label=labels[i],
                sample_id=int(sample_ids[i]),
            )
            for i in range(len(labels))
        ]
    return network
