"""Rank-order output neurons evolved from hidden-layer spike rasters.

Each training sample grows one output neuron. Hidden neurons are ranked by
their first spike time within the sample window (ties broken by index) and
the connection from the neuron with rank r starts at alpha * mod**r, so
early spikers dominate the vector. Hidden neurons that never spike stay at
weight zero. A small drift then nudges every connected weight up for each
step its hidden neuron spiked and down for each step it stayed silent, which
separates neurons with equal first-spike times but different activity.

Classification is nearest-neighbour: a test sample is evolved into a
temporary vector by the same procedure and matched to the gallery neuron at
the smallest Euclidean distance, ties going to the lowest sample id.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyGalleryError

logger = logging.getLogger(__name__)

DRIFT_WHOLE_WINDOW = "whole_window"
DRIFT_FROM_FIRST_SPIKE = "from_first_spike"


@dataclass(frozen=True)
class RankOrderParams:
    """Rank-order weighting and drift constants.

    ``drift_domain`` controls which steps count for the drift of a neuron
    that spiked: the whole sample window (default) or only the steps from
    its first spike onwards.
    """

    alpha: float = 1.0
    mod: float = 0.8
    drift: float = 0.001
    drift_domain: str = DRIFT_WHOLE_WINDOW

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.mod < 1.0:
            raise ValueError("mod must lie strictly between 0 and 1")
        if self.drift < 0:
            raise ValueError("drift must be >= 0")
        if self.drift_domain not in (DRIFT_WHOLE_WINDOW, DRIFT_FROM_FIRST_SPIKE):
            raise ValueError(f"unknown drift_domain {self.drift_domain!r}")


@dataclass(frozen=True)
class OutputNeuron:
    """One gallery entry: a weight vector over hidden neurons plus its label."""

    weights: np.ndarray
    label: object
    sample_id: int


def evolve_output_neuron(
    raster: np.ndarray,
    label,
    params: RankOrderParams,
    sample_id: int = 0,
) -> OutputNeuron:
    """Grow an output neuron from one hidden-layer raster.

    ``raster`` is a binary (hidden_count, steps) array. Rank-order weights
    are assigned from first spike times, then drift is applied in closed
    form: with s spikes over a drift domain of n steps the weight moves by
    drift * s - drift * (n - s). A raster with no spikes at all yields an
    all-zero vector and logs a warning.
    """
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise DimensionMismatchError(f"raster must be 2-d, got ndim={raster.ndim}")
    hidden_count, steps = raster.shape
    spikes_per_neuron = raster.sum(axis=1)
    spiked = spikes_per_neuron > 0
    weights = np.zeros(hidden_count, dtype=np.float64)

    if not spiked.any():
        logger.warning("sample %s produced no hidden spikes; output neuron is all-zero", sample_id)
        return OutputNeuron(weights=weights, label=label, sample_id=sample_id)

    first_times = np.argmax(raster, axis=1)
    spiked_idx = np.flatnonzero(spiked)
    # stable sort on first spike time; index order breaks ties
    order = spiked_idx[np.argsort(first_times[spiked_idx], kind="stable")]
    # successive multiplication: alpha, alpha*mod, alpha*mod^2, ...
    ladder = np.full(order.size, params.mod)
    ladder[0] = params.alpha
    weights[order] = np.cumprod(ladder)

    if params.drift > 0:
        if params.drift_domain == DRIFT_WHOLE_WINDOW:
            domain = np.full(spiked_idx.size, steps, dtype=np.float64)
        else:
            domain = (steps - first_times[spiked_idx]).astype(np.float64)
        s = spikes_per_neuron[spiked_idx].astype(np.float64)
        weights[spiked_idx] += params.drift * s - params.drift * (domain - s)
    return OutputNeuron(weights=weights, label=label, sample_id=sample_id)


def classify(
    weights: np.ndarray,
    gallery: list[OutputNeuron],
    active_mask: np.ndarray | None = None,
) -> tuple[object, float]:
    """Match a weight vector to the nearest gallery neuron.

    Distances are Euclidean over the active hidden neurons only; pruned
    positions contribute nothing even if gallery vectors predate the
    pruning. Exact distance ties resolve to the lowest sample id. Returns
    (label, distance).
    """
    if not gallery:
        raise EmptyGalleryError("gallery has no output neurons")
    weights = np.asarray(weights, dtype=np.float64)
    for neuron in gallery:
        if neuron.weights.shape != weights.shape:
            raise DimensionMismatchError(
                f"gallery vector length {neuron.weights.shape} != query {weights.shape}"
            )
    stacked = np.stack([neuron.weights for neuron in gallery])
    diff = stacked - weights
    if active_mask is not None:
        active_mask = np.asarray(active_mask, dtype=bool)
        if active_mask.shape != weights.shape:
            raise DimensionMismatchError(
                f"active mask length {active_mask.shape} != query {weights.shape}"
            )
        diff = diff[:, active_mask]
    squared = (diff * diff).sum(axis=1)
    sample_ids = np.array([neuron.sample_id for neuron in gallery])
    best = np.lexsort((sample_ids, squared))[0]
    return gallery[best].label, float(np.sqrt(squared[best]))
