"""Spike-rate based pruning of hidden neurons.

A trained network records each hidden neuron's firing rate over its last
unsupervised training pass. Neurons firing strictly below a threshold are
deactivated: they keep their weights and threshold but are skipped by the
simulation and excluded from classification distances, so pruning is
reversible. Ties at the threshold survive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import AllNeuronsPrunedError, NotTrainedError
from .plasticity import FiringStats

logger = logging.getLogger(__name__)

DEFAULT_GAP_FACTOR = 3.0


@dataclass(frozen=True)
class PruneReport:
    """Outcome of one pruning call."""

    threshold: float
    pruned_indices: np.ndarray
    pruned_fraction: float
    surviving_count: int


def prune_by_rate(network, threshold: float) -> PruneReport:
    """Deactivate hidden neurons whose training firing rate is below threshold.

    Rates come from the network's last unsupervised training pass, so
    repeated calls with the same threshold are idempotent. Raises
    AllNeuronsPrunedError (without touching the network) if nothing would
    survive, and NotTrainedError if the network has no recorded rates.
    """
    rates = network.training_rates
    if rates is None:
        raise NotTrainedError("network has no training pass to prune from")
    rates = np.asarray(rates, dtype=np.float64)
    pruned = np.flatnonzero(rates < threshold)
    surviving = rates.size - pruned.size
    if surviving == 0:
        raise AllNeuronsPrunedError(
            f"threshold {threshold} would deactivate all {rates.size} neurons"
        )
    network.set_active_mask(rates >= threshold)
    return PruneReport(
        threshold=float(threshold),
        pruned_indices=pruned,
        pruned_fraction=pruned.size / rates.size,
        surviving_count=surviving,
    )


def suggest_thresholds(
    stats: FiringStats | np.ndarray,
    k: int,
    gap_factor: float = DEFAULT_GAP_FACTOR,
) -> list[float]:
    """Propose up to k pruning thresholds from the firing-rate distribution.

    ``stats`` is a training pass's FiringStats or a bare array of rates.
    Sorted rates are cut into clusters wherever a gap exceeds ``gap_factor``
    times the median gap. The i-th suggestion removes the i lowest clusters:
    it is the minimum rate of the cluster above them, or the maximum of the
    top cluster when there is nothing above (which prunes nothing, since
    ties at the threshold survive).

    Returns fewer than k values (with a log warning) when the rates form
    fewer clusters than requested.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if gap_factor <= 0:
        raise ValueError(f"gap_factor must be positive, got {gap_factor}")
    rates = stats.rates if isinstance(stats, FiringStats) else stats
    rates = np.sort(np.asarray(rates, dtype=np.float64))
    if rates.size == 1:
        clusters = [rates]
    else:
        gaps = np.diff(rates)
        median_gap = float(np.median(gaps))
        breaks = np.flatnonzero(gaps > gap_factor * median_gap)
        clusters = np.split(rates, breaks + 1)
    suggestions = []
    for i in range(min(k, len(clusters))):
        if i + 1 < len(clusters):
            suggestions.append(float(clusters[i + 1][0]))
        else:
            suggestions.append(float(clusters[i][-1]))
    if len(suggestions) < k:
        logger.warning(
            "only %d rate clusters available, returning %d of %d requested thresholds",
            len(clusters), len(suggestions), k,
        )
    return suggestions
