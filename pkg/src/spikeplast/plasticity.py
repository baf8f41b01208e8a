"""Spike-timing-dependent plasticity and firing statistics.

The STDP kernel is the classic double exponential over the timing difference
delta_t = t_post - t_pre:

    F(delta_t) = A_pos * exp(-delta_t / tau_pos)   delta_t > 0
               = -A_neg * exp(delta_t / tau_neg)   delta_t < 0
               = 0                                 delta_t = 0

Weight updates pair every post spike with every pre spike inside one sample
window and add the summed kernel values to the synapse, clamping to
[w_min, w_max] afterwards.

Because spike times are integer step indices, the kernel takes only
2*T - 1 distinct values per window. ``apply_stdp`` precomputes those values
with the scalar ``stdp_window`` and accumulates them in a fixed order
(post spikes outer, pre spikes inner, both ascending), so the fast path is
bit-identical to a brute-force double loop over the same pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGridError, ShapeMismatchError, ZeroStepsError
from .neuron import IpRates

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, but keep a fallback
    njit = None


@dataclass(frozen=True)
class StdpParams:
    """Kernel amplitudes, time constants and the synaptic weight range."""

    a_pos: float = 0.001
    a_neg: float = 0.001
    tau_pos: float = 10.0
    tau_neg: float = 10.0
    w_max: float = 0.1
    w_min: float = -0.1

    def __post_init__(self):
        if self.a_pos < 0 or self.a_neg < 0:
            raise ValueError("amplitudes must be >= 0")
        if self.tau_pos <= 0 or self.tau_neg <= 0:
            raise ValueError("time constants must be positive")
        if not self.w_min <= self.w_max:
            raise ValueError("w_min must not exceed w_max")


def stdp_window(delta_t: float, params: StdpParams) -> float:
    """Kernel value for one pre/post timing difference.

    Positive delta_t (pre before post) potentiates, negative depresses,
    coincident spikes contribute nothing.
    """
    if delta_t > 0:
        return params.a_pos * math.exp(-delta_t / params.tau_pos)
    if delta_t < 0:
        return -params.a_neg * math.exp(delta_t / params.tau_neg)
    return 0.0


def stdp_window_table(max_lag: int, params: StdpParams) -> np.ndarray:
    """Kernel values for every integer lag in [-max_lag, max_lag].

    Entry [lag + max_lag] holds stdp_window(lag, params).
    """
    table = np.empty(2 * max_lag + 1, dtype=np.float64)
    for lag in range(-max_lag, max_lag + 1):
        table[lag + max_lag] = stdp_window(lag, params)
    return table


@dataclass
class SynapseMatrix:
    """Dense input-to-hidden weights, shaped (pre_count, post_count)."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ShapeMismatchError(f"weights must be 2-d, got ndim={weights.ndim}")
        self.weights = weights

    @property
    def pre_count(self) -> int:
        return self.weights.shape[0]

    @property
    def post_count(self) -> int:
        return self.weights.shape[1]


def _pair_sums_loops(pre_flat, pre_offsets, post_flat, post_offsets, table, origin, out):
    # post outer / pre inner, both ascending: the reference accumulation order
    for j in range(pre_offsets.shape[0] - 1):
        p0, p1 = pre_offsets[j], pre_offsets[j + 1]
        for i in range(post_offsets.shape[0] - 1):
            acc = 0.0
            for m in range(post_offsets[i], post_offsets[i + 1]):
                t_post = post_flat[m]
                for n in range(p0, p1):
                    acc += table[t_post - pre_flat[n] + origin]
            out[j, i] = acc


if njit is not None:
    _pair_sums = njit(cache=True)(_pair_sums_loops)
else:  # pragma: no cover
    _pair_sums = _pair_sums_loops


def _flatten_times(times: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(times) + 1, dtype=np.int64)
    for k, t in enumerate(times):
        offsets[k + 1] = offsets[k] + len(t)
    if offsets[-1] == 0:
        return np.empty(0, dtype=np.int64), offsets
    flat = np.concatenate([np.asarray(t, dtype=np.int64) for t in times])
    return flat, offsets


def apply_stdp(
    synapses: SynapseMatrix,
    pre_times: list[np.ndarray],
    post_times: list[np.ndarray],
    params: StdpParams,
) -> SynapseMatrix:
    """Apply one window of all-to-all STDP to the synapse matrix in place.

    ``pre_times[j]`` / ``post_times[i]`` are ascending integer spike step
    indices for input neuron j and hidden neuron i within the same window.
    Every synapse (j, i) receives the sum of kernel values over all its
    spike pairs, then the whole matrix is clamped to [w_min, w_max].
    Returns the mutated matrix.
    """
    if len(pre_times) != synapses.pre_count or len(post_times) != synapses.post_count:
        raise ShapeMismatchError(
            f"spike lists ({len(pre_times)}, {len(post_times)}) do not match "
            f"synapse shape ({synapses.pre_count}, {synapses.post_count})"
        )
    pre_flat, pre_offsets = _flatten_times(pre_times)
    post_flat, post_offsets = _flatten_times(post_times)
    if len(pre_flat) and len(post_flat):
        max_lag = int(max(pre_flat.max(), post_flat.max()))
        table = stdp_window_table(max_lag, params)
        delta = np.zeros_like(synapses.weights)
        _pair_sums(pre_flat, pre_offsets, post_flat, post_offsets, table, max_lag, delta)
        synapses.weights += delta
    np.clip(synapses.weights, params.w_min, params.w_max, out=synapses.weights)
    return synapses


@dataclass(frozen=True)
class FiringStats:
    """Firing statistics of one training pass over the active neurons.

    ``rate_pdf`` is a probability mass function over equal-width rate bins
    spanning [0, max rate]; ``entropy_bits`` is its Shannon entropy.
    Avalanches are maximal runs of consecutive steps with at least one
    spike anywhere in the layer; their size is the total spike count in the
    run, and the two avalanche arrays form a histogram of observed sizes.
    """

    rates: np.ndarray
    rate_pdf: np.ndarray
    bin_edges: np.ndarray
    entropy_bits: float
    active_fraction: float
    avalanche_sizes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    avalanche_counts: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def mean_rate(self) -> float:
        return float(self.rates.mean())


def compute_firing_stats(
    spike_counts: np.ndarray,
    total_steps: int,
    bin_count: int | None = None,
    step_totals: list[np.ndarray] | None = None,
) -> FiringStats:
    """Summarise per-neuron spike counts from one training pass.

    Parameters
    ----------
    spike_counts : array of per-neuron spike counts over the pass.
    total_steps : simulated steps in the pass; rates = counts / total_steps.
    bin_count : histogram bins for the rate PDF, default ceil(sqrt(len(counts))).
    step_totals : optional per-window arrays of layer-wide spike totals per
        step, used for avalanche sizes. Runs never span window boundaries.
    """
    counts = np.asarray(spike_counts, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0:
        raise ShapeMismatchError("spike_counts must be a non-empty 1-d array")
    if total_steps < 1:
        raise ZeroStepsError(f"total_steps must be >= 1, got {total_steps}")
    if (counts < 0).any():
        raise ValueError("spike counts must be non-negative")
    if bin_count is None:
        bin_count = math.ceil(math.sqrt(counts.size))
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")

    rates = counts / float(total_steps)
    max_rate = float(rates.max())
    if max_rate == 0.0:
        pdf = np.zeros(bin_count)
        edges = np.linspace(0.0, 0.0, bin_count + 1)
        entropy = 0.0
    else:
        hist, edges = np.histogram(rates, bins=bin_count, range=(0.0, max_rate))
        pdf = hist / counts.size
        nonzero = pdf[pdf > 0]
        entropy = float(-(nonzero * np.log2(nonzero)).sum())
    active_fraction = float((rates > 0).sum() / counts.size)

    sizes = []
    if step_totals is not None:
        for window in step_totals:
            window = np.asarray(window)
            run = 0
            for total in window:
                if total > 0:
                    run += int(total)
                elif run > 0:
                    sizes.append(run)
                    run = 0
            if run > 0:
                sizes.append(run)
    if sizes:
        unique, tallies = np.unique(np.asarray(sizes, dtype=np.int64), return_counts=True)
    else:
        unique = np.empty(0, dtype=np.int64)
        tallies = np.empty(0, dtype=np.int64)

    return FiringStats(
        rates=rates,
        rate_pdf=pdf,
        bin_edges=edges,
        entropy_bits=entropy,
        active_fraction=active_fraction,
        avalanche_sizes=unique,
        avalanche_counts=tallies,
    )


@dataclass(frozen=True)
class TuningPoint:
    """One grid point of the adaptation-rate sweep."""

    theta_pos: float
    theta_neg: float
    active_fraction: float
    entropy_bits: float


def sweep_ip_rates(
    train_fn,
    pos_grid: list[float],
    neg_grid: list[float],
) -> list[TuningPoint]:
    """Run ``train_fn(IpRates)`` over the full grid, in grid order.

    ``train_fn`` must run a fresh training pass with the given rates and
    return its FiringStats. Exceptions from the callback propagate.
    """
    if not len(pos_grid) or not len(neg_grid):
        raise EmptyGridError("tuning grids must be non-empty")
    points = []
    for theta_pos in pos_grid:
        for theta_neg in neg_grid:
            stats = train_fn(IpRates(theta_pos=theta_pos, theta_neg=theta_neg))
            points.append(
                TuningPoint(
                    theta_pos=float(theta_pos),
                    theta_neg=float(theta_neg),
                    active_fraction=stats.active_fraction,
                    entropy_bits=stats.entropy_bits,
                )
            )
    return points


def select_ip_rates(points: list[TuningPoint], active_tolerance: float = 1e-6) -> IpRates:
    """Pick the best grid point: widest activation, then lowest entropy.

    Points within ``active_tolerance`` of the best active fraction are tied;
    among them the lowest entropy wins, then the smaller theta_pos, then the
    smaller theta_neg.
    """
    if not points:
        raise EmptyGridError("no tuning points to select from")
    best_active = max(p.active_fraction for p in points)
    tied = [p for p in points if p.active_fraction >= best_active - active_tolerance]
    winner = min(tied, key=lambda p: (p.entropy_bits, p.theta_pos, p.theta_neg))
    return IpRates(theta_pos=winner.theta_pos, theta_neg=winner.theta_neg)


def tune_ip_rates(
    train_fn,
    pos_grid: list[float],
    neg_grid: list[float],
    active_tolerance: float = 1e-6,
) -> IpRates:
    """Grid-search adaptation rates; see ``sweep_ip_rates`` and ``select_ip_rates``."""
    return select_ip_rates(sweep_ip_rates(train_fn, pos_grid, neg_grid), active_tolerance)
