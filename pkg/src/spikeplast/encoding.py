"""Address event representation encoding of multichannel analog signals.

Each channel is reduced to its one-step temporal difference and thresholded
into ternary events: +1 where the signal rises faster than a per-channel
threshold, -1 where it falls faster, 0 otherwise. Thresholds are set from the
mean and sample standard deviation of the differences, scaled by a factor, so
the event density is roughly scale-free in the input units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyChannelError, NonFiniteInputError

DEFAULT_THRESHOLD_FACTOR = 0.5


@dataclass(frozen=True)
class AnalogSample:
    """One multichannel window of raw signal, shaped (channels, timepoints).

    Values must be finite and every channel needs at least two timepoints so
    a temporal difference exists.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise EmptyChannelError(
                f"expected a 2-d (channels, timepoints) array, got ndim={values.ndim}"
            )
        if values.shape[0] < 1 or values.shape[1] < 2:
            raise EmptyChannelError(
                f"need at least 1 channel and 2 timepoints, got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise NonFiniteInputError("analog sample contains NaN or infinite values")
        object.__setattr__(self, "values", values)

    @property
    def channel_count(self) -> int:
        return self.values.shape[0]

    @property
    def timepoint_count(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SpikeTrain:
    """Ternary event train shaped (channels, timepoints), values in {-1, 0, +1}."""

    events: np.ndarray

    def __post_init__(self):
        events = np.asarray(self.events)
        if events.ndim != 2:
            raise ValueError(f"expected a 2-d event array, got ndim={events.ndim}")
        if not np.isin(events, (-1, 0, 1)).all():
            raise ValueError("spike train values must be -1, 0 or +1")
        object.__setattr__(self, "events", events.astype(np.int8))

    @property
    def channel_count(self) -> int:
        return self.events.shape[0]

    @property
    def timepoint_count(self) -> int:
        return self.events.shape[1]


def temporal_difference(values: np.ndarray) -> np.ndarray:
    """One-step forward difference per channel, last column padded.

    diff[t] = x[t+1] - x[t] for t < n-1. The final column repeats the
    second-to-last difference so the output keeps the input length.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] < 2:
        raise EmptyChannelError("temporal difference needs at least 2 timepoints")
    diff = np.empty_like(values)
    diff[:, :-1] = values[:, 1:] - values[:, :-1]
    diff[:, -1] = diff[:, -2]
    return diff


def aer_encode(
    sample: AnalogSample,
    factor: float = DEFAULT_THRESHOLD_FACTOR,
    *,
    literal_negative: bool = False,
) -> SpikeTrain:
    """Encode an analog sample into ternary address events.

    Per channel, thresholds are computed on the padded temporal difference d:

        upper = mean(d) + factor * std(d)
        lower = mean(d) - factor * std(d)

    with the sample standard deviation (n - 1 denominator). Events are +1
    where d > upper, -1 where d < lower, else 0. Values exactly at a
    threshold stay 0.

    With ``literal_negative=True`` the negative test reuses the upper
    threshold (-1 wherever d < upper and not above it), which floods the
    train with negative events whenever the signal is not rising sharply.
    It is kept only for comparison against that behaviour.
    """
    if not np.isfinite(factor) or factor < 0:
        raise ValueError(f"threshold factor must be finite and >= 0, got {factor}")
    diff = temporal_difference(sample.values)
    mean = diff.mean(axis=1, keepdims=True)
    std = diff.std(axis=1, ddof=1, keepdims=True)
    upper = mean + factor * std
    lower = upper if literal_negative else mean - factor * std
    events = np.zeros(diff.shape, dtype=np.int8)
    events[diff > upper] = 1
    events[diff < lower] = -1
    return SpikeTrain(events)
