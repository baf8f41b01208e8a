"""Leaky integrate-and-fire neuron with an adaptive firing threshold.

The membrane follows the usual explicit-Euler discretisation

    v <- v + (dt / tau_m) * (v_rest - v + R * I),   tau_m = R * C

and spikes when v reaches the threshold, after which the membrane is reset
and held at rest for a refractory period.

The threshold adapts homeostatically: a neuron that spiked on the previous
step raises its threshold by ``N * theta_pos * v_init`` (N = layer size),
otherwise it decays by ``N * theta_neg * v_init``, floored at a small
positive value. Because these increments are tiny and repeated thousands of
times, the threshold is stored in an exact affine form

    v_thr = anchor + (up_count * q_pos - down_count * q_neg)

instead of being accumulated step by step. Integer counters keep the update
arithmetic free of cumulative rounding: after k consecutive raises from the
anchor the threshold equals fl(anchor + k * q_pos) exactly, matching the
closed-form value. The anchor only moves when the floor clips the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InactiveNeuronError, NonFiniteCurrentError

THRESHOLD_FLOOR_SCALE = 1e-6


@dataclass(frozen=True)
class LifParams:
    """Membrane constants shared by a layer of neurons.

    ``v_init`` doubles as the initial threshold and the unit for threshold
    adaptation. ``threshold_floor`` defaults to 1e-6 * v_init when left None.
    """

    v_init: float = 0.05
    v_rest: float = 0.0
    resistance: float = 1.0
    capacitance: float = 10.0
    t_refractory: int = 5
    dt: float = 1.0
    threshold_floor: float | None = None

    def __post_init__(self):
        if self.v_init <= self.v_rest:
            raise ValueError("v_init must exceed v_rest")
        if self.resistance <= 0 or self.capacitance <= 0:
            raise ValueError("resistance and capacitance must be positive")
        if self.t_refractory < 0:
            raise ValueError("t_refractory must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def tau_m(self) -> float:
        return self.resistance * self.capacitance

    @property
    def leak_rate(self) -> float:
        return self.dt / self.tau_m

    @property
    def floor(self) -> float:
        if self.threshold_floor is not None:
            return self.threshold_floor
        return THRESHOLD_FLOOR_SCALE * self.v_init


@dataclass(frozen=True)
class IpRates:
    """Threshold adaptation rates, both dimensionless in [0, 1]."""

    theta_pos: float = 1e-3
    theta_neg: float = 1e-5

    def __post_init__(self):
        for name in ("theta_pos", "theta_neg"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0) or not math.isfinite(value):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


def threshold_steps(rates: IpRates, layer_size: int, params: LifParams) -> tuple[float, float]:
    """Per-step threshold increment and decrement for a layer of given size."""
    q_pos = (layer_size * rates.theta_pos) * params.v_init
    q_neg = (layer_size * rates.theta_neg) * params.v_init
    return q_pos, q_neg


@dataclass(frozen=True)
class NeuronState:
    """Full state of one neuron; value semantics, step functions return copies.

    ``thr_anchor`` with the two counters is the affine threshold
    representation; ``v_thr`` is always the materialised value
    fl(anchor + (up * q_pos - down * q_neg)).
    """

    v: float
    v_thr: float
    refractory_remaining: int = 0
    spike_count: int = 0
    active: bool = True
    thr_anchor: float = 0.0
    thr_up: int = 0
    thr_down: int = 0

    @classmethod
    def fresh(cls, params: LifParams) -> "NeuronState":
        return cls(v=params.v_rest, v_thr=params.v_init, thr_anchor=params.v_init)


def lif_step(state: NeuronState, input_current: float, params: LifParams) -> tuple[NeuronState, bool]:
    """Advance one timestep; returns the new state and whether it spiked.

    During the refractory period the membrane is clamped to rest, the counter
    decrements and no spike is possible. A spike resets the membrane to rest
    and restarts the refractory counter. The threshold is not touched here.
    """
    if not state.active:
        raise InactiveNeuronError("lif_step called on a deactivated neuron")
    if not math.isfinite(input_current):
        raise NonFiniteCurrentError(f"input current is {input_current!r}")
    if state.refractory_remaining > 0:
        return (
            replace(state, v=params.v_rest, refractory_remaining=state.refractory_remaining - 1),
            False,
        )
    v = state.v + params.leak_rate * (params.v_rest - state.v + params.resistance * input_current)
    if v >= state.v_thr:
        return (
            replace(
                state,
                v=params.v_rest,
                refractory_remaining=params.t_refractory,
                spike_count=state.spike_count + 1,
            ),
            True,
        )
    return replace(state, v=v), False


def ip_update(
    state: NeuronState,
    spiked_last_step: bool,
    rates: IpRates,
    layer_size: int,
    params: LifParams,
) -> NeuronState:
    """Adapt the threshold after one timestep of a training pass.

    Raise by q_pos if the neuron spiked on the step just simulated, else
    lower by q_neg, clipping at the floor. A floor hit rebases the affine
    representation so later raises start from the floor exactly.
    """
    if not state.active:
        raise InactiveNeuronError("ip_update called on a deactivated neuron")
    q_pos, q_neg = threshold_steps(rates, layer_size, params)
    up = state.thr_up + (1 if spiked_last_step else 0)
    down = state.thr_down + (0 if spiked_last_step else 1)
    # inner difference first: keeps all-raise and all-lower histories exact
    v_thr = state.thr_anchor + (up * q_pos - down * q_neg)
    if v_thr < params.floor:
        return replace(state, v_thr=params.floor, thr_anchor=params.floor, thr_up=0, thr_down=0)
    return replace(state, v_thr=v_thr, thr_up=up, thr_down=down)
