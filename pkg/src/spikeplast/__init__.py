"""Spiking neural network engine with ensemble plasticity.

Multichannel analog windows are encoded into ternary address events, driven
through a two-layer network of adaptive leaky integrate-and-fire neurons
trained with STDP plus per-step threshold adaptation, optionally pruned by
firing rate, and classified with evolving rank-order output neurons. The
evaluation harness compares plasticity regimes over stratified resampling.
"""

from .classifier import (
    OutputNeuron,
    RankOrderParams,
    classify,
    evolve_output_neuron,
)
from .config import ExperimentConfig
from .data import (
    Dataset,
    SyntheticSpec,
    deap_like_spec,
    generate_synthetic,
    load_csv_dataset,
    reduce_dataset,
    reduce_window,
    save_csv_dataset,
    wrist_like_spec,
)
from .encoding import AnalogSample, SpikeTrain, aer_encode, temporal_difference
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    Metrics,
    RunRecord,
    TTestResult,
    compute_metrics,
    encode_dataset,
    run_kfold,
    run_split_repeats,
    two_sample_t,
)
from .experiment import prepare_dataset, run_experiment
from .network import Network, NetworkConfig, load_model, save_model
from .neuron import IpRates, LifParams, NeuronState, ip_update, lif_step
from .plasticity import (
    FiringStats,
    StdpParams,
    SynapseMatrix,
    TuningPoint,
    apply_stdp,
    compute_firing_stats,
    stdp_window,
    stdp_window_table,
    sweep_ip_rates,
    tune_ip_rates,
)
from .pruning import PruneReport, prune_by_rate, suggest_thresholds

__version__ = "0.1.0"

__all__ = [
    "AnalogSample",
    "ConfusionMatrix",
    "Dataset",
    "EvalReport",
    "ExperimentConfig",
    "FiringStats",
    "IpRates",
    "LifParams",
    "Metrics",
    "Network",
    "NetworkConfig",
    "NeuronState",
    "OutputNeuron",
    "PruneReport",
    "RankOrderParams",
    "RunRecord",
    "SpikeTrain",
    "StdpParams",
    "SynapseMatrix",
    "SyntheticSpec",
    "TTestResult",
    "TuningPoint",
    "aer_encode",
    "apply_stdp",
    "classify",
    "compute_firing_stats",
    "compute_metrics",
    "deap_like_spec",
    "encode_dataset",
    "evolve_output_neuron",
    "generate_synthetic",
    "ip_update",
    "lif_step",
    "load_csv_dataset",
    "load_model",
    "prepare_dataset",
    "prune_by_rate",
    "reduce_dataset",
    "reduce_window",
    "run_experiment",
    "run_kfold",
    "run_split_repeats",
    "save_csv_dataset",
    "save_model",
    "stdp_window",
    "stdp_window_table",
    "suggest_thresholds",
    "sweep_ip_rates",
    "temporal_difference",
    "tune_ip_rates",
    "two_sample_t",
    "wrist_like_spec",
]
