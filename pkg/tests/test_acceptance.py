"""Acceptance suite: eleven end-to-end checks of the package's core promises.

Each check is one test, in a fixed order: exact oracle equivalence for the
synaptic update, the analytic first-spike time, the rate-entropy estimate and
the classification metrics; exact threshold-growth arithmetic; structural
pruning guarantees; directional replications of the rate-regulation and
accuracy-ordering effects on the bundled synthetic fixture; byte-level
determinism of the command line runner; committed encoder goldens; and an
EEG-shaped end-to-end runtime envelope. Every numerical tolerance and time
budget is pinned here, not in the library.
"""

import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from spikeplast import (
    AnalogSample,
    ConfusionMatrix,
    ExperimentConfig,
    IpRates,
    LifParams,
    Network,
    NetworkConfig,
    NeuronState,
    SpikeTrain,
    StdpParams,
    SynapseMatrix,
    aer_encode,
    apply_stdp,
    compute_firing_stats,
    compute_metrics,
    generate_synthetic,
    ip_update,
    lif_step,
    prepare_dataset,
    prune_by_rate,
    run_experiment,
    run_split_repeats,
    two_sample_t,
    wrist_like_spec,
)
from spikeplast.cli import main
from spikeplast.evaluation import APPROACH_ENSEMBLE, APPROACH_PRUNED, APPROACH_STDP
from spikeplast.network import adapt_thresholds
from spikeplast.neuron import threshold_steps

GOLDEN_DIR = Path(__file__).parent / "golden"

WRIST_APPROACHES = (APPROACH_STDP, APPROACH_ENSEMBLE, APPROACH_PRUNED)


# --- shared fixtures ---


@pytest.fixture(scope="module")
def wrist_comparison(wrist_dataset):
    """30-repeat split evaluations of all three approaches on the same splits.

    One base seed drives every report, so repeat i uses the same train/test
    split and the same network seed under each approach and the per-repeat
    metrics are directly paired.
    """
    config = NetworkConfig(
        channel_count=wrist_dataset.channel_count, hidden_count=200, seed=0
    )
    reports = {}
    start = time.perf_counter()
    for approach in WRIST_APPROACHES:
        reports[approach] = run_split_repeats(
            wrist_dataset, config, approach, train_fraction=0.7, repeats=30
        )
    reports["elapsed"] = time.perf_counter() - start
    return reports


@pytest.fixture(scope="module")
def event_trained_network():
    """A 200-neuron network trained on stochastic positive-event trains.

    The two channels fire at very different densities, which spreads the
    hidden rates widely enough that all three pruning thresholds below cut
    at distinct points of the distribution.
    """
    rng = np.random.default_rng(0)
    trains = []
    for _ in range(10):
        events = np.zeros((2, 200), dtype=np.int8)
        for channel, density in enumerate((0.5, 0.1)):
            events[channel, rng.random(200) < density] = 1
        trains.append(SpikeTrain(events))
    network = Network(
        NetworkConfig(channel_count=2, hidden_count=200, lif=LifParams(v_init=0.02), seed=0)
    )
    network.train_unsupervised(trains, "stdp_only")
    network.train_classifier(trains, ["a", "b"] * 5)
    return network, trains


# --- 1: synaptic update vs exhaustive pair sum ---


def _pair_sum_oracle(pre, post, params):
    # brute force over all spike pairs, post outer / pre inner, both ascending
    total = 0.0
    for t_post in post:
        for t_pre in pre:
            lag = int(t_post) - int(t_pre)
            if lag > 0:
                total += params.a_pos * math.exp(-lag / params.tau_pos)
            elif lag < 0:
                total -= params.a_neg * math.exp(lag / params.tau_neg)
    return total


def test_c01_stdp_matches_exhaustive_pair_sum_exactly():
    params = StdpParams()
    rng = np.random.default_rng(101)
    # compile the kernel before the clock starts
    apply_stdp(SynapseMatrix(np.zeros((1, 1))), [np.array([0])], [np.array([1])], params)

    cases = []
    for _ in range(1000):
        pre = np.sort(rng.choice(64, size=int(rng.integers(0, 9)), replace=False))
        post = np.sort(rng.choice(64, size=int(rng.integers(0, 9)), replace=False))
        cases.append((pre, post, float(rng.uniform(params.w_min, params.w_max))))

    start = time.perf_counter()
    results = []
    for pre, post, w0 in cases:
        synapses = SynapseMatrix(np.array([[w0]]))
        apply_stdp(synapses, [pre], [post], params)
        results.append(synapses.weights[0, 0])
    elapsed = time.perf_counter() - start

    for (pre, post, w0), got in zip(cases, results):
        expected = w0 + _pair_sum_oracle(pre, post, params)
        expected = min(max(expected, params.w_min), params.w_max)
        assert got == expected, f"pre={pre} post={post} w0={w0}: {got!r} != {expected!r}"
    assert elapsed < 5.0
    print(f"  1000 windows, exact match, {elapsed * 1e3:.0f} ms")


# --- 2: first spike time vs closed form ---


def test_c02_first_spike_time_matches_analytic_formula():
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    for _ in range(50):
        current = float(rng.uniform(0.1, 1.0))
        # keep the drive ratio in (0, 0.75]: closer to 1 the continuous
        # crossing flattens and discretisation error can exceed one step
        ratio = float(rng.uniform(0.1, 0.75))
        params = LifParams(v_init=ratio * current)  # v_thr = ratio * R * I at R = 1
        state = NeuronState.fresh(params)
        steps = 0
        spiked = False
        while not spiked and steps < 400:
            state, spiked = lif_step(state, current, params)
            steps += 1
        assert spiked
        drive = params.v_init / (params.resistance * current)
        analytic = math.ceil(-params.tau_m * math.log(1.0 - drive))
        assert abs(steps - analytic) <= 1, (current, params.v_init, steps, analytic)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"  50 (I, v_thr) pairs within +/-1 step, {elapsed * 1e3:.0f} ms")


# --- 3: entropy vs independent histogram oracle ---


def test_c03_entropy_matches_independent_histogram_oracle():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(100):
        density = float(rng.uniform(0.02, 0.5))
        raster = rng.random((20, 200)) < density
        counts = raster.sum(axis=1).astype(np.int64)
        stats = compute_firing_stats(counts, 200)

        rates = counts / 200.0
        bins = math.ceil(math.sqrt(counts.size))
        top = float(rates.max())
        if top == 0.0:
            expected = 0.0
        else:
            edges = np.linspace(0.0, top, bins + 1)
            idx = np.clip(np.searchsorted(edges, rates, side="right") - 1, 0, bins - 1)
            expected = 0.0
            for tally in np.bincount(idx, minlength=bins):
                if tally:
                    share = tally / rates.size
                    expected -= share * math.log2(share)
        worst = max(worst, abs(stats.entropy_bits - expected))
    assert worst <= 1e-9
    print(f"  100 rasters, largest entropy deviation {worst:.2e} bits")


# --- 4: threshold growth under forced spiking ---


def test_c04_threshold_growth_under_forced_spiking_is_exact():
    params = LifParams()
    rates = IpRates()
    n = 200
    step = (n * rates.theta_pos) * params.v_init
    assert math.isclose(step, 0.01, rel_tol=1e-12)
    q_pos, q_neg = threshold_steps(rates, n, params)
    assert q_pos == step

    state = NeuronState.fresh(params)
    for k in range(1, 501):
        state = ip_update(state, True, rates, n, params)
        assert state.v_thr == params.v_init + k * step, k

    v_thr = np.full(n, params.v_init)
    anchor = np.full(n, params.v_init)
    up = np.zeros(n, dtype=np.int64)
    down = np.zeros(n, dtype=np.int64)
    everyone = np.ones(n, dtype=bool)
    for k in range(1, 501):
        adapt_thresholds(
            v_thr, anchor, up, down, everyone, everyone, q_pos, q_neg, params.floor
        )
        assert (v_thr == params.v_init + k * step).all(), k
    print(f"  500 forced-spike steps bit-exact on both routes, step {step!r}")


# --- 5: pruning nesting and silence ---


def test_c05_prune_sets_nest_and_pruned_neurons_stay_silent(event_trained_network):
    network, trains = event_trained_network
    survivor_sets = []
    for threshold in (0.017, 0.052, 0.087):
        network.restore_all()
        report = prune_by_rate(network, threshold)
        survivors = frozenset(np.flatnonzero(network.active_mask).tolist())
        assert report.surviving_count == len(survivors) > 0
        pruned = np.flatnonzero(~network.active_mask)
        for train in trains:
            assert not network.propagate(train)[pruned].any()
        label, _ = network.infer(trains[0])
        assert label in ("a", "b")
        survivor_sets.append(survivors)
    network.restore_all()
    assert survivor_sets[2] < survivor_sets[1] < survivor_sets[0]
    print("  survivors at 0.017/0.052/0.087:", [len(s) for s in survivor_sets])


# --- 6: threshold adaptation regulates training rates ---


def test_c06_threshold_adaptation_lowers_training_rates(wrist_comparison):
    stdp = wrist_comparison[APPROACH_STDP].metric_values("mean_training_rate")
    ensemble = wrist_comparison[APPROACH_ENSEMBLE].metric_values("mean_training_rate")
    assert ensemble.mean() < stdp.mean()
    welch = two_sample_t(ensemble, stdp)
    assert welch.p_value < 0.05
    assert wrist_comparison["elapsed"] < 600.0
    print(
        f"  mean rate {ensemble.mean():.5f} (ensemble) vs {stdp.mean():.5f} (stdp), "
        f"p {welch.p_value:.1e}, all repeats in {wrist_comparison['elapsed']:.1f} s"
    )


# --- 7: accuracy ordering across approaches ---


def test_c07_accuracy_ordering_across_approaches(wrist_comparison):
    accuracy = {
        approach: wrist_comparison[approach].metric_values("accuracy")
        for approach in WRIST_APPROACHES
    }
    # repeats are paired across approaches: same split, same network seed
    for approach in (APPROACH_ENSEMBLE, APPROACH_PRUNED):
        assert [r.network_seed for r in wrist_comparison[approach].runs] == [
            r.network_seed for r in wrist_comparison[APPROACH_STDP].runs
        ]
    assert accuracy[APPROACH_ENSEMBLE].mean() >= accuracy[APPROACH_STDP].mean()
    ordered = (accuracy[APPROACH_ENSEMBLE] >= accuracy[APPROACH_STDP]).mean()
    assert ordered >= 0.8
    gap = abs(accuracy[APPROACH_PRUNED].mean() - accuracy[APPROACH_ENSEMBLE].mean())
    assert gap <= 0.05
    print(
        f"  accuracy {accuracy[APPROACH_ENSEMBLE].mean():.4f} (ensemble) >= "
        f"{accuracy[APPROACH_STDP].mean():.4f} (stdp) on {ordered:.0%} of repeats, "
        f"pruned gap {gap:.4f}"
    )


# --- 8: metrics vs exact rational arithmetic ---


def _metrics_oracle(counts):
    size = len(counts)
    total = sum(sum(row) for row in counts)
    accuracy = Fraction(sum(counts[i][i] for i in range(size)), total)
    f1_sum = Fraction(0)
    expected_agreement = Fraction(0)
    for i in range(size):
        tp = counts[i][i]
        row = sum(counts[i])
        col = sum(counts[j][i] for j in range(size))
        pair_count = 2 * tp + (col - tp) + (row - tp)
        if pair_count:
            f1_sum += Fraction(2 * tp, pair_count)
        expected_agreement += Fraction(row * col, total * total)
    if expected_agreement == 1:
        kappa = Fraction(1 if accuracy == 1 else 0)
    else:
        kappa = (accuracy - expected_agreement) / (1 - expected_agreement)
    return float(accuracy), float(f1_sum / size), float(kappa)


def test_c08_metrics_match_exact_fraction_arithmetic():
    matrices = [
        [[8, 2], [3, 7]],
        [[5, 0], [0, 5]],
        [[0, 5], [5, 0]],
        [[10, 0], [7, 0]],
        [[0, 0], [3, 9]],
        [[0, 1], [0, 1]],
        [[4]],
        [[4, 0], [0, 0]],
        [[7, 1, 0], [0, 8, 1], [1, 0, 6]],
        [[2, 2, 2], [2, 2, 2], [2, 2, 2]],
    ]
    rng = np.random.default_rng(808)
    while len(matrices) < 20:
        size = int(rng.integers(2, 6))
        counts = rng.integers(0, 31, size=(size, size))
        if counts.sum() > 0:
            matrices.append(counts.tolist())

    for counts in matrices:
        names = [f"c{i}" for i in range(len(counts))]
        metrics = compute_metrics(ConfusionMatrix(np.array(counts), names))
        accuracy, f1_macro, kappa = _metrics_oracle(counts)
        assert abs(metrics.accuracy - accuracy) <= 1e-9, counts
        assert abs(metrics.f1_macro - f1_macro) <= 1e-9, counts
        assert abs(metrics.kappa - kappa) <= 1e-9, counts

    reference = compute_metrics(ConfusionMatrix(np.array([[8, 2], [3, 7]]), ["a", "b"]))
    assert reference.accuracy == 0.75
    assert abs(reference.f1_macro - 299 / 399) <= 1e-12
    assert reference.kappa == 0.5
    print(f"  20 matrices within 1e-9; reference f1 {reference.f1_macro!r}")


# --- 9: command line determinism ---


def _run_config_doc(family, data_seed):
    return {
        "seed": 6,
        "dataset": {
            "synthetic": {
                "class_count": 2,
                "channel_count": 6,
                "timepoint_count": 64,
                "per_class_count": 6,
                "family": family,
                "seed": data_seed,
            }
        },
        "network": {"hidden_count": 40, "lif": {"v_init": 0.02}},
        "approaches": ["stdp_only", "ensemble_pruned"],
        "evaluation": {"kfold": 3, "repeats": 2},
    }


def _tree_bytes(root):
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def test_c09_cli_runs_are_byte_identical(tmp_path, capsys):
    outcomes = []
    for family, data_seed in (("sinusoid_mix", 2), ("band_transient", 3)):
        config_path = tmp_path / f"{family}.json"
        config_path.write_text(json.dumps(_run_config_doc(family, data_seed)))
        first = tmp_path / f"{family}_first"
        second = tmp_path / f"{family}_second"
        assert main(["run", str(config_path), "-o", str(first)]) == 0
        assert main(["run", str(config_path), "-o", str(second)]) == 0
        capsys.readouterr()
        one, two = _tree_bytes(first), _tree_bytes(second)
        assert sorted(one) == sorted(two)
        for name in one:
            assert one[name] == two[name], f"{family}: {name} differs between runs"
        outcomes.append(f"{family}: {len(one)} files byte-identical")
    print("  " + "; ".join(outcomes))


# --- 10: encoder goldens ---


def test_c10_encoder_reproduces_committed_goldens():
    channels = np.loadtxt(GOLDEN_DIR / "channels.csv", delimiter=",")
    symmetric = np.loadtxt(GOLDEN_DIR / "golden_symmetric.csv", delimiter=",", dtype=np.int64)
    literal = np.loadtxt(GOLDEN_DIR / "golden_literal.csv", delimiter=",", dtype=np.int64)
    assert channels.shape == symmetric.shape == literal.shape == (10, 64)
    assert (symmetric != 0).any() and (literal != 0).any()

    sample = AnalogSample(channels)
    assert np.array_equal(aer_encode(sample, 0.5).events, symmetric)
    assert np.array_equal(
        aer_encode(sample, 0.5, literal_negative=True).events, literal
    )
    print(
        f"  symmetric {int(np.abs(symmetric).sum())} events, "
        f"literal {int(np.abs(literal).sum())} events, both exact"
    )


# --- 11: EEG-shaped end-to-end envelope ---


def test_c11_eeg_shaped_dataset_flows_through_full_pipeline(tmp_path):
    config = ExperimentConfig.from_dict(
        {
            "seed": 0,
            "dataset": {
                "synthetic": {
                    "class_count": 2,
                    "channel_count": 32,
                    "timepoint_count": 8064,
                    "per_class_count": 12,
                    "seed": 5,
                }
            },
            "preprocess": {"reduce_window": 32},
            "network": {"hidden_count": 300},
            "approaches": ["stdp_only", "ensemble", "ensemble_pruned"],
        }
    )
    assert prepare_dataset(config).samples[0].values.shape == (32, 252)

    start = time.perf_counter()
    out = run_experiment(config, output_dir=tmp_path / "deap_shaped")
    elapsed = time.perf_counter() - start

    status = json.loads((out / "status.json").read_text())
    assert status["failed"] is None and status["error"] is None
    assert status["completed"] == [
        "dataset",
        "eval_stdp_only",
        "eval_ensemble",
        "eval_ensemble_pruned",
        "final_model",
    ]
    assert (out / "final" / "model.npz").is_file()
    for approach in config.approaches:
        assert (out / approach / "eval_kfold.json").is_file()
        assert (out / approach / "eval_split.json").is_file()
    assert elapsed < 1800.0
    print(f"  32x252 x 24 samples through every stage in {elapsed:.1f} s")
