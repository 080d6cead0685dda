import itertools

import numpy as np

from echoevo.echo_core import IDENTITY, SIGN_REVERSAL, EchoGenome
from echoevo.evolution import EvolutionConfig, minimal_rnn_genome, mutate


def reference_echo_step(genome, activations, inputs):
    """Plain-python interpreter of the step semantics, used as an oracle.

    Returns (activations, aggregations) as lists of floats.
    """
    n = genome.n
    pre = []
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += float(activations[i]) * float(genome.weights[i, j])
        pre.append(s)
    for k, neuron in enumerate(genome.input_neurons):
        x = float(inputs[k])
        if genome.input_functions[k] == SIGN_REVERSAL:
            x = -x
        pre[neuron] += x
    act = [p if p > 0.0 else 0.0 for p in pre]
    return act, pre


def random_echo_genome(rng, max_n=8, density=0.5, force_bias=False):
    """Random valid genome: uniform weights, shuffled role designations."""
    n = int(rng.integers(3, max_n + 1))
    w = rng.uniform(-2.0, 2.0, size=(n, n))
    w[rng.random((n, n)) >= density] = 0.0
    order = [int(i) for i in rng.permutation(n)]
    n_in = int(rng.integers(1, min(3, n - 2) + 1))
    ins = tuple(order[:n_in])
    outs = (order[n_in],)
    rest = order[n_in + 1:]
    n_bias = 0
    if rest:
        n_bias = 1 if force_bias else int(rng.integers(0, 2))
    biases = tuple(rest[:n_bias])
    for b in biases:
        w[:, b] = 0.0
        w[b, b] = 1.0
    funcs = tuple(
        IDENTITY if rng.random() < 0.5 else SIGN_REVERSAL for _ in ins)
    return EchoGenome(weights=w, input_neurons=ins, input_functions=funcs,
                      output_neurons=outs, bias_neurons=biases)


def random_rnn_genome(rng, n_mutations=8):
    """Random valid layered genome, grown from the minimal seed by mutation."""
    config = EvolutionConfig(p_add_synapse=0.35, p_remove_synapse=0.1,
                             p_add_neuron=0.3, p_remove_neuron=0.05,
                             weight_mutation_rate=0.5)
    genome = minimal_rnn_genome(config, rng)
    for _ in range(n_mutations):
        genome = mutate(genome, config, rng)
    return genome


def assert_unit_scale_close(actual, expected, tol=1e-12):
    """|a - b| <= tol at unit scale, relative beyond it."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    assert actual.shape == expected.shape
    scale = np.maximum(1.0, np.maximum(np.abs(actual), np.abs(expected)))
    worst = np.max(np.abs(actual - expected) / scale) if actual.size else 0.0
    assert worst <= tol, f"max deviation {worst} above {tol}"


def exhaustive_longest_path(weights, inputs, outputs):
    """Brute-force longest simple input->output path, in synapse count."""
    weights = np.asarray(weights)
    n = weights.shape[0]
    best = 0
    for start in inputs:
        for end in outputs:
            if start == end:
                continue
            others = [v for v in range(n) if v not in (start, end)]
            for k in range(len(others) + 1):
                for mid in itertools.permutations(others, k):
                    path = (start, *mid, end)
                    if all(weights[path[i], path[i + 1]] != 0.0
                           for i in range(len(path) - 1)):
                        best = max(best, len(path) - 1)
    return best
