"""Connection-matrix recurrent networks ("echo networks").

A network is fully described by one square weight matrix: rows are synapse
sources, columns are destinations, and an exact 0.0 entry means "no
synapse". Everything else about the network is a role designation on
neuron indices. One evaluation step advances all neurons simultaneously:

    aggregation[j] = sum_i activations[i] * weights[i, j]
    aggregation[k] += input_function_k(x_k)        for input neurons k
    activations'[j] = activation(aggregation[j])

Output is read with a separate output function applied to the output
neuron's aggregation value of the most recent step, i.e. before that
neuron's own activation squashes it. Bias neurons are encoded inside the
matrix: their column is all zero except a 1.0 on the diagonal, so under
ReLU the bias activation reproduces itself forever.
"""

from dataclasses import dataclass, field

import numpy as np

IDENTITY = "identity"
SIGN_REVERSAL = "sign_reversal"
INPUT_FUNCTIONS = (IDENTITY, SIGN_REVERSAL)
_INPUT_SIGNS = {IDENTITY: 1.0, SIGN_REVERSAL: -1.0}


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def identity(x):
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class EchoGenome:
    """Immutable network description.

    weights          (n, n) float matrix, rows = source neurons
    input_neurons    indices receiving external input, in slot order
    input_functions  one tag per input slot, identity or sign_reversal
    output_neurons   indices whose aggregation is read as output
    bias_neurons     indices holding constant activation 1.0
    """

    weights: np.ndarray
    input_neurons: tuple = ()
    input_functions: tuple = ()
    output_neurons: tuple = ()
    bias_neurons: tuple = ()

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weights must be square and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        n = w.shape[0]
        ins = tuple(int(i) for i in self.input_neurons)
        funcs = tuple(str(f) for f in self.input_functions)
        outs = tuple(int(i) for i in self.output_neurons)
        biases = tuple(sorted(int(i) for i in self.bias_neurons))
        for name, idxs in (("input", ins), ("output", outs), ("bias", biases)):
            for i in idxs:
                if not 0 <= i < n:
                    raise ValueError(f"{name} neuron {i} out of range for n={n}")
            if len(set(idxs)) != len(idxs):
                raise ValueError(f"duplicate {name} neuron designation")
        if set(ins) & set(outs) or set(ins) & set(biases) or set(outs) & set(biases):
            raise ValueError("input, output and bias designations must be disjoint")
        if len(funcs) != len(ins):
            raise ValueError("need exactly one input function per input neuron")
        for f in funcs:
            if f not in INPUT_FUNCTIONS:
                raise ValueError(f"unknown input function {f!r}")
        for b in biases:
            col = w[:, b]
            if col[b] != 1.0 or np.count_nonzero(col) != 1:
                raise ValueError(
                    f"bias neuron {b} needs a zero column with a 1.0 diagonal entry"
                )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "input_neurons", ins)
        object.__setattr__(self, "input_functions", funcs)
        object.__setattr__(self, "output_neurons", outs)
        object.__setattr__(self, "bias_neurons", biases)
        # cached index arrays for the kernels and for step()
        object.__setattr__(self, "input_idx", np.asarray(ins, dtype=np.int64))
        object.__setattr__(
            self, "input_signs",
            np.asarray([_INPUT_SIGNS[f] for f in funcs], dtype=np.float64))
        object.__setattr__(self, "output_idx", np.asarray(outs, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class EchoState:
    """Activations after `step` evaluation steps.

    pre_activations holds the aggregation values of the step that produced
    `activations`; it is None before the first step, when no aggregation
    has happened yet.
    """

    activations: np.ndarray
    step: int = 0
    pre_activations: np.ndarray = field(default=None, repr=False)


def init_state(genome: EchoGenome, init_value: float = 1.0) -> EchoState:
    act = np.full(genome.n, float(init_value))
    act.setflags(write=False)
    return EchoState(activations=act, step=0)


def step(genome: EchoGenome, state: EchoState, inputs, activation=relu) -> EchoState:
    """Advance the network by one step, presenting `inputs` to the input neurons."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.shape != (len(genome.input_neurons),):
        raise ValueError(
            f"expected {len(genome.input_neurons)} input values, got shape {inputs.shape}")
    pre = state.activations @ genome.weights
    if genome.input_idx.size:
        pre[genome.input_idx] += genome.input_signs * inputs
    act = activation(pre)
    pre.setflags(write=False)
    act.setflags(write=False)
    return EchoState(activations=act, step=state.step + 1, pre_activations=pre)


def read_output(genome: EchoGenome, state: EchoState, output_fn=sigmoid):
    """Output function applied to the output neurons' latest aggregations."""
    if state.pre_activations is None:
        raise ValueError("cannot read output before the first evaluation step")
    return output_fn(state.pre_activations[genome.output_idx])


class _BudgetExceeded(Exception):
    pass


def longest_acyclic_path(genome: EchoGenome, budget: int = 250_000) -> int:
    """Longest simple path (in synapses) from any input to any output.

    Exact via depth-first search for n <= 32 within an expansion budget;
    beyond that returns n, which is always enough evaluation steps for a
    signal to cross the network.
    """
    n = genome.n
    inputs = genome.input_neurons
    outputs = set(genome.output_neurons)
    if not inputs or not outputs:
        return 0
    if n > 32:
        return n
    succ = [np.nonzero(genome.weights[i])[0].tolist() for i in range(n)]
    visited = [False] * n
    best = 0
    spent = 0

    def dfs(v, depth):
        nonlocal best, spent
        if v in outputs and depth > best:
            best = depth
        visited[v] = True
        for u in succ[v]:
            if not visited[u]:
                spent += 1
                if spent > budget:
                    raise _BudgetExceeded
                dfs(u, depth + 1)
        visited[v] = False

    try:
        for s in inputs:
            dfs(s, 0)
    except _BudgetExceeded:
        return n
    return best
