"""Layered recurrent baseline networks.

These are conventional neuron/synapse-list genomes. Layers are not part of
the genotype; they are assigned after construction: every neuron's layer is
the length of the longest forward-synapse path reaching it from the inputs
(inputs and biases sit at layer 0), and output neurons are then bumped to
the global maximum layer. Forward synapses read the current step's values
of strictly lower layers; recurrent synapses read the previous step's value
of any neuron, introducing a one-step delay.

The output neuron applies a sigmoid to its aggregation, every other
non-bias neuron ReLU, and bias neurons are clamped to 1.0.
"""

import math
from dataclasses import dataclass

import numpy as np

ROLE_INPUT = "input"
ROLE_OUTPUT = "output"
ROLE_BIAS = "bias"
ROLE_HIDDEN = "hidden"
ROLES = (ROLE_INPUT, ROLE_OUTPUT, ROLE_BIAS, ROLE_HIDDEN)

FORWARD = "forward"
RECURRENT = "recurrent"
SYNAPSE_KINDS = (FORWARD, RECURRENT)


@dataclass(frozen=True)
class RnnNeuron:
    id: int
    role: str
    layer: int = 0


@dataclass(frozen=True)
class RnnSynapse:
    src: int
    dst: int
    weight: float
    kind: str


@dataclass(frozen=True, eq=False)
class RnnGenome:
    """Immutable neuron/synapse lists with layers already assigned.

    Construct through build_genome (or assign_layers), which computes the
    layer assignment; direct construction validates that the stored layers
    are exactly the canonical ones.
    """

    neurons: tuple
    synapses: tuple

    def __post_init__(self):
        neurons = tuple(sorted(self.neurons, key=lambda nr: nr.id))
        synapses = tuple(sorted(self.synapses, key=lambda s: (s.src, s.dst, s.kind)))
        if not neurons:
            raise ValueError("genome needs at least one neuron")
        ids = [nr.id for nr in neurons]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate neuron id")
        by_id = {nr.id: nr for nr in neurons}
        for nr in neurons:
            if nr.role not in ROLES:
                raise ValueError(f"unknown neuron role {nr.role!r}")
        keys = [(s.src, s.dst, s.kind) for s in synapses]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate synapse")
        for s in synapses:
            if s.src not in by_id or s.dst not in by_id:
                raise ValueError(f"synapse {s.src}->{s.dst} references a missing neuron")
            if s.kind not in SYNAPSE_KINDS:
                raise ValueError(f"unknown synapse kind {s.kind!r}")
            if not math.isfinite(s.weight):
                raise ValueError("synapse weight must be finite")
            if by_id[s.dst].role == ROLE_BIAS:
                raise ValueError("synapses into bias neurons are not allowed")
            if s.kind == FORWARD:
                if by_id[s.dst].role == ROLE_INPUT:
                    raise ValueError("forward synapses into input neurons are not allowed")
                if by_id[s.src].role == ROLE_OUTPUT:
                    raise ValueError("forward synapses out of output neurons are not allowed")
        layers = _compute_layers(neurons, synapses)
        for nr in neurons:
            if nr.layer != layers[nr.id]:
                raise ValueError(
                    f"neuron {nr.id} carries layer {nr.layer}, canonical is {layers[nr.id]}"
                )
        object.__setattr__(self, "neurons", neurons)
        object.__setattr__(self, "synapses", synapses)

    def neurons_by_role(self, role):
        return tuple(nr for nr in self.neurons if nr.role == role)

    @property
    def n(self) -> int:
        return len(self.neurons)


def _compute_layers(neurons, synapses):
    """Longest forward-path layer per neuron id; raises on a forward cycle."""
    ids = [nr.id for nr in neurons]
    indeg = {i: 0 for i in ids}
    succ = {i: [] for i in ids}
    for s in synapses:
        if s.src not in indeg or s.dst not in indeg:
            raise ValueError(
                f"synapse {s.src}->{s.dst} references a missing neuron")
        if s.kind == FORWARD:
            indeg[s.dst] += 1
            succ[s.src].append(s.dst)
    layer = {i: 0 for i in ids}
    queue = sorted(i for i in ids if indeg[i] == 0)
    done = 0
    while queue:
        v = queue.pop(0)
        done += 1
        for u in succ[v]:
            if layer[v] + 1 > layer[u]:
                layer[u] = layer[v] + 1
            indeg[u] -= 1
            if indeg[u] == 0:
                queue.append(u)
    if done != len(ids):
        raise ValueError("forward synapses form a cycle")
    top = max(layer.values())
    roles = {nr.id: nr.role for nr in neurons}
    for i in ids:
        if roles[i] == ROLE_OUTPUT:
            layer[i] = top
    return layer


def build_genome(neuron_roles, synapses) -> RnnGenome:
    """Construct a genome from (id, role) pairs and (src, dst, weight, kind) tuples."""
    syns = tuple(RnnSynapse(int(a), int(b), float(w), str(k)) for a, b, w, k in synapses)
    probe = tuple(RnnNeuron(int(i), str(r), 0) for i, r in neuron_roles)
    layers = _compute_layers(probe, syns)
    neurons = tuple(RnnNeuron(nr.id, nr.role, layers[nr.id]) for nr in probe)
    return RnnGenome(neurons=neurons, synapses=syns)


def assign_layers(genome: RnnGenome) -> RnnGenome:
    """Recompute the canonical layer assignment. Idempotent."""
    return build_genome(
        [(nr.id, nr.role) for nr in genome.neurons],
        [(s.src, s.dst, s.weight, s.kind) for s in genome.synapses],
    )


def _scalar_sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def rnn_step(genome: RnnGenome, prev_activations: dict, inputs) -> dict:
    """One evaluation step; returns the new value of every neuron by id.

    prev_activations must cover every neuron id. Neurons are evaluated in
    (layer, id) order so forward synapses see current-step source values.
    """
    values = _rnn_step_full(genome, prev_activations, inputs)[0]
    return values


def _rnn_step_full(genome, prev_activations, inputs):
    inputs = [float(x) for x in np.atleast_1d(np.asarray(inputs, dtype=np.float64))]
    input_ids = [nr.id for nr in genome.neurons_by_role(ROLE_INPUT)]
    if len(inputs) != len(input_ids):
        raise ValueError(f"expected {len(input_ids)} input values, got {len(inputs)}")
    slot = {i: k for k, i in enumerate(input_ids)}
    for nr in genome.neurons:
        if nr.id not in prev_activations:
            raise ValueError(f"prev_activations missing neuron {nr.id}")
    fwd_in = {nr.id: [] for nr in genome.neurons}
    rec_in = {nr.id: [] for nr in genome.neurons}
    for s in genome.synapses:
        (fwd_in if s.kind == FORWARD else rec_in)[s.dst].append(s)
    values = {}
    aggregations = {}
    for nr in sorted(genome.neurons, key=lambda x: (x.layer, x.id)):
        if nr.role == ROLE_BIAS:
            values[nr.id] = 1.0
            continue
        agg = 0.0
        for s in fwd_in[nr.id]:
            agg += s.weight * values[s.src]
        for s in rec_in[nr.id]:
            agg += s.weight * prev_activations[s.src]
        if nr.id in slot:
            agg += inputs[slot[nr.id]]
        aggregations[nr.id] = agg
        if nr.role == ROLE_OUTPUT:
            values[nr.id] = _scalar_sigmoid(agg)
        else:
            values[nr.id] = agg if agg > 0.0 else 0.0
    return values, aggregations


class RnnEvaluator:
    """Stateful stepper that also retains aggregation values.

    The output is read from the output neuron's aggregation of the most
    recent step, mirroring how echo networks are read.
    """

    def __init__(self, genome: RnnGenome, init_value: float = 1.0):
        self.genome = genome
        self.values = {
            nr.id: (1.0 if nr.role == ROLE_BIAS else float(init_value))
            for nr in genome.neurons
        }
        self.aggregations = None
        self.step_count = 0

    def step(self, inputs) -> dict:
        self.values, self.aggregations = _rnn_step_full(self.genome, self.values, inputs)
        self.step_count += 1
        return self.values

    def read_output(self, output_fn=None):
        if self.aggregations is None:
            raise ValueError("cannot read output before the first evaluation step")
        aggs = np.asarray(
            [self.aggregations[nr.id] for nr in self.genome.neurons_by_role(ROLE_OUTPUT)]
        )
        if output_fn is None:
            from .echo_core import sigmoid
            return sigmoid(aggs)
        return output_fn(aggs)


@dataclass(frozen=True)
class CompiledRnn:
    """Flat-array form consumed by the batch kernels.

    Positions are evaluation order, (layer, id). Synapses are CSR per
    destination position, split by kind.
    """

    order_ids: np.ndarray
    is_bias: np.ndarray
    input_slot: np.ndarray
    fwd_ptr: np.ndarray
    fwd_src: np.ndarray
    fwd_w: np.ndarray
    rec_ptr: np.ndarray
    rec_src: np.ndarray
    rec_w: np.ndarray
    out_pos: int
    n_inputs: int


def compile_rnn(genome: RnnGenome) -> CompiledRnn:
    outputs = genome.neurons_by_role(ROLE_OUTPUT)
    if len(outputs) != 1:
        raise ValueError(f"batch evaluation expects exactly one output neuron, got {len(outputs)}")
    order = sorted(genome.neurons, key=lambda nr: (nr.layer, nr.id))
    pos = {nr.id: p for p, nr in enumerate(order)}
    m = len(order)
    input_ids = [nr.id for nr in genome.neurons_by_role(ROLE_INPUT)]
    slot = {i: k for k, i in enumerate(input_ids)}
    is_bias = np.array([nr.role == ROLE_BIAS for nr in order], dtype=np.bool_)
    input_slot = np.array([slot.get(nr.id, -1) for nr in order], dtype=np.int64)
    fwd = {p: [] for p in range(m)}
    rec = {p: [] for p in range(m)}
    for s in genome.synapses:
        bucket = fwd if s.kind == FORWARD else rec
        bucket[pos[s.dst]].append((pos[s.src], s.weight))
    def csr(buckets):
        ptr = np.zeros(m + 1, dtype=np.int64)
        src, w = [], []
        for p in range(m):
            for sp, sw in sorted(buckets[p]):
                src.append(sp)
                w.append(sw)
            ptr[p + 1] = len(src)
        return ptr, np.asarray(src, dtype=np.int64), np.asarray(w, dtype=np.float64)
    fwd_ptr, fwd_src, fwd_w = csr(fwd)
    rec_ptr, rec_src, rec_w = csr(rec)
    return CompiledRnn(
        order_ids=np.array([nr.id for nr in order], dtype=np.int64),
        is_bias=is_bias,
        input_slot=input_slot,
        fwd_ptr=fwd_ptr, fwd_src=fwd_src, fwd_w=fwd_w,
        rec_ptr=rec_ptr, rec_src=rec_src, rec_w=rec_w,
        out_pos=pos[outputs[0].id],
        n_inputs=len(input_ids),
    )
