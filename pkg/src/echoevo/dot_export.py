"""Graphviz DOT rendering of genomes.

Node fill encodes the role (input green, output yellow, bias purple,
hidden brown). Edge color encodes synapse kind and sign: forward synapses
are blue, recurrent ones red, with the light shade for negative weights
and the dark shade for positive ones. Pen width scales with |weight|.
All echo-network synapses are previous-step reads, so they render in the
recurrent palette.
"""

import numpy as np

from .echo_core import EchoGenome
from .rnn_baseline import FORWARD, ROLE_BIAS, ROLE_INPUT, ROLE_OUTPUT, RnnGenome

_FILL = {"input": "palegreen", "output": "gold", "bias": "plum", "hidden": "tan"}
_EDGE = {
    ("forward", True): "blue4",
    ("forward", False): "lightskyblue",
    ("recurrent", True): "red4",
    ("recurrent", False): "lightpink",
}


def _penwidth(weight, w_max):
    if w_max <= 0:
        return 1.0
    return max(0.1, 3.0 * abs(weight) / w_max)


def _edge_line(src, dst, weight, kind, w_max):
    color = _EDGE[(kind, weight > 0)]
    return (
        f'  {src} -> {dst} [color={color} penwidth={_penwidth(weight, w_max):.3f}];'
    )


def genome_to_dot(genome, name: str = "network") -> str:
    if isinstance(genome, EchoGenome):
        return _echo_dot(genome, name)
    if isinstance(genome, RnnGenome):
        return _rnn_dot(genome, name)
    raise TypeError(f"not a genome: {type(genome).__name__}")


def _role_of(genome: EchoGenome, i: int) -> str:
    if i in genome.input_neurons:
        return "input"
    if i in genome.output_neurons:
        return "output"
    if i in genome.bias_neurons:
        return "bias"
    return "hidden"


def _echo_dot(genome: EchoGenome, name: str) -> str:
    w = genome.weights
    w_max = float(np.max(np.abs(w))) if genome.n else 0.0
    lines = [f'digraph "{name}" {{', "  rankdir=LR;",
             "  node [shape=circle style=filled fontsize=10];"]
    for i in range(genome.n):
        lines.append(f'  n{i} [label="{i}" fillcolor={_FILL[_role_of(genome, i)]}];')
    for i in range(genome.n):
        for j in range(genome.n):
            if w[i, j] != 0.0:
                lines.append(_edge_line(f"n{i}", f"n{j}", w[i, j], "recurrent", w_max))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _rnn_dot(genome: RnnGenome, name: str) -> str:
    w_max = max((abs(s.weight) for s in genome.synapses), default=0.0)
    lines = [f'digraph "{name}" {{', "  rankdir=LR;",
             "  node [shape=circle style=filled fontsize=10];"]
    role_fill = {ROLE_INPUT: "input", ROLE_OUTPUT: "output", ROLE_BIAS: "bias"}
    for nr in genome.neurons:
        fill = _FILL[role_fill.get(nr.role, "hidden")]
        lines.append(f'  n{nr.id} [label="{nr.id}" fillcolor={fill}];')
    layers = sorted({nr.layer for nr in genome.neurons})
    for layer in layers:
        ids = [nr.id for nr in genome.neurons if nr.layer == layer]
        members = " ".join(f"n{i};" for i in ids)
        lines.append(f"  {{ rank=same; {members} }}")
    for s in genome.synapses:
        kind = "forward" if s.kind == FORWARD else "recurrent"
        lines.append(_edge_line(f"n{s.src}", f"n{s.dst}", s.weight, kind, w_max))
    lines.append("}")
    return "\n".join(lines) + "\n"
