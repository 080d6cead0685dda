"""Lossless JSON serialization for both genome kinds.

Floats go through json's repr round-trip, so a load reproduces every weight
bit for bit. The layout is stable (fixed key order, sorted synapse lists),
which makes serialized text usable as an identity check for genomes.
"""

import json

from .echo_core import EchoGenome
from .rnn_baseline import RnnGenome, RnnNeuron, RnnSynapse

KIND_ECHO = "echo"
KIND_RNN = "rnn"


def genome_kind(genome) -> str:
    if isinstance(genome, EchoGenome):
        return KIND_ECHO
    if isinstance(genome, RnnGenome):
        return KIND_RNN
    raise TypeError(f"not a genome: {type(genome).__name__}")


def genome_to_dict(genome) -> dict:
    kind = genome_kind(genome)
    if kind == KIND_ECHO:
        return {
            "kind": KIND_ECHO,
            "n": genome.n,
            "weights": [[float(w) for w in row] for row in genome.weights],
            "input_neurons": list(genome.input_neurons),
            "input_functions": list(genome.input_functions),
            "output_neurons": list(genome.output_neurons),
            "bias_neurons": list(genome.bias_neurons),
        }
    return {
        "kind": KIND_RNN,
        "neurons": [
            {"id": nr.id, "role": nr.role, "layer": nr.layer} for nr in genome.neurons
        ],
        "synapses": [
            {"src": s.src, "dst": s.dst, "weight": float(s.weight), "kind": s.kind}
            for s in genome.synapses
        ],
    }


def genome_from_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("genome document needs a 'kind' field")
    kind = d["kind"]
    if kind == KIND_ECHO:
        genome = EchoGenome(
            weights=d["weights"],
            input_neurons=d["input_neurons"],
            input_functions=d["input_functions"],
            output_neurons=d["output_neurons"],
            bias_neurons=d["bias_neurons"],
        )
        if genome.n != int(d.get("n", genome.n)):
            raise ValueError("declared n does not match the weight matrix")
        return genome
    if kind == KIND_RNN:
        return RnnGenome(
            neurons=tuple(
                RnnNeuron(int(x["id"]), str(x["role"]), int(x["layer"]))
                for x in d["neurons"]
            ),
            synapses=tuple(
                RnnSynapse(int(x["src"]), int(x["dst"]), float(x["weight"]), str(x["kind"]))
                for x in d["synapses"]
            ),
        )
    raise ValueError(f"unknown genome kind {kind!r}")


def dumps_genome(genome) -> str:
    return json.dumps(genome_to_dict(genome), indent=2) + "\n"


def loads_genome(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"not valid genome JSON: {e}") from e
    return genome_from_dict(d)


def save_genome(genome, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_genome(genome))


def load_genome(path):
    with open(path) as fh:
        return loads_genome(fh.read())
