"""Neuroevolution of minimal recurrent networks for binary signal classification."""

__version__ = "0.1.0"

from .backend import BACKEND
from .echo_core import EchoGenome, EchoState, init_state, read_output, step
from .evolution import (EvolutionConfig, Individual, Population,
                        next_generation, seed_population)
from .rnn_baseline import RnnGenome

__all__ = [
    "BACKEND",
    "EchoGenome",
    "EchoState",
    "EvolutionConfig",
    "Individual",
    "Population",
    "RnnGenome",
    "init_state",
    "next_generation",
    "read_output",
    "seed_population",
    "step",
    "__version__",
]
