"""Binary classification harness on windowed recordings.

A genome sees each recording as a fresh episode: state is re-initialized,
then one evaluation step per window row (stride 1), with the window values
presented to the input neurons on every step. Each step casts a vote: the
bit is 1 exactly when the output neuron's aggregation is >= 0. A recording
is classified atypical when the mean bit exceeds the classification
threshold.

Generation protocol: every individual is scored on a fresh random train
subset; the generation's champion by raw fitness is measured on the full
validation split, and replaces the stored champion only when its
validation error strictly improves. The stored champion is finally scored
once on the test split.
"""

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import LABEL_ATYPICAL, LABEL_NORMAL, window
from .echo_core import EchoGenome
from .evolution import migrate, prepare_generation, reproduce
from .genome_io import save_genome
from .rnn_baseline import RnnGenome, compile_rnn


@dataclass
class TaskConfig:
    window_width: int = 3
    init_state_value: float = 1.0
    classification_threshold: float = 0.5
    fitness_epsilon: float = 1e-3

    def validate(self):
        if self.window_width < 1:
            raise ValueError("window_width must be >= 1")
        if self.fitness_epsilon <= 0:
            raise ValueError("fitness_epsilon must be positive")
        if not 0.0 <= self.classification_threshold <= 1.0:
            raise ValueError("classification_threshold must be in [0, 1]")
        return self


@dataclass
class EvalSet:
    """Windowed recordings, grouped by length so each group stacks into one
    (recordings, steps, width) batch."""

    batches: list           # (windows, labels) pairs
    labels: np.ndarray      # concatenated in batch order
    size: int


def prepare_recordings(recordings, width: int) -> EvalSet:
    if not recordings:
        raise ValueError("cannot prepare an empty recording list")
    groups = {}
    for rec in recordings:
        groups.setdefault(rec.samples.size, []).append(rec)
    batches = []
    labels = []
    for length in groups:
        recs = groups[length]
        windows = np.stack([window(rec.samples, width) for rec in recs])
        batch_labels = np.asarray([rec.label for rec in recs], dtype=np.int64)
        batches.append((windows, batch_labels))
        labels.append(batch_labels)
    return EvalSet(batches=batches, labels=np.concatenate(labels),
                   size=len(recordings))


def _genome_mean_bits(genome, windows_batch, init_value: float) -> np.ndarray:
    if isinstance(genome, EchoGenome):
        if len(genome.output_neurons) != 1:
            raise ValueError("classification needs exactly one output neuron")
        if windows_batch.shape[2] != len(genome.input_neurons):
            raise ValueError(
                f"window width {windows_batch.shape[2]} does not match "
                f"{len(genome.input_neurons)} input neurons")
        return kernels.echo_mean_bits(
            genome.weights, windows_batch, genome.input_idx, genome.input_signs,
            int(genome.output_idx[0]), init_value)
    if isinstance(genome, RnnGenome):
        compiled = compile_rnn(genome)
        if windows_batch.shape[2] != compiled.n_inputs:
            raise ValueError(
                f"window width {windows_batch.shape[2]} does not match "
                f"{compiled.n_inputs} input neurons")
        return kernels.rnn_mean_bits(
            windows_batch, compiled.is_bias, compiled.input_slot,
            compiled.fwd_ptr, compiled.fwd_src, compiled.fwd_w,
            compiled.rec_ptr, compiled.rec_src, compiled.rec_w,
            compiled.out_pos, init_value)
    raise ValueError(f"cannot evaluate {type(genome).__name__}")


def mean_bits(genome, eval_set: EvalSet, task: TaskConfig) -> np.ndarray:
    parts = [_genome_mean_bits(genome, windows, task.init_state_value)
             for windows, _ in eval_set.batches]
    return np.concatenate(parts)


def predictions(genome, eval_set: EvalSet, task: TaskConfig) -> np.ndarray:
    bits = mean_bits(genome, eval_set, task)
    return np.where(bits > task.classification_threshold,
                    LABEL_ATYPICAL, LABEL_NORMAL)


def classification_error(genome, eval_set: EvalSet, task: TaskConfig) -> float:
    return float(np.mean(predictions(genome, eval_set, task) != eval_set.labels))


def accuracy(genome, eval_set: EvalSet, task: TaskConfig) -> float:
    return 1.0 - classification_error(genome, eval_set, task)


def classify_recording(genome, samples, task: TaskConfig):
    """(predicted label, mean bit) for one recording."""
    batch = window(samples, task.window_width)[None, :, :]
    bit = float(_genome_mean_bits(genome, batch, task.init_state_value)[0])
    label = LABEL_ATYPICAL if bit > task.classification_threshold else LABEL_NORMAL
    return label, bit


def fitness_from_error(error: float, epsilon: float = 1e-3) -> float:
    return 1.0 / (error + epsilon)


def fitness_of(genome, recordings, task: TaskConfig) -> float:
    """Inverse classification error on the given recordings."""
    eval_set = prepare_recordings(recordings, task.window_width)
    return fitness_from_error(classification_error(genome, eval_set, task),
                              task.fitness_epsilon)


def sample_subset(recordings, fraction: float, rng) -> list:
    """Uniform sample without replacement, at least one recording."""
    if not recordings:
        raise ValueError("cannot sample from an empty recording list")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"subset fraction must be in (0, 1], got {fraction}")
    size = max(1, round(fraction * len(recordings)))
    idx = sorted(int(i) for i in rng.choice(len(recordings), size=size, replace=False))
    return [recordings[i] for i in idx]


def evaluate_population(population, eval_set: EvalSet, task: TaskConfig) -> None:
    for ind in population.individuals:
        err = classification_error(ind.genome, eval_set, task)
        ind.raw_fitness = fitness_from_error(err, task.fitness_epsilon)


# ---------------------------------------------------------------------------
# champion tracking and run metrics

@dataclass
class GenerationRecord:
    generation: int
    best_raw_fitness: float
    species_count: int
    best_validation_accuracy: float
    champion_stored: bool


@dataclass
class RunMetrics:
    records: list = field(default_factory=list)
    champion_generation: int = -1
    test_accuracy: float = None


class ChampionTracker:
    """Validates each generation's raw-fitness champion and stores the best.

    With an output directory, every stored champion is also written to
    champions/champion_gen<G>.json as it happens.
    """

    def __init__(self, validation_set: EvalSet, task: TaskConfig, out_dir=None):
        self.validation_set = validation_set
        self.task = task
        self.out_dir = out_dir
        self.best_validation_error = math.inf
        self.champion = None
        self.champion_generation = -1
        self.records = []
        if out_dir is not None:
            os.makedirs(os.path.join(out_dir, "champions"), exist_ok=True)

    def observe(self, generation: int, islands) -> None:
        best = None
        for island in islands:
            for ind in island.individuals:
                if ind.raw_fitness is None:
                    raise ValueError("observe needs evaluated populations")
                if best is None or ind.raw_fitness > best.raw_fitness:
                    best = ind
        if best is None:
            raise ValueError("observe needs at least one individual")
        val_error = classification_error(best.genome, self.validation_set, self.task)
        stored = val_error < self.best_validation_error
        if stored:
            self.best_validation_error = val_error
            self.champion = best.genome
            self.champion_generation = generation
            if self.out_dir is not None:
                save_genome(best.genome, os.path.join(
                    self.out_dir, "champions", f"champion_gen{generation:04d}.json"))
        self.records.append(GenerationRecord(
            generation=generation,
            best_raw_fitness=float(best.raw_fitness),
            species_count=sum(len(island.species) for island in islands),
            best_validation_accuracy=1.0 - self.best_validation_error,
            champion_stored=stored,
        ))

    def finalize(self, test_set: EvalSet) -> RunMetrics:
        if self.champion is None:
            raise ValueError("no champion was ever stored")
        test_acc = accuracy(self.champion, test_set, self.task)
        return RunMetrics(records=list(self.records),
                          champion_generation=self.champion_generation,
                          test_accuracy=test_acc)


def run_generations(islands, train_recordings, tracker: ChampionTracker,
                    config, task: TaskConfig, subset_rng) -> list:
    """Drive the evolution loop over one or more islands.

    Per generation: sample one shared train subset, evaluate everyone,
    prepare (smooth/speciate/share), observe the champion, migrate when
    due, then reproduce. The final generation is evaluated but not
    reproduced.
    """
    for gen in range(config.generations):
        subset = sample_subset(train_recordings, config.subset_fraction, subset_rng)
        eval_set = prepare_recordings(subset, task.window_width)
        for island in islands:
            evaluate_population(island, eval_set, task)
        for island in islands:
            prepare_generation(island, config)
        tracker.observe(gen, islands)
        migrate(islands, gen, config)
        if gen < config.generations - 1:
            islands[:] = [reproduce(island, config) for island in islands]
    return islands


# ---------------------------------------------------------------------------
# metrics persistence

METRICS_HEADER = ("generation", "best_raw_fitness", "species_count",
                  "best_validation_accuracy", "champion_stored", "test_accuracy")


def write_metrics_csv(metrics: RunMetrics, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for rec in metrics.records:
            writer.writerow([
                rec.generation,
                repr(float(rec.best_raw_fitness)),
                rec.species_count,
                repr(float(rec.best_validation_accuracy)),
                "true" if rec.champion_stored else "false",
                "",
            ])
        writer.writerow(["final", "", "", "", "", repr(float(metrics.test_accuracy))])


def read_metrics_csv(path) -> RunMetrics:
    metrics = RunMetrics()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise ValueError(f"{path}: unexpected metrics header {reader.fieldnames}")
        for row in reader:
            if row["generation"] == "final":
                metrics.test_accuracy = float(row["test_accuracy"])
                continue
            rec = GenerationRecord(
                generation=int(row["generation"]),
                best_raw_fitness=float(row["best_raw_fitness"]),
                species_count=int(row["species_count"]),
                best_validation_accuracy=float(row["best_validation_accuracy"]),
                champion_stored=row["champion_stored"] == "true",
            )
            metrics.records.append(rec)
            if rec.champion_stored:
                metrics.champion_generation = rec.generation
    return metrics
