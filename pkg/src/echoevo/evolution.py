"""Population engine: speciation with shared fitness, stochastic universal
sampling, structural and weight mutation, recombination, elitism, fitness
smoothing, and an optional ring of island populations.

The engine is agnostic to the genome kind; everything kind-specific hides
behind mutate/recombine/distance/seeding dispatch.

Per-generation order of operations (next_generation):

1. smooth every individual's fitness with its previous raw fitness
2. speciate against representatives re-drawn from last generation's species
3. divide smoothed fitness by species size (shared fitness)
4. copy the top elites by smoothed fitness unchanged
5. keep the top survivors by shared fitness, drop the rest
6. fill the remaining slots half by mutation, half by recombination, with
   parents drawn from the survivors by stochastic universal sampling
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .echo_core import IDENTITY, SIGN_REVERSAL, EchoGenome
from .rnn_baseline import (
    FORWARD,
    RECURRENT,
    ROLE_BIAS,
    ROLE_HIDDEN,
    ROLE_INPUT,
    ROLE_OUTPUT,
    RnnGenome,
    build_genome,
)

KIND_ECHO = "echo"
KIND_RNN = "rnn"


@dataclass
class EvolutionConfig:
    population_size: int = 200
    generations: int = 200
    subset_fraction: float = 0.05
    elimination_proportion: float = 0.66
    elite_count: int = 6
    mutation_fraction: float = 0.5
    p_add_synapse: float = 0.05
    p_remove_synapse: float = 0.03
    p_add_neuron: float = 0.03
    p_remove_neuron: float = 0.01
    weight_mutation_rate: float = 0.25
    p_redraw_weight: float = 0.5
    sigma_new: float = 1.0
    sigma_perturb: float = 0.1
    sigma_init: float = 1.0
    p_crossover: float = 0.5
    compatibility_threshold: float = 3.0
    distance_size_coef: float = 1.0
    distance_pattern_coef: float = 2.0
    distance_weight_coef: float = 0.5
    island_count: int = 1
    migration_interval: int = 4
    migrant_count: int = 2

    def validate(self):
        probs = [
            ("subset_fraction", self.subset_fraction),
            ("elimination_proportion", self.elimination_proportion),
            ("mutation_fraction", self.mutation_fraction),
            ("p_add_synapse", self.p_add_synapse),
            ("p_remove_synapse", self.p_remove_synapse),
            ("p_add_neuron", self.p_add_neuron),
            ("p_remove_neuron", self.p_remove_neuron),
            ("weight_mutation_rate", self.weight_mutation_rate),
            ("p_redraw_weight", self.p_redraw_weight),
            ("p_crossover", self.p_crossover),
        ]
        for name, p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.subset_fraction <= 0.0:
            raise ValueError("subset_fraction must be positive")
        if self.elimination_proportion >= 1.0:
            raise ValueError("elimination_proportion must be below 1")
        structural = (self.p_add_synapse + self.p_remove_synapse
                      + self.p_add_neuron + self.p_remove_neuron)
        if structural > 1.0:
            raise ValueError("structural mutation probabilities sum above 1")
        for name in ("population_size", "generations", "island_count",
                     "migration_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.elite_count <= self.population_size:
            raise ValueError("elite_count must be between 0 and population_size")
        if self.migrant_count < 0:
            raise ValueError("migrant_count must be >= 0")
        for name in ("sigma_new", "sigma_perturb", "sigma_init",
                     "compatibility_threshold", "distance_size_coef",
                     "distance_pattern_coef", "distance_weight_coef"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        return self


@dataclass
class Individual:
    genome: object
    raw_fitness: float = None
    prev_raw_fitness: float = None
    smoothed_fitness: float = None
    shared_fitness: float = None
    species_id: int = -1
    age: int = 0


@dataclass
class Species:
    id: int
    representative: object
    member_count: int = 0
    member_genomes: list = field(default_factory=list)


@dataclass
class Population:
    individuals: list
    species: list = field(default_factory=list)
    generation: int = 0
    rng: np.random.Generator = None
    genome_kind: str = KIND_ECHO
    next_species_id: int = 0


# ---------------------------------------------------------------------------
# seeding

def minimal_echo_genome(config: EvolutionConfig, rng) -> EchoGenome:
    """Three inputs wired to one output in both directions, plus a bias."""
    w = np.zeros((5, 5))
    for i in range(3):
        w[i, 3] = rng.normal(0.0, config.sigma_init)
    for i in range(3):
        w[3, i] = rng.normal(0.0, config.sigma_init)
    w[4, 4] = 1.0
    return EchoGenome(
        weights=w,
        input_neurons=(0, 1, 2),
        input_functions=(IDENTITY, IDENTITY, SIGN_REVERSAL),
        output_neurons=(3,),
        bias_neurons=(4,),
    )


def minimal_rnn_genome(config: EvolutionConfig, rng) -> RnnGenome:
    """Mirror of the echo seed: forward in->out plus recurrent in<->out."""
    neurons = [(0, ROLE_INPUT), (1, ROLE_INPUT), (2, ROLE_INPUT),
               (3, ROLE_OUTPUT), (4, ROLE_BIAS)]
    syns = []
    for i in range(3):
        syns.append((i, 3, rng.normal(0.0, config.sigma_init), FORWARD))
    for i in range(3):
        syns.append((i, 3, rng.normal(0.0, config.sigma_init), RECURRENT))
    for i in range(3):
        syns.append((3, i, rng.normal(0.0, config.sigma_init), RECURRENT))
    return build_genome(neurons, syns)


def seed_population(config: EvolutionConfig, genome_kind: str, rng) -> Population:
    if genome_kind == KIND_ECHO:
        make = minimal_echo_genome
    elif genome_kind == KIND_RNN:
        make = minimal_rnn_genome
    else:
        raise ValueError(f"unknown genome kind {genome_kind!r}")
    individuals = [Individual(genome=make(config, rng))
                   for _ in range(config.population_size)]
    return Population(individuals=individuals, rng=rng, genome_kind=genome_kind)


# ---------------------------------------------------------------------------
# compatibility distance

def distance(a, b, config: EvolutionConfig) -> float:
    """Size gap + connection-pattern disagreement + mean weight gap."""
    if isinstance(a, EchoGenome) and isinstance(b, EchoGenome):
        m = min(a.n, b.n)
        wa = a.weights[:m, :m]
        wb = b.weights[:m, :m]
        nza = wa != 0.0
        nzb = wb != 0.0
        pattern = np.count_nonzero(nza ^ nzb) / (m * m)
        both = nza & nzb
        weight_gap = float(np.mean(np.abs(wa[both] - wb[both]))) if both.any() else 0.0
        size_gap = abs(a.n - b.n)
    elif isinstance(a, RnnGenome) and isinstance(b, RnnGenome):
        keys_a = {(s.src, s.dst, s.kind): s.weight for s in a.synapses}
        keys_b = {(s.src, s.dst, s.kind): s.weight for s in b.synapses}
        union = set(keys_a) | set(keys_b)
        shared = set(keys_a) & set(keys_b)
        pattern = (len(union) - len(shared)) / len(union) if union else 0.0
        weight_gap = (
            sum(abs(keys_a[k] - keys_b[k]) for k in sorted(shared)) / len(shared)
            if shared else 0.0)
        size_gap = abs(a.n - b.n)
    else:
        raise ValueError("cannot measure distance across genome kinds")
    return (config.distance_size_coef * size_gap
            + config.distance_pattern_coef * pattern
            + config.distance_weight_coef * weight_gap)


# ---------------------------------------------------------------------------
# fitness bookkeeping

def smooth_fitness(current: float, previous) -> float:
    """Mean of the current raw fitness and last generation's, when known."""
    if previous is None:
        return float(current)
    return (float(current) + float(previous)) / 2.0


def speciate(population: Population, config: EvolutionConfig) -> None:
    """First-fit assignment against representatives of last generation's species.

    Each surviving species re-draws its representative uniformly from its
    previous members; an individual matching no representative within the
    compatibility threshold founds a new species with itself as representative.
    """
    rng = population.rng
    species = []
    for sp in population.species:
        pool = sp.member_genomes
        rep = pool[int(rng.integers(len(pool)))] if pool else sp.representative
        species.append(Species(id=sp.id, representative=rep))
    for ind in population.individuals:
        placed = False
        for sp in species:
            if distance(ind.genome, sp.representative, config) <= config.compatibility_threshold:
                ind.species_id = sp.id
                sp.member_count += 1
                sp.member_genomes.append(ind.genome)
                placed = True
                break
        if not placed:
            sp = Species(id=population.next_species_id, representative=ind.genome,
                         member_count=1, member_genomes=[ind.genome])
            population.next_species_id += 1
            ind.species_id = sp.id
            species.append(sp)
    population.species = [sp for sp in species if sp.member_count > 0]


def share_fitness(population: Population) -> None:
    counts = {}
    for ind in population.individuals:
        if ind.smoothed_fitness is None:
            raise ValueError("share_fitness needs smoothed fitness on every individual")
        if ind.species_id < 0:
            raise ValueError("share_fitness needs species assignments")
        counts[ind.species_id] = counts.get(ind.species_id, 0) + 1
    for ind in population.individuals:
        ind.shared_fitness = ind.smoothed_fitness / counts[ind.species_id]
    for sp in population.species:
        sp.member_count = counts.get(sp.id, 0)


# ---------------------------------------------------------------------------
# selection

def sus_indices(weights, k: int, rng) -> np.ndarray:
    """Stochastic universal sampling: k evenly spaced pointers, one offset."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("selection weights must be a non-empty vector")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if np.any(w < 0):
        raise ValueError("selection weights must be non-negative")
    total = float(w.sum())
    if total <= 0.0:
        raise ValueError("total selection weight must be positive")
    step = total / k
    points = rng.random() * step + step * np.arange(k)
    idx = np.searchsorted(np.cumsum(w), points, side="right")
    return np.minimum(idx, w.size - 1)


def sus_select(individuals, k: int, rng) -> list:
    weights = []
    for ind in individuals:
        if ind.shared_fitness is None:
            raise ValueError("sus_select needs shared fitness on every individual")
        weights.append(ind.shared_fitness)
    return [individuals[i] for i in sus_indices(weights, k, rng)]


def survivor_count(population_size: int, elimination_proportion: float) -> int:
    kept = math.ceil(population_size * (1.0 - elimination_proportion) - 1e-9)
    return max(1, kept)


# ---------------------------------------------------------------------------
# mutation

def mutate(genome, config: EvolutionConfig, rng):
    """One mutation event: a structural operator or a weight pass.

    Structural operators without a legal target are no-ops that return the
    genome unchanged.
    """
    u = rng.random()
    t_add_syn = config.p_add_synapse
    t_rem_syn = t_add_syn + config.p_remove_synapse
    t_add_neu = t_rem_syn + config.p_add_neuron
    t_rem_neu = t_add_neu + config.p_remove_neuron
    if isinstance(genome, EchoGenome):
        if u < t_add_syn:
            return _echo_add_synapse(genome, config, rng)
        if u < t_rem_syn:
            return _echo_remove_synapse(genome, rng)
        if u < t_add_neu:
            return _echo_add_neuron(genome, config, rng)
        if u < t_rem_neu:
            return _echo_remove_neuron(genome, rng)
        return _echo_mutate_weights(genome, config, rng)
    if isinstance(genome, RnnGenome):
        if u < t_add_syn:
            return _rnn_add_synapse(genome, config, rng)
        if u < t_rem_syn:
            return _rnn_remove_synapse(genome, rng)
        if u < t_add_neu:
            return _rnn_add_neuron(genome, rng)
        if u < t_rem_neu:
            return _rnn_remove_neuron(genome, rng)
        return _rnn_mutate_weights(genome, config, rng)
    raise ValueError(f"cannot mutate {type(genome).__name__}")


def _echo_replace_weights(genome: EchoGenome, w) -> EchoGenome:
    return EchoGenome(weights=w,
                      input_neurons=genome.input_neurons,
                      input_functions=genome.input_functions,
                      output_neurons=genome.output_neurons,
                      bias_neurons=genome.bias_neurons)


def _echo_mutable_mask(genome: EchoGenome) -> np.ndarray:
    # bias columns are structural, never touched by mutation
    mask = np.ones((genome.n, genome.n), dtype=bool)
    for b in genome.bias_neurons:
        mask[:, b] = False
    return mask


def _echo_mutate_weights(genome: EchoGenome, config, rng) -> EchoGenome:
    candidates = np.argwhere((genome.weights != 0.0) & _echo_mutable_mask(genome))
    if candidates.size == 0:
        return genome
    selected = rng.random(len(candidates)) < config.weight_mutation_rate
    if not selected.any():
        return genome
    w = genome.weights.copy()
    for i, j in candidates[selected]:
        if rng.random() < config.p_redraw_weight:
            w[i, j] = rng.normal(0.0, config.sigma_new)
        else:
            w[i, j] += rng.normal(0.0, config.sigma_perturb)
    return _echo_replace_weights(genome, w)


def _echo_add_synapse(genome: EchoGenome, config, rng) -> EchoGenome:
    candidates = np.argwhere((genome.weights == 0.0) & _echo_mutable_mask(genome))
    if candidates.size == 0:
        return genome
    i, j = candidates[int(rng.integers(len(candidates)))]
    w = genome.weights.copy()
    w[i, j] = rng.normal(0.0, config.sigma_new)
    return _echo_replace_weights(genome, w)


def _echo_remove_synapse(genome: EchoGenome, rng) -> EchoGenome:
    candidates = np.argwhere((genome.weights != 0.0) & _echo_mutable_mask(genome))
    if candidates.size == 0:
        return genome
    i, j = candidates[int(rng.integers(len(candidates)))]
    w = genome.weights.copy()
    w[i, j] = 0.0
    return _echo_replace_weights(genome, w)


def _echo_add_neuron(genome: EchoGenome, config, rng) -> EchoGenome:
    """Grow the matrix by one hidden neuron with one in- and one out-synapse."""
    n = genome.n
    w = np.zeros((n + 1, n + 1))
    w[:n, :n] = genome.weights
    src = int(rng.integers(n))
    dst_candidates = [j for j in range(n) if j not in genome.bias_neurons]
    dst = dst_candidates[int(rng.integers(len(dst_candidates)))]
    w[src, n] = rng.normal(0.0, config.sigma_new)
    w[n, dst] = rng.normal(0.0, config.sigma_new)
    return EchoGenome(weights=w,
                      input_neurons=genome.input_neurons,
                      input_functions=genome.input_functions,
                      output_neurons=genome.output_neurons,
                      bias_neurons=genome.bias_neurons)


def _echo_remove_neuron(genome: EchoGenome, rng) -> EchoGenome:
    designated = (set(genome.input_neurons) | set(genome.output_neurons)
                  | set(genome.bias_neurons))
    hidden = [i for i in range(genome.n) if i not in designated]
    if not hidden:
        return genome
    h = hidden[int(rng.integers(len(hidden)))]
    w = np.delete(np.delete(genome.weights, h, axis=0), h, axis=1)
    shift = lambda idx: tuple(i - (i > h) for i in idx)
    return EchoGenome(weights=w,
                      input_neurons=shift(genome.input_neurons),
                      input_functions=genome.input_functions,
                      output_neurons=shift(genome.output_neurons),
                      bias_neurons=shift(genome.bias_neurons))


def _rnn_parts(genome: RnnGenome):
    neurons = [(nr.id, nr.role) for nr in genome.neurons]
    syns = [(s.src, s.dst, s.weight, s.kind) for s in genome.synapses]
    return neurons, syns


def _rnn_mutate_weights(genome: RnnGenome, config, rng) -> RnnGenome:
    neurons, syns = _rnn_parts(genome)
    if not syns:
        return genome
    selected = rng.random(len(syns)) < config.weight_mutation_rate
    if not selected.any():
        return genome
    out = []
    for syn, hit in zip(syns, selected):
        src, dst, weight, kind = syn
        if hit:
            if rng.random() < config.p_redraw_weight:
                weight = rng.normal(0.0, config.sigma_new)
            else:
                weight = weight + rng.normal(0.0, config.sigma_perturb)
        out.append((src, dst, weight, kind))
    return build_genome(neurons, out)


def _rnn_legal_edge(roles: dict, src: int, dst: int, kind: str) -> bool:
    if roles[dst] == ROLE_BIAS:
        return False
    if kind == FORWARD and (roles[dst] == ROLE_INPUT or roles[src] == ROLE_OUTPUT):
        return False
    return True


def _rnn_add_synapse(genome: RnnGenome, config, rng) -> RnnGenome:
    neurons, syns = _rnn_parts(genome)
    ids = [i for i, _ in neurons]
    roles = dict(neurons)
    existing = {(s, d, k) for s, d, _, k in syns}
    for _attempt in range(12):
        kind = FORWARD if rng.random() < 0.5 else RECURRENT
        src = ids[int(rng.integers(len(ids)))]
        dst = ids[int(rng.integers(len(ids)))]
        if (src, dst, kind) in existing or not _rnn_legal_edge(roles, src, dst, kind):
            continue
        weight = rng.normal(0.0, config.sigma_new)
        try:
            return build_genome(neurons, syns + [(src, dst, weight, kind)])
        except ValueError:
            continue  # the forward edge would close a cycle
    return genome


def _rnn_remove_synapse(genome: RnnGenome, rng) -> RnnGenome:
    neurons, syns = _rnn_parts(genome)
    if not syns:
        return genome
    k = int(rng.integers(len(syns)))
    return build_genome(neurons, syns[:k] + syns[k + 1:])


def _rnn_add_neuron(genome: RnnGenome, rng) -> RnnGenome:
    """Split a random synapse with a fresh hidden neuron."""
    neurons, syns = _rnn_parts(genome)
    if not syns:
        return genome
    k = int(rng.integers(len(syns)))
    src, dst, weight, kind = syns[k]
    roles = dict(neurons)
    new_id = max(i for i, _ in neurons) + 1
    first = (src, new_id, weight, kind)
    second_kind = RECURRENT if roles[dst] == ROLE_INPUT else FORWARD
    second = (new_id, dst, 1.0, second_kind)
    return build_genome(neurons + [(new_id, ROLE_HIDDEN)],
                        syns[:k] + syns[k + 1:] + [first, second])


def _rnn_remove_neuron(genome: RnnGenome, rng) -> RnnGenome:
    neurons, syns = _rnn_parts(genome)
    hidden = [i for i, role in neurons if role == ROLE_HIDDEN]
    if not hidden:
        return genome
    h = hidden[int(rng.integers(len(hidden)))]
    return build_genome(
        [(i, role) for i, role in neurons if i != h],
        [s for s in syns if s[0] != h and s[1] != h],
    )


# ---------------------------------------------------------------------------
# recombination

def recombine(parent_a, parent_b, config: EvolutionConfig, rng):
    """Child from two parents; parent_a is the fitter one by convention.

    With p_crossover the child takes each aligned connection from a
    uniformly random parent, otherwise connections are averaged. The child
    inherits the fitter parent's size and role designations; connections
    outside the shared region count as absent.
    """
    if isinstance(parent_a, EchoGenome) and isinstance(parent_b, EchoGenome):
        return _recombine_echo(parent_a, parent_b, config, rng)
    if isinstance(parent_a, RnnGenome) and isinstance(parent_b, RnnGenome):
        return _recombine_rnn(parent_a, parent_b, config, rng)
    raise ValueError("cannot recombine across genome kinds")


def _recombine_echo(a: EchoGenome, b: EchoGenome, config, rng) -> EchoGenome:
    n = a.n
    wb = np.zeros((n, n))
    m = min(n, b.n)
    wb[:m, :m] = b.weights[:m, :m]
    if rng.random() < config.p_crossover:
        take_a = rng.random((n, n)) < 0.5
        child = np.where(take_a, a.weights, wb)
    else:
        child = (a.weights + wb) / 2.0
    for bias in a.bias_neurons:
        child[:, bias] = 0.0
        child[bias, bias] = 1.0
    return _echo_replace_weights(a, child)


def _recombine_rnn(a: RnnGenome, b: RnnGenome, config, rng) -> RnnGenome:
    neurons = [(nr.id, nr.role) for nr in a.neurons]
    roles = dict(neurons)
    ids = set(roles)
    syn_a = {(s.src, s.dst, s.kind): s.weight for s in a.synapses}
    syn_b = {(s.src, s.dst, s.kind): s.weight
             for s in b.synapses if s.src in ids and s.dst in ids}
    crossover = rng.random() < config.p_crossover
    from_a = []
    from_b = []
    for key in sorted(set(syn_a) | set(syn_b)):
        in_a, in_b = key in syn_a, key in syn_b
        if crossover:
            take_a = rng.random() < 0.5
            if in_a and in_b:
                from_a.append((*key[:2], syn_a[key] if take_a else syn_b[key], key[2]))
            elif in_a and take_a:
                from_a.append((*key[:2], syn_a[key], key[2]))
            elif in_b and not take_a:
                from_b.append((*key[:2], syn_b[key], key[2]))
        else:
            if in_a and in_b:
                from_a.append((*key[:2], (syn_a[key] + syn_b[key]) / 2.0, key[2]))
            elif in_a:
                from_a.append((*key[:2], syn_a[key], key[2]))
            else:
                from_b.append((*key[:2], syn_b[key], key[2]))
    # connections inherited from a keep a's (acyclic) topology; extra ones
    # from b are merged one at a time, skipping any that would be illegal
    # under a's roles or close a forward cycle
    result = list(from_a)
    for syn in from_b:
        src, dst, _, kind = syn
        if not _rnn_legal_edge(roles, src, dst, kind):
            continue
        try:
            build_genome(neurons, result + [syn])
        except ValueError:
            continue
        result.append(syn)
    return build_genome(neurons, result)


# ---------------------------------------------------------------------------
# generation turnover

def prepare_generation(population: Population, config: EvolutionConfig) -> None:
    """Smooth fitness, speciate, and share. Requires evaluated individuals."""
    for ind in population.individuals:
        if ind.raw_fitness is None:
            raise ValueError("prepare_generation needs raw fitness on every individual")
        ind.smoothed_fitness = smooth_fitness(ind.raw_fitness, ind.prev_raw_fitness)
    speciate(population, config)
    share_fitness(population)


def reproduce(population: Population, config: EvolutionConfig) -> Population:
    """Build the next generation's population from a prepared one."""
    inds = population.individuals
    size = len(inds)
    rng = population.rng
    if config.elite_count > size:
        raise ValueError("elite_count exceeds the population size")
    by_smoothed = sorted(range(size), key=lambda i: (-inds[i].smoothed_fitness, i))
    elites = []
    for i in by_smoothed[:config.elite_count]:
        src = inds[i]
        elites.append(Individual(genome=src.genome,
                                 prev_raw_fitness=src.raw_fitness,
                                 age=src.age + 1))
    by_shared = sorted(range(size), key=lambda i: (-inds[i].shared_fitness, i))
    survivors = [inds[i] for i in
                 by_shared[:survivor_count(size, config.elimination_proportion)]]
    n_offspring = size - config.elite_count
    n_mutation = round(n_offspring * config.mutation_fraction)
    n_recombination = n_offspring - n_mutation
    children = []
    if n_mutation:
        for parent in sus_select(survivors, n_mutation, rng):
            children.append(Individual(genome=mutate(parent.genome, config, rng),
                                       prev_raw_fitness=parent.raw_fitness))
    if n_recombination:
        parents = sus_select(survivors, 2 * n_recombination, rng)
        rng.shuffle(parents)
        for k in range(n_recombination):
            pa, pb = parents[2 * k], parents[2 * k + 1]
            if pb.smoothed_fitness > pa.smoothed_fitness:
                pa, pb = pb, pa
            children.append(Individual(genome=recombine(pa.genome, pb.genome, config, rng)))
    return Population(individuals=elites + children,
                      species=population.species,
                      generation=population.generation + 1,
                      rng=rng,
                      genome_kind=population.genome_kind,
                      next_species_id=population.next_species_id)


def next_generation(population: Population, config: EvolutionConfig) -> Population:
    prepare_generation(population, config)
    return reproduce(population, config)


# ---------------------------------------------------------------------------
# islands

def migrate(islands, generation: int, config: EvolutionConfig) -> None:
    """Ring migration: each island's best replace its neighbor's worst.

    Fires only on positive generations divisible by the migration interval.
    Expects prepared populations (smoothed fitness and species in place);
    arrivals are adopted into the nearest compatible species and shared
    fitness is recomputed.
    """
    if len(islands) < 2 or config.migrant_count == 0:
        return
    if generation <= 0 or generation % config.migration_interval != 0:
        return
    k = config.migrant_count
    for island in islands:
        if len(island.individuals) < k:
            raise ValueError("migrant_count exceeds an island population")
    donations = []
    for island in islands:
        inds = island.individuals
        best = sorted(range(len(inds)),
                      key=lambda i: (-inds[i].smoothed_fitness, i))[:k]
        donations.append([
            Individual(genome=inds[i].genome,
                       raw_fitness=inds[i].raw_fitness,
                       prev_raw_fitness=inds[i].prev_raw_fitness,
                       smoothed_fitness=inds[i].smoothed_fitness,
                       age=inds[i].age)
            for i in best
        ])
    for idx, island in enumerate(islands):
        arrivals = donations[(idx - 1) % len(islands)]
        inds = island.individuals
        worst = sorted(range(len(inds)),
                       key=lambda i: (inds[i].smoothed_fitness, i))[:k]
        for slot, arrival in zip(worst, arrivals):
            inds[slot] = arrival
        for arrival in arrivals:
            _adopt_into_species(island, arrival, config)
        share_fitness(island)


def _adopt_into_species(population: Population, individual: Individual,
                        config: EvolutionConfig) -> None:
    for sp in population.species:
        if distance(individual.genome, sp.representative, config) <= config.compatibility_threshold:
            individual.species_id = sp.id
            sp.member_genomes.append(individual.genome)
            return
    sp = Species(id=population.next_species_id, representative=individual.genome,
                 member_count=1, member_genomes=[individual.genome])
    population.next_species_id += 1
    individual.species_id = sp.id
    population.species.append(sp)
