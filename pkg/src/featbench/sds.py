"""Stochastic diffusion search over binary feature-subset hypotheses.

Each agent holds a feature mask. Its fitness is the held-out accuracy of a
classifier trained on those features, using a private 80/20 split. Every
iteration runs three phases:

* evaluate: score any hypothesis not yet scored under the agent's seed
* test: an agent becomes active iff its fitness beats a random other agent's
* diffuse: a passive agent polls a random agent; an active one lends it a
  mutated copy of its hypothesis, a passive one sends it back to a fresh
  random hypothesis

The best hypothesis ever scored is returned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from featbench.classifiers import ClassifierSpec
from featbench.data import Dataset, SplitConfig, stratified_split
from featbench.errors import DataError, TrainingError


@dataclass(frozen=True)
class SdsConfig:
    n_agents: int = 50
    max_iterations: int = 100
    mutation_rate: float | None = None  # None -> 1/d
    init_density: float = 0.5
    fitness_split: SplitConfig = SplitConfig(train_fraction=0.8)
    classifier: ClassifierSpec = field(default_factory=lambda: ClassifierSpec("tree"))
    convergence_fraction: float = 0.33
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if not 0.0 < self.init_density < 1.0:
            raise ValueError("init_density must lie in (0, 1)")
        if not 0.0 < self.convergence_fraction <= 1.0:
            raise ValueError("convergence_fraction must lie in (0, 1]")


@dataclass
class Agent:
    hypothesis: np.ndarray  # bool mask
    active: bool = False
    fitness: float = 0.0
    private_seed: int = 0


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_fitness: float  # best so far
    mean_fitness: float
    active_count: int
    best_hypothesis: np.ndarray


@dataclass
class SdsTrace:
    records: list[TraceRecord] = field(default_factory=list)
    best_fitness: float = -1.0
    best_seed: int = 0
    best_hypothesis: np.ndarray | None = None
    converged: bool = False
    evaluations: int = 0

    def __len__(self):
        return len(self.records)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "best_fitness", "mean_fitness", "active_count", "best_hypothesis"])
            for r in self.records:
                bits = "".join("1" if b else "0" for b in r.best_hypothesis)
                w.writerow([r.iteration, f"{r.best_fitness:.6f}", f"{r.mean_fitness:.6f}", r.active_count, bits])


def _repair(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if not mask.any():
        mask[rng.integers(mask.size)] = True
    return mask


def random_hypothesis(d: int, density: float, rng: np.random.Generator) -> np.ndarray:
    return _repair(rng.random(d) < density, rng)


def sds_init(cfg: SdsConfig, d: int) -> list[Agent]:
    """Passive agents with independent Bernoulli(init_density) masks."""
    if d < 1:
        raise ValueError("need at least one feature")
    rng = np.random.default_rng(cfg.seed)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_agents)
    return [
        Agent(random_hypothesis(d, cfg.init_density, rng), False, 0.0, int(ss.generate_state(1)[0]))
        for ss in seeds
    ]


def sds_fitness(a: Agent, d: Dataset, cfg: SdsConfig) -> float:
    """Held-out accuracy of ``cfg.classifier`` on the agent's features and private split.

    A split that leaves a class without training samples scores 0.
    """
    if not a.hypothesis.any():
        raise ValueError("hypothesis selects no features")
    projected = d.subset(columns=a.hypothesis)
    split = replace(cfg.fitness_split, seed=a.private_seed)
    try:
        train, test = stratified_split(projected, split)
        if test.n_samples == 0 or np.unique(train.labels).size < np.unique(d.labels).size:
            return 0.0
        model = cfg.classifier.fit(train, seed=a.private_seed)
    except (DataError, TrainingError):
        return 0.0
    return float(np.mean(model.predict(test.features) == test.labels))


def _evaluate(population: list[Agent], d: Dataset, cfg: SdsConfig, cache: dict, trace: SdsTrace) -> None:
    for a in population:
        key = (a.hypothesis.tobytes(), a.private_seed)
        if key not in cache:
            cache[key] = sds_fitness(a, d, cfg)
            trace.evaluations += 1
        a.fitness = cache[key]
        if a.fitness > trace.best_fitness:
            trace.best_fitness = a.fitness
            trace.best_seed = a.private_seed
            trace.best_hypothesis = a.hypothesis.copy()


def sds_test_phase(population: list[Agent], rng: np.random.Generator) -> list[Agent]:
    """Agent i turns active iff its fitness strictly exceeds that of a random j != i."""
    n = len(population)
    fitness = [a.fitness for a in population]
    if n == 1:
        population[0].active = False
        return population
    for i, a in enumerate(population):
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        a.active = fitness[i] > fitness[j]
    return population


def sds_diffusion_phase(population: list[Agent], rng: np.random.Generator, mutation_rate: float,
                        init_density: float = 0.5) -> list[Agent]:
    """Passive agents copy-and-mutate an active peer's hypothesis or restart at random."""
    n = len(population)
    active = [a.active for a in population]
    hyps = [a.hypothesis for a in population]
    for a in population:
        if a.active:
            continue
        j = int(rng.integers(n))
        if active[j]:
            flips = rng.random(hyps[j].size) < mutation_rate
            a.hypothesis = _repair(hyps[j] ^ flips, rng)
        else:
            a.hypothesis = random_hypothesis(a.hypothesis.size, init_density, rng)
    return population


def _largest_cluster(population: list[Agent]) -> int:
    counts: dict[bytes, int] = {}
    for a in population:
        key = a.hypothesis.tobytes()
        counts[key] = counts.get(key, 0) + 1
    return max(counts.values())


def sds_run(d: Dataset, cfg: SdsConfig = SdsConfig()) -> tuple[np.ndarray, SdsTrace]:
    """Evaluate/test/diffuse until ``max_iterations`` or until a
    ``convergence_fraction`` share of agents hold the same hypothesis."""
    nf = d.n_features
    mutation = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / nf
    population = sds_init(cfg, nf)
    # separate stream from the one used to draw initial hypotheses
    rng = np.random.default_rng([cfg.seed, 1])
    cache: dict = {}
    trace = SdsTrace()

    def record(it):
        trace.records.append(TraceRecord(
            it, trace.best_fitness, float(np.mean([a.fitness for a in population])),
            sum(a.active for a in population), trace.best_hypothesis.copy(),
        ))

    _evaluate(population, d, cfg, cache, trace)
    record(0)
    for it in range(1, cfg.max_iterations + 1):
        if _largest_cluster(population) >= cfg.convergence_fraction * cfg.n_agents:
            trace.converged = True
            break
        sds_test_phase(population, rng)
        sds_diffusion_phase(population, rng, mutation, cfg.init_density)
        _evaluate(population, d, cfg, cache, trace)
        record(it)
    return trace.best_hypothesis.copy(), trace
