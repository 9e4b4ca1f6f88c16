"""Mixed search spaces and the genetic operators that fill the candidate pool.

A candidate is a tuple with one gene per dimension: ``float`` for continuous
dimensions, ``int`` for integer ones and the choice object itself for
categoricals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

__all__ = [
    "Continuous",
    "Integer",
    "Categorical",
    "SearchSpace",
    "GaParams",
    "Candidate",
    "sample_uniform",
    "select_parents",
    "crossover",
    "mutate",
    "evolve_candidates",
    "ELITE_SIZE",
    "DEDUP_TOL",
    "DEDUP_RETRIES",
]

Candidate = tuple
ELITE_SIZE = 20
DEDUP_TOL = 1e-9
DEDUP_RETRIES = 10
_ONE_HOT_SCALE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Continuous:
    name: str
    low: float
    high: float
    log: bool = False

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"{self.name}: low must be < high")
        if self.log and self.low <= 0:
            raise ValueError(f"{self.name}: log scale needs low > 0")

    def _t(self, v):
        return np.log10(v) if self.log else v

    def _inv(self, u):
        return float(10.0**u) if self.log else float(u)

    @property
    def _span(self):
        return self._t(self.high) - self._t(self.low)

    def sample(self, rng) -> float:
        u = rng.uniform(self._t(self.low), self._t(self.high))
        return self.clip(self._inv(u))

    def clip(self, v) -> float:
        return float(min(max(v, self.low), self.high))

    def contains(self, v) -> bool:
        return isinstance(v, (float, int, np.floating, np.integer)) and self.low <= v <= self.high

    def to_unit(self, v) -> list[float]:
        return [float((self._t(v) - self._t(self.low)) / self._span)]

    def mutate(self, v, sigma, rng) -> float:
        u = self._t(v) + rng.normal(0.0, sigma * self._span)
        u = min(max(u, self._t(self.low)), self._t(self.high))
        return self.clip(self._inv(u))


@dataclass(frozen=True)
class Integer:
    name: str
    low: int
    high: int

    def __post_init__(self):
        if int(self.low) != self.low or int(self.high) != self.high:
            raise ValueError(f"{self.name}: integer bounds required")
        if not self.low < self.high:
            raise ValueError(f"{self.name}: low must be < high")

    def sample(self, rng) -> int:
        return int(rng.integers(self.low, self.high + 1))

    def clip(self, v) -> int:
        return int(min(max(int(round(v)), self.low), self.high))

    def contains(self, v) -> bool:
        return isinstance(v, (int, np.integer)) and not isinstance(v, bool) and self.low <= v <= self.high

    def to_unit(self, v) -> list[float]:
        return [(v - self.low) / (self.high - self.low)]

    def mutate(self, v, sigma, rng) -> int:
        return self.clip(v + rng.normal(0.0, sigma * (self.high - self.low)))


@dataclass(frozen=True)
class Categorical:
    name: str
    choices: tuple

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if not self.choices:
            raise ValueError(f"{self.name}: choices must be nonempty")

    def sample(self, rng):
        return self.choices[int(rng.integers(len(self.choices)))]

    def clip(self, v):
        return v

    def contains(self, v) -> bool:
        return v in self.choices

    def to_unit(self, v) -> list[float]:
        onehot = [0.0] * len(self.choices)
        onehot[self.choices.index(v)] = _ONE_HOT_SCALE
        return onehot

    def mutate(self, v, sigma, rng):
        others = [c for c in self.choices if c != v]
        if not others:
            return v
        return others[int(rng.integers(len(others)))]


Dimension = Union[Continuous, Integer, Categorical]


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("search space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names in {names}")

    def __len__(self):
        return len(self.dims)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    @property
    def unit_dim(self) -> int:
        return sum(len(d.choices) if isinstance(d, Categorical) else 1 for d in self.dims)

    def contains(self, c: Sequence[Any]) -> bool:
        return len(c) == len(self.dims) and all(d.contains(v) for d, v in zip(self.dims, c))

    def validate(self, c: Sequence[Any]) -> Candidate:
        if len(c) != len(self.dims):
            raise ValueError(f"candidate has {len(c)} genes, space has {len(self.dims)} dimensions")
        for d, v in zip(self.dims, c):
            if not d.contains(v):
                raise ValueError(f"{d.name}: value {v!r} out of domain")
        return tuple(c)

    def to_unit(self, c: Sequence[Any]) -> np.ndarray:
        """Embed a candidate in the unit hypercube (categoricals one-hot / sqrt 2)."""
        out: list[float] = []
        for d, v in zip(self.dims, c):
            out.extend(d.to_unit(v))
        return np.asarray(out, dtype=np.float64)

    def to_unit_many(self, cands: Sequence[Sequence[Any]]) -> np.ndarray:
        if not cands:
            return np.zeros((0, self.unit_dim))
        return np.vstack([self.to_unit(c) for c in cands])


@dataclass(frozen=True)
class GaParams:
    pc: float = 0.9
    pm: float = 0.2
    pool_size: int = 50
    tournament_k: int = 3
    mutation_sigma: float = 0.1

    def __post_init__(self):
        if not 0 <= self.pc <= 1:
            raise ValueError("pc must lie in [0, 1]")
        if not 0 <= self.pm <= 1:
            raise ValueError("pm must lie in [0, 1]")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.tournament_k < 1:
            raise ValueError("tournament_k must be >= 1")
        if self.mutation_sigma <= 0:
            raise ValueError("mutation_sigma must be > 0")


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> Candidate:
    return tuple(d.sample(rng) for d in space.dims)


def _tournament(fitness: Sequence[float], k: int, rng) -> int:
    n = len(fitness)
    idx = np.sort(rng.choice(n, size=min(k, n), replace=False))
    # argmax picks the first (lowest index) among ties
    return int(idx[int(np.argmax([fitness[i] for i in idx]))])


def select_parents(population, k: int, rng: np.random.Generator) -> tuple[Candidate, Candidate]:
    """Two independent size-``k`` tournaments over ``(candidate, fitness)`` pairs."""
    if not population:
        raise ValueError("empty population")
    fitness = [f for _, f in population]
    a = _tournament(fitness, k, rng)
    b = _tournament(fitness, k, rng)
    return population[a][0], population[b][0]


def crossover(a: Candidate, b: Candidate, pc: float, rng: np.random.Generator) -> Candidate:
    """Uniform crossover with probability ``pc``, else a copy of ``a``."""
    if len(a) != len(b):
        raise ValueError("parents come from different spaces")
    if rng.random() >= pc:
        return tuple(a)
    picks = rng.random(len(a)) < 0.5
    return tuple(x if take_a else y for x, y, take_a in zip(a, b, picks))


def mutate(space: SearchSpace, c: Candidate, pm: float, sigma: float, rng: np.random.Generator) -> Candidate:
    """Per-gene mutation with probability ``pm``.

    Continuous genes get a Gaussian step of ``sigma`` times the range (in log
    space for log dimensions), integers the same then rounded, and categoricals
    are re-drawn among the other choices. Results are clamped to the domain.
    """
    flips = rng.random(len(space.dims)) < pm
    return tuple(
        d.mutate(v, sigma, rng) if flip else v for d, v, flip in zip(space.dims, c, flips)
    )


def _elite(history, size: int):
    order = sorted(range(len(history)), key=lambda i: (-history[i][1], i))
    return [history[i] for i in order[:size]]


def evolve_candidates(
    space: SearchSpace,
    history,
    ga: GaParams,
    rng: np.random.Generator,
) -> list[Candidate]:
    """Breed ``ga.pool_size`` candidates from the elite of ``history``.

    The population is the best ``min(20, len(history))`` evaluated points.
    Each child comes from tournament selection, uniform crossover and
    mutation. A child that coincides with an evaluated point (within 1e-9 in
    the unit embedding) is bred again, up to 10 times, then kept anyway.
    """
    if not history:
        raise ValueError("empty history")
    population = _elite(history, ELITE_SIZE)
    known = space.to_unit_many([c for c, _ in history])
    pool: list[Candidate] = []
    while len(pool) < ga.pool_size:
        for _ in range(DEDUP_RETRIES + 1):
            a, b = select_parents(population, ga.tournament_k, rng)
            child = mutate(space, crossover(a, b, ga.pc, rng), ga.pm, ga.mutation_sigma, rng)
            dist = np.max(np.abs(known - space.to_unit(child)), axis=1)
            if dist.min() > DEDUP_TOL:
                break
        pool.append(child)
    return pool
