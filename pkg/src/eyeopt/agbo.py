"""Genetic-pool Bayesian optimization loop and method comparison harness.

Each iteration fits a GP to every evaluated point, breeds a candidate pool
from the elite of those points with a genetic algorithm, scores the pool with
the acquisition function and evaluates exactly the single best-scoring
candidate. The engine always maximizes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .evolution import (
    Candidate,
    GaParams,
    SearchSpace,
    evolve_candidates,
    sample_uniform,
)
from .surrogate import AcquisitionSpec, KernelSpec, acquisition, gp_fit

__all__ = [
    "AgboConfig",
    "HistoryRecord",
    "ObjectiveHandle",
    "RunResult",
    "ObjectiveError",
    "agbo_run",
    "best_of_history",
    "random_search",
    "ga_only",
    "compare_methods",
    "run_method",
    "METHODS",
]

log = logging.getLogger(__name__)

METHODS = ("agbo", "random", "ga-only", "bo-only")


@dataclass(frozen=True)
class AgboConfig:
    space: SearchSpace | None = None
    init_points: int = 10
    iterations: int = 50
    ga: GaParams = field(default_factory=GaParams)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    acquisition: AcquisitionSpec = field(default_factory=AcquisitionSpec)
    seed: int = 0
    patience: int | None = None

    def __post_init__(self):
        if self.init_points < 1:
            raise ValueError("init_points must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1 or None")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class HistoryRecord:
    iter_index: int
    candidate: Candidate
    fitness: float
    best_so_far: float
    acq_value: float | None
    elapsed_ms: float

    def to_json(self) -> dict:
        return {
            "iter": self.iter_index,
            "x": list(self.candidate),
            "f": self.fitness,
            "best": self.best_so_far,
            "acq": self.acq_value,
            "ms": self.elapsed_ms,
        }


@dataclass(frozen=True)
class ObjectiveHandle:
    name: str
    space: SearchSpace
    evaluate: Callable[[Candidate], float]
    declared_concurrency: str = "serial"

    @property
    def arity(self) -> int:
        return len(self.space)


@dataclass
class RunResult:
    best: tuple[Candidate, float]
    history: list[HistoryRecord]


class ObjectiveError(RuntimeError):
    """Objective evaluation failed; ``history`` holds the records made so far."""

    def __init__(self, msg: str, history: list[HistoryRecord]):
        super().__init__(msg)
        self.history = history


def best_of_history(history: Sequence) -> tuple[Candidate, float]:
    """Highest-fitness entry; the earliest one wins ties.

    Accepts :class:`HistoryRecord` objects or ``(candidate, fitness)`` pairs.
    """
    if not history:
        raise ValueError("empty history")
    best_c, best_f = None, -np.inf
    for h in history:
        c, f = (h.candidate, h.fitness) if isinstance(h, HistoryRecord) else h
        if best_c is None or f > best_f:
            best_c, best_f = c, f
    return best_c, best_f


def _streams(seed: int):
    """Independent generators for the init, GA and acquisition phases."""
    init, ga, acq = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(init), np.random.default_rng(ga), np.random.default_rng(acq)


class _Recorder:
    def __init__(self, objective: ObjectiveHandle, sink, timing: bool):
        self.objective = objective
        self.sink = sink
        self.timing = timing
        self.history: list[HistoryRecord] = []
        self.best = -np.inf

    @property
    def pairs(self):
        return [(h.candidate, h.fitness) for h in self.history]

    def evaluate(self, cand: Candidate, acq: float | None) -> HistoryRecord:
        t0 = time.perf_counter()
        try:
            f = float(self.objective.evaluate(cand))
        except Exception as exc:
            raise ObjectiveError(
                f"objective {self.objective.name!r} failed on {cand!r}: {exc}", self.history
            ) from exc
        ms = (time.perf_counter() - t0) * 1e3 if self.timing else 0.0
        if not np.isfinite(f):
            raise ObjectiveError(f"objective {self.objective.name!r} returned {f} for {cand!r}", self.history)
        self.best = max(self.best, f)
        rec = HistoryRecord(len(self.history), tuple(cand), f, self.best, acq, ms)
        self.history.append(rec)
        if self.sink is not None:
            self.sink(rec)
        return rec


def agbo_run(
    cfg: AgboConfig,
    objective: ObjectiveHandle,
    *,
    sink: Callable[[HistoryRecord], None] | None = None,
    timing: bool = True,
    pool: str = "ga",
) -> RunResult:
    """Run the optimizer.

    ``sink`` is called with every record as soon as it exists, so a crash
    leaves the partial history persisted. With ``timing=False`` the
    ``elapsed_ms`` field is 0 and the history is a pure function of the seed.
    ``pool="random"`` swaps the GA pool for uniform samples (the bo-only
    ablation).
    """
    space = cfg.space if cfg.space is not None else objective.space
    if objective.arity != len(space):
        raise ValueError(f"objective arity {objective.arity} != space dimension {len(space)}")
    if pool not in ("ga", "random"):
        raise ValueError(f"pool must be 'ga' or 'random', got {pool!r}")
    rng_init, rng_ga, rng_acq = _streams(cfg.seed)
    rec = _Recorder(objective, sink, timing)

    for _ in range(cfg.init_points):
        rec.evaluate(sample_uniform(space, rng_init), None)

    stale = 0
    for t in range(cfg.iterations):
        pairs = rec.pairs
        x = space.to_unit_many([c for c, _ in pairs])
        y = np.array([f for _, f in pairs])
        model = gp_fit(x, y, cfg.kernel)
        if pool == "ga":
            cands = evolve_candidates(space, pairs, cfg.ga, rng_ga)
        else:
            cands = [sample_uniform(space, rng_acq) for _ in range(cfg.ga.pool_size)]
        mu, var = model.predict(space.to_unit_many(cands))
        scores = acquisition(cfg.acquisition, mu, var, rec.best)
        i = int(np.argmax(scores))
        before = rec.best
        rec.evaluate(cands[i], float(scores[i]))
        log.debug("iter %d acq=%.4g f=%.6g best=%.6g", t, scores[i], rec.history[-1].fitness, rec.best)
        if cfg.patience is not None:
            stale = stale + 1 if rec.best <= before else 0
            if stale >= cfg.patience:
                log.info("no improvement for %d iterations, stopping at %d", stale, t + 1)
                break

    return RunResult(best_of_history(rec.history), rec.history)


def random_search(cfg: AgboConfig, objective: ObjectiveHandle, budget: int, **kw) -> RunResult:
    """Uniform sampling; the first ``init_points`` draws match :func:`agbo_run`."""
    space = cfg.space if cfg.space is not None else objective.space
    rng_init, _, _ = _streams(cfg.seed)
    rec = _Recorder(objective, kw.get("sink"), kw.get("timing", True))
    for _ in range(budget):
        rec.evaluate(sample_uniform(space, rng_init), None)
    return RunResult(best_of_history(rec.history), rec.history)


def ga_only(cfg: AgboConfig, objective: ObjectiveHandle, budget: int, **kw) -> RunResult:
    """Generational GA without a surrogate.

    After the shared random initialization every offspring is evaluated.
    Generations hold ``init_points`` children (the last one is truncated to
    the budget), bred from the elite of all evaluations so far.
    """
    space = cfg.space if cfg.space is not None else objective.space
    rng_init, rng_ga, _ = _streams(cfg.seed)
    rec = _Recorder(objective, kw.get("sink"), kw.get("timing", True))
    for _ in range(min(cfg.init_points, budget)):
        rec.evaluate(sample_uniform(space, rng_init), None)
    while len(rec.history) < budget:
        n = min(cfg.init_points, budget - len(rec.history))
        for child in evolve_candidates(space, rec.pairs, replace(cfg.ga, pool_size=n), rng_ga):
            rec.evaluate(child, None)
    return RunResult(best_of_history(rec.history), rec.history)


def run_method(method: str, cfg: AgboConfig, objective: ObjectiveHandle, budget: int) -> RunResult:
    if budget < cfg.init_points:
        raise ValueError(f"budget {budget} is smaller than init_points {cfg.init_points}")
    iters = budget - cfg.init_points
    if method == "agbo":
        return agbo_run(replace(cfg, iterations=iters, patience=None), objective)
    if method == "bo-only":
        return agbo_run(replace(cfg, iterations=iters, patience=None), objective, pool="random")
    if method == "random":
        return random_search(cfg, objective, budget)
    if method == "ga-only":
        return ga_only(cfg, objective, budget)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def compare_methods(
    objectives: Iterable[ObjectiveHandle],
    methods: Sequence[str] = METHODS,
    seeds: Sequence[int] = range(10),
    budget: int = 60,
    base: AgboConfig = AgboConfig(),
) -> list[dict]:
    """Best fitness reached at ``budget`` evaluations per (objective, method, seed).

    Every method sees the same budget and, for a given seed, the same initial
    random points.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    rows = []
    for obj in objectives:
        for method in methods:
            for seed in seeds:
                cfg = replace(base, space=obj.space, seed=int(seed))
                res = run_method(method, cfg, obj, budget)
                rows.append(
                    {"objective": obj.name, "method": method, "seed": int(seed), "best": res.best[1]}
                )
    return rows
