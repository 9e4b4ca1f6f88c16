"""Benchmark objectives, all expressed as fitness (higher is better).

Classic minimization test functions are negated. ``mock-tuning`` stands in
for a real training run over (batch size, epochs, learning rate) and peaks at
batch size 8, 80 epochs, learning rate 1e-4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .agbo import ObjectiveHandle
from .evolution import Categorical, Continuous, Integer, SearchSpace

__all__ = [
    "BenchmarkSpec",
    "BENCHMARKS",
    "sphere",
    "branin",
    "rastrigin",
    "hartmann6",
    "mock_tuning_objective",
    "eval_benchmark",
    "get_objective",
    "OutOfDomainError",
]


class OutOfDomainError(ValueError):
    pass


def sphere(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x**2))


def branin(x) -> float:
    x1, x2 = float(x[0]), float(x[1])
    b = 5.1 / (4 * np.pi**2)
    c = 5 / np.pi
    t = 1 / (8 * np.pi)
    return (x2 - b * x1**2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array(
    [
        [10, 3, 17, 3.5, 1.7, 8],
        [0.05, 10, 17, 0.1, 8, 14],
        [3, 3.5, 1.7, 10, 17, 8],
        [17, 8, 0.05, 10, 0.1, 14],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def hartmann6(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    inner = np.sum(_H6_A * (x[None, :] - _H6_P) ** 2, axis=1)
    return float(-np.sum(_H6_ALPHA * np.exp(-inner)))


MOCK_OPTIMUM = (8, 80, 1e-4)


def mock_tuning_objective(batch_size, epochs, lr) -> float:
    """``-[(log2 bs - 3)^2 + ((epochs - 80) / 40)^2 + (log10 lr + 4)^2]``."""
    return -(
        (np.log2(batch_size) - 3.0) ** 2
        + ((epochs - 80) / 40.0) ** 2
        + (np.log10(lr) + 4.0) ** 2
    )


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    space: SearchSpace
    fitness: Callable[[tuple], float]
    known_best: float | None = None
    known_best_x: tuple | None = None

    @property
    def dims(self) -> int:
        return len(self.space)


def _box(prefix, bounds):
    return SearchSpace(tuple(Continuous(f"{prefix}{i}", lo, hi) for i, (lo, hi) in enumerate(bounds)))


BENCHMARKS: dict[str, BenchmarkSpec] = {
    "sphere": BenchmarkSpec(
        "sphere", _box("x", [(-5.0, 5.0)] * 3), lambda x: -sphere(x), 0.0, (0.0, 0.0, 0.0)
    ),
    "branin": BenchmarkSpec(
        "branin",
        _box("x", [(-5.0, 10.0), (0.0, 15.0)]),
        lambda x: -branin(x),
        -0.39788735772973816,
        (np.pi, 2.275),
    ),
    "rastrigin": BenchmarkSpec(
        "rastrigin", _box("x", [(-5.12, 5.12)] * 2), lambda x: -rastrigin(x), 0.0, (0.0, 0.0)
    ),
    "hartmann6": BenchmarkSpec(
        "hartmann6",
        _box("x", [(0.0, 1.0)] * 6),
        lambda x: -hartmann6(x),
        3.322368011415515,
        (0.20168952, 0.15001069, 0.47687398, 0.27533243, 0.31165162, 0.65730054),
    ),
    "mock-tuning": BenchmarkSpec(
        "mock-tuning",
        SearchSpace(
            (
                Categorical("batch_size", (8, 16, 32, 64)),
                Integer("epochs", 10, 100),
                Continuous("lr", 1e-5, 1e-2, log=True),
            )
        ),
        lambda x: mock_tuning_objective(*x),
        0.0,
        MOCK_OPTIMUM,
    ),
}


def eval_benchmark(spec: BenchmarkSpec | str, x) -> float:
    """Fitness of ``x``; raises :class:`OutOfDomainError` outside the domain."""
    if isinstance(spec, str):
        spec = BENCHMARKS[spec]
    x = tuple(x)
    if not spec.space.contains(x):
        raise OutOfDomainError(f"{spec.name}: {x!r} is outside the domain")
    return float(spec.fitness(x))


def get_objective(name: str) -> ObjectiveHandle:
    try:
        spec = BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; choose from {sorted(BENCHMARKS)}") from None
    return ObjectiveHandle(
        name=name,
        space=spec.space,
        evaluate=lambda x: eval_benchmark(spec, x),
        declared_concurrency="parallel-safe",
    )
