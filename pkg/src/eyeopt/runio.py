"""Config parsing, history persistence and CSV export.

Config files are JSON objects mirroring :class:`~eyeopt.agbo.AgboConfig`::

    {
      "seed": 7,
      "space": [
        {"type": "continuous", "name": "lr", "low": 1e-5, "high": 1e-2, "log": true},
        {"type": "integer", "name": "epochs", "low": 10, "high": 100},
        {"type": "categorical", "name": "batch_size", "choices": [8, 16, 32, 64]}
      ],
      "init_points": 10, "iterations": 50, "patience": null,
      "ga": {"pc": 0.9, "pm": 0.2, "pool_size": 50, "tournament_k": 3, "mutation_sigma": 0.1},
      "kernel": {"lengthscale": 0.2, "signal_variance": 1.0, "noise_variance": 1e-6,
                 "lengthscale_grid": null},
      "acquisition": {"kind": "ei", "xi": 0.01, "kappa": 2.0}
    }

Only ``seed`` is required. Unknown keys are rejected. ``space`` may be left out
when the objective brings its own domain.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .agbo import AgboConfig, HistoryRecord, ObjectiveHandle, RunResult, agbo_run
from .evolution import Categorical, Continuous, GaParams, Integer, SearchSpace
from .features import FeatureRecord
from .surrogate import AcquisitionSpec, KernelSpec

__all__ = [
    "ConfigError",
    "FEATURE_COLUMNS",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "dump_config",
    "append_history_record",
    "read_history",
    "JsonlSink",
    "run_and_persist",
    "export_features_csv",
    "read_features_csv",
]

FEATURE_COLUMNS = (
    "disc_area", "cup_area", "cdr_area", "cdr_vertical", "cdr_horizontal", "nrr_area",
    "isnt_i", "isnt_s", "isnt_n", "isnt_t",
    "contrast", "dissimilarity", "homogeneity", "energy", "correlation", "asm",
    "vessel_mean", "vessel_max", "vessel_density",
)


class ConfigError(ValueError):
    """Invalid configuration. The message starts with the offending key path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


# ---------------------------------------------------------------------------
# small typed readers that report the key path
# ---------------------------------------------------------------------------


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _num(d, key, path, default, lo=None, hi=None, lo_open=False):
    v = d.get(key, default)
    p = f"{path}.{key}" if path else key
    if not _is_num(v):
        raise ConfigError(p, f"expected a number, got {v!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(p, f"must be {'>' if lo_open else '>='} {lo}, got {v!r}")
    if hi is not None and v > hi:
        raise ConfigError(p, f"must be <= {hi}, got {v!r}")
    return float(v)


def _int(d, key, path, default, lo=None, hi=None):
    v = d.get(key, default)
    p = f"{path}.{key}" if path else key
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(p, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(p, f"must be >= {lo}, got {v!r}")
    if hi is not None and v > hi:
        raise ConfigError(p, f"must be <= {hi}, got {v!r}")
    return v


def _obj(d, key, path) -> dict:
    v = d.get(key, {})
    p = f"{path}.{key}" if path else key
    if not isinstance(v, dict):
        raise ConfigError(p, f"expected an object, got {type(v).__name__}")
    return v


def _no_unknown(d: dict, allowed: Iterable[str], path: str):
    extra = sorted(set(d) - set(allowed))
    if extra:
        p = f"{path}.{extra[0]}" if path else extra[0]
        raise ConfigError(p, "unknown key")


def _dimension(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(path, "dimension must be an object")
    kind = spec.get("type")
    name = spec.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name", "expected a nonempty string")
    if kind == "continuous":
        _no_unknown(spec, ("type", "name", "low", "high", "log"), path)
        lo = _num(spec, "low", path, None)
        hi = _num(spec, "high", path, None)
        log = spec.get("log", False)
        if not isinstance(log, bool):
            raise ConfigError(f"{path}.log", "expected true or false")
        if not lo < hi:
            raise ConfigError(f"{path}.high", "must be greater than low")
        if log and lo <= 0:
            raise ConfigError(f"{path}.low", "log scale needs low > 0")
        return Continuous(name, lo, hi, log)
    if kind == "integer":
        _no_unknown(spec, ("type", "name", "low", "high"), path)
        lo = _int(spec, "low", path, None)
        hi = _int(spec, "high", path, None)
        if not lo < hi:
            raise ConfigError(f"{path}.high", "must be greater than low")
        return Integer(name, lo, hi)
    if kind == "categorical":
        _no_unknown(spec, ("type", "name", "choices"), path)
        choices = spec.get("choices")
        if not isinstance(choices, list) or not choices:
            raise ConfigError(f"{path}.choices", "expected a nonempty list")
        for i, c in enumerate(choices):
            if not (isinstance(c, str) or _is_num(c)):
                raise ConfigError(f"{path}.choices[{i}]", "choices must be numbers or strings")
        if len(set(choices)) != len(choices):
            raise ConfigError(f"{path}.choices", "duplicate choices")
        return Categorical(name, tuple(choices))
    raise ConfigError(f"{path}.type", f"expected continuous, integer or categorical, got {kind!r}")


def config_from_dict(d: dict) -> AgboConfig:
    if not isinstance(d, dict):
        raise ConfigError("", "config must be a JSON object")
    _no_unknown(
        d,
        ("space", "seed", "init_points", "iterations", "patience", "ga", "kernel", "acquisition"),
        "",
    )
    if "seed" not in d:
        raise ConfigError("seed", "required")
    seed = _int(d, "seed", "", None, 0, 2**64 - 1)

    space = None
    if d.get("space") is not None:
        if not isinstance(d["space"], list) or not d["space"]:
            raise ConfigError("space", "expected a nonempty list of dimensions")
        dims = [_dimension(s, f"space[{i}]") for i, s in enumerate(d["space"])]
        names = [x.name for x in dims]
        if len(set(names)) != len(names):
            raise ConfigError("space", f"duplicate dimension names {names}")
        space = SearchSpace(tuple(dims))

    patience = d.get("patience")
    if patience is not None:
        patience = _int(d, "patience", "", None, 1)

    g = _obj(d, "ga", "")
    _no_unknown(g, ("pc", "pm", "pool_size", "tournament_k", "mutation_sigma"), "ga")
    ga = GaParams(
        pc=_num(g, "pc", "ga", 0.9, 0, 1),
        pm=_num(g, "pm", "ga", 0.2, 0, 1),
        pool_size=_int(g, "pool_size", "ga", 50, 1),
        tournament_k=_int(g, "tournament_k", "ga", 3, 1),
        mutation_sigma=_num(g, "mutation_sigma", "ga", 0.1, 0, lo_open=True),
    )

    k = _obj(d, "kernel", "")
    _no_unknown(k, ("kind", "lengthscale", "signal_variance", "noise_variance", "lengthscale_grid"), "kernel")
    if k.get("kind", "squared-exponential") != "squared-exponential":
        raise ConfigError("kernel.kind", "only squared-exponential is supported")
    ls = k.get("lengthscale", 0.2)
    if isinstance(ls, list):
        if not ls or not all(_is_num(v) and v > 0 for v in ls):
            raise ConfigError("kernel.lengthscale", "expected positive numbers")
        ls = tuple(float(v) for v in ls)
    else:
        ls = _num(k, "lengthscale", "kernel", 0.2, 0, lo_open=True)
    grid = k.get("lengthscale_grid")
    if grid is not None:
        if not isinstance(grid, list) or not grid or not all(_is_num(v) and v > 0 for v in grid):
            raise ConfigError("kernel.lengthscale_grid", "expected a nonempty list of positive numbers")
        grid = tuple(float(v) for v in grid)
    kernel = KernelSpec(
        lengthscale=ls,
        signal_variance=_num(k, "signal_variance", "kernel", 1.0, 0, lo_open=True),
        noise_variance=_num(k, "noise_variance", "kernel", 1e-6, 0),
        lengthscale_grid=grid,
    )

    a = _obj(d, "acquisition", "")
    _no_unknown(a, ("kind", "xi", "kappa"), "acquisition")
    kind = a.get("kind", "ei")
    if kind not in ("ei", "ucb"):
        raise ConfigError("acquisition.kind", f"expected 'ei' or 'ucb', got {kind!r}")
    acq = AcquisitionSpec(
        kind=kind,
        xi=_num(a, "xi", "acquisition", 0.01, 0),
        kappa=_num(a, "kappa", "acquisition", 2.0, 0, lo_open=True),
    )

    return AgboConfig(
        space=space,
        init_points=_int(d, "init_points", "", 10, 1),
        iterations=_int(d, "iterations", "", 50, 0),
        ga=ga,
        kernel=kernel,
        acquisition=acq,
        seed=seed,
        patience=patience,
    )


def _dim_to_dict(dim) -> dict:
    if isinstance(dim, Continuous):
        return {"type": "continuous", "name": dim.name, "low": dim.low, "high": dim.high, "log": dim.log}
    if isinstance(dim, Integer):
        return {"type": "integer", "name": dim.name, "low": dim.low, "high": dim.high}
    return {"type": "categorical", "name": dim.name, "choices": list(dim.choices)}


def config_to_dict(cfg: AgboConfig) -> dict:
    """Fully resolved config, every default spelled out."""
    kernel = asdict(cfg.kernel)
    if isinstance(kernel["lengthscale"], tuple):
        kernel["lengthscale"] = list(kernel["lengthscale"])
    if kernel["lengthscale_grid"] is not None:
        kernel["lengthscale_grid"] = list(kernel["lengthscale_grid"])
    return {
        "seed": cfg.seed,
        "space": None if cfg.space is None else [_dim_to_dict(x) for x in cfg.space.dims],
        "init_points": cfg.init_points,
        "iterations": cfg.iterations,
        "patience": cfg.patience,
        "ga": asdict(cfg.ga),
        "kernel": kernel,
        "acquisition": asdict(cfg.acquisition),
    }


def load_config(path: str | Path) -> AgboConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON in {path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: AgboConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# history
# ---------------------------------------------------------------------------


def _jsonable(v):
    if hasattr(v, "item"):
        return v.item()
    return v


def append_history_record(sink: TextIO, rec: HistoryRecord) -> None:
    """Write one JSON line and flush it. Floats use the shortest repr that
    round-trips exactly."""
    obj = {k: ([_jsonable(x) for x in v] if k == "x" else _jsonable(v)) for k, v in rec.to_json().items()}
    sink.write(json.dumps(obj, allow_nan=False) + "\n")
    sink.flush()


def read_history(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


class JsonlSink:
    """Callable sink for :func:`eyeopt.agbo.agbo_run` writing to an open file."""

    def __init__(self, fh: TextIO):
        self.fh = fh

    def __call__(self, rec: HistoryRecord) -> None:
        append_history_record(self.fh, rec)


def run_and_persist(
    cfg: AgboConfig,
    objective: ObjectiveHandle,
    history_path: str | Path,
    *,
    timing: bool = False,
) -> RunResult:
    """Run the optimizer, streaming the history to JSONL, then write a
    ``<history>.summary.json`` with the resolved config, best point and wall
    time. The summary config alone replays the run."""
    history_path = Path(history_path)
    t0 = time.perf_counter()
    with open(history_path, "w", encoding="utf-8", newline="\n") as fh:
        result = agbo_run(cfg, objective, sink=JsonlSink(fh), timing=timing)
    wall = time.perf_counter() - t0
    resolved = cfg if cfg.space is not None else replace(cfg, space=objective.space)
    summary = {
        "objective": objective.name,
        "config": config_to_dict(resolved),
        "best": {"x": [_jsonable(v) for v in result.best[0]], "f": result.best[1]},
        "evaluations": len(result.history),
        "wall_time_s": wall,
    }
    summary_path = history_path.with_name(history_path.name + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return result


# ---------------------------------------------------------------------------
# feature tables
# ---------------------------------------------------------------------------


def export_features_csv(records: Sequence[FeatureRecord], path: str | Path) -> None:
    if not records:
        raise ValueError("no feature records to export")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_COLUMNS)
        for r in records:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r.to_row()])


def read_features_csv(path: str | Path) -> list[dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return [{k: float(v) for k, v in zip(header, row)} for row in body]
