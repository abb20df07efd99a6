"""Run configuration: one human-editable TOML document, flat tables.

A run document names an instance (builder or JSON file), an oracle, a
learner, and an adversary, plus the horizon, seed, and verification toggles.
Sweep grids are TOML files with repeated ``[[cells]]`` tables of partial
overrides merged into the base document.
"""

from __future__ import annotations

import json
import math
import os
import tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adversaries import (BlockAdversary, FixedSequenceAdversary, IidAdversary,
                          ShiftingAdversary, WorstOfKAdversary)
from .errors import ConfigError
from .instances import (Instance, cde_instance, full_cube_instance, indicator_instance,
                        instance_from_json, random_binary_instance, ratio_bound,
                        square_instance, threshold_instance)
from .learners import (DelayedReductionLearner, IdentityLearner, VersionSpaceLearner,
                       tune_delay)
from .cde import OeoeCdeStack, replay_count, tune_stack_delay
from .oracles import (BlockDelayOracle, ConsistentBinaryOracle, ErmSquareOracle,
                      MleOracle, ShiftedProperOracle, UnseenCovariateOracle,
                      custom_table_oracle_from_json)
from .protocol import run_protocol
from .rng import spawn_seed, substream

__all__ = ["load_config", "merge", "run_from_config", "run_cell", "sweep", "SweepRow"]


def load_config(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"missing {key!r} in {where}")
    return doc[key]


def build_instance(doc: dict, seed: int) -> Instance:
    if "path" in doc:
        path = Path(doc["path"])
        if not path.exists():
            raise ConfigError(f"instance file not found: {path}")
        return instance_from_json(path.read_text())
    kind = _require(doc, "kind", "[instance]")
    rng = substream(seed, "instance")
    if kind == "random-binary":
        return random_binary_instance(int(doc["n_class"]), int(doc["n_covariates"]), rng)
    if kind == "cube":
        return full_cube_instance(int(doc["n"]))
    if kind == "indicator":
        return indicator_instance(int(doc["n"]))
    if kind == "threshold":
        return threshold_instance(int(doc["n"]))
    if kind == "square":
        return square_instance(int(doc["n_class"]), int(doc["n_covariates"]), rng,
                               sigma=float(doc.get("sigma", 1.0)))
    if kind == "cde":
        return cde_instance(int(doc["n_class"]), int(doc["n_covariates"]),
                            int(doc.get("n_outcomes", 2)), rng,
                            floor=float(doc.get("floor", 0.05)))
    raise ConfigError(f"unknown instance kind {kind!r}")


def build_oracle(doc: dict, instance: Instance, f_star: int):
    kind = _require(doc, "kind", "[oracle]")
    beta = float(doc.get("beta", 0.0))
    if kind == "erm-square":
        return ErmSquareOracle(instance, beta)
    if kind == "mle":
        return MleOracle(instance, beta)
    if kind == "consistent-binary":
        return ConsistentBinaryOracle(instance, beta)
    if kind == "block-delay":
        return BlockDelayOracle(instance, beta, target=f_star)
    if kind == "unseen-covariate":
        return UnseenCovariateOracle(instance, beta, target=f_star)
    if kind == "shifted-proper":
        return ShiftedProperOracle(instance, beta)
    if kind == "custom-table":
        path = Path(_require(doc, "path", "[oracle]"))
        if not path.exists():
            raise ConfigError(f"oracle table file not found: {path}")
        return custom_table_oracle_from_json(instance, beta, path.read_text())
    raise ConfigError(f"unknown oracle kind {kind!r}")


def build_learner(doc: dict, instance: Instance, beta: float, horizon: int, seed: int):
    kind = _require(doc, "kind", "[learner]")
    eta = float(doc.get("eta", 0.0))
    eta_kwargs = {} if eta <= 0 else {"eta": eta}
    if kind == "version-space":
        return VersionSpaceLearner(instance, beta,
                                   threshold_multiplier=float(doc.get("threshold_multiplier", 1.0)),
                                   averaged=bool(doc.get("averaged", False)))
    if kind == "identity":
        return IdentityLearner(instance)
    if kind in ("delayed", "majority"):
        delay = int(doc.get("delay", 0))
        if delay < 1:
            delay = tune_delay(beta, horizon, instance.loss.c_d, math.log(instance.n_class),
                               beta_free=bool(doc.get("beta_free", False)))
        mode = "majority" if kind == "majority" else "average"
        return DelayedReductionLearner(instance, delay, mode=mode, **eta_kwargs)
    if kind == "cde-stack":
        log_v = math.log(ratio_bound(instance))
        delay = int(doc.get("delay", 0))
        if delay < 1:
            delay = tune_stack_delay(1.0, beta, horizon, log_v, math.log(instance.n_class))
        replays = int(doc.get("replays", 0))
        if replays < 1:
            cap = int(doc["replay_cap"]) if doc.get("fast", False) else None
            replays = replay_count(math.ceil(horizon / delay), instance.n_class,
                                   instance.n_covariates, 1.0 / delay, cap=cap)
        return OeoeCdeStack(instance, delay, replays, seed, materialize=True)
    raise ConfigError(f"unknown learner kind {kind!r}")


def build_adversary(doc: dict, instance: Instance, beta: float, f_star: int, seed: int):
    kind = _require(doc, "kind", "[adversary]")
    if kind == "fixed":
        seq = [int(v) for v in _require(doc, "sequence", "[adversary]")]
        if any(x < 0 or x >= instance.n_covariates for x in seq):
            raise ConfigError("fixed sequence leaves the covariate set")
        return FixedSequenceAdversary(seq)
    if kind == "block":
        return BlockAdversary(beta, instance.n_covariates)
    if kind == "shifting":
        return ShiftingAdversary(beta, instance.n_covariates)
    if kind == "iid":
        probs = doc.get("probs") or None
        return IidAdversary(instance.n_covariates, substream(seed, "adversary"), probs)
    if kind == "worst-of-k":
        k = int(doc.get("k", 0)) or instance.n_covariates
        return WorstOfKAdversary(instance, f_star, k, substream(seed, "adversary"),
                                 use_realized=bool(doc.get("realized", False)))
    raise ConfigError(f"unknown adversary kind {kind!r}")


def run_from_config(doc: dict, seed: int | None = None, out_dir: str | Path | None = None):
    horizon = int(_require(doc, "t", "config"))
    if horizon < 1:
        raise ConfigError("t must be at least 1")
    if seed is None:
        if "seed" not in doc:
            raise ConfigError("runs are never unseeded: set 'seed' or pass --seed")
        seed = int(doc["seed"])
    inst_doc = _require(doc, "instance", "config")
    instance = build_instance(inst_doc, seed)
    f_star = int(inst_doc.get("f_star", 0))
    if not (0 <= f_star < instance.n_class):
        raise ConfigError("f_star outside the class")
    oracle = build_oracle(_require(doc, "oracle", "config"), instance, f_star)
    learner = build_learner(_require(doc, "learner", "config"), instance,
                            oracle.beta_off, horizon, seed)
    adversary = build_adversary(_require(doc, "adversary", "config"), instance,
                                oracle.beta_off, f_star, seed)
    check = bool(doc.get("verification", {}).get("check_budget", False))
    log = run_protocol(instance, oracle, learner, adversary, horizon, seed, f_star,
                       check_budget=check)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "log.csv", log.to_csv())
        _atomic_write(out / "log.json", log.to_json())
        _atomic_write(out / "config.json", json.dumps({"seed": seed, **doc}, indent=1))
    return log


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


@dataclass
class SweepRow:
    cell: dict
    n_runs: int
    mean: float
    stderr: float
    failures: list[str]


def run_cell(base: dict, cell: dict, seed: int) -> float:
    log = run_from_config(merge(base, cell), seed=seed)
    return log.online_error()


def _worker(args):
    base, cell, seed = args
    return run_cell(base, cell, seed)


def sweep(base: dict, cells: list[dict], n_seeds: int,
          out_dir: str | Path | None = None, threads: int | None = None) -> list[SweepRow]:
    """One protocol run per (cell, seed); cells are isolated and may fail independently."""
    if not cells:
        raise ConfigError("sweep grid is empty")
    if threads is None:
        threads = int(os.environ.get("OEOE_THREADS", "1"))
    base_seed = int(base.get("seed", 0))
    jobs = [(merge({}, base), cell, spawn_seed(base_seed, "sweep", i, j))
            for i, cell in enumerate(cells) for j in range(n_seeds)]
    results: list[float | None] = [None] * len(jobs)
    errors: list[str | None] = [None] * len(jobs)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(_worker, job): k for k, job in enumerate(jobs)}
            for fut, k in futures.items():
                try:
                    results[k] = fut.result()
                except Exception as exc:  # cell isolation: report, keep going
                    errors[k] = str(exc)
    else:
        for k, job in enumerate(jobs):
            try:
                results[k] = _worker(job)
            except Exception as exc:
                errors[k] = str(exc)
    rows = []
    for i, cell in enumerate(cells):
        vals = [results[i * n_seeds + j] for j in range(n_seeds)]
        errs = [errors[i * n_seeds + j] for j in range(n_seeds)]
        good = np.array([v for v in vals if v is not None], dtype=float)
        mean = float(good.mean()) if good.size else float("nan")
        stderr = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
        rows.append(SweepRow(cell=cell, n_runs=int(good.size), mean=mean, stderr=stderr,
                             failures=[e for e in errs if e is not None]))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["cell,n_runs,mean,stderr,failures"]
        for row in rows:
            cell_json = json.dumps(row.cell).replace('"', "'")
            lines.append(f'"{cell_json}",{row.n_runs},{row.mean!r},{row.stderr!r},'
                         f'{len(row.failures)}')
        _atomic_write(out / "sweep.csv", "\n".join(lines) + "\n")
    return rows
