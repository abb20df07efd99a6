"""The protocol runner.

Event order within round t, matching the interaction this library simulates:

1. the oracle maps the history (x, y pairs so far) to an estimator,
2. the learner sees the estimator and publishes its distribution mu^(t) and a
   realized draw,
3. nature (the adversary) selects x^(t) based on mu^(t) -- or the realized
   draw in the weaker ablation mode,
4. the outcome y^(t) is sampled from the kernel at the target's value and fed
   only to the oracle's history, never to the learner.

Runs are bit-identical for identical (configuration, seed).
"""

from __future__ import annotations

import numpy as np

from .adversaries import Adversary
from .errors import OracleViolationError
from .instances import Instance, sample_outcome
from .oracles import Oracle
from .rng import substream
from .transcript import ExperimentLog, StepRecord, step_expected_loss

__all__ = ["run_protocol"]


def run_protocol(instance: Instance, oracle: Oracle, learner, adversary: Adversary,
                 horizon: int, seed: int, f_star_index: int,
                 check_budget: bool = False, budget_tol: float = 1e-9) -> ExperimentLog:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    kernel_rng = substream(seed, "kernel")
    learner_rng = substream(seed, "learner")
    f_star_table = instance.class_tables[f_star_index]
    log = ExperimentLog(instance=instance, horizon=horizon, beta_off=oracle.beta_off,
                        seed=seed, f_star_index=f_star_index)
    xs: list[int] = []
    ys: list = []

    for t in range(1, horizon + 1):
        fhat = oracle.output(t, xs, ys)
        budget_used = _prefix_error(instance, xs, fhat, f_star_table)
        if check_budget and budget_used > oracle.beta_off + budget_tol:
            raise OracleViolationError(
                f"oracle exceeded its budget at round {t}: "
                f"{budget_used:.6g} > {oracle.beta_off:.6g}", round_index=t)
        mixture = learner.step(t, fhat)
        realized = mixture.sample(learner_rng)
        x = adversary.select(t, mixture, realized)
        y = sample_outcome(instance.kernel, f_star_table[x], kernel_rng)
        step_loss = step_expected_loss(instance, mixture, x, f_star_index)
        log.steps.append(StepRecord(x=x, y=y, fhat=fhat, mixture=mixture,
                                    realized=realized, step_loss=step_loss,
                                    offline_budget_used=budget_used))
        learner.observe(x)
        xs.append(x)
        ys.append(y)
    return log


def _prefix_error(instance: Instance, xs, fhat, f_star_table) -> float:
    if not xs:
        return 0.0
    from .losses import table_loss

    table = instance.table(fhat)
    idx = np.asarray(xs, dtype=int)
    return float(table_loss(instance.loss, table[idx], f_star_table[idx]).sum())
