"""Offline estimation oracles.

An oracle is a pure map from the history (x^(1..t-1), y^(1..t-1)) to an
estimator whose in-sample error against the target never exceeds a declared
budget.  Statistical oracles (ERM, MLE, consistency) never see the target;
the adversarial oracles used in lower-bound constructions receive it
explicitly, which is legitimate because the definition constrains only their
in-sample error, not their information.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLikelihoodError, RealizabilityError
from .instances import Instance
from .losses import LossFn, table_loss
from .transcript import offline_error

__all__ = [
    "Oracle",
    "ErmSquareOracle",
    "MleOracle",
    "ConsistentBinaryOracle",
    "BlockDelayOracle",
    "UnseenCovariateOracle",
    "ShiftedProperOracle",
    "CustomTableOracle",
    "custom_table_oracle_from_json",
    "project_to_proper",
    "verify_offline_guarantee",
]

_LOGLIK_FLOOR = 1e-12  # applied only inside likelihood comparison, never to outputs


class Oracle:
    """Base oracle: subclasses implement ``output``; instances are stateless."""

    kind = "abstract"

    def __init__(self, instance: Instance, beta_off: float = 0.0):
        if beta_off < 0:
            raise ValueError("beta_off must be nonnegative")
        self.instance = instance
        self.beta_off = float(beta_off)

    def output(self, t: int, xs: list[int], ys: list):
        raise NotImplementedError


class ErmSquareOracle(Oracle):
    """argmin_f sum_s (f(x_s) - y_s)^2, ties broken by lowest class index."""

    kind = "erm-square"

    def output(self, t, xs, ys):
        if not xs:
            return 0
        tables = self.instance.class_tables
        xs = np.asarray(xs, dtype=int)
        ys = np.asarray(ys, dtype=float)
        risks = ((tables[:, xs] - ys[None, :]) ** 2).sum(axis=1)
        return int(np.argmin(risks))


class MleOracle(Oracle):
    """argmax_f sum_s ln f(y_s | x_s), lowest-index tie-break.

    Densities are floored at 1e-12 inside the comparison to avoid -inf ties;
    if every candidate assigns zero likelihood the history is unsupportable
    and a degenerate-likelihood error is raised.
    """

    kind = "mle"

    def output(self, t, xs, ys):
        if not xs:
            return 0
        tables = self.instance.class_tables
        xs = np.asarray(xs, dtype=int)
        ys = np.asarray(ys, dtype=int)
        probs = tables[:, xs, ys]
        if np.all(probs.min(axis=1) <= 0.0):
            raise DegenerateLikelihoodError("all candidates assign zero likelihood")
        loglik = np.log(np.maximum(probs, _LOGLIK_FLOOR)).sum(axis=1)
        return int(np.argmax(loglik))


class ConsistentBinaryOracle(Oracle):
    """Lowest-index parameter consistent with every observed label."""

    kind = "consistent-binary"

    def output(self, t, xs, ys):
        if not xs:
            return 0
        tables = self.instance.class_tables
        xs = np.asarray(xs, dtype=int)
        ys = np.asarray(ys, dtype=float)
        consistent = np.all(tables[:, xs] == ys[None, :], axis=1)
        idx = np.flatnonzero(consistent)
        if idx.size == 0:
            raise RealizabilityError("no class member is consistent with the history")
        return int(idx[0])


class BlockDelayOracle(Oracle):
    """Reveals the target at a covariate only once it has been seen often.

    fhat^(t)(x) = 0 while the count of x among x^(1..t-1) is below the budget,
    and the target value afterwards.  On the block covariate sequence this
    oracle never exceeds its budget.
    """

    kind = "block-delay"

    def __init__(self, instance, beta_off, target: int):
        super().__init__(instance, beta_off)
        self.target = int(target)

    def output(self, t, xs, ys):
        counts = np.zeros(self.instance.n_covariates)
        for x in xs:
            counts[x] += 1
        star = self.instance.class_tables[self.target]
        return np.where(counts < self.beta_off, 0.0, star)


class UnseenCovariateOracle(Oracle):
    """Indicator of the covariates unseen before the current block, plus the target.

    Built for the indicator class f_i(x) = 1{x = i}; the output is improper in
    general.  Blocks have length floor(beta) + 1.
    """

    kind = "unseen-covariate"

    def __init__(self, instance, beta_off, target: int):
        super().__init__(instance, beta_off)
        self.target = int(target)
        self.block_len = int(math.floor(beta_off)) + 1

    def output(self, t, xs, ys):
        block = (t - 1) // self.block_len + 1  # tau_t = ceil(t / block_len)
        seen_before_block = set(xs[: (block - 1) * self.block_len])
        table = np.zeros(self.instance.n_covariates)
        for x in range(self.instance.n_covariates):
            if x not in seen_before_block or x == self.target:
                table[x] = 1.0
        return table


class ShiftedProperOracle(Oracle):
    """Proper oracle for the threshold class: fhat^(t) = f_{min(tau_t, N)}."""

    kind = "shifted-proper"

    def __init__(self, instance, beta_off):
        super().__init__(instance, beta_off)
        self.block_len = int(math.floor(beta_off)) + 1

    def output(self, t, xs, ys):
        tau = (t - 1) // self.block_len + 1
        return min(tau, self.instance.n_class) - 1  # class stored 0-based


class CustomTableOracle(Oracle):
    """Replays a fixed list of per-round value tables (loadable from JSON)."""

    kind = "custom-table"

    def __init__(self, instance, beta_off, tables):
        super().__init__(instance, beta_off)
        self.tables = [np.asarray(tab, dtype=float) for tab in tables]

    def output(self, t, xs, ys):
        if t - 1 >= len(self.tables):
            raise ValueError(f"custom oracle has no table for round {t}")
        return self.tables[t - 1]


def custom_table_oracle_from_json(instance: Instance, beta_off: float, text: str) -> CustomTableOracle:
    return CustomTableOracle(instance, beta_off, json.loads(text))


def project_to_proper(instance: Instance, fhat, weights, loss: LossFn | None = None) -> int:
    """Nearest class member to a possibly improper estimator.

    Returns argmin_f sum_x p(x) D(fhat(x), f(x)) with lowest-index tie-break.
    For convex metric-like losses the projection loses at most a factor
    2 * C_D against any target in the class.
    """
    loss = loss or instance.loss
    table = instance.table(fhat)
    p = np.asarray(weights, dtype=float)
    dists = table_loss(loss, instance.class_tables, table[None, ...]) @ p
    return int(np.argmin(dists))


def verify_offline_guarantee(instance: Instance, fhats, xs, f_star, beta_off: float,
                             loss: LossFn | None = None, tol: float = 1e-9) -> bool:
    """Check sum_{s<t} D(fhat^(t)(x_s), f_star(x_s)) <= beta for every round."""
    loss = loss or instance.loss
    for t, fhat in enumerate(fhats, start=1):
        if offline_error(instance, xs[: t - 1], fhat, f_star, loss) > beta_off + tol:
            return False
    return True
