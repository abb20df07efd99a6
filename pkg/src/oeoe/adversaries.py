"""Covariate-selection adversaries for the protocol runner.

An adversary picks each round's covariate after seeing the learner's
randomization distribution (the default, strongest mode) or only the realized
draw (ablation mode).  Constructions from lower-bound proofs (block and
shifting sequences) are available alongside generic fixed / iid / adaptive
rules.
"""

from __future__ import annotations

import math

import numpy as np

from .instances import Instance
from .transcript import Mixture, step_expected_loss

__all__ = [
    "FixedSequenceAdversary",
    "BlockAdversary",
    "ShiftingAdversary",
    "IidAdversary",
    "WorstOfKAdversary",
]


class Adversary:
    sees_realized = False

    def select(self, t: int, mixture: Mixture, realized) -> int:
        raise NotImplementedError


class FixedSequenceAdversary(Adversary):
    def __init__(self, xs):
        self.xs = [int(x) for x in xs]

    def select(self, t, mixture, realized):
        return self.xs[t - 1]


class BlockAdversary(Adversary):
    """x^(t) = x_{min(ceil(t / ceil(beta)), N)}: each covariate repeated ceil(beta) times."""

    def __init__(self, beta_off: float, n_blocks: int):
        self.reps = max(1, math.ceil(beta_off))
        self.n_blocks = n_blocks

    def select(self, t, mixture, realized):
        return min(math.ceil(t / self.reps), self.n_blocks) - 1


class ShiftingAdversary(Adversary):
    """x^(t) = x_{min(tau_t, N)} with blocks of length floor(beta) + 1."""

    def __init__(self, beta_off: float, n_blocks: int):
        self.block_len = int(math.floor(beta_off)) + 1
        self.n_blocks = n_blocks

    def select(self, t, mixture, realized):
        tau = (t - 1) // self.block_len + 1
        return min(tau, self.n_blocks) - 1


class IidAdversary(Adversary):
    def __init__(self, n_covariates: int, rng: np.random.Generator, probs=None):
        self.n = n_covariates
        self.rng = rng
        self.probs = None if probs is None else np.asarray(probs, dtype=float)

    def select(self, t, mixture, realized):
        return int(self.rng.choice(self.n, p=self.probs))


class WorstOfKAdversary(Adversary):
    """Picks the candidate covariate with the largest expected instantaneous loss.

    Candidates are K covariates drawn per round without replacement (K = |X|
    scans the whole space).  In realized mode the adversary scores the single
    drawn estimator instead of the published distribution.
    """

    def __init__(self, instance: Instance, f_star_index: int, k: int,
                 rng: np.random.Generator, use_realized: bool = False):
        self.instance = instance
        self.f_star = f_star_index
        self.k = min(k, instance.n_covariates)
        self.rng = rng
        self.sees_realized = use_realized

    def select(self, t, mixture, realized):
        if self.k == self.instance.n_covariates:
            candidates = np.arange(self.k)
        else:
            candidates = self.rng.choice(self.instance.n_covariates, size=self.k,
                                         replace=False)
        target = mixture if not self.sees_realized else Mixture.point(realized)
        scores = [step_expected_loss(self.instance, target, int(x), self.f_star)
                  for x in candidates]
        return int(candidates[int(np.argmax(scores))])
