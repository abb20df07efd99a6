"""Oracle-efficient online learners.

All learners share one interface: ``step(t, fhat)`` receives the round-t
oracle output and returns the randomization distribution for the round, and
``observe(x)`` reveals the round's covariate afterwards.  Outcomes are never
an input anywhere in this module; the learner contract makes leaking them
impossible by shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleViolationError, UnsupportedInstanceError
from .instances import Instance
from .losses import class_loss, table_loss
from .transcript import Mixture

__all__ = [
    "eta_for_factor",
    "ETA_FACTOR_TWO",
    "VersionSpaceState",
    "VersionSpaceLearner",
    "IdentityLearner",
    "ExpWeights",
    "DelayedRoundRobin",
    "DelayedReductionLearner",
    "tune_delay",
]


def eta_for_factor(gamma: float, tol: float = 1e-12) -> float:
    """Positive root of eta / (1 - exp(-eta)) = gamma, by bisection.

    With this rate the multiplicative-weights bound reads
    sum_t E[l_t] <= gamma * min_f sum_t l_t(f) + ln|F| / (1 - exp(-eta)).
    """
    if gamma <= 1:
        raise ValueError("factor must exceed 1")
    lo, hi = tol, 1.0
    g = lambda eta: eta / (1.0 - math.exp(-eta))
    while g(hi) < gamma:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < gamma:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


ETA_FACTOR_TWO = eta_for_factor(2.0)  # ~1.5936, makes the factor exactly 2


# --- version space averaging ------------------------------------------------

@dataclass
class VersionSpaceState:
    survivors: np.ndarray           # boolean mask over the class, monotone shrinking
    covariate_counts: np.ndarray    # multiset of past covariates
    covariates: list[int] = field(default_factory=list)
    fhat_tables: list[np.ndarray] = field(default_factory=list)

    def surviving_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.survivors)]


class VersionSpaceLearner:
    """Keeps the class members consistent with every oracle output so far.

    Round t shrinks the surviving set by the single new constraint
    sum_{s<t} D(fhat^(t)(x_s), f(x_s)) <= threshold_multiplier * beta; older
    constraints are fixed once created, so the per-round cost is one
    covariate-count weighted loss row per surviving parameter.  Prediction is
    uniform over the survivors, or their pointwise average when the value
    space is convex and ``averaged`` is set.
    """

    def __init__(self, instance: Instance, beta_off: float,
                 threshold_multiplier: float = 1.0, averaged: bool = False):
        self.instance = instance
        self.threshold = threshold_multiplier * beta_off
        self.averaged = averaged
        if averaged and instance.values == "binary":
            raise UnsupportedInstanceError("averaged prediction needs a convex value space")
        self.state = VersionSpaceState(
            survivors=np.ones(instance.n_class, dtype=bool),
            covariate_counts=np.zeros(instance.n_covariates),
        )

    def step(self, t: int, fhat) -> Mixture:
        st = self.state
        table = self.instance.table(fhat)
        st.fhat_tables.append(table)
        mask = st.survivors
        if np.any(mask):
            # new constraint s = t on the survivors only
            rows = class_loss(self.instance.loss, table,
                              self.instance.class_tables[mask])
            cost = rows @ st.covariate_counts
            new_mask = mask.copy()
            new_mask[np.flatnonzero(mask)[cost > self.threshold + 1e-12]] = False
            st.survivors = new_mask
        if not np.any(st.survivors):
            raise OracleViolationError(
                "version space is empty; the oracle violated its budget", round_index=t
            )
        idx = st.surviving_indices()
        if self.averaged:
            return Mixture.point(self.instance.class_tables[st.survivors].mean(axis=0))
        return Mixture.uniform(idx)

    def observe(self, x: int) -> None:
        self.state.covariates.append(int(x))
        self.state.covariate_counts[x] += 1


class IdentityLearner:
    """The memoryless learner that returns the oracle output as-is."""

    def __init__(self, instance: Instance):
        self.instance = instance

    def step(self, t: int, fhat) -> Mixture:
        return Mixture.point(fhat)

    def observe(self, x: int) -> None:
        pass


# --- exponential weights and delayed reductions ------------------------------

class ExpWeights:
    """Multiplicative weights over a finite class with losses in [0, 1]."""

    def __init__(self, n: int, eta: float = ETA_FACTOR_TWO):
        self.eta = eta
        self.log_w = np.zeros(n)

    def distribution(self) -> np.ndarray:
        w = np.exp(self.log_w - self.log_w.max())
        return w / w.sum()

    def update(self, losses: np.ndarray) -> None:
        losses = np.asarray(losses, dtype=float)
        if losses.min() < -1e-12 or losses.max() > 1.0 + 1e-12:
            raise ValueError("exponential weights requires losses in [0, 1]")
        self.log_w -= self.eta * losses


class DelayedRoundRobin:
    """Delayed online learning via N independent copies of a base learner.

    Copy i (= t mod N) predicts at round t and later consumes the loss of
    round t, so each copy faces a standard non-delayed problem on its own
    subsequence.  Before any feedback arrives the copies predict from their
    uniform prior.
    """

    def __init__(self, n_class: int, delay: int, eta: float = ETA_FACTOR_TWO):
        if delay < 1:
            raise ValueError("delay must be a positive integer")
        self.delay = delay
        self.copies = [ExpWeights(n_class, eta) for _ in range(delay)]

    def copy_for_round(self, t: int) -> ExpWeights:
        return self.copies[(t - 1) % self.delay]

    def feed(self, round_index: int, losses: np.ndarray) -> None:
        """Deliver the loss of ``round_index`` (arriving at round_index + N)."""
        self.copy_for_round(round_index).update(losses)

    def distribution(self, t: int) -> np.ndarray:
        return self.copy_for_round(t).distribution()


class DelayedReductionLearner:
    """Oracle-efficient learner via averaging and delayed online learning.

    At round t > N the learner forms the running average (or majority vote,
    for binary values) of the last N oracle outputs, scores every class
    member against it at the covariate from round t - N, and feeds that loss
    vector to a delayed exponential-weights learner whose distribution is the
    round's prediction.
    """

    def __init__(self, instance: Instance, delay: int, mode: str = "average",
                 eta: float = ETA_FACTOR_TWO):
        if mode not in ("average", "majority"):
            raise ValueError("mode must be 'average' or 'majority'")
        if mode == "average" and instance.values == "binary":
            raise UnsupportedInstanceError(
                "averaging needs a convex value space; use the majority variant"
            )
        if mode == "majority" and instance.values != "binary":
            raise ValueError("majority vote is defined for binary instances")
        self.instance = instance
        self.delay = int(delay)
        self.mode = mode
        self.base = DelayedRoundRobin(instance.n_class, self.delay, eta)
        self.fhat_tables: list[np.ndarray] = []
        self.covariates: list[int] = []
        self.reference_tables: list[np.ndarray] = []   # ftilde^(1..t-N)
        self.loss_rows: list[np.ndarray] = []          # l^(1..t-N) over the class

    def _combine(self, tables: np.ndarray) -> np.ndarray:
        if self.mode == "average":
            return tables.mean(axis=0)
        votes_one = tables.sum(axis=0)
        return (votes_one >= (tables.shape[0] - votes_one)).astype(float)  # ties -> 1

    def step(self, t: int, fhat) -> Mixture:
        self.fhat_tables.append(self.instance.table(fhat))
        if t > self.delay:
            s = t - self.delay  # the round whose feedback just became computable
            ref = self._combine(np.stack(self.fhat_tables[s - 1 : t]))
            self.reference_tables.append(ref)
            x = self.covariates[s - 1]
            losses = table_loss(self.instance.loss,
                                self.instance.class_tables[:, x, ...], ref[x])
            self.loss_rows.append(losses)
            self.base.feed(s, losses)
        probs = self.base.distribution(t)
        return Mixture(list(range(self.instance.n_class)), probs)

    def observe(self, x: int) -> None:
        self.covariates.append(int(x))

    # -- post-run accounting --------------------------------------------------

    def padded_reference_tables(self, horizon: int) -> list[np.ndarray]:
        """ftilde^(1..T) with the oracle sequence padded by its last output."""
        fh = list(self.fhat_tables)
        if len(fh) < horizon:
            raise ValueError("run incomplete")
        fh = fh + [fh[horizon - 1]] * self.delay
        return [self._combine(np.stack(fh[t : t + self.delay])) for t in range(horizon)]

    def full_loss_matrix(self, horizon: int) -> np.ndarray:
        """(T, |F|) matrix of l^(t)(f) including the padded trailing rounds."""
        refs = self.padded_reference_tables(horizon)
        rows = []
        for t in range(horizon):
            x = self.covariates[t]
            rows.append(table_loss(self.instance.loss,
                                   self.instance.class_tables[:, x, ...], refs[t][x]))
        return np.array(rows)


def tune_delay(beta_off: float, horizon: int, c_d: float, log_class_size: float,
               beta_free: bool = False) -> int:
    """Delay that balances averaging bias against delayed-learning regret.

    N = sqrt(C_D * beta * T / (C_D + ln|F|)), rounded to nearest and clamped
    at 1; with ``beta_free`` the budget-independent variant
    sqrt(C_D * T / (C_D + ln|F|)) is used instead.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    num = c_d * horizon if beta_free else c_d * beta_off * horizon
    raw = math.sqrt(num / (c_d + log_class_size)) if num > 0 else 0.0
    return max(1, int(math.floor(raw + 0.5)))
