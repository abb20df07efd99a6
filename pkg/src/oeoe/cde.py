"""Conditional-density estimation reduction stack.

Turns an unrestricted online conditional-density estimator into an
oracle-efficient one in four layers:

* reference-sampled outcomes: feed outcomes drawn from a reference density
  into the base algorithm verbatim,
* revealed reference parameters: simulate the outcome feedback by drawing L
  independent fictitious histories from the revealed references and predict
  uniformly over the L resulting estimators,
* delayed reference parameters: run N independent copies of the previous
  layer round-robin so each copy sees an undelayed subsequence,
* oracle outputs: maintain the running N-average of offline-oracle outputs as
  the (delayed) reference parameter.

The drift of the averaged reference from the target satisfies
sum_t D_H^2(ftilde^(t)(x^(t)), f_star(x^(t))) <= N + beta * T / N on every
transcript, which is what makes the fictitious outcomes faithful.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adversaries import Adversary, FixedSequenceAdversary, IidAdversary
from .instances import Instance, ratio_bound
from .losses import hellinger_sq, table_loss
from .oracles import Oracle
from .rng import substream
from .transcript import Mixture

__all__ = [
    "MixtureDensityBase",
    "run_reference_sampled",
    "reference_sampled_error_bound",
    "CdewrpLearner",
    "CdewdrpLearner",
    "OeoeCdeStack",
    "CdeRunResult",
    "run_cde_stack",
    "replay_count",
    "tune_stack_delay",
    "reference_drift",
    "measured_offline_budget",
]


class MixtureDensityBase:
    """Unrestricted online CDE learner: multiplicative weights on log-loss.

    The prediction after a history is the posterior mixture of the class
    densities, which satisfies the high-probability online estimation
    guarantee with rate parameter R(T) = ln|F| and failure-probability
    constant 1 (both declared, not inferred).
    """

    def __init__(self, instance: Instance):
        if instance.values != "probability-vector":
            raise ValueError("the mixture base runs on conditional-density instances")
        self.instance = instance
        self.log_tables = np.log(instance.class_tables)  # class bounded away from 0
        self.c_f = 1.0
        self.r_cde = math.log(instance.n_class)

    def posterior(self, xs, ys) -> np.ndarray:
        """Posterior weights over the class after the given history."""
        lw = np.zeros(self.instance.n_class)
        for x, y in zip(xs, ys):
            lw += self.log_tables[:, int(x), int(y)]
        w = np.exp(lw - lw.max())
        return w / w.sum()

    def predict(self, xs, ys) -> np.ndarray:
        """Posterior-mixture density table, shape (|X|, |Y|); improper."""
        post = self.posterior(xs, ys)
        return np.tensordot(post, self.instance.class_tables, axes=(0, 0))

    def batch_posteriors(self, xs, outcome_matrix: np.ndarray) -> np.ndarray:
        """Posteriors for many fictitious histories sharing the covariates.

        ``outcome_matrix`` has shape (L, m): row i is replay i's outcomes at
        the m history covariates ``xs``.  Returns (L, |F|) posterior rows.
        """
        n_replays = outcome_matrix.shape[0]
        lw = np.zeros((n_replays, self.instance.n_class))
        for j, x in enumerate(xs):
            lw += self.log_tables[:, int(x), :][:, outcome_matrix[:, j]].T
        lw -= lw.max(axis=1, keepdims=True)
        w = np.exp(lw)
        return w / w.sum(axis=1, keepdims=True)


def run_reference_sampled(base: MixtureDensityBase, covariates, reference_tables,
                          f_star_index: int, rng: np.random.Generator) -> float:
    """Feed reference-sampled outcomes to the base and return its exact error.

    This is the innermost reduction: outcomes come from the round's reference
    density rather than the target, and the base consumes them verbatim.  The
    return value is sum_t D_H^2(prediction^(t)(x^(t)), f_star(x^(t))).
    """
    inst = base.instance
    star = inst.class_tables[f_star_index]
    xs: list[int] = []
    ys: list[int] = []
    total = 0.0
    for x, ref in zip(covariates, reference_tables):
        pred = base.predict(xs, ys)
        total += hellinger_sq(pred[x], star[x])
        y = int(rng.choice(inst.n_outcomes, p=np.asarray(ref)[x]))
        xs.append(int(x))
        ys.append(y)
    return total


def reference_sampled_error_bound(base: MixtureDensityBase, zeta: float,
                                  horizon: int, log_v: float) -> float:
    """3 C_F ln(V) zeta + R(T) + 2 C_F ln(C_F T), the tracked guarantee."""
    return 3.0 * base.c_f * log_v * zeta + base.r_cde \
        + 2.0 * base.c_f * math.log(max(base.c_f * horizon, math.e))


def replay_count(local_horizon: int, n_class: int, n_covariates: int,
                 eps: float, cap: int | None = None) -> int:
    """L = ceil(8 T ln(T |F| |X|) / eps), optionally capped for smoke runs."""
    if eps <= 0:
        raise ValueError("accuracy parameter must be positive")
    raw = math.ceil(8.0 * local_horizon
                    * math.log(max(local_horizon * n_class * n_covariates, 2)) / eps)
    count = max(1, int(raw))
    return count if cap is None else min(count, int(cap))


class CdewrpLearner:
    """Predicts from revealed reference parameters via L fictitious replays.

    At each local round the learner redraws, for every replay and every past
    round, an outcome from that round's revealed reference density at the real
    covariate, runs the reference-sampled learner on each fictitious history,
    and predicts uniformly over the L resulting estimators.
    """

    def __init__(self, base: MixtureDensityBase, n_replays: int):
        if n_replays < 1:
            raise ValueError("replay count must be at least 1")
        self.base = base
        self.n_replays = n_replays
        self.xs: list[int] = []
        self.ref_rows: list[np.ndarray] = []  # reference density at the round's covariate

    def reveal(self, x: int, reference_table: np.ndarray) -> None:
        self.xs.append(int(x))
        self.ref_rows.append(np.asarray(reference_table)[int(x)])

    def predict_posteriors(self, rng: np.random.Generator) -> np.ndarray:
        """(L, |F|) posterior rows, one per fictitious replay."""
        m = len(self.xs)
        n_y = self.base.instance.n_outcomes
        if m == 0:
            return np.full((self.n_replays, self.base.instance.n_class),
                           1.0 / self.base.instance.n_class)
        outcomes = np.empty((self.n_replays, m), dtype=np.int64)
        for j, row in enumerate(self.ref_rows):
            outcomes[:, j] = rng.choice(n_y, size=self.n_replays, p=row)
        return self.base.batch_posteriors(self.xs, outcomes)


class CdewdrpLearner:
    """Round-robin wrapper tolerating an N-round delay on reference reveals."""

    def __init__(self, base_factory, delay: int):
        if delay < 1:
            raise ValueError("delay must be a positive integer")
        self.delay = delay
        self.copies = [base_factory() for _ in range(delay)]

    def copy_for_round(self, t: int) -> CdewrpLearner:
        return self.copies[(t - 1) % self.delay]

    def reveal(self, round_index: int, x: int, reference_table) -> None:
        self.copy_for_round(round_index).reveal(x, reference_table)

    def predict_posteriors(self, t: int, rng: np.random.Generator) -> np.ndarray:
        return self.copy_for_round(t).predict_posteriors(rng)


class OeoeCdeStack:
    """Oracle-efficient conditional-density learner (full four-layer stack).

    Implements the standard learner interface; ``step`` returns the posterior
    rows compactly and, when ``materialize`` is set, a Mixture whose support
    is the L explicit density tables.
    """

    def __init__(self, instance: Instance, delay: int, n_replays: int, seed: int,
                 materialize: bool = False):
        self.instance = instance
        self.delay = int(delay)
        self.n_replays = int(n_replays)
        self.seed = seed
        self.materialize = materialize
        base = MixtureDensityBase(instance)
        self.base = base
        self.inner = CdewdrpLearner(
            lambda: CdewrpLearner(MixtureDensityBase(instance), self.n_replays),
            self.delay,
        )
        self.fhat_tables: list[np.ndarray] = []
        self.covariates: list[int] = []
        self.reference_tables: list[np.ndarray] = []
        self.posterior_rows: list[np.ndarray] = []

    def _reference(self, start: int, stop: int) -> np.ndarray:
        return np.stack(self.fhat_tables[start:stop]).mean(axis=0)

    def step(self, t: int, fhat) -> Mixture:
        self.fhat_tables.append(self.instance.table(fhat))
        if t > self.delay:
            s = t - self.delay
            ref = self._reference(s - 1, t)
            self.reference_tables.append(ref)
            self.inner.reveal(s, self.covariates[s - 1], ref)
        # replay randomness is a pure function of (seed, t); replay i owns row i
        posts = self.inner.predict_posteriors(t, substream(self.seed, "replay", t))
        self.posterior_rows.append(posts)
        if not self.materialize:
            return None  # compact mode: the stack runner reads posterior_rows
        tables = np.tensordot(posts, self.instance.class_tables, axes=(1, 0))
        return Mixture.uniform(list(tables))

    def observe(self, x: int) -> None:
        self.covariates.append(int(x))

    def expected_step_loss(self, t: int, x: int, f_star_index: int) -> float:
        """Exact mean over the L replays of D_H^2(mixture(x), f_star(x))."""
        posts = self.posterior_rows[t - 1]
        preds = posts @ self.instance.class_tables[:, x, :]     # (L, |Y|)
        star = self.instance.class_tables[f_star_index, x, :]
        d = np.sqrt(preds) - np.sqrt(star)[None, :]
        return float(np.mean(0.5 * np.sum(d * d, axis=1)))

    def padded_reference_tables(self, horizon: int) -> list[np.ndarray]:
        fh = self.fhat_tables[:horizon] + [self.fhat_tables[horizon - 1]] * self.delay
        return [np.stack(fh[t : t + self.delay]).mean(axis=0) for t in range(horizon)]


def tune_stack_delay(c_f: float, beta_off: float, horizon: int, log_v: float,
                     r_cde: float) -> int:
    """N = sqrt(C_F beta T ln V / (R(T) + C_F ln(V C_F T))), rounded, clamped at 1."""
    denom = r_cde + c_f * (log_v + math.log(max(c_f * horizon, 1.0)))
    num = c_f * beta_off * horizon * log_v
    if denom <= 0 or num <= 0:
        return 1
    return max(1, int(math.floor(math.sqrt(num / denom) + 0.5)))


def reference_drift(instance: Instance, reference_tables, covariates,
                    f_star_index: int) -> np.ndarray:
    """Per-round D_H^2(ftilde^(t)(x^(t)), f_star(x^(t))) as an array."""
    star = instance.class_tables[f_star_index]
    return np.array([
        hellinger_sq(ref[x], star[x])
        for ref, x in zip(reference_tables, covariates)
    ])


def measured_offline_budget(instance: Instance, fhat_tables, covariates,
                            f_star_index: int) -> float:
    """max_t sum_{s<t} D(fhat^(t)(x_s), f_star(x_s)) realized on a transcript."""
    star = instance.class_tables[f_star_index]
    worst = 0.0
    for t, table in enumerate(fhat_tables):
        if t == 0:
            continue
        idx = np.asarray(covariates[:t], dtype=int)
        err = float(table_loss(instance.loss, np.asarray(table)[idx], star[idx]).sum())
        worst = max(worst, err)
    return worst


@dataclass
class CdeRunResult:
    horizon: int
    delay: int
    n_replays: int
    step_losses: np.ndarray
    covariates: list[int]
    fhat_indices: list[int]
    drift_per_round: np.ndarray
    measured_beta: float

    @property
    def online_error(self) -> float:
        return float(self.step_losses.sum())

    def drift_bound(self) -> float:
        return self.delay + self.measured_beta * self.horizon / self.delay


def run_cde_stack(instance: Instance, oracle: Oracle, horizon: int, seed: int,
                  f_star_index: int, delay: int, n_replays: int,
                  adversary: Adversary | None = None) -> CdeRunResult:
    """Protocol run specialized to the stack (supports tracked compactly).

    The inner reference-sampled layer requires oblivious covariates; adaptive
    adversaries are allowed but flagged with a warning.
    """
    if adversary is None:
        adversary = IidAdversary(instance.n_covariates, substream(seed, "adversary"))
    elif not isinstance(adversary, (IidAdversary, FixedSequenceAdversary)):
        warnings.warn("the replay layer assumes oblivious covariates; "
                      "an adaptive adversary voids its guarantee", stacklevel=2)
    stack = OeoeCdeStack(instance, delay, n_replays, seed)
    kernel_rng = substream(seed, "kernel")
    star = instance.class_tables[f_star_index]
    xs: list[int] = []
    ys: list[int] = []
    fhat_indices: list[int] = []
    step_losses = np.zeros(horizon)
    for t in range(1, horizon + 1):
        fhat = oracle.output(t, xs, ys)
        fhat_indices.append(int(fhat) if isinstance(fhat, (int, np.integer)) else -1)
        stack.step(t, fhat)
        x = adversary.select(t, None, None)
        step_losses[t - 1] = stack.expected_step_loss(t, x, f_star_index)
        y = int(kernel_rng.choice(instance.n_outcomes, p=star[x]))
        stack.observe(x)
        xs.append(x)
        ys.append(y)
    refs = stack.padded_reference_tables(horizon)
    drift = reference_drift(instance, refs, xs, f_star_index)
    beta = measured_offline_budget(instance, stack.fhat_tables, xs, f_star_index)
    return CdeRunResult(horizon=horizon, delay=delay, n_replays=n_replays,
                        step_losses=step_losses, covariates=xs,
                        fhat_indices=fhat_indices, drift_per_round=drift,
                        measured_beta=beta)
