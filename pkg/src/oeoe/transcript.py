"""Run transcripts and the exact error functionals computed from them.

``online_error`` is always the exact expectation over the stored
randomization distributions; nothing in this module samples.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .instances import Instance, instance_from_json, instance_to_json
from .losses import LossFn, table_loss

__all__ = [
    "Mixture",
    "StepRecord",
    "ExperimentLog",
    "offline_error",
    "online_error",
    "step_expected_loss",
]


@dataclass(frozen=True)
class Mixture:
    """A finite-support distribution over estimators.

    ``support`` entries are class indices (ints) or explicit value tables.
    Weights must sum to one; expectations over a Mixture are computed exactly.
    """

    support: list
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if len(self.support) != w.shape[0]:
            raise ValueError("support and weights differ in length")
        if np.any(w < -1e-12) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")

    @staticmethod
    def point(estimator) -> "Mixture":
        return Mixture([estimator], np.array([1.0]))

    @staticmethod
    def uniform(support: list) -> "Mixture":
        k = len(support)
        return Mixture(list(support), np.full(k, 1.0 / k))

    def sample(self, rng: np.random.Generator):
        idx = int(rng.choice(len(self.support), p=self.weights))
        return self.support[idx]

    def equals(self, other: "Mixture", instance: Instance) -> bool:
        if len(self.support) != len(other.support):
            return False
        if not np.array_equal(self.weights, other.weights):
            return False
        return all(
            np.array_equal(instance.table(a), instance.table(b))
            for a, b in zip(self.support, other.support)
        )


def step_expected_loss(instance: Instance, mixture: Mixture, x: int, f_star) -> float:
    """E_{f ~ mu}[D(f(x), f_star(x))], exact over the explicit support."""
    loss = instance.loss
    target = instance.table(f_star)[x]
    total = 0.0
    for est, w in zip(mixture.support, mixture.weights):
        if w == 0.0:
            continue
        val = instance.table(est)[x]
        total += float(w) * float(table_loss(loss, np.asarray(val)[None, ...],
                                             np.asarray(target)[None, ...])[0])
    return total


def offline_error(instance: Instance, history_xs, fhat, f_star, loss: LossFn | None = None) -> float:
    """sum_s D(fhat(x_s), f_star(x_s)) over the given covariate history."""
    loss = loss or instance.loss
    if len(history_xs) == 0:
        return 0.0
    a = instance.table(fhat)
    b = instance.table(f_star)
    xs = np.asarray(history_xs, dtype=int)
    return float(table_loss(loss, a[xs], b[xs]).sum())


@dataclass
class StepRecord:
    x: int
    y: float | int
    fhat: object           # class index or explicit table
    mixture: Mixture
    realized: object       # realized draw from the mixture
    step_loss: float       # exact expected loss of the mixture at x
    offline_budget_used: float  # prefix error of this round's oracle output


@dataclass
class ExperimentLog:
    """Full transcript of one protocol run."""

    instance: Instance
    horizon: int
    beta_off: float
    seed: int
    f_star_index: int
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def covariates(self) -> list[int]:
        return [s.x for s in self.steps]

    @property
    def outcomes(self) -> list:
        return [s.y for s in self.steps]

    @property
    def step_losses(self) -> np.ndarray:
        return np.array([s.step_loss for s in self.steps])

    def cumulative_online_error(self) -> np.ndarray:
        return np.cumsum(self.step_losses)

    def online_error(self) -> float:
        return float(self.step_losses.sum())

    # -- serialization ------------------------------------------------------

    def _estimator_doc(self, est):
        if isinstance(est, (int, np.integer)):
            return {"index": int(est)}
        return {"table": np.asarray(est, dtype=float).tolist()}

    @staticmethod
    def _estimator_from_doc(doc):
        if "index" in doc:
            return int(doc["index"])
        return np.asarray(doc["table"], dtype=float)

    def to_json(self) -> str:
        doc = {
            "instance": json.loads(instance_to_json(self.instance)),
            "horizon": self.horizon,
            "beta_off": self.beta_off,
            "seed": self.seed,
            "f_star_index": self.f_star_index,
            "steps": [
                {
                    "x": int(s.x),
                    "y": s.y if isinstance(s.y, int) else float(s.y),
                    "fhat": self._estimator_doc(s.fhat),
                    "support": [self._estimator_doc(e) for e in s.mixture.support],
                    "weights": s.mixture.weights.tolist(),
                    "realized": self._estimator_doc(s.realized),
                    "step_loss": s.step_loss,
                    "offline_budget_used": s.offline_budget_used,
                }
                for s in self.steps
            ],
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "ExperimentLog":
        doc = json.loads(text)
        instance = instance_from_json(json.dumps(doc["instance"]))
        log = ExperimentLog(
            instance=instance,
            horizon=int(doc["horizon"]),
            beta_off=float(doc["beta_off"]),
            seed=int(doc["seed"]),
            f_star_index=int(doc["f_star_index"]),
        )
        for s in doc["steps"]:
            y = s["y"]
            if instance.values != "real-interval":
                y = int(y)
            log.steps.append(
                StepRecord(
                    x=int(s["x"]),
                    y=y,
                    fhat=ExperimentLog._estimator_from_doc(s["fhat"]),
                    mixture=Mixture(
                        [ExperimentLog._estimator_from_doc(e) for e in s["support"]],
                        np.asarray(s["weights"], dtype=float),
                    ),
                    realized=ExperimentLog._estimator_from_doc(s["realized"]),
                    step_loss=float(s["step_loss"]),
                    offline_budget_used=float(s["offline_budget_used"]),
                )
            )
        return log

    def equals(self, other: "ExperimentLog") -> bool:
        if (self.horizon, self.beta_off, self.seed, self.f_star_index) != (
            other.horizon, other.beta_off, other.seed, other.f_star_index
        ):
            return False
        if len(self.steps) != len(other.steps):
            return False
        if not np.array_equal(self.instance.class_tables, other.instance.class_tables):
            return False
        for a, b in zip(self.steps, other.steps):
            if a.x != b.x or a.y != b.y:
                return False
            if a.step_loss != b.step_loss or a.offline_budget_used != b.offline_budget_used:
                return False
            if not np.array_equal(self.instance.table(a.fhat), other.instance.table(b.fhat)):
                return False
            if not a.mixture.equals(b.mixture, self.instance):
                return False
            if not np.array_equal(self.instance.table(a.realized), other.instance.table(b.realized)):
                return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,x,y,est_step,est_cum,offline_budget_used\n")
        cum = 0.0
        for t, s in enumerate(self.steps, start=1):
            cum += s.step_loss
            buf.write(f"{t},{s.x},{s.y!r},{s.step_loss!r},{cum!r},{s.offline_budget_used!r}\n")
        return buf.getvalue()


def online_error(log: ExperimentLog, loss: LossFn | None = None) -> float:
    """Exact Est_On: sum over rounds of the expected loss at the round's covariate.

    When ``loss`` is given, the expectation is recomputed from the raw
    transcript (support tables, weights, covariates) rather than read from the
    stored per-step values, so tests can cross-check the two paths.
    """
    if loss is None:
        return log.online_error()
    total = 0.0
    for s in log.steps:
        target = log.instance.class_tables[log.f_star_index]
        for est, w in zip(s.mixture.support, s.mixture.weights):
            tab = log.instance.table(est)
            total += float(w) * float(table_loss(loss, tab[s.x][None, ...],
                                                 target[s.x][None, ...])[0])
    return total
