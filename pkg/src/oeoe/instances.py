"""Estimation instances: covariates, outcomes, value spaces, kernels, classes.

An instance bundles a finite covariate set, an outcome space, a value space
tag, an outcome kernel, a finite ordered parameter class, and a loss.  All
parameters are stored as dense value tables indexed by covariate:

* binary / real-interval values: class table of shape (|F|, |X|)
* probability-vector values: class table of shape (|F|, |X|, |Y|)

Estimators produced by oracles and learners are either class indices (proper)
or explicit value tables of the per-parameter shape (improper).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .losses import LossFn, SQUARE, SQUARED_HELLINGER, ZERO_ONE, loss_fn

__all__ = [
    "OutcomeKernel",
    "Instance",
    "sample_outcome",
    "binary_instance",
    "full_cube_instance",
    "indicator_instance",
    "threshold_instance",
    "random_binary_instance",
    "square_instance",
    "cde_instance",
    "instance_to_json",
    "instance_from_json",
]


@dataclass(frozen=True)
class OutcomeKernel:
    """Maps a value z to a distribution over outcomes.

    ``dirac`` is used with binary values, ``gaussian`` (fixed sigma) with real
    values, and ``categorical`` (the identity map K(z) = z) with
    probability-vector values.
    """

    kind: str
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("dirac", "gaussian", "categorical"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise ValueError("gaussian kernel requires sigma > 0")


def sample_outcome(kernel: OutcomeKernel, z, rng: np.random.Generator):
    """Draw one outcome from K(z); deterministic given the generator state."""
    if kernel.kind == "dirac":
        return int(z)
    if kernel.kind == "gaussian":
        return float(z) + kernel.sigma * float(rng.standard_normal())
    if kernel.kind == "categorical":
        z = np.asarray(z, dtype=float)
        return int(rng.choice(len(z), p=z / z.sum()))
    raise ValueError(kernel.kind)


@dataclass(frozen=True)
class Instance:
    covariates: list[str]
    outcomes: list[str] | None  # None for real-line outcomes
    values: str                 # binary | real-interval | probability-vector
    kernel: OutcomeKernel
    class_tables: np.ndarray    # (|F|, |X|) or (|F|, |X|, |Y|)
    loss: LossFn
    name: str = "instance"

    def __post_init__(self):
        tables = np.asarray(self.class_tables, dtype=float)
        object.__setattr__(self, "class_tables", tables)
        if tables.shape[0] == 0:
            raise ValueError("parameter class must be nonempty")
        if tables.shape[1] != len(self.covariates):
            raise ValueError("class table does not cover the covariate set")
        if self.values == "binary":
            if tables.ndim != 2 or not np.all((tables == 0) | (tables == 1)):
                raise ValueError("binary values must be 0/1 tables")
            if self.kernel.kind != "dirac":
                raise ValueError("binary values require the dirac kernel")
        elif self.values == "real-interval":
            if tables.ndim != 2 or np.any(tables < 0) or np.any(tables > 1):
                raise ValueError("real-interval values must lie in [0, 1]")
            if self.kernel.kind != "gaussian":
                raise ValueError("real-interval values require the gaussian kernel")
        elif self.values == "probability-vector":
            if tables.ndim != 3:
                raise ValueError("probability-vector class must be 3-dimensional")
            if self.outcomes is not None and tables.shape[2] != len(self.outcomes):
                raise ValueError("value dimension does not match outcome alphabet")
            if np.any(tables < 0) or np.any(np.abs(tables.sum(axis=2) - 1.0) > 1e-9):
                raise ValueError("rows must be probability vectors (not renormalized)")
            if self.kernel.kind != "categorical":
                raise ValueError("probability-vector values require the categorical kernel")
        else:
            raise ValueError(f"unknown value kind {self.values!r}")
        flat = tables.reshape(tables.shape[0], -1)
        if len({tuple(row) for row in flat}) != tables.shape[0]:
            raise ValueError("parameter class contains duplicates under pointwise equality")

    @property
    def n_covariates(self) -> int:
        return len(self.covariates)

    @property
    def n_class(self) -> int:
        return self.class_tables.shape[0]

    @property
    def n_outcomes(self) -> int | None:
        return None if self.outcomes is None else len(self.outcomes)

    def table(self, estimator) -> np.ndarray:
        """Resolve a class index or explicit table to an explicit table."""
        if isinstance(estimator, (int, np.integer)):
            return self.class_tables[int(estimator)]
        return np.asarray(estimator, dtype=float)

    def value(self, estimator, x: int):
        return self.table(estimator)[x]


# --- builders -------------------------------------------------------------

def binary_instance(class_tables, name: str = "binary") -> Instance:
    tables = np.asarray(class_tables, dtype=float)
    n_x = tables.shape[1]
    return Instance(
        covariates=[f"x{i}" for i in range(n_x)],
        outcomes=["0", "1"],
        values="binary",
        kernel=OutcomeKernel("dirac"),
        class_tables=tables,
        loss=ZERO_ONE,
        name=name,
    )


def full_cube_instance(n: int) -> Instance:
    """All 2^n binary parameters on n covariates (log|F| = |X| = n)."""
    bits = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    return binary_instance(bits, name=f"cube{n}")


def indicator_instance(n: int) -> Instance:
    """f_i(x) = 1{x = i} for i in [n]; |F| = |X| = n."""
    return binary_instance(np.eye(n), name=f"indicator{n}")


def threshold_instance(n: int) -> Instance:
    """f_i(x_j) = 1{j >= i} with 1-based i, j; |F| = |X| = n."""
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, n + 1)[None, :]
    return binary_instance((j >= i).astype(float), name=f"threshold{n}")


def random_binary_instance(n_class: int, n_covariates: int, rng: np.random.Generator) -> Instance:
    """A duplicate-free random binary class of the requested size."""
    if n_class > 2 ** n_covariates:
        raise ValueError("class larger than the covariate cube")
    seen: set[tuple] = set()
    rows = []
    while len(rows) < n_class:
        row = rng.integers(0, 2, size=n_covariates)
        key = tuple(int(v) for v in row)
        if key not in seen:
            seen.add(key)
            rows.append(row.astype(float))
    return binary_instance(np.array(rows), name="random-binary")


def square_instance(n_class: int, n_covariates: int, rng: np.random.Generator,
                    sigma: float = 1.0) -> Instance:
    """Square-loss regression with values in [0, 1] and N(z, sigma^2) outcomes."""
    tables = rng.uniform(0.0, 1.0, size=(n_class, n_covariates))
    return Instance(
        covariates=[f"x{i}" for i in range(n_covariates)],
        outcomes=None,
        values="real-interval",
        kernel=OutcomeKernel("gaussian", sigma=sigma),
        class_tables=tables,
        loss=SQUARE,
        name="square",
    )


def cde_instance(n_class: int, n_covariates: int, n_outcomes: int,
                 rng: np.random.Generator, floor: float = 0.05) -> Instance:
    """Conditional densities with every coordinate in [floor, 1 - floor].

    The floor keeps the class ratio bound V finite and small, and makes
    log-likelihoods well defined on any history.
    """
    raw = rng.dirichlet(np.ones(n_outcomes), size=(n_class, n_covariates))
    tables = floor + (1.0 - n_outcomes * floor) * raw
    tables /= tables.sum(axis=2, keepdims=True)
    return Instance(
        covariates=[f"x{i}" for i in range(n_covariates)],
        outcomes=[f"y{i}" for i in range(n_outcomes)],
        values="probability-vector",
        kernel=OutcomeKernel("categorical"),
        class_tables=tables,
        loss=SQUARED_HELLINGER,
        name="cde",
    )


def ratio_bound(instance: Instance) -> float:
    """V = e  v  max_{f, f', x, y} f(y|x) / f'(y|x) for CDE instances."""
    if instance.values != "probability-vector":
        raise ValueError("ratio bound is defined for conditional-density instances")
    t = instance.class_tables
    hi = t.max(axis=0)
    lo = t.min(axis=0)
    if np.any(lo <= 0):
        raise ValueError("class densities must be bounded away from zero")
    return max(float(np.e), float((hi / lo).max()))


# --- JSON interface -------------------------------------------------------

def instance_to_json(instance: Instance) -> str:
    doc = {
        "name": instance.name,
        "covariates": instance.covariates,
        "outcomes": instance.outcomes,
        "values": instance.values,
        "kernel": {"kind": instance.kernel.kind, "sigma": instance.kernel.sigma},
        "class": instance.class_tables.tolist(),
        "loss": {"kind": instance.loss.kind, "triangle_constant": instance.loss.c_d},
    }
    return json.dumps(doc, indent=1)


def instance_from_json(text: str) -> Instance:
    doc = json.loads(text)
    kernel = OutcomeKernel(doc["kernel"]["kind"], float(doc["kernel"].get("sigma", 1.0)))
    loss = loss_fn(doc["loss"]["kind"], doc["loss"].get("triangle_constant"))
    return Instance(
        covariates=list(doc["covariates"]),
        outcomes=None if doc.get("outcomes") is None else list(doc["outcomes"]),
        values=doc["values"],
        kernel=kernel,
        class_tables=np.asarray(doc["class"], dtype=float),
        loss=loss,
        name=doc.get("name", "instance"),
    )
