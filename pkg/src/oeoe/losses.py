"""Loss functions on value spaces and the numeric lemmas used to test them.

Three value-level losses are implemented exactly:

* ``zero-one``          -- indicator disagreement on {0,1}, triangle constant 1
* ``square``            -- (z1 - z2)^2 on [0,1], triangle constant 2
* ``squared-hellinger`` -- (1/2) * sum_y (sqrt(p_y) - sqrt(q_y))^2 on probability
  vectors, triangle constant 2

``kl`` is provided for diagnostics (it is not symmetric and carries no
triangle constant).  The ``layerwise`` and ``cb-square`` kinds are model-level
divergences; they are declared here so configurations can name them, but their
evaluation lives in :mod:`oeoe.mdp` and :mod:`oeoe.dmso`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

__all__ = [
    "LossFn",
    "ZERO_ONE",
    "SQUARE",
    "SQUARED_HELLINGER",
    "KL",
    "eval_loss",
    "hellinger_sq",
    "kl_div",
    "table_loss",
    "class_loss",
    "potential_sum",
    "potential_lemma_holds",
    "chain_joint",
    "hellinger_subadditivity_sides",
    "hellinger_subadditivity_check",
]

_VALUE_KINDS = {
    "zero-one": "binary",
    "square": "real-interval",
    "squared-hellinger": "probability-vector",
    "kl": "probability-vector",
}

_TRIANGLE = {"zero-one": 1.0, "square": 2.0, "squared-hellinger": 2.0, "kl": 1.0,
             "layerwise": 2.0, "cb-square": 2.0}

_SYMMETRIC = {"zero-one", "square", "squared-hellinger"}


@dataclass(frozen=True)
class LossFn:
    """A named loss with its relaxed-triangle constant."""

    kind: str
    c_d: float

    @property
    def symmetric(self) -> bool:
        return self.kind in _SYMMETRIC

    @property
    def value_kind(self) -> str:
        try:
            return _VALUE_KINDS[self.kind]
        except KeyError:
            raise ValueError(f"loss kind {self.kind!r} has no value-level evaluation")

    def __call__(self, z1, z2) -> float:
        return eval_loss(self, z1, z2)


def loss_fn(kind: str, c_d: float | None = None) -> LossFn:
    if kind not in _TRIANGLE:
        raise ValueError(f"unknown loss kind {kind!r}")
    return LossFn(kind, _TRIANGLE[kind] if c_d is None else float(c_d))


ZERO_ONE = loss_fn("zero-one")
SQUARE = loss_fn("square")
SQUARED_HELLINGER = loss_fn("squared-hellinger")
KL = loss_fn("kl")


def hellinger_sq(p: np.ndarray, q: np.ndarray) -> float:
    """(1/2) * sum_y (sqrt(p_y) - sqrt(q_y))^2, exact on finite alphabets."""
    d = np.sqrt(np.asarray(p, dtype=float)) - np.sqrt(np.asarray(q, dtype=float))
    return 0.5 * float(np.dot(d, d))


def kl_div(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def _check_prob_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or np.any(z < -1e-12) or abs(float(z.sum()) - 1.0) > 1e-9:
        raise ValueError("value is not a probability vector")
    return z


def eval_loss(loss: LossFn, z1, z2) -> float:
    """Evaluate ``loss`` on a pair of values of the matching kind."""
    kind = loss.kind
    if kind == "zero-one":
        if z1 not in (0, 1) or z2 not in (0, 1):
            raise ValueError("zero-one loss expects binary values")
        return float(z1 != z2)
    if kind == "square":
        z1, z2 = float(z1), float(z2)
        if not (np.isscalar(z1) or np.ndim(z1) == 0):
            raise ValueError("square loss expects scalar values")
        return (z1 - z2) ** 2
    if kind == "squared-hellinger":
        p, q = _check_prob_vector(z1), _check_prob_vector(z2)
        if p.shape != q.shape:
            raise ValueError("mismatched outcome alphabets")
        return hellinger_sq(p, q)
    if kind == "kl":
        return kl_div(_check_prob_vector(z1), _check_prob_vector(z2))
    raise ValueError(f"loss kind {kind!r} has no value-level evaluation")


def table_loss(loss: LossFn, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-covariate losses between two estimator tables (no validation)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    kind = loss.kind
    if kind == "zero-one":
        return (a != b).astype(float)
    if kind == "square":
        return (a - b) ** 2
    if kind == "squared-hellinger":
        d = np.sqrt(a) - np.sqrt(b)
        return 0.5 * np.sum(d * d, axis=-1)
    raise ValueError(f"loss kind {kind!r} has no table evaluation")


def class_loss(loss: LossFn, table: np.ndarray, class_tables: np.ndarray) -> np.ndarray:
    """Losses between one table and a stacked class, shape (|F|, |X|)."""
    return table_loss(loss, class_tables, table[None, ...])


def potential_sum(xs) -> float:
    """sum_t (x_t - x_{t+1}) / x_t for a sequence x_1, ..., x_{T+1}."""
    xs = np.asarray(xs, dtype=float)
    return float(np.sum((xs[:-1] - xs[1:]) / xs[:-1]))


def potential_lemma_holds(xs, tol: float = 1e-12) -> bool:
    """True iff the potential sum is at most ln(x_1).

    ``xs`` must be nonincreasing with every entry >= 1; the inequality is
    exact for such sequences and this helper is fuzz-checked in tests.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 1.0) or np.any(np.diff(xs) > 0):
        raise ValueError("sequence must be nonincreasing with entries >= 1")
    return potential_sum(xs) <= np.log(xs[0]) + tol


def chain_joint(kernels: list[np.ndarray]) -> np.ndarray:
    """Joint law of a chain of conditional kernels over finite alphabets.

    ``kernels[i]`` has shape (n_1, ..., n_{i-1}, n_i): the law of X_i given the
    prefix x_{1:i-1}.  Returns the full joint with shape (n_1, ..., n_n).
    """
    joint = np.asarray(kernels[0], dtype=float)
    for k in kernels[1:]:
        joint = joint[..., None] * np.asarray(k, dtype=float)
    return joint


def hellinger_subadditivity_sides(p_kernels, q_kernels) -> tuple[float, float]:
    """Both sides of the chain-rule inequality, computed by enumeration.

    Returns ``(lhs, rhs)`` with ``lhs`` the squared Hellinger distance between
    the two joint laws and ``rhs`` equal to 7 times the expected (under the
    first law) sum of per-step conditional squared Hellinger distances.
    """
    if len(p_kernels) != len(q_kernels):
        raise ValueError("chains must have equal length")
    lhs = hellinger_sq(chain_joint(p_kernels).ravel(), chain_joint(q_kernels).ravel())
    total = 0.0
    prefix_law = np.ones(())  # joint over x_{1:i-1}
    for pk, qk in zip(p_kernels, q_kernels):
        pk = np.asarray(pk, dtype=float)
        qk = np.asarray(qk, dtype=float)
        prefix_shape = pk.shape[:-1]
        for idx in product(*(range(n) for n in prefix_shape)):
            w = float(prefix_law[idx]) if prefix_shape else 1.0
            total += w * hellinger_sq(pk[idx], qk[idx])
        prefix_law = prefix_law[..., None] * pk if prefix_shape else pk
    return lhs, 7.0 * total


def hellinger_subadditivity_check(p_kernels, q_kernels, tol: float = 1e-12) -> bool:
    """True iff D_H^2(P, Q) <= 7 E_P[sum_i D_H^2(P_i, Q_i)] on these chains."""
    lhs, rhs = hellinger_subadditivity_sides(p_kernels, q_kernels)
    return lhs <= rhs + tol
