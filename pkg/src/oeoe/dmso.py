"""Decision making with a finite model class driven by offline oracles.

Provides the minimax decision-estimation game and its solver, inverse-gap
weighting for bandit-style classes, the meta-algorithm that converts offline
oracle outputs into decision distributions, and the tight lower-bound
construction for offline-to-online conversion in contextual bandits.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceFailure
from .instances import Instance
from .losses import hellinger_sq
from .oracles import Oracle
from .rng import substream

__all__ = [
    "CbClass",
    "all_deterministic_policies",
    "DecSolution",
    "solve_matrix_game",
    "dec_value",
    "igw_distribution",
    "DmsoVersionSpace",
    "MleDmsoOracle",
    "DecisionLog",
    "run_e2d",
    "regret",
    "CbLowerBound",
    "cb_lower_bound_instance",
]


def all_deterministic_policies(n_contexts: int, n_actions: int) -> np.ndarray:
    """All |A|^|S| deterministic context-to-action maps, rows ordered lexicographically."""
    grids = np.meshgrid(*[np.arange(n_actions)] * n_contexts, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class CbClass:
    """Finite contextual-bandit model class with exact finite distributions.

    Rewards live on a finite grid in [0, 1]; each model gives a reward law per
    (context, action).  Decisions are deterministic policies; an observation
    is the (context, action, reward-index) triple.
    """

    context_dist: np.ndarray        # (S,)
    reward_grid: np.ndarray         # (R,) subset of [0, 1]
    reward_laws: np.ndarray         # (M, S, A, R), rows sum to 1
    policies: np.ndarray            # (Pi, S) integer actions
    name: str = "cb"

    def __post_init__(self):
        self.context_dist = np.asarray(self.context_dist, dtype=float)
        self.reward_grid = np.asarray(self.reward_grid, dtype=float)
        self.reward_laws = np.asarray(self.reward_laws, dtype=float)
        self.policies = np.asarray(self.policies, dtype=int)
        if np.any(self.reward_grid < 0) or np.any(self.reward_grid > 1):
            raise ValueError("reward grid must lie in [0, 1]")
        if np.any(np.abs(self.reward_laws.sum(axis=3) - 1.0) > 1e-9):
            raise ValueError("reward laws must be probability vectors")
        if abs(self.context_dist.sum() - 1.0) > 1e-9:
            raise ValueError("context distribution must sum to 1")

    @property
    def n_models(self) -> int:
        return self.reward_laws.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.reward_laws.shape[1]

    @property
    def n_actions(self) -> int:
        return self.reward_laws.shape[2]

    @property
    def n_policies(self) -> int:
        return self.policies.shape[0]

    def mean_rewards(self) -> np.ndarray:
        """g[m, s, a] = E[r] under model m, exact."""
        return self.reward_laws @ self.reward_grid

    def policy_values(self) -> np.ndarray:
        """G[m, pi] = E_{s}[g(s, pi(s))], exact."""
        g = self.mean_rewards()
        vals = np.empty((self.n_models, self.n_policies))
        for k, pol in enumerate(self.policies):
            vals[:, k] = (g[:, np.arange(self.n_contexts), pol] * self.context_dist).sum(axis=1)
        return vals

    def divergence_tensor(self, kind: str = "cb-square") -> np.ndarray:
        """div[i, j, pi] = D(M_i(pi), M_j(pi)) for all model pairs and policies.

        ``cb-square`` is the expected squared gap between mean rewards at the
        played action; ``squared-hellinger`` is on the joint (s, a, r) law.
        """
        n_m, n_pi = self.n_models, self.n_policies
        out = np.empty((n_m, n_m, n_pi))
        g = self.mean_rewards()
        for k, pol in enumerate(self.policies):
            rows = np.arange(self.n_contexts)
            if kind == "cb-square":
                ga = g[:, rows, pol]                       # (M, S)
                diff = ga[:, None, :] - ga[None, :, :]
                out[:, :, k] = (diff ** 2) @ self.context_dist
            elif kind == "squared-hellinger":
                laws = self.reward_laws[:, rows, pol, :]   # (M, S, R)
                root = np.sqrt(laws)
                d = root[:, None, :, :] - root[None, :, :, :]
                out[:, :, k] = (0.5 * (d ** 2).sum(axis=3)) @ self.context_dist
            else:
                raise ValueError(f"unknown divergence kind {kind!r}")
        return out

    def sample_observation(self, m: int, policy_index: int, rng: np.random.Generator):
        s = int(rng.choice(self.n_contexts, p=self.context_dist))
        a = int(self.policies[policy_index, s])
        r_idx = int(rng.choice(len(self.reward_grid), p=self.reward_laws[m, s, a]))
        return s, a, r_idx

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "context_dist": self.context_dist.tolist(),
            "reward_grid": self.reward_grid.tolist(),
            "reward_laws": self.reward_laws.tolist(),
            "policies": self.policies.tolist(),
        })

    @staticmethod
    def from_json(text: str) -> "CbClass":
        doc = json.loads(text)
        return CbClass(
            context_dist=np.asarray(doc["context_dist"], dtype=float),
            reward_grid=np.asarray(doc["reward_grid"], dtype=float),
            reward_laws=np.asarray(doc["reward_laws"], dtype=float),
            policies=np.asarray(doc["policies"], dtype=int),
            name=doc.get("name", "cb"),
        )


# --- minimax game solving ----------------------------------------------------

@dataclass
class DecSolution:
    value: float            # certified upper bound on the game value
    p: np.ndarray           # decision distribution achieving it
    gap: float              # value minus a certified lower bound
    method: str
    iterations: int = 0


def solve_matrix_game(payoff: np.ndarray, method: str = "lp", tol: float = 1e-4,
                      max_iter: int = 10 ** 5, seed: int = 0) -> DecSolution:
    """min_p max_row (payoff @ p) over the simplex, with a duality certificate.

    ``payoff`` has shape (rows, columns) = (maximizing player, decision).  The
    default LP route is exact up to solver precision; ``method='ew'`` runs
    exponential-weights self-play against exact row best responses (kept for
    cross-checks; its gap closes like 1/sqrt(iterations)).
    """
    payoff = np.asarray(payoff, dtype=float)
    n_rows, n_cols = payoff.shape
    if method == "lp":
        c = np.zeros(n_cols + 1)
        c[-1] = 1.0
        a_ub = np.hstack([payoff, -np.ones((n_rows, 1))])
        a_eq = np.zeros((1, n_cols + 1))
        a_eq[0, :n_cols] = 1.0
        bounds = [(0.0, None)] * n_cols + [(None, None)]
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_rows), A_eq=a_eq, b_eq=[1.0],
                      bounds=bounds, method="highs")
        if not res.success:
            raise ConvergenceFailure(f"LP solver failed: {res.message}", gap=float("inf"))
        p = np.clip(res.x[:n_cols], 0.0, None)
        p /= p.sum()
        ub = float((payoff @ p).max())
        q = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
        lb = float((q @ payoff).min()) if q.sum() > 0 else ub
        gap = max(ub - lb, 0.0)
        if gap > tol:
            raise ConvergenceFailure(f"LP certificate gap {gap:.3g} above tolerance", gap=gap)
        return DecSolution(value=ub, p=p, gap=gap, method="lp", iterations=1)

    if method != "ew":
        raise ValueError(f"unknown solver method {method!r}")
    rng = substream(seed, "dec-ew")
    span = float(payoff.max() - payoff.min()) or 1.0
    log_w = np.zeros(n_cols)
    p_sum = np.zeros(n_cols)
    br_counts = np.zeros(n_rows)
    best: DecSolution | None = None
    for k in range(1, max_iter + 1):
        w = np.exp(log_w - log_w.max())
        p = w / w.sum()
        row = int(np.argmax(payoff @ p))
        br_counts[row] += 1
        p_sum += p
        eta = math.sqrt(8.0 * math.log(n_cols) / k) / span
        log_w -= eta * payoff[row]
        if k % 128 == 0 or k == max_iter:
            p_bar = p_sum / p_sum.sum()
            ub = float((payoff @ p_bar).max())
            q_bar = br_counts / br_counts.sum()
            lb = float((q_bar @ payoff).min())
            cand = DecSolution(value=ub, p=p_bar, gap=max(ub - lb, 0.0),
                               method="ew", iterations=k)
            if best is None or cand.gap < best.gap:
                best = cand
            if best.gap <= tol:
                return best
    raise ConvergenceFailure(
        f"self-play stopped at gap {best.gap:.3g} after {max_iter} iterations",
        gap=best.gap)


def dec_value(cb: CbClass, mu_indices, mu_weights, gamma: float,
              divergence: str = "cb-square", method: str = "lp", tol: float = 1e-4,
              max_iter: int = 10 ** 5, div_tensor: np.ndarray | None = None,
              policy_values: np.ndarray | None = None) -> DecSolution:
    """Solve the decision-estimation game against an estimate distribution.

    The payoff to the adversary model m under decision distribution p is
    E_{pi~p}[ g^m(pi_m) - g^m(pi) - gamma * E_{Mhat~mu}[ D(Mhat(pi), m(pi)) ] ].
    With ``mu`` a point mass this is the decision-estimation coefficient at
    reference Mhat; the meta-algorithm calls it with the learner's mixture.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    vals = cb.policy_values() if policy_values is None else policy_values
    div = cb.divergence_tensor(divergence) if div_tensor is None else div_tensor
    mu_indices = np.asarray(mu_indices, dtype=int)
    mu_weights = np.asarray(mu_weights, dtype=float)
    est_pen = np.tensordot(mu_weights, div[mu_indices], axes=(0, 0))  # (M, Pi)
    opt = vals.max(axis=1)
    payoff = opt[:, None] - vals - gamma * est_pen
    return solve_matrix_game(payoff, method=method, tol=tol, max_iter=max_iter)


def igw_distribution(ghat: np.ndarray, gamma: float, tol: float = 1e-12) -> np.ndarray:
    """Inverse gap weighting: p(a) = 1 / (lambda + 2 gamma (ghat_max - ghat_a)).

    The normalizer lambda is the root of sum_a p(a) = 1 in [1, |A|], found by
    bisection (the map is monotone decreasing).  The greedy action receives
    the remaining mass.
    """
    ghat = np.asarray(ghat, dtype=float)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = len(ghat)
    best = int(np.argmax(ghat))
    gaps = ghat[best] - ghat
    lo, hi = 1.0, float(n)
    total = lambda lam: float(np.sum(1.0 / (lam + 2.0 * gamma * gaps)))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if total(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    p = 1.0 / (lam + 2.0 * gamma * gaps)
    p[best] = 0.0
    p[best] = max(0.0, 1.0 - p.sum())
    return p


# --- version space over models and the offline oracle ------------------------

class DmsoVersionSpace:
    """Version-space learner over a finite model class.

    Identical construction to the value-space learner: a model survives while
    its divergence from every past oracle output over the played decisions
    stays within the threshold.  Prediction is uniform over survivors.
    """

    def __init__(self, cb: CbClass, beta_off: float, divergence: str = "cb-square",
                 threshold_multiplier: float = 1.0):
        self.cb = cb
        self.threshold = threshold_multiplier * beta_off
        self.div = cb.divergence_tensor(divergence)
        self.mask = np.ones(cb.n_models, dtype=bool)
        self.decision_counts = np.zeros(cb.n_policies)

    def step(self, t: int, mhat: int):
        cost = self.div[int(mhat)][:, :] @ self.decision_counts
        new_mask = self.mask & (cost <= self.threshold + 1e-12)
        if not np.any(new_mask):
            from .errors import OracleViolationError

            raise OracleViolationError("model version space is empty", round_index=t)
        self.mask = new_mask
        idx = np.flatnonzero(self.mask)
        return idx, np.full(idx.size, 1.0 / idx.size)

    def observe(self, policy_index: int) -> None:
        self.decision_counts[policy_index] += 1


class MleDmsoOracle:
    """Maximum-likelihood model given the observed (context, action, reward) triples."""

    def __init__(self, cb: CbClass, beta_off: float):
        self.cb = cb
        self.beta_off = float(beta_off)
        self.log_laws = np.log(np.maximum(cb.reward_laws, 1e-12))

    def output(self, t: int, observations) -> int:
        ll = np.zeros(self.cb.n_models)
        for s, a, r_idx in observations:
            ll += self.log_laws[:, s, a, r_idx]
        return self.pick(ll)

    @staticmethod
    def pick(loglik: np.ndarray) -> int:
        return int(np.argmax(loglik))  # argmax takes the lowest index on ties

    def loglik_increment(self, obs) -> np.ndarray:
        s, a, r_idx = obs
        return self.log_laws[:, s, a, r_idx]


# --- the meta-algorithm -------------------------------------------------------

@dataclass
class DecisionStep:
    p: np.ndarray
    policy_index: int
    context: int
    action: int
    reward: float
    expected_regret: float
    expected_est: float


@dataclass
class DecisionLog:
    cb: CbClass
    m_star: int
    gamma: float
    seed: int
    steps: list[DecisionStep] = field(default_factory=list)
    measured_beta: float = 0.0  # realized offline budget of the oracle outputs

    def regret(self) -> float:
        return float(sum(s.expected_regret for s in self.steps))

    def estimation_error(self) -> float:
        return float(sum(s.expected_est for s in self.steps))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,pi,r,regret_cum,est_cum\n")
        reg = est = 0.0
        for t, s in enumerate(self.steps, start=1):
            reg += s.expected_regret
            est += s.expected_est
            buf.write(f"{t},{s.policy_index},{s.reward!r},{reg!r},{est!r}\n")
        return buf.getvalue()


def regret(log: DecisionLog) -> float:
    """Exact expected regret recomputed from the stored decision distributions."""
    vals = log.cb.policy_values()
    best = vals[log.m_star].max()
    return float(sum(best - float(vals[log.m_star] @ s.p) for s in log.steps))


def run_e2d(cb: CbClass, m_star: int, gamma: float, horizon: int, seed: int,
            beta_off: float, divergence: str = "cb-square",
            threshold_multiplier: float = 1.0, method: str = "lp",
            tol: float = 1e-4) -> DecisionLog:
    """Offline-oracle decision making loop.

    Round t: the maximum-likelihood oracle maps the observation history to a
    model estimate; the version-space learner converts it into a mixture; the
    game solver turns the mixture into a decision distribution at scale gamma;
    a decision is sampled and the observation goes back to the oracle only.
    Solutions are cached per surviving-set, so the solver runs once per
    distinct version space.
    """
    oracle = MleDmsoOracle(cb, beta_off)
    learner = DmsoVersionSpace(cb, beta_off, divergence=divergence,
                               threshold_multiplier=threshold_multiplier)
    vals = cb.policy_values()
    div = learner.div
    decision_rng = substream(seed, "decision")
    kernel_rng = substream(seed, "kernel")
    log = DecisionLog(cb=cb, m_star=m_star, gamma=gamma, seed=seed)
    loglik = np.zeros(cb.n_models)
    cache: dict[tuple[int, ...], np.ndarray] = {}
    best_value = vals[m_star].max()
    for t in range(1, horizon + 1):
        mhat = oracle.pick(loglik)
        log.measured_beta = max(log.measured_beta,
                                float(div[mhat, m_star] @ learner.decision_counts))
        idx, weights = learner.step(t, mhat)
        key = tuple(int(i) for i in idx)
        if key not in cache:
            sol = dec_value(cb, idx, weights, gamma, divergence=divergence,
                            method=method, tol=tol, div_tensor=div, policy_values=vals)
            cache[key] = sol.p
        p = cache[key]
        k = int(decision_rng.choice(cb.n_policies, p=p))
        s, a, r_idx = cb.sample_observation(m_star, k, kernel_rng)
        reward = float(cb.reward_grid[r_idx])
        exp_regret = float(best_value - vals[m_star] @ p)
        exp_est = float(weights @ div[idx, m_star, k])
        log.steps.append(DecisionStep(p=p, policy_index=k, context=s, action=a,
                                      reward=reward, expected_regret=exp_regret,
                                      expected_est=exp_est))
        learner.observe(k)
        loglik += oracle.loglik_increment((s, a, r_idx))
    return log


# --- tightness of offline-to-online conversion --------------------------------

@dataclass
class CbLowerBound:
    n_contexts: int
    block_len: int              # floor(N * beta)
    policies: np.ndarray        # (T, S) deterministic policies
    estimate_tables: np.ndarray  # (T, S, A) mean-reward estimates
    per_round_error: np.ndarray
    budgets: np.ndarray         # prefix offline error of each round's estimate

    @property
    def exact_online_error(self) -> float:
        return float(self.per_round_error.sum())

    def budget_ok(self, beta_off: float, tol: float = 1e-9) -> bool:
        return bool(np.all(self.budgets <= beta_off + tol))


def cb_lower_bound_instance(beta_off: float, horizon: int) -> CbLowerBound:
    """The two-action contextual bandit where conversion loses a sqrt factor.

    Uniform contexts over N states, true mean rewards identically zero, and a
    shifting (policy, estimate) pair that flags one context per block: each
    round contributes exactly 1/N online error while every prefix stays within
    the offline budget.  Requires T = N * floor(N beta) with N beta > 1.
    """
    if beta_off <= 0:
        raise ValueError("the construction needs a positive budget")
    chosen = None
    admissible = []
    for n in range(1, horizon + 2):
        blk = math.floor(n * beta_off)
        if blk < 1 or n * beta_off <= 1:
            continue
        admissible.append(n * blk)
        if n * blk == horizon:
            chosen = (n, blk)
    if chosen is None:
        near = min(admissible, key=lambda v: abs(v - horizon)) if admissible else None
        raise ValueError(
            f"no N satisfies T = N * floor(N beta) for T={horizon}, beta={beta_off}"
            + (f"; nearest admissible T is {near}" if near is not None else ""))
    n, blk = chosen
    policies = np.zeros((horizon, n), dtype=int)
    estimates = np.zeros((horizon, n, 2))
    per_round = np.zeros(horizon)
    budgets = np.zeros(horizon)
    for t in range(1, horizon + 1):
        flagged = (t - 1) // blk          # 0-based block index, stays below N
        policies[t - 1, flagged] = 1      # play a_1 exactly on the flagged context
        estimates[t - 1, flagged, 1] = 1.0
        per_round[t - 1] = 1.0 / n        # squared gap 1 on a context of mass 1/N
        budgets[t - 1] = ((t - 1) % blk) / n
    return CbLowerBound(n_contexts=n, block_len=blk, policies=policies,
                        estimate_tables=estimates, per_round_error=per_round,
                        budgets=budgets)
