"""Tabular MDPs: occupancy measures, coverability, layer-wise divergences.

Models are layered finite-horizon MDPs with a shared action set, rewards on a
finite grid, and a fixed initial distribution.  Everything here is exact
dynamic programming; sampling appears only in the trajectory simulator used
by the protocol runner and test oracles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .losses import hellinger_sq
from .rng import substream

__all__ = [
    "TabularMdp",
    "DEFAULT_REWARD_GRID",
    "random_mdp",
    "random_policy",
    "occupancy_measure",
    "coverability",
    "layerwise_divergence",
    "trajectory_law",
    "trajectory_hellinger_sq",
    "sample_trajectory",
    "CountMdpOracle",
    "ConversionReport",
    "coverability_conversion_check",
]

DEFAULT_REWARD_GRID = np.round(np.arange(0, 11) * 0.1, 1)


@dataclass
class TabularMdp:
    """Layered MDP: states per layer, shared actions, finite reward grid."""

    horizon: int
    n_states: list[int]             # length H
    n_actions: int
    d1: np.ndarray                  # (S_1,)
    transitions: list[np.ndarray]   # h = 1..H-1: (S_h, A, S_{h+1}); last layer terminal
    reward_laws: list[np.ndarray]   # h = 1..H: (S_h, A, R)
    reward_grid: np.ndarray = field(default_factory=lambda: DEFAULT_REWARD_GRID.copy())

    def __post_init__(self):
        self.d1 = np.asarray(self.d1, dtype=float)
        self.reward_grid = np.asarray(self.reward_grid, dtype=float)
        if len(self.n_states) != self.horizon:
            raise ValueError("need one state count per layer")
        if abs(self.d1.sum() - 1.0) > 1e-9:
            raise ValueError("initial distribution must sum to 1")
        for h, p in enumerate(self.transitions):
            if np.any(np.abs(p.sum(axis=2) - 1.0) > 1e-9):
                raise ValueError(f"transition rows at layer {h + 1} are not stochastic")
        for r in self.reward_laws:
            if np.any(np.abs(r.sum(axis=2) - 1.0) > 1e-9):
                raise ValueError("reward rows are not stochastic")
        if np.any(self.reward_grid < 0) or np.any(self.reward_grid > 1):
            raise ValueError("rewards must be supported in [0, 1]")

    def joint_next_law(self, h: int, s: int, a: int) -> np.ndarray:
        """Law of (s_{h+1}, r_h) given (s_h, a_h) = (s, a), flattened.

        The terminal layer has a single deterministic successor state, so its
        joint law is the reward law alone.
        """
        r = self.reward_laws[h - 1][s, a]
        if h == self.horizon:
            return r.copy()
        p = self.transitions[h - 1][s, a]
        return np.outer(p, r).ravel()

    def joint_table(self, h: int) -> np.ndarray:
        """All joint next laws at layer h, shape (S_h, A, S_{h+1} * R)."""
        s_h = self.n_states[h - 1]
        return np.stack([
            np.stack([self.joint_next_law(h, s, a) for a in range(self.n_actions)])
            for s in range(s_h)
        ])

    def to_json(self) -> str:
        return json.dumps({
            "horizon": self.horizon,
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "d1": self.d1.tolist(),
            "transitions": [p.tolist() for p in self.transitions],
            "reward_laws": [r.tolist() for r in self.reward_laws],
            "reward_grid": self.reward_grid.tolist(),
        })

    @staticmethod
    def from_json(text: str) -> "TabularMdp":
        doc = json.loads(text)
        return TabularMdp(
            horizon=int(doc["horizon"]),
            n_states=[int(v) for v in doc["n_states"]],
            n_actions=int(doc["n_actions"]),
            d1=np.asarray(doc["d1"], dtype=float),
            transitions=[np.asarray(p, dtype=float) for p in doc["transitions"]],
            reward_laws=[np.asarray(r, dtype=float) for r in doc["reward_laws"]],
            reward_grid=np.asarray(doc["reward_grid"], dtype=float),
        )


def random_mdp(horizon: int, n_states: int, n_actions: int, rng: np.random.Generator,
               reward_grid=None, concentration: float = 1.0) -> TabularMdp:
    grid = DEFAULT_REWARD_GRID if reward_grid is None else np.asarray(reward_grid, float)
    states = [n_states] * horizon
    d1 = rng.dirichlet(np.ones(n_states) * concentration)
    transitions = [rng.dirichlet(np.ones(n_states) * concentration,
                                 size=(n_states, n_actions))
                   for _ in range(horizon - 1)]
    rewards = [rng.dirichlet(np.ones(len(grid)) * concentration,
                             size=(n_states, n_actions))
               for _ in range(horizon)]
    return TabularMdp(horizon, states, n_actions, d1, transitions, rewards, grid)


def random_policy(mdp: TabularMdp, rng: np.random.Generator, deterministic: bool = True):
    """(H, S, A) stochastic policy array (rows one-hot when deterministic)."""
    pol = np.zeros((mdp.horizon, max(mdp.n_states), mdp.n_actions))
    for h in range(mdp.horizon):
        for s in range(mdp.n_states[h]):
            if deterministic:
                pol[h, s, rng.integers(mdp.n_actions)] = 1.0
            else:
                pol[h, s] = rng.dirichlet(np.ones(mdp.n_actions))
    return pol


def _as_stochastic_policy(mdp: TabularMdp, policy) -> np.ndarray:
    policy = np.asarray(policy)
    if policy.ndim == 2 and policy.shape[1] != mdp.n_actions:
        raise ValueError("deterministic policy must be (H, S) action indices")
    if policy.ndim == 2:
        out = np.zeros((mdp.horizon, max(mdp.n_states), mdp.n_actions))
        for h in range(mdp.horizon):
            for s in range(mdp.n_states[h]):
                out[h, s, int(policy[h, s])] = 1.0
        return out
    return policy.astype(float)


def occupancy_measure(mdp: TabularMdp, policy) -> list[np.ndarray]:
    """d_h(s, a) tables by exact forward dynamic programming; each sums to 1."""
    pol = _as_stochastic_policy(mdp, policy)
    occupancies = []
    d_state = mdp.d1.copy()
    for h in range(1, mdp.horizon + 1):
        d_sa = d_state[:, None] * pol[h - 1, : mdp.n_states[h - 1]]
        occupancies.append(d_sa)
        if h < mdp.horizon:
            d_state = np.einsum("sa,sat->t", d_sa, mdp.transitions[h - 1])
    return occupancies


def coverability(mdp: TabularMdp, policies) -> float:
    """max_h sum_{s,a} max_pi d_h^pi(s, a), the exact coverability coefficient.

    A distribution nu_h with ||d_h^pi / nu_h||_inf <= t for all pi exists iff
    t >= sum_{s,a} max_pi d_h^pi(s, a), so the per-layer optimum is closed form.
    """
    occupancies = [occupancy_measure(mdp, p) for p in policies]
    return float(max(
        np.stack([occ[h] for occ in occupancies]).max(axis=0).sum()
        for h in range(mdp.horizon)
    ))


def layerwise_divergence(mdp_m: TabularMdp, mdp_mp: TabularMdp, policy,
                         per_layer_losses=None) -> float:
    """sum_h E under the second model of D_h between joint next laws.

    The expectation runs over the occupancy of the second argument and each
    D_h compares (second model's law, first model's law) in that order; the
    default D_h is squared Hellinger.  The asymmetry is deliberate and mirrors
    how offline error budgets weight past decisions.
    """
    occ = occupancy_measure(mdp_mp, policy)
    total = 0.0
    for h in range(1, mdp_m.horizon + 1):
        t_m = mdp_m.joint_table(h)
        t_mp = mdp_mp.joint_table(h)
        for s in range(mdp_m.n_states[h - 1]):
            for a in range(mdp_m.n_actions):
                w = occ[h - 1][s, a]
                if w == 0.0:
                    continue
                if per_layer_losses is None:
                    total += w * hellinger_sq(t_mp[s, a], t_m[s, a])
                else:
                    total += w * per_layer_losses[h - 1](t_mp[s, a], t_m[s, a])
    return total


def trajectory_law(mdp: TabularMdp, policy) -> np.ndarray:
    """Exact joint law over full trajectories (s_1,a_1,r_1,...,s_H,a_H,r_H).

    Enumerates the product space; intended for small models in tests.
    """
    pol = _as_stochastic_policy(mdp, policy)
    law = mdp.d1.copy()  # over s_1
    for h in range(1, mdp.horizon + 1):
        s_h = mdp.n_states[h - 1]
        # extend with a_h: law axes (..., s_h) -> (..., s_h, a)
        law = law[..., None] * pol[h - 1, :s_h]
        # extend with r_h
        law = law[..., None] * mdp.reward_laws[h - 1]
        if h < mdp.horizon:
            # marginalize nothing; append s_{h+1} given (s_h, a_h)
            trans = mdp.transitions[h - 1][:, :, None, :]  # (s, a, 1, t)
            law = law[..., None] * trans
    return law


def trajectory_hellinger_sq(mdp_a: TabularMdp, mdp_b: TabularMdp, policy) -> float:
    return hellinger_sq(trajectory_law(mdp_a, policy).ravel(),
                        trajectory_law(mdp_b, policy).ravel())


def sample_trajectory(mdp: TabularMdp, policy, rng: np.random.Generator):
    pol = _as_stochastic_policy(mdp, policy)
    s = int(rng.choice(mdp.n_states[0], p=mdp.d1))
    out = []
    for h in range(1, mdp.horizon + 1):
        a = int(rng.choice(mdp.n_actions, p=pol[h - 1, s]))
        r_idx = int(rng.choice(len(mdp.reward_grid), p=mdp.reward_laws[h - 1][s, a]))
        out.append((s, a, r_idx))
        if h < mdp.horizon:
            s = int(rng.choice(mdp.n_states[h], p=mdp.transitions[h - 1][s, a]))
    return out


class CountMdpOracle:
    """Tabular maximum-likelihood model from trajectory counts.

    Unvisited (layer, state, action) cells fall back to uniform transition and
    reward laws; the estimate is improper but always a valid model, and its
    realized budget is measured rather than declared.
    """

    def __init__(self, template: TabularMdp):
        self.template = template

    def estimate(self, trajectories) -> TabularMdp:
        t = self.template
        trans_counts = [np.zeros_like(p) for p in t.transitions]
        reward_counts = [np.zeros_like(r) for r in t.reward_laws]
        for traj in trajectories:
            for h, (s, a, r_idx) in enumerate(traj, start=1):
                reward_counts[h - 1][s, a, r_idx] += 1.0
                if h < t.horizon:
                    s_next = traj[h][0]
                    trans_counts[h - 1][s, a, s_next] += 1.0
        transitions = []
        for counts in trans_counts:
            total = counts.sum(axis=2, keepdims=True)
            uniform = np.full_like(counts, 1.0 / counts.shape[2])
            transitions.append(np.where(total > 0, counts / np.maximum(total, 1.0), uniform))
        rewards = []
        for counts in reward_counts:
            total = counts.sum(axis=2, keepdims=True)
            uniform = np.full_like(counts, 1.0 / counts.shape[2])
            rewards.append(np.where(total > 0, counts / np.maximum(total, 1.0), uniform))
        return TabularMdp(t.horizon, list(t.n_states), t.n_actions, t.d1.copy(),
                          transitions, rewards, t.reward_grid.copy())


@dataclass
class ConversionReport:
    horizon: int
    coverability: float
    measured_beta: float
    online_divergence: float
    bound: float
    check_constant: float

    @property
    def passed(self) -> bool:
        return self.online_divergence <= self.bound + 1e-9


def coverability_conversion_check(m_star: TabularMdp, policies, horizon: int,
                                  seed: int, check_constant: float = 10.0) -> ConversionReport:
    """Run the offline-to-online conversion experiment on one seed.

    Policies cycle through the given list; a count-based oracle is refit each
    round; both the cumulative online layer-wise divergence and the measured
    offline budget are exact given the sampled trajectories, and the report
    compares the former against
    c * (sqrt(H * C_cov * beta * T * ln T) + H * C_cov).
    """
    policies = [np.asarray(p) for p in policies]
    c_cov = coverability(m_star, policies)
    occupancies = [occupancy_measure(m_star, p) for p in policies]
    star_joints = [m_star.joint_table(h) for h in range(1, m_star.horizon + 1)]
    oracle = CountMdpOracle(m_star)
    rng = substream(seed, "kernel")
    trajectories: list = []
    policy_seq: list[int] = []
    cum_occ = [np.zeros_like(occupancies[0][h]) for h in range(m_star.horizon)]
    online = 0.0
    beta = 0.0
    for t in range(1, horizon + 1):
        k = (t - 1) % len(policies)
        mhat = oracle.estimate(trajectories)
        hat_joints = [mhat.joint_table(h) for h in range(1, m_star.horizon + 1)]
        hell = [np.zeros_like(cum_occ[h]) for h in range(m_star.horizon)]
        for h in range(m_star.horizon):
            s_h, n_a = cum_occ[h].shape
            for s in range(s_h):
                for a in range(n_a):
                    hell[h][s, a] = hellinger_sq(star_joints[h][s, a], hat_joints[h][s, a])
        beta_t = sum(float((cum_occ[h] * hell[h]).sum()) for h in range(m_star.horizon))
        beta = max(beta, beta_t)
        online += sum(float((occupancies[k][h] * hell[h]).sum())
                      for h in range(m_star.horizon))
        trajectories.append(sample_trajectory(m_star, policies[k], rng))
        policy_seq.append(k)
        for h in range(m_star.horizon):
            cum_occ[h] += occupancies[k][h]
    h_cov = m_star.horizon * c_cov
    bound = check_constant * (math.sqrt(h_cov * beta * horizon * math.log(horizon)) + h_cov)
    return ConversionReport(horizon=horizon, coverability=c_cov, measured_beta=beta,
                            online_divergence=online, bound=bound,
                            check_constant=check_constant)
