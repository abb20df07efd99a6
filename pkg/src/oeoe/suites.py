"""Named verification suites asserting the library's end-to-end guarantees.

Each suite runs a pinned experiment and checks inequalities with both sides
reported.  Suites are registered by name for the ``verify`` CLI subcommand;
the pytest acceptance module drives the same registry.  Every tolerance and
constant is pinned here; ``fast`` variants shrink Monte Carlo sizes and cap
replay counts but never touch thresholds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .adversaries import BlockAdversary, IidAdversary, ShiftingAdversary, WorstOfKAdversary
from .cde import replay_count, run_cde_stack, tune_stack_delay
from .dmso import (CbClass, all_deterministic_policies, cb_lower_bound_instance,
                   dec_value, igw_distribution, run_e2d, regret)
from .instances import (cde_instance, full_cube_instance, random_binary_instance,
                        ratio_bound, square_instance, threshold_instance)
from .learners import (DelayedReductionLearner, IdentityLearner, VersionSpaceLearner,
                       tune_delay)
from .losses import (SQUARE, SQUARED_HELLINGER, ZERO_ONE, eval_loss,
                     hellinger_subadditivity_sides, potential_lemma_holds)
from .mdp import (coverability_conversion_check, layerwise_divergence, random_mdp,
                  random_policy, trajectory_hellinger_sq)
from .oracles import (BlockDelayOracle, ConsistentBinaryOracle, ErmSquareOracle,
                      MleOracle, ShiftedProperOracle, project_to_proper,
                      verify_offline_guarantee)
from .protocol import run_protocol
from .rng import spawn_seed, substream

__all__ = ["Check", "SuiteReport", "SUITES", "run_suite", "suite_names"]

SUITE_SEED = 20260811  # every suite derives its randomness from this constant


@dataclass
class Check:
    name: str
    lhs: float
    relation: str  # "<=" or ">="
    rhs: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        if self.relation == "<=":
            return self.lhs <= self.rhs + self.tol
        return self.lhs >= self.rhs - self.tol

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.lhs:.6g} {self.relation} {self.rhs:.6g}"


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    def add(self, name, lhs, relation, rhs, tol=1e-9):
        self.checks.append(Check(name, float(lhs), relation, float(rhs), tol))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        mark = "PASS" if self.passed else "FAIL"
        out.append(f"[{mark}] suite {self.suite} ({self.seconds:.1f}s)")
        return out


# --- criterion 1 ---------------------------------------------------------------

def suite_vsa_upper(fast: bool = False) -> SuiteReport:
    """Noiseless classification, |F|=64: version-space error within ln|F|."""
    rep = SuiteReport("vsa-upper")
    seed = spawn_seed(SUITE_SEED, "vsa-upper")
    instance = random_binary_instance(64, 12, substream(seed, "instance"))
    f_star = 5
    horizon = 100
    log = run_protocol(instance, ConsistentBinaryOracle(instance, 0.0),
                       VersionSpaceLearner(instance, 0.0),
                       WorstOfKAdversary(instance, f_star, instance.n_covariates,
                                         substream(seed, "adversary")),
                       horizon, seed, f_star, check_budget=True)
    est = log.online_error()
    rep.add("exact Est_On <= ln 64", est, "<=", math.log(64))
    rep.add("exact Est_On <= 3 |X| ln T", est, "<=", 3 * instance.n_covariates * math.log(horizon))
    return rep


# --- criterion 2 ---------------------------------------------------------------

def suite_vsa_noisy(fast: bool = False) -> SuiteReport:
    """Block-delay oracle on its block sequence, threshold multiplier 2 C_D."""
    rep = SuiteReport("vsa-noisy")
    seed = spawn_seed(SUITE_SEED, "vsa-noisy")
    instance = full_cube_instance(8)
    f_star = int(substream(seed, "target").integers(instance.n_class))
    c_d = instance.loss.c_d
    for beta in (1, 2, 4):
        horizon = 8 * math.ceil(beta)
        log = run_protocol(instance, BlockDelayOracle(instance, beta, target=f_star),
                           VersionSpaceLearner(instance, beta,
                                               threshold_multiplier=2.0 * c_d),
                           BlockAdversary(beta, 8), horizon, seed, f_star,
                           check_budget=True)
        rep.add(f"beta={beta}: exact Est_On <= (2 C_D beta + 1) ln 256",
                log.online_error(), "<=", (2 * c_d * beta + 1) * math.log(256))
    return rep


# --- criterion 3 ---------------------------------------------------------------

def suite_lb_general(fast: bool = False) -> SuiteReport:
    """Exact expectation over all 2^8 targets of the block construction."""
    rep = SuiteReport("lb-general")
    seed = spawn_seed(SUITE_SEED, "lb-general")
    instance = full_cube_instance(8)
    n, beta = 8, 3
    horizon = n * math.ceil(beta)
    for name, make in (("vsa", lambda: VersionSpaceLearner(instance, beta)),
                       ("identity", lambda: IdentityLearner(instance))):
        total = 0.0
        for f_star in range(instance.n_class):
            log = run_protocol(instance, BlockDelayOracle(instance, beta, target=f_star),
                               make(), BlockAdversary(beta, n), horizon, seed, f_star)
            total += log.online_error()
        rep.add(f"{name}: E_{{f*~Unif}}[Est_On] >= N ceil(beta) / 2",
                total / instance.n_class, ">=", n * math.ceil(beta) / 2)
    return rep


# --- criterion 4 ---------------------------------------------------------------

def suite_memoryless(fast: bool = False) -> SuiteReport:
    """Identity learner: shifted-proper witness and the generic upper bound."""
    rep = SuiteReport("memoryless")
    seed = spawn_seed(SUITE_SEED, "memoryless")
    n, beta, horizon = 16, 2, 96
    instance = threshold_instance(n)
    f_star = n - 1  # the top threshold parameter
    log = run_protocol(instance, ShiftedProperOracle(instance, beta),
                       IdentityLearner(instance), ShiftingAdversary(beta, n),
                       horizon, seed, f_star, check_budget=True)
    est = log.online_error()
    rep.add("shifted witness: exact Est_On >= min(T, N(floor(beta)+1)) / 2",
            est, ">=", 0.5 * min(horizon, n * (math.floor(beta) + 1)))
    rep.add("identity upper: Est_On <= 3 (beta+1) |X| ln T",
            est, "<=", 3 * (beta + 1) * n * math.log(horizon))
    cube = full_cube_instance(8)
    log2 = run_protocol(cube, BlockDelayOracle(cube, beta, target=77),
                        IdentityLearner(cube), BlockAdversary(beta, 8),
                        8 * math.ceil(beta), seed, 77, check_budget=True)
    rep.add("identity upper on the block instance",
            log2.online_error(), "<=", 3 * (beta + 1) * 8 * math.log(8 * math.ceil(beta)))
    return rep


# --- criterion 5 ---------------------------------------------------------------

def suite_delayed_reduction(fast: bool = False) -> SuiteReport:
    """Square loss, |F|=32: delayed reduction within its per-transcript bound."""
    rep = SuiteReport("delayed-reduction")
    seed = spawn_seed(SUITE_SEED, "delayed")
    horizon, gamma = 256, 2.0
    instance = square_instance(32, 8, substream(seed, "instance"))
    f_star = 0
    c_d = instance.loss.c_d
    log_f = math.log(instance.n_class)
    # phase 1: replay the oracle on the learner-independent covariate path
    probe = run_protocol(instance, ErmSquareOracle(instance, 0.0),
                         IdentityLearner(instance),
                         IidAdversary(instance.n_covariates, substream(seed, "adversary")),
                         horizon, seed, f_star)
    beta_meas = max(s.offline_budget_used for s in probe.steps)
    delay = tune_delay(beta_meas, horizon, c_d, log_f)
    learner = DelayedReductionLearner(instance, delay)
    log = run_protocol(instance, ErmSquareOracle(instance, 0.0), learner,
                       IidAdversary(instance.n_covariates, substream(seed, "adversary")),
                       horizon, seed, f_star)
    assert log.covariates == probe.covariates  # determinism of the two-phase replay
    est = log.online_error()
    rdol_cap = 2 * delay * log_f
    rep.add(f"tuned N={delay}: exact Est_On <= C_D (gamma+1)(N + beta T / N) + 2 N ln|F|",
            est, "<=", c_d * (gamma + 1) * (delay + beta_meas * horizon / delay) + rdol_cap)
    losses = learner.full_loss_matrix(horizon)
    probs = np.array([s.mixture.weights for s in log.steps])
    rdol = float((probs * losses).sum() - gamma * losses.sum(axis=0).min())
    rep.add("measured R_DOL(T, N, 2) <= 2 N ln|F|", rdol, "<=", rdol_cap)
    return rep


# --- criterion 6 ---------------------------------------------------------------

def suite_oracle_tails(fast: bool = False) -> SuiteReport:
    """Monte Carlo tail fractions for the ERM and MLE offline guarantees."""
    rep = SuiteReport("oracle-tails")
    seed = spawn_seed(SUITE_SEED, "oracle-tails")
    trials = 300 if fast else 1000
    n_class, horizon, delta = 32, 50, 0.05
    slack = delta + 3 * math.sqrt(delta * (1 - delta) / trials)

    instance = square_instance(n_class, 6, substream(seed, "erm-instance"))
    tables = instance.class_tables
    threshold = 8 * math.log(n_class / delta)
    bad = 0
    for i in range(trials):
        rng = substream(seed, "erm-trial", i)
        xs = rng.integers(0, instance.n_covariates, size=horizon)
        ys = tables[0, xs] + rng.standard_normal(horizon)
        fhat = int(np.argmin(((tables[:, xs] - ys) ** 2).sum(axis=1)))
        if float(((tables[fhat, xs] - tables[0, xs]) ** 2).sum()) > threshold:
            bad += 1
    rep.add(f"ERM tail fraction over {trials} trials", bad / trials, "<=", slack)

    cde = cde_instance(n_class, 6, 3, substream(seed, "mle-instance"))
    ctab = cde.class_tables
    threshold = math.log(n_class / delta)
    bad = 0
    for i in range(trials):
        rng = substream(seed, "mle-trial", i)
        xs = rng.integers(0, cde.n_covariates, size=horizon)
        ys = np.array([rng.choice(cde.n_outcomes, p=ctab[0, x]) for x in xs])
        fhat = int(np.argmax(np.log(ctab[:, xs, ys]).sum(axis=1)))
        d = np.sqrt(ctab[fhat, xs]) - np.sqrt(ctab[0, xs])
        if float(0.5 * (d ** 2).sum()) > threshold:
            bad += 1
    rep.add(f"MLE tail fraction over {trials} trials", bad / trials, "<=", slack)
    return rep


# --- criterion 7 ---------------------------------------------------------------

def suite_cde_stack(fast: bool = False) -> SuiteReport:
    """The full reduction stack: exact drift budget and sqrt-T error shape."""
    rep = SuiteReport("cde-stack")
    seed = spawn_seed(SUITE_SEED, "cde-stack")
    instance = cde_instance(8, 4, 2, substream(seed, "instance"), floor=0.05)
    f_star = 0
    log_v = math.log(ratio_bound(instance))
    beta_decl = math.log(instance.n_class / 0.05)
    oracle = MleOracle(instance, beta_decl)
    n_seeds = 40 if fast else 200
    cap = 32 if fast else None
    horizons = (64, 128, 256)
    means = {}
    worst_drift_margin = float("inf")
    for horizon in horizons:
        delay = tune_stack_delay(1.0, beta_decl, horizon, log_v, math.log(instance.n_class))
        replays = replay_count(math.ceil(horizon / delay), instance.n_class,
                               instance.n_covariates, 1.0 / delay, cap=cap)
        vals = []
        for i in range(n_seeds):
            res = run_cde_stack(instance, oracle, horizon, spawn_seed(seed, "mc", horizon, i),
                                f_star, delay, replays)
            vals.append(res.online_error)
            worst_drift_margin = min(worst_drift_margin,
                                     res.drift_bound() - float(res.drift_per_round.sum()))
        means[horizon] = float(np.mean(vals))
    rep.add("reference drift: min over runs of (N + beta T/N - sum_t drift_t)",
            worst_drift_margin, ">=", 0.0)
    # least-squares coefficient of mean error against sqrt(T)
    roots = np.sqrt(np.array(horizons, dtype=float))
    observed = np.array([means[h] for h in horizons])
    c_hat = float((roots * observed).sum() / (roots * roots).sum())
    c_formula = math.sqrt(1.0 * (1.0 + 1.0) * beta_decl) * log_v
    rep.add(f"sqrt-T fit coefficient (means {observed.round(3).tolist()})",
            c_hat, "<=", 4.0 * c_formula)
    rep.add("sublinearity: mean Est_H(128) / mean Est_H(64)",
            means[128] / means[64], "<=", 1.9)
    rep.add("sublinearity: mean Est_H(256) / mean Est_H(128)",
            means[256] / means[128], "<=", 1.9)
    return rep


# --- criterion 8 ---------------------------------------------------------------

def suite_coverability(fast: bool = False) -> SuiteReport:
    """Offline-to-online conversion under coverability, 50 seeds, c = 10."""
    rep = SuiteReport("coverability")
    seed = spawn_seed(SUITE_SEED, "coverability")
    rng = substream(seed, "mdp")
    m_star = random_mdp(3, 4, 2, rng)
    policies = [random_policy(m_star, rng) for _ in range(8)]
    n_seeds = 10 if fast else 50
    worst_margin = float("inf")
    worst = None
    for i in range(n_seeds):
        report = coverability_conversion_check(m_star, policies, 500,
                                               spawn_seed(seed, "mc", i), 10.0)
        margin = report.bound - report.online_divergence
        if margin < worst_margin:
            worst_margin, worst = margin, report
    rep.add(f"worst seed of {n_seeds}: sum_t D_RL <= 10 (sqrt(H C_cov beta T ln T) + H C_cov)"
            f" [C_cov={worst.coverability:.3f}, beta={worst.measured_beta:.2f}]",
            worst.online_divergence, "<=", worst.bound)
    return rep


# --- criterion 9 ---------------------------------------------------------------

def suite_cb_lower(fast: bool = False) -> SuiteReport:
    """Tightness construction: exact error equals floor(N beta), budgets valid."""
    rep = SuiteReport("cb-lower")
    beta, horizon = 1.0, 16
    lb = cb_lower_bound_instance(beta, horizon)
    rep.add("exact cumulative error == floor(N beta) (lower)",
            lb.exact_online_error, ">=", lb.block_len)
    rep.add("exact cumulative error == floor(N beta) (upper)",
            lb.exact_online_error, "<=", lb.block_len)
    rep.add("error >= sqrt(T beta) / 2", lb.exact_online_error, ">=",
            0.5 * math.sqrt(horizon * beta))
    # brute-force budget recomputation straight from the stored tables
    worst = 0.0
    n = lb.n_contexts
    for t in range(1, horizon + 1):
        ghat = lb.estimate_tables[t - 1]
        total = 0.0
        for tau in range(t - 1):
            pol = lb.policies[tau]
            total += sum((ghat[s, pol[s]] ** 2) / n for s in range(n))
        worst = max(worst, total)
    rep.add("offline budget at every round (brute-force recount)", worst, "<=", beta)
    return rep


# --- criterion 10 ---------------------------------------------------------------

def _dec_sanity_class() -> CbClass:
    """Two-action bandit-style class, symmetric around the reference model.

    Symmetry makes inverse gap weighting the exact minimax decision rule, so
    the game solver and the closed form can be compared at tight tolerance.
    """
    grid = np.round(np.arange(0, 11) * 0.1, 1)

    def law(mean: float) -> np.ndarray:
        row = np.zeros(len(grid))
        row[int(round(mean * 10))] = 1.0
        return row

    means = [(0.5, 0.5)]
    for theta in (0.1, 0.2, 0.4):
        means += [(0.5 + theta, 0.5), (0.5, 0.5 + theta)]
    laws = np.array([[[law(a), law(b)]] for a, b in means])
    return CbClass(context_dist=np.array([1.0]), reward_grid=grid, reward_laws=laws,
                   policies=all_deterministic_policies(1, 2))


def suite_dec_sanity(fast: bool = False) -> SuiteReport:
    rep = SuiteReport("dec-sanity")
    cb = _dec_sanity_class()
    ghat = cb.mean_rewards()[0, 0]
    for gamma in (1.0, 2.0, 4.0, 8.0):
        sol = dec_value(cb, [0], [1.0], gamma)
        rep.add(f"gamma={gamma:g}: dec value <= |A| / gamma", sol.value, "<=", 2.0 / gamma)
        rep.add(f"gamma={gamma:g}: certified duality gap", sol.gap, "<=", 1e-4, tol=0.0)
        tv = 0.5 * float(np.abs(sol.p - igw_distribution(ghat, gamma)).sum())
        rep.add(f"gamma={gamma:g}: TV(solver p, inverse gap weighting)", tv, "<=", 2e-3,
                tol=0.0)
    return rep


# --- criterion 11 ---------------------------------------------------------------

def _e2d_class():
    rng = substream(spawn_seed(SUITE_SEED, "e2d"), "cbclass")
    g = 0.1 + 0.8 * rng.random((4, 2, 2))
    laws = np.stack([
        np.stack([np.stack([[1 - g[m, s, a], g[m, s, a]] for a in range(2)])
                  for s in range(2)])
        for m in range(4)
    ])
    return CbClass(context_dist=np.array([0.5, 0.5]), reward_grid=np.array([0.0, 1.0]),
                   reward_laws=laws, policies=all_deterministic_policies(2, 2))


def suite_e2d_regret(fast: bool = False) -> SuiteReport:
    """Offline-oracle decision making: regret within the calibrated bound."""
    rep = SuiteReport("e2d-regret")
    seed = spawn_seed(SUITE_SEED, "e2d")
    cb = _e2d_class()
    horizon = 512
    n_seeds = 20 if fast else 100
    beta = 2.0 * math.log(cb.n_models / 0.05)  # squared-gap budget from the MLE guarantee
    log_m = math.log(cb.n_models)
    grid = [2.0 ** k for k in range(0, 9)]
    best = None
    for gamma in grid:
        dec = max(dec_value(cb, [m_bar], [1.0], gamma).value for m_bar in range(cb.n_models))
        bound = 8.0 * math.log(horizon) * max(dec * horizon, gamma * (beta + 1) * log_m)
        if best is None or bound < best[1]:
            best = (gamma, bound)
    gamma, bound = best
    regs = []
    for i in range(n_seeds):
        log = run_e2d(cb, 0, gamma, horizon, spawn_seed(seed, "mc", i), beta)
        regs.append(log.regret())
        assert abs(log.regret() - regret(log)) < 1e-9
    rep.add(f"best grid gamma={gamma:g}: mean Reg_DM over {n_seeds} seeds <= "
            "8 ln T max(dec_gamma T, gamma (beta+1) ln|M|)",
            float(np.mean(regs)), "<=", bound)
    return rep


# --- criterion 12 ---------------------------------------------------------------

def suite_properties(fast: bool = False) -> SuiteReport:
    """Loss axioms, chain rules, potential lemma, version-space and projection
    invariants, and byte-level determinism of the protocol runner."""
    rep = SuiteReport("properties")
    seed = spawn_seed(SUITE_SEED, "properties")
    rng = substream(seed, "fuzz")
    n_fuzz = 50 if fast else 200

    # metric-like axioms on sampled triples
    worst = 0.0
    for _ in range(n_fuzz):
        for loss in (ZERO_ONE, SQUARE, SQUARED_HELLINGER):
            if loss.kind == "zero-one":
                z = [int(v) for v in rng.integers(0, 2, size=3)]
            elif loss.kind == "square":
                z = list(rng.uniform(0, 1, size=3))
            else:
                z = [rng.dirichlet(np.ones(4)) for _ in range(3)]
            d12 = eval_loss(loss, z[0], z[1])
            worst = max(worst,
                        eval_loss(loss, z[0], z[0]),
                        abs(d12 - eval_loss(loss, z[1], z[0])),
                        d12 - loss.c_d * (eval_loss(loss, z[0], z[2])
                                          + eval_loss(loss, z[2], z[1])),
                        -min(d12, 0.0))
    rep.add("loss axioms (identity, symmetry, relaxed triangle): worst violation",
            worst, "<=", 0.0, tol=1e-12)

    # subadditivity of squared Hellinger over random chains (n = 2 and 3)
    margin = float("inf")
    for k in range(100):
        depth = 2 if k < 80 else 3
        pk, qk = [], []
        shape = ()
        for _ in range(depth):
            pk.append(rng.dirichlet(np.ones(2), size=shape))
            qk.append(rng.dirichlet(np.ones(2), size=shape))
            shape = shape + (2,)
        lhs, rhs = hellinger_subadditivity_sides(pk, qk)
        margin = min(margin, rhs - lhs)
    rep.add("Hellinger subadditivity (factor 7): min margin over 100 chains",
            margin, ">=", 0.0)

    # layer-wise bracketing on random tabular model pairs
    margin7 = margin4h = float("inf")
    pairs = 30 if fast else 100
    for k in range(pairs):
        mrng = substream(seed, "bracket", k)
        h = 1 + int(mrng.integers(2))
        a = random_mdp(h, 3, 2, mrng, reward_grid=[0.0, 0.5, 1.0])
        b = random_mdp(h, 3, 2, mrng, reward_grid=[0.0, 0.5, 1.0])
        pol = random_policy(a, mrng, deterministic=False)
        d2 = trajectory_hellinger_sq(a, b, pol)
        drl = layerwise_divergence(a, b, pol)
        margin7 = min(margin7, 7 * drl - d2)
        margin4h = min(margin4h, 4 * h * d2 - drl)
    rep.add("bracketing D_H^2 <= 7 D_RL: min margin", margin7, ">=", 0.0)
    rep.add("bracketing D_RL <= 4H D_H^2: min margin", margin4h, ">=", 0.0)

    # potential lemma on fuzzed nonincreasing sequences
    ok = all(
        potential_lemma_holds(np.sort(rng.uniform(1.0, rng.uniform(2, 50),
                                                  size=rng.integers(2, 40)))[::-1])
        for _ in range(n_fuzz)
    )
    rep.add("potential lemma holds on fuzzed sequences", float(ok), ">=", 1.0)

    # version-space monotonicity and target membership on random transcripts
    ok = True
    for k in range(10):
        vrng = substream(seed, "vsa", k)
        instance = random_binary_instance(16, 6, vrng)
        f_star = int(vrng.integers(16))
        beta = float(vrng.choice([0.0, 1.0, 2.0]))
        oracle = BlockDelayOracle(instance, beta, target=f_star)
        learner = VersionSpaceLearner(instance, beta, threshold_multiplier=2.0)
        adversary = BlockAdversary(beta, instance.n_covariates)
        horizon = instance.n_covariates * max(1, math.ceil(beta))
        fhats, sizes, members = [], [], []
        xs, ys = [], []
        for t in range(1, horizon + 1):
            fhat = oracle.output(t, xs, ys)
            fhats.append(fhat)
            learner.step(t, fhat)
            sizes.append(int(learner.state.survivors.sum()))
            members.append(bool(learner.state.survivors[f_star]))
            x = adversary.select(t, None, None)
            learner.observe(x)
            xs.append(x)
            ys.append(int(instance.class_tables[f_star, x]))
        ok &= all(a >= b for a, b in zip(sizes, sizes[1:]))
        ok &= verify_offline_guarantee(instance, fhats, xs, f_star, beta) and all(members)
    rep.add("version space: monotone shrinkage and target membership", float(ok), ">=", 1.0)

    # proper projection loses at most 2 C_D, exhaustively on small instances
    margin = float("inf")
    for k in range(20):
        prng = substream(seed, "projection", k)
        instance = cde_instance(5, 3, 2, prng)
        improper = cde_instance(1, 3, 2, prng).class_tables[0]
        weights = prng.dirichlet(np.ones(3))
        proj = project_to_proper(instance, improper, weights)
        for f_star in range(instance.n_class):
            base = sum(w * eval_loss(instance.loss, improper[x], instance.class_tables[f_star, x])
                       for x, w in enumerate(weights))
            proj_err = sum(w * eval_loss(instance.loss, instance.class_tables[proj, x],
                                         instance.class_tables[f_star, x])
                           for x, w in enumerate(weights))
            margin = min(margin, 2 * instance.loss.c_d * base - proj_err)
    rep.add("projection: 2 C_D blow-up margin over all targets", margin, ">=", 0.0)

    # byte-identical reruns
    from .config import run_from_config

    doc = {
        "t": 40, "seed": 99,
        "instance": {"kind": "random-binary", "n_class": 16, "n_covariates": 6, "f_star": 3},
        "oracle": {"kind": "block-delay", "beta": 1.0},
        "learner": {"kind": "version-space"},
        "adversary": {"kind": "worst-of-k"},
    }
    csv_a = run_from_config(doc).to_csv()
    csv_b = run_from_config(doc).to_csv()
    rep.add("determinism: identical CSV bytes on rerun",
            float(csv_a.encode() == csv_b.encode()), ">=", 1.0)
    return rep


SUITES = {
    "vsa-upper": suite_vsa_upper,
    "vsa-noisy": suite_vsa_noisy,
    "lb-general": suite_lb_general,
    "memoryless": suite_memoryless,
    "delayed-reduction": suite_delayed_reduction,
    "oracle-tails": suite_oracle_tails,
    "cde-stack": suite_cde_stack,
    "coverability": suite_coverability,
    "cb-lower": suite_cb_lower,
    "dec-sanity": suite_dec_sanity,
    "e2d-regret": suite_e2d_regret,
    "properties": suite_properties,
}


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, fast: bool = False) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(name)
    start = time.perf_counter()
    report = SUITES[name](fast=fast)
    report.seconds = time.perf_counter() - start
    return report
