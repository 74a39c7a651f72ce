"""Bayesian belief filtering and closed-form arm statistics.

Everything here is a pure function of immutable inputs.  The filter
follows the likelihood-then-propagate order: the reward likelihood is
attached to the pre-transition state, after which the kernel propagates
the reweighted mass one step forward.
"""

from __future__ import annotations

import math

import numpy as np

from .models import (
    BeliefState,
    DegenerateEvidenceError,
    InfoArmStats,
    RewardModel,
    TransitionKernel,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def gaussian_likelihood(reward: float, mean: float, std: float) -> float:
    """Normal probability density of ``reward`` under N(mean, std**2)."""
    if not (math.isfinite(reward) and math.isfinite(mean) and math.isfinite(std)):
        raise ValueError("gaussian_likelihood requires finite inputs")
    if std <= 0:
        raise ValueError("std must be strictly positive")
    z = (reward - mean) / std
    return math.exp(-0.5 * z * z) / (std * math.sqrt(2.0 * math.pi))


def reward_log_likelihoods(model: RewardModel, arm: int, context: int, reward: float) -> np.ndarray:
    """Per-state log density of an observed reward for one (arm, context).

    Kept in log space because tight arms (std around 0.01) produce
    densities spanning hundreds of orders of magnitude.
    """
    means = model.means[arm, context, :]
    stds = model.stds[arm, context, :]
    z = (reward - means) / stds
    return -0.5 * z * z - np.log(stds) - _LOG_SQRT_2PI


def likelihoods_from_log(log_liks: np.ndarray) -> np.ndarray:
    """Exponentiate log likelihoods after subtracting the maximum.

    The common scale factor cancels in any normalized Bayes update, so
    this guards against underflow without changing the posterior.
    """
    log_liks = np.asarray(log_liks, dtype=float)
    return np.exp(log_liks - log_liks.max())


def posterior_update(belief: BeliefState, kernel: TransitionKernel, likelihoods) -> BeliefState:
    """One Bayes-rule filter step.

    The new mass of state s' is proportional to
    ``sum_s belief[s] * likelihood[s] * kernel[s, s']``.  Raises
    :class:`DegenerateEvidenceError` when every state ends up with zero
    mass; the caller chooses the fallback (policies reset to the
    transition-propagated prior).
    """
    liks = np.asarray(likelihoods, dtype=float)
    if liks.shape != belief.probs.shape:
        raise ValueError("likelihoods must have one entry per state")
    if np.any(liks < 0):
        raise ValueError("likelihoods must be non-negative")
    weighted = belief.probs * liks
    propagated = weighted @ kernel.matrix
    total = propagated.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateEvidenceError("posterior update produced zero mass in every state")
    return BeliefState(propagated / total)


def propagate(belief: BeliefState, kernel: TransitionKernel) -> BeliefState:
    """Pure transition propagation (uniform-evidence update)."""
    return BeliefState(belief.probs @ kernel.matrix)


def entropy(belief: BeliefState) -> float:
    """Shannon entropy of the belief in bits, with 0*log2(0) == 0."""
    probs = belief.probs[belief.probs > 0]
    return float(-(probs * np.log2(probs)).sum())


def gaussian_kl(mean1: float, std1: float, mean2: float, std2: float) -> float:
    """KL divergence between two normals, D(N1 || N2), in nats."""
    if std1 <= 0 or std2 <= 0:
        raise ValueError("standard deviations must be strictly positive")
    return (
        math.log(std2 / std1)
        + (std1 * std1 + (mean1 - mean2) ** 2) / (2.0 * std2 * std2)
        - 0.5
    )


def _resolve_sets(model: RewardModel, arms, contexts) -> tuple[np.ndarray, np.ndarray]:
    if arms is None:
        arms = np.arange(model.num_arms)
    else:
        arms = np.asarray(arms, dtype=int)
    if contexts is None:
        contexts = np.arange(model.num_contexts)
    else:
        contexts = np.asarray(contexts, dtype=int)
    return arms, contexts


def mean_pairwise_kl(model: RewardModel, arm: int, arms=None, contexts=None) -> float:
    """Average divergence of every competing arm's distribution from ``arm``'s.

    The triple average runs over contexts, states, and the other arms of
    the (optionally restricted) arm set, with 1/|X|, 1/|S|, 1/|A|
    normalization.  The scored arm's distribution sits in the reference
    slot of the divergence, so arms whose rewards are tight and far from
    the rest of the set score high; this is what makes a low-variance
    probe arm stand out as informative.
    """
    arm_set, context_set = _resolve_sets(model, arms, contexts)
    total = 0.0
    for x in context_set:
        for s in range(model.num_states):
            inner = 0.0
            for other in arm_set:
                if other == arm:
                    continue
                inner += gaussian_kl(
                    model.means[other, x, s],
                    model.stds[other, x, s],
                    model.means[arm, x, s],
                    model.stds[arm, x, s],
                )
            total += inner / arm_set.size
    return total / (context_set.size * model.num_states)


def mean_pairwise_gap(model: RewardModel, arm: int, arms=None, contexts=None) -> float:
    """Signed mean reward advantage of ``arm`` over the rest of the set.

    Same triple average and normalization as :func:`mean_pairwise_kl`.
    Probe arms with deliberately low reward come out negative.
    """
    arm_set, context_set = _resolve_sets(model, arms, contexts)
    total = 0.0
    for x in context_set:
        for s in range(model.num_states):
            inner = 0.0
            for other in arm_set:
                if other == arm:
                    continue
                inner += model.means[arm, x, s] - model.means[other, x, s]
            total += inner / arm_set.size
    return total / (context_set.size * model.num_states)


def info_arm_stats(model: RewardModel, arms=None, contexts=None) -> InfoArmStats:
    """Divergence, gap, and usefulness ratio for every arm in the set."""
    arm_set, context_set = _resolve_sets(model, arms, contexts)
    mean_kl = np.array([mean_pairwise_kl(model, a, arm_set, context_set) for a in arm_set])
    mean_gap = np.array([mean_pairwise_gap(model, a, arm_set, context_set) for a in arm_set])
    return InfoArmStats(arms=arm_set, mean_kl=mean_kl, mean_gap=mean_gap)


def best_info_arm(model: RewardModel, arms=None, contexts=None) -> tuple[int, InfoArmStats]:
    """Arm maximizing mean divergence over squared mean gap.

    Ties break toward the lowest arm index.  Arms with both zero
    divergence and zero gap carry a -inf ratio and can only win when no
    arm discriminates at all, in which case the first arm is returned.
    """
    stats = info_arm_stats(model, arms, contexts)
    winner = int(stats.arms[np.argmax(stats.ratio)])
    return winner, stats


def single_step_regret_bound(model: RewardModel, arms=None, contexts=None) -> float:
    """Largest max-arm minus min-arm mean gap over all (context, state) pairs."""
    arm_set, context_set = _resolve_sets(model, arms, contexts)
    sub = model.means[np.ix_(arm_set, context_set, np.arange(model.num_states))]
    return float((sub.max(axis=0) - sub.min(axis=0)).max())


def expected_dwell_time(kernel: TransitionKernel, belief: BeliefState, horizon_cap: float = math.inf) -> float:
    """Belief-weighted expected steps before the chain leaves its state.

    A state with self-transition probability p contributes the geometric
    dwell time 1/(1-p); absorbing states contribute the horizon cap, and
    the weighted total is itself capped there.
    """
    if horizon_cap <= 0:
        raise ValueError("horizon_cap must be positive")
    stay = kernel.stay_probabilities()
    per_state = np.where(stay < 1.0, 1.0 / np.where(stay < 1.0, 1.0 - stay, 1.0), horizon_cap)
    value = float(belief.probs @ per_state)
    return min(value, horizon_cap)
