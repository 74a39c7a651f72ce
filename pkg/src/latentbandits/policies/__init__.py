"""Decision-making agents behind a common step/observe interface."""

from __future__ import annotations

import numpy as np

from ..models import RewardModel, TransitionKernel
from .agemts import AGEmTS
from .base import BeliefPolicy, Policy
from .baselines import (
    CDTS,
    CDUCB,
    EXP4S,
    MUCB,
    CDLinTS,
    CDLinUCB,
    OraclePolicy,
    UniformRandom,
    exp4s_update,
)
from .detectors import ChangeDetectorState, cd_linear_check, cd_scalar_check
from .explore import (
    ExploreCommit,
    ExploreThenPS,
    belief_forecast_two_state,
    explore_commit_sample_size,
    explore_then_ps_tau,
)
from .mts import MTS
from .rollout import (
    RolloutResult,
    reward_estimator,
    rollout_info_likelihood,
    rollout_likelihood_matrix,
)

POLICY_NAMES = (
    "mts",
    "agemts",
    "explore_commit",
    "explore_then_ps",
    "cducb",
    "cdts",
    "exp4s",
    "mucb",
    "cd_linucb",
    "cd_lints",
    "oracle",
    "uniform_random",
)


def make_policy(
    name: str,
    model: RewardModel,
    kernel: TransitionKernel,
    prior,
    horizon: int,
    rng: np.random.Generator,
    params: dict | None = None,
    arm_features: np.ndarray | None = None,
) -> Policy:
    """Build a policy from its registry name and a parameter map.

    This is the construction path used by experiment configs; parameter
    keys are passed through to the policy constructor.
    """
    params = dict(params or {})
    if name == "mts":
        return MTS(model, kernel, prior, rng=rng)
    if name == "agemts":
        return AGEmTS(model, kernel, prior, horizon=horizon, rng=rng, **params)
    if name == "explore_commit":
        from .explore import explore_commit_sample_size as size

        info_arm = params.pop("info_arm")
        if "n_e" not in params:
            params["n_e"] = size(
                params.pop("delta"),
                params.pop("std1"),
                params.pop("std2"),
                params.pop("z_alpha", 1.96),
                params.pop("z_beta", 0.84),
            )
        return ExploreCommit(model, kernel, prior, info_arm=info_arm, rng=rng, **params)
    if name == "explore_then_ps":
        info_arm = params.pop("info_arm")
        if "tau" not in params:
            params["tau"] = explore_then_ps_tau(model, info_arm, horizon)
        return ExploreThenPS(model, kernel, prior, info_arm=info_arm, rng=rng, **params)
    if name == "cducb":
        return CDUCB(model, rng=rng, **params)
    if name == "cdts":
        return CDTS(model, rng=rng, **params)
    if name == "exp4s":
        return EXP4S(model, horizon=horizon, rng=rng, **params)
    if name == "mucb":
        return MUCB(model, rng=rng, **params)
    if name == "cd_linucb":
        if arm_features is None:
            raise ValueError("cd_linucb requires arm features")
        return CDLinUCB(model, arm_features, rng=rng, **params)
    if name == "cd_lints":
        if arm_features is None:
            raise ValueError("cd_lints requires arm features")
        return CDLinTS(model, arm_features, rng=rng, **params)
    if name == "oracle":
        return OraclePolicy(model, rng=rng)
    if name == "uniform_random":
        return UniformRandom(rng=rng)
    raise ValueError(f"unknown policy name {name!r}")
