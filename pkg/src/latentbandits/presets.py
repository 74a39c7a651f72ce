"""Benchmark reward models used by the synthetic experiment recipes.

The two-state table has two nearly interchangeable high-reward arms whose
best arm swaps between the states, plus a low-reward probe arm whose tight
distribution separates the states in one or two plays.  The five-state
table extends the same construction to a start state and two two-stage
branches: stage-one states of the two branches are mutually confusable, as
are the stage-two states, and the last arm is a low-reward probe that
separates every state.
"""

from __future__ import annotations

import numpy as np

from .models import RewardModel

TWO_STATE_MEANS = np.array(
    [
        [2.1, 2.05],
        [2.05, 2.1],
        [1.7, 1.5],
    ]
)

# Raw five-state table; columns are ordered (a1, b1, a2, b2, start) so the
# confusable pairs sit next to each other: columns 0/1 and columns 2/3.
FIVE_STATE_TABLE = np.array(
    [
        [2.1, 2.05, 1.40, 1.45, 1.0],
        [2.05, 2.1, 1.45, 1.40, 0.95],
        [2.0, 1.9, 1.50, 1.55, 1.05],
        [2.05, 2.1, 1.55, 1.50, 1.1],
        [1.0, 0.9, 0.8, 0.7, 0.6],
    ]
)

# Reorder the raw columns to the branch-graph state layout
# (start, a1, a2, b1, b2) used by the two_branch/skip_chain kernels.
_BRANCH_LAYOUT = [4, 0, 2, 1, 3]

PROBE_STD = 0.01
BASE_STD = 0.5


def two_state_model(probe_std: float = PROBE_STD) -> RewardModel:
    """Two-state benchmark; ``probe_std`` sets the probe arm's noise."""
    stds = np.array(
        [
            [BASE_STD, BASE_STD],
            [BASE_STD, BASE_STD],
            [probe_std, probe_std],
        ]
    )
    return RewardModel(means=TWO_STATE_MEANS, stds=stds)


def five_state_model(probe_std: float = PROBE_STD) -> RewardModel:
    """Five-state benchmark in branch layout: state 0 is the start state,
    states 1-2 are branch A's stages, states 3-4 branch B's."""
    means = FIVE_STATE_TABLE[:, _BRANCH_LAYOUT]
    stds = np.full_like(means, BASE_STD)
    stds[-1, :] = probe_std
    return RewardModel(means=means, stds=stds)


def five_state_model_raw(probe_std: float = PROBE_STD) -> RewardModel:
    """Five-state benchmark with the raw column order of the table."""
    stds = np.full_like(FIVE_STATE_TABLE, BASE_STD)
    stds[-1, :] = probe_std
    return RewardModel(means=FIVE_STATE_TABLE, stds=stds)


PRESETS = {
    "two_state": two_state_model,
    "two_state_loose_probe": lambda: two_state_model(probe_std=0.05),
    "five_state": five_state_model,
    "five_state_raw": five_state_model_raw,
}
