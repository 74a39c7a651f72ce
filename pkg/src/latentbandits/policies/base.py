"""Common policy interface.

Every agent exposes ``step(context, offered_arms) -> arm`` followed by
``observe(reward)``.  A policy instance is single-threaded: it owns a
mutable belief/history and consumes randomness only through the generator
injected at construction, so identical seeds yield identical traces.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..belief import likelihoods_from_log, posterior_update, propagate, reward_log_likelihoods
from ..models import BeliefState, DegenerateEvidenceError, RewardModel, TransitionKernel


class Policy:
    """Base class; subclasses implement ``_choose`` and optionally ``_learn``."""

    name = "policy"
    wants_true_state = False

    def __init__(self, rng: np.random.Generator | None = None):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.time = 1
        self.history: deque | None = None
        self._pending: tuple[int, np.ndarray, int] | None = None
        self.last_info_play = False

    def reset(self) -> None:
        self.time = 1
        self._pending = None
        self.last_info_play = False
        if self.history is not None:
            self.history.clear()

    @property
    def belief(self) -> BeliefState | None:
        return None

    def step(self, context: int, offered_arms) -> int:
        offered = np.asarray(offered_arms, dtype=int)
        self.last_info_play = False
        arm = self._choose(context, offered)
        if arm not in offered:
            raise ValueError(f"{self.name} chose arm {arm} outside the offered set")
        self._pending = (context, offered, int(arm))
        return int(arm)

    def observe(self, reward: float) -> None:
        if self._pending is None:
            raise RuntimeError("observe() called before step()")
        context, offered, arm = self._pending
        self._pending = None
        if self.history is not None:
            self.history.append((arm, float(reward), context))
        self._learn(context, offered, arm, float(reward))
        self.time += 1

    def _choose(self, context: int, offered: np.ndarray) -> int:
        raise NotImplementedError

    def _learn(self, context: int, offered: np.ndarray, arm: int, reward: float) -> None:
        pass


class BeliefPolicy(Policy):
    """Shared machinery for policies that filter a belief state.

    The update attaches the observed reward's likelihood to the
    pre-transition state and then propagates through the kernel.  If the
    evidence is degenerate (all posterior mass underflows) the belief is
    reset to the transition-propagated prior.
    """

    def __init__(
        self,
        model: RewardModel,
        kernel: TransitionKernel,
        prior,
        rng: np.random.Generator | None = None,
    ):
        super().__init__(rng)
        self.model = model
        self.kernel = kernel
        self.prior = BeliefState(np.asarray(prior, dtype=float))
        self._belief = self.prior

    def reset(self) -> None:
        super().reset()
        self._belief = self.prior

    @property
    def belief(self) -> BeliefState:
        return self._belief

    def _learn(self, context: int, offered: np.ndarray, arm: int, reward: float) -> None:
        log_liks = reward_log_likelihoods(self.model, arm, context, reward)
        try:
            self._belief = posterior_update(self._belief, self.kernel, likelihoods_from_log(log_liks))
        except DegenerateEvidenceError:
            self._belief = propagate(self._belief, self.kernel)
