"""Latent bandit environment generation and stepping.

Environments own the hidden state trajectory.  Transition structures come
from small graph families: a fully connected chain, a two-branch chain
whose start state forks into one of two branches, and the same branch
graph with cross-branch skip edges.  Branch-type graphs designate state 0
as a start state that transitions away immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import RewardModel, TransitionKernel

GRAPH_KINDS = ("fully_connected", "skip_chain", "two_branch", "custom")


class ProtocolViolationError(RuntimeError):
    """A policy chose an arm outside the offered arm set."""


@dataclass(frozen=True)
class TransitionGraphSpec:
    """Recipe for building a transition kernel.

    ``stay_prob`` is the self-transition probability of every non-start
    state; the remaining mass is split over the graph's out-edges, either
    equally or by a seeded uniform draw on the simplex.  Edges absent from
    the graph are exactly zero in the kernel.
    """

    kind: str
    num_states: int
    stay_prob: float = 0.995
    off_diagonal: str = "uniform"
    seed: int = 0
    edges: tuple = None  # only for kind == "custom": ((src, dst), ...)

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if not 0.0 < self.stay_prob <= 1.0:
            raise ValueError("stay_prob must lie in (0, 1]")
        if self.off_diagonal not in ("uniform", "random_nonuniform"):
            raise ValueError(f"unknown off_diagonal mode {self.off_diagonal!r}")
        if self.num_states < 2:
            raise ValueError("need at least 2 states")
        if self.kind in ("two_branch", "skip_chain") and (
            self.num_states < 5 or self.num_states % 2 == 0
        ):
            raise ValueError(f"{self.kind} graphs need an odd number of states >= 5")
        if self.kind == "custom" and self.edges is None:
            raise ValueError("custom graphs require an explicit edge list")
        if self.edges is not None:
            object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))


def _graph_edges(spec: TransitionGraphSpec) -> tuple[dict[int, list[int]], set[int]]:
    """Out-edge adjacency (self-loops excluded) plus the start-state set.

    Start states carry no self mass: they hand the chain to a branch on
    the very first transition.
    """
    n = spec.num_states
    out: dict[int, list[int]] = {s: [] for s in range(n)}
    starts: set[int] = set()
    if spec.kind == "fully_connected":
        for s in range(n):
            out[s] = [t for t in range(n) if t != s]
    elif spec.kind in ("two_branch", "skip_chain"):
        if n < 5 or n % 2 == 0:
            raise ValueError(f"{spec.kind} graphs need an odd number of states >= 5")
        starts.add(0)
        half = (n - 1) // 2
        branch_a = list(range(1, 1 + half))
        branch_b = list(range(1 + half, n))
        out[0] = [branch_a[0], branch_b[0]]
        for branch in (branch_a, branch_b):
            for i, s in enumerate(branch):
                out[s] = [branch[(i + 1) % len(branch)]]
        if spec.kind == "skip_chain":
            # cross-branch skips from each branch head to the other branch's tail
            out[branch_a[0]].append(branch_b[-1])
            out[branch_b[0]].append(branch_a[-1])
    else:  # custom
        for src, dst in spec.edges:
            if src == dst:
                continue
            out[src].append(dst)
    return out, starts


def build_transition_kernel(spec: TransitionGraphSpec) -> TransitionKernel:
    """Materialize the row-stochastic kernel described by ``spec``."""
    out, starts = _graph_edges(spec)
    n = spec.num_states
    rng = np.random.default_rng(spec.seed)
    matrix = np.zeros((n, n))
    for s in range(n):
        edges = out[s]
        stay = 0.0 if s in starts else spec.stay_prob
        spread = 1.0 - stay
        if not edges:
            if spread > 0:
                raise ValueError(
                    f"state {s} has no out-edges but stay_prob {spec.stay_prob} < 1"
                )
            matrix[s, s] = 1.0
            continue
        matrix[s, s] = stay
        if spec.off_diagonal == "uniform" or len(edges) == 1:
            matrix[s, edges] = spread / len(edges)
        else:
            weights = rng.dirichlet(np.ones(len(edges)))
            matrix[s, edges] = spread * weights
        # exact stochasticity despite float splits
        matrix[s, edges[-1]] += 1.0 - matrix[s].sum()
    return TransitionKernel(matrix)


@dataclass
class EnvState:
    """Mutable environment bookkeeping: current hidden state and clock."""

    true_state: int
    time: int = 1
    schedule: list[int] | None = None

    def __post_init__(self):
        if self.schedule is not None:
            self.schedule = sorted(int(t) for t in self.schedule)
            if len(set(self.schedule)) != len(self.schedule):
                raise ValueError("schedule times must be strictly increasing")


@dataclass(frozen=True)
class StepOutcome:
    """What one environment step produced. ``true_state`` is logged for
    regret accounting and never shown to policies."""

    context: int
    offered_arms: np.ndarray
    reward: float
    optimal_mean: float
    true_state: int


def sample_arm_set(catalog_size: int, set_size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample of distinct arm indices."""
    if set_size > catalog_size:
        raise ValueError("set_size cannot exceed catalog_size")
    return np.sort(rng.choice(catalog_size, size=set_size, replace=False))


def advance_state(env: EnvState, kernel: TransitionKernel, rng: np.random.Generator) -> int:
    """Advance the hidden state by one step and return the new state.

    A fixed schedule overrides kernel sampling: between scheduled times
    the state is frozen, and at a scheduled time it jumps to a different
    state drawn from the kernel's off-diagonal mass (two-state chains
    therefore flip deterministically).
    """
    if env.schedule is not None:
        if env.time in env.schedule:
            row = kernel.matrix[env.true_state].copy()
            row[env.true_state] = 0.0
            total = row.sum()
            if total <= 0:
                # absorbing row: fall back to any other state uniformly
                row = np.ones_like(row)
                row[env.true_state] = 0.0
                total = row.sum()
            env.true_state = int(rng.choice(row.size, p=row / total))
    else:
        env.true_state = int(rng.choice(kernel.num_states, p=kernel.matrix[env.true_state]))
    env.time += 1
    return env.true_state


def env_step(
    env: EnvState,
    kernel: TransitionKernel,
    model: RewardModel,
    chosen_arm: int,
    rng: np.random.Generator,
    context: int = 0,
    offered_arms=None,
) -> StepOutcome:
    """Draw the reward for ``chosen_arm`` and move the hidden state.

    The reward is Gaussian around the current state's mean; the state
    advances afterwards, so the observation always reflects the state in
    force when the arm was chosen.
    """
    if offered_arms is None:
        offered = np.arange(model.num_arms)
    else:
        offered = np.asarray(offered_arms, dtype=int)
    if chosen_arm not in offered:
        raise ProtocolViolationError(
            f"arm {chosen_arm} is not in the offered set at time {env.time}"
        )
    state = env.true_state
    mean = model.mean(chosen_arm, context, state)
    std = model.std(chosen_arm, context, state)
    reward = float(rng.normal(mean, std))
    optimal_mean = float(model.means[offered, context, state].max())
    advance_state(env, kernel, rng)
    return StepOutcome(
        context=context,
        offered_arms=offered,
        reward=reward,
        optimal_mean=optimal_mean,
        true_state=state,
    )


@dataclass(frozen=True)
class Trajectory:
    """Pre-generated environment path shared by all policies of one run.

    ``states[t]`` is the hidden state in force at step t, ``noise[t]`` the
    standard normal draw that perturbs whichever arm a policy plays, so
    policies are compared on identical randomness.
    """

    states: np.ndarray
    contexts: np.ndarray
    arm_sets: list
    noise: np.ndarray

    @property
    def horizon(self) -> int:
        return self.states.shape[0]


def generate_trajectory(
    model: RewardModel,
    kernel: TransitionKernel,
    prior: np.ndarray,
    horizon: int,
    rng: np.random.Generator,
    schedule=None,
    arm_set_size: int | None = None,
    context_sampler=None,
) -> Trajectory:
    """Roll the hidden chain forward and fix contexts, arm sets and noise."""
    prior = np.asarray(prior, dtype=float)
    start = int(rng.choice(prior.size, p=prior))
    env = EnvState(true_state=start, schedule=list(schedule) if schedule else None)
    states = np.empty(horizon, dtype=int)
    contexts = np.empty(horizon, dtype=int)
    arm_sets = []
    for t in range(horizon):
        states[t] = env.true_state
        contexts[t] = 0 if context_sampler is None else int(context_sampler(rng))
        if arm_set_size is None:
            arm_sets.append(np.arange(model.num_arms))
        else:
            arm_sets.append(sample_arm_set(model.num_arms, arm_set_size, rng))
        advance_state(env, kernel, rng)
    noise = rng.standard_normal(horizon)
    return Trajectory(states=states, contexts=contexts, arm_sets=arm_sets, noise=noise)
