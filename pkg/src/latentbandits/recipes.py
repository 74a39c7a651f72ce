"""Named experiment configurations.

Each recipe reproduces one benchmark scenario at its default scale; the
CLI and tests override horizon/runs/seed as needed.  Dataset-backed
recipes need a model file produced by the ``build-model`` command.
"""

from __future__ import annotations

from .harness import ConfigError, EnvironmentSpec, ExperimentConfig, PolicySpec
from .policies import explore_commit_sample_size

# detector windows/thresholds are stated explicitly so they land in run
# metadata verbatim
_DETECTOR_PARAMS = {"window_size": 50, "threshold": 15.0}
_FULL_POLICY_SET = (
    PolicySpec("mts"),
    PolicySpec("agemts"),
    PolicySpec("cducb", dict(_DETECTOR_PARAMS)),
    PolicySpec("cdts", dict(_DETECTOR_PARAMS)),
    PolicySpec("exp4s"),
    PolicySpec("mucb"),
)


def _config(name, environment, default_policies, default_horizon, default_runs, **overrides):
    config = ExperimentConfig(
        environment=environment,
        policies=tuple(PolicySpec(p) if isinstance(p, str) else p for p in default_policies),
        horizon=default_horizon,
        num_runs=default_runs,
        name=name,
    )
    return _override(config, overrides)


def _override(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    if not overrides:
        return config
    allowed = {"horizon", "num_runs", "base_seed", "out_dir", "policies", "sweep_axes"}
    unknown = set(overrides) - allowed
    if unknown:
        raise ConfigError(f"unknown recipe overrides: {sorted(unknown)}")
    doc = config.to_dict()
    if "policies" in overrides:
        doc["policies"] = [
            p.to_dict() if isinstance(p, PolicySpec) else {"name": p, "params": {}}
            for p in overrides.pop("policies")
        ]
    doc.update(overrides)
    return ExperimentConfig.from_dict(doc)


def two_state_stationary(**overrides) -> ExperimentConfig:
    """Stationary two-state benchmark: tight probe arm, identity kernel."""
    env = EnvironmentSpec(model={"preset": "two_state"}, kernel={"identity": True})
    return _config("two_state_stationary", env, _FULL_POLICY_SET, 2000, 100, **overrides)


def two_state_random_switch(**overrides) -> ExperimentConfig:
    """Two-state chain switching randomly about every 200 steps."""
    env = EnvironmentSpec(
        model={"preset": "two_state"},
        kernel={"graph": {"kind": "fully_connected", "num_states": 2, "stay_prob": 0.995}},
    )
    policies = (
        PolicySpec("mts"),
        PolicySpec("agemts"),
        PolicySpec("cducb", dict(_DETECTOR_PARAMS)),
        PolicySpec("cdts", dict(_DETECTOR_PARAMS)),
        PolicySpec("exp4s"),
    )
    return _config("two_state_random_switch", env, policies, 1000, 100, **overrides)


def two_state_fixed_200(**overrides) -> ExperimentConfig:
    """Two-state setting with state flips at fixed 200-step intervals.

    Policies still model the switching with the random 0.995-stay kernel;
    only the environment follows the fixed schedule.
    """
    env = EnvironmentSpec(
        model={"preset": "two_state"},
        kernel={"graph": {"kind": "fully_connected", "num_states": 2, "stay_prob": 0.995}},
        schedule=(200, 400, 600, 800),
    )
    policies = (
        PolicySpec("mts"),
        PolicySpec("agemts"),
        PolicySpec("cducb", dict(_DETECTOR_PARAMS)),
        PolicySpec("cdts", dict(_DETECTOR_PARAMS)),
        PolicySpec("exp4s"),
    )
    return _config("two_state_fixed_200", env, policies, 1000, 100, **overrides)


def two_state_explore_strategies(**overrides) -> ExperimentConfig:
    """Posterior sampling vs explore-commit vs explore-then-PS.

    Uses the looser 0.05-std probe arm.  The explore-commit budget comes
    from the z-test sample size at delta 0.2 and std 0.5 (49 plays, the
    two-sided 95%/80% design); explore-then-PS picks its own budget by
    minimizing the forecast objective.
    """
    n_e = explore_commit_sample_size(0.2, 0.5, 0.5, 1.96, 0.84)
    env = EnvironmentSpec(model={"preset": "two_state_loose_probe"}, kernel={"identity": True})
    policies = (
        PolicySpec("mts"),
        PolicySpec("explore_commit", {"info_arm": 2, "n_e": n_e}),
        PolicySpec("explore_then_ps", {"info_arm": 2}),
    )
    return _config("two_state_explore_strategies", env, policies, 1000, 100, **overrides)


def _five_state(name: str, kind: str, **overrides) -> ExperimentConfig:
    env = EnvironmentSpec(
        model={"preset": "five_state"},
        kernel={"graph": {"kind": kind, "num_states": 5, "stay_prob": 0.995}},
        prior={"point": 0},
    )
    return _config(name, env, _FULL_POLICY_SET, 1000, 100, **overrides)


def five_state_full(**overrides) -> ExperimentConfig:
    return _five_state("five_state_full", "fully_connected", **overrides)


def five_state_skip(**overrides) -> ExperimentConfig:
    return _five_state("five_state_skip", "skip_chain", **overrides)


def five_state_branch(**overrides) -> ExperimentConfig:
    return _five_state("five_state_branch", "two_branch", **overrides)


def five_state_nonuniform(**overrides) -> ExperimentConfig:
    """Branch graph with per-run random non-uniform off-diagonal masses
    spreading 0.05 of each row."""
    env = EnvironmentSpec(
        model={"preset": "five_state"},
        kernel={
            "graph": {
                "kind": "two_branch",
                "num_states": 5,
                "stay_prob": 0.95,
                "off_diagonal": "random_nonuniform",
            }
        },
        prior={"point": 0},
    )
    return _config("five_state_nonuniform", env, ("mts", "agemts"), 1000, 100, **overrides)


def _movielens(name: str, kind: str, model_file: str | None, **overrides) -> ExperimentConfig:
    if model_file is None:
        raise ConfigError(
            f"recipe {name!r} needs a model file; build one with the build-model command"
        )
    env = EnvironmentSpec(
        model={"file": model_file},
        kernel={"graph": {"kind": kind, "num_states": 5, "stay_prob": 0.95}},
        prior={"point": 0},
        arm_set_size=20,
    )
    policies = (
        PolicySpec("mts"),
        PolicySpec("agemts"),
        PolicySpec("cducb", dict(_DETECTOR_PARAMS)),
        PolicySpec("cdts", dict(_DETECTOR_PARAMS)),
        PolicySpec("exp4s"),
    )
    return _config(name, env, policies, 1000, 100, **overrides)


def movielens_full(model_file=None, **overrides) -> ExperimentConfig:
    return _movielens("movielens_full", "fully_connected", model_file, **overrides)


def movielens_skip(model_file=None, **overrides) -> ExperimentConfig:
    return _movielens("movielens_skip", "skip_chain", model_file, **overrides)


def movielens_branch(model_file=None, **overrides) -> ExperimentConfig:
    return _movielens("movielens_branch", "two_branch", model_file, **overrides)


_REGION_AXES = {
    "probe_gap": [0.1, 0.4, 0.8, 1.6, 3.2, 6.4],
    "probe_sigma": [0.01, 0.05, 0.25, 0.5],
}


def regions_stationary(**overrides) -> ExperimentConfig:
    """Probe-arm cost/noise sweep in the stationary two-state setting."""
    env = EnvironmentSpec(model={"preset": "two_state"}, kernel={"identity": True})
    config = _config("regions_stationary", env, ("mts", "agemts"), 1000, 100, **overrides)
    if config.sweep_axes is None:
        config = _override(config, {"sweep_axes": dict(_REGION_AXES)})
    return config


def regions_nonstationary(**overrides) -> ExperimentConfig:
    """Same sweep with random 200-step-scale switching."""
    env = EnvironmentSpec(
        model={"preset": "two_state"},
        kernel={"graph": {"kind": "fully_connected", "num_states": 2, "stay_prob": 0.995}},
    )
    config = _config("regions_nonstationary", env, ("mts", "agemts"), 1000, 100, **overrides)
    if config.sweep_axes is None:
        config = _override(config, {"sweep_axes": dict(_REGION_AXES)})
    return config


RECIPES = {
    "two_state_stationary": two_state_stationary,
    "two_state_random_switch": two_state_random_switch,
    "two_state_fixed_200": two_state_fixed_200,
    "two_state_explore_strategies": two_state_explore_strategies,
    "five_state_full": five_state_full,
    "five_state_skip": five_state_skip,
    "five_state_branch": five_state_branch,
    "five_state_nonuniform": five_state_nonuniform,
    "movielens_full": movielens_full,
    "movielens_skip": movielens_skip,
    "movielens_branch": movielens_branch,
    "regions_stationary": regions_stationary,
    "regions_nonstationary": regions_nonstationary,
}


def get_recipe(name: str, **overrides) -> ExperimentConfig:
    if name not in RECIPES:
        raise ConfigError(f"unknown recipe {name!r}; known: {sorted(RECIPES)}")
    return RECIPES[name](**overrides)
