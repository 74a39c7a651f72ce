"""Command-line benchmark harness.

Subcommands:
  run <config>          run an experiment config (JSON file or recipe name)
  sweep <config>        run the config's sweep grid
  build-model <config>  build a reward model from a ratings dataset
  validate <config>     check a config and exit

Exit codes: 0 on success, 2 on configuration errors, 3 on runtime
failures.  The output root defaults to $LBL_OUT_DIR, then ./results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import datasets
from .harness import (
    ConfigError,
    ExperimentConfig,
    default_out_dir,
    emit_outputs,
    load_config,
    run_experiment,
    save_config,
    sweep,
)
from .models import model_to_dict
from .recipes import RECIPES, get_recipe


def _resolve_config(ref: str, args) -> ExperimentConfig:
    if os.path.exists(ref):
        config = load_config(ref)
    elif ref in RECIPES:
        config = get_recipe(ref)
    else:
        raise ConfigError(f"{ref!r} is neither a config file nor a known recipe")
    doc = config.to_dict()
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.runs is not None:
        doc["num_runs"] = args.runs
    if args.horizon is not None:
        doc["horizon"] = args.horizon
    if args.out_dir is not None:
        doc["out_dir"] = args.out_dir
    return ExperimentConfig.from_dict(doc)


def _out_dir_for(config: ExperimentConfig) -> str:
    return config.out_dir or os.path.join(default_out_dir(), config.name)


def _cmd_run(args) -> int:
    config = _resolve_config(args.config, args)
    out_dir = _out_dir_for(config)
    results = run_experiment(config, out_dir=out_dir)
    paths = emit_outputs(results, out_dir)
    final = {
        name: float(results.regret_matrix(name)[:, -1].mean())
        for name in results.policy_names
    }
    print(f"ran {config.name}: {config.num_runs} runs x {config.horizon} steps")
    for name, value in final.items():
        print(f"  final mean regret {name}: {value:.3f}")
    print(f"wrote {paths['aggregate']} and traces under {out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    config = _resolve_config(args.config, args)
    out_dir = _out_dir_for(config)
    rows = sweep(config, out_dir=out_dir)
    print(f"swept {config.name}: {len(rows)} grid points -> {out_dir}/sweep.csv")
    return 0


def _cmd_validate(args) -> int:
    config = _resolve_config(args.config, args)
    config.validate()
    print(f"config {config.name!r} is valid")
    return 0


def _cmd_build_model(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read dataset config: {exc}") from exc
    try:
        ratings_file = doc["ratings_file"]
        num_states = int(doc.get("num_states", 5))
    except KeyError as exc:
        raise ConfigError(f"dataset config is missing {exc}") from exc
    out_dir = args.out_dir or doc.get("out_dir") or os.path.join(default_out_dir(), "dataset_model")
    os.makedirs(out_dir, exist_ok=True)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))

    table = datasets.ingest_ratings(
        ratings_file,
        min_user_ratings=int(doc.get("min_user_ratings", 200)),
        min_item_ratings=int(doc.get("min_item_ratings", 200)),
    )
    print(f"ingested {len(table)} ratings: {table.num_users} users x {table.num_items} items")
    factors = datasets.pmf_train(
        table,
        d=int(doc.get("d", 10)),
        lambda_u=float(doc.get("lambda_u", 0.001)),
        lambda_v=float(doc.get("lambda_v", 0.001)),
        learning_rate=float(doc.get("learning_rate", 2e-4)),
        validation_fraction=float(doc.get("validation_fraction", 0.1)),
        epochs=int(doc.get("epochs", 100)),
        seed=seed,
    )
    print(f"trained factors, validation RMSE {factors.validation_rmse:.4f}")
    clusters = datasets.kmeans_users(factors, k=num_states, seed=seed)
    pairing = [tuple(p) for p in doc.get("pairing", [[1, 3], [2, 4]])]
    super_user = datasets.sample_super_user(factors, clusters, pairing, seed=seed)
    catalog = np.arange(table.num_items)
    model = datasets.build_reward_model(
        factors,
        super_user,
        catalog,
        variance_mode=doc.get("variance_mode", "fixed"),
        params=doc.get("variance_params", {}),
        seed=seed,
    )
    model_path = os.path.join(out_dir, "reward_model.json")
    model_doc = model_to_dict(model)
    model_doc["features"] = factors.V[catalog].tolist()
    with open(model_path, "w", encoding="utf-8") as handle:
        json.dump(model_doc, handle, sort_keys=True)
        handle.write("\n")
    provenance = {
        "ratings_file": ratings_file,
        "seed": seed,
        "num_users": table.num_users,
        "num_items": table.num_items,
        "num_ratings": len(table),
        "validation_rmse": factors.validation_rmse,
        "pairing": [list(p) for p in pairing],
        "super_user": list(super_user.users),
        "variance_mode": doc.get("variance_mode", "fixed"),
        "hyperparameters": {
            "d": int(doc.get("d", 10)),
            "lambda_u": float(doc.get("lambda_u", 0.001)),
            "lambda_v": float(doc.get("lambda_v", 0.001)),
            "learning_rate": float(doc.get("learning_rate", 2e-4)),
            "validation_fraction": float(doc.get("validation_fraction", 0.1)),
            "epochs": int(doc.get("epochs", 100)),
        },
    }
    with open(os.path.join(out_dir, "provenance.json"), "w", encoding="utf-8") as handle:
        json.dump(provenance, handle, indent=2, sort_keys=True)
        handle.write("\n")
    for graph in ("full", "skip", "branch"):
        config = get_recipe(f"movielens_{graph}", model_file=model_path)
        save_config(config, os.path.join(out_dir, f"movielens_{graph}.json"))
    print(f"wrote {model_path} plus provenance and run configs to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latent-bandits", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (
        ("run", _cmd_run),
        ("sweep", _cmd_sweep),
        ("build-model", _cmd_build_model),
        ("validate", _cmd_validate),
    ):
        cmd = sub.add_parser(name)
        cmd.add_argument("config", help="config JSON path or recipe name")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--runs", type=int, default=None)
        cmd.add_argument("--horizon", type=int, default=None)
        cmd.add_argument("--out-dir", default=None)
        cmd.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
