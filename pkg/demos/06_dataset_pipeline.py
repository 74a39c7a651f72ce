"""From a ratings table to a playable reward model.

Builds the whole collaborative-filtering pipeline on synthetic data:
ingest and threshold-filter ratings, factorize with per-rating gradient
descent, cluster the user factors, draw a paired super user, and export
a per-state Gaussian reward model that the bandit harness can run.

With a real MovieLens-format file (user::item::rating::timestamp) the
same pipeline runs through the CLI:
    latent-bandits build-model dataset_config.json --out-dir results/ml

Run: python demos/06_dataset_pipeline.py                (about 10 s)
"""

import tempfile
from pathlib import Path

import numpy as np

from latentbandits import run_experiment
from latentbandits.datasets import (
    build_reward_model,
    ingest_ratings,
    kmeans_users,
    pmf_train,
    sample_super_user,
)
from latentbandits.harness import EnvironmentSpec, ExperimentConfig, PolicySpec

rng = np.random.default_rng(5)
n_users, n_items, d, k = 120, 90, 6, 5

centers = rng.normal(0, 1.3, size=(k, d))
labels_true = np.repeat(np.arange(k), n_users // k)
user_factors = centers[labels_true] + rng.normal(0, 0.15, size=(n_users, d))
item_factors = rng.normal(0, 0.8, size=(n_items, d))

lines = []
for u in range(n_users):
    for i in range(n_items):
        if rng.random() < 0.5:
            lines.append(f"{u}::{i}::{user_factors[u] @ item_factors[i]:.4f}::0")
ratings_path = Path(tempfile.mkdtemp()) / "ratings.dat"
ratings_path.write_text("\n".join(lines) + "\n")

table = ingest_ratings(ratings_path, min_user_ratings=20, min_item_ratings=20)
print(f"ingested {len(table)} ratings: {table.num_users} users x {table.num_items} items")

factors = pmf_train(table, d=d, lambda_u=1e-3, lambda_v=1e-3, learning_rate=0.03,
                    validation_fraction=0.1, epochs=40, seed=0)
print(f"factorization validation RMSE: {factors.validation_rmse:.4f}")

labels = kmeans_users(factors, k, seed=1)
print(f"clusters found: {np.unique(labels).size} "
      f"(planted clusters recovered: "
      f"{all(len(set(labels[labels_true[:table.num_users] == c])) == 1 for c in range(k))})")

super_user = sample_super_user(factors, labels, pairing=[(1, 3), (2, 4)], seed=2)
print(f"super user (one per cluster, states 1/3 and 2/4 paired): {super_user.users}")

model = build_reward_model(factors, super_user, np.arange(table.num_items),
                           variance_mode="fixed", params={"sigma": 0.25})
print(f"reward model: {model.num_arms} arms x {model.num_states} states, sigma 0.25\n")

config = ExperimentConfig(
    environment=EnvironmentSpec(
        model={"means": model.means.tolist(), "stds": model.stds.tolist()},
        kernel={"graph": {"kind": "two_branch", "num_states": 5, "stay_prob": 0.95}},
        prior={"point": 0},
        arm_set_size=20,
    ),
    policies=(PolicySpec("mts"), PolicySpec("agemts")),
    horizon=400,
    num_runs=10,
    name="dataset_demo",
)
results = run_experiment(config)
for name in results.policy_names:
    print(f"  final mean regret {name}: {results.regret_matrix(name)[:, -1].mean():.2f}")
