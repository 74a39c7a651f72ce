"""How the transition graph shapes the value of probing.

Three five-state chains share one reward table: a fully connected graph,
a two-branch chain whose start state forks, and the branch chain with
cross-branch skip edges.  Branch structure is where probing shines: one
probe play rules out an entire branch of future states.

Run: python demos/05_five_state_graphs.py               (about 40 s)
"""

import numpy as np

from latentbandits import build_transition_kernel, run_experiment, TransitionGraphSpec
from latentbandits.recipes import get_recipe

print("branch-graph kernel (state 0 forks, branches cycle internally):")
spec = TransitionGraphSpec(kind="two_branch", num_states=5, stay_prob=0.995)
print(np.round(build_transition_kernel(spec).matrix, 4), "\n")

summary = {}
for recipe in ("five_state_full", "five_state_skip", "five_state_branch"):
    config = get_recipe(recipe, num_runs=25, policies=("mts", "agemts"))
    results = run_experiment(config)
    probes = np.mean([run.info_flags["agemts"].sum() for run in results.runs])
    summary[recipe] = {
        "mts@600": results.regret_matrix("mts")[:, 599].mean(),
        "agemts@600": results.regret_matrix("agemts")[:, 599].mean(),
        "probes/run": probes,
    }

print(f"{'graph':>18} {'mts@600':>10} {'agemts@600':>12} {'probes/run':>12}")
for recipe, row in summary.items():
    print(f"{recipe:>18} {row['mts@600']:>10.1f} {row['agemts@600']:>12.1f} "
          f"{row['probes/run']:>12.1f}")

print("\nreducible branch graphs show the largest gap: identifying the")
print("branch once removes half the state space from consideration")
