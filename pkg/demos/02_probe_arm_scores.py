"""Scoring arms for information content.

For each arm: the mean pairwise divergence of the other arms' reward
distributions from its own (how distinctive its rewards are), the mean
reward gap (what playing it costs), and the ratio that picks the probe
arm.  The deliberately low-reward, low-variance arm wins by orders of
magnitude in both benchmark models.

Run: python demos/02_probe_arm_scores.py
"""

import numpy as np

import latentbandits as lb

for name, model in [("two-state", lb.two_state_model()), ("five-state", lb.five_state_model())]:
    probe, stats = lb.best_info_arm(model)
    bound = lb.single_step_regret_bound(model)
    print(f"=== {name} benchmark (worst single-step regret {bound:.2f}) ===")
    print(f"{'arm':>4} {'mean divergence':>16} {'mean gap':>10} {'ratio':>12}")
    for i, arm in enumerate(stats.arms):
        marker = "  <- probe" if arm == probe else ""
        print(f"{arm:>4} {stats.mean_kl[i]:>16.3f} {stats.mean_gap[i]:>10.3f} "
              f"{stats.ratio[i]:>12.1f}{marker}")
    print()

print("the ratio is invariant to shifting every mean by a constant:")
model = lb.two_state_model()
shifted = lb.RewardModel(means=model.means + 10.0, stds=model.stds)
print(f"  probe arm unshifted: {lb.best_info_arm(model)[0]}, "
      f"shifted by +10: {lb.best_info_arm(shifted)[0]}")
