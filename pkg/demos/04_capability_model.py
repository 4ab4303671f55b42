"""
Why a second eigenvector should track hidden capabilities
=========================================================

The capability model gives the indices something real to recover: each
region draws a random set of latent capabilities, each industry requires
a random subset, and a region hosts an industry only when it has every
required capability. The latent capability count is the ground truth a
complexity index is supposed to rank. This script measures how well ECI
does, across independent worlds.
"""

import numpy as np
from scipy import stats

from regional_complexity import (InputMatrix, eci, generate_capability_model,
                                 prune_empty)

rhos = []
for seed in range(10):
    model, M = generate_capability_model(
        n_regions=200, n_industries=100,
        n_capabilities=2, p_region=0.5, p_industry=0.8, seed=seed)
    # regions with no industries carry no signal; drop them with their counts
    pruned, dropped = prune_empty(InputMatrix.from_array(M, "Presence"))
    counts = model.capability_counts()[pruned.region_catalog]
    rho = stats.spearmanr(eci(pruned).region_scores, counts).statistic
    rhos.append(rho)
    print(f"seed {seed}: kept {pruned.shape[0]:>3} regions, "
          f"Spearman(ECI, capability count) = {rho:+.3f}")

print()
print(f"mean over {len(rhos)} seeds: {np.mean(rhos):.3f}")
print("with only two capabilities the count takes three values, so the")
print("correlation is bounded well below 1 by ties; anything clearly above")
print("0.5 means the eigenvector is picking up the latent structure.")
