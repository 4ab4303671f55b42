"""
The three-model regression battery on simulated covariates
==========================================================

Complexity scores usually end up on the right-hand side of a growth
regression. The battery fits the same specification ladder three ways:
levels in one year (cross-section), long-difference growth between two
years (period growth), and a two-way fixed-effects panel with the lagged
score (LSDV). Here the data are simulated with known coefficients so the
printed tables can be read against the truth.
"""

import numpy as np
import pandas as pd

from regional_complexity import (ModelSpec, format_results_text,
                                 run_cross_section, run_panel_lsdv)

rng = np.random.default_rng(42)
n_regions, years = 150, list(range(2010, 2016))

rows = []
for r in range(n_regions):
    eci_path = rng.normal(size=len(years)).cumsum() * 0.3
    # the region intercept is tied to the region's persistent complexity,
    # which is exactly what biases a levels regression upward
    region_effect = 0.6 * eci_path.mean() + rng.normal(scale=0.3)
    for t, year in enumerate(years):
        eci_val = eci_path[t]
        rows.append({
            "entity": f"R{r:03d}", "year": year, "ECI": eci_val,
            "log population": rng.normal(10, 1),
            "college share": rng.normal(0.3, 0.05),
            # truth: wages load 0.25 on ECI plus the region intercept
            "log wage": 0.25 * eci_val + region_effect
                        + rng.normal(scale=0.2),
        })
data = pd.DataFrame(rows)

controls = {"economic": ["log population"],
            "sociodemographic": ["college share"]}

spec = ModelSpec(kind="cross_section", outcome="log wage",
                 controls=controls, year=2015)
print(format_results_text(run_cross_section(data, spec),
                          title="log wage, 2015 cross-section"))
print()

# the panel estimator sees each region's own history, so the correlated
# region intercepts stop inflating the coefficient on lagged complexity
spec = ModelSpec(kind="panel", outcome="log wage", controls=controls)
print(format_results_text(run_panel_lsdv(data, spec),
                          title="log wage, two-way fixed effects"))
print()
print("the cross-section column (1) coefficient sits well above the true")
print("0.25 because persistent regional advantages load on ECI levels; the")
print("fixed-effects estimate is identified from within-region changes.")
