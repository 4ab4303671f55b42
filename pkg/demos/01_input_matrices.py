"""
Five ways to binarize (or weight) a region-by-industry employment table
=======================================================================

A specialization matrix answers "which industries does this region really
have?" -- and the answer depends on the thresholding rule. This script
builds all five strategies on a toy two-region economy and shows why a
huge absolute employer can still have a location quotient below one.
"""

import numpy as np

from regional_complexity import STRATEGIES, build_input_matrix, location_quotient

# Two regions, two industries. The first region hosts a 13,972-employee
# industry cell that is nevertheless *under*-represented relative to the
# national share: the region is simply enormous.
x_cell, t_region, t_total = 13972.0, 7e6, 130e6
industry_total = round(x_cell * t_total / (0.27 * t_region))
X = np.array([
    [x_cell, t_region - x_cell],
    [industry_total - x_cell, t_total - t_region - (industry_total - x_cell)],
])

print("employment table:")
print(X)
print()
print("location quotients:")
print(np.round(location_quotient(X), 4))
print()

for strategy in STRATEGIES:
    M = build_input_matrix(X, strategy)
    print(f"{strategy:>8}: cell (0,0) -> {M.values[0, 0]:.4g}   "
          f"binary={M.binary}")

print()
print("BM drops the 13,972-employee cell (LQ 0.27 < 1); CM keeps it because")
print("the raw count clears the 50-employee cutoff. Presence keeps any")
print("nonzero cell, RLQ keeps the quotient itself, WM keeps the region's")
print("share of the industry. Under CM the matrix is:")
print(build_input_matrix(X, "CM").values)
