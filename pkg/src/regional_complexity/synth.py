"""Synthetic region-by-industry matrices with known structure.

Two generators serve as oracles for the complexity solvers: a perfectly
nested staircase whose rankings are known in advance, and a random
capability world where each region holds a subset of latent capabilities
and hosts exactly the industries whose requirements it covers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

CAPABILITY_RETRY_CAP = 5


@dataclass(frozen=True)
class CapabilityModel:
    """The latent state behind one generated presence matrix.

    region_capability[r, c] says region r holds capability c;
    industry_requirement[i, c] says industry i needs capability c. The
    presence matrix is 1 exactly where the region's capability set
    contains the industry's requirement set.
    """

    n_regions: int
    n_industries: int
    n_capabilities: int
    region_capability: np.ndarray
    industry_requirement: np.ndarray
    seed: int

    def capability_counts(self) -> np.ndarray:
        """Capabilities held per region."""
        return self.region_capability.sum(axis=1)

    def coverage_matrix(self) -> np.ndarray:
        """Presence by subset coverage, recomputed from the latent state."""
        required = self.industry_requirement.sum(axis=1)
        overlap = self.industry_requirement.astype(int) @ self.region_capability.T.astype(int)
        return (overlap == required[:, None]).T.astype(float)


def generate_nested(n_regions: int, n_industries: int) -> np.ndarray:
    """Perfectly nested binary matrix.

    Row r hosts the first ceil((r+1) * n_industries / n_regions) industries,
    so diversities increase strictly with the row index and every richer
    region hosts a superset of every poorer one.
    """
    if n_regions < 1 or n_industries < 1:
        raise ValidationError("nested generator needs at least 1 region and 1 industry")
    r = np.arange(1, n_regions + 1)
    row_widths = np.ceil(r * n_industries / n_regions).astype(int)
    M = (np.arange(1, n_industries + 1)[None, :] <= row_widths[:, None])
    return M.astype(float)


def generate_capability_model(n_regions: int, n_industries: int, n_capabilities: int,
                              p_region: float, p_industry: float, seed: int,
                              ) -> tuple[CapabilityModel, np.ndarray]:
    """Random capability world and its presence matrix.

    Region capabilities and industry requirements are independent
    Bernoulli draws (p_region and p_industry per cell) from a PCG64
    stream, so the output is fully determined by the seed. A draw whose
    presence matrix is all zero is redrawn with the next seed, with a
    warning, up to a small retry cap.
    """
    if min(n_regions, n_industries, n_capabilities) < 1:
        raise ValidationError("model dimensions must be positive")
    for name, p in (("p_region", p_region), ("p_industry", p_industry)):
        if not 0 < p <= 1:
            raise ValidationError(f"{name} must lie in (0, 1], got {p}")

    for attempt in range(CAPABILITY_RETRY_CAP):
        attempt_seed = seed + attempt
        rng = np.random.default_rng(attempt_seed)
        region_capability = rng.random((n_regions, n_capabilities)) < p_region
        industry_requirement = rng.random((n_industries, n_capabilities)) < p_industry
        model = CapabilityModel(
            n_regions=n_regions,
            n_industries=n_industries,
            n_capabilities=n_capabilities,
            region_capability=region_capability,
            industry_requirement=industry_requirement,
            seed=attempt_seed,
        )
        presence = model.coverage_matrix()
        if presence.sum() > 0:
            return model, presence
        warnings.warn(
            f"capability draw with seed {attempt_seed} produced an all-zero "
            "presence matrix; redrawing with the next seed",
            RuntimeWarning,
            stacklevel=2,
        )
    raise ValidationError(
        f"no nonzero presence matrix in {CAPABILITY_RETRY_CAP} draws from seed "
        f"{seed}; the probability parameters are too extreme for this size"
    )
