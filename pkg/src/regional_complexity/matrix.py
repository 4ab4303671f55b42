"""Region-by-industry input matrices.

Five strategies turn a raw employment matrix X (regions x industries,
nonnegative counts) into the matrix the complexity solvers consume:

    BM        1 where the location quotient is at least 1
    RLQ       the raw location quotient
    WM        the region's share of national employment in the industry
    Presence  1 where the cell employs at least one person
    CM        1 where LQ >= 1 or the cell employs more than ``cutoff`` people

All strategies are pure functions of X, so scaling every cell by the same
positive constant leaves BM, RLQ, Presence (for integer scalings) and the
LQ branch of CM unchanged.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateNetworkError, ValidationError

STRATEGIES = ("BM", "RLQ", "WM", "Presence", "CM")
BINARY_STRATEGIES = frozenset({"BM", "Presence", "CM"})

DEFAULT_CM_CUTOFF = 50.0

# Location quotients above this value render at full intensity in heatmaps.
# Display-only: computations always use the raw values.
LQ_TOP_CODE = 10.0


@dataclass(frozen=True)
class InputMatrix:
    """A strategy matrix plus the catalogs that label its axes.

    ``region_totals`` and ``industry_totals`` keep the raw employment
    marginals of the X the matrix was built from; the ordering diagnostics
    use them to break ties.
    """

    values: np.ndarray
    strategy: str
    binary: bool
    region_catalog: np.ndarray
    industry_catalog: np.ndarray
    params: dict = field(default_factory=dict)
    region_totals: np.ndarray | None = None
    industry_totals: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValidationError("matrix values must be 2-dimensional")
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if len(self.region_catalog) != values.shape[0]:
            raise ValidationError("region catalog length does not match row count")
        if len(self.industry_catalog) != values.shape[1]:
            raise ValidationError("industry catalog length does not match column count")
        if np.any(values < 0):
            raise ValidationError("matrix values must be nonnegative")
        if self.binary and not np.all((values == 0) | (values == 1)):
            raise ValidationError(f"{self.strategy} matrix must be 0/1 valued")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def from_array(cls, values, strategy: str = "Presence", params: dict | None = None,
                   region_catalog=None, industry_catalog=None) -> "InputMatrix":
        """Wrap a bare array, defaulting the catalogs to row/column indices."""
        values = np.asarray(values, dtype=float)
        if region_catalog is None:
            region_catalog = np.arange(values.shape[0])
        if industry_catalog is None:
            industry_catalog = np.arange(values.shape[1])
        return cls(
            values=values,
            strategy=strategy,
            binary=strategy in BINARY_STRATEGIES,
            region_catalog=np.asarray(region_catalog),
            industry_catalog=np.asarray(industry_catalog),
            params=dict(params or {}),
            region_totals=values.sum(axis=1),
            industry_totals=values.sum(axis=0),
        )


@dataclass(frozen=True)
class PruneReport:
    """What prune_empty removed and why."""

    dropped_regions: tuple = ()
    dropped_industries: tuple = ()

    @property
    def empty(self) -> bool:
        return not self.dropped_regions and not self.dropped_industries


def _values_of(M) -> np.ndarray:
    if isinstance(M, InputMatrix):
        return M.values
    return np.asarray(M, dtype=float)


def location_quotient(X) -> np.ndarray:
    """LQ[r, i] = (X[r, i] / X[r, :].sum()) / (X[:, i].sum() / X.sum()).

    Regions must have positive total employment (exclude empty regions
    first). Industries with zero national employment get LQ 0 so they can
    be pruned downstream instead of propagating NaN.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("employment matrix must be 2-dimensional")
    if np.any(X < 0):
        raise ValidationError("employment matrix must be nonnegative")
    total = X.sum()
    if total <= 0:
        raise ValidationError("employment matrix has zero grand total")
    region_tot = X.sum(axis=1)
    empty_regions = np.flatnonzero(region_tot == 0)
    if empty_regions.size:
        raise ValidationError(
            "regions with zero total employment must be excluded before "
            f"computing location quotients (rows {empty_regions.tolist()})"
        )
    industry_tot = X.sum(axis=0)
    national_share = industry_tot / total
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = (X / region_tot[:, None]) / national_share[None, :]
    lq[:, industry_tot == 0] = 0.0
    return lq


def build_input_matrix(X, strategy: str, params: dict | None = None,
                       region_catalog=None, industry_catalog=None) -> InputMatrix:
    """Build one of the five strategy matrices from raw employment X.

    ``params`` currently carries only the CM employment cutoff
    (default 50, strict inequality: a cell with exactly ``cutoff``
    employees does not qualify on the employment branch).
    """
    X = np.asarray(X, dtype=float)
    if strategy not in STRATEGIES:
        raise ValidationError(
            f"unknown strategy {strategy!r}; expected one of {STRATEGIES}"
        )
    if np.any(X < 0):
        raise ValidationError("employment matrix must be nonnegative")
    params = dict(params or {})

    if strategy == "BM":
        values = (location_quotient(X) >= 1.0).astype(float)
    elif strategy == "RLQ":
        values = location_quotient(X)
    elif strategy == "WM":
        industry_tot = X.sum(axis=0)
        if X.sum() <= 0:
            raise ValidationError("employment matrix has zero grand total")
        with np.errstate(divide="ignore", invalid="ignore"):
            values = X / industry_tot[None, :]
        values[:, industry_tot == 0] = 0.0
    elif strategy == "Presence":
        values = (X >= 1.0).astype(float)
    else:  # CM
        cutoff = float(params.setdefault("cutoff", DEFAULT_CM_CUTOFF))
        if not cutoff > 0:
            raise ValidationError(f"CM cutoff must be positive, got {cutoff}")
        values = ((location_quotient(X) >= 1.0) | (X > cutoff)).astype(float)

    if region_catalog is None:
        region_catalog = np.arange(X.shape[0])
    if industry_catalog is None:
        industry_catalog = np.arange(X.shape[1])
    return InputMatrix(
        values=values,
        strategy=strategy,
        binary=strategy in BINARY_STRATEGIES,
        region_catalog=np.asarray(region_catalog),
        industry_catalog=np.asarray(industry_catalog),
        params=params,
        region_totals=X.sum(axis=1),
        industry_totals=X.sum(axis=0),
    )


def prune_empty(M: InputMatrix) -> tuple[InputMatrix, PruneReport]:
    """Drop all-zero rows and columns until none remain.

    Removal cascades: dropping a column can empty a row and vice versa.
    The report lists every removal with the pass on which it happened.
    """
    values = M.values
    keep_rows = np.ones(values.shape[0], dtype=bool)
    keep_cols = np.ones(values.shape[1], dtype=bool)
    dropped_regions = []
    dropped_industries = []
    passno = 0
    while True:
        passno += 1
        sub = values[np.ix_(keep_rows, keep_cols)]
        row_alive = sub.sum(axis=1) > 0
        col_alive = sub.sum(axis=0) > 0
        if row_alive.all() and col_alive.all():
            break
        row_idx = np.flatnonzero(keep_rows)
        col_idx = np.flatnonzero(keep_cols)
        for i in row_idx[~row_alive]:
            dropped_regions.append((M.region_catalog[i], f"no nonzero cells (pass {passno})"))
            keep_rows[i] = False
        for j in col_idx[~col_alive]:
            dropped_industries.append((M.industry_catalog[j], f"no nonzero cells (pass {passno})"))
            keep_cols[j] = False
        if not keep_rows.any() or not keep_cols.any():
            raise DegenerateNetworkError(
                "degenerate network: pruning removed every row and column"
            )

    report = PruneReport(
        dropped_regions=tuple(dropped_regions),
        dropped_industries=tuple(dropped_industries),
    )
    if report.empty:
        return M, report
    pruned = InputMatrix(
        values=values[np.ix_(keep_rows, keep_cols)],
        strategy=M.strategy,
        binary=M.binary,
        region_catalog=M.region_catalog[keep_rows],
        industry_catalog=M.industry_catalog[keep_cols],
        params=dict(M.params),
        region_totals=None if M.region_totals is None else M.region_totals[keep_rows],
        industry_totals=None if M.industry_totals is None else M.industry_totals[keep_cols],
    )
    return pruned, report


def export_matrix(M: InputMatrix, path, prune_report: PruneReport | None = None) -> None:
    """Write nonzero cells as (region, industry, value) triplets plus a
    JSON sidecar with strategy, params, shape, and the prune report."""
    path = Path(path)
    rows, cols = np.nonzero(M.values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", "industry", "value"])
        for r, c in zip(rows, cols):
            writer.writerow([M.region_catalog[r], M.industry_catalog[c],
                             format(M.values[r, c], ".12g")])
    sidecar = {
        "strategy": M.strategy,
        "binary": M.binary,
        "params": M.params,
        "n_regions": int(M.shape[0]),
        "n_industries": int(M.shape[1]),
        "nonzero_cells": int(rows.size),
    }
    if prune_report is not None:
        sidecar["pruned_regions"] = [
            [str(code), reason] for code, reason in prune_report.dropped_regions
        ]
        sidecar["pruned_industries"] = [
            [str(code), reason] for code, reason in prune_report.dropped_industries
        ]
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
