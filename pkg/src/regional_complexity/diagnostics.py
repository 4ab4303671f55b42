"""Ordering, heatmap export, correlations, and score summaries.

The ordered view sorts regions by descending diversity and industries by
descending ubiquity; on matrices built from capability-like structure the
result is (close to) triangular, which is the visual diagnostic for
whether a matrix is usable complexity input.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from .errors import ValidationError
from .matrix import LQ_TOP_CODE, InputMatrix

HEATMAP_FORMATS = ("svg", "triplet-csv")


@dataclass(frozen=True)
class OrderedMatrixView:
    """A matrix reordered for triangularity inspection.

    ``region_order`` and ``industry_order`` are permutations into the
    original catalogs; ``values`` is the reordered matrix, top-coded at
    10 when the strategy is RLQ (display only).
    """

    values: np.ndarray
    region_order: np.ndarray
    industry_order: np.ndarray
    region_catalog: np.ndarray
    industry_catalog: np.ndarray
    strategy: str | None


@dataclass(frozen=True)
class GroupSummary:
    """Per-group score means, one row per group label."""

    grouping: str
    rows: tuple  # (label, count, mean, sd)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rows), columns=["group", "count", "mean", "sd"])


def order_for_triangularity(M) -> OrderedMatrixView:
    """Sort rows by ascending diversity and columns by descending ubiquity.

    On a nested matrix this puts the ones into a lower triangle: the
    least diverse region first, the most ubiquitous industry first. Ties
    break by raw employment totals (when the matrix remembers them), then
    by catalog position, so the sort is stable and deterministic.
    """
    if isinstance(M, InputMatrix):
        values = M.values
        region_catalog, industry_catalog = M.region_catalog, M.industry_catalog
        region_totals = (M.region_totals if M.region_totals is not None
                         else values.sum(axis=1))
        industry_totals = (M.industry_totals if M.industry_totals is not None
                           else values.sum(axis=0))
        strategy = M.strategy
    else:
        values = np.asarray(M, dtype=float)
        region_catalog = np.arange(values.shape[0])
        industry_catalog = np.arange(values.shape[1])
        region_totals = values.sum(axis=1)
        industry_totals = values.sum(axis=0)
        strategy = None

    diversity = values.sum(axis=1)
    ubiquity = values.sum(axis=0)
    # lexsort's last key is primary; the index key keeps the sort stable.
    region_order = np.lexsort(
        (np.arange(values.shape[0]), np.asarray(region_totals, dtype=float), diversity))
    industry_order = np.lexsort(
        (np.arange(values.shape[1]), -np.asarray(industry_totals, dtype=float), -ubiquity))

    ordered = values[np.ix_(region_order, industry_order)]
    if strategy == "RLQ":
        ordered = np.minimum(ordered, LQ_TOP_CODE)
    return OrderedMatrixView(
        values=ordered,
        region_order=region_order,
        industry_order=industry_order,
        region_catalog=np.asarray(region_catalog)[region_order],
        industry_catalog=np.asarray(industry_catalog)[industry_order],
        strategy=strategy,
    )


def export_heatmap(view: OrderedMatrixView, path, format: str = "svg") -> Path:
    """Write the ordered matrix as an SVG heatmap or long-form triplets.

    The SVG draws one 1x1 rect per nonzero cell, grayscale by value
    relative to the view's maximum, with no other rect elements. The
    triplet CSV holds (row_rank, col_rank, value) for nonzero cells.
    """
    if format not in HEATMAP_FORMATS:
        raise ValidationError(
            f"unknown heatmap format {format!r}; expected one of {HEATMAP_FORMATS}"
        )
    path = Path(path)
    if format == "triplet-csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row_rank", "col_rank", "value"])
            for r, c in zip(*np.nonzero(view.values)):
                writer.writerow([int(r), int(c), format_value(view.values[r, c])])
        return path

    n_rows, n_cols = view.values.shape
    vmax = view.values.max()
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{n_cols}" height="{n_rows}" '
        f'viewBox="0 0 {n_cols} {n_rows}" style="background:#ffffff">'
    ]
    for r, c in zip(*np.nonzero(view.values)):
        # Darker means larger; full intensity at the view maximum.
        level = int(round(255 * (1 - view.values[r, c] / vmax)))
        lines.append(
            f'<rect x="{int(c)}" y="{int(r)}" width="1" height="1" '
            f'fill="rgb({level},{level},{level})"/>'
        )
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n")
    return path


def format_value(x: float) -> str:
    return format(float(x), ".12g")


def read_heatmap_triplets(path, shape: tuple[int, int]) -> np.ndarray:
    """Rebuild an ordered matrix from its triplet CSV export."""
    values = np.zeros(shape)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            values[int(row["row_rank"]), int(row["col_rank"])] = float(row["value"])
    return values


def _align(a, b) -> tuple[np.ndarray, np.ndarray, int]:
    """Inner-join two score vectors on their ids.

    Accepts pandas Series (index = entity id) or plain arrays; arrays are
    taken as positionally aligned.
    """
    if isinstance(a, pd.Series) or isinstance(b, pd.Series):
        a = pd.Series(a) if not isinstance(a, pd.Series) else a
        b = pd.Series(b) if not isinstance(b, pd.Series) else b
        common = a.index.intersection(b.index)
        dropped = (len(a) - len(common)) + (len(b) - len(common))
        return a.loc[common].to_numpy(float), b.loc[common].to_numpy(float), dropped
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValidationError("positional score vectors must have equal length")
    return a, b, 0


def correlate(a, b, transform_b: str = "none", method: str = "pearson") -> float:
    """Pearson (or, behind the flag, Spearman rank) correlation of two
    score vectors aligned on their shared entities."""
    if transform_b not in ("none", "log"):
        raise ValidationError(f"unknown transform {transform_b!r}; expected none or log")
    if method not in ("pearson", "spearman"):
        raise ValidationError(f"unknown method {method!r}; expected pearson or spearman")
    x, y, _ = _align(a, b)
    if len(x) < 3:
        raise ValidationError("correlation needs at least 3 aligned entities")
    if transform_b == "log":
        if np.any(y <= 0):
            raise ValidationError("log transform requires strictly positive values")
        y = np.log(y)
    if x.std() == 0 or y.std() == 0:
        raise ValidationError("correlation undefined for zero-variance input")
    if method == "spearman":
        return float(stats.spearmanr(x, y).statistic)
    return float(np.corrcoef(x, y)[0, 1])


def group_summary(scores, attributes, grouping: str = "attribute") -> GroupSummary:
    """Unweighted mean and population sd of scores per attribute group.

    ``attributes`` maps entity id to a group label; entities without a
    label fall into "unclassified". ``scores`` is a pandas Series indexed
    by entity id (or an array, grouped by position keys).
    """
    if not isinstance(scores, pd.Series):
        scores = pd.Series(np.asarray(scores, dtype=float))
    labels = []
    for idx in scores.index:
        value = attributes.get(idx) if attributes is not None else None
        labels.append("unclassified" if value is None else str(value))
    frame = pd.DataFrame({"score": scores.to_numpy(float), "group": labels})
    rows = []
    for label, chunk in sorted(frame.groupby("group"), key=lambda kv: kv[0]):
        vals = chunk["score"].to_numpy()
        rows.append((label, int(len(vals)), float(vals.mean()), float(vals.std())))
    return GroupSummary(grouping=grouping, rows=tuple(rows))


def top_bottom(scores, n: int, labels=None, attributes=None) -> pd.DataFrame:
    """The n highest and n lowest scores, as one table.

    Rows carry the entity code, score, optional label and attribute, the
    rank within its end, and which end ("top" descending from rank 1,
    "bottom" ascending from rank 1 = lowest).
    """
    if not isinstance(scores, pd.Series):
        scores = pd.Series(np.asarray(scores, dtype=float))
    if n > len(scores):
        raise ValidationError(f"asked for top/bottom {n} of only {len(scores)} entities")
    ordered = scores.sort_values(ascending=False, kind="stable")
    rows = []
    for end, chunk in (("top", ordered.head(n)),
                       ("bottom", ordered.tail(n).iloc[::-1])):
        for rank, (code, score) in enumerate(chunk.items(), start=1):
            rows.append({
                "end": end,
                "rank": rank,
                "code": code,
                "score": float(score),
                "label": None if labels is None else labels.get(code),
                "attribute": None if attributes is None else attributes.get(code),
            })
    return pd.DataFrame(rows)


def triangularity_violations(view: OrderedMatrixView) -> int:
    """Count cells breaking the staircase property of the ordered matrix.

    Zero means every row's support is a prefix of the columns, no shorter
    than the row above's: exactly triangular in the lower-left sense.
    """
    values = view.values
    count = 0
    prev_width = 0
    for row in values:
        nonzero = np.flatnonzero(row)
        width = int(nonzero[-1]) + 1 if nonzero.size else 0
        count += int(width - nonzero.size)  # gaps inside the prefix
        if width < prev_width:
            count += prev_width - width
        prev_width = width
    return count
