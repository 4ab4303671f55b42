"""Parsing, imputation, and aggregation of employment tables.

The pipeline is: parse a delimited employment file into records (counted
or suppressed), replace suppression flags with size-class values, then
aggregate counties to larger regions and industry codes to coarser levels
before building per-year matrices.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ValidationError

PANEL_COLUMNS = ("year", "region", "industry", "employment", "imputed")


@dataclass(frozen=True)
class RawEmploymentRecord:
    """One parsed row: either a count or a suppression flag, never both."""

    year: int
    region_code: str
    industry_code: str
    employment: int | None = None
    suppression_flag: str | None = None

    def __post_init__(self):
        has_count = self.employment is not None
        has_flag = self.suppression_flag is not None
        if has_count == has_flag:
            raise ValidationError(
                "record needs exactly one of employment and suppression_flag"
            )
        if has_count and self.employment < 0:
            raise ValidationError("employment must be nonnegative")


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str
    raw: str


@dataclass(frozen=True)
class ParseResult:
    records: tuple
    rejects: tuple


@dataclass(frozen=True)
class SizeClass:
    flag: str
    lower: int
    upper: int | None  # None marks the open-ended top class
    imputed: float


@dataclass(frozen=True)
class SizeClassTable:
    """Suppression flags mapped to employment ranges and imputed values.

    Bounded classes impute at a value inside their range (the arithmetic
    midpoint by convention); the single open-ended class has no midpoint,
    so its imputed value is explicit configuration.
    """

    entries: tuple

    def __post_init__(self):
        open_ended = [e for e in self.entries if e.upper is None]
        if len(open_ended) > 1:
            raise ValidationError("at most one open-ended size class is allowed")
        seen = {}
        for entry in self.entries:
            if entry.flag in seen:
                raise ValidationError(f"duplicate size-class flag {entry.flag!r}")
            seen[entry.flag] = entry
            if entry.imputed < 0:
                raise ValidationError(
                    f"size class {entry.flag!r} has negative imputed value"
                )
            if entry.upper is not None:
                if entry.upper < entry.lower:
                    raise ValidationError(
                        f"size class {entry.flag!r} has upper bound below lower bound"
                    )
                if not entry.lower <= entry.imputed <= entry.upper:
                    raise ValidationError(
                        f"size class {entry.flag!r} imputed value "
                        f"{entry.imputed} outside [{entry.lower}, {entry.upper}]"
                    )
            elif entry.imputed < entry.lower:
                raise ValidationError(
                    f"open-ended size class {entry.flag!r} imputed value "
                    f"{entry.imputed} below its lower bound {entry.lower}"
                )
        bounded = sorted((e for e in self.entries if e.upper is not None),
                         key=lambda e: e.lower)
        for a, b in zip(bounded, bounded[1:]):
            if b.lower <= a.upper:
                raise ValidationError(
                    f"size classes {a.flag!r} and {b.flag!r} have overlapping ranges"
                )

    def value_for(self, flag: str) -> float:
        for entry in self.entries:
            if entry.flag == flag:
                return entry.imputed
        raise ValidationError(f"unknown suppression flag {flag!r}")

    @classmethod
    def from_json(cls, path) -> "SizeClassTable":
        with open(path) as fh:
            raw = json.load(fh)
        entries = tuple(
            SizeClass(flag=str(e["flag"]), lower=int(e["lower"]),
                      upper=None if e.get("upper") is None else int(e["upper"]),
                      imputed=float(e["imputed"]))
            for e in raw["classes"]
        )
        return cls(entries=entries)

    def to_json(self, path) -> None:
        payload = {"classes": [
            {"flag": e.flag, "lower": e.lower, "upper": e.upper, "imputed": e.imputed}
            for e in self.entries
        ]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _midpoint_class(flag: str, lower: int, upper: int) -> SizeClass:
    return SizeClass(flag=flag, lower=lower, upper=upper, imputed=(lower + upper) / 2)


# Standard establishment-size suppression classes. The open-ended top
# class has no midpoint; its default imputed value is the class lower
# bound, and panels built with it carry a metadata marker so the choice
# is visible downstream.
DEFAULT_SIZE_CLASSES = SizeClassTable(entries=(
    _midpoint_class("A", 0, 19),
    _midpoint_class("B", 20, 99),
    _midpoint_class("C", 100, 249),
    _midpoint_class("E", 250, 499),
    _midpoint_class("F", 500, 999),
    _midpoint_class("G", 1000, 2499),
    _midpoint_class("H", 2500, 4999),
    _midpoint_class("I", 5000, 9999),
    _midpoint_class("J", 10000, 24999),
    _midpoint_class("K", 25000, 49999),
    _midpoint_class("L", 50000, 99999),
    SizeClass(flag="M", lower=100000, upper=None, imputed=100000.0),
))


@dataclass
class EmploymentPanel:
    """Tidy (year, region, industry, employment, imputed) records.

    ``frame`` holds one row per key; ``region_attributes`` and
    ``industry_attributes`` map codes to attribute dicts filled in by
    attribute crosswalks; ``metadata`` records imputation choices.
    """

    frame: pd.DataFrame
    region_attributes: dict = field(default_factory=dict)
    industry_attributes: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        frame = self.frame
        missing = [c for c in PANEL_COLUMNS if c not in frame.columns]
        if missing:
            raise ValidationError(f"panel frame is missing columns {missing}")
        if np.any(frame["employment"].to_numpy() < 0):
            raise ValidationError("panel employment must be nonnegative")
        keys = frame[["year", "region", "industry"]]
        dupes = keys[keys.duplicated()]
        if len(dupes):
            sample = [tuple(row) for row in dupes.head(5).itertuples(index=False)]
            raise ValidationError(
                f"panel has {len(dupes)} duplicate (year, region, industry) keys, "
                f"first {sample}"
            )

    @property
    def years(self) -> list[int]:
        return sorted(int(y) for y in self.frame["year"].unique())

    @property
    def regions(self) -> list[str]:
        return sorted(self.frame["region"].unique())

    @property
    def industries(self) -> list[str]:
        return sorted(self.frame["industry"].unique())

    def total_employment(self) -> float:
        return float(self.frame["employment"].sum())

    def imputed_share(self) -> float:
        total = self.total_employment()
        if total == 0:
            return 0.0
        imputed = self.frame.loc[self.frame["imputed"] == 1, "employment"].sum()
        return float(imputed) / total


@dataclass(frozen=True)
class Crosswalk:
    """A code mapping: geographic (county to combined region), industry
    (fine code to coarse code or cluster), or attribute (code to label)."""

    kind: str
    mapping: dict
    attribute: str | None = None

    def __post_init__(self):
        if self.kind not in ("geographic", "industry", "attribute"):
            raise ValidationError(f"unknown crosswalk kind {self.kind!r}")
        if self.kind == "attribute" and not self.attribute:
            raise ValidationError("attribute crosswalks need an attribute name")

    @classmethod
    def from_file(cls, path, kind: str, delimiter: str = ",") -> "Crosswalk":
        """Two columns (source, target) for geographic/industry crosswalks;
        three columns (code, attribute, value) for attribute crosswalks."""
        mapping = {}
        attribute = None
        with open(path, newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            header = next(reader, None)
            if header is None:
                raise ValidationError(f"crosswalk file {path} is empty")
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if kind == "attribute":
                    if len(row) < 3:
                        raise ValidationError(
                            f"{path}:{lineno}: attribute crosswalk rows need "
                            "3 columns (code, attribute, value)"
                        )
                    code, attr, value = (cell.strip() for cell in row[:3])
                    if attribute is None:
                        attribute = attr
                    elif attr != attribute:
                        raise ValidationError(
                            f"{path}:{lineno}: mixed attribute names "
                            f"({attribute!r} and {attr!r}) in one crosswalk"
                        )
                    source, target = code, value
                else:
                    if len(row) < 2:
                        raise ValidationError(
                            f"{path}:{lineno}: crosswalk rows need 2 columns "
                            "(source, target)"
                        )
                    source, target = row[0].strip(), row[1].strip()
                if source in mapping and mapping[source] != target:
                    raise ValidationError(
                        f"{path}:{lineno}: source {source!r} maps to both "
                        f"{mapping[source]!r} and {target!r}"
                    )
                mapping[source] = target
        return cls(kind=kind, mapping=mapping, attribute=attribute)


MANDATORY_SCHEMA_FIELDS = ("year", "region", "industry", "employment")


def parse_employment_table(path, schema: dict, delimiter: str = ",") -> ParseResult:
    """Read a delimited employment file into records plus a rejects report.

    ``schema`` maps the logical fields (year, region, industry,
    employment, and optionally flag) to the file's column names. Rows
    that cannot be interpreted are collected as rejects with their line
    number and reason; they never abort the parse.
    """
    for key in MANDATORY_SCHEMA_FIELDS:
        if key not in schema:
            raise ValidationError(f"schema is missing the {key!r} column mapping")
    records = []
    rejects = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            return ParseResult(records=(), rejects=())
        missing = [col for col in schema.values() if col not in reader.fieldnames]
        if missing:
            raise ValidationError(
                f"employment file {path} lacks mapped columns {missing}"
            )
        for lineno, row in enumerate(reader, start=2):
            raw = delimiter.join(str(v) for v in row.values() if v is not None)

            def reject(reason):
                rejects.append(RejectedRow(line=lineno, reason=reason, raw=raw))

            year_text = (row.get(schema["year"]) or "").strip()
            region = (row.get(schema["region"]) or "").strip()
            industry = (row.get(schema["industry"]) or "").strip()
            count_text = (row.get(schema["employment"]) or "").strip()
            flag_text = ""
            if "flag" in schema:
                flag_text = (row.get(schema["flag"]) or "").strip()

            if not year_text or not year_text.lstrip("-").isdigit():
                reject(f"unparseable year {year_text!r}")
                continue
            if not region:
                reject("empty region code")
                continue
            if not industry:
                reject("empty industry code")
                continue
            if count_text and flag_text:
                reject("row has both an employment count and a suppression flag")
                continue
            if not count_text and not flag_text:
                reject("row has neither an employment count nor a suppression flag")
                continue
            if count_text:
                try:
                    employment = int(count_text)
                except ValueError:
                    reject(f"unparseable employment count {count_text!r}")
                    continue
                if employment < 0:
                    reject(f"negative employment count {employment}")
                    continue
                records.append(RawEmploymentRecord(
                    year=int(year_text), region_code=region,
                    industry_code=industry, employment=employment))
            else:
                records.append(RawEmploymentRecord(
                    year=int(year_text), region_code=region,
                    industry_code=industry, suppression_flag=flag_text))
    return ParseResult(records=tuple(records), rejects=tuple(rejects))


def impute_suppressed(records, table: SizeClassTable = DEFAULT_SIZE_CLASSES,
                      ) -> EmploymentPanel:
    """Replace suppression flags with their class's imputed value.

    Counted records pass through unchanged. Unknown flags are a hard
    error: silently keeping them would drop employment.
    """
    rows = []
    flags_seen = set()
    for record in records:
        if record.suppression_flag is not None:
            value = table.value_for(record.suppression_flag)
            flags_seen.add(record.suppression_flag)
            imputed = 1
        else:
            value = float(record.employment)
            imputed = 0
        rows.append((record.year, record.region_code, record.industry_code,
                     value, imputed))
    frame = pd.DataFrame(rows, columns=list(PANEL_COLUMNS))
    metadata = {"flags_imputed": sorted(flags_seen)}
    open_classes = [e for e in table.entries if e.upper is None]
    if open_classes:
        top = open_classes[0]
        metadata["open_ended_class"] = {
            "flag": top.flag,
            "imputed": top.imputed,
            "at_lower_bound": top.imputed == top.lower,
        }
    return EmploymentPanel(frame=frame, metadata=metadata)


def aggregate_geography(panel: EmploymentPanel, crosswalk: Crosswalk) -> EmploymentPanel:
    """Sum employment over source regions mapping to the same target.

    Regions absent from the crosswalk pass through unchanged as their own
    analysis regions. An aggregated cell is marked imputed if any of its
    inputs was.
    """
    if crosswalk.kind != "geographic":
        raise ValidationError(
            f"aggregate_geography needs a geographic crosswalk, got {crosswalk.kind!r}"
        )
    frame = panel.frame.copy()
    frame["region"] = frame["region"].map(lambda code: crosswalk.mapping.get(code, code))
    grouped = (frame.groupby(["year", "region", "industry"], as_index=False)
               .agg(employment=("employment", "sum"), imputed=("imputed", "max")))
    return EmploymentPanel(
        frame=grouped,
        region_attributes=dict(panel.region_attributes),
        industry_attributes=dict(panel.industry_attributes),
        metadata=dict(panel.metadata),
    )


def aggregate_industry(panel: EmploymentPanel, level) -> EmploymentPanel:
    """Aggregate industries to a digit level (2..6) or through a cluster
    crosswalk.

    Digit levels truncate codes to the leading digits; every code shorter
    than the requested level is an error, reported together. Cluster
    crosswalks map codes through their table, with unmapped codes passing
    through unchanged.
    """
    frame = panel.frame.copy()
    if isinstance(level, Crosswalk):
        if level.kind != "industry":
            raise ValidationError(
                f"aggregate_industry needs an industry crosswalk, got {level.kind!r}"
            )
        frame["industry"] = frame["industry"].map(
            lambda code: level.mapping.get(code, code))
    else:
        digits = int(level)
        if not 2 <= digits <= 6:
            raise ValidationError(f"digit level must be between 2 and 6, got {level}")
        codes = frame["industry"].astype(str)
        short = sorted(set(codes[codes.str.len() < digits]))
        if short:
            raise ValidationError(
                f"industry codes shorter than {digits} digits: {short}"
            )
        frame["industry"] = codes.str.slice(0, digits)
    grouped = (frame.groupby(["year", "region", "industry"], as_index=False)
               .agg(employment=("employment", "sum"), imputed=("imputed", "max")))
    return EmploymentPanel(
        frame=grouped,
        region_attributes=dict(panel.region_attributes),
        industry_attributes=dict(panel.industry_attributes),
        metadata=dict(panel.metadata),
    )


def build_matrix(panel: EmploymentPanel, year: int,
                 ) -> tuple[np.ndarray, list[str], list[str]]:
    """Dense employment matrix for one year.

    Rows and columns are the region and industry codes present in that
    year's records, sorted; pairs without a record are 0.
    """
    years = panel.years
    if int(year) not in years:
        raise ValidationError(f"year {year} not in panel; available years: {years}")
    chunk = panel.frame[panel.frame["year"] == int(year)]
    regions = sorted(chunk["region"].unique())
    industries = sorted(chunk["industry"].unique())
    region_pos = {code: i for i, code in enumerate(regions)}
    industry_pos = {code: j for j, code in enumerate(industries)}
    X = np.zeros((len(regions), len(industries)))
    rows = chunk["region"].map(region_pos).to_numpy()
    cols = chunk["industry"].map(industry_pos).to_numpy()
    X[rows, cols] = chunk["employment"].to_numpy(float)
    return X, regions, industries


def write_panel(panel: EmploymentPanel, path) -> None:
    """Canonical serialization: sorted keys, 12-significant-digit
    employment, 0/1 imputed marker. Byte-stable for identical panels."""
    frame = panel.frame.sort_values(["year", "region", "industry"], kind="stable")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PANEL_COLUMNS)
        for row in frame.itertuples(index=False):
            writer.writerow([
                int(row.year), row.region, row.industry,
                format(float(row.employment), ".12g"), int(row.imputed),
            ])


def read_panel(path) -> EmploymentPanel:
    frame = pd.read_csv(
        path,
        dtype={"region": str, "industry": str},
        converters=None,
    )
    missing = [c for c in PANEL_COLUMNS if c not in frame.columns]
    if missing:
        raise ValidationError(f"panel file {path} is missing columns {missing}")
    frame["year"] = frame["year"].astype(int)
    frame["employment"] = frame["employment"].astype(float)
    frame["imputed"] = frame["imputed"].astype(int)
    return EmploymentPanel(frame=frame[list(PANEL_COLUMNS)])
