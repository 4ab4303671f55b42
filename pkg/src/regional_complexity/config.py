"""Run configuration: one JSON file driving the whole pipeline.

Precedence is command-line flags over config file over built-in
defaults. The config path itself comes from --config or, failing that,
the REGCOMPLEX_CONFIG environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ValidationError
from .matrix import DEFAULT_CM_CUTOFF, STRATEGIES

ENV_CONFIG_VAR = "REGCOMPLEX_CONFIG"

GEOGRAPHY_LEVELS = ("county", "cbsa_plus_counties")
INDUSTRY_LEVELS = ("naics2", "naics3", "naics4", "naics5", "naics6", "bcd_subcluster")
INDICES = ("eci", "fi")

DEFAULT_SCHEMA = {
    "year": "year",
    "region": "region",
    "industry": "industry",
    "employment": "employment",
    "flag": "flag",
}

DEFAULT_SOLVER = {
    "dense_cutoff": 2000,
    "eci_tol": 1e-10,
    "eci_max_iter": 10000,
    "fi_tol": 1e-8,
    "fi_max_iter": 1000,
}


@dataclass
class RunConfig:
    employment_file: str | None = None
    schema: dict = field(default_factory=lambda: dict(DEFAULT_SCHEMA))
    delimiter: str = ","
    geographic_crosswalk: str | None = None
    industry_crosswalk: str | None = None
    attribute_crosswalks: list = field(default_factory=list)
    size_class_table: str | None = None
    output_dir: str = "out"
    panel_file: str | None = None
    years: list = field(default_factory=list)
    geography_level: str = "county"
    industry_level: str = "naics6"
    strategies: list = field(default_factory=lambda: ["CM"])
    indices: list = field(default_factory=lambda: ["eci", "fi"])
    cm_cutoff: float = DEFAULT_CM_CUTOFF
    solver: dict = field(default_factory=lambda: dict(DEFAULT_SOLVER))
    regression: dict = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    jobs: int = 1
    verbose: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValidationError(f"unknown config keys {unknown}")
        merged = dict(raw)
        if "schema" in merged:
            schema = dict(DEFAULT_SCHEMA)
            schema.update(merged["schema"])
            merged["schema"] = schema
        if "solver" in merged:
            solver = dict(DEFAULT_SOLVER)
            unknown = sorted(set(merged["solver"]) - set(solver))
            if unknown:
                raise ValidationError(f"unknown solver keys {unknown}")
            solver.update(merged["solver"])
            merged["solver"] = solver
        return cls(**merged)

    @classmethod
    def load(cls, path=None, environ=None) -> "RunConfig":
        """Read the config file named by ``path``, else by the
        REGCOMPLEX_CONFIG environment variable, else use defaults."""
        environ = os.environ if environ is None else environ
        if path is None:
            path = environ.get(ENV_CONFIG_VAR) or None
        if path is None:
            return cls()
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}")
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ValidationError(f"config file {path} must hold a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return asdict(self)

    def resolved_panel_file(self) -> Path:
        if self.panel_file:
            return Path(self.panel_file)
        return Path(self.output_dir) / "panel.csv"

    def apply_overrides(self, assignments) -> None:
        """Apply KEY=VALUE overrides with dotted keys for nested fields,
        e.g. years=2007,2008 or solver.fi_tol=1e-9."""
        for assignment in assignments or []:
            if "=" not in assignment:
                raise ValidationError(
                    f"override {assignment!r} is not of the form KEY=VALUE"
                )
            key, text = assignment.split("=", 1)
            value = _parse_override_value(text)
            parts = key.split(".")
            if parts[0] not in self.__dataclass_fields__:
                raise ValidationError(f"unknown config key {parts[0]!r}")
            if len(parts) == 1:
                current = getattr(self, key)
                if isinstance(current, list) and not isinstance(value, list):
                    value = [value]
                setattr(self, key, value)
            else:
                target = getattr(self, parts[0])
                for part in parts[1:-1]:
                    if not isinstance(target, dict):
                        raise ValidationError(f"config key {key!r} is not nested")
                    target = target.setdefault(part, {})
                if not isinstance(target, dict):
                    raise ValidationError(f"config key {key!r} is not nested")
                target[parts[-1]] = value

    def _require_file(self, label: str, value) -> None:
        if not value:
            raise ValidationError(f"config needs {label}")
        if not Path(value).is_file():
            raise ValidationError(f"{label} not found: {value}")

    def validate_common(self) -> None:
        if not self.output_dir:
            raise ValidationError("config needs an output_dir")
        if self.geography_level not in GEOGRAPHY_LEVELS:
            raise ValidationError(
                f"geography_level must be one of {GEOGRAPHY_LEVELS}, "
                f"got {self.geography_level!r}"
            )
        if self.industry_level not in INDUSTRY_LEVELS:
            raise ValidationError(
                f"industry_level must be one of {INDUSTRY_LEVELS}, "
                f"got {self.industry_level!r}"
            )
        if self.jobs < 1:
            raise ValidationError(f"jobs must be at least 1, got {self.jobs}")

    def validate_matrix_params(self) -> None:
        if not self.strategies:
            raise ValidationError("config needs a non-empty strategies list")
        unknown = sorted(set(self.strategies) - set(STRATEGIES))
        if unknown:
            raise ValidationError(
                f"unknown strategies {unknown}; expected a subset of {list(STRATEGIES)}"
            )
        if not self.indices:
            raise ValidationError("config needs a non-empty indices list")
        unknown = sorted(set(self.indices) - set(INDICES))
        if unknown:
            raise ValidationError(
                f"unknown indices {unknown}; expected a subset of {list(INDICES)}"
            )
        if not self.cm_cutoff > 0:
            raise ValidationError(f"cm_cutoff must be positive, got {self.cm_cutoff}")
        for key in ("eci_tol", "fi_tol"):
            if not self.solver[key] > 0:
                raise ValidationError(f"solver.{key} must be positive")
        for key in ("dense_cutoff", "eci_max_iter", "fi_max_iter"):
            if int(self.solver[key]) < 1:
                raise ValidationError(f"solver.{key} must be at least 1")

    def validate_for(self, command: str) -> None:
        self.validate_common()
        if command == "ingest":
            self._require_file("employment_file", self.employment_file)
            for key in ("year", "region", "industry", "employment"):
                if key not in self.schema:
                    raise ValidationError(f"schema is missing the {key!r} column mapping")
            if self.geography_level == "cbsa_plus_counties":
                self._require_file("geographic_crosswalk", self.geographic_crosswalk)
            elif self.geographic_crosswalk:
                self._require_file("geographic_crosswalk", self.geographic_crosswalk)
            if self.industry_level == "bcd_subcluster":
                self._require_file("industry_crosswalk", self.industry_crosswalk)
            if self.size_class_table:
                self._require_file("size_class_table", self.size_class_table)
        elif command in ("compute", "diagnose"):
            self._require_file("panel file", self.resolved_panel_file())
            if not self.years:
                raise ValidationError("config needs a non-empty years list")
            self.validate_matrix_params()
            if command == "diagnose":
                for path in self.attribute_crosswalks:
                    self._require_file("attribute crosswalk", path)
        elif command == "regress":
            if not self.regression:
                raise ValidationError("config needs a regression section")
            self._require_file("regression dataset", self.regression.get("dataset"))
            kinds = [k for k in ("cross_section", "period_growth", "panel")
                     if k in self.regression]
            if not kinds:
                raise ValidationError(
                    "regression section needs at least one of "
                    "cross_section, period_growth, panel"
                )
        elif command == "synth":
            kind = self.synth.get("kind")
            if kind not in ("nested", "capability"):
                raise ValidationError(
                    "synth section needs kind 'nested' or 'capability', "
                    f"got {kind!r}"
                )
        else:
            raise ValidationError(f"unknown command {command!r}")


def _parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_override_value(piece) for piece in text.split(",")]
    return text
