"""Least-squares regression battery for complexity scores.

One OLS core with classical or heteroskedasticity-robust (HC1) standard
errors, plus three harnesses that mirror how complexity indices are
typically evaluated: a cross-sectional level regression, a long-run
growth regression with start-of-period controls, and a panel regression
with entity and year fixed effects and a lagged complexity term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import linalg, stats

from .errors import ValidationError

SE_KINDS = ("classical", "HC1")
CONTROL_GROUP_ORDER = ("economic", "sociodemographic", "institutional")
MODEL_KINDS = ("cross_section", "period_growth", "panel")

STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.1, "*"))
STAR_NOTE = "*p<0.1; **p<0.05; ***p<0.01"


def significance_stars(pvalue: float) -> str:
    for cutoff, stars in STAR_LEVELS:
        if pvalue < cutoff:
            return stars
    return ""


@dataclass(frozen=True)
class OLSFit:
    names: tuple
    coef: np.ndarray
    se: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    stars: tuple
    se_kind: str
    n_obs: int
    n_params: int
    r2: float
    adj_r2: float
    resid_se: float
    resid_dof: int
    fstat: float | None
    f_dof: tuple | None
    f_pvalue: float | None
    residuals: np.ndarray
    ssr: float


def _check_full_rank(X: np.ndarray, names) -> None:
    _, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0:
        raise ValidationError("design matrix has no columns")
    tol = diag[0] * max(X.shape) * np.finfo(float).eps
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        dependent = sorted(names[i] for i in piv[rank:])
        raise ValidationError(
            f"design matrix is rank deficient; collinear columns: {dependent}"
        )


def ols(y, X, names=None, se_kind: str = "HC1", add_intercept: bool = True) -> OLSFit:
    """Ordinary least squares with classical or HC1 standard errors.

    The intercept is appended as a final column named Constant unless
    ``add_intercept`` is off. Collinear designs are rejected with the
    offending column names rather than silently dropped.
    """
    if se_kind not in SE_KINDS:
        raise ValidationError(f"se_kind must be one of {SE_KINDS}, got {se_kind!r}")
    y = np.asarray(y, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != y.shape[0]:
        raise ValidationError(
            f"y has {y.shape[0]} rows but X has {X.shape[0]}"
        )
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValidationError("regression inputs must be finite")
    if names is None:
        names = [f"x{j}" for j in range(X.shape[1])]
    names = list(names)
    if len(names) != X.shape[1]:
        raise ValidationError(
            f"{len(names)} names given for {X.shape[1]} columns"
        )
    if add_intercept:
        X = np.column_stack([X, np.ones(X.shape[0])])
        names = names + ["Constant"]
    n, k = X.shape
    if n <= k:
        raise ValidationError(
            f"need more observations than parameters, got n={n}, k={k}"
        )
    _check_full_rank(X, names)

    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coef
    ssr = float(residuals @ residuals)
    dof = n - k
    sigma2 = ssr / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    if se_kind == "classical":
        cov = sigma2 * xtx_inv
    else:
        meat = (X * residuals[:, None] ** 2).T @ X
        cov = (n / dof) * xtx_inv @ meat @ xtx_inv
    se = np.sqrt(np.diag(cov))

    with np.errstate(divide="ignore", invalid="ignore"):
        tvalues = np.where(se > 0, coef / se, np.inf * np.sign(coef))
    pvalues = 2.0 * stats.t.sf(np.abs(tvalues), dof)

    if add_intercept:
        sst = float(np.sum((y - y.mean()) ** 2))
    else:
        sst = float(y @ y)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof if add_intercept else r2

    fstat = f_dof = f_pvalue = None
    n_slopes = k - 1 if add_intercept else k
    if add_intercept and n_slopes > 0 and sst > 0 and ssr > 0:
        fstat = ((sst - ssr) / n_slopes) / (ssr / dof)
        f_dof = (n_slopes, dof)
        f_pvalue = float(stats.f.sf(fstat, n_slopes, dof))

    return OLSFit(
        names=tuple(names),
        coef=coef,
        se=se,
        tvalues=tvalues,
        pvalues=pvalues,
        stars=tuple(significance_stars(p) for p in pvalues),
        se_kind=se_kind,
        n_obs=n,
        n_params=k,
        r2=r2,
        adj_r2=adj_r2,
        resid_se=float(np.sqrt(sigma2)),
        resid_dof=dof,
        fstat=None if fstat is None else float(fstat),
        f_dof=f_dof,
        f_pvalue=f_pvalue,
        residuals=residuals,
        ssr=ssr,
    )


@dataclass(frozen=True)
class ModelSpec:
    """What to regress: outcome, complexity variable, control groups, and
    which slice of the panel (a year, a period, or all years)."""

    kind: str
    outcome: str
    complexity_var: str = "ECI"
    controls: dict = field(default_factory=dict)
    year: int | None = None
    start_year: int | None = None
    end_year: int | None = None
    se_kind: str = "HC1"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.se_kind not in SE_KINDS:
            raise ValidationError(f"se_kind must be one of {SE_KINDS}")
        unknown = sorted(set(self.controls) - set(CONTROL_GROUP_ORDER))
        if unknown:
            raise ValidationError(
                f"unknown control groups {unknown}; expected {CONTROL_GROUP_ORDER}"
            )
        if self.kind == "cross_section" and self.year is None:
            raise ValidationError("cross_section models need a year")
        if self.kind == "period_growth":
            if self.start_year is None or self.end_year is None:
                raise ValidationError("period_growth models need start_year and end_year")
            if self.end_year <= self.start_year:
                raise ValidationError("end_year must be after start_year")

    def group(self, name: str) -> list[str]:
        return list(self.controls.get(name, []))


@dataclass(frozen=True)
class RegressionResult:
    label: str
    names: tuple
    coef: np.ndarray
    se: np.ndarray
    pvalues: np.ndarray
    stars: tuple
    se_kind: str
    n_obs: int
    r2: float
    adj_r2: float
    resid_se: float | None
    resid_dof: int | None
    fstat: float | None
    f_dof: tuple | None
    f_pvalue: float | None
    dropped_rows: int
    warnings: tuple = ()
    metadata: dict = field(default_factory=dict)


def load_dataset(path) -> pd.DataFrame:
    """Entity-by-year covariate table; (entity, year) keys must be unique."""
    frame = pd.read_csv(path, dtype={"entity": str})
    return validate_dataset(frame)


def validate_dataset(frame: pd.DataFrame) -> pd.DataFrame:
    for column in ("entity", "year"):
        if column not in frame.columns:
            raise ValidationError(f"dataset is missing the {column!r} column")
    keys = frame[["entity", "year"]]
    dupes = keys[keys.duplicated()]
    if len(dupes):
        sample = [tuple(row) for row in dupes.head(5).itertuples(index=False)]
        raise ValidationError(
            f"dataset has {len(dupes)} duplicate (entity, year) keys, first {sample}"
        )
    frame = frame.copy()
    frame["year"] = frame["year"].astype(int)
    return frame


def _ladder(spec: ModelSpec, base: list[str]) -> list[tuple[str, list[str]]]:
    """Five model columns: complexity alone, complexity plus each control
    group separately, then everything together."""
    economic = spec.group("economic")
    socio = spec.group("sociodemographic")
    institutional = spec.group("institutional")
    return [
        ("(1)", base),
        ("(2)", base + economic),
        ("(3)", base + socio),
        ("(4)", base + institutional),
        ("(5)", base + economic + socio + institutional),
    ]


def _require_columns(frame: pd.DataFrame, columns, where: str) -> None:
    missing = sorted(set(columns) - set(frame.columns))
    if missing:
        raise ValidationError(f"{where} is missing columns {missing}")


def _fit_column(frame, outcome, regressors, label, spec) -> RegressionResult:
    sub = frame[[outcome] + regressors].dropna()
    dropped = len(frame) - len(sub)
    fit = ols(sub[outcome].to_numpy(), sub[regressors].to_numpy(),
              names=regressors, se_kind=spec.se_kind)
    return RegressionResult(
        label=label,
        names=fit.names,
        coef=fit.coef,
        se=fit.se,
        pvalues=fit.pvalues,
        stars=fit.stars,
        se_kind=fit.se_kind,
        n_obs=fit.n_obs,
        r2=fit.r2,
        adj_r2=fit.adj_r2,
        resid_se=fit.resid_se,
        resid_dof=fit.resid_dof,
        fstat=fit.fstat,
        f_dof=fit.f_dof,
        f_pvalue=fit.f_pvalue,
        dropped_rows=dropped,
    )


def run_cross_section(data: pd.DataFrame, spec: ModelSpec) -> list[RegressionResult]:
    """Outcome levels on complexity and controls, one year, five columns."""
    if spec.kind != "cross_section":
        raise ValidationError(f"expected a cross_section spec, got {spec.kind!r}")
    data = validate_dataset(data)
    all_controls = [v for g in CONTROL_GROUP_ORDER for v in spec.group(g)]
    _require_columns(data, [spec.outcome, spec.complexity_var] + all_controls, "dataset")
    chunk = data[data["year"] == spec.year]
    if chunk.empty:
        raise ValidationError(
            f"no rows for year {spec.year}; available years: "
            f"{sorted(data['year'].unique().tolist())}"
        )
    results = []
    for label, regressors in _ladder(spec, [spec.complexity_var]):
        result = _fit_column(chunk, spec.outcome, regressors, label, spec)
        result.metadata["year"] = spec.year
        results.append(result)
    return results


def run_period_growth(data: pd.DataFrame, spec: ModelSpec) -> list[RegressionResult]:
    """Relative outcome growth over a period on start-of-period complexity
    and controls, including the start level of the outcome.

    Entities missing either endpoint year, or with a nonpositive start
    level, are dropped and counted.
    """
    if spec.kind != "period_growth":
        raise ValidationError(f"expected a period_growth spec, got {spec.kind!r}")
    data = validate_dataset(data)
    all_controls = [v for g in CONTROL_GROUP_ORDER for v in spec.group(g)]
    _require_columns(data, [spec.outcome, spec.complexity_var] + all_controls, "dataset")
    start = data[data["year"] == spec.start_year].set_index("entity")
    end = data[data["year"] == spec.end_year].set_index("entity")
    for year, chunk in ((spec.start_year, start), (spec.end_year, end)):
        if chunk.empty:
            raise ValidationError(
                f"no rows for year {year}; available years: "
                f"{sorted(data['year'].unique().tolist())}"
            )
    common = start.index.intersection(end.index)
    growth_name = f"{spec.outcome} growth {spec.start_year}-{spec.end_year}"
    level_name = f"{spec.outcome} in {spec.start_year}"
    frame = start.loc[common, [spec.complexity_var] + all_controls].copy()
    start_level = start.loc[common, spec.outcome].astype(float)
    end_level = end.loc[common, spec.outcome].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = (end_level - start_level) / start_level
    frame[growth_name] = growth.where(start_level > 0)
    frame[level_name] = start_level
    missing_endpoint = len(start.index.union(end.index)) - len(common)
    results = []
    for label, regressors in _ladder(spec, [spec.complexity_var, level_name]):
        result = _fit_column(frame, growth_name, regressors, label, spec)
        result.metadata.update(
            start_year=spec.start_year,
            end_year=spec.end_year,
            entities_missing_endpoint=missing_endpoint,
        )
        results.append(result)
    return results


def _lag_within_entity(data: pd.DataFrame, var: str) -> pd.Series:
    """Value of var at (entity, year-1), aligned to data's rows."""
    shifted = data[["entity", "year", var]].copy()
    shifted["year"] = shifted["year"] + 1
    merged = data[["entity", "year"]].merge(
        shifted, on=["entity", "year"], how="left")
    return merged[var].set_axis(data.index)


def run_panel_lsdv(data: pd.DataFrame, spec: ModelSpec) -> list[RegressionResult]:
    """Outcome on one-year-lagged complexity with entity and year fixed
    effects (least squares dummy variables), five columns.

    Reported R-squared is the within fit: 1 minus the ratio of the full
    model's residual sum of squares to that of the dummies-only model.
    The F statistic tests the non-dummy regressors jointly. Controls with
    no within-entity variation are dropped and named in warnings.
    """
    if spec.kind != "panel":
        raise ValidationError(f"expected a panel spec, got {spec.kind!r}")
    data = validate_dataset(data)
    all_controls = [v for g in CONTROL_GROUP_ORDER for v in spec.group(g)]
    _require_columns(data, [spec.outcome, spec.complexity_var] + all_controls, "dataset")
    data = data.sort_values(["entity", "year"], kind="stable").reset_index(drop=True)
    lag_name = f"l.{spec.complexity_var}"
    data[lag_name] = _lag_within_entity(data, spec.complexity_var)

    results = []
    for label, regressors in _ladder(spec, [lag_name]):
        columns = ["entity", "year", spec.outcome] + regressors
        sub = data[columns].dropna().reset_index(drop=True)
        dropped = len(data) - len(sub)

        kept, warnings = [], []
        for var in regressors:
            demeaned = sub[var] - sub.groupby("entity")[var].transform("mean")
            if float(np.abs(demeaned.to_numpy()).max(initial=0.0)) < 1e-12:
                warnings.append(f"dropped {var}: no within-entity variation")
            else:
                kept.append(var)
        if not kept:
            raise ValidationError(
                f"column {label}: every regressor lacks within-entity variation"
            )

        entity_dummies = pd.get_dummies(
            sub["entity"].astype(str), prefix="entity", drop_first=True, dtype=float)
        year_dummies = pd.get_dummies(
            sub["year"].astype(int), prefix="year", drop_first=True, dtype=float)
        dummies = pd.concat([entity_dummies, year_dummies], axis=1)

        y = sub[spec.outcome].to_numpy(float)
        X_full = np.column_stack([sub[kept].to_numpy(float), dummies.to_numpy(float)])
        names_full = kept + list(dummies.columns)
        fit_full = ols(y, X_full, names=names_full, se_kind=spec.se_kind)
        fit_dummies = ols(y, dummies.to_numpy(float),
                          names=list(dummies.columns), se_kind="classical")

        within_r2 = 1.0 - fit_full.ssr / fit_dummies.ssr if fit_dummies.ssr > 0 else 1.0
        n, k = fit_full.n_obs, fit_full.n_params
        adj_r2 = 1.0 - (1.0 - within_r2) * (n - 1) / (n - k)
        q = len(kept)
        fstat = ((fit_dummies.ssr - fit_full.ssr) / q) / (fit_full.ssr / (n - k))
        f_pvalue = float(stats.f.sf(fstat, q, n - k))

        keep_idx = [fit_full.names.index(v) for v in kept]
        results.append(RegressionResult(
            label=label,
            names=tuple(kept),
            coef=fit_full.coef[keep_idx],
            se=fit_full.se[keep_idx],
            pvalues=fit_full.pvalues[keep_idx],
            stars=tuple(fit_full.stars[i] for i in keep_idx),
            se_kind=spec.se_kind,
            n_obs=n,
            r2=within_r2,
            adj_r2=adj_r2,
            resid_se=None,
            resid_dof=None,
            fstat=float(fstat),
            f_dof=(q, n - k),
            f_pvalue=f_pvalue,
            dropped_rows=dropped,
            warnings=tuple(warnings),
            metadata={
                "n_entities": int(sub["entity"].nunique()),
                "n_years": int(sub["year"].nunique()),
                "n_params": k,
            },
        ))
    return results


def _fmt(value: float, digits: int = 3) -> str:
    return format(value, f".{digits}f")


def format_results_text(results, title: str | None = None) -> str:
    """Stacked coefficient table: one column per model, coefficient with
    significance stars over its parenthesized standard error, then the
    fit statistics footer."""
    if not results:
        raise ValidationError("no results to format")
    order = []
    for result in results:
        for name in result.names:
            if name != "Constant" and name not in order:
                order.append(name)
    if any("Constant" in result.names for result in results):
        order.append("Constant")

    lookup = []
    for result in results:
        lookup.append({name: i for i, name in enumerate(result.names)})

    name_width = max(len(n) for n in order + ["Residual Std. Error", "F Statistic"])
    cell_width = 24
    lines = []
    if title:
        lines.append(title)
    header = " " * name_width + "".join(
        result.label.rjust(cell_width) for result in results)
    lines.append(header)
    lines.append("-" * len(header))
    for name in order:
        coef_cells, se_cells = [], []
        for result, pos in zip(results, lookup):
            if name in pos:
                i = pos[name]
                coef_cells.append(f"{_fmt(result.coef[i])}{result.stars[i]}")
                se_cells.append(f"({_fmt(result.se[i])})")
            else:
                coef_cells.append("")
                se_cells.append("")
        lines.append(name.ljust(name_width)
                     + "".join(c.rjust(cell_width) for c in coef_cells))
        lines.append(" " * name_width
                     + "".join(c.rjust(cell_width) for c in se_cells))
        lines.append("")
    lines.append("-" * len(header))

    def footer(label, cells):
        lines.append(label.ljust(name_width)
                     + "".join(c.rjust(cell_width) for c in cells))

    footer("Observations", [str(r.n_obs) for r in results])
    footer("R2", [_fmt(r.r2) for r in results])
    footer("Adjusted R2", [_fmt(r.adj_r2) for r in results])
    if all(r.resid_se is not None for r in results):
        footer("Residual Std. Error",
               [f"{_fmt(r.resid_se)} (df = {r.resid_dof})" for r in results])
    f_cells = []
    for r in results:
        if r.fstat is None:
            f_cells.append("")
        else:
            stars = significance_stars(r.f_pvalue)
            f_cells.append(f"{_fmt(r.fstat)}{stars} (df = {r.f_dof[0]}; {r.f_dof[1]})")
    footer("F Statistic", f_cells)
    lines.append("-" * len(header))
    lines.append("Note:".ljust(name_width)
                 + STAR_NOTE.rjust(cell_width * len(results)))
    return "\n".join(lines) + "\n"


def results_frame(results) -> pd.DataFrame:
    """Long-format table of every coefficient across the model columns."""
    rows = []
    for result in results:
        for i, name in enumerate(result.names):
            rows.append({
                "model": result.label,
                "variable": name,
                "coef": float(result.coef[i]),
                "se": float(result.se[i]),
                "pvalue": float(result.pvalues[i]),
                "stars": result.stars[i],
                "n_obs": result.n_obs,
                "r2": result.r2,
                "adj_r2": result.adj_r2,
            })
    return pd.DataFrame(rows)
