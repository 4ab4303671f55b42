"""Command-line pipeline: ingest, compute, diagnose, regress, synth.

Every command reads one JSON run config (flags > config > defaults),
writes its artifacts under the configured output directory, and finishes
by writing a manifest JSON with sha256 hashes of inputs and outputs so
reruns can be compared byte for byte. Exit codes: 0 success, 1 partial
or runtime failure, 2 validation error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .complexity import eci, fitness
from .config import ENV_CONFIG_VAR, RunConfig
from .diagnostics import (correlate, export_heatmap, group_summary,
                          order_for_triangularity, top_bottom)
from .errors import ValidationError
from .ingest import (DEFAULT_SIZE_CLASSES, Crosswalk, EmploymentPanel,
                     RejectedRow, SizeClassTable, aggregate_geography,
                     aggregate_industry, build_matrix, impute_suppressed,
                     parse_employment_table, read_panel, write_panel)
from .matrix import build_input_matrix, prune_empty
from .regress import (ModelSpec, format_results_text, load_dataset,
                      results_frame, run_cross_section, run_panel_lsdv,
                      run_period_growth)
from .synth import generate_capability_model, generate_nested


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _relative_to_out(path, out_dir: Path) -> str:
    path = Path(path)
    try:
        return path.resolve().relative_to(out_dir.resolve()).as_posix()
    except ValueError:
        return str(path)


def _write_manifest(config: RunConfig, command: str, inputs, outputs,
                    seeds=None, failures=None) -> Path:
    out_dir = Path(config.output_dir)
    manifest = {
        "command": command,
        "version": __version__,
        "config": config.to_dict(),
        "inputs": {_relative_to_out(p, out_dir): _sha256(p) for p in sorted(
            str(p) for p in inputs)},
        "outputs": {_relative_to_out(p, out_dir): _sha256(p) for p in sorted(
            str(p) for p in outputs)},
        "seeds": seeds or [],
        "failures": failures or [],
    }
    path = out_dir / f"manifest_{command}.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _say(config: RunConfig, message: str) -> None:
    if config.verbose:
        print(message)


# --- ingest ---------------------------------------------------------------

def cmd_ingest(config: RunConfig) -> int:
    """Parse, impute, aggregate; write the canonical panel and a report."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = [config.employment_file]

    result = parse_employment_table(
        config.employment_file, config.schema, config.delimiter)
    records, rejects = list(result.records), list(result.rejects)
    if config.years:
        allowed = set(int(y) for y in config.years)
        in_range = []
        for record in records:
            if record.year in allowed:
                in_range.append(record)
            else:
                rejects.append(RejectedRow(
                    line=0, reason=f"year {record.year} outside configured years",
                    raw=f"{record.region_code},{record.industry_code}"))
        records = in_range
    if not records:
        raise ValidationError("no usable records after parsing and year filtering")

    if config.size_class_table:
        table = SizeClassTable.from_json(config.size_class_table)
        inputs.append(config.size_class_table)
    else:
        table = DEFAULT_SIZE_CLASSES
    panel = impute_suppressed(records, table)
    # Aggregation marks a merged cell imputed if any contributor was, so
    # employment-weighted imputation stats are only honest at record level.
    record_total = panel.total_employment()
    record_imputed_share = panel.imputed_share()
    record_imputed_cells = int(panel.frame["imputed"].sum())

    if config.geography_level == "cbsa_plus_counties":
        crosswalk = Crosswalk.from_file(config.geographic_crosswalk, "geographic")
        inputs.append(config.geographic_crosswalk)
        panel = aggregate_geography(panel, crosswalk)
    if config.industry_level == "bcd_subcluster":
        crosswalk = Crosswalk.from_file(config.industry_crosswalk, "industry")
        inputs.append(config.industry_crosswalk)
        panel = aggregate_industry(panel, crosswalk)
    else:
        panel = aggregate_industry(panel, int(config.industry_level[-1]))

    panel_path = config.resolved_panel_file()
    panel_path.parent.mkdir(parents=True, exist_ok=True)
    write_panel(panel, panel_path)

    report = {
        "records_parsed": len(records),
        "rejected_rows": len(rejects),
        "panel_cells": int(len(panel.frame)),
        "years": panel.years,
        "n_regions": len(panel.regions),
        "n_industries": len(panel.industries),
        "total_employment": record_total,
        "imputed_employment": record_total * record_imputed_share,
        "imputed_share": record_imputed_share,
        "imputed_cells": record_imputed_cells,
        "metadata": panel.metadata,
    }
    report_path = out_dir / "ingest_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = [panel_path, report_path]

    if rejects:
        rejects_path = out_dir / "ingest_rejects.csv"
        with open(rejects_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["line", "reason", "raw"])
            for row in rejects:
                writer.writerow([row.line, row.reason, row.raw])
        outputs.append(rejects_path)

    _write_manifest(config, "ingest", inputs, outputs)
    print(f"panel: {report['panel_cells']} cells, "
          f"{report['total_employment']:.12g} employees, "
          f"{report['imputed_share']:.1%} imputed, "
          f"{report['rejected_rows']} rejected rows")
    return 0


# --- compute ---------------------------------------------------------------

def _score_paths(out_dir: Path, index: str, strategy: str, year: int):
    stem = f"scores_{index}_{strategy}_{year}"
    return out_dir / f"{stem}.csv", out_dir / f"{stem}.json"


def _write_scores(out_dir: Path, index: str, scores, prune_report) -> list[Path]:
    csv_path, json_path = _score_paths(out_dir, index, scores.strategy, scores.year)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", "code", "score"])
        for code, value in zip(scores.region_catalog, scores.region_scores):
            writer.writerow(["region", code, format(float(value), ".12g")])
        for code, value in zip(scores.industry_catalog, scores.industry_scores):
            writer.writerow(["industry", code, format(float(value), ".12g")])
    sidecar = {
        "index": index,
        "strategy": scores.strategy,
        "year": scores.year,
        "n_regions": int(len(scores.region_catalog)),
        "n_industries": int(len(scores.industry_catalog)),
        "iterations": int(scores.iterations),
        "residual": float(scores.residual),
        "converged": bool(scores.converged),
        "dropped_regions": [list(item) for item in prune_report.dropped_regions],
        "dropped_industries": [list(item) for item in prune_report.dropped_industries],
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [csv_path, json_path]


def read_scores(path) -> dict:
    """Score file as {"region": Series, "industry": Series} keyed by code."""
    frame = pd.read_csv(path, dtype={"code": str})
    return {
        side: chunk.set_index("code")["score"].astype(float)
        for side, chunk in frame.groupby("side")
    }


def _build_pruned_matrix(panel: EmploymentPanel, year: int, strategy: str,
                         config: RunConfig):
    X, regions, industries = build_matrix(panel, year)
    params = {"cutoff": config.cm_cutoff} if strategy == "CM" else None
    M = build_input_matrix(X, strategy, params=params,
                           region_catalog=regions, industry_catalog=industries)
    return prune_empty(M)


def cmd_compute(config: RunConfig) -> int:
    """Score every (year, strategy, index) combination; one failure does
    not abort the others."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel_path = config.resolved_panel_file()
    panel = read_panel(panel_path)
    missing = sorted(set(int(y) for y in config.years) - set(panel.years))
    if missing:
        raise ValidationError(
            f"years {missing} not in panel; available years: {panel.years}")
    solver = config.solver

    def run_combo(year: int, strategy: str):
        files, errors = [], []
        try:
            M, prune_report = _build_pruned_matrix(panel, year, strategy, config)
        except Exception as exc:
            return files, [{"year": year, "strategy": strategy,
                            "index": "*", "error": str(exc)}]
        for index in config.indices:
            try:
                if index == "eci":
                    scores = eci(M, dense_cutoff=int(solver["dense_cutoff"]),
                                 tol=float(solver["eci_tol"]),
                                 max_iter=int(solver["eci_max_iter"]), year=year)
                else:
                    scores = fitness(M, max_iter=int(solver["fi_max_iter"]),
                                     tol=float(solver["fi_tol"]), year=year)
                files.extend(_write_scores(out_dir, index, scores, prune_report))
            except Exception as exc:
                errors.append({"year": year, "strategy": strategy,
                               "index": index, "error": str(exc)})
        return files, errors

    combos = [(int(year), strategy)
              for year in config.years for strategy in config.strategies]
    outputs, failures = [], []
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [pool.submit(run_combo, year, strategy)
                   for year, strategy in combos]
        for future in as_completed(futures):
            files, errors = future.result()
            outputs.extend(files)
            failures.extend(errors)

    failures.sort(key=lambda f: (f["year"], f["strategy"], f["index"]))
    _write_manifest(config, "compute", [panel_path], outputs, failures=failures)
    n_written = sum(1 for p in outputs if p.suffix == ".csv")
    print(f"compute: {n_written} score files written, {len(failures)} failures")
    for failure in failures:
        print(f"  failed {failure['year']} {failure['strategy']} "
              f"{failure['index']}: {failure['error']}", file=sys.stderr)
    return 1 if failures else 0


# --- diagnose ---------------------------------------------------------------

def _load_all_scores(config: RunConfig, out_dir: Path) -> dict:
    scores = {}
    for year in config.years:
        for strategy in config.strategies:
            for index in config.indices:
                csv_path, _ = _score_paths(out_dir, index, strategy, int(year))
                if not csv_path.is_file():
                    raise ValidationError(
                        f"missing score file {csv_path}; run compute first")
                scores[(index, strategy, int(year))] = read_scores(csv_path)
    return scores


def _attribute_maps(config: RunConfig):
    crosswalks = []
    for path in config.attribute_crosswalks:
        crosswalks.append(Crosswalk.from_file(path, "attribute"))
    return crosswalks


def _matching_side(mapping: dict, sides: dict) -> str | None:
    overlaps = {
        side: len(set(mapping) & set(series.index))
        for side, series in sides.items()
    }
    best = max(overlaps, key=lambda side: overlaps[side])
    return best if overlaps[best] > 0 else None


def cmd_diagnose(config: RunConfig) -> int:
    """Heatmaps, cross-strategy correlations, group summaries, and
    top/bottom tables from previously computed scores."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel_path = config.resolved_panel_file()
    panel = read_panel(panel_path)
    scores = _load_all_scores(config, out_dir)
    crosswalks = _attribute_maps(config)
    inputs = [panel_path] + [
        str(out_dir / f"scores_{i}_{s}_{y}.csv") for (i, s, y) in sorted(scores)
    ] + list(config.attribute_crosswalks)
    outputs = []

    for year in sorted(int(y) for y in config.years):
        for index in config.indices:
            if len(config.strategies) < 2:
                continue
            names = list(config.strategies)
            table = np.eye(len(names))
            for i, a in enumerate(names):
                for j, b in enumerate(names):
                    if i < j:
                        value = correlate(scores[(index, a, year)]["region"],
                                          scores[(index, b, year)]["region"])
                        table[i, j] = table[j, i] = value
            frame = pd.DataFrame(table, index=names, columns=names)
            path = out_dir / f"correlations_{index}_{year}.csv"
            frame.to_csv(path, float_format="%.12g", index_label="strategy")
            outputs.append(path)

        if "eci" in config.indices and "fi" in config.indices:
            rows = []
            for strategy in config.strategies:
                eci_scores = scores[("eci", strategy, year)]["region"]
                fi_scores = scores[("fi", strategy, year)]["region"]
                rows.append({
                    "strategy": strategy,
                    "pearson": correlate(eci_scores, fi_scores),
                    "pearson_log_fi": correlate(eci_scores, fi_scores,
                                                transform_b="log"),
                })
            path = out_dir / f"correlations_eci_fi_{year}.csv"
            pd.DataFrame(rows).to_csv(path, index=False, float_format="%.12g")
            outputs.append(path)

        for strategy in config.strategies:
            M, _ = _build_pruned_matrix(panel, year, strategy, config)
            view = order_for_triangularity(M)
            for fmt, suffix in (("svg", ".svg"), ("triplet-csv", ".csv")):
                path = out_dir / f"heatmap_{strategy}_{year}{suffix}"
                export_heatmap(view, path, format=fmt)
                outputs.append(path)

            for index in config.indices:
                sides = scores[(index, strategy, year)]
                industry = sides["industry"]
                attributes = None
                for crosswalk in crosswalks:
                    if _matching_side(crosswalk.mapping, sides) == "industry":
                        attributes = crosswalk.mapping
                        break
                table = top_bottom(industry, min(20, len(industry)),
                                   attributes=attributes)
                path = out_dir / f"top_bottom_{index}_{strategy}_{year}.csv"
                table.to_csv(path, index=False, float_format="%.12g")
                outputs.append(path)

                for crosswalk in crosswalks:
                    side = _matching_side(crosswalk.mapping, sides)
                    if side is None:
                        continue
                    summary = group_summary(sides[side], crosswalk.mapping,
                                            grouping=crosswalk.attribute)
                    path = (out_dir / f"summary_{crosswalk.attribute}_{side}_"
                                      f"{index}_{strategy}_{year}.csv")
                    summary.as_frame().to_csv(path, index=False,
                                              float_format="%.12g")
                    outputs.append(path)

    _write_manifest(config, "diagnose", inputs, outputs)
    print(f"diagnose: {len(outputs)} artifacts written")
    return 0


# --- regress ---------------------------------------------------------------

def cmd_regress(config: RunConfig) -> int:
    """Run the configured regression battery and write text + CSV tables."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    section = config.regression
    dataset_path = section["dataset"]
    data = load_dataset(dataset_path)
    shared = {
        "complexity_var": section.get("complexity_var", "ECI"),
        "controls": section.get("controls", {}),
        "se_kind": section.get("se_kind", "HC1"),
    }
    runners = {
        "cross_section": run_cross_section,
        "period_growth": run_period_growth,
        "panel": run_panel_lsdv,
    }
    allowed_keys = {
        "cross_section": {"outcome", "year"},
        "period_growth": {"outcome", "start_year", "end_year"},
        "panel": {"outcome"},
    }
    outputs = []
    for kind, runner in runners.items():
        if kind not in section:
            continue
        unknown = sorted(set(section[kind]) - allowed_keys[kind])
        if unknown:
            raise ValidationError(
                f"regression.{kind} has unknown keys {unknown}; "
                f"expected a subset of {sorted(allowed_keys[kind])}"
            )
        spec = ModelSpec(kind=kind, **shared, **section[kind])
        results = runner(data, spec)
        text = format_results_text(results, title=f"{kind}: {spec.outcome}")
        text_path = out_dir / f"table_{kind}.txt"
        text_path.write_text(text)
        csv_path = out_dir / f"table_{kind}.csv"
        results_frame(results).to_csv(csv_path, index=False, float_format="%.12g")
        outputs.extend([text_path, csv_path])
        _say(config, text)
        for result in results:
            for warning in result.warnings:
                print(f"{kind} {result.label}: {warning}", file=sys.stderr)

    _write_manifest(config, "regress", [dataset_path], outputs)
    print(f"regress: {len(outputs)} tables written")
    return 0


# --- synth ---------------------------------------------------------------

def cmd_synth(config: RunConfig) -> int:
    """Generate a synthetic panel (nested or capability model)."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    section = config.synth
    kind = section["kind"]
    year = int(section.get("year", 2000))
    n_regions = int(section.get("n_regions", 50))
    n_industries = int(section.get("n_industries", 50))
    seeds = []

    if kind == "nested":
        M = generate_nested(n_regions, n_industries)
        extra_outputs = []
    else:
        seed = int(section.get("seed", 0))
        seeds.append(seed)
        model, M = generate_capability_model(
            n_regions, n_industries,
            n_capabilities=int(section.get("n_capabilities", 2)),
            p_region=float(section.get("p_region", 0.5)),
            p_industry=float(section.get("p_industry", 0.8)),
            seed=seed,
        )
        counts_path = out_dir / "capability_counts.csv"
        with open(counts_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["region", "capability_count"])
            for r, count in enumerate(model.capability_counts()):
                writer.writerow([f"R{r:04d}", int(count)])
        extra_outputs = [counts_path]

    rows = []
    for r in range(M.shape[0]):
        for i in range(M.shape[1]):
            if M[r, i]:
                rows.append((year, f"R{r:04d}", f"I{i:04d}", float(M[r, i]), 0))
    frame = pd.DataFrame(rows, columns=["year", "region", "industry",
                                        "employment", "imputed"])
    panel = EmploymentPanel(frame=frame)
    panel_path = config.resolved_panel_file()
    panel_path.parent.mkdir(parents=True, exist_ok=True)
    write_panel(panel, panel_path)

    _write_manifest(config, "synth", [], [panel_path] + extra_outputs,
                    seeds=seeds)
    print(f"synth: {kind} panel {M.shape[0]}x{M.shape[1]} "
          f"({len(rows)} nonzero cells) written to {panel_path}")
    return 0


# --- entry point ------------------------------------------------------------

COMMANDS = {
    "ingest": cmd_ingest,
    "compute": cmd_compute,
    "diagnose": cmd_diagnose,
    "regress": cmd_regress,
    "synth": cmd_synth,
}

COMMAND_HELP = {
    "ingest": "parse, impute, and aggregate an employment file into a panel",
    "compute": "score every configured (year, strategy, index) combination",
    "diagnose": "heatmaps, correlations, and summary tables from scores",
    "regress": "run the regression battery on a covariate dataset",
    "synth": "generate a synthetic nested or capability-model panel",
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help=f"run config JSON (default: ${ENV_CONFIG_VAR})")
    common.add_argument("--out", metavar="DIR", help="output directory override")
    common.add_argument("--jobs", type=int, metavar="N",
                        help="max concurrent compute jobs")
    common.add_argument("--verbose", action="store_true", default=None,
                        help="print extra progress detail")
    common.add_argument("--set", dest="overrides", action="append",
                        metavar="KEY=VALUE", default=None,
                        help="override any config key (dotted for nested)")
    parser = argparse.ArgumentParser(
        prog="regcomplex",
        description="Regional economic-complexity pipeline.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=COMMAND_HELP[name])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    verbose = bool(args.verbose)
    try:
        config = RunConfig.load(args.config)
        config.apply_overrides(args.overrides)
        if args.out is not None:
            config.output_dir = args.out
        if args.jobs is not None:
            config.jobs = args.jobs
        if args.verbose:
            config.verbose = True
        verbose = config.verbose
        config.validate_for(args.command)
        return COMMANDS[args.command](config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        if verbose:
            traceback.print_exc()
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
