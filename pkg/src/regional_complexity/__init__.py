"""Regional economic-complexity metrics from employment panels.

Builds region-by-industry input matrices under several presence
strategies, computes eigenvector (ECI) and fixed-point (Fitness)
complexity scores, and provides the surrounding pipeline: suppressed-data
imputation, aggregation, triangularity diagnostics, and a regression
battery with robust standard errors.
"""

__version__ = "0.1.0"

from .complexity import (ComplexityScores, DegreeVectors, ReflectionsTrace,
                         degrees, eci, fitness, method_of_reflections,
                         region_similarity)
from .diagnostics import (GroupSummary, OrderedMatrixView, correlate,
                          export_heatmap, group_summary,
                          order_for_triangularity, top_bottom,
                          triangularity_violations)
from .errors import (DegenerateNetworkError, DegenerateSpectrumError,
                     NumericError, ValidationError)
from .ingest import (DEFAULT_SIZE_CLASSES, Crosswalk, EmploymentPanel,
                     ParseResult, RawEmploymentRecord, SizeClass,
                     SizeClassTable, aggregate_geography, aggregate_industry,
                     build_matrix, impute_suppressed, parse_employment_table,
                     read_panel, write_panel)
from .matrix import (DEFAULT_CM_CUTOFF, STRATEGIES, InputMatrix, PruneReport,
                     build_input_matrix, export_matrix, location_quotient,
                     prune_empty)
from .regress import (ModelSpec, OLSFit, RegressionResult, format_results_text,
                      load_dataset, ols, results_frame, run_cross_section,
                      run_panel_lsdv, run_period_growth)
from .synth import CapabilityModel, generate_capability_model, generate_nested

__all__ = [
    "__version__",
    "CapabilityModel",
    "ComplexityScores",
    "Crosswalk",
    "DEFAULT_CM_CUTOFF",
    "DEFAULT_SIZE_CLASSES",
    "DegenerateNetworkError",
    "DegenerateSpectrumError",
    "DegreeVectors",
    "EmploymentPanel",
    "GroupSummary",
    "InputMatrix",
    "ModelSpec",
    "NumericError",
    "OLSFit",
    "OrderedMatrixView",
    "ParseResult",
    "PruneReport",
    "RawEmploymentRecord",
    "ReflectionsTrace",
    "RegressionResult",
    "STRATEGIES",
    "SizeClass",
    "SizeClassTable",
    "ValidationError",
    "aggregate_geography",
    "aggregate_industry",
    "build_input_matrix",
    "build_matrix",
    "correlate",
    "degrees",
    "eci",
    "export_heatmap",
    "export_matrix",
    "fitness",
    "format_results_text",
    "generate_capability_model",
    "generate_nested",
    "group_summary",
    "impute_suppressed",
    "load_dataset",
    "location_quotient",
    "method_of_reflections",
    "ols",
    "order_for_triangularity",
    "parse_employment_table",
    "prune_empty",
    "read_panel",
    "region_similarity",
    "results_frame",
    "run_cross_section",
    "run_panel_lsdv",
    "run_period_growth",
    "top_bottom",
    "triangularity_violations",
    "write_panel",
]
