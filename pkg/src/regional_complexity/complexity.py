"""Complexity indices on a region-by-industry matrix.

Two families of scores are computed from a pruned matrix M:

  * the eigenvector index (``eci``): the standardized eigenvector of the
    second-largest eigenvalue of the row-stochastic similarity matrix
    Mt[r, r'] = sum_i M[r, i] M[r', i] / (diversity[r] * ubiquity[i]),
  * the fitness fixed point (``fitness``): the mean-normalized limit of
    F <- M Q,  Q <- 1 / (M' (1/F)).

``method_of_reflections`` exposes the raw iterates that the eigenvector
index summarizes: at even N the region iterates satisfy
k[r, N] = sum_r' Mt[r, r'] k[r', N-2] with k[., 0] the degree vectors.

Weighted matrices (raw location quotients, employment shares) are handled
by the same formulas with weighted degrees.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, NumericError, ValidationError
from .matrix import InputMatrix

DENSE_CUTOFF = 2000
POWER_TOL = 1e-10
POWER_MAX_ITER = 10000
# Eigenvalues closer than this are treated as one multiple eigenvalue.
DEGENERACY_TOL = 1e-9

FI_TOL = 1e-8
FI_MAX_ITER = 1000


@dataclass(frozen=True)
class DegreeVectors:
    """Row and column sums of M: diversity per region, ubiquity per industry."""

    diversity: np.ndarray
    ubiquity: np.ndarray


@dataclass(frozen=True)
class ReflectionsTrace:
    """Iterates k[r, N] and k[i, N] for N = 0..n_max, one row per N."""

    region_iterates: np.ndarray
    industry_iterates: np.ndarray

    @property
    def n_max(self) -> int:
        return self.region_iterates.shape[0] - 1


@dataclass
class ComplexityScores:
    """Scores for one (index, strategy, year) combination.

    Eigenvector scores are standardized to mean 0 and population standard
    deviation 1; fitness scores are positive with mean 1. ``converged`` is
    always True for the eigenvector index.
    """

    index_kind: str
    region_scores: np.ndarray
    industry_scores: np.ndarray
    region_catalog: np.ndarray
    industry_catalog: np.ndarray
    strategy: str | None = None
    year: int | None = None
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    metadata: dict = field(default_factory=dict)


def _values_and_catalogs(M):
    if isinstance(M, InputMatrix):
        return M.values, M.region_catalog, M.industry_catalog, M.strategy
    values = np.asarray(M, dtype=float)
    return (values, np.arange(values.shape[0]), np.arange(values.shape[1]), None)


def degrees(M) -> DegreeVectors:
    """Diversity (row sums) and ubiquity (column sums).

    The matrix must be pruned: a zero row or column makes every
    downstream normalization divide by zero.
    """
    values, _, _, _ = _values_and_catalogs(M)
    diversity = values.sum(axis=1)
    ubiquity = values.sum(axis=0)
    if np.any(diversity == 0) or np.any(ubiquity == 0):
        raise ValidationError(
            "matrix has empty rows or columns; apply prune_empty first"
        )
    return DegreeVectors(diversity=diversity, ubiquity=ubiquity)


def region_similarity(M) -> np.ndarray:
    """The row-stochastic matrix Mt[r, r'] = sum_i M[r,i] M[r',i] / (d[r] u[i])."""
    values, _, _, _ = _values_and_catalogs(M)
    deg = degrees(values)
    return (values / deg.diversity[:, None]) @ (values / deg.ubiquity[None, :]).T


def method_of_reflections(M, n_max: int) -> ReflectionsTrace:
    """Alternately average each side's iterate over the other side.

    k[r, N] = (1/d[r]) sum_i M[r, i] k[i, N-1]
    k[i, N] = (1/u[i]) sum_r M[r, i] k[r, N-1]

    Both updates read the previous step, so substituting one into the
    other gives the two-step region recursion through Mt exactly.
    """
    if n_max < 0:
        raise ValidationError("n_max must be nonnegative")
    values, _, _, _ = _values_and_catalogs(M)
    deg = degrees(values)
    kr = np.empty((n_max + 1, values.shape[0]))
    ki = np.empty((n_max + 1, values.shape[1]))
    kr[0] = deg.diversity
    ki[0] = deg.ubiquity
    for n in range(1, n_max + 1):
        kr[n] = (values @ ki[n - 1]) / deg.diversity
        ki[n] = (values.T @ kr[n - 1]) / deg.ubiquity
    return ReflectionsTrace(region_iterates=kr, industry_iterates=ki)


def _standardize(vec: np.ndarray) -> np.ndarray:
    sd = vec.std()
    if sd == 0:
        raise DegenerateSpectrumError("score vector is constant; cannot standardize")
    return (vec - vec.mean()) / sd


def _orient(scores: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Flip signs so scores covary nonnegatively with the reference.

    When the covariance is exactly zero the earliest entry with a nonzero
    score is made positive, so the orientation is still deterministic.
    """
    cov = np.mean((scores - scores.mean()) * (reference - reference.mean()))
    if cov < 0:
        return -scores
    if cov == 0:
        nonzero = np.flatnonzero(scores)
        if nonzero.size and scores[nonzero[0]] < 0:
            return -scores
    return scores


def _second_eigenvector_dense(values: np.ndarray, diversity: np.ndarray,
                              ubiquity: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Second eigenpair of Mt via the similar symmetric operator.

    S = D^{-1/2} (M U^{-1} M') D^{-1/2} is symmetric positive semidefinite
    and similar to Mt, so its spectrum is Mt's and its eigenvectors map
    back through D^{-1/2}. eigh keeps everything real.
    """
    rsqrt = 1.0 / np.sqrt(diversity)
    A = values * rsqrt[:, None]
    S = A @ (A / ubiquity[None, :]).T
    eigenvalues, vectors = np.linalg.eigh(S)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    gap_above = eigenvalues[0] - eigenvalues[1]
    gap_below = eigenvalues[1] - eigenvalues[2] if len(eigenvalues) > 2 else np.inf
    if min(gap_above, gap_below) < DEGENERACY_TOL:
        raise DegenerateSpectrumError(
            "second eigenvalue is not separated "
            f"(leading eigenvalues {eigenvalues[:3].tolist()}); "
            "the score eigenvector is not unique"
        )
    return rsqrt * vectors[:, 1], eigenvalues


def _second_eigenvector_power(values: np.ndarray, diversity: np.ndarray,
                              ubiquity: np.ndarray, tol: float,
                              max_iter: int) -> tuple[np.ndarray, int]:
    """Power iteration on S with its known top eigenvector deflated.

    Mt's leading eigenvector is constant, so S's is sqrt(diversity); the
    iteration projects it out every step and converges to the second one.
    Never materializes S, only matrix-vector products through M.
    """
    rsqrt = 1.0 / np.sqrt(diversity)
    sqrt_d = np.sqrt(diversity)
    top = sqrt_d / np.linalg.norm(sqrt_d)

    def apply_s(x):
        y = values.T @ (rsqrt * x)
        y = values @ (y / ubiquity)
        return rsqrt * y

    rng = np.random.default_rng(0)
    x = rng.standard_normal(values.shape[0])
    x -= (top @ x) * top
    x /= np.linalg.norm(x)
    for iteration in range(1, max_iter + 1):
        y = apply_s(x)
        y -= (top @ y) * top
        norm = np.linalg.norm(y)
        if norm == 0:
            raise DegenerateSpectrumError(
                "power iteration collapsed; no second eigenvector direction"
            )
        y /= norm
        # Eigenvectors are sign-ambiguous; compare directions.
        change = min(np.abs(y - x).max(), np.abs(y + x).max())
        x = y
        if change < tol:
            return rsqrt * x, iteration
    raise DegenerateSpectrumError(
        f"power iteration did not converge in {max_iter} steps; "
        "the spectrum near the second eigenvalue is likely degenerate"
    )


def _eci_side(values: np.ndarray, dense_cutoff: int, tol: float,
              max_iter: int) -> tuple[np.ndarray, dict]:
    deg = degrees(values)
    if values.shape[0] < 2 or values.shape[1] < 2:
        raise ValidationError("eigenvector scores need at least 2 regions and 2 industries")
    if values.shape[0] <= dense_cutoff:
        vector, eigenvalues = _second_eigenvector_dense(values, deg.diversity, deg.ubiquity)
        info = {"solver": "dense", "eigenvalues": eigenvalues[:3].tolist(), "iterations": 0}
    else:
        vector, iterations = _second_eigenvector_power(
            values, deg.diversity, deg.ubiquity, tol, max_iter)
        info = {"solver": "power", "iterations": iterations}
    scores = _orient(_standardize(vector), deg.diversity)
    return scores, info


def eci(M, dense_cutoff: int = DENSE_CUTOFF, tol: float = POWER_TOL,
        max_iter: int = POWER_MAX_ITER, year: int | None = None) -> ComplexityScores:
    """Eigenvector complexity scores for regions and industries.

    Region scores standardize the eigenvector of Mt's second-largest
    eigenvalue, oriented to covary nonnegatively with diversity. Industry
    scores apply the same construction to the transposed matrix, oriented
    to covary nonnegatively with rarity (negative ubiquity). Problems
    larger than ``dense_cutoff`` regions switch from a full
    eigendecomposition to deflated power iteration.
    """
    values, region_catalog, industry_catalog, strategy = _values_and_catalogs(M)
    region_scores, region_info = _eci_side(values, dense_cutoff, tol, max_iter)

    deg = degrees(values)
    transposed, industry_info = _eci_side(values.T, dense_cutoff, tol, max_iter)
    # _eci_side orients against row sums, which are ubiquities here;
    # industries are scored high when rare, so re-orient against -ubiquity.
    industry_scores = _orient(transposed, -deg.ubiquity)

    return ComplexityScores(
        index_kind="ECI",
        region_scores=region_scores,
        industry_scores=industry_scores,
        region_catalog=region_catalog,
        industry_catalog=industry_catalog,
        strategy=strategy,
        year=year,
        iterations=max(region_info.get("iterations", 0), industry_info.get("iterations", 0)),
        residual=0.0,
        converged=True,
        metadata={
            "sign_convention": "nonnegative covariance with diversity "
                               "(industries: with negative ubiquity)",
            "region_solver": region_info,
            "industry_solver": industry_info,
        },
    )


def fitness(M, max_iter: int = FI_MAX_ITER, tol: float = FI_TOL,
            year: int | None = None) -> ComplexityScores:
    """Fitness/complexity fixed point.

    Iterates F~ = M Q and Q~ = 1 / (M' (1/F)), normalizing each vector by
    its mean every step from F = Q = 1, until the largest relative change
    drops below ``tol``. Non-convergence is reported on the result, not
    raised: the ranking of F typically stabilizes long before the values
    do on strongly nested matrices.
    """
    if max_iter < 1:
        raise ValidationError("max_iter must be at least 1")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    values, region_catalog, industry_catalog, strategy = _values_and_catalogs(M)
    degrees(values)  # enforces the pruned precondition

    F = np.ones(values.shape[0])
    Q = np.ones(values.shape[1])
    mean_history = []
    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        F_raw = values @ Q
        Q_raw = 1.0 / (values.T @ (1.0 / F))
        if not (np.all(np.isfinite(F_raw)) and np.all(np.isfinite(Q_raw))):
            raise NumericError("fitness iteration produced NaN or infinity")
        F_next = F_raw / F_raw.mean()
        Q_next = Q_raw / Q_raw.mean()
        residual = max(
            np.abs((F_next - F) / F).max(),
            np.abs((Q_next - Q) / Q).max(),
        )
        F, Q = F_next, Q_next
        mean_history.append((float(F.mean()), float(Q.mean())))
        if residual < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"fitness iteration stopped at max_iter={max_iter} with relative "
            f"change {residual:.3g} (tol {tol:g}); scores returned unconverged",
            RuntimeWarning,
            stacklevel=2,
        )

    return ComplexityScores(
        index_kind="FI",
        region_scores=F,
        industry_scores=Q,
        region_catalog=region_catalog,
        industry_catalog=industry_catalog,
        strategy=strategy,
        year=year,
        iterations=iterations,
        residual=float(residual),
        converged=converged,
        metadata={"mean_history": mean_history, "tol": tol, "max_iter": max_iter},
    )
