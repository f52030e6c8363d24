"""Shape-matrix estimators for zero-mean complex elliptical data.

Three estimators are provided, all returning the shape matrix normalized so
its top-left entry is exactly one, along with a trace-N renormalized copy:

* ``scm`` - the sample covariance matrix, cheap but fragile under heavy tails;
* ``tyler`` - the distribution-free fixed-point M-estimator;
* ``one_step_r_estimate`` - a single closed-form rank-based correction applied
  to any root-L-consistent preliminary estimate, combining the robustness of
  the preliminary with near-efficient use of the data.

Datasets are (L, N) complex arrays with one observation per row.  Estimates
are pure functions of (data, options, stream state), so replicate-level
parallelism just needs one random stream per replicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DataError,
    DegenerateDataError,
    DomainError,
    IllConditionedError,
    PerturbationError,
    SingularMatrixError,
)
from .linalg import herm_inv_sqrt, ovec, structural_operators, unovec, whitened_projector
from .sampling import as_generator
from .scores import ranks

_DENOM_FLOOR = 1e-14     # degenerate-perturbation threshold
_COND_LIMIT = 1e12       # condition ceiling for the one-step linear solve
_MAX_H0_REDRAWS = 10

__all__ = [
    "EstimatorDiagnostics",
    "EstimatorOutput",
    "RankStatistics",
    "trace_normalize",
    "scm",
    "tyler",
    "rank_statistics",
    "rank_central_sequence",
    "random_hermitian_perturbation",
    "cross_information_scale",
    "one_step_r_estimate",
]


@dataclass
class EstimatorDiagnostics:
    iterations: int = 0
    residual: float = 0.0
    alpha: float | None = None
    central_norm: float | None = None
    nonpd: bool = False
    perturbation_redraws: int = 0


@dataclass
class EstimatorOutput:
    """shape has [0,0] pinned to 1; renormalized is scaled to trace N."""

    shape: np.ndarray
    renormalized: np.ndarray
    diagnostics: EstimatorDiagnostics = field(default_factory=EstimatorDiagnostics)


@dataclass
class RankStatistics:
    """Per-observation quadratic forms, whitened directions, and their ranks."""

    mahalanobis: np.ndarray   # (L,) positive reals
    directions: np.ndarray    # (L, N) unit vectors
    ranks: np.ndarray         # permutation of 1..L


def _as_data(data):
    z = np.asarray(data, dtype=np.complex128)
    if z.ndim != 2 or z.shape[0] < 1:
        raise DataError(f"dataset must be a nonempty (L, N) array, got shape {z.shape}")
    if not np.isfinite(z.real).all() or not np.isfinite(z.imag).all():
        raise DataError("dataset contains non-finite entries")
    return z


def _pin_top_left(matrix, context):
    h = 0.5 * (matrix + matrix.conj().T)
    top = h[0, 0].real
    if top <= 0.0:
        raise DegenerateDataError(f"{context}: top-left entry {top:.6e} is not positive")
    h = h / top
    h[0, 0] = 1.0
    return h


def trace_normalize(matrix):
    """Rescale a shape matrix to trace N (the plotting normalization)."""
    m = np.asarray(matrix, dtype=np.complex128)
    tr = np.trace(m).real
    if tr <= 0.0:
        raise DegenerateDataError(f"trace_normalize: non-positive trace {tr:.6e}")
    return m * (m.shape[0] / tr)


def scm(data):
    """Sample covariance matrix, normalized to a shape matrix.

    Root-L-consistent for the shape under finite second moments, whatever the
    density generator.
    """
    z = _as_data(data)
    n_obs = z.shape[0]
    sigma = z.T @ z.conj() / n_obs
    shape = _pin_top_left(sigma, "scm")
    return EstimatorOutput(shape=shape, renormalized=trace_normalize(shape))


def tyler(data, tol=1e-9, max_iter=200):
    """Tyler's fixed-point shape estimator with the top-left constraint.

    Iterates V <- (N/L) sum_l z_l z_l^H / (z_l^H V^{-1} z_l) from the identity
    until the relative Frobenius change drops below ``tol``; the top-left
    normalization is applied once after convergence.
    """
    z = _as_data(data)
    n_obs, dim = z.shape
    if n_obs <= dim:
        raise DataError(f"tyler requires L > N, got L={n_obs}, N={dim}")
    zc = z.conj()
    sq_norms = (z.real**2 + z.imag**2).sum(axis=1)
    if sq_norms.min() <= 0.0:
        raise DataError("tyler requires nonzero observation vectors")
    v = np.eye(dim, dtype=np.complex128)
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        try:
            v_inv = np.linalg.inv(v)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(f"tyler iterate became singular: {exc}") from exc
        quad = np.einsum("li,li->l", zc, z @ v_inv.T).real
        if quad.min() <= 0.0:
            raise SingularMatrixError(
                "tyler: nonpositive quadratic form; data may be rank deficient"
            )
        v_new = (dim / n_obs) * (z.T @ (zc / quad[:, None]))
        residual = float(np.linalg.norm(v_new - v) / np.linalg.norm(v))
        v = v_new
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"tyler did not converge in {max_iter} iterations (residual {residual:.3e})",
            residual=residual,
            iterations=max_iter,
        )
    shape = _pin_top_left(v, "tyler")
    return EstimatorOutput(
        shape=shape,
        renormalized=trace_normalize(shape),
        diagnostics=EstimatorDiagnostics(iterations=iteration, residual=residual),
    )


def rank_statistics(data, shape_matrix):
    """Quadratic forms z^H V^{-1} z, whitened unit directions, and the ranks
    of the quadratic forms, all relative to a candidate shape matrix."""
    z = _as_data(data)
    w = herm_inv_sqrt(shape_matrix)
    y = z @ w.T
    quad = np.einsum("li,li->l", y.conj(), y).real
    if quad.min() <= 0.0:
        raise DataError("rank_statistics requires nonzero observation vectors")
    directions = y / np.sqrt(quad)[:, None]
    return RankStatistics(mahalanobis=quad, directions=directions, ranks=ranks(quad))


def _score_grid(score, n_obs):
    # The L evaluation points r/(L+1) are fixed by L; evaluate once per estimate.
    return np.array([score(r / (n_obs + 1.0)) for r in range(1, n_obs + 1)])


def rank_central_sequence(stats, projector, score=None, score_at_rank=None):
    """Rank-weighted central sequence: the projected, score-weighted sum of
    outer products of the whitened directions, scaled by L^{-1/2}."""
    n_obs = stats.ranks.size
    if score_at_rank is None:
        score_at_rank = _score_grid(score, n_obs)
    weights = score_at_rank[stats.ranks - 1]
    u = stats.directions
    weighted = (u * weights[:, None]).T @ u.conj()
    return projector @ weighted.ravel(order="F") / math.sqrt(n_obs)


def random_hermitian_perturbation(dim, scale, rng):
    """Hermitian perturbation (G + G^H)/2 with CN(0, scale^2) entries and a
    zero top-left entry."""
    if not scale > 0.0:
        raise DomainError(f"perturbation scale must be positive, got {scale}")
    gen = as_generator(rng)
    parts = gen.standard_normal(size=(dim, dim, 2))
    g = (scale / math.sqrt(2.0)) * (parts[..., 0] + 1j * parts[..., 1])
    g[0, 0] = 0.0
    return 0.5 * (g + g.conj().T)


def cross_information_scale(
    data,
    shape_matrix,
    score,
    perturbation,
    projector=None,
    *,
    central=None,
    score_at_rank=None,
):
    """Data-driven scalar linking the information matrix to the projector.

    Measures how much the central sequence moves under the L^{-1/2}-scaled
    Hermitian perturbation, normalized by the corresponding linear response of
    the projector; the perturbed shape matrix must remain positive definite.
    """
    z = _as_data(data)
    n_obs = z.shape[0]
    shape_matrix = np.asarray(shape_matrix, dtype=np.complex128)
    if projector is None:
        projector = whitened_projector(shape_matrix)
    denom = float(np.linalg.norm(projector @ (projector.conj().T @ ovec(perturbation))))
    if denom < _DENOM_FLOOR:
        raise PerturbationError(f"degenerate perturbation: response norm {denom:.3e}")
    if score_at_rank is None:
        score_at_rank = _score_grid(score, n_obs)
    if central is None:
        central = rank_central_sequence(
            rank_statistics(z, shape_matrix), projector, score_at_rank=score_at_rank
        )
    perturbed = shape_matrix + perturbation / math.sqrt(n_obs)
    central_perturbed = rank_central_sequence(
        rank_statistics(z, perturbed),
        whitened_projector(perturbed),
        score_at_rank=score_at_rank,
    )
    return float(np.linalg.norm(central_perturbed - central)) / denom


def one_step_r_estimate(data, preliminary, score, rng, *, upsilon=0.01):
    """One-step rank-based shape estimate from a preliminary estimate.

    The update adds a single closed-form correction in ovec coordinates:
    the inverse of the estimated information matrix (cross-information scale
    times projector @ projector^H) applied to the rank central sequence,
    scaled by L^{-1/2}.  No fixed-point iteration is involved.

    The preliminary may be an EstimatorOutput or a shape matrix; its top-left
    entry must be one and it must be positive definite.  ``rng`` drives the
    random Hermitian perturbation used to estimate the cross-information
    scale (entry scale ``upsilon``); the perturbation is redrawn, at most
    10 times, if it pushes the preliminary out of the positive-definite cone.

    The linear update does not guarantee a positive-definite result; a
    non-positive-definite output is flagged in the diagnostics and returned
    unmodified so that downstream error statistics stay unbiased.
    """
    z = _as_data(data)
    n_obs, dim = z.shape
    shape0 = preliminary.shape if isinstance(preliminary, EstimatorOutput) else preliminary
    shape0 = np.asarray(shape0, dtype=np.complex128)
    ops = structural_operators(dim)
    projector = whitened_projector(shape0, ops)
    score_at_rank = _score_grid(score, n_obs)
    stats = rank_statistics(z, shape0)
    central = rank_central_sequence(stats, projector, score_at_rank=score_at_rank)
    central_norm = float(np.linalg.norm(central))

    if central_norm == 0.0:
        # Zero central sequence (e.g. a degenerate score): no correction.
        shape1 = shape0.copy()
        diag = EstimatorDiagnostics(alpha=0.0, central_norm=0.0)
        return EstimatorOutput(shape1, trace_normalize(shape1), diag)

    gen = as_generator(rng)
    sqrt_l = math.sqrt(n_obs)
    for redraws in range(_MAX_H0_REDRAWS):
        perturbation = random_hermitian_perturbation(dim, upsilon, gen)
        if np.linalg.eigvalsh(shape0 + perturbation / sqrt_l)[0] > 0.0:
            break
    else:
        raise PerturbationError(
            f"no positive-definite perturbation found in {_MAX_H0_REDRAWS} draws"
        )

    alpha = cross_information_scale(
        z,
        shape0,
        score,
        perturbation,
        projector,
        central=central,
        score_at_rank=score_at_rank,
    )
    information = alpha * (projector @ projector.conj().T)
    information = 0.5 * (information + information.conj().T)
    eigenvalues = np.linalg.eigvalsh(information)
    if eigenvalues[0] <= 0.0 or eigenvalues[-1] / eigenvalues[0] > _COND_LIMIT:
        raise IllConditionedError(
            f"information matrix condition {eigenvalues[-1]:.3e}/{eigenvalues[0]:.3e} "
            f"exceeds {_COND_LIMIT:.0e}"
        )
    coords = ovec(shape0) + np.linalg.solve(information, central) / sqrt_l
    shape1 = unovec(coords)
    nonpd = bool(np.linalg.eigvalsh(shape1)[0] <= 0.0)
    diag = EstimatorDiagnostics(
        alpha=alpha,
        central_norm=central_norm,
        nonpd=nonpd,
        perturbation_redraws=redraws,
    )
    return EstimatorOutput(shape1, trace_normalize(shape1), diag)
