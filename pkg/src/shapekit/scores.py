"""Score functions that weight rank information, and the rank computation
over Mahalanobis-type statistics.

Three families are provided, all nonnegative and nondecreasing on (0, 1):

* van der Waerden: the Gamma(N, 1) quantile, the Gaussian-reference score;
* Student-t: a bounded score built from the Fisher quantile, tuned by ``dof``;
* power scores ``N (a + 1) u^a`` (a=1 is Wilcoxon, a=2 is Spearman).

Everything here is pure and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError
from .special import fisher_quantile, gamma_quantile

__all__ = [
    "ScoreFunction",
    "VanDerWaerdenScore",
    "StudentTScore",
    "PowerScore",
    "wilcoxon_score",
    "spearman_score",
    "ranks",
]


class ScoreFunction:
    """Base class: a map (0, 1) -> [0, inf) attached to a data dimension."""

    dim: int

    def __call__(self, u):
        raise NotImplementedError

    @staticmethod
    def _check_u(u):
        u = float(u)
        if not 0.0 < u < 1.0:
            raise DomainError(f"score functions are defined on (0, 1), got u={u}")
        return u


@dataclass(frozen=True)
class VanDerWaerdenScore(ScoreFunction):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")

    def __call__(self, u):
        u = self._check_u(u)
        return gamma_quantile(self.dim, u).value


@dataclass(frozen=True)
class StudentTScore(ScoreFunction):
    """Bounded score with supremum dim + dof/2; heavier weighting of central
    ranks makes it the better choice under extremely heavy tails."""

    dim: int
    dof: float = 5.0

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if not self.dof > 0.0:
            raise DomainError(f"dof must be positive, got {self.dof}")

    def __call__(self, u):
        u = self._check_u(u)
        n = self.dim
        q = fisher_quantile(2 * n, self.dof, u).value
        return n * (2.0 * n + self.dof) * q / (self.dof + 2.0 * n * q)


@dataclass(frozen=True)
class PowerScore(ScoreFunction):
    dim: int
    exponent: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if self.exponent < 0.0:
            raise DomainError(f"exponent must be >= 0, got {self.exponent}")

    def __call__(self, u):
        u = self._check_u(u)
        return self.dim * (self.exponent + 1.0) * u ** self.exponent


def wilcoxon_score(dim):
    return PowerScore(dim, 1.0)


def spearman_score(dim):
    return PowerScore(dim, 2.0)


def ranks(values):
    """Ascending ranks 1..L; ties are broken by original index order.

    values must be finite reals.  The rank of an entry is one plus the number
    of strictly smaller entries, with equal entries ordered by position.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DataError(f"ranks requires a nonempty 1-D sequence, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise DataError("ranks requires finite values")
    order = np.argsort(v, kind="stable")
    out = np.empty(v.size, dtype=np.int64)
    out[order] = np.arange(1, v.size + 1)
    return out
