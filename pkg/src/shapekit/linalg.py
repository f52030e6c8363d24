"""Complex Hermitian linear-algebra primitives and the structural operators
used by the one-step shape-matrix update.

Conventions fixed here for the whole package:

* ``vec`` stacks a matrix column-major (Fortran order).
* ``ovec`` is ``vec`` with the first element removed, so a shape matrix with
  its top-left entry pinned to one is fully described by its ``ovec``.
* Shape matrices are plain complex128 ndarrays whose [0, 0] entry is set to
  exactly 1.0.

Everything operates on small dense matrices (N up to a few dozen); there is
no attempt at being a general linear-algebra library.  All functions are pure
and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy import kron

from .errors import DimensionError, SingularMatrixError

_PD_CLIP = 1e-12  # relative eigenvalue floor for "positive definite"

__all__ = [
    "vec",
    "unvec",
    "ovec",
    "unovec",
    "kron",
    "frobenius",
    "herm_sqrt",
    "herm_inv_sqrt",
    "StructuralOperators",
    "structural_operators",
    "whitened_projector",
]


def vec(a):
    """Column-major stacking of a matrix into a vector."""
    return np.asarray(a).ravel(order="F")


def unvec(v, rows, cols=None):
    """Inverse of :func:`vec` for a ``rows x cols`` matrix."""
    v = np.asarray(v)
    if cols is None:
        cols = rows
    if v.size != rows * cols:
        raise DimensionError(f"cannot reshape {v.size} entries into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def ovec(a):
    """vec(a) with its first element dropped (square matrices only)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"ovec requires a square matrix, got shape {a.shape}")
    return vec(a)[1:]


def unovec(v):
    """Rebuild a Hermitian shape matrix (top-left pinned to 1) from its ovec.

    The raw reconstruction need not be Hermitian when the coordinates come
    from a linear update, so the result is symmetrized as (M + M^H)/2.
    """
    v = np.asarray(v, dtype=np.complex128)
    n = math.isqrt(v.size + 1)
    if n * n != v.size + 1:
        raise DimensionError(f"ovec length {v.size} is not N^2 - 1 for integer N")
    full = np.concatenate(([1.0 + 0.0j], v))
    m = unvec(full, n)
    m = 0.5 * (m + m.conj().T)
    m[0, 0] = 1.0
    return m


def frobenius(a):
    """Frobenius norm: sqrt of the sum of squared entry moduli."""
    return float(np.linalg.norm(np.asarray(a)))


def _herm_eig(matrix, op_name):
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{op_name} requires a square matrix, got shape {m.shape}")
    w, q = np.linalg.eigh(m)
    floor = _PD_CLIP * float(w[-1])
    if w[0] <= floor:
        raise SingularMatrixError(
            f"{op_name}: smallest eigenvalue {w[0]:.6e} is at or below the "
            f"positive-definiteness floor {floor:.6e}"
        )
    return w, q


def herm_sqrt(matrix):
    """Hermitian square root S of a Hermitian positive-definite matrix, S S = M."""
    w, q = _herm_eig(matrix, "herm_sqrt")
    s = (q * np.sqrt(w)) @ q.conj().T
    return 0.5 * (s + s.conj().T)


def herm_inv_sqrt(matrix):
    """Hermitian W with W M W = I for Hermitian positive-definite M."""
    w, q = _herm_eig(matrix, "herm_inv_sqrt")
    s = (q / np.sqrt(w)) @ q.conj().T
    return 0.5 * (s + s.conj().T)


@dataclass(frozen=True)
class StructuralOperators:
    """Fixed real matrices tied to the vec convention for one dimension N.

    ``drop_first`` maps vec(A) to ovec(A); ``identity_complement`` is the
    orthogonal projector onto the complement of vec(I_N).
    """

    dim: int
    drop_first: np.ndarray          # (N^2 - 1) x N^2
    identity_complement: np.ndarray  # N^2 x N^2


_OPERATOR_CACHE: dict[int, StructuralOperators] = {}


def structural_operators(dim):
    """Build (and memoize) the structural operators for dimension ``dim``."""
    if dim < 1:
        raise DimensionError(f"dimension must be positive, got {dim}")
    ops = _OPERATOR_CACHE.get(dim)
    if ops is None:
        n2 = dim * dim
        drop = np.zeros((n2 - 1, n2))
        drop[np.arange(n2 - 1), np.arange(1, n2)] = 1.0
        v = vec(np.eye(dim))
        complement = np.eye(n2) - np.outer(v, v) / dim
        ops = StructuralOperators(dim=dim, drop_first=drop, identity_complement=complement)
        _OPERATOR_CACHE[dim] = ops
    return ops


def whitened_projector(shape_matrix, ops=None):
    """The (N^2-1) x N^2 map: project out the identity direction, whiten by
    the inverse square root of the shape matrix on both sides, drop the first
    vec coordinate.
    """
    shape_matrix = np.asarray(shape_matrix, dtype=np.complex128)
    n = shape_matrix.shape[0]
    if ops is None:
        ops = structural_operators(n)
    elif ops.dim != n:
        raise DimensionError(f"operators built for N={ops.dim}, matrix has N={n}")
    w = herm_inv_sqrt(shape_matrix)
    return ops.drop_first @ kron(w.T, w) @ ops.identity_complement
