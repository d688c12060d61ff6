"""Dense-matrix primitives on row spaces.

Everything here works on real 2-D numpy arrays. Void matrices (zero rows
and/or zero columns) are ordinary values: their rank is zero and products
involving them follow numpy's shape rules, which coincide with the usual
conventions (a ``p x 0`` times ``0 x r`` product is the ``p x r`` zero matrix).

Subspaces of ``R^{1 x d}`` are carried as :class:`RowSubspace`, i.e. an
orthonormal basis stacked as rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidShape, NotContained


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs used throughout the package.

    Parameters
    ----------
    rank_rel : float
        Singular values ``<= rank_rel * max(rows, cols) * sigma_max`` count
        as zero.
    residual_abs : float
        Largest absolute entry accepted in a residual that should vanish.
    """

    rank_rel: float = 1e-10
    residual_abs: float = 1e-8

    def __post_init__(self):
        if not (self.rank_rel > 0 and self.residual_abs > 0):
            raise InvalidInput("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D float array (copy-free when possible)."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise InvalidShape(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    return A


def _singular_values(A: np.ndarray) -> np.ndarray:
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def _cutoff(A: np.ndarray, s: np.ndarray, tol: Tolerance) -> float:
    if s.size == 0:
        return 0.0
    return tol.rank_rel * max(A.shape) * s[0]


def rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank; zero for void matrices."""
    A = as_matrix(M)
    s = _singular_values(A)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > _cutoff(A, s, tol)))


def _canonical_signs(B: np.ndarray, tol: Tolerance) -> np.ndarray:
    # leading entry with |.| > tol made positive, row by row
    B = B.copy()
    for i in range(B.shape[0]):
        big = np.flatnonzero(np.abs(B[i]) > tol.rank_rel)
        if big.size and B[i, big[0]] < 0:
            B[i] = -B[i]
    return B


@dataclass(frozen=True)
class RowSubspace:
    """A subspace of ``R^{1 x ambient_dim}`` with an orthonormal row basis."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.size == 0:
            b = np.zeros((0, self.ambient_dim))
        elif b.ndim != 2 or b.shape[1] != self.ambient_dim:
            b = b.reshape(-1, self.ambient_dim)
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def zero(cls, ambient_dim: int) -> "RowSubspace":
        return cls(ambient_dim, np.zeros((0, ambient_dim)))

    @classmethod
    def full(cls, ambient_dim: int) -> "RowSubspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    @classmethod
    def span(cls, rows, tol: Tolerance = DEFAULT_TOL) -> "RowSubspace":
        """Subspace spanned by the rows of ``rows``."""
        A = as_matrix(rows, "rows")
        return cls(A.shape[1], row_basis(A, tol))

    def pad_zeros(self, count: int) -> "RowSubspace":
        """The product subspace ``self x 0_count`` (zeros appended)."""
        b = np.hstack([self.basis, np.zeros((self.dim, count))])
        return RowSubspace(self.ambient_dim + count, b)

    def contains(self, rows, tol: Tolerance = DEFAULT_TOL) -> bool:
        V = as_matrix(rows, "rows")
        if V.shape[1] != self.ambient_dim:
            raise InvalidShape("ambient dimension mismatch")
        if V.shape[0] == 0:
            return True
        resid = V - (V @ self.basis.T) @ self.basis
        return bool(np.max(np.abs(resid), initial=0.0) <= tol.residual_abs)

    def equals(self, other: "RowSubspace", tol: Tolerance = DEFAULT_TOL) -> bool:
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and self.contains(other.basis, tol)
            and other.contains(self.basis, tol)
        )


def row_basis(M, tol: Tolerance = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """Orthonormal basis (as rows) of ``rs M``.

    ``dim`` forces the number of basis vectors instead of using the rank
    cutoff; callers use it when the dimension is known exactly.
    """
    A = as_matrix(M)
    if A.shape[0] == 0 or A.shape[1] == 0:
        return np.zeros((0, A.shape[1]))
    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    if dim is None:
        dim = 0 if s[0] == 0.0 else int(np.count_nonzero(s > _cutoff(A, s, tol)))
    return _canonical_signs(Vh[:dim], tol)


def left_kernel(M, tol: Tolerance = DEFAULT_TOL) -> RowSubspace:
    """``lk M = {v : v M = 0}`` with an orthonormal basis."""
    A = as_matrix(M)
    r, c = A.shape
    if r == 0:
        return RowSubspace.zero(0)
    if c == 0:
        return RowSubspace.full(r)
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    k = 0 if s[0] == 0.0 else int(np.count_nonzero(s > _cutoff(A, s, tol)))
    return RowSubspace(r, _canonical_signs(U[:, k:].T, tol))


def complement_in(inner: RowSubspace, outer: RowSubspace,
                  tol: Tolerance = DEFAULT_TOL) -> RowSubspace:
    """A subspace ``C`` with ``outer = inner (+) C`` and ``C`` orthogonal to ``inner``."""
    if inner.ambient_dim != outer.ambient_dim:
        raise InvalidShape("ambient dimension mismatch")
    if not outer.contains(inner.basis, tol):
        raise NotContained("inner subspace is not contained in outer subspace")
    d = outer.dim - inner.dim
    if d < 0:
        raise NotContained("inner subspace is larger than outer subspace")
    O, I = outer.basis, inner.basis
    X = O - (O @ I.T) @ I
    return RowSubspace(outer.ambient_dim, row_basis(X, tol, dim=d))


def sigma_shift(V: RowSubspace, m: int, p: int) -> RowSubspace:
    """Shift rows ``[v1 | v2]`` to ``[0_m, v1, 0_p, v2]``.

    ``v1`` holds the input-weight block (``kappa*m`` entries) and ``v2`` the
    output-weight block (``kappa*p`` entries).
    """
    w = m + p
    if V.ambient_dim % w:
        raise InvalidShape(f"ambient dimension {V.ambient_dim} not a multiple of m+p={w}")
    kappa = V.ambient_dim // w
    B = V.basis
    out = np.zeros((V.dim, (kappa + 1) * w))
    out[:, m:m + kappa * m] = B[:, :kappa * m]
    out[:, (kappa + 1) * m + p:] = B[:, kappa * m:]
    return RowSubspace((kappa + 1) * w, out)


def subspace_sum(V: RowSubspace, W: RowSubspace, tol: Tolerance = DEFAULT_TOL) -> RowSubspace:
    if V.ambient_dim != W.ambient_dim:
        raise InvalidShape("ambient dimension mismatch")
    return RowSubspace(V.ambient_dim, row_basis(np.vstack([V.basis, W.basis]), tol))


def pinv(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with the same cutoff as :func:`rank`."""
    A = as_matrix(M)
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > _cutoff(A, s, tol)
    return (Vh[keep].T / s[keep]) @ U[:, keep].T


def lstsq_rows(target, regressor, tol: Tolerance = DEFAULT_TOL):
    """Solve ``target = X @ regressor`` in the least-squares sense.

    Returns
    -------
    solution : ndarray
        ``target @ pinv(regressor)``.
    residual : float
        Max-abs entry of ``target - solution @ regressor``.
    """
    Y = as_matrix(target, "target")
    Z = as_matrix(regressor, "regressor")
    if Y.shape[1] != Z.shape[1]:
        raise InvalidShape("target and regressor must have the same number of columns")
    X = Y @ pinv(Z, tol)
    resid = Y - X @ Z
    return X, float(np.max(np.abs(resid), initial=0.0))
