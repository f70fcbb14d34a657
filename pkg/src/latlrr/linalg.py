"""Dense linear-algebra kernels and tolerance-aware predicates.

Every predicate takes an explicit :class:`ToleranceProfile`; there are no
module-level tolerances.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Sequence, Tuple

import numpy as np

__all__ = [
    "ToleranceProfile",
    "SkinnySvd",
    "BlockPartition",
    "ZeroMatrixError",
    "as_matrix",
    "skinny_svd",
    "pseudo_inverse",
    "numerical_rank",
    "nuclear_norm",
    "spectral_norm",
    "is_idempotent",
    "is_psd",
    "block_partition",
    "is_block_compatible",
    "rel_residual",
    "orthogonal_complement",
]


class ZeroMatrixError(ValueError):
    """Raised when an operation needs a nonzero matrix (invertible Sigma_X)."""


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical cutoffs shared by every predicate.

    Attributes
    ----------
    rank_rel_tol : float
        Singular values at or below ``rank_rel_tol * sigma_max`` count as zero.
    eq_rel_tol : float
        Relative Frobenius cutoff for matrix equalities.
    psd_tol : float
        Allowed negativity of the smallest eigenvalue.
    sigma_group_rel_tol : float
        Consecutive singular values closer than ``sigma_group_rel_tol * sigma_1``
        belong to the same block.
    """

    rank_rel_tol: float = 1e-8
    eq_rel_tol: float = 1e-9
    psd_tol: float = 1e-10
    sigma_group_rel_tol: float = 1e-8

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        if self.rank_rel_tol <= np.finfo(np.float64).eps:
            raise ValueError("rank_rel_tol must exceed machine epsilon")

    @classmethod
    def uniform(cls, tol: float) -> "ToleranceProfile":
        """Profile with every cutoff set to ``tol``."""
        return cls(tol, tol, tol, tol)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SkinnySvd:
    """``A = U @ diag(sigma) @ V.T`` keeping only the nonzero singular values."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous, disjoint, covering index groups over ``range(size)``.

    Groups are stored as half-open ``(start, stop)`` pairs using 0-based
    indices.
    """

    groups: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("a block partition needs at least one group")
        expected = 0
        for start, stop in self.groups:
            if start != expected or stop <= start:
                raise ValueError(f"groups are not contiguous and covering: {self.groups}")
            expected = stop
        object.__setattr__(self, "groups", tuple((int(a), int(b)) for a, b in self.groups))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "BlockPartition":
        groups, start = [], 0
        for size in sizes:
            groups.append((start, start + int(size)))
            start += int(size)
        return cls(tuple(groups))

    @property
    def size(self) -> int:
        return self.groups[-1][1]

    @property
    def sizes(self) -> List[int]:
        return [stop - start for start, stop in self.groups]

    def mask(self) -> np.ndarray:
        """Boolean ``size x size`` mask that is True on the diagonal blocks."""
        m = np.zeros((self.size, self.size), dtype=bool)
        for start, stop in self.groups:
            m[start:stop, start:stop] = True
        return m

    def to_dict(self) -> dict:
        return {"groups": [list(g) for g in self.groups]}


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def _square(a, name: str) -> np.ndarray:
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def _scale(w: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(w)))


def rel_residual(a: np.ndarray, b: np.ndarray, scale: float | None = None) -> float:
    """``||a - b||_F / scale`` with ``scale`` defaulting to ``max(1, ||b||_F)``."""
    if scale is None:
        scale = _scale(b)
    return float(np.linalg.norm(a - b)) / scale


def skinny_svd(X, tol: ToleranceProfile) -> SkinnySvd:
    """Skinny SVD of ``X``, keeping singular values above ``rank_rel_tol * sigma_max``.

    Column signs are fixed so the largest-magnitude entry of each left
    singular vector is positive, making the factors reproducible.

    Raises
    ------
    ZeroMatrixError
        If ``X`` has no singular value above zero.
    """
    X = as_matrix(X, "X")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[0] == 0.0:
        raise ZeroMatrixError("skinny SVD of the zero matrix is undefined")
    r = int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))
    U, s, V = U[:, :r], s[:r], Vt[:r].T
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(r)])
    signs[signs == 0] = 1.0
    return SkinnySvd(U * signs, s.copy(), V * signs)


def pseudo_inverse(X, tol: ToleranceProfile) -> np.ndarray:
    """Moore-Penrose pseudo-inverse ``V diag(1/sigma) U^T`` from the skinny SVD."""
    svd = skinny_svd(X, tol)
    return (svd.V / svd.sigma) @ svd.U.T


def numerical_rank(X, tol: ToleranceProfile) -> int:
    X = as_matrix(X, "X")
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))


def nuclear_norm(X) -> float:
    """Sum of all singular values."""
    return float(np.sum(np.linalg.svd(as_matrix(X, "X"), compute_uv=False)))


def spectral_norm(X) -> float:
    return float(np.linalg.norm(as_matrix(X, "X"), 2))


def is_idempotent(W, tol: ToleranceProfile) -> bool:
    W = _square(W, "W")
    return float(np.linalg.norm(W @ W - W)) <= tol.eq_rel_tol * _scale(W)


def is_psd(W, tol: ToleranceProfile) -> bool:
    """Symmetric (within ``eq_rel_tol``) with eigenvalues no smaller than ``-psd_tol``."""
    W = _square(W, "W")
    if float(np.linalg.norm(W - W.T)) > tol.eq_rel_tol * _scale(W):
        return False
    return float(np.linalg.eigvalsh((W + W.T) / 2)[0]) >= -tol.psd_tol


def block_partition(sigma, tol: ToleranceProfile) -> BlockPartition:
    """Group sorted singular values whose consecutive gaps are within tolerance.

    Grouping chains transitively: ``i`` and ``i + 1`` share a group whenever
    ``sigma[i] - sigma[i + 1] <= sigma_group_rel_tol * sigma[0]``.
    """
    sigma = np.asarray(sigma, dtype=np.float64).ravel()
    if sigma.size == 0:
        raise ValueError("block_partition needs at least one singular value")
    if np.any(sigma <= 0) or np.any(np.diff(sigma) > 0):
        raise ValueError("sigma must be positive and sorted non-increasing")
    cutoff = tol.sigma_group_rel_tol * sigma[0]
    sizes = [1]
    for gap in -np.diff(sigma):
        if gap <= cutoff:
            sizes[-1] += 1
        else:
            sizes.append(1)
    return BlockPartition.from_sizes(sizes)


def is_block_compatible(W, part: BlockPartition, tol: ToleranceProfile) -> bool:
    """True iff ``W`` vanishes (within tolerance) outside the diagonal blocks."""
    W = _square(W, "W")
    if W.shape[0] != part.size:
        raise ValueError(f"W has size {W.shape[0]} but the partition covers {part.size}")
    off = np.abs(W[~part.mask()])
    return off.size == 0 or float(off.max()) <= tol.eq_rel_tol * _scale(W)


def orthogonal_complement(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis (possibly empty) of the complement of ``Range(Q)``.

    ``Q`` must have orthonormal columns.
    """
    Q = np.asarray(Q, dtype=np.float64)
    full, _ = np.linalg.qr(Q, mode="complete")
    return full[:, Q.shape[1]:]
