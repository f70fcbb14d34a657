"""Closed-form members of the LRR and LatLRR solution sets.

Four problems are covered, all noiseless:

* rank LRR        ``min rank(Z)``            s.t. ``A = X Z``
* nuclear LRR     ``min ||Z||_*``            s.t. ``A = X Z``
* rank LatLRR     ``min rank(Z) + rank(L)``  s.t. ``X = X Z + L X``
* nuclear LatLRR  ``min ||Z||_* + ||L||_*``  s.t. ``X = X Z + L X``

With ``X = U_X Sigma_X V_X^T`` (skinny SVD, rank ``r``), every rank-LatLRR
solution is::

    Z = V_X W V_X^T + S1 W V_X^T
    L = U_X Sigma_X (I - W) Sigma_X^{-1} U_X^T + U_X Sigma_X (I - W) S2

for an idempotent ``W`` and side matrices with ``V_X^T S1 = 0``,
``S2 U_X = 0``, ``rank(S1) <= rank(W)``, ``rank(S2) <= rank(I - W)``.
Every nuclear-LatLRR solution is ``Z = V_X W V_X^T``,
``L = U_X (I - W) U_X^T`` with ``W`` block diagonal along the groups of
equal singular values and ``0 <= W <= I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .linalg import (
    BlockPartition,
    ToleranceProfile,
    as_matrix,
    block_partition,
    is_block_compatible,
    is_idempotent,
    is_psd,
    numerical_rank,
    orthogonal_complement,
    pseudo_inverse,
    skinny_svd,
)
from .problems import random_orthonormal

__all__ = [
    "InfeasibleError",
    "ParameterError",
    "RankSolutionParams",
    "NuclearSolutionParams",
    "LatlrrPair",
    "InclusionReport",
    "lrr_rank_solution",
    "lrr_nuclear_solution",
    "feature_rank_solution",
    "latlrr_rank_solution",
    "latlrr_nuclear_solution",
    "rank_params_violations",
    "nuclear_params_violations",
    "sample_idempotent",
    "sample_nuclear_W",
    "sample_side_matrices",
    "sample_rank_params",
    "sample_nuclear_params",
    "lrr_inclusion_check",
]


class InfeasibleError(ValueError):
    """The right-hand side is outside the range the constraint can reach."""


class ParameterError(ValueError):
    """Solution-family parameters violate their side conditions.

    ``violations`` lists each failed condition separately.
    """

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class RankSolutionParams:
    W_tilde: np.ndarray
    S1: np.ndarray
    S2: np.ndarray


@dataclass
class NuclearSolutionParams:
    W_hat: np.ndarray
    partition: BlockPartition


@dataclass
class LatlrrPair:
    Z: np.ndarray
    L: np.ndarray


def _rel_norm(a: np.ndarray, ref: np.ndarray) -> float:
    ref_norm = float(np.linalg.norm(ref))
    return float(np.linalg.norm(a)) / ref_norm if ref_norm > 0 else float(np.linalg.norm(a))


def _check_orthogonal(product: np.ndarray, scale: float, tol: ToleranceProfile) -> bool:
    return float(np.linalg.norm(product)) <= tol.eq_rel_tol * max(1.0, scale)


def lrr_rank_solution(X, A, S, tol: ToleranceProfile) -> np.ndarray:
    """``Z = X^+ A + S V_A^T``: a minimum-rank solution of ``A = X Z``.

    ``S`` must satisfy ``V_X^T S = 0`` and have ``rank(A)`` columns. A zero
    ``A`` has the single minimum-rank solution ``Z = 0`` and ``S`` is ignored.
    """
    X = as_matrix(X, "X")
    A = as_matrix(A, "A")
    if A.shape[0] != X.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows, X has {X.shape[0]}")
    X_pinv = pseudo_inverse(X, tol)
    if _rel_norm(X @ (X_pinv @ A) - A, A) > tol.eq_rel_tol:
        raise InfeasibleError("A is not in Range(X)")
    if not np.any(A):
        return np.zeros((X.shape[1], A.shape[1]))
    S = as_matrix(S, "S")
    Xs = skinny_svd(X, tol)
    As = skinny_svd(A, tol)
    if S.shape != (X.shape[1], As.rank):
        raise ValueError(f"S must have shape {(X.shape[1], As.rank)}, got {S.shape}")
    if not _check_orthogonal(Xs.V.T @ S, float(np.linalg.norm(S)), tol):
        raise ParameterError(["V_X^T S != 0"])
    return X_pinv @ A + S @ As.V.T


def lrr_nuclear_solution(X, A, tol: ToleranceProfile) -> np.ndarray:
    """``X^+ A``, the unique minimum-nuclear-norm solution of ``A = X Z``."""
    X = as_matrix(X, "X")
    A = as_matrix(A, "A")
    X_pinv = pseudo_inverse(X, tol)
    if _rel_norm(X @ (X_pinv @ A) - A, A) > tol.eq_rel_tol:
        raise InfeasibleError("A is not in Range(X)")
    return X_pinv @ A


def feature_rank_solution(X, A, S, tol: ToleranceProfile) -> np.ndarray:
    """``L = A X^+ + U_A S``: a minimum-rank solution of ``A = L X``.

    ``S`` must satisfy ``S U_X = 0`` and have ``rank(A)`` rows.
    """
    X = as_matrix(X, "X")
    A = as_matrix(A, "A")
    if A.shape[1] != X.shape[1]:
        raise ValueError(f"A has {A.shape[1]} columns, X has {X.shape[1]}")
    X_pinv = pseudo_inverse(X, tol)
    if _rel_norm((A @ X_pinv) @ X - A, A) > tol.eq_rel_tol:
        raise InfeasibleError("rows of A are not in the row space of X")
    if not np.any(A):
        return np.zeros((A.shape[0], X.shape[0]))
    S = as_matrix(S, "S")
    Xs = skinny_svd(X, tol)
    As = skinny_svd(A, tol)
    if S.shape != (As.rank, X.shape[0]):
        raise ValueError(f"S must have shape {(As.rank, X.shape[0])}, got {S.shape}")
    if not _check_orthogonal(S @ Xs.U, float(np.linalg.norm(S)), tol):
        raise ParameterError(["S U_X != 0"])
    return A @ X_pinv + As.U @ S


def rank_params_violations(X, p: RankSolutionParams, tol: ToleranceProfile) -> List[str]:
    """Every side condition of the rank-LatLRR family that ``p`` breaks."""
    Xs = skinny_svd(X, tol)
    r = Xs.rank
    n, m = Xs.V.shape[0], Xs.U.shape[0]
    W, S1, S2 = (np.asarray(a, dtype=np.float64) for a in (p.W_tilde, p.S1, p.S2))
    shapes = {"W_tilde": (W.shape, (r, r)), "S1": (S1.shape, (n, r)), "S2": (S2.shape, (r, m))}
    bad = [f"{k} has shape {got}, expected {want}" for k, (got, want) in shapes.items() if got != want]
    if bad:
        return bad
    out = []
    if not is_idempotent(W, tol):
        out.append("W_tilde is not idempotent")
    if not _check_orthogonal(Xs.V.T @ S1, float(np.linalg.norm(S1)), tol):
        out.append("V_X^T S1 != 0")
    if not _check_orthogonal(S2 @ Xs.U, float(np.linalg.norm(S2)), tol):
        out.append("S2 U_X != 0")
    rank_w = numerical_rank(W, tol) if np.any(W) else 0
    comp = np.eye(r) - W
    rank_comp = numerical_rank(comp, tol) if np.any(comp) else 0
    if np.any(S1) and numerical_rank(S1, tol) > rank_w:
        out.append("rank(S1) > rank(W_tilde)")
    if np.any(S2) and numerical_rank(S2, tol) > rank_comp:
        out.append("rank(S2) > rank(I - W_tilde)")
    return out


def latlrr_rank_solution(X, p: RankSolutionParams, tol: ToleranceProfile) -> LatlrrPair:
    """Member of the rank-LatLRR solution family selected by ``p``."""
    X = as_matrix(X, "X")
    violations = rank_params_violations(X, p, tol)
    if violations:
        raise ParameterError(violations)
    Xs = skinny_svd(X, tol)
    U, s, V = Xs.U, Xs.sigma, Xs.V
    W = np.asarray(p.W_tilde, dtype=np.float64)
    comp = np.eye(Xs.rank) - W
    Z = (V + p.S1) @ W @ V.T
    L = (U * s) @ comp @ ((U / s).T + p.S2)
    return LatlrrPair(Z, L)


def nuclear_params_violations(X, p: NuclearSolutionParams, tol: ToleranceProfile) -> List[str]:
    Xs = skinny_svd(X, tol)
    W = np.asarray(p.W_hat, dtype=np.float64)
    if W.shape != (Xs.rank, Xs.rank):
        return [f"W_hat has shape {W.shape}, expected {(Xs.rank, Xs.rank)}"]
    out = []
    expected = block_partition(Xs.sigma, tol)
    if p.partition.size != Xs.rank or not is_block_compatible(W, p.partition, tol):
        out.append(f"W_hat is not block diagonal along its partition {p.partition.sizes}")
    if not is_block_compatible(W, expected, tol):
        out.append("W_hat is not block compatible with Sigma_X")
    if not is_psd(W, tol):
        out.append("W_hat is not positive semi-definite")
    if not is_psd(np.eye(Xs.rank) - W, tol):
        out.append("I - W_hat is not positive semi-definite")
    return out


def latlrr_nuclear_solution(X, p: NuclearSolutionParams, tol: ToleranceProfile) -> LatlrrPair:
    """``Z = V_X W V_X^T``, ``L = U_X (I - W) U_X^T`` for an admissible ``W``."""
    X = as_matrix(X, "X")
    violations = nuclear_params_violations(X, p, tol)
    if violations:
        raise ParameterError(violations)
    Xs = skinny_svd(X, tol)
    W = np.asarray(p.W_hat, dtype=np.float64)
    Z = Xs.V @ W @ Xs.V.T
    L = Xs.U @ (np.eye(Xs.rank) - W) @ Xs.U.T
    return LatlrrPair(Z, L)


def sample_idempotent(r: int, k: int, cond_cap: float = 100.0, rng_seed=None) -> np.ndarray:
    """Random ``r x r`` idempotent of rank ``k``: ``P diag(I_k, 0) P^{-1}``.

    ``P = Q1 diag(d) Q2^T`` with ``d`` log-uniform in ``[1, cond_cap]``, so
    ``cond(P) <= cond_cap``.
    """
    if not 0 <= k <= r:
        raise ValueError(f"need 0 <= k <= r, got k={k}, r={r}")
    if cond_cap <= 1:
        raise ValueError("cond_cap must exceed 1")
    if k == 0:
        return np.zeros((r, r))
    if k == r:
        return np.eye(r)
    rng = np.random.default_rng(rng_seed)
    Q1 = random_orthonormal(r, r, rng)
    Q2 = random_orthonormal(r, r, rng)
    d = np.exp(rng.uniform(0.0, np.log(cond_cap), r))
    P = (Q1 * d) @ Q2.T
    P_inv = (Q2 / d) @ Q1.T
    return P[:, :k] @ P_inv[:k, :]


def sample_nuclear_W(partition: BlockPartition, rng_seed=None, eigenvalues=None) -> np.ndarray:
    """Block-diagonal ``W`` with blocks ``Q_b diag(lam_b) Q_b^T`` and ``lam`` in ``[0, 1]``.

    ``eigenvalues`` (length ``partition.size``) overrides the uniform draw.
    """
    rng = np.random.default_rng(rng_seed)
    r = partition.size
    lam = rng.uniform(0.0, 1.0, r) if eigenvalues is None else np.asarray(eigenvalues, dtype=np.float64)
    if lam.shape != (r,) or np.any(lam < 0) or np.any(lam > 1):
        raise ValueError("eigenvalues must be a length-r vector in [0, 1]")
    W = np.zeros((r, r))
    for start, stop in partition.groups:
        Q = random_orthonormal(stop - start, stop - start, rng)
        block = (Q * lam[start:stop]) @ Q.T
        W[start:stop, start:stop] = (block + block.T) / 2
    return W


def _truncate(M: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros_like(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def sample_side_matrices(X, W_tilde, rng_seed=None, tol: ToleranceProfile | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Random ``(S1, S2)`` meeting the rank-LatLRR side conditions for ``W_tilde``.

    ``S1 = V_perp G1`` and ``S2 = G2 U_perp^T``, where ``V_perp`` and
    ``U_perp`` are orthonormal complements of ``V_X`` and ``U_X`` and the
    Gaussian factors are truncated by SVD to the rank budgets. A trivial
    complement yields an exactly zero side matrix.
    """
    tol = tol or ToleranceProfile()
    X = as_matrix(X, "X")
    Xs = skinny_svd(X, tol)
    r = Xs.rank
    W = as_matrix(W_tilde, "W_tilde")
    if W.shape != (r, r):
        raise ValueError(f"W_tilde must be {r}x{r}")
    rng = np.random.default_rng(rng_seed)
    rank_w = numerical_rank(W, tol) if np.any(W) else 0
    comp = np.eye(r) - W
    rank_comp = numerical_rank(comp, tol) if np.any(comp) else 0
    V_perp = orthogonal_complement(Xs.V)
    U_perp = orthogonal_complement(Xs.U)
    S1 = V_perp @ _truncate(rng.standard_normal((V_perp.shape[1], r)), rank_w)
    S2 = _truncate(rng.standard_normal((r, U_perp.shape[1])), rank_comp) @ U_perp.T
    return S1, S2


def sample_rank_params(X, rng_seed=None, tol: ToleranceProfile | None = None, cond_cap: float = 100.0,
                       k: Optional[int] = None) -> RankSolutionParams:
    """Random admissible :class:`RankSolutionParams` for ``X``."""
    tol = tol or ToleranceProfile()
    rng = np.random.default_rng(rng_seed)
    r = skinny_svd(X, tol).rank
    if k is None:
        k = int(rng.integers(0, r + 1))
    W = sample_idempotent(r, k, cond_cap, rng)
    S1, S2 = sample_side_matrices(X, W, rng, tol)
    return RankSolutionParams(W, S1, S2)


def sample_nuclear_params(X, rng_seed=None, tol: ToleranceProfile | None = None) -> NuclearSolutionParams:
    tol = tol or ToleranceProfile()
    part = block_partition(skinny_svd(X, tol).sigma, tol)
    return NuclearSolutionParams(sample_nuclear_W(part, rng_seed), part)


@dataclass
class InclusionReport:
    """Per-sample verdicts for LRR solutions viewed as LatLRR candidates (``L = 0``)."""

    rank_lrr_in_rank_latlrr: List[bool] = field(default_factory=list)
    nuclear_lrr_in_nuclear_latlrr: bool = False
    nuclear_lrr_in_rank_lrr: bool = False
    rank_lrr_rank_objectives: List[int] = field(default_factory=list)
    nuclear_lrr_nuclear_objective: float = float("nan")

    @property
    def all_ok(self) -> bool:
        return all(self.rank_lrr_in_rank_latlrr) and self.nuclear_lrr_in_nuclear_latlrr and self.nuclear_lrr_in_rank_lrr

    def to_dict(self) -> dict:
        return {
            "rank_lrr_in_rank_latlrr": list(self.rank_lrr_in_rank_latlrr),
            "nuclear_lrr_in_nuclear_latlrr": self.nuclear_lrr_in_nuclear_latlrr,
            "nuclear_lrr_in_rank_lrr": self.nuclear_lrr_in_rank_lrr,
            "rank_lrr_rank_objectives": list(self.rank_lrr_rank_objectives),
            "nuclear_lrr_nuclear_objective": self.nuclear_lrr_nuclear_objective,
            "all_ok": self.all_ok,
        }


def lrr_inclusion_check(X, tol: ToleranceProfile, samples: int = 5, rng_seed=None) -> InclusionReport:
    """Check that LRR solutions (``A = X``), paired with ``L = 0``, solve LatLRR.

    Rank-LRR samples ``X^+ X + S V_X^T`` must be rank-LatLRR optimal and the
    nuclear-LRR solution ``X^+ X`` must be nuclear-LatLRR optimal.
    """
    from .verify import certify_nuclear_optimal, certify_rank_optimal, nuclear_objective, rank_objective

    X = as_matrix(X, "X")
    Xs = skinny_svd(X, tol)
    rng = np.random.default_rng(rng_seed)
    m, n = X.shape
    L0 = np.zeros((m, m))
    report = InclusionReport()
    V_perp = orthogonal_complement(Xs.V)
    for i in range(samples):
        S = V_perp @ rng.standard_normal((V_perp.shape[1], Xs.rank)) if i else np.zeros((n, Xs.rank))
        Z = lrr_rank_solution(X, X, S, tol)
        report.rank_lrr_rank_objectives.append(rank_objective(Z, L0, tol))
        report.rank_lrr_in_rank_latlrr.append(certify_rank_optimal(X, Z, L0, tol))
    Z_nuc = lrr_nuclear_solution(X, X, tol)
    report.nuclear_lrr_nuclear_objective = nuclear_objective(Z_nuc, L0)
    report.nuclear_lrr_in_nuclear_latlrr = certify_nuclear_optimal(X, Z_nuc, L0, tol)
    report.nuclear_lrr_in_rank_lrr = numerical_rank(Z_nuc, tol) == Xs.rank
    return report
