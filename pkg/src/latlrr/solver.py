"""Linearized alternating-direction solvers for nuclear LRR and nuclear LatLRR.

Both problems are solved from the augmented Lagrangian of their single
linear constraint. Each nuclear-norm block takes a linearized proximal
(singular value thresholding) step with step size
``1 / (beta * (||X||_2^2 + 1))``; the penalty ``beta`` grows geometrically
up to a cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .linalg import ZeroMatrixError, as_matrix, spectral_norm
from .solutions import LatlrrPair

__all__ = ["SolverOptions", "SolverDiagnostics", "svt", "solve_latlrr", "solve_lrr"]


@dataclass
class SolverOptions:
    """Iteration controls. ``None`` penalties resolve against ``||X||_2``.

    ``penalty_init`` defaults to ``1e-2 * ||X||_2`` and ``penalty_cap`` to
    ``1e6 * penalty_init``. Iteration stops when the relative primal residual
    is at most ``primal_tol`` and the penalty-weighted relative change
    ``beta * sqrt(eta) * ||delta|| / ||X||_F`` is at most ``change_tol``, where
    ``eta = ||X||_2^2 + 1``. ``init="random"`` starts from seeded random
    polynomials in the Gram matrices of ``X`` instead of zeros.
    """

    max_iters: int = 10000
    penalty_init: Optional[float] = None
    penalty_growth: float = 1.1
    penalty_cap: Optional[float] = None
    primal_tol: float = 1e-8
    change_tol: float = 1e-8
    seed: int = 0
    init: str = "zeros"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.penalty_growth < 1:
            raise ValueError("penalty_growth must be >= 1")
        if self.primal_tol <= 0 or self.change_tol <= 0:
            raise ValueError("tolerances must be positive")
        for name in ("penalty_init", "penalty_cap"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.init not in ("zeros", "random"):
            raise ValueError("init must be 'zeros' or 'random'")

    def resolved(self, X: np.ndarray) -> Tuple[float, float]:
        beta0 = self.penalty_init if self.penalty_init is not None else 1e-2 * spectral_norm(X)
        cap = self.penalty_cap if self.penalty_cap is not None else 1e6 * beta0
        return beta0, max(cap, beta0)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class SolverDiagnostics:
    iterations: int
    final_primal_residual: float
    objective_trace: np.ndarray = field(repr=False)
    converged: bool
    penalty_trace: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_primal_residual": self.final_primal_residual,
            "objective_trace": [float(v) for v in self.objective_trace],
            "converged": self.converged,
        }


def svt(Y, threshold: float) -> np.ndarray:
    """Singular value thresholding: ``U diag(max(sigma - threshold, 0)) V^T``.

    This is the proximal operator of ``threshold * ||.||_*``.
    """
    return _svt(as_matrix(Y, "Y"), threshold)[0]


def _svt(Y: np.ndarray, threshold: float) -> Tuple[np.ndarray, float]:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    s = np.maximum(s - threshold, 0.0)
    k = int(np.count_nonzero(s))
    return (U[:, :k] * s[:k]) @ Vt[:k], float(s.sum())


def _random_polynomial(G: np.ndarray, rng: np.random.Generator, degree: int = 3) -> np.ndarray:
    """``sum_j c_j G^j`` for ``j = 1..degree`` with ``c_j`` uniform in ``[0, 1 / degree]``.

    Random starts are polynomials in ``X^T X`` or ``X X^T`` so they stay in the
    row/column spaces of ``X`` and commute with its Gram matrices, like the
    iterates from a zero start. Generic random starts have components along
    which the objective is only quadratically curved; linearized steps cannot
    remove those once the penalty is large.
    """
    out = np.zeros_like(G)
    power = np.eye(G.shape[0])
    for c in rng.uniform(0.0, 1.0 / degree, degree):
        power = power @ G
        out += c * power
    return out


def _scaled_change(beta: float, eta: float, delta: float, ref: float) -> float:
    # Penalty-weighted iterate change; it bounds the dual residual of the linearized scheme.
    return beta * np.sqrt(eta) * delta / ref


def solve_latlrr(X, opts: SolverOptions | None = None) -> Tuple[LatlrrPair, SolverDiagnostics]:
    """Minimize ``||Z||_* + ||L||_*`` subject to ``X = X Z + L X``.

    Returns the final iterate on convergence, otherwise the iterate with the
    smallest primal residual and ``converged=False``.
    """
    opts = opts or SolverOptions()
    X = as_matrix(X, "X")
    x_norm = float(np.linalg.norm(X))
    if x_norm == 0.0:
        raise ZeroMatrixError("solve_latlrr needs a nonzero X")
    m, n = X.shape
    eta = spectral_norm(X) ** 2 + 1.0
    beta, cap = opts.resolved(X)
    if opts.init == "random":
        rng = np.random.default_rng(opts.seed)
        Z = _random_polynomial(X.T @ X / (eta - 1.0), rng)
        L = _random_polynomial(X @ X.T / (eta - 1.0), rng)
    else:
        Z, L = np.zeros((n, n)), np.zeros((m, m))
    Lam = np.zeros((m, n))

    objectives, penalties = [], []
    best = (np.inf, Z, L)
    converged = False
    residual = np.inf
    for _ in range(opts.max_iters):
        step = 1.0 / (beta * eta)
        R = X @ Z + L @ X - X
        Z_new, z_nuc = _svt(Z - step * (X.T @ (Lam + beta * R)), step)
        R = X @ Z_new + L @ X - X
        L_new, l_nuc = _svt(L - step * ((Lam + beta * R) @ X.T), step)
        R = X @ Z_new + L_new @ X - X
        Lam += beta * R

        change = _scaled_change(beta, eta, max(float(np.linalg.norm(Z_new - Z)), float(np.linalg.norm(L_new - L))), x_norm)
        Z, L = Z_new, L_new
        residual = float(np.linalg.norm(R)) / x_norm
        objectives.append(z_nuc + l_nuc)
        penalties.append(beta)
        if residual < best[0]:
            best = (residual, Z, L)
        if residual <= opts.primal_tol and change <= opts.change_tol:
            converged = True
            break
        beta = min(beta * opts.penalty_growth, cap)

    if not converged:
        residual, Z, L = best
    diag = SolverDiagnostics(len(objectives), residual, np.array(objectives), converged, np.array(penalties))
    return LatlrrPair(Z, L), diag


def solve_lrr(X, A, opts: SolverOptions | None = None) -> Tuple[np.ndarray, SolverDiagnostics]:
    """Minimize ``||Z||_*`` subject to ``A = X Z``."""
    opts = opts or SolverOptions()
    X = as_matrix(X, "X")
    A = as_matrix(A, "A")
    if A.shape[0] != X.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows, X has {X.shape[0]}")
    if not np.any(X):
        raise ZeroMatrixError("solve_lrr needs a nonzero X")
    a_norm = max(float(np.linalg.norm(A)), np.finfo(np.float64).tiny)
    eta = spectral_norm(X) ** 2 + 1.0
    beta, cap = opts.resolved(X)
    if opts.init == "random":
        Z = _random_polynomial(X.T @ X / (eta - 1.0), np.random.default_rng(opts.seed)) @ (X.T @ A) / (eta - 1.0)
    else:
        Z = np.zeros((X.shape[1], A.shape[1]))
    Lam = np.zeros_like(A)

    objectives, penalties = [], []
    best = (np.inf, Z)
    converged = False
    residual = np.inf
    for _ in range(opts.max_iters):
        step = 1.0 / (beta * eta)
        R = X @ Z - A
        Z_new, z_nuc = _svt(Z - step * (X.T @ (Lam + beta * R)), step)
        R = X @ Z_new - A
        Lam += beta * R

        change = _scaled_change(beta, eta, float(np.linalg.norm(Z_new - Z)), a_norm)
        Z = Z_new
        residual = float(np.linalg.norm(R)) / a_norm
        objectives.append(z_nuc)
        penalties.append(beta)
        if residual < best[0]:
            best = (residual, Z)
        if residual <= opts.primal_tol and change <= opts.change_tol:
            converged = True
            break
        beta = min(beta * opts.penalty_growth, cap)

    if not converged:
        residual, Z = best
    diag = SolverDiagnostics(len(objectives), residual, np.array(objectives), converged, np.array(penalties))
    return Z, diag
