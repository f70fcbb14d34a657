"""Nuclear-norm optima of LatLRR that are not rank optima.

Any admissible non-idempotent ``W`` gives a pair ``(V_X W V_X^T,
U_X (I - W) U_X^T)`` whose nuclear objective is the optimum ``rank(X)``
while its rank objective exceeds ``rank(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .linalg import ToleranceProfile, as_matrix, block_partition, skinny_svd
from .solutions import LatlrrPair, NuclearSolutionParams, latlrr_nuclear_solution, sample_nuclear_W
from .verify import CertificateReport, characterize_theorem2

__all__ = [
    "CounterexampleReport",
    "ExhibitResult",
    "SamplerFailure",
    "build_canonical_counterexample",
    "build_random_counterexample",
    "non_uniqueness_exhibit",
]


class SamplerFailure(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


@dataclass
class CounterexampleReport:
    X_descriptor: dict
    W_hat_used: np.ndarray
    nuclear_objective: float
    rank_objective: int
    rank_of_X: int
    gap: int
    idempotency_residual: float
    verdict: bool
    certificate: Optional[CertificateReport] = None
    pair: Optional[LatlrrPair] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "X_descriptor": dict(self.X_descriptor),
            "W_hat_used": self.W_hat_used,
            "nuclear_objective": self.nuclear_objective,
            "rank_objective": self.rank_objective,
            "rank_of_X": self.rank_of_X,
            "gap": self.gap,
            "idempotency_residual": self.idempotency_residual,
            "verdict": self.verdict,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def _descriptor(X: np.ndarray, r: int, seed) -> dict:
    return {"rows": int(X.shape[0]), "cols": int(X.shape[1]), "rank": r, "seed": seed}


def _report(X, W, tol: ToleranceProfile, seed=None) -> CounterexampleReport:
    Xs = skinny_svd(X, tol)
    part = block_partition(Xs.sigma, tol)
    pair = latlrr_nuclear_solution(X, NuclearSolutionParams(W, part), tol)
    cert = characterize_theorem2(X, pair.Z, pair.L, tol)
    gap = cert.rank_objective - cert.rank_of_X
    return CounterexampleReport(
        X_descriptor=_descriptor(X, cert.rank_of_X, seed),
        W_hat_used=W,
        nuclear_objective=cert.nuclear_objective,
        rank_objective=cert.rank_objective,
        rank_of_X=cert.rank_of_X,
        gap=gap,
        idempotency_residual=float(np.linalg.norm(W @ W - W)),
        verdict=gap > 0 and cert.nuclear_optimal,
        certificate=cert,
        pair=pair,
    )


def build_canonical_counterexample(X, tol: ToleranceProfile) -> CounterexampleReport:
    """Counterexample with ``W = I / 2``, i.e. ``Z = X^+ X / 2`` and ``L = X X^+ / 2``."""
    X = as_matrix(X, "X")
    r = skinny_svd(X, tol).rank
    return _report(X, 0.5 * np.eye(r), tol)


def build_random_counterexample(X, min_idem_residual: float = 0.05, rng_seed=None,
                                tol: ToleranceProfile | None = None, max_tries: int = 1000) -> CounterexampleReport:
    """Counterexample from a random admissible ``W`` with ``||W^2 - W||_F >= min_idem_residual``."""
    tol = tol or ToleranceProfile()
    X = as_matrix(X, "X")
    part = block_partition(skinny_svd(X, tol).sigma, tol)
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_tries):
        W = sample_nuclear_W(part, rng)
        if np.linalg.norm(W @ W - W) >= min_idem_residual:
            return _report(X, W, tol, seed=rng_seed if isinstance(rng_seed, int) else None)
    raise SamplerFailure(f"no W with idempotency residual >= {min_idem_residual} in {max_tries} draws")


@dataclass
class ExhibitResult:
    pairs: List[LatlrrPair]
    W_hats: List[np.ndarray]
    certificates: List[CertificateReport]
    distances: np.ndarray

    def to_dict(self) -> dict:
        return {
            "count": len(self.pairs),
            "members": [
                {"W_hat": W, "certificate": c.to_dict()}
                for W, c in zip(self.W_hats, self.certificates)
            ],
            "pairwise_Z_distances": self.distances.tolist(),
        }


def non_uniqueness_exhibit(X, count: int, rng_seed=None, tol: ToleranceProfile | None = None,
                           min_rel_distance: float = 0.01, max_tries: int = 1000) -> ExhibitResult:
    """``count`` distinct certified nuclear-LatLRR optima.

    The first two members are ``W = I`` and ``W = I / 2``; the rest are
    random admissible ``W`` at relative Frobenius distance of at least
    ``min_rel_distance`` (relative to ``||X^+ X||_F``) from all others.
    """
    tol = tol or ToleranceProfile()
    if count < 2:
        raise ValueError("the exhibit needs count >= 2")
    X = as_matrix(X, "X")
    Xs = skinny_svd(X, tol)
    r = Xs.rank
    part = block_partition(Xs.sigma, tol)
    # ||Z_i - Z_j||_F = ||W_i - W_j||_F because V_X has orthonormal columns.
    threshold = min_rel_distance * np.sqrt(r)
    W_hats = [np.eye(r), 0.5 * np.eye(r)]
    rng = np.random.default_rng(rng_seed)
    tries = 0
    while len(W_hats) < count:
        if tries >= max_tries:
            raise SamplerFailure(f"could not draw {count} mutually distinct optima")
        tries += 1
        W = sample_nuclear_W(part, rng)
        if all(np.linalg.norm(W - other) >= threshold for other in W_hats):
            W_hats.append(W)
    pairs = [latlrr_nuclear_solution(X, NuclearSolutionParams(W, part), tol) for W in W_hats]
    certs = [characterize_theorem2(X, p.Z, p.L, tol) for p in pairs]
    dist = np.array([[np.linalg.norm(a.Z - b.Z) for b in pairs] for a in pairs])
    return ExhibitResult(pairs, W_hats, certs, dist)
