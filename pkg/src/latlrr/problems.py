"""Seeded test-problem generation: ``X = U diag(sigma) V^T`` with chosen spectra."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

__all__ = ["ProblemSpec", "random_orthonormal", "make_spectrum", "generate_matrix", "random_spec"]

SPECTRA = ("generic", "repeated", "decaying")


@dataclass(frozen=True)
class ProblemSpec:
    """Shape, rank and spectrum of a synthetic data matrix.

    ``groups`` is used by the ``repeated`` spectrum (sizes summing to
    ``rank``); ``ratio`` by the ``decaying`` spectrum (``sigma_i = ratio**i``).
    """

    rows: int
    cols: int
    rank: int
    spectrum: str = "generic"
    groups: Tuple[int, ...] = field(default=())
    ratio: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if not 1 <= self.rank <= min(self.rows, self.cols):
            raise ValueError(f"rank must lie in [1, {min(self.rows, self.cols)}], got {self.rank}")
        if self.spectrum not in SPECTRA:
            raise ValueError(f"spectrum must be one of {SPECTRA}, got {self.spectrum!r}")
        object.__setattr__(self, "groups", tuple(int(g) for g in self.groups))
        if self.spectrum == "repeated":
            if not self.groups or min(self.groups) < 1 or sum(self.groups) != self.rank:
                raise ValueError(f"repeated groups {self.groups} must be positive and sum to rank {self.rank}")
        if self.spectrum == "decaying" and not 0.0 < self.ratio < 1.0:
            raise ValueError("decaying ratio must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "rank": self.rank,
            "spectrum": self.spectrum,
            "groups": list(self.groups),
            "ratio": self.ratio,
            "seed": self.seed,
        }


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``rows x cols`` matrix with orthonormal columns."""
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.sign(np.diag(r))


def _separated_values(count: int, rng: np.random.Generator, low=1.0, high=10.0) -> np.ndarray:
    # Distinct values with gaps well above any grouping tolerance.
    min_gap = 0.2 * (high - low) / max(count, 1) ** 2
    while True:
        vals = np.sort(rng.uniform(low, high, count))[::-1]
        if count == 1 or np.min(-np.diff(vals)) > min_gap:
            return vals


def make_spectrum(spec: ProblemSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.spectrum == "generic":
        return _separated_values(spec.rank, rng)
    if spec.spectrum == "repeated":
        levels = _separated_values(len(spec.groups), rng)
        return np.repeat(levels, spec.groups)
    return spec.ratio ** np.arange(spec.rank, dtype=np.float64)


def generate_matrix(spec: ProblemSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    sigma = make_spectrum(spec, rng)
    U = random_orthonormal(spec.rows, spec.rank, rng)
    V = random_orthonormal(spec.cols, spec.rank, rng)
    return (U * sigma) @ V.T


def random_spec(
    rng: np.random.Generator,
    max_dim: int = 60,
    max_rank: int = 20,
    spectrum: Optional[str] = None,
    rank: Optional[int] = None,
) -> ProblemSpec:
    """Draw a random desk-scale :class:`ProblemSpec` (generic or repeated spectrum).

    A fixed ``rank`` draws both dimensions from ``[rank, max_dim]``.
    """
    if rank is None:
        rows = int(rng.integers(1, max_dim + 1))
        cols = int(rng.integers(1, max_dim + 1))
        rank = int(rng.integers(1, min(rows, cols, max_rank) + 1))
    else:
        rows = int(rng.integers(rank, max_dim + 1))
        cols = int(rng.integers(rank, max_dim + 1))
    if spectrum is None:
        spectrum = "repeated" if rng.random() < 0.5 and rank > 1 else "generic"
    groups: Tuple[int, ...] = ()
    if spectrum == "repeated":
        cuts = np.sort(rng.choice(np.arange(1, rank), size=int(rng.integers(0, rank)), replace=False)) if rank > 1 else []
        bounds = [0, *map(int, cuts), rank]
        groups = tuple(b - a for a, b in zip(bounds[:-1], bounds[1:]))
    return ProblemSpec(rows, cols, rank, spectrum, groups, seed=int(rng.integers(2**31)))
