"""Randomized property batteries over the whole library.

Each battery is a pure function of a seed, a list of size caps and a
tolerance profile, and returns a :class:`BatteryResult` with itemized
failures. :func:`run_suite` runs them (optionally in threads) and assembles
the results in a fixed order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .counterexample import build_canonical_counterexample
from .linalg import (
    ToleranceProfile,
    is_psd,
    nuclear_norm,
    numerical_rank,
    pseudo_inverse,
    skinny_svd,
)
from .problems import generate_matrix, random_orthonormal, random_spec
from .solutions import (
    NuclearSolutionParams,
    latlrr_nuclear_solution,
    latlrr_rank_solution,
    lrr_inclusion_check,
    sample_nuclear_params,
    sample_nuclear_W,
    sample_rank_params,
)
from .verify import (
    certify_nuclear_optimal,
    certify_rank_optimal,
    characterize_theorem2,
    check_feasibility,
    nuclear_objective,
    rank_objective,
    subgradient_certificate,
)

__all__ = ["BatteryResult", "BATTERIES", "run_battery", "run_suite", "inclusion_summary", "random_X"]

DEFAULT_SIZES = (10, 30, 60)


@dataclass
class BatteryResult:
    name: str
    total: int = 0
    failures: List[str] = field(default_factory=list)
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> int:
        return self.total - len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, ok: bool, label: str) -> None:
        self.total += 1
        if not ok:
            self.failures.append(label)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "total": self.total,
            "passed": self.passed,
            "ok": self.ok,
            "failures": list(self.failures),
            "details": dict(self.details),
        }


def random_X(rng: np.random.Generator, max_dim: int = 60, max_rank: int = 20, spectrum: Optional[str] = None,
             rank: Optional[int] = None):
    spec = random_spec(rng, max_dim=max_dim, max_rank=max_rank, spectrum=spectrum, rank=rank)
    return spec, generate_matrix(spec)


def _cap(rng, sizes: Sequence[int]) -> int:
    return int(rng.choice(list(sizes)))


def _rank_deficient(rng, max_dim: int) -> np.ndarray:
    m, n = (int(v) for v in rng.integers(1, max_dim + 1, 2))
    k = int(rng.integers(1, min(m, n) + 1))
    return rng.standard_normal((m, k)) @ rng.standard_normal((k, n))


def battery_penrose(rng, sizes, tol, count=200) -> BatteryResult:
    res = BatteryResult("penrose_identities")
    max_dim = min(30, max(sizes))
    for i in range(count):
        X = _rank_deficient(rng, max_dim)
        P = pseudo_inverse(X, tol)
        nx, np_ = np.linalg.norm(X), np.linalg.norm(P)
        errs = (
            np.linalg.norm(X @ P @ X - X) / nx,
            np.linalg.norm(P @ X @ P - P) / np_,
            np.linalg.norm(X @ P - (X @ P).T) / max(1.0, np.linalg.norm(X @ P)),
            np.linalg.norm(P @ X - (P @ X).T) / max(1.0, np.linalg.norm(P @ X)),
        )
        res.check(max(errs) <= 1e-9, f"draw {i}: shape {X.shape}, max Penrose error {max(errs):.3e}")
    return res


def battery_svd(rng, sizes, tol, count=200) -> BatteryResult:
    res = BatteryResult("skinny_svd_invariants")
    for i in range(count):
        _, X = random_X(rng, _cap(rng, sizes))
        s = skinny_svd(X, tol)
        r = s.rank
        ok = (
            np.linalg.norm(s.U.T @ s.U - np.eye(r)) <= 1e-10
            and np.linalg.norm(s.V.T @ s.V - np.eye(r)) <= 1e-10
            and np.all(s.sigma > 0)
            and np.all(np.diff(s.sigma) <= 0)
            and np.linalg.norm(s.reconstruct() - X) <= 1e-12 * np.linalg.norm(X) * max(X.shape)
        )
        res.check(bool(ok), f"draw {i}: shape {X.shape}")
    return res


def battery_trace_bound(rng, sizes, tol, count=1000, psd_count=200, neg_count=200, inject_asymmetric=False) -> BatteryResult:
    """``||Y||_* >= trace(Y)`` with equality exactly for PSD ``Y``."""
    res = BatteryResult("trace_bound")
    max_dim = min(30, max(sizes))
    for i in range(count):
        n = int(rng.integers(1, max_dim + 1))
        Y = rng.standard_normal((n, n))
        gap = nuclear_norm(Y) - np.trace(Y)
        res.check(gap >= -1e-12 * max(1.0, nuclear_norm(Y)), f"random Y {i}: nuclear - trace = {gap:.3e}")
    equality = []
    for i in range(psd_count):
        n = int(rng.integers(1, max_dim + 1))
        Q = random_orthonormal(n, n, rng)
        Y = (Q * rng.uniform(0, 1, n)) @ Q.T
        Y = (Y + Y.T) / 2
        equality.append((Y, True))
    for i in range(neg_count):
        n = int(rng.integers(1, max_dim + 1))
        Q = random_orthonormal(n, n, rng)
        lam = rng.uniform(0, 1, n)
        lam[int(rng.integers(n))] = -rng.uniform(0.1, 1.0)
        equality.append(((Q * lam) @ Q.T, False))
    if inject_asymmetric:
        equality.append((np.array([[1.0, 1.0], [0.0, 1.0]]), False))
    strict = []
    for i, (Y, psd) in enumerate(equality):
        gap = nuclear_norm(Y) - np.trace(Y)
        if psd:
            res.check(abs(gap) <= 1e-10 and is_psd(Y, tol), f"PSD Y {i}: |nuclear - trace| = {abs(gap):.3e}")
        else:
            strict.append(float(gap))
            res.check(gap > tol.psd_tol and not is_psd(Y, tol), f"non-PSD Y {i}: margin {gap:.3e}")
    res.details["strict_inequality_margins_min"] = min(strict) if strict else None
    if inject_asymmetric:
        res.details["injected_asymmetric_margin"] = strict[-1]
        res.details["injected_asymmetric_strict"] = strict[-1] > tol.psd_tol
    return res


def battery_block_nuclear(rng, sizes, tol, count=500) -> BatteryResult:
    """Nuclear norm of a block matrix against its diagonal blocks."""
    res = BatteryResult("block_nuclear_inequality")
    max_dim = min(20, max(sizes))
    for i in range(count):
        p, q, s, t = (int(v) for v in rng.integers(1, max_dim + 1, 4))
        B = rng.standard_normal((p, q))
        zero_case = i % 4 == 0
        if zero_case:
            C, D, F = np.zeros((p, t)), np.zeros((s, q)), np.zeros((s, t))
        else:
            C, D, F = rng.standard_normal((p, t)), rng.standard_normal((s, q)), rng.standard_normal((s, t))
        M = np.block([[B, C], [D, F]])
        full, nb, nf = nuclear_norm(M), nuclear_norm(B), nuclear_norm(F)
        slack = 1e-12 * max(1.0, full)
        res.check(full >= nb + nf - slack and full >= nb - slack, f"draw {i}: inequality violated")
        if zero_case:
            res.check(abs(full - nb) <= 1e-10, f"draw {i}: zero off-blocks but |diff| = {abs(full - nb):.3e}")
        else:
            res.check(full - nb > 1e-10, f"draw {i}: nonzero off-blocks but equality holds")
    return res


def battery_commuting_rank(rng, sizes, tol, count=500) -> BatteryResult:
    """``rank(A + B) <= rank(A) + rank(B) - rank(AB)`` for polynomials of a common matrix."""
    res = BatteryResult("commuting_rank_inequality")
    max_dim = min(20, max(sizes))
    for i in range(count):
        n = int(rng.integers(1, max_dim + 1))
        eig = rng.choice([0.0, 1.0, 2.0, 3.0], n).astype(float)
        Q1, Q2 = random_orthonormal(n, n, rng), random_orthonormal(n, n, rng)
        d = np.exp(rng.uniform(0, np.log(10.0), n))
        P, P_inv = (Q1 * d) @ Q2.T, (Q2 / d) @ Q1.T
        M = (P * eig) @ P_inv
        if i % 2 == 0:
            roots_a = rng.choice([0.0, 1.0, 2.0, 3.0], int(rng.integers(0, 3)), replace=False)
            roots_b = rng.choice([0.0, 1.0, 2.0, 3.0], int(rng.integers(0, 3)), replace=False)
            A, B = _poly(M, roots_a) * rng.uniform(0.5, 2), _poly(M, roots_b) * rng.uniform(0.5, 2)
        else:
            # The pair the bound is applied to: an idempotent and its complement.
            A = (P * (eig > 1.5)) @ P_inv
            B = np.eye(n) - A
        lhs = _rank(A + B, tol)
        rhs = _rank(A, tol) + _rank(B, tol) - _product_rank(A, B, tol)
        res.check(lhs <= rhs, f"draw {i}: rank(A+B)={lhs} > {rhs}")
    return res


def _poly(M, roots):
    out = np.eye(M.shape[0])
    for a in roots:
        out = out @ (M - a * np.eye(M.shape[0]))
    return out


def _rank(M, tol) -> int:
    return numerical_rank(M, tol) if np.any(M) else 0


def _product_rank(A, B, tol) -> int:
    # Cutoff scales with ||A|| ||B||; the product's own norm may be pure rounding.
    s = np.linalg.svd(A @ B, compute_uv=False)
    return int(np.count_nonzero(s > tol.rank_rel_tol * np.linalg.norm(A, 2) * np.linalg.norm(B, 2)))


def battery_rank_family(rng, sizes, tol, count=500) -> BatteryResult:
    res = BatteryResult("rank_latlrr_family")
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        p = sample_rank_params(X, rng, tol)
        pair = latlrr_rank_solution(X, p, tol)
        feas = check_feasibility(X, pair.Z, pair.L)
        rank_sum = rank_objective(pair.Z, pair.L, tol)
        res.check(feas <= 1e-9 and rank_sum == spec.rank,
                  f"draw {i}: {spec.rows}x{spec.cols} rank {spec.rank}: residual {feas:.2e}, rank sum {rank_sum}")
    return res


def battery_nuclear_family(rng, sizes, tol, count=500) -> BatteryResult:
    res = BatteryResult("nuclear_latlrr_family_round_trip")
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        p = sample_nuclear_params(X, rng, tol)
        pair = latlrr_nuclear_solution(X, p, tol)
        feas = check_feasibility(X, pair.Z, pair.L)
        gap = abs(nuclear_objective(pair.Z, pair.L) - spec.rank)
        cert = characterize_theorem2(X, pair.Z, pair.L, tol)
        w_err = float(np.linalg.norm(cert.extracted_W_hat - p.W_hat))
        res.check(feas <= 1e-9 and gap <= 1e-7 and cert.theorem2_member and w_err <= 1e-9,
                  f"draw {i}: residual {feas:.2e}, objective gap {gap:.2e}, W error {w_err:.2e}")
    return res


def battery_counterexample(rng, sizes, tol, count=200, min_idem_residual=0.05) -> BatteryResult:
    """Non-idempotent admissible ``W`` is nuclear optimal and strictly rank suboptimal."""
    res = BatteryResult("nuclear_optimum_not_rank_optimum")
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        p = sample_nuclear_params(X, rng, tol)
        W = p.W_hat
        if np.linalg.norm(W @ W - W) < min_idem_residual:
            continue
        pair = latlrr_nuclear_solution(X, p, tol)
        nuc = certify_nuclear_optimal(X, pair.Z, pair.L, tol)
        rank_opt = certify_rank_optimal(X, pair.Z, pair.L, tol)
        gap = rank_objective(pair.Z, pair.L, tol) - spec.rank
        defect = _rank(W - W @ W, tol)
        res.check(nuc and not rank_opt and gap >= 1 and gap == defect,
                  f"draw {i}: nuclear_optimal={nuc}, rank_optimal={rank_opt}, gap {gap}, rank(W - W^2) {defect}")
    return res


def battery_canonical(rng, sizes, tol, count=100) -> BatteryResult:
    res = BatteryResult("canonical_counterexample")
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        rep = build_canonical_counterexample(X, tol)
        ok = (rep.verdict and abs(rep.nuclear_objective - spec.rank) <= 1e-6
              and rep.rank_objective == 2 * spec.rank and rep.gap == spec.rank)
        res.check(ok, f"draw {i}: rank {spec.rank}, gap {rep.gap}, nuclear {rep.nuclear_objective:.12g}")
    return res


def battery_inclusions(rng, sizes, tol, count=100) -> BatteryResult:
    res = BatteryResult("lrr_in_latlrr_inclusions")
    violations = 0
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        rep = lrr_inclusion_check(X, tol, samples=3, rng_seed=rng)
        violations += not rep.all_ok
        res.check(rep.all_ok, f"draw {i}: {rep.to_dict()}")
    res.details["violations"] = violations
    return res


def battery_stationarity(rng, sizes, tol, count=100) -> BatteryResult:
    res = BatteryResult("stationarity_certificate")
    for i in range(count):
        spec, X = random_X(rng, _cap(rng, sizes))
        resid = subgradient_certificate(X, tol)
        res.check(resid <= 1e-10 * spec.rank, f"draw {i}: rank {spec.rank}, residual {resid:.3e}")
    return res


BATTERIES: Dict[str, Callable[..., BatteryResult]] = {
    "penrose_identities": battery_penrose,
    "skinny_svd_invariants": battery_svd,
    "trace_bound": battery_trace_bound,
    "block_nuclear_inequality": battery_block_nuclear,
    "commuting_rank_inequality": battery_commuting_rank,
    "rank_latlrr_family": battery_rank_family,
    "nuclear_latlrr_family_round_trip": battery_nuclear_family,
    "nuclear_optimum_not_rank_optimum": battery_counterexample,
    "canonical_counterexample": battery_canonical,
    "lrr_in_latlrr_inclusions": battery_inclusions,
    "stationarity_certificate": battery_stationarity,
}


def run_battery(name: str, seed: int, sizes=DEFAULT_SIZES, tol: ToleranceProfile | None = None, **kwargs) -> BatteryResult:
    """Run one battery with an RNG derived from ``(seed, name)``."""
    tol = tol or ToleranceProfile()
    index = list(BATTERIES).index(name)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    return BATTERIES[name](rng, tuple(sizes), tol, **kwargs)


def run_suite(seed: int = 0, sizes=DEFAULT_SIZES, tol: ToleranceProfile | None = None, jobs: int = 1,
              inject_asymmetric: bool = False, names: Optional[Sequence[str]] = None) -> List[BatteryResult]:
    names = list(names or BATTERIES)
    extra = {"trace_bound": {"inject_asymmetric": inject_asymmetric}}

    def one(name):
        return run_battery(name, seed, sizes, tol, **extra.get(name, {}))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, names))
    return [one(name) for name in names]


def inclusion_summary(X, tol: ToleranceProfile, rng_seed=0) -> dict:
    """Observed inclusions between the four solution sets, as an adjacency summary.

    Each edge ``a -> b`` records whether sampled members of ``a`` were all
    certified members of ``b``: ``true`` means a verified inclusion and
    ``false`` means a witness against it was found.
    """
    rng = np.random.default_rng(rng_seed)
    m, n = X.shape
    r = skinny_svd(X, tol).rank
    inc = lrr_inclusion_check(X, tol, samples=5, rng_seed=rng)
    L0 = np.zeros((m, m))

    p_nuc = NuclearSolutionParams(0.5 * np.eye(r), sample_nuclear_params(X, rng, tol).partition)
    half = latlrr_nuclear_solution(X, p_nuc, tol)
    # Look for a rank optimum outside the nuclear family (a non-symmetric
    # idempotent or nonzero side matrices); a 1x1 X has none.
    witness_rank_not_nuclear = False
    for _ in range(10):
        member = latlrr_rank_solution(X, sample_rank_params(X, rng, tol), tol)
        if certify_rank_optimal(X, member.Z, member.L, tol) and not certify_nuclear_optimal(X, member.Z, member.L, tol):
            witness_rank_not_nuclear = True
            break

    return {
        "sets": ["original_lrr", "heuristic_lrr", "original_latlrr", "heuristic_latlrr"],
        "edges": [
            {"from": "heuristic_lrr", "to": "original_lrr", "included": inc.nuclear_lrr_in_rank_lrr},
            {"from": "original_lrr", "to": "original_latlrr", "included": all(inc.rank_lrr_in_rank_latlrr)},
            {"from": "heuristic_lrr", "to": "heuristic_latlrr", "included": inc.nuclear_lrr_in_nuclear_latlrr},
            {"from": "heuristic_latlrr", "to": "original_latlrr",
             "included": certify_rank_optimal(X, half.Z, half.L, tol)},
            {"from": "original_latlrr", "to": "heuristic_latlrr", "included": not witness_rank_not_nuclear},
        ],
        "lrr_candidates_with_L_zero": inc.to_dict(),
        "heuristic_latlrr_witness": "W_hat = I/2",
        "nuclear_objective_of_witness": nuclear_objective(half.Z, half.L),
        "rank_objective_of_witness": rank_objective(half.Z, half.L, tol),
        "rank_of_X": r,
    }
