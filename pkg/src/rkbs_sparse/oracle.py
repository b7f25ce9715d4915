"""Independent brute-force verifiers.

These deliberately avoid the simplex and exchange code paths: vertex
enumeration and least-squares subsystem solves stand in for basis
pursuit, exhaustive grid scans for the continuous attainment search, and
normal equations for the smooth l2 solver.  They are the source of
ground truth in the test suite and back the oracle-verify command.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence

import numpy as np

from .core import (DomainError, GaussProblem, OracleRefusal, SeqProblem,
                   SparseSolution)

_ENUM_MAX_COLUMNS = 12


@dataclass(frozen=True)
class OracleReport:
    """Result of a brute-force check: value(s), witness, agreement flag."""

    method: str
    value: Any
    witness: Any
    elapsed: float
    agreement: Optional[bool] = None


def _svd_rank(a: np.ndarray, tol: float) -> int:
    a = np.atleast_2d(a)
    if a.size == 0 or not np.any(a):
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol * max(a.shape) * s[0]))


def vertex_enumerate_l1(L: np.ndarray, y: np.ndarray, tol: float = 1e-9,
                        candidate_value: Optional[float] = None) -> OracleReport:
    """Enumerate basic feasible points of L alpha = y and minimize ||alpha||_1.

    Every index subset of size at most rank(L) is solved by least squares
    and kept when it reproduces y; the minimum l1 value and all attaining
    vertices are returned.  Refuses more than 12 columns.
    """
    t0 = time.perf_counter()
    L = np.atleast_2d(np.asarray(L, dtype=float))
    y = np.asarray(y, dtype=float)
    m, n = L.shape
    if n > _ENUM_MAX_COLUMNS:
        raise OracleRefusal(f"vertex enumeration refuses m > {_ENUM_MAX_COLUMNS} columns")
    rank = _svd_rank(L, tol)
    feas_tol = tol * (1.0 + float(np.max(np.abs(y), initial=0.0)))

    best = math.inf
    vertices: List[np.ndarray] = []
    feasible = False
    for size in range(0, rank + 1):
        for subset in itertools.combinations(range(n), size):
            alpha = np.zeros(n)
            if subset:
                sub = L[:, list(subset)]
                beta = np.linalg.lstsq(sub, y, rcond=None)[0]
                alpha[list(subset)] = beta
            if float(np.max(np.abs(L @ alpha - y), initial=0.0)) > feas_tol:
                continue
            feasible = True
            val = float(np.sum(np.abs(alpha)))
            if val < best - 1e-12 * (1.0 + val):
                best = val
                vertices = [alpha]
            elif val <= best + 1e-12 * (1.0 + val):
                if not any(np.max(np.abs(alpha - v)) <= 1e-10 for v in vertices):
                    vertices.append(alpha)
    value = best if feasible else None
    agreement = None
    if candidate_value is not None and feasible:
        agreement = abs(candidate_value - best) <= 1e-9 * (1.0 + abs(best))
    return OracleReport(method="vertex_enumerate_l1", value=value,
                        witness=[v.copy() for v in vertices],
                        elapsed=time.perf_counter() - t0, agreement=agreement)


def grid_supremum(c: Sequence[float], problem: GaussProblem,
                  step: float) -> OracleReport:
    """Exhaustive scan of |sum_j c_j K(x_j, .)| over the domain.

    Returns the grid supremum, all grid arg-maxima within the problem's
    attainment tolerance, and the certified scan error bound
    (step^2 / 2) * max|g''| <= (step^2 / 2) * sum|c_j| / sigma^2.
    """
    if not step > 0:
        raise DomainError("step must be positive")
    t0 = time.perf_counter()
    c = np.asarray(c, dtype=float)
    lo, hi = problem.domain
    count = int(math.floor((hi - lo) / step)) + 1
    grid = lo + step * np.arange(count)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    centers = np.asarray(problem.centers)
    vals = np.zeros(grid.size)
    chunk = 1 << 16
    for start in range(0, grid.size, chunk):
        t = grid[start:start + chunk, None] - centers
        vals[start:start + chunk] = np.exp(
            -t * t / (2.0 * problem.sigma ** 2)) @ c
    vals = np.abs(vals)
    sup = float(np.max(vals))
    argmaxima = grid[vals >= sup * (1.0 - problem.options.attain_tol)]
    bound = 0.5 * step * step * float(np.sum(np.abs(c))) / problem.sigma ** 2
    return OracleReport(method="grid_supremum", value=sup,
                        witness={"argmaxima": [float(t) for t in argmaxima],
                                 "error_bound": bound},
                        elapsed=time.perf_counter() - t0)


def l2_min_norm(problem: SeqProblem, truncation: int) -> OracleReport:
    """Normal-equations solver for minimum l2-norm interpolation.

    Gram entries are partial sums to ``truncation`` plus a certified
    Cauchy-Schwarz tail bound from the functionals' l2 tail contract.
    Refuses Gram matrices with condition estimate above 1e12.  The
    witness carries the dual coefficients; the solution evaluates as
    x_k = sum_i d_i v_{i,k}.
    """
    t0 = time.perf_counter()
    V = problem.coordinate_matrix(truncation)
    gram = V @ V.T
    l2_tails = np.array([f.lq_tail(truncation, 2.0) for f in problem.functionals])
    tail_bound = float(np.max(np.outer(l2_tails, l2_tails)))
    cond = float(np.linalg.cond(gram))
    if cond >= 1e12:
        raise OracleRefusal(f"Gram matrix condition estimate {cond:.3e} >= 1e12")
    d = np.linalg.solve(gram, problem.y_vector())
    coords = V.T @ d

    def evaluator(k: int) -> float:
        return float(sum(di * f.eval(k) for di, f in zip(d, problem.functionals)))

    norm = float(np.linalg.norm(coords))
    return OracleReport(method="l2_min_norm",
                        value={"norm": norm, "dual": [float(v) for v in d],
                               "gram_tail_bound": tail_bound},
                        witness={"coordinates": coords, "eval": evaluator},
                        elapsed=time.perf_counter() - t0)


def norming_check(certificate, solution, tol: float) -> OracleReport:
    """Verify the norming pairing <nu/||nu||, x> = ||x|| for a solution.

    Accepts a sequence-space DualCertificate (atoms indexed by
    coordinate) or a measure-space certificate/measure pair (atoms at
    real locations); the pairing is evaluated atom by atom, so it is
    independent of how the solution was computed.
    """
    t0 = time.perf_counter()
    from .sequence import DualCertificate

    if not isinstance(certificate, DualCertificate):
        raise DomainError("norming_check handles sequence certificates; "
                          "use norming_check_measure for the measure space")
    combined = certificate.combined
    coords = combined.coordinates(certificate.truncation_used)
    sup = float(np.max(np.abs(coords)))
    if isinstance(solution, SparseSolution):
        atoms = solution.atoms
        norm = solution.norm
    else:
        atoms = tuple(solution)
        norm = float(sum(abs(cf) for _, cf in atoms))
    pairing = sum(cf * combined.eval(int(site)) for site, cf in atoms) / sup
    gap = abs(pairing - norm)
    return OracleReport(method="norming_check", value=gap,
                        witness={"pairing": pairing, "norm": norm},
                        elapsed=time.perf_counter() - t0,
                        agreement=bool(gap <= tol))


def norming_check_measure(certificate, solution, problem: GaussProblem,
                          tol: float) -> OracleReport:
    """Measure-space norming pairing: sum_j g(loc_j) w_j / ||g|| = TV norm."""
    t0 = time.perf_counter()
    from .measure import gauss_eval
    c = np.asarray(certificate.coefficients, dtype=float)
    sup = certificate.sup_norm / certificate.value
    pairing = sum(w * gauss_eval(c, problem, loc) for loc, w in solution.atoms) / sup
    gap = abs(pairing - solution.tv_norm)
    return OracleReport(method="norming_check", value=gap,
                        witness={"pairing": pairing, "norm": solution.tv_norm},
                        elapsed=time.perf_counter() - t0,
                        agreement=bool(gap <= tol))


def solution_set_convexity_check(L: np.ndarray, y: np.ndarray,
                                 tol: float = 1e-9) -> OracleReport:
    """Midpoints of optimal vertex pairs stay feasible with equal l1 norm.

    Vacuously passes when the enumeration finds fewer than two optimal
    vertices.
    """
    t0 = time.perf_counter()
    report = vertex_enumerate_l1(L, y, tol)
    vertices = report.witness
    L = np.atleast_2d(np.asarray(L, dtype=float))
    y = np.asarray(y, dtype=float)
    feas_tol = tol * (1.0 + float(np.max(np.abs(y), initial=0.0)))
    pairs = 0
    ok = True
    for i in range(len(vertices)):
        for j in range(i + 1, len(vertices)):
            mid = 0.5 * (vertices[i] + vertices[j])
            pairs += 1
            if float(np.max(np.abs(L @ mid - y), initial=0.0)) > feas_tol:
                ok = False
            if abs(float(np.sum(np.abs(mid))) - report.value) > tol * (1.0 + report.value):
                ok = False
    return OracleReport(method="solution_set_convexity_check",
                        value=report.value,
                        witness={"pairs_checked": pairs,
                                 "vertices": vertices},
                        elapsed=time.perf_counter() - t0, agreement=ok)
