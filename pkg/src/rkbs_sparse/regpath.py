"""Square-loss l1 regularization: solvers, the lambda-sparsity
certificate, lambda_max, and consistency checks against minimum-norm
interpolation.

The optimality conditions for min Q(L alpha) + lam ||alpha||_1 with
square loss Q_y(z) = 0.5 ||z - y||^2 split into equalities on the support
(lam = -(L^T a)_k sign(alpha_k) with a = L alpha - y) and inequalities
off the support (lam >= |(L^T a)_j|).  The certificate checker evaluates
both families for an externally supplied subgradient vector, so losses
other than square can be audited without a solver.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (ConvergenceError, DomainError, GaussProblem, KernelMatrix,
                   SeqProblem, SparseSolution, TruncationError, make_solution,
                   prune_atoms)
from .optim import OPTIMAL, basis_pursuit, prox_l1_solve
from . import measure as _measure
from . import sequence as _sequence

_MAX_TRUNCATION = 2 ** 20
_SUPPORT_ROUNDS = 20


@dataclass(frozen=True)
class RegProblem:
    """An interpolation problem plus a positive regularization weight."""

    base: Union[SeqProblem, GaussProblem]
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be strictly positive")


@dataclass(frozen=True)
class LambdaCertificate:
    """Residuals of the lambda-sparsity optimality conditions.

    ``equality_residuals`` hold |lam + (L^T a)_k sign(alpha_k)| per
    support index, ``inequality_slacks`` hold lam - |(L^T a)_j| per
    off-support index; the verdict passes when every equality residual is
    at most tol and every slack is at least -tol.
    """

    support: Tuple[float, ...]
    equality_residuals: Tuple[float, ...]
    inequality_slacks: Tuple[float, ...]
    a: Tuple[float, ...]
    lam: float
    tol: float
    verdict: bool


def _as_array(L) -> Tuple[np.ndarray, Tuple[float, ...]]:
    if isinstance(L, KernelMatrix):
        return L.array, L.labels
    a = np.atleast_2d(np.asarray(L, dtype=float))
    return a, tuple(range(a.shape[1]))


def lambda_certificate(L, alpha: Sequence[float], y: Sequence[float],
                       lam: float, tol: float,
                       a: Optional[Sequence[float]] = None) -> LambdaCertificate:
    """Evaluate the support equalities and off-support inequalities.

    ``a`` defaults to the square-loss subgradient L alpha - y (a
    singleton); pass another subgradient to audit a different convex
    loss.
    """
    mat, labels = _as_array(L)
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    if alpha.size != mat.shape[1] or y.size != mat.shape[0]:
        raise DomainError("inconsistent certificate dimensions")
    a_vec = mat @ alpha - y if a is None else np.asarray(a, dtype=float)
    g = mat.T @ a_vec
    on = alpha != 0.0
    eq = np.abs(lam + g[on] * np.sign(alpha[on]))
    slack = lam - np.abs(g[~on])
    verdict = bool(np.all(eq <= tol)) and bool(np.all(slack >= -tol))
    return LambdaCertificate(
        support=tuple(lab for lab, flag in zip(labels, on) if flag),
        equality_residuals=tuple(float(v) for v in eq),
        inequality_slacks=tuple(float(v) for v in slack),
        a=tuple(float(v) for v in a_vec), lam=float(lam), tol=float(tol),
        verdict=verdict)


def lambda_max(L, y: Sequence[float]) -> float:
    """Smallest lambda for which the zero solution is optimal: ||L^T y||_inf."""
    mat, _ = _as_array(L)
    y = np.asarray(y, dtype=float)
    g = mat.T @ y
    return float(np.max(np.abs(g), initial=0.0))


def _zero_solution(y: np.ndarray, n: int, tol: float) -> SparseSolution:
    objective = 0.5 * float(y @ y)
    return make_solution([], 0.0, float(np.max(np.abs(y))), 0, objective, n, tol)


def _vertexify(mat: np.ndarray, labels: Sequence[float], alpha: np.ndarray,
               y: np.ndarray, lam: float, tol: float, attain_tol: float,
               n: int) -> SparseSolution:
    """Map a proximal minimizer to an extreme point of the solution set.

    All minimizers share the fitted vector L alpha and the l1 norm, so
    basis pursuit restricted to the active columns (those with
    |(L^T a)_j| = lam) returns a vertex with at most rank-many atoms and
    the same objective.
    """
    a = mat @ alpha - y
    g = mat.T @ a
    scale = max(lam, float(np.max(np.abs(g), initial=0.0)), 1.0)
    active = (np.abs(g) >= lam - 10.0 * tol * scale) | (alpha != 0.0)
    if not np.any(active) or float(np.sum(np.abs(alpha))) == 0.0:
        return _zero_solution(y, n, tol)
    cols = np.nonzero(active)[0]
    fitted = mat @ alpha
    bp = basis_pursuit(mat[:, cols], fitted, tol)
    if bp.status != OPTIMAL:
        raise ConvergenceError(f"active-set basis pursuit returned {bp.status}")
    atoms = prune_atoms([labels[j] for j in cols], bp.x, attain_tol)
    alpha_v = np.zeros(mat.shape[1])
    pos = {labels[j]: j for j in cols}
    for site, coeff in atoms:
        alpha_v[pos[site]] = coeff
    misfit = mat @ alpha_v - y
    norm = float(np.sum(np.abs(alpha_v)))
    objective = 0.5 * float(misfit @ misfit) + lam * norm
    from .core import matrix_rank
    rank = matrix_rank(mat[:, cols], tol)
    return make_solution(sorted(atoms), norm, float(np.max(np.abs(misfit))),
                         rank, objective, n, tol)


def _reg_solve_seq(problem: SeqProblem, lam: float) -> SparseSolution:
    opts = problem.options
    y = problem.y_vector()
    K = opts.truncation_start
    while True:
        V = problem.coordinate_matrix(K)
        alpha = prox_l1_solve(V, y, lam, tol=opts.tol)
        a = V @ alpha - y
        # |<a, column k>| <= sum_i |a_i| tail_i(K) for every k > K, so once
        # that bound sits below lambda the off-range inequalities hold
        tail = float(sum(abs(a[i]) * problem.functionals[i].tail_bound(K)
                         for i in range(problem.n)))
        if tail <= lam * (1.0 - 1e-6):
            break
        if K >= _MAX_TRUNCATION:
            raise TruncationError(
                f"off-range optimality certificate unreachable at K={K} "
                f"(tail {tail:.3e} vs lambda {lam:g})", residual=tail)
        K *= 2
    labels = list(range(1, K + 1))
    return _vertexify(V, labels, alpha, y, lam, opts.tol, opts.attain_tol,
                      problem.n)


def _continuous_sup(problem: GaussProblem, c: np.ndarray) -> float:
    pts = _measure.find_attainment_points(c, problem, attain_tol=1e-9)
    return max(abs(_measure.gauss_eval(c, problem, t)) for t in pts)


def _polish_reg_atoms(problem: GaussProblem, sites: np.ndarray, w: np.ndarray,
                      lam: float, max_rounds: int = 40):
    """Newton polish of the regularized stationarity system.

    At an optimal atom the misfit correlation sum_i a_i K(x_i, t_k) equals
    -lam sign(w_k) and is stationary in t_k (a = fitted - y).  Borderline
    center separations make |correlation| quartically flat, so the
    atom locations coming out of the attainment machinery carry a large
    error that this polish removes.  Returns (sites, w) or None.
    """
    y = problem.y_vector()
    sites = sites.copy()
    w = w.copy()
    signs = np.sign(w)
    for _ in range(max_rounds):
        if sites.size > 1:
            order = np.argsort(sites)
            sites, w, signs = sites[order], w[order], signs[order]
            if float(np.min(np.diff(sites))) < problem.sigma * 1e-5:
                keep_s, keep_w = [sites[0]], [w[0]]
                for t, wt in zip(sites[1:], w[1:]):
                    if t - keep_s[-1] < problem.sigma * 1e-5:
                        keep_w[-1] += wt
                    else:
                        keep_s.append(t)
                        keep_w.append(wt)
                sites, w = np.array(keep_s), np.array(keep_w)
                signs = np.sign(w)
        m = sites.size
        phi = _measure._kernel(problem, sites)      # m x n
        phid = _measure._kernel_dt(problem, sites)
        phidd = _measure._kernel_dtt(problem, sites)
        a = phi.T @ w - y
        F = np.concatenate([phi @ a + lam * signs, phid @ a])
        if float(np.max(np.abs(F))) <= 1e-12 * max(1.0, lam):
            return sites, w
        Dw = np.diag(w)
        J = np.block([
            [phi @ phi.T, phi @ phid.T @ Dw + np.diag(phid @ a)],
            [phid @ phi.T, phid @ phid.T @ Dw + np.diag(phidd @ a)],
        ])
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        norm0 = float(np.linalg.norm(F))
        damp = 1.0
        for _ in range(30):
            w_try = w + damp * delta[:m]
            t_try = sites + damp * delta[m:]
            phi_t = _measure._kernel(problem, t_try)
            a_try = phi_t.T @ w_try - y
            F_try = np.concatenate([
                phi_t @ a_try + lam * signs,
                _measure._kernel_dt(problem, t_try) @ a_try,
            ])
            if float(np.linalg.norm(F_try)) < norm0:
                w, sites = w_try, t_try
                break
            damp *= 0.5
        else:
            return None
    return None


def _reg_solve_gauss(problem: GaussProblem, lam: float) -> SparseSolution:
    opts = problem.options
    y = problem.y_vector()
    if _continuous_sup(problem, y) <= lam * (1.0 + 1e-12):
        return _zero_solution(y, problem.n, opts.tol)

    cert = _measure.dual_solve_semiinfinite(problem)
    sites = list(cert.attain_points)
    prev_fit: Optional[np.ndarray] = None
    for _ in range(_SUPPORT_ROUNDS):
        V = _measure.kernel_matrix(problem, sites, opts.tol)
        alpha = prox_l1_solve(V.array, y, lam, tol=opts.tol)
        fitted = V.array @ alpha
        if float(np.sum(np.abs(alpha))) == 0.0:
            return _zero_solution(y, problem.n, opts.tol)
        if prev_fit is not None and (
                float(np.max(np.abs(fitted - prev_fit)))
                <= opts.tol * (1.0 + float(np.max(np.abs(y))))):
            sol = _vertexify(V.array, V.labels, alpha, y, lam, opts.tol,
                             opts.attain_tol, problem.n)
            return _polish_gauss_solution(problem, sol, lam)
        prev_fit = fitted
        sub = dataclasses.replace(problem, y=tuple(float(v) for v in fitted))
        sites = list(_measure.dual_solve_semiinfinite(sub).attain_points)
    raise ConvergenceError(
        f"support fixed point not reached in {_SUPPORT_ROUNDS} rounds "
        f"(last support {sites})")


def _polish_gauss_solution(problem: GaussProblem, sol: SparseSolution,
                           lam: float) -> SparseSolution:
    if not sol.atoms:
        return sol
    polished = _polish_reg_atoms(problem, np.array(sol.sites()),
                                 sol.coefficients(), lam)
    if polished is None:
        return sol
    sites, w = polished
    keep = np.abs(w) > problem.options.attain_tol * float(np.sum(np.abs(w)))
    sites, w = sites[keep], w[keep]
    if sites.size == 0:
        return _zero_solution(problem.y_vector(), problem.n,
                              problem.options.tol)
    y = problem.y_vector()
    misfit = _measure._kernel(problem, sites).T @ w - y
    norm = float(np.sum(np.abs(w)))
    objective = 0.5 * float(misfit @ misfit) + lam * norm
    rank = _measure.kernel_matrix(problem, sites, problem.options.tol).rank
    return make_solution(sorted(zip(sites, w)), norm,
                         float(np.max(np.abs(misfit))), rank, objective,
                         problem.n, problem.options.tol)


def reg_solve(problem: RegProblem) -> SparseSolution:
    """Solve the square-loss l1-regularized problem.

    Sequence problems solve one proximal subproblem on a certified
    truncation range (the tail bound proves the off-range optimality
    inequalities); Gaussian problems iterate the attainment-set machinery
    to a support fixed point.  Outputs pass ``lambda_certificate``.
    """
    if isinstance(problem.base, SeqProblem):
        return _reg_solve_seq(problem.base, problem.lam)
    return _reg_solve_gauss(problem.base, problem.lam)


def solution_certificate(problem: RegProblem, sol: SparseSolution,
                         tol: float) -> LambdaCertificate:
    """Run lambda_certificate for a solver output on its candidate matrix."""
    base = problem.base
    if isinstance(base, SeqProblem):
        K = base.options.truncation_start
        sites = [int(s) for s in sol.sites()]
        K = max([K] + [s for s in sites])
        V = base.coordinate_matrix(K)
        alpha = np.zeros(K)
        for site, coeff in sol.atoms:
            alpha[int(site) - 1] = coeff
        return lambda_certificate(V, alpha, base.y_vector(), problem.lam, tol)
    sites = list(sol.sites())
    if not sites:
        cands = _measure.find_attainment_points(base.y_vector(), base)
        V = _measure.kernel_matrix(base, cands, base.options.tol)
        return lambda_certificate(V, np.zeros(len(cands)), base.y_vector(),
                                  problem.lam, tol)
    V = _measure.kernel_matrix(base, sites, base.options.tol)
    return lambda_certificate(V, sol.coefficients(), base.y_vector(),
                              problem.lam, tol)


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of the regularization-vs-MNI substitution check."""

    fitted: Tuple[float, ...]
    reg_norm: float
    mni_norm: float
    objective_change: float
    zero_regime: bool
    consistent: bool


def reg_mni_consistency(problem: RegProblem, tol: float = 1e-8) -> ConsistencyReport:
    """Check that minimum-norm interpolation of the fitted values leaves
    the regularized objective unchanged.

    Solves the regularized problem, interpolates its fitted vector by the
    matching MNI solver, and verifies that the interpolant's norm does
    not drop below the regularized solution's norm (it cannot rise above
    it either, so the objective is invariant).  A zero fitted vector is
    reported as the degenerate regime rather than an error.
    """
    sol = reg_solve(problem)
    base = problem.base
    y = base.y_vector()
    if not sol.atoms:
        return ConsistencyReport(fitted=tuple(0.0 for _ in y), reg_norm=0.0,
                                 mni_norm=0.0, objective_change=0.0,
                                 zero_regime=True, consistent=True)
    if isinstance(base, SeqProblem):
        V = _sequence.truncation_matrix(base.functionals,
                                        [int(s) for s in sol.sites()],
                                        base.options.tol)
        fitted = V.array @ sol.coefficients()
        sub = dataclasses.replace(base, y=tuple(float(v) for v in fitted))
        mni = _sequence.mni_solve_l1(sub)
        mni_fit = _sequence.truncation_matrix(
            base.functionals, [int(s) for s in mni.sites()],
            base.options.tol).array @ mni.coefficients()
    else:
        V = _measure.kernel_matrix(base, list(sol.sites()), base.options.tol)
        fitted = V.array @ sol.coefficients()
        sub = dataclasses.replace(base, y=tuple(float(v) for v in fitted))
        mni_sol = _measure.mni_solve_measure(sub)
        mni = mni_sol
        mni_fit = _measure.kernel_matrix(
            base, list(mni_sol.locations()),
            base.options.tol).array @ mni_sol.weights()
    reg_norm = sol.norm
    mni_norm = mni.norm if isinstance(mni, SparseSolution) else mni.tv_norm
    obj_reg = 0.5 * float((fitted - y) @ (fitted - y)) + problem.lam * reg_norm
    obj_mni = 0.5 * float((mni_fit - y) @ (mni_fit - y)) + problem.lam * mni_norm
    change = obj_mni - obj_reg
    consistent = (mni_norm <= reg_norm + tol) and (abs(change) <= tol)
    return ConsistencyReport(fitted=tuple(float(v) for v in fitted),
                             reg_norm=reg_norm, mni_norm=mni_norm,
                             objective_change=change, zero_regime=False,
                             consistent=consistent)


@dataclass(frozen=True)
class PathRow:
    lam: float
    atom_count: int
    l1_norm: float
    objective: float
    error: Optional[str] = None


def sparsity_path(base: Union[SeqProblem, GaussProblem],
                  lambdas: Sequence[float]) -> List[PathRow]:
    """One regularized solve per lambda; rows in input order.

    Lambdas must be positive and ascending.  Per-row solver failures are
    recorded in the row's ``error`` field instead of aborting the path.
    """
    lams = [float(v) for v in lambdas]
    if any(l <= 0 for l in lams):
        raise DomainError("lambdas must be strictly positive")
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise DomainError("lambdas must be sorted ascending")
    rows: List[PathRow] = []
    for lam in lams:
        try:
            sol = reg_solve(RegProblem(base=base, lam=lam))
            rows.append(PathRow(lam=lam, atom_count=len(sol.atoms),
                                l1_norm=sol.norm, objective=sol.dual_value))
        except Exception as exc:  # recorded, not fatal
            rows.append(PathRow(lam=lam, atom_count=-1, l1_norm=math.nan,
                                objective=math.nan, error=str(exc)))
    return rows
