from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq

from ..models.enums import SolverStatus
from ..models.precoding import KktReport, PrecodeProblem, PrecodeSolution
from ..config.settings import SolverConfig
from ..config.logging import get_logger

logger = get_logger(__name__)

# Fraction of the distance to the boundary taken by each interior-point step
_STEP_FRACTION = 0.995


class QpService:
    """
    Primal-dual interior-point solver for the QoS program

        min  p^T W^T W p   subject to   B p <= -gamma * 1

    Mehrotra predictor-corrector steps are followed by an active-set polish
    that solves the equality KKT system of the identified active constraints.
    """

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()

    def solve(self, problem: PrecodeProblem, config: Optional[SolverConfig] = None) -> PrecodeSolution:
        """Solve the QoS program and attach a KKT certificate"""
        opts = config or self.config
        n, m = problem.n_variables, problem.n_constraints
        gamma = problem.gamma

        if gamma == 0.0:
            return self._finish(problem, np.zeros(n), np.zeros(m), 0, SolverStatus.OPTIMAL, opts)

        if problem.zero_rows.size > 0:
            logger.warning("QoS problem infeasible", zero_rows=problem.zero_rows.tolist())
            p = np.zeros(n)
            return PrecodeSolution(
                p=p,
                objective=0.0,
                max_violation=problem.violation(p),
                kkt_residual=float("inf"),
                iterations=0,
                status=SolverStatus.INFEASIBLE
            )

        hessian = self._hessian(problem, opts)
        b = problem.b

        # Least-norm start aimed at the constraint boundary
        p = -gamma * b.T @ np.linalg.solve(b @ b.T + 1e-8 * np.eye(m), np.ones(m))
        s = np.maximum(-(b @ p + gamma), 1.0)
        lam = np.ones(m)

        status = SolverStatus.MAX_ITER
        iterations = 0
        for iterations in range(1, opts.max_iter + 1):
            r_d = hessian @ p + b.T @ lam
            r_p = b @ p + s + gamma
            mu = float(s @ lam) / m

            if (np.max(np.abs(r_p)) <= opts.feasibility_tol
                    and np.max(np.abs(r_d)) <= opts.kkt_tol * 1e-2
                    and mu <= opts.kkt_tol * 1e-2):
                status = SolverStatus.OPTIMAL
                break

            try:
                factor = cho_factor(hessian + b.T @ ((lam / s)[:, None] * b))
            except LinAlgError:
                logger.debug("Normal matrix lost definiteness", iteration=iterations)
                break

            # Predictor (affine scaling) direction
            dp_a, ds_a, dl_a = self._direction(factor, b, s, lam, r_d, r_p, s * lam)
            alpha_a = min(self._max_step(s, ds_a), self._max_step(lam, dl_a))
            mu_a = float((s + alpha_a * ds_a) @ (lam + alpha_a * dl_a)) / m
            sigma = (mu_a / mu) ** 3

            # Corrector with centering
            r_c = s * lam + ds_a * dl_a - sigma * mu
            dp, ds, dl = self._direction(factor, b, s, lam, r_d, r_p, r_c)
            alpha = _STEP_FRACTION * min(self._max_step(s, ds), self._max_step(lam, dl))
            alpha = min(alpha, 1.0)

            p = p + alpha * dp
            s = s + alpha * ds
            lam = lam + alpha * dl

        polished = self._polish(problem, hessian, p, s, lam, opts)
        if polished is not None:
            p, lam = polished
            status = SolverStatus.OPTIMAL

        return self._finish(problem, p, lam, iterations, status, opts)

    def verify_kkt(self, problem: PrecodeProblem, solution: PrecodeSolution) -> KktReport:
        """Recompute primal/dual feasibility, stationarity and complementarity from scratch"""
        p = solution.p
        lam = solution.duals if solution.duals is not None else self._least_squares_duals(problem, p)

        constraint = problem.b @ p + problem.gamma
        gradient = 2.0 * problem.w.T @ (problem.w @ p)
        stationarity = gradient + problem.b.T @ lam
        scale = 1.0 + float(np.max(np.abs(gradient), initial=0.0))

        return KktReport(
            primal_infeasibility=max(float(np.max(constraint, initial=-np.inf)), 0.0),
            dual_infeasibility=max(float(-np.min(lam, initial=0.0)), 0.0),
            stationarity=float(np.max(np.abs(stationarity), initial=0.0)) / scale,
            complementarity=float(np.max(np.abs(lam * constraint), initial=0.0)) / scale
        )

    def _finish(
        self,
        problem: PrecodeProblem,
        p: np.ndarray,
        lam: np.ndarray,
        iterations: int,
        status: SolverStatus,
        opts: SolverConfig
    ) -> PrecodeSolution:
        p, lam = self._restore_feasibility(problem, p, lam)
        candidate = PrecodeSolution(
            p=p,
            objective=problem.objective(p),
            max_violation=problem.violation(p) if problem.n_constraints else 0.0,
            kkt_residual=0.0,
            iterations=iterations,
            status=status,
            duals=lam
        )
        report = self.verify_kkt(problem, candidate)
        candidate.kkt_residual = report.kkt_residual

        if status == SolverStatus.OPTIMAL and not report.passed(opts.feasibility_tol, opts.kkt_tol):
            candidate.status = SolverStatus.MAX_ITER

        logger.debug(
            "QoS problem solved",
            status=candidate.status.value,
            iterations=iterations,
            objective=candidate.objective,
            kkt_residual=candidate.kkt_residual
        )
        return candidate

    def _hessian(self, problem: PrecodeProblem, opts: SolverConfig) -> np.ndarray:
        hessian = 2.0 * problem.w.T @ problem.w
        if np.linalg.eigvalsh(hessian).min() < 1e-12:
            hessian = hessian + opts.regularization * np.eye(problem.n_variables)
        return hessian

    def _direction(
        self,
        factor: Tuple[np.ndarray, bool],
        b: np.ndarray,
        s: np.ndarray,
        lam: np.ndarray,
        r_d: np.ndarray,
        r_p: np.ndarray,
        r_c: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        rhs = -r_d + b.T @ ((r_c - lam * r_p) / s)
        dp = cho_solve(factor, rhs)
        ds = -r_p - b @ dp
        dl = (-r_c - lam * ds) / s
        return dp, ds, dl

    def _max_step(self, x: np.ndarray, dx: np.ndarray) -> float:
        negative = dx < 0
        if not np.any(negative):
            return 1.0
        return float(min(1.0, np.min(-x[negative] / dx[negative])))

    def _polish(
        self,
        problem: PrecodeProblem,
        hessian: np.ndarray,
        p: np.ndarray,
        s: np.ndarray,
        lam: np.ndarray,
        opts: SolverConfig
    ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Solve the equality KKT system on the active set guessed from the iterate"""
        active = np.flatnonzero(lam > s)
        if active.size == 0:
            return None

        n = problem.n_variables
        b_a = problem.b[active]
        kkt = np.block([[hessian, b_a.T], [b_a, np.zeros((active.size, active.size))]])
        rhs = np.concatenate([np.zeros(n), -problem.gamma * np.ones(active.size)])

        try:
            solution = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            solution = lstsq(kkt, rhs)[0]

        p_new = solution[:n]
        lam_new = np.zeros(problem.n_constraints)
        lam_new[active] = solution[n:]

        scale = 1.0 + float(np.max(np.abs(lam_new)))
        if np.min(lam_new[active]) < -opts.kkt_tol * scale:
            return None

        if problem.violation(p_new) > opts.feasibility_tol * (1.0 + problem.gamma):
            return None

        return p_new, np.maximum(lam_new, 0.0)

    def _restore_feasibility(
        self,
        problem: PrecodeProblem,
        p: np.ndarray,
        lam: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Rescale p so that min(-B p) = gamma exactly when it falls marginally short"""
        if problem.gamma == 0.0 or problem.n_constraints == 0:
            return p, lam

        margin = float(np.min(-(problem.b @ p)))
        if 0.0 < margin < problem.gamma:
            ratio = problem.gamma / margin
            return p * ratio, lam * ratio
        return p, lam

    def _least_squares_duals(self, problem: PrecodeProblem, p: np.ndarray) -> np.ndarray:
        """Multipliers of the (numerically) active constraints fitted to stationarity"""
        constraint = problem.b @ p + problem.gamma
        active = np.flatnonzero(np.abs(constraint) <= 1e-6 * (1.0 + problem.gamma))
        lam = np.zeros(problem.n_constraints)
        if active.size:
            gradient = 2.0 * problem.w.T @ (problem.w @ p)
            lam[active] = lstsq(problem.b[active].T, -gradient)[0]
        return lam
