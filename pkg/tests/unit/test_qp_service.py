from itertools import combinations

import pytest
import numpy as np
from src.services.qp_service import QpService
from src.config.settings import SolverConfig
from src.models.enums import SolverStatus
from src.models.errors import DimensionError
from src.models.precoding import PrecodeProblem, PrecodeSolution


def brute_force_objective(problem: PrecodeProblem) -> float:
    """Smallest objective over all primal-feasible equality-constrained active sets"""
    hessian = 2.0 * problem.w.T @ problem.w
    n = problem.n_variables
    best = np.inf
    for size in range(1, n + 1):
        for active in combinations(range(problem.n_constraints), size):
            b_a = problem.b[list(active)]
            kkt = np.block([[hessian, b_a.T], [b_a, np.zeros((size, size))]])
            if np.linalg.matrix_rank(kkt) < kkt.shape[0]:
                continue
            rhs = np.concatenate([np.zeros(n), -problem.gamma * np.ones(size)])
            p = np.linalg.solve(kkt, rhs)[:n]
            if problem.violation(p) <= 1e-9:
                best = min(best, problem.objective(p))
    return best


def random_feasible_problem(rng, n_variables=5, n_constraints=9, gamma=1.0) -> PrecodeProblem:
    w = rng.standard_normal((12, n_variables))
    p0 = rng.standard_normal(n_variables)
    b = rng.standard_normal((n_constraints, n_variables))
    b *= -np.sign(b @ p0)[:, None]
    return PrecodeProblem(w, b, gamma)


class TestPrecodeProblem:
    """Test cases for the QoS program container"""

    def test_shape_mismatch(self):
        """Test W and B must act on the same vector"""
        with pytest.raises(DimensionError, match="columns"):
            PrecodeProblem(np.eye(3), np.eye(2), 1.0)

    @pytest.mark.parametrize("gamma", [-1.0, np.inf])
    def test_invalid_gamma(self, gamma):
        """Test negative or infinite thresholds are rejected"""
        with pytest.raises(ValueError, match="gamma"):
            PrecodeProblem(np.eye(2), -np.eye(2), gamma)

    def test_zero_rows(self):
        """Test all-zero constraint rows are reported"""
        problem = PrecodeProblem(np.eye(2), np.array([[1.0, 0.0], [0.0, 0.0]]), 1.0)
        assert problem.zero_rows.tolist() == [1]


class TestQpService:
    """Test cases for the interior-point QoS solver"""

    @pytest.fixture
    def scalar_problem(self):
        return PrecodeProblem(np.array([[1.0]]), np.array([[-1.0]]), 2.0)

    def test_scalar_problem(self, qp_service, scalar_problem):
        """Test min p^2 subject to -p <= -2"""
        # Act
        solution = qp_service.solve(scalar_problem)

        # Assert
        assert solution.status == SolverStatus.OPTIMAL
        assert solution.p[0] == pytest.approx(2.0, abs=1e-9)
        assert solution.objective == pytest.approx(4.0, abs=1e-8)

    def test_scalar_certificate(self, qp_service, scalar_problem):
        """Test the optimal scalar solution has negligible KKT residuals"""
        # Arrange
        solution = qp_service.solve(scalar_problem)

        # Act
        report = qp_service.verify_kkt(scalar_problem, solution)

        # Assert
        assert report.primal_infeasibility < 1e-10
        assert report.kkt_residual < 1e-10
        assert report.passed()

    def test_perturbed_point_fails_stationarity(self, qp_service, scalar_problem):
        """Test a shifted p reports a nonzero stationarity residual"""
        candidate = PrecodeSolution(
            p=np.array([2.01]), objective=0.0, max_violation=0.0,
            kkt_residual=0.0, iterations=0, status=SolverStatus.OPTIMAL,
            duals=np.array([4.0])
        )
        report = qp_service.verify_kkt(scalar_problem, candidate)
        assert report.stationarity > 1e-3
        assert not report.passed()

    def test_matches_active_set_enumeration(self, qp_service):
        """Test random instances against the brute-force active-set optimum"""
        rng = np.random.default_rng(2024)
        for _ in range(500):
            # Arrange
            problem = random_feasible_problem(rng)

            # Act
            solution = qp_service.solve(problem)

            # Assert
            expected = brute_force_objective(problem)
            assert solution.is_optimal
            assert solution.objective == pytest.approx(expected, rel=1e-6)
            assert solution.max_violation <= 1e-8
            assert qp_service.verify_kkt(problem, solution).passed()

    @pytest.mark.parametrize("factor", [0.5, 2.0, 10.0])
    def test_positive_homogeneity(self, qp_service, factor):
        """Test scaling gamma scales p linearly and the objective quadratically"""
        # Arrange
        problem = random_feasible_problem(np.random.default_rng(7))
        scaled = PrecodeProblem(problem.w, problem.b, factor * problem.gamma)

        # Act
        base = qp_service.solve(problem)
        result = qp_service.solve(scaled)

        # Assert
        assert np.allclose(result.p, factor * base.p, rtol=1e-6, atol=1e-8)
        assert result.objective == pytest.approx(factor ** 2 * base.objective, rel=1e-6)

    def test_objective_nondecreasing_in_gamma(self, qp_service):
        """Test larger thresholds never cost less energy"""
        problem = random_feasible_problem(np.random.default_rng(11))
        objectives = [
            qp_service.solve(PrecodeProblem(problem.w, problem.b, g)).objective
            for g in (0.5, 1.0, 1.5, 3.0)
        ]
        assert objectives == sorted(objectives)

    def test_zero_gamma_returns_zero(self, qp_service):
        """Test gamma = 0 gives the unconstrained minimum p = 0"""
        problem = random_feasible_problem(np.random.default_rng(3), gamma=0.0)
        solution = qp_service.solve(problem)
        assert solution.is_optimal
        assert np.all(solution.p == 0.0)
        assert solution.objective == 0.0

    def test_zero_row_is_infeasible(self, qp_service):
        """Test an all-zero constraint row makes gamma > 0 infeasible"""
        # Arrange
        problem = PrecodeProblem(np.eye(2), np.array([[-1.0, 0.0], [0.0, 0.0]]), 1.0)

        # Act
        solution = qp_service.solve(problem)

        # Assert
        assert solution.status == SolverStatus.INFEASIBLE
        assert solution.max_violation == pytest.approx(1.0)

    def test_deterministic(self, qp_service):
        """Test identical inputs give bit-identical solutions"""
        problem = random_feasible_problem(np.random.default_rng(5))
        first = qp_service.solve(problem)
        second = qp_service.solve(problem)
        assert np.array_equal(first.p, second.p)
        assert first.iterations == second.iterations

    def test_singular_hessian_is_regularized(self, qp_service):
        """Test a rank-deficient W still yields a feasible certified point"""
        # Arrange
        w = np.array([[1.0, 1.0], [1.0, 1.0]])
        b = np.array([[-1.0, 0.0], [0.0, -1.0]])
        problem = PrecodeProblem(w, b, 1.0)

        # Act
        solution = qp_service.solve(problem)

        # Assert
        assert solution.max_violation <= 1e-8
        assert solution.objective == pytest.approx(8.0, rel=1e-6)

    def test_iteration_limit_reported(self):
        """Test a one-iteration budget stops after a single step"""
        service = QpService(SolverConfig(max_iter=1))
        problem = random_feasible_problem(np.random.default_rng(9))
        solution = service.solve(problem)
        assert solution.status in (SolverStatus.MAX_ITER, SolverStatus.OPTIMAL)
        assert solution.iterations == 1
