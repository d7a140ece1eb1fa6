from typing import Dict, List, Optional, Tuple

import numpy as np

from .enums import Quadrature, SolverStatus
from .errors import DimensionError


class PrecodeProblem:
    """QoS quadratic program: minimize (Wp)^T (Wp) subject to B p <= -gamma * 1"""

    def __init__(self, w: np.ndarray, b: np.ndarray, gamma: float):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))

        if w.shape[1] != b.shape[1]:
            raise DimensionError(
                f"W has {w.shape[1]} columns but B has {b.shape[1]}; both act on p"
            )

        if gamma < 0 or not np.isfinite(gamma):
            raise ValueError(f"Threshold gamma must be finite and non-negative, got {gamma}")

        self.w = w
        self.b = b
        self.gamma = float(gamma)

    @property
    def n_variables(self) -> int:
        return self.w.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.b.shape[0]

    @property
    def zero_rows(self) -> np.ndarray:
        return np.flatnonzero(~np.any(self.b != 0.0, axis=1))

    def objective(self, p: np.ndarray) -> float:
        wp = self.w @ p
        return float(wp @ wp)

    def violation(self, p: np.ndarray) -> float:
        """Largest entry of B p + gamma (positive means violated)"""
        return float(np.max(self.b @ p + self.gamma))

    def __repr__(self) -> str:
        return (f"PrecodeProblem(variables={self.n_variables}, "
                f"constraints={self.n_constraints}, gamma={self.gamma})")


class KktReport:
    """Independently recomputed KKT residuals of a candidate solution"""

    def __init__(
        self,
        primal_infeasibility: float,
        dual_infeasibility: float,
        stationarity: float,
        complementarity: float
    ):
        self.primal_infeasibility = float(primal_infeasibility)
        self.dual_infeasibility = float(dual_infeasibility)
        self.stationarity = float(stationarity)
        self.complementarity = float(complementarity)

    @property
    def kkt_residual(self) -> float:
        return max(self.dual_infeasibility, self.stationarity, self.complementarity)

    def passed(self, feasibility_tol: float = 1e-8, kkt_tol: float = 1e-6) -> bool:
        return self.primal_infeasibility <= feasibility_tol and self.kkt_residual <= kkt_tol

    def to_dict(self) -> Dict[str, float]:
        return {
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "stationarity": self.stationarity,
            "complementarity": self.complementarity,
        }

    def __repr__(self) -> str:
        return (f"KktReport(primal={self.primal_infeasibility:.2e}, "
                f"stationarity={self.stationarity:.2e}, "
                f"complementarity={self.complementarity:.2e})")


class PrecodeSolution:
    """Temporal precoding vector for one user and quadrature with solver diagnostics"""

    def __init__(
        self,
        p: np.ndarray,
        objective: float,
        max_violation: float,
        kkt_residual: float,
        iterations: int,
        status: SolverStatus,
        duals: Optional[np.ndarray] = None
    ):
        self.p = np.asarray(p, dtype=float)
        self.objective = float(objective)
        self.max_violation = float(max_violation)
        self.kkt_residual = float(kkt_residual)
        self.iterations = int(iterations)
        self.status = status
        self.duals = np.asarray(duals, dtype=float) if duals is not None else None

    @property
    def is_optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL

    def to_dict(self) -> dict:
        return {
            "p": self.p.tolist(),
            "objective": self.objective,
            "max_violation": self.max_violation,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "status": self.status.value,
        }

    def __repr__(self) -> str:
        return (f"PrecodeSolution(status={self.status.value}, objective={self.objective:.6g}, "
                f"iterations={self.iterations})")


class SpatialPrecoder:
    """Zero-forcing spatial precoder P_sp = c_zf * P_zf"""

    def __init__(self, p_zf: np.ndarray, c_zf: float):
        self.p_zf = np.asarray(p_zf, dtype=complex)
        self.c_zf = float(c_zf)

    @property
    def p_sp(self) -> np.ndarray:
        return self.c_zf * self.p_zf

    @property
    def n_tx(self) -> int:
        return self.p_zf.shape[0]

    @property
    def n_u(self) -> int:
        return self.p_zf.shape[1]


class TemporalPrecoder:
    """Per-user, per-quadrature QoS precoding vectors sharing one beta and gamma"""

    def __init__(
        self,
        solutions: Dict[Tuple[int, Quadrature], PrecodeSolution],
        beta: float,
        gamma: float
    ):
        self.solutions = solutions
        self.beta = float(beta)
        self.gamma = float(gamma)

    @property
    def n_u(self) -> int:
        return len({user for user, _ in self.solutions})

    def p_x(self, user: int, quadrature: Quadrature) -> np.ndarray:
        return self.solutions[(user, quadrature)].p

    def p_complex(self, user: int) -> np.ndarray:
        """p_xI + j p_xQ of one user"""
        return self.p_x(user, Quadrature.IN_PHASE) + 1j * self.p_x(user, Quadrature.QUADRATURE)

    def stacked(self) -> np.ndarray:
        """Stacked complex vector [p_x1; ...; p_xNu]"""
        return np.concatenate([self.p_complex(k) for k in range(self.n_u)])

    def all_optimal(self) -> bool:
        return all(solution.is_optimal for solution in self.solutions.values())

    def worst(self, attribute: str) -> float:
        return max(getattr(solution, attribute) for solution in self.solutions.values())

    def to_dict(self) -> List[dict]:
        return [
            {"user": user, "quadrature": quadrature.value, **solution.to_dict()}
            for (user, quadrature), solution in sorted(
                self.solutions.items(), key=lambda item: (item[0][0], item[0][1].value)
            )
        ]
