from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..models.enums import Quadrature, SolverStatus
from ..models.errors import ChannelError, DimensionError, SolverError
from ..models.precoding import PrecodeProblem, PrecodeSolution, SpatialPrecoder, TemporalPrecoder
from ..models.waveform import SystemModel
from ..models.zx import ZxFrame
from .qp_service import QpService
from ..config.logging import get_logger

logger = get_logger(__name__)

# Largest condition number of H accepted for zero forcing
MAX_CHANNEL_CONDITION = 1e8

UserFrames = Tuple[ZxFrame, ZxFrame]


class PrecodingService:
    """Spatial zero forcing, per-user QoS temporal precoding and energy bookkeeping"""

    def __init__(self, qp_service: Optional[QpService] = None, workers: int = 1):
        self.qp_service = qp_service or QpService()
        self.workers = max(1, int(workers))

    def zf_precoder(self, h: np.ndarray) -> SpatialPrecoder:
        """P_zf = H^H (H H^H)^-1 scaled by c_zf = sqrt(N_u / trace((H H^H)^-1))"""
        h = np.atleast_2d(np.asarray(h, dtype=complex))
        n_u, n_t = h.shape

        if n_t < n_u:
            raise ChannelError(f"N_t={n_t} transmit antennas cannot zero-force N_u={n_u} users")

        if not np.all(np.isfinite(h)):
            raise ChannelError("Channel matrix contains non-finite entries")

        condition = np.linalg.cond(h)
        if not np.isfinite(condition) or condition >= MAX_CHANNEL_CONDITION:
            raise ChannelError(f"Channel matrix is rank deficient (condition number {condition:.3g})")

        gram_inv = np.linalg.inv(h @ h.conj().T)
        p_zf = h.conj().T @ gram_inv
        c_zf = float(np.sqrt(n_u / np.real(np.trace(gram_inv))))

        logger.debug("Zero-forcing precoder built", n_u=n_u, n_t=n_t, c_zf=c_zf, condition=float(condition))
        return SpatialPrecoder(p_zf, c_zf)

    def build_qos_problem(
        self,
        c_out_q: np.ndarray,
        system: SystemModel,
        beta: float,
        gamma: float
    ) -> PrecodeProblem:
        """B = -beta diag(c_out) V U and W = G_Tx^T U for one user and quadrature"""
        c_out_q = np.asarray(c_out_q, dtype=float)
        if c_out_q.shape != (system.dims.n_tot,):
            raise DimensionError(
                f"c_out has length {c_out_q.size}, expected N_tot={system.dims.n_tot}"
            )

        if beta <= 0:
            raise ValueError(f"Beamforming gain beta must be positive, got {beta}")

        if not np.all(np.any(system.vu != 0.0, axis=1)):
            raise ValueError("V U has an all-zero row; the combined filter is degenerate")

        b = -beta * c_out_q[:, None] * system.vu
        return PrecodeProblem(system.w, b, gamma)

    def qos_precode(
        self,
        frames: Sequence[UserFrames],
        system: SystemModel,
        beta: float,
        gamma: float
    ) -> TemporalPrecoder:
        """Solve the QoS program separately for every user and quadrature"""
        jobs = []
        for user, pair in enumerate(frames):
            for quadrature, frame in zip((Quadrature.IN_PHASE, Quadrature.QUADRATURE), pair):
                problem = self.build_qos_problem(frame.c_out, system, beta, gamma)
                jobs.append(((user, quadrature), problem))

        if self.workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                results = list(executor.map(lambda job: self.qp_service.solve(job[1]), jobs))
        else:
            results = [self.qp_service.solve(problem) for _, problem in jobs]

        solutions: Dict[Tuple[int, Quadrature], PrecodeSolution] = {}
        for ((user, quadrature), _), solution in zip(jobs, results):
            self.check_solution(solution, user, quadrature)
            solutions[(user, quadrature)] = solution

        logger.debug("Temporal precoder designed", users=len(frames), beta=beta, gamma=gamma)
        return TemporalPrecoder(solutions, beta, gamma)

    def user_energy(self, p_sp_k: np.ndarray, w: np.ndarray, p_i: np.ndarray, p_q: np.ndarray) -> float:
        """E_0k = p_sp_k^H p_sp_k [(W p_I)^T (W p_I) + (W p_Q)^T (W p_Q)]"""
        spatial = float(np.real(np.vdot(p_sp_k, p_sp_k)))
        wi = w @ p_i
        wq = w @ p_q
        return spatial * float(wi @ wi + wq @ wq)

    def transmit_signal(self, p_sp: np.ndarray, temporal: TemporalPrecoder, w: np.ndarray) -> np.ndarray:
        """Antenna waveforms P_sp R with rows of R equal to (W p_xk)^T"""
        r = np.stack([w @ temporal.p_complex(k) for k in range(temporal.n_u)])
        return np.asarray(p_sp) @ r

    def total_transmit_energy(self, p_sp: np.ndarray, temporal: TemporalPrecoder, w: np.ndarray) -> float:
        """E_Tx = trace(P_sp R R^H P_sp^H)"""
        x = self.transmit_signal(p_sp, temporal, w)
        return float(np.real(np.trace(x @ x.conj().T)))

    def snr_required(self, e_tx: float, n_q: int, n0: float, rolloff: float) -> Tuple[float, float]:
        """SNR_Req = E_Tx / (N_q N_0 (1 + eps)), returned as (linear, dB)"""
        if e_tx <= 0 or n_q <= 0 or n0 <= 0 or rolloff < 0:
            raise ValueError("Energy, N_q and N_0 must be positive")

        linear = e_tx / (n_q * n0 * (1.0 + rolloff))
        return float(linear), float(10.0 * np.log10(linear))

    def noiseless_margins(self, temporal: TemporalPrecoder, frames: Sequence[UserFrames], system: SystemModel) -> List[float]:
        """Smallest beta * c_out * (V U p_x) over samples, per user and quadrature"""
        margins = []
        for user, pair in enumerate(frames):
            for quadrature, frame in zip((Quadrature.IN_PHASE, Quadrature.QUADRATURE), pair):
                received = temporal.beta * system.vu @ temporal.p_x(user, quadrature)
                margins.append(float(np.min(frame.c_out * received)))
        return margins

    def check_solution(self, solution: PrecodeSolution, user: int, quadrature: Quadrature) -> None:
        if solution.status == SolverStatus.INFEASIBLE:
            raise SolverError("QoS constraints are infeasible", user=user, quadrature=quadrature.value)

        if solution.status == SolverStatus.MAX_ITER:
            logger.warning(
                "QoS solve hit the iteration limit",
                user=user,
                quadrature=quadrature.value,
                kkt_residual=solution.kkt_residual,
                max_violation=solution.max_violation
            )
