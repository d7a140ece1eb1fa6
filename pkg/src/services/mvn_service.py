from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from ..models.bound import MvnBox, MvnResult
from ..models.errors import CovarianceError, DimensionError
from ..config.settings import BoundConfig
from ..config.logging import get_logger

logger = get_logger(__name__)

MAX_DIMENSION = 12

_TINY = np.finfo(float).tiny
_ONE_MINUS = 1.0 - np.finfo(float).eps


def _interval(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normal mass of (a, b) and the CDF bounds used to sample it, upper tails mirrored"""
    flip = a > 0
    c = ndtr(np.where(flip, -b, a))
    d = ndtr(np.where(flip, -a, b))
    return d - c, c, flip


def _truncated_sample(c: np.ndarray, mass: np.ndarray, flip: np.ndarray, u: np.ndarray) -> np.ndarray:
    y = ndtri(np.clip(c + u * mass, _TINY, _ONE_MINUS))
    return np.where(flip, -y, y)


class MvnService:
    """
    Box probabilities of a multivariate normal law.

    Separation of variables with greedy variable reordering, integrated with
    scrambled Sobol points; the spread of independent scramblings gives the
    standard error. Point sets come from a fixed seed, so results are
    reproducible and vary smoothly with the box and the mean.
    """

    def __init__(self, config: Optional[BoundConfig] = None):
        self.config = config or BoundConfig()
        self._points: Dict[int, np.ndarray] = {}

    def mvn_cdf(self, box: MvnBox, mu: np.ndarray, sigma: np.ndarray) -> MvnResult:
        """P[lower <= Y <= upper] for Y ~ N(mu, sigma)"""
        mu = np.asarray(mu, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        m = box.dimension

        if mu.shape != (m,) or sigma.shape != (m, m):
            raise DimensionError(
                f"Mean {mu.shape} and covariance {sigma.shape} do not match box dimension {m}"
            )

        if m > MAX_DIMENSION:
            raise DimensionError(f"Dimension {m} exceeds the supported maximum of {MAX_DIMENSION}")

        self._check_spd(sigma)

        # Unbounded coordinates integrate out of the Gaussian exactly
        keep = ~box.free
        if not keep.any():
            return MvnResult(1.0, 0.0)
        if not keep.all():
            mu = mu[keep]
            sigma = sigma[np.ix_(keep, keep)]
            m = int(keep.sum())

        lo = box.lower[keep] - mu
        hi = box.upper[keep] - mu

        # Independent coordinates factor exactly
        if m == 1 or not np.any(sigma - np.diag(np.diag(sigma))):
            sd = np.sqrt(np.diag(sigma))
            mass, _, _ = _interval(lo / sd, hi / sd)
            return MvnResult(float(np.prod(mass)), 0.0)

        chol, lo, hi = self._permuted_cholesky(sigma, lo, hi)
        return self._integrate(chol, lo, hi)

    def _integrate(self, chol: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> MvnResult:
        m = chol.shape[0]
        u = self._point_set(m - 1)
        n_total = u.shape[0]

        mass, c, flip = _interval(np.array([lo[0] / chol[0, 0]]), np.array([hi[0] / chol[0, 0]]))
        weight = np.full(n_total, mass[0])
        y = np.empty((n_total, m - 1))
        y[:, 0] = _truncated_sample(c, mass, flip, u[:, 0])

        for i in range(1, m):
            shift = y[:, :i] @ chol[i, :i]
            mass, c, flip = _interval((lo[i] - shift) / chol[i, i], (hi[i] - shift) / chol[i, i])
            weight *= mass
            if i < m - 1:
                y[:, i] = _truncated_sample(c, mass, flip, u[:, i])

        estimates = weight.reshape(self.config.randomizations, -1).mean(axis=1)
        probability = float(estimates.mean())
        error = float(estimates.std(ddof=1) / np.sqrt(estimates.size))
        return MvnResult(probability, error)

    def _point_set(self, dimension: int) -> np.ndarray:
        """Stacked scrambled Sobol sets, one block of qmc_points rows per randomization"""
        if dimension not in self._points:
            rng = np.random.default_rng(self.config.seed)
            blocks = [
                qmc.Sobol(d=dimension, scramble=True, seed=rng).random(self.config.qmc_points)
                for _ in range(self.config.randomizations)
            ]
            self._points[dimension] = np.vstack(blocks)
        return self._points[dimension]

    def _permuted_cholesky(
        self,
        sigma: np.ndarray,
        lo: np.ndarray,
        hi: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cholesky factor with variables ordered by smallest expected interval mass first"""
        cov = np.array(sigma, dtype=float)
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        m = cov.shape[0]
        chol = np.zeros((m, m))
        y = np.zeros(m)

        for k in range(m):
            rest = np.arange(k, m)
            variance = np.diag(cov)[rest] - np.sum(chol[rest, :k] ** 2, axis=1)
            sd = np.sqrt(np.maximum(variance, _TINY))
            shift = chol[rest, :k] @ y[:k]
            a = (lo[rest] - shift) / sd
            b = (hi[rest] - shift) / sd
            masses = _interval(a, b)[0]

            pick = int(np.argmin(masses))
            best = k + pick
            if best != k:
                cov[[k, best], :] = cov[[best, k], :]
                cov[:, [k, best]] = cov[:, [best, k]]
                chol[[k, best], :] = chol[[best, k], :]
                lo[[k, best]] = lo[[best, k]]
                hi[[k, best]] = hi[[best, k]]

            pivot = cov[k, k] - chol[k, :k] @ chol[k, :k]
            if pivot <= 0:
                raise CovarianceError("Covariance lost positive definiteness during factorization")

            chol[k, k] = np.sqrt(pivot)
            chol[k + 1:, k] = (cov[k + 1:, k] - chol[k + 1:, :k] @ chol[k, :k]) / chol[k, k]
            y[k] = self._truncated_mean(float(a[pick]), float(b[pick]), float(masses[pick]))

        return chol, lo, hi

    def _truncated_mean(self, a: float, b: float, mass: float) -> float:
        """Mean of a standard normal truncated to (a, b)"""
        if mass > 1e-12:
            density = np.exp(-0.5 * np.square([a, b])) / np.sqrt(2.0 * np.pi)
            return float((density[0] - density[1]) / mass)

        if np.isinf(a):
            return b
        if np.isinf(b):
            return a
        return 0.5 * (a + b)

    def _check_spd(self, sigma: np.ndarray) -> None:
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(sigma).max()))):
            raise CovarianceError("Covariance matrix is not symmetric")

        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as e:
            raise CovarianceError("Covariance matrix is not positive definite") from e
