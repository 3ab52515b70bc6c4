"""Fisher information, its closed-form approximate inverse, and interval estimates.

Parameter indices here follow the 2n layout ``(alpha_1..alpha_n,
beta_1..beta_n)`` with 0-based positions; position ``2n-1`` is the pinned
``beta_n`` whose information is the border entry ``v_{2n,2n}``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .estimation import FitResult, P0Params, information_matrix
from .noise import PrivacyConfig, noise_variance


@dataclass(frozen=True, eq=False)
class FisherInfo:
    """``v`` is the (2n-1)-square information matrix; ``border`` holds
    ``v_{2n,i}`` for i < 2n-1 and ``corner`` is ``v_{2n,2n}``."""

    v: np.ndarray
    border: np.ndarray
    corner: float

    @property
    def n(self) -> int:
        return (self.v.shape[0] + 1) // 2

    @property
    def diag(self) -> np.ndarray:
        """Diagonal extended to length 2n with the corner entry last."""
        return np.append(np.diag(self.v), self.corner)


def fisher_info(params: P0Params) -> FisherInfo:
    v = information_matrix(params)
    off = v.sum(axis=1) - np.diag(v)
    border = np.diag(v) - off
    return FisherInfo(v, border, float(border.sum()))


@dataclass(frozen=True, eq=False)
class ApproxInverse:
    """``s_ij = delta_ij / v_ii + sign / v_{2n,2n}``; sign is + within a block, - across."""

    inv_diag: np.ndarray
    inv_corner: float
    n: int

    def entry(self, i: int, j: int) -> float:
        same_block = (i < self.n) == (j < self.n)
        s = self.inv_corner if same_block else -self.inv_corner
        if i == j:
            s += self.inv_diag[i]
        return s

    def dense(self) -> np.ndarray:
        m = self.inv_diag.shape[0]
        sign = np.where((np.arange(m)[:, None] < self.n) == (np.arange(m)[None, :] < self.n), 1.0, -1.0)
        return np.diag(self.inv_diag) + sign * self.inv_corner


def approx_inverse(info: FisherInfo) -> ApproxInverse:
    return ApproxInverse(1.0 / np.diag(info.v), 1.0 / info.corner, info.n)


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    half_width: float
    level: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be nonnegative")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    @property
    def length(self) -> float:
        return 2 * self.half_width

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _require_converged(fit: FitResult):
    if not fit.converged:
        raise ValueError(f"fit did not converge (status {fit.status.value})")


def _theta2n(params: P0Params) -> np.ndarray:
    return np.concatenate([params.alpha, params.beta])


def pairwise_ci(fit: FitResult, i: int, j: int, level: float = 0.95) -> ConfidenceInterval:
    """Normal interval for ``theta_i - theta_j`` (2n indexing, 0-based).

    The variance ``1/v_ii + 1/v_jj`` holds with or without the extra noise
    term, which cancels in differences.
    """
    _require_converged(fit)
    if i == j:
        raise ValueError("pairwise interval needs two distinct parameters")
    info = fisher_info(fit.theta_hat)
    d = info.diag
    theta = _theta2n(fit.theta_hat)
    z = norm.ppf((1 + level) / 2)
    return ConfidenceInterval(float(theta[i] - theta[j]), float(z * np.sqrt(1 / d[i] + 1 / d[j])), level)


def single_variance(fit: FitResult, i: int, cfg: PrivacyConfig | None) -> float:
    """Asymptotic variance of ``theta_hat_i`` including the noise term ``s^2 / v_{2n,2n}^2``."""
    _require_converged(fit)
    info = fisher_info(fit.theta_hat)
    n = info.n
    s2 = 0.0 if cfg is None else noise_variance(cfg, 2 * n - 1)
    c = info.corner
    return float(1 / info.diag[i] + 1 / c + s2 / c**2)


class Statistic(str, enum.Enum):
    XI = "xi"  # alpha_i - alpha_j
    ZETA = "zeta"  # alpha_i + beta_j
    ETA = "eta"  # beta_i - beta_j


def standardized_stat(fit: FitResult, kind, i: int, j: int, true_theta: P0Params) -> float:
    """Standardized estimation error for the (i, j) node pair (0-based node indices)."""
    _require_converged(fit)
    kind = Statistic(kind)
    n = fit.theta_hat.n
    est = _theta2n(fit.theta_hat)
    tru = _theta2n(true_theta)
    d = fisher_info(fit.theta_hat).diag
    if kind is Statistic.XI:
        a, b, sign = i, j, -1
    elif kind is Statistic.ZETA:
        a, b, sign = i, n + j, 1
    else:
        a, b, sign = n + i, n + j, -1
    err = (est[a] - tru[a]) + sign * (est[b] - tru[b])
    return float(err / np.sqrt(1 / d[a] + 1 / d[b]))
