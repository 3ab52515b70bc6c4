"""Moment-equation estimation for the p0 model.

The parameter vector is ``theta = (alpha_1..alpha_n, beta_1..beta_{n-1})``
with ``beta_n`` pinned to 0. The estimator solves the 2n-1 equations
``target_out = E[out-degree]`` and ``target_in[:n-1] = E[in-degree][:n-1]``;
the in-degree equation of the last node is dropped, which is what lets a
noisy target with unequal out/in totals still have a root.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .graph import BiSequence

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class P0Params:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        b = np.array(self.beta, dtype=float)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("alpha and beta must be vectors of equal length")
        if a.shape[0] < 2:
            raise ValueError("need n >= 2")
        if b[-1] != 0.0:
            raise ValueError("beta[n-1] must be 0 (identification constraint)")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("parameters must be finite")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta[:-1]])

    @classmethod
    def from_theta(cls, theta) -> "P0Params":
        theta = np.asarray(theta, dtype=float)
        if theta.shape[0] % 2 != 1:
            raise ValueError("theta must have odd length 2n-1")
        n = (theta.shape[0] + 1) // 2
        return cls(theta[:n], np.append(theta[n:], 0.0))

    @classmethod
    def zeros(cls, n: int) -> "P0Params":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def linear(cls, n: int, L: float) -> "P0Params":
        """``alpha_{i+1} = (n-1-i) L / (n-1)``, ``beta_i = alpha_i`` for i < n, ``beta_n = 0``."""
        alpha = (n - 1 - np.arange(n)) * L / (n - 1)
        beta = alpha.copy()
        beta[-1] = 0.0
        return cls(alpha, beta)

    def __eq__(self, other):
        if not isinstance(other, P0Params):
            return NotImplemented
        return np.array_equal(self.alpha, other.alpha) and np.array_equal(self.beta, other.beta)

    __hash__ = None


class Method(str, enum.Enum):
    FIXED_POINT = "fixed_point"
    NEWTON = "newton"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    NONEXISTENT = "nonexistent"
    MAX_ITER = "max_iter_reached"


_DEFAULT_MAX_ITER = {Method.FIXED_POINT: 5000, Method.NEWTON: 100}


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int | None = None
    diverge_threshold: float = 30.0
    method: Method = Method.NEWTON
    init: str = "zero"  # or "logit": log(t / (n-1-t)) clipped to [-10, 10]

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.max_iter is None:
            object.__setattr__(self, "max_iter", _DEFAULT_MAX_ITER[self.method])
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.diverge_threshold > 0:
            raise ValueError("diverge_threshold must be positive")
        if self.init not in ("zero", "logit"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: P0Params
    status: Status
    iterations: int
    residual_inf: float
    target: BiSequence
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def diagnostics(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "residual": self.residual_inf,
        }


def _halves(target):
    if isinstance(target, BiSequence):
        return np.asarray(target.outdeg, dtype=float), np.asarray(target.indeg, dtype=float)
    out, inn = target
    return np.asarray(out, dtype=float), np.asarray(inn, dtype=float)


def expected_degrees(params: P0Params) -> BiSequence:
    out, inn = kernels.expected_degrees(params.alpha, params.beta)
    return BiSequence(out, inn)


def _residual(alpha, beta, t_out, t_in):
    e_out, e_in = kernels.expected_degrees(alpha, beta)
    return np.concatenate([t_out - e_out, t_in[:-1] - e_in[:-1]]), e_out, e_in


def residual_f(params: P0Params, target) -> np.ndarray:
    """The 2n-1 residuals ``target - expected``; zero exactly at the estimator."""
    t_out, t_in = _halves(target)
    if t_out.shape[0] != params.n:
        raise ValueError("target length does not match params")
    return _residual(params.alpha, params.beta, t_out, t_in)[0]


def _info_blocks(alpha, beta):
    """Diagonals and cross block of the information matrix."""
    w = kernels.edge_variances(alpha, beta)
    return w.sum(axis=1), w.sum(axis=0), w


def information_matrix(params: P0Params) -> np.ndarray:
    """(2n-1)x(2n-1) matrix ``V``; equals minus the Jacobian of the residuals."""
    n = params.n
    d_out, d_in, w = _info_blocks(params.alpha, params.beta)
    v = np.zeros((2 * n - 1, 2 * n - 1))
    v[:n, :n] = np.diag(d_out)
    v[n:, n:] = np.diag(d_in[:-1])
    v[:n, n:] = w[:, :-1]
    v[n:, :n] = w[:, :-1].T
    return v


def jacobian_f(params: P0Params) -> np.ndarray:
    return -information_matrix(params)


def _newton_step(alpha, beta, f):
    """Solve ``V x = f`` through the Schur complement of the diagonal alpha block."""
    n = alpha.shape[0]
    d_out, d_in, w = _info_blocks(alpha, beta)
    b = w[:, :-1]
    f_a, f_b = f[:n], f[n:]
    b_scaled = b / d_out[:, None]
    schur = np.diag(d_in[:-1]) - b.T @ b_scaled
    y = np.linalg.solve(schur, f_b - b_scaled.T @ f_a)
    x = (f_a - b @ y) / d_out
    return x, y


def _initial(n, t_out, t_in, init):
    if init == "zero":
        return np.zeros(n), np.zeros(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.log(t_out / (n - 1 - t_out))
        b = np.log(t_in / (n - 1 - t_in))
    a = np.clip(np.nan_to_num(a, nan=0.0), -10, 10)
    b = np.clip(np.nan_to_num(b, nan=0.0), -10, 10)
    # logit-of-density is an ansatz for alpha+beta jointly; split it evenly
    a, b = a / 2, b / 2
    b = b - b[-1]
    return a, b


def solve(target, cfg: SolverConfig | None = None) -> FitResult:
    """Solve the moment equations for ``target``.

    Nonexistence is reported, not raised: a used target coordinate at or
    beyond ``0`` / ``n-1`` has no finite root, and an iterate whose sup-norm
    passes ``cfg.diverge_threshold`` is taken as escaping to infinity.
    """
    cfg = cfg or SolverConfig()
    t_out, t_in = _halves(target)
    n = t_out.shape[0]
    if t_in.shape[0] != n or n < 2:
        raise ValueError("target halves must have equal length n >= 2")
    tgt = target if isinstance(target, BiSequence) else BiSequence(t_out, t_in)

    alpha, beta = _initial(n, t_out, t_in, cfg.init)
    used = np.concatenate([t_out, t_in[:-1]])
    if (used <= 0).any() or (used >= n - 1).any():
        f = _residual(alpha, beta, t_out, t_in)[0]
        return FitResult(P0Params(alpha, beta), Status.NONEXISTENT, 0, float(np.abs(f).max()), tgt)

    f, e_out, e_in = _residual(alpha, beta, t_out, t_in)
    res = float(np.abs(f).max())
    history = [res]
    status = Status.MAX_ITER
    it = 0
    while it < cfg.max_iter:
        if res <= cfg.tol:
            status = Status.CONVERGED
            break
        it += 1
        if cfg.method is Method.NEWTON:
            x, y = _newton_step(alpha, beta, f)
            step = 1.0
            # halve the step until the residual does not grow
            for _ in range(40):
                a_new = alpha + step * x
                b_new = beta.copy()
                b_new[:-1] += step * y
                f_new, e_out, e_in = _residual(a_new, b_new, t_out, t_in)
                r_new = float(np.abs(f_new).max())
                if r_new < res or not np.isfinite(res):
                    break
                step /= 2
            alpha, beta, f, res = a_new, b_new, f_new, r_new
        else:
            alpha = alpha + np.log(t_out / e_out)
            e_out, e_in = kernels.expected_degrees(alpha, beta)
            beta = beta.copy()
            beta[:-1] += np.log(t_in[:-1] / e_in[:-1])
            f, e_out, e_in = _residual(alpha, beta, t_out, t_in)
            res = float(np.abs(f).max())
        history.append(res)
        if max(np.abs(alpha).max(), np.abs(beta).max()) > cfg.diverge_threshold or not np.isfinite(res):
            status = Status.NONEXISTENT
            break
    else:
        if res <= cfg.tol:
            status = Status.CONVERGED

    if status is Status.NONEXISTENT:
        alpha = np.clip(np.nan_to_num(alpha), -1e300, 1e300)
        beta = np.clip(np.nan_to_num(beta), -1e300, 1e300)
    log.debug("solve: %s after %d iterations, residual %.3g", status.value, it, res)
    return FitResult(P0Params(alpha, beta), status, it, res, tgt, tuple(history))
