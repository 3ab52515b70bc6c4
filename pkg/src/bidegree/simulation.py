"""Monte Carlo experiments: coverage, release distance and QQ tables.

Replication ``r`` of a run seeded with ``seed`` draws all its randomness from
``numpy.random.default_rng([seed, r])``, so results do not depend on how the
replications are split across workers.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import kstest, norm

from .estimation import Method, P0Params, SolverConfig, solve
from .graph import DirectedGraph, degrees, dist_inf, edge_probabilities
from .graphical import denoise_l1
from .inference import fisher_info, pairwise_ci, single_variance, standardized_stat
from .noise import Mechanism, PrivacyConfig, release_bidegree

log = logging.getLogger(__name__)

FAST_REPLICATIONS = 500

L_SCHEDULES = {
    "zero": lambda n: 0.0,
    "loglog": lambda n: math.log(math.log(n)),
    "sqrtlog": lambda n: math.sqrt(math.log(n)),
    "log": lambda n: math.log(n),
}

EPSILON_RULES = {
    "log_over_n4": lambda n: math.log(n) / n**0.25,
    "log_over_n2": lambda n: math.log(n) / n**0.5,
}


class Estimator(str, enum.Enum):
    NON_DENOISED = "non_denoised"  # fit the released sequence directly
    DENOISED = "denoised"  # fit the L1 projection of the released sequence


@dataclass(frozen=True)
class ExperimentConfig:
    """One cell of a simulation table.

    ``L`` is a schedule label (``zero``, ``loglog``, ``sqrtlog``, ``log``) or a
    number. ``epsilon`` is a number or a rule name (``log_over_n4``,
    ``log_over_n2``). ``pairs`` are 1-indexed node pairs for alpha differences.
    """

    n: int
    L: str | float = "zero"
    epsilon: str | float = 2.0
    replications: int = 10_000
    estimator: Estimator = Estimator.NON_DENOISED
    pairs: tuple = ((1, 2),)
    level: float = 0.95
    seed: int = 0
    mechanism: Mechanism = Mechanism.DISCRETE_LAPLACE
    method: Method = Method.NEWTON

    def __post_init__(self):
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "pairs", tuple(tuple(int(v) for v in p) for p in self.pairs))
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if isinstance(self.L, str) and self.L not in L_SCHEDULES:
            raise ValueError(f"unknown L schedule {self.L!r}")
        if isinstance(self.epsilon, str) and self.epsilon not in EPSILON_RULES:
            try:
                object.__setattr__(self, "epsilon", float(self.epsilon))
            except ValueError:
                raise ValueError(f"unknown epsilon rule {self.epsilon!r}") from None
        for i, j in self.pairs:
            if not (1 <= i <= self.n and 1 <= j <= self.n) or i == j:
                raise ValueError(f"bad pair ({i}, {j}) for n={self.n}")

    @property
    def L_value(self) -> float:
        return L_SCHEDULES[self.L](self.n) if isinstance(self.L, str) else float(self.L)

    @property
    def L_label(self) -> str:
        return self.L if isinstance(self.L, str) else repr(float(self.L))

    @property
    def epsilon_value(self) -> float:
        if isinstance(self.epsilon, str):
            return EPSILON_RULES[self.epsilon](self.n)
        return float(self.epsilon)

    @property
    def epsilon_label(self) -> str:
        return self.epsilon if isinstance(self.epsilon, str) else repr(float(self.epsilon))

    def theta_star(self) -> P0Params:
        return P0Params.linear(self.n, self.L_value)

    def privacy(self) -> PrivacyConfig:
        return PrivacyConfig(self.epsilon_value, self.mechanism, self.seed)

    def solver(self) -> SolverConfig:
        return SolverConfig(method=self.method)

    def fast(self) -> "ExperimentConfig":
        return replace(self, replications=min(self.replications, FAST_REPLICATIONS))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CoverageRow:
    """One table cell. ``coverage`` and ``mean_half_width`` are None (printed
    ``NA``) when no replication produced an estimate."""

    n: int
    pair: tuple[int, int]
    estimator: Estimator
    L_label: str
    coverage: float | None
    mean_half_width: float | None
    nonexistence_pct: float
    replications: int
    existing: int

    @property
    def mean_length(self) -> float | None:
        return None if self.mean_half_width is None else 2 * self.mean_half_width


# --------------------------------------------------------------------------
# replication engine
# --------------------------------------------------------------------------

@dataclass
class ReplicationBatch:
    """Per-replication outputs, aligned by replication index."""

    exists: np.ndarray  # (R,) bool
    dist: np.ndarray  # (R,) ||d - z||_inf
    center: np.ndarray  # (R, P) estimated alpha_i - alpha_j
    half_width: np.ndarray  # (R, P)
    hit: np.ndarray  # (R, P) bool
    stats: dict = field(default_factory=dict)  # name -> (R,) standardized statistics

    @classmethod
    def concat(cls, parts):
        keys = parts[0].stats.keys()
        return cls(
            np.concatenate([p.exists for p in parts]),
            np.concatenate([p.dist for p in parts]),
            np.concatenate([p.center for p in parts]),
            np.concatenate([p.half_width for p in parts]),
            np.concatenate([p.hit for p in parts]),
            {k: np.concatenate([p.stats[k] for p in parts]) for k in keys},
        )


QQ_STATISTICS = ("xi", "zeta", "eta", "alpha_sigma1", "alpha_sigma2")


def _run_chunk(cfg: ExperimentConfig, start: int, stop: int, fit: bool) -> ReplicationBatch:
    n = cfg.n
    theta = cfg.theta_star()
    probs = edge_probabilities(theta.alpha, theta.beta)
    priv = cfg.privacy()
    solver = cfg.solver()
    pairs0 = [(i - 1, j - 1) for i, j in cfg.pairs]
    truth = np.array([theta.alpha[i] - theta.alpha[j] for i, j in pairs0])
    R, P = stop - start, len(pairs0)
    exists = np.zeros(R, dtype=bool)
    dist = np.zeros(R)
    center = np.full((R, P), np.nan)
    half = np.full((R, P), np.nan)
    hit = np.zeros((R, P), dtype=bool)
    stats = {k: np.full(R, np.nan) for k in QQ_STATISTICS}
    a, b = pairs0[0]
    for k, r in enumerate(range(start, stop)):
        rng = np.random.default_rng([cfg.seed, r])
        adj = rng.random(probs.shape) < probs
        np.fill_diagonal(adj, False)
        d = degrees(DirectedGraph(adj))
        z = release_bidegree(d, priv, rng)
        dist[k] = dist_inf(d, z)
        if not fit:
            continue
        target = denoise_l1(z)[0] if cfg.estimator is Estimator.DENOISED else z
        res = solve(target, solver)
        if not res.converged:
            continue
        exists[k] = True
        for p, (i, j) in enumerate(pairs0):
            ci = pairwise_ci(res, i, j, cfg.level)
            center[k, p] = ci.center
            half[k, p] = ci.half_width
            hit[k, p] = ci.covers(truth[p])
        for kind in ("xi", "zeta", "eta"):
            stats[kind][k] = standardized_stat(res, kind, a, b, theta)
        err = res.theta_hat.alpha[a] - theta.alpha[a]
        stats["alpha_sigma1"][k] = err / math.sqrt(single_variance(res, a, priv))
        stats["alpha_sigma2"][k] = err / math.sqrt(single_variance(res, a, None))
    return ReplicationBatch(exists, dist, center, half, hit, stats)


def _workers() -> int:
    cap = os.environ.get("BIDEGREE_THREADS")
    cpus = os.cpu_count() or 1
    return max(1, min(cpus, int(cap))) if cap else cpus


def run_replications(cfg: ExperimentConfig, fit: bool = True, workers: int | None = None) -> ReplicationBatch:
    """Run every replication of ``cfg``; ``fit=False`` skips estimation."""
    workers = workers or _workers()
    R = cfg.replications
    if workers == 1 or R < 2 * workers:
        return _run_chunk(cfg, 0, R, fit)
    bounds = np.linspace(0, R, workers + 1).astype(int)
    with ProcessPoolExecutor(workers) as pool:
        futs = [pool.submit(_run_chunk, cfg, int(lo), int(hi), fit) for lo, hi in zip(bounds[:-1], bounds[1:])]
        return ReplicationBatch.concat([f.result() for f in futs])


def coverage_rows(cfg: ExperimentConfig, batch: ReplicationBatch) -> list[CoverageRow]:
    """Aggregate coverage conditional on the estimate existing."""
    m = int(batch.exists.sum())
    ne = 100.0 * (1 - m / cfg.replications)
    rows = []
    for p, pair in enumerate(cfg.pairs):
        if m == 0:
            cov = hw = None
        else:
            cov = 100.0 * float(batch.hit[batch.exists, p].mean())
            hw = float(batch.half_width[batch.exists, p].mean())
        rows.append(CoverageRow(cfg.n, pair, cfg.estimator, cfg.L_label, cov, hw, ne, cfg.replications, m))
    return rows


def run_coverage(cfg: ExperimentConfig, workers: int | None = None) -> list[CoverageRow]:
    return coverage_rows(cfg, run_replications(cfg, fit=True, workers=workers))


def run_distance(cfg: ExperimentConfig, workers: int | None = None) -> float:
    """Mean of ``||d - z||_inf`` over replications."""
    return float(run_replications(cfg, fit=False, workers=workers).dist.mean())


def qq_table(values) -> np.ndarray:
    """Columns: standard-normal quantile at ``(k - 0.5)/R``, sorted sample."""
    v = np.sort(np.asarray(values, dtype=float))
    R = v.shape[0]
    q = norm.ppf((np.arange(1, R + 1) - 0.5) / R)
    return np.column_stack([q, v])


def ks_distance(values) -> float:
    return float(kstest(np.asarray(values, dtype=float), "norm").statistic)


def export_qq(cfg: ExperimentConfig, statistic: str, batch: ReplicationBatch | None = None) -> np.ndarray:
    """QQ table of one standardized statistic over the existing replications.

    ``xi``/``zeta``/``eta`` use the first configured pair; ``alpha_sigma1``
    and ``alpha_sigma2`` standardize the first node of that pair with and
    without the noise variance term.
    """
    if statistic not in QQ_STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {QQ_STATISTICS}")
    batch = batch or run_replications(cfg, fit=True)
    return qq_table(batch.stats[statistic][batch.exists])


# --------------------------------------------------------------------------
# CSV writers
# --------------------------------------------------------------------------

def _num(x) -> str:
    return "NA" if x is None else repr(float(x))


def coverage_csv(rows: list[CoverageRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "i", "j", "type", "L", "coverage", "half_width", "length", "nonexistence", "replications"])
    for r in rows:
        w.writerow([r.n, r.pair[0], r.pair[1], r.estimator.value, r.L_label, _num(r.coverage),
                    _num(r.mean_half_width), _num(r.mean_length), repr(r.nonexistence_pct), r.replications])
    return buf.getvalue()


def distance_csv(cfgs: list[ExperimentConfig], values: list[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "epsilon_rule", "epsilon", "replications", "mean_dist_inf"])
    for c, v in zip(cfgs, values):
        w.writerow([c.n, c.epsilon_label, repr(c.epsilon_value), c.replications, repr(v)])
    return buf.getvalue()


def qq_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theoretical", "empirical"])
    for q, v in table:
        w.writerow([repr(float(q)), repr(float(v))])
    return buf.getvalue()
