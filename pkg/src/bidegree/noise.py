"""Additive noise mechanisms for releasing bi-degree sequences.

Changing one directed edge moves one out-degree and one in-degree by one, so
the bi-degree sequence has L1 sensitivity 2. The discrete mechanism therefore
uses ``lambda = exp(-epsilon / 2)``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .graph import BiSequence, NoisyBiSequence

SENSITIVITY = 2


class Mechanism(str, enum.Enum):
    DISCRETE_LAPLACE = "discrete_laplace"
    CONTINUOUS_LAPLACE = "continuous_laplace"
    NONE = "none"


@dataclass(frozen=True)
class PrivacyConfig:
    """Privacy parameter, mechanism choice and seed.

    ``positive_only`` replaces each draw ``e`` by ``|e|`` so released values
    never fall below the true degree. It breaks the pure-DP ratio bound and is
    off by default.
    """

    epsilon: float
    mechanism: Mechanism = Mechanism.DISCRETE_LAPLACE
    seed: int = 0
    positive_only: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def lam(self) -> float:
        """Discrete Laplace ratio ``exp(-epsilon/2)``."""
        return math.exp(-self.epsilon / SENSITIVITY)

    @property
    def scale(self) -> float:
        """Continuous Laplace scale ``sensitivity / epsilon``."""
        return SENSITIVITY / self.epsilon

    def noise_model(self) -> "NoiseModel":
        if self.mechanism is Mechanism.DISCRETE_LAPLACE:
            return NoiseModel(kappa=-2.0 / math.log(self.lam) if self.lam > 0 else 0.0)
        if self.mechanism is Mechanism.CONTINUOUS_LAPLACE:
            return NoiseModel(kappa=self.scale)
        return NoiseModel(kappa=0.0)

    @classmethod
    def from_dict(cls, d: dict) -> "PrivacyConfig":
        return cls(
            epsilon=float(d["epsilon"]),
            mechanism=d.get("mechanism", Mechanism.DISCRETE_LAPLACE.value),
            seed=int(d.get("seed", 0)),
            positive_only=bool(d.get("positive_only", False)),
        )

    @classmethod
    def from_json(cls, path) -> "PrivacyConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "mechanism": self.mechanism.value,
            "seed": self.seed,
            "positive_only": self.positive_only,
        }

    def with_epsilon(self, epsilon: float) -> "PrivacyConfig":
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class NoiseModel:
    """Sub-exponential scale ``kappa``, optionally with per-coordinate values."""

    kappa: float
    per_coordinate: tuple | None = None

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.per_coordinate is not None and max(self.per_coordinate) > self.kappa:
            raise ValueError("kappa must bound every per-coordinate scale")


def sample_discrete_laplace(lam: float, rng: np.random.Generator, size=None):
    """Draw from ``P(Z=z) = (1-lam)/(1+lam) * lam**|z|``.

    Sampled as the difference of two geometric(1 - lam) variables.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    p = 1.0 - lam
    g1 = rng.geometric(p, size=size)
    g2 = rng.geometric(p, size=size)
    return g1 - g2


def sample_continuous_laplace(scale: float, rng: np.random.Generator, size=None):
    """Laplace(0, scale) with density ``exp(-|z|/scale) / (2 scale)``."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return rng.laplace(0.0, scale, size=size)


def _draw_noise(cfg: PrivacyConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Noise of shape (n, 2); row i is (e_i+, e_i-), drawn in that order."""
    if cfg.mechanism is Mechanism.DISCRETE_LAPLACE:
        lam = cfg.lam
        if lam == 0.0:
            e = np.zeros((n, 2), dtype=np.int64)
        else:
            e = sample_discrete_laplace(lam, rng, size=(n, 2))
    elif cfg.mechanism is Mechanism.CONTINUOUS_LAPLACE:
        e = sample_continuous_laplace(cfg.scale, rng, size=(n, 2))
    else:
        return np.zeros((n, 2), dtype=np.int64)
    if cfg.positive_only:
        e = np.abs(e)
    return e


def release_bidegree(d: BiSequence, cfg: PrivacyConfig, rng: np.random.Generator) -> NoisyBiSequence:
    """Add independent noise to every out- and in-degree."""
    e = _draw_noise(cfg, d.n, rng)
    return NoisyBiSequence(d.outdeg + e[:, 0], d.indeg + e[:, 1])


def _l1_residual(z_out, z_in, d: BiSequence):
    return np.abs(z_out - d.outdeg).sum(axis=-1) + np.abs(z_in - d.indeg).sum(axis=-1)


def dp_ratio_bound(cfg: PrivacyConfig, d1: BiSequence, d2: BiSequence, z):
    """Exact ratio ``Q(z | d1) / Q(z | d2)`` of the release mechanism.

    ``z`` is a :class:`BiSequence` or a pair ``(z_out, z_in)`` of arrays whose
    last axis has length n; leading axes are broadcast, so many outputs can be
    checked in one call.
    """
    if cfg.mechanism is Mechanism.NONE:
        raise ValueError("mechanism 'none' has no density; the ratio is undefined")
    if cfg.positive_only:
        raise ValueError("ratio bound is only defined for the symmetric mechanisms")
    if d1.n != d2.n:
        raise ValueError("d1 and d2 must have equal length")
    if isinstance(z, BiSequence):
        z_out, z_in = z.outdeg, z.indeg
    else:
        z_out, z_in = (np.asarray(a) for a in z)
    k = _l1_residual(z_out, z_in, d1) - _l1_residual(z_out, z_in, d2)
    if cfg.mechanism is Mechanism.DISCRETE_LAPLACE:
        # lam**k with lam = exp(-eps/2)
        return np.exp(-(cfg.epsilon / SENSITIVITY) * k)
    return np.exp(-k / cfg.scale)


def _discrete_abs_moments(lam: float):
    second = 2 * lam / (1 - lam) ** 2
    first = 2 * lam / (1 - lam**2)
    return first, second


def noise_mean(cfg: PrivacyConfig) -> float:
    """Mean of one noise draw; nonzero only for ``positive_only``."""
    if cfg.mechanism is Mechanism.NONE or not cfg.positive_only:
        return 0.0
    if cfg.mechanism is Mechanism.DISCRETE_LAPLACE:
        return _discrete_abs_moments(cfg.lam)[0]
    return cfg.scale


def noise_variance(cfg: PrivacyConfig, count: int) -> float:
    """Variance of the sum of ``count`` independent noise draws."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if cfg.mechanism is Mechanism.NONE:
        return 0.0
    if cfg.mechanism is Mechanism.DISCRETE_LAPLACE:
        lam = cfg.lam
        first, second = _discrete_abs_moments(lam)
        per = second - first**2 if cfg.positive_only else second
    else:
        b = cfg.scale
        per = b * b if cfg.positive_only else 2 * b * b
    return count * per
