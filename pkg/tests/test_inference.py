import math

import numpy as np
import pytest

from bidegree import kernels
from bidegree.estimation import FitResult, P0Params, Status, expected_degrees, information_matrix, jacobian_f, solve
from bidegree.graph import BiSequence
from bidegree.inference import (
    ApproxInverse,
    ConfidenceInterval,
    Statistic,
    approx_inverse,
    fisher_info,
    pairwise_ci,
    single_variance,
    standardized_stat,
)
from bidegree.noise import Mechanism, PrivacyConfig


def fit_at(params: P0Params) -> FitResult:
    """A converged fit whose estimate is exactly ``params``."""
    return FitResult(params, Status.CONVERGED, 0, 0.0, expected_degrees(params))


def random_params(rng, n, scale=1.0):
    a = rng.uniform(-scale, scale, n)
    b = rng.uniform(-scale, scale, n)
    b[-1] = 0.0
    return P0Params(a, b)


def s_error(n):
    info = fisher_info(P0Params.zeros(n))
    return np.abs(np.linalg.inv(info.v) - approx_inverse(info).dense()).max()


class TestFisherInfo:
    def test_zero_theta(self):
        n = 3
        info = fisher_info(P0Params.zeros(n))
        assert np.allclose(np.diag(info.v), (n - 1) / 4)
        assert info.corner == pytest.approx(0.5)
        assert info.diag.shape == (2 * n,)

    def test_border_definitions(self, rng):
        info = fisher_info(random_params(rng, 6))
        v = info.v
        off = v.sum(axis=1) - np.diag(v)
        assert np.allclose(info.border, np.diag(v) - off)
        assert info.corner == pytest.approx(info.border.sum())

    def test_matches_negative_jacobian(self, rng):
        for _ in range(50):
            p = random_params(rng, int(rng.integers(2, 15)), 2.0)
            assert np.array_equal(fisher_info(p).v, -jacobian_f(p))

    def test_corner_is_in_information_of_last_node(self, rng):
        # v_{2n,2n} is the in-degree variance of node n
        p = random_params(rng, 9)
        w = information_matrix(p)[:9, 9:]  # cross block without column n
        probs = 1 / (1 + np.exp(-(p.alpha[:, None] + p.beta[None, :])))
        col = probs[:, -1] * (1 - probs[:, -1])
        col[-1] = 0.0
        assert fisher_info(p).corner == pytest.approx(col.sum())
        assert w.shape == (9, 8)


class TestApproxInverse:
    def test_small_case(self):
        s = approx_inverse(fisher_info(P0Params.zeros(3)))
        assert s.entry(0, 0) == pytest.approx(4.0)
        assert s.entry(0, 1) == pytest.approx(2.0)
        assert s.entry(0, 3) == pytest.approx(-2.0)
        assert s.entry(3, 4) == pytest.approx(2.0)

    def test_dense_matches_entries(self, rng):
        s = approx_inverse(fisher_info(random_params(rng, 5)))
        d = s.dense()
        assert isinstance(s, ApproxInverse)
        for i in range(9):
            for j in range(9):
                assert d[i, j] == pytest.approx(s.entry(i, j))

    def test_error_decreases_quadratically(self):
        errs = [s_error(n) for n in (10, 20, 40)]
        assert errs[0] > errs[1] > errs[2]
        ratios = [errs[0] / errs[1] * (9 / 19) ** 2, errs[1] / errs[2] * (19 / 39) ** 2]
        assert all(0.7 < r < 1.3 for r in ratios)

    def test_s_times_v_approaches_identity(self):
        vals = []
        for n in (10, 20, 40):
            info = fisher_info(P0Params.zeros(n))
            prod = approx_inverse(info).dense() @ info.v
            vals.append(np.abs(prod - np.eye(2 * n - 1)).max())
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] * 40 < 2 * vals[0] * 10


class TestConfidenceInterval:
    def test_fields(self):
        ci = ConfidenceInterval(1.0, 0.5, 0.9)
        assert (ci.lower, ci.upper, ci.length) == (0.5, 1.5, 1.0)
        assert ci.covers(1.4) and not ci.covers(1.6)

    def test_validation(self):
        with pytest.raises(ValueError):
            ConfidenceInterval(0.0, -1.0, 0.95)
        with pytest.raises(ValueError):
            ConfidenceInterval(0.0, 1.0, 1.0)

    def test_half_width_at_zero(self):
        ci = pairwise_ci(fit_at(P0Params.zeros(100)), 0, 1)
        assert ci.half_width == pytest.approx(1.959964 * math.sqrt(8 / 99), rel=1e-6)
        assert ci.half_width == pytest.approx(0.557, abs=1e-3)
        assert ci.center == 0.0

    def test_rejects_same_index(self):
        with pytest.raises(ValueError):
            pairwise_ci(fit_at(P0Params.zeros(5)), 2, 2)

    def test_rejects_failed_fit(self):
        t = BiSequence(np.full(4, 3.0), np.full(4, 3.0))
        res = solve(t)
        assert not res.converged
        with pytest.raises(ValueError):
            pairwise_ci(res, 0, 1)
        with pytest.raises(ValueError):
            single_variance(res, 0, None)

    def test_plateau_shift_keeps_width(self, rng):
        # information entries see theta only through alpha_i + beta_j
        p = random_params(rng, 12)
        w0 = kernels.edge_variances(p.alpha, p.beta)
        w1 = kernels.edge_variances(p.alpha + 0.8, p.beta - 0.8)
        assert np.allclose(w0, w1)
        d0 = np.concatenate([w0.sum(axis=1), w0.sum(axis=0)])
        d1 = np.concatenate([w1.sum(axis=1), w1.sum(axis=0)])
        z = 1.959963984540054
        for i, j in [(0, 1), (3, 7), (12, 15)]:
            assert pairwise_ci(fit_at(p), i, j).half_width == pytest.approx(z * math.sqrt(1 / d1[i] + 1 / d1[j]))
            assert 1 / d0[i] + 1 / d0[j] == pytest.approx(1 / d1[i] + 1 / d1[j])


class TestSingleVariance:
    def test_none_mechanism_equals_s(self, rng):
        p = random_params(rng, 10)
        s = approx_inverse(fisher_info(p))
        for i in range(19):
            assert single_variance(fit_at(p), i, None) == pytest.approx(s.entry(i, i))
            assert single_variance(fit_at(p), i, PrivacyConfig(1.0, Mechanism.NONE)) == pytest.approx(s.entry(i, i))

    def test_noise_adds_variance(self, rng):
        p = random_params(rng, 10)
        s = approx_inverse(fisher_info(p))
        for i in range(19):
            assert single_variance(fit_at(p), i, PrivacyConfig(2.0)) > s.entry(i, i)

    def test_continuous_term(self, rng):
        n = 10
        p = random_params(rng, n)
        cfg = PrivacyConfig(1.0, Mechanism.CONTINUOUS_LAPLACE)
        c = fisher_info(p).corner
        extra = single_variance(fit_at(p), 0, cfg) - single_variance(fit_at(p), 0, None)
        assert extra == pytest.approx(2 * (2 * n - 1) * cfg.scale**2 / c**2)


class TestStandardizedStat:
    @pytest.mark.parametrize("kind", list(Statistic))
    def test_zero_at_truth(self, kind, rng):
        p = random_params(rng, 8)
        assert standardized_stat(fit_at(p), kind, 1, 4, p) == 0.0

    def test_zeta_uses_alpha_and_beta_diagonals(self, rng):
        n = 8
        p = random_params(rng, n)
        est = P0Params(p.alpha + 0.1, np.append(p.beta[:-1] + 0.2, 0.0))
        d = fisher_info(est).diag
        i, j = 2, 5
        want = 0.3 / math.sqrt(1 / d[i] + 1 / d[n + j])
        assert standardized_stat(fit_at(est), "zeta", i, j, p) == pytest.approx(want)

    def test_xi_and_eta(self, rng):
        n = 8
        p = random_params(rng, n)
        est = P0Params(p.alpha + np.arange(n) * 0.01, p.beta)
        d = fisher_info(est).diag
        want = (0.01 * (1 - 3)) / math.sqrt(1 / d[1] + 1 / d[3])
        assert standardized_stat(fit_at(est), "xi", 1, 3, p) == pytest.approx(want)
        assert standardized_stat(fit_at(est), "eta", 1, 3, p) == 0.0
