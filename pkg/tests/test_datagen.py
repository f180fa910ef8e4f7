import numpy as np
import pytest
from scipy.special import expit

from pchm.core import HubParams
from pchm.datagen import (
    SparseBetaSpec,
    TimeVaryingSpec,
    TwoLeaderSpec,
    gen_groups,
    gen_hub_params,
    gen_time_varying,
    gen_two_leader,
    random_attraction,
    theta_from_params,
    uniform_leaders,
)
from pchm.datasets import toy_truth
from pchm.errors import ParameterError

BASE_SPEC = dict(n=50, n_o=8, p=0.5, alpha=1.0, beta=3.0)


class TestSparseBeta:
    def test_p_zero_gives_empty_network(self):
        p = gen_hub_params(SparseBetaSpec(10, 3, p=0.0))
        np.testing.assert_array_equal(p.A, np.diag([1.0, 1, 1, 0, 0, 0, 0, 0, 0, 0]))

    def test_structure(self):
        p = gen_hub_params(SparseBetaSpec(**BASE_SPEC, seed=3))
        assert p.n_o == 8
        np.testing.assert_allclose(p.rho[:8], 1 / 8)
        assert np.all(p.A[8:, 8:] == 0)

    def _leader_pair_entries(self, seeds):
        out = []
        for s in seeds:
            A = gen_hub_params(SparseBetaSpec(**BASE_SPEC, seed=s)).A
            iu = np.triu_indices(50, 1)
            lead = iu[0] < 8
            out.append(A[iu][lead])
        return np.concatenate(out)

    def test_beta_mean(self):
        vals = self._leader_pair_entries(range(10))
        assert vals[vals > 0].mean() == pytest.approx(0.25, abs=0.03)

    def test_density(self):
        vals = self._leader_pair_entries(range(10))
        assert (vals > 0).mean() == pytest.approx(0.5, abs=0.05)

    def test_validation(self):
        with pytest.raises(ParameterError):
            SparseBetaSpec(5, 6)
        with pytest.raises(ParameterError):
            SparseBetaSpec(5, 2, p=1.5)
        with pytest.raises(ParameterError):
            SparseBetaSpec(5, 2, alpha=0)


class TestGenGroups:
    def test_full_rows(self):
        n = 5
        p = HubParams.with_conventions(np.eye(n)[2], np.ones((n, n)))
        d = gen_groups(p, 20, seed=0)
        assert np.all(d.groups == 1)

    def test_singletons(self):
        p = HubParams.with_conventions(np.eye(4)[1], np.zeros((4, 4)))
        d = gen_groups(p, 15, seed=1)
        np.testing.assert_array_equal(d.groups, np.tile([0, 1, 0, 0], (15, 1)))

    def test_member_marginal_mixes_leader_rows(self):
        d = gen_groups(toy_truth(), 10000, seed=0)
        assert d.groups[:, 3].mean() == pytest.approx(0.5 * 0.9063 + 0.5 * 0.8817, abs=0.01)

    def test_center_always_member(self):
        d, centers = gen_groups(toy_truth(), 500, seed=4, return_centers=True)
        assert np.all(d.groups[np.arange(500), centers] == 1)
        assert set(np.unique(centers)) <= {0, 1}

    def test_deterministic(self):
        a = gen_groups(toy_truth(), 50, seed=9)
        b = gen_groups(toy_truth(), 50, seed=9)
        assert a == b
        assert a != gen_groups(toy_truth(), 50, seed=10)


class TestTimeVarying:
    def _theta(self, seed=0):
        return theta_from_params(gen_hub_params(SparseBetaSpec(**BASE_SPEC, seed=seed)))

    def test_theta_bounds(self):
        A = expit(self._theta())
        assert A.min() >= 0.01 - 1e-12 and A.max() <= 0.99 + 1e-12

    def test_keep_probability_increases(self):
        theta = self._theta()
        assert np.all(expit(theta + 1.0) > expit(theta))
        assert np.all(expit(theta - 1.0) < expit(theta))

    def test_q_one_matches_gen_groups(self):
        theta = self._theta(2)
        n_o, n = theta.shape
        A = np.zeros((n, n))
        A[:n_o] = expit(theta)
        A[:, :n_o] = expit(theta).T
        params = HubParams.with_conventions(uniform_leaders(n, n_o), A)
        tv, starts = gen_time_varying(TimeVaryingSpec(theta, 1.0, 1.0, -1.0, 300, seed=5), return_segments=True)
        assert starts.all()
        assert tv == gen_groups(params, 300, seed=5)

    def test_segment_length(self):
        _, starts = gen_time_varying(
            TimeVaryingSpec(self._theta(), 0.2, 1.0, -1.0, 10000, seed=1), return_segments=True
        )
        assert 10000 / starts.sum() == pytest.approx(5.0, abs=0.2)

    def test_leader_persists_within_segment(self):
        theta = np.full((3, 6), -20.0)
        d, starts = gen_time_varying(TimeVaryingSpec(theta, 0.3, 0.0, 0.0, 200, seed=3), return_segments=True)
        # with vanishing link probabilities every group is the segment leader alone
        leaders = d.groups.argmax(axis=1)
        assert np.all(d.groups.sum(axis=1) == 1)
        seg = np.cumsum(starts)
        for s in np.unique(seg):
            assert len(set(leaders[seg == s])) == 1

    def test_validation(self):
        with pytest.raises(ParameterError):
            TimeVaryingSpec(np.zeros((2, 4)), 0.0, 1, -1, 10)
        with pytest.raises(ParameterError):
            TimeVaryingSpec(np.zeros((5, 4)), 0.5, 1, -1, 10)


class TestTwoLeader:
    def test_zero_offsets_half_probability(self):
        h = np.zeros((2, 40))
        d, pairs = gen_two_leader(TwoLeaderSpec(h, 0.0, 2000, seed=0), return_leaders=True)
        assert d.groups[:, 2:].mean() == pytest.approx(0.5, abs=0.01)

    def test_join_probability_range(self):
        lo, hi = expit(-3.5), expit(-1.5)
        assert lo == pytest.approx(0.0293, abs=1e-4) and hi == pytest.approx(0.1824, abs=1e-4)
        h = random_attraction(50, 8, seed=0)
        sums = h[:, None, :] + h[None, :, :] - 3.5
        assert expit(sums).min() >= lo and expit(sums).max() <= hi

    def test_leader_marginal(self):
        h = random_attraction(50, 8, seed=1)
        d, pairs = gen_two_leader(TwoLeaderSpec(h, -3.5, 10000, seed=2), return_leaders=True)
        assert np.all(pairs[:, 0] != pairs[:, 1])
        counts = np.bincount(pairs.ravel(), minlength=8) / 10000
        np.testing.assert_allclose(counts, 0.25, atol=0.02)
        assert np.all(d.groups[np.arange(10000)[:, None], pairs] == 1)

    def test_validation(self):
        with pytest.raises(ParameterError):
            TwoLeaderSpec(np.zeros((1, 5)), -3.5, 10)
        with pytest.raises(ParameterError):
            TwoLeaderSpec(-np.ones((2, 5)), -3.5, 10)
