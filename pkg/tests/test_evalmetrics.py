import math
import random

import numpy as np
import pytest

from pchm.core import HubParams
from pchm.estimate import FitConfig, count_params
from pchm.evalmetrics import (
    SimReplicateReport,
    SimSettings,
    aggregate,
    mae_A,
    mae_rho,
    replicate_seed,
    run_replicates,
)
from pchm.errors import DimensionError, ParameterError

SMALL = SimSettings(n=10, n_o=2)
FAST = FitConfig(n_starts=3, max_iter=300)
GRID = [1.0, 2.0, 4.0, 8.0]


def _p(rho, A):
    return HubParams.with_conventions(np.asarray(rho, float), np.asarray(A, float))


class TestMae:
    def test_identical_is_zero(self):
        p = _p([0.5, 0.5, 0], [[1, .3, .2], [.3, 1, .4], [.2, .4, 0]])
        assert mae_A(p, p) == 0.0 and mae_rho(p, p) == 0.0

    def test_hand_computed(self):
        est = _p([0.6, 0.4, 0], [[1, .5, .1], [.5, 1, .2], [.1, .2, 0]])
        truth = _p([0.5, 0.5, 0], [[1, .3, .2], [.3, 1, .4], [.2, .4, 0]])
        assert mae_A(est, truth) == pytest.approx((0.2 + 0.1 + 0.2) / 3)
        assert mae_rho(est, truth) == pytest.approx(0.2 / 3)

    def test_tiny_weights_treated_as_zero(self):
        # node 3 carries 5e-7 weight; its link to node 2 is dropped before comparing
        est = _p([1 - 5e-7, 0, 5e-7], [[1, .5, .5], [.5, 0, .9], [.5, .9, 1]])
        truth = _p([1.0, 0, 0], [[1, .5, .5], [.5, 0, 0], [.5, 0, 0]])
        assert mae_A(est, truth) == 0.0
        assert mae_rho(est, truth) == pytest.approx(5e-7 / 3, abs=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            mae_A(_p([1, 0], np.zeros((2, 2))), _p([1, 0, 0], np.zeros((3, 3))))


def _report(T, r, method, v):
    return SimReplicateReport("iid", T, r, method, v, v / 10, 3, count_params(10, 3), 2.0, 0.1, 0)


class TestAggregate:
    def test_single_replicate_zero_stdev(self):
        rows = aggregate([_report(100, 0, "PCHM", 0.3)])
        mae = next(r for r in rows if r.metric == "mae_A")
        assert mae.mean == 0.3 and mae.stdev == 0.0

    def test_sample_stdev_and_order_invariance(self):
        reps = [_report(100, r, "PCHM", v) for r, v in enumerate([0.1, 0.2, 0.4, 0.7])]
        rows = aggregate(reps)
        shuffled = list(reps)
        random.Random(1).shuffle(shuffled)
        assert aggregate(shuffled) == rows
        mae = next(r for r in rows if r.metric == "mae_A")
        assert mae.mean == pytest.approx(0.35)
        assert mae.stdev == pytest.approx(np.std([0.1, 0.2, 0.4, 0.7], ddof=1))

    def test_nan_metrics_skipped(self):
        rep = SimReplicateReport("iid", 100, 0, "HM", 0.1, 0.01, 3, 29, math.nan, 0.1, 0)
        assert "eta" not in {r.metric for r in aggregate([rep])}


class TestRunReplicates:
    def test_invalid_design(self):
        with pytest.raises(ParameterError):
            run_replicates("bogus", SMALL, [50], 1, FAST, GRID)
        with pytest.raises(ParameterError):
            run_replicates("iid", SMALL, [50], 0, FAST, GRID)

    @pytest.mark.parametrize("design", ["iid", "time_varying", "two_leader"])
    def test_runs_each_design(self, design):
        res = run_replicates(design, SMALL, [60], 2, FAST, GRID)
        assert len(res.reports) == 4
        for rep in res.reports:
            assert rep.est_d == count_params(10, rep.est_n_o)
            assert rep.mae_rho >= 0
            assert math.isnan(rep.mae_A) == (design == "two_leader")
            assert math.isnan(rep.selected_eta) == (rep.method == "HM")

    def test_deterministic_and_stable_under_added_T(self):
        a = run_replicates("iid", SMALL, [60], 2, FAST, GRID)
        b = run_replicates("iid", SMALL, [40, 60], 2, FAST, GRID)
        strip = lambda reps: [(r.T, r.replicate, r.method, r.mae_A, r.est_n_o, r.seed) for r in reps]
        assert strip(a.reports) == strip([r for r in b.reports if r.T == 60])
        assert aggregate(a.reports) == [row for row in b.aggregate if row.T == 60]

    def test_permute_records_order(self):
        res = run_replicates("iid", SMALL, [60], 1, FAST, GRID, permute=True)
        perm = res.reports[0].permutation
        assert sorted(perm) == list(range(10))

    def test_replicate_seeds_distinct(self):
        states = {tuple(replicate_seed(0, "iid", 500, r).generate_state(2)) for r in range(50)}
        assert len(states) == 50
