"""Estimation-error metrics and the Monte Carlo replicate harness."""

from __future__ import annotations

import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from . import datagen
from .core import GroupedData, HubParams
from .errors import DimensionError, HubModelError, ParameterError
from .estimate import FitConfig, FitResult, count_params, eta_grid, select_eta

logger = logging.getLogger(__name__)

DESIGNS = ("iid", "time_varying", "two_leader")
METHODS = ("HM", "PCHM")
MAE_THRESHOLD = 1e-6


def _zeroed(params: HubParams) -> tuple[NDArray, NDArray]:
    rho = np.where(params.rho < MAE_THRESHOLD, 0.0, params.rho)
    A = np.array(params.A)
    off = rho == 0
    A[np.ix_(off, off)] = 0.0
    return rho, A


def _check_same_n(est: HubParams, truth: HubParams) -> None:
    if est.n != truth.n:
        raise DimensionError(f"estimate has {est.n} nodes, truth has {truth.n}")


def mae_A(est: HubParams, truth: HubParams) -> float:
    """Mean absolute error over the strict upper triangle of ``A``.

    Before comparing, both sides have ``rho_i < 1e-6`` treated as 0 and the
    entries between two such nodes set to 0.
    """
    _check_same_n(est, truth)
    _, Ae = _zeroed(est)
    _, At = _zeroed(truth)
    iu = np.triu_indices(est.n, 1)
    return float(np.abs(Ae[iu] - At[iu]).mean())


def mae_rho(est: HubParams, truth: HubParams) -> float:
    _check_same_n(est, truth)
    re, _ = _zeroed(est)
    rt, _ = _zeroed(truth)
    return float(np.abs(re - rt).mean())


@dataclass(frozen=True)
class SimSettings:
    """Generator settings for all three designs; unused fields are ignored."""

    n: int = 50
    n_o: int = 8
    p: float = 0.5
    alpha: float = 1.0
    beta: float = 3.0
    q: float = 0.2
    gamma_b: float = 1.0
    gamma_c: float = -1.0
    c: float = -3.5

    def __post_init__(self):
        if not 1 <= self.n_o <= self.n:
            raise ParameterError(f"need 1 <= n_o <= n, got n_o={self.n_o}, n={self.n}")


@dataclass(frozen=True)
class SimReplicateReport:
    design: str
    T: int
    replicate: int
    method: str
    mae_A: float
    mae_rho: float
    est_n_o: int
    est_d: int
    selected_eta: float
    runtime_seconds: float
    seed: int
    permutation: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class AggregateRow:
    design: str
    T: int
    method: str
    metric: str
    mean: float
    stdev: float
    n_failed: int


@dataclass
class SimulationResult:
    reports: list[SimReplicateReport] = field(default_factory=list)
    failures: dict[tuple[int, str], int] = field(default_factory=dict)
    aggregate: list[AggregateRow] = field(default_factory=list)


def replicate_seed(master_seed: int, design: str, T: int, r: int) -> np.random.SeedSequence:
    """Seed for one replicate; independent of which other T values are run."""
    return np.random.SeedSequence([master_seed, DESIGNS.index(design), T, r])


def _draw(design: str, settings: SimSettings, T: int, seeds: Sequence[int]):
    """Return ``(data, truth, compare_A)``; two-leader truth has no comparable ``A``."""
    s = settings
    param_seed, data_seed = int(seeds[0]), int(seeds[1])
    if design == "two_leader":
        h = datagen.random_attraction(s.n, s.n_o, param_seed)
        data = datagen.gen_two_leader(datagen.TwoLeaderSpec(h, s.c, T, data_seed))
        truth = HubParams.with_conventions(datagen.uniform_leaders(s.n, s.n_o), np.zeros((s.n, s.n)))
        return data, truth, False
    truth = datagen.gen_hub_params(datagen.SparseBetaSpec(s.n, s.n_o, s.p, s.alpha, s.beta, param_seed))
    if design == "iid":
        return datagen.gen_groups(truth, T, data_seed), truth, True
    theta = datagen.theta_from_params(truth, s.n_o)
    spec = datagen.TimeVaryingSpec(theta, s.q, s.gamma_b, s.gamma_c, T, data_seed)
    return datagen.gen_time_varying(spec), truth, True


def _permute_data(data: GroupedData, order: NDArray) -> GroupedData:
    return GroupedData(data.groups[:, order])


def run_replicate(
    design: str,
    settings: SimSettings,
    T: int,
    r: int,
    cfg: FitConfig,
    grid: Sequence[float],
    master_seed: int,
    permute: bool = False,
) -> tuple[SimReplicateReport, SimReplicateReport]:
    """Draw parameters and data for one replicate and fit HM and PCHM."""
    ss = replicate_seed(master_seed, design, T, r)
    seeds = ss.generate_state(4)
    data, truth, compare_A = _draw(design, settings, T, seeds)
    order = None
    if permute:
        order = np.random.default_rng(int(seeds[3])).permutation(settings.n)
        data = _permute_data(data, order)
        truth = truth.permuted(order)
        order = tuple(int(i) for i in order)
    fit_cfg = FitConfig(cfg.n_starts, cfg.max_iter, cfg.rel_tol, cfg.zero_threshold, int(seeds[2]))

    t0 = time.perf_counter()
    path = select_eta(data, grid, fit_cfg)
    elapsed = time.perf_counter() - t0

    def report(method: str, fit: FitResult, eta: float) -> SimReplicateReport:
        return SimReplicateReport(
            design=design,
            T=T,
            replicate=r,
            method=method,
            mae_A=mae_A(fit.params, truth) if compare_A else math.nan,
            mae_rho=mae_rho(fit.params, truth),
            est_n_o=fit.n_o,
            est_d=count_params(settings.n, fit.n_o),
            selected_eta=eta,
            runtime_seconds=elapsed,
            seed=fit_cfg.seed,
            permutation=order,
        )

    return report("HM", path.hm, math.nan), report("PCHM", path.selected.fit, path.selected.eta)


def _task(args):
    design, settings, T, r, cfg, grid, master_seed, permute = args
    try:
        return T, r, run_replicate(design, settings, T, r, cfg, grid, master_seed, permute), None
    except HubModelError as exc:
        return T, r, None, str(exc)


def _stdev(values: list[float]) -> float:
    return statistics.stdev(values) if len(values) > 1 else 0.0


def aggregate(
    reports: Iterable[SimReplicateReport], failures: Optional[dict[tuple[int, str], int]] = None
) -> list[AggregateRow]:
    """Mean and sample standard deviation per (design, T, method, metric).

    Rows are ordered by design, T, method, then a fixed metric order, so the
    result does not depend on the order of ``reports``.
    """
    failures = failures or {}
    groups: dict[tuple[str, int, str], list[SimReplicateReport]] = {}
    for rep in reports:
        groups.setdefault((rep.design, rep.T, rep.method), []).append(rep)
    rows = []
    for design, T, method in sorted(groups, key=lambda k: (DESIGNS.index(k[0]), k[1], METHODS.index(k[2]))):
        reps = groups[(design, T, method)]
        metrics = {
            "mae_A": [x.mae_A for x in reps],
            "mae_rho": [x.mae_rho for x in reps],
            "n_o": [float(x.est_n_o) for x in reps],
            "d": [float(x.est_d) for x in reps],
            "eta": [x.selected_eta for x in reps],
        }
        for name, values in metrics.items():
            values = sorted(v for v in values if not math.isnan(v))
            if not values:
                continue
            rows.append(
                AggregateRow(
                    design, T, method, name, statistics.fmean(values), _stdev(values),
                    failures.get((T, method), 0),
                )
            )
    return rows


def run_replicates(
    design: str,
    settings: SimSettings,
    T_list: Sequence[int],
    R: int,
    cfg: FitConfig = FitConfig(),
    grid: Optional[Sequence[float]] = None,
    permute: bool = False,
    workers: int = 1,
) -> SimulationResult:
    """Run ``R`` replicates for every ``T`` and aggregate per method.

    ``cfg.seed`` is the master seed; each replicate derives its own streams
    from ``(cfg.seed, design, T, r)``. Failed replicates are counted and left
    out of the aggregates.
    """
    if design not in DESIGNS:
        raise ParameterError(f"unknown design {design!r}; expected one of {DESIGNS}")
    if R < 1:
        raise ParameterError("R must be >= 1")
    grid = list(eta_grid() if grid is None else grid)
    tasks = [(design, settings, int(T), r, cfg, grid, cfg.seed, permute) for T in T_list for r in range(R)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    result = SimulationResult()
    for T, r, pair, err in outcomes:
        if pair is None:
            logger.warning("replicate T=%d r=%d failed: %s", T, r, err)
            for method in METHODS:
                result.failures[(T, method)] = result.failures.get((T, method), 0) + 1
            continue
        result.reports.extend(pair)
    result.aggregate = aggregate(result.reports, result.failures)
    return result
