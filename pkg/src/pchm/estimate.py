"""EM for the hub model, pseudo-EM for the penalized model, and BIC-based eta selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from . import core
from .baselines import half_weight_index
from .core import NEG_INF, GroupedData, HubParams
from .errors import DegenerateMassError, FitFailureError, ParameterError

logger = logging.getLogger(__name__)

# RNG purpose tags; streams are SeedSequence(seed, spawn_key=(tag, index))
START_STREAM = 1

INIT_CLAMP = (0.05, 0.95)
INIT_NOISE = 0.1


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by the HM and PCHM drivers.

    Attributes:
        n_starts: random starting points for the HM EM.
        max_iter: loop bound of each EM / pseudo-EM run.
        rel_tol: stop when the relative change of the HM log-likelihood
            drops below this value.
        zero_threshold: mixing weights below this are set to exactly 0.
        seed: master seed for the random starts.
    """

    n_starts: int = 20
    max_iter: int = 5000
    rel_tol: float = 1e-6
    zero_threshold: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ParameterError("n_starts must be >= 1")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be > 0")
        if not self.zero_threshold >= 0:
            raise ParameterError("zero_threshold must be >= 0")


@dataclass(frozen=True, eq=False)
class FitResult:
    params: HubParams
    log_lik: float
    objective: float
    eta: float
    bic: float
    n_o: int
    d: int
    iterations: int
    converged: bool
    seed: int
    trace: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class EtaEntry:
    eta: float
    fit: Optional[FitResult]
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.fit is None

    @property
    def bic(self) -> float:
        return math.inf if self.fit is None else self.fit.bic


@dataclass(frozen=True)
class EtaPath:
    """Fits along an eta grid; ``selected_index`` points at the minimal-BIC entry."""

    entries: tuple[EtaEntry, ...]
    selected_index: int
    hm: FitResult

    @property
    def selected(self) -> EtaEntry:
        return self.entries[self.selected_index]

    @property
    def etas(self) -> tuple[float, ...]:
        return tuple(e.eta for e in self.entries)


@dataclass(frozen=True, eq=False)
class Run:
    """Raw output of one EM / pseudo-EM run."""

    rho: NDArray
    A: NDArray
    trace: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def log_lik(self) -> float:
        return self.trace[-1]


def count_params(n: int, n_o: int) -> int:
    """Free parameters of a hub model with ``n_o`` leaders among ``n`` nodes."""
    if not 1 <= n_o <= n:
        raise ParameterError(f"need 1 <= n_o <= n, got n_o={n_o}, n={n}")
    return n_o * (n_o - 1) // 2 + n_o * (n - n_o) + (n_o - 1)


def bic(log_lik: float, T: int, d: int) -> float:
    """``-2 log_lik + ln(T) d``; an impossible fit maps to ``+inf``."""
    if log_lik == NEG_INF:
        return math.inf
    return -2.0 * log_lik + math.log(T) * d


def threshold_rho(rho: NDArray, zero_threshold: float) -> NDArray:
    """Zero out entries below the threshold and renormalize to the simplex."""
    out = np.where(rho < zero_threshold, 0.0, rho)
    return out / out.sum()


def _start_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(START_STREAM, index)))


def random_start(data: GroupedData, rng: np.random.Generator) -> HubParams:
    """Data-informed random initialization.

    ``rho`` is flat-Dirichlet over nodes seen in at least one group; ``A`` is
    the half-weight index clamped to [0.05, 0.95] plus symmetric uniform noise
    of amplitude 0.1, re-clamped, with leader diagonals set to 1.
    """
    n = data.n
    present = data.groups.sum(axis=0) > 0
    rho = np.zeros(n)
    rho[present] = rng.dirichlet(np.ones(int(present.sum())))
    lo, hi = INIT_CLAMP
    noise = rng.uniform(-INIT_NOISE, INIT_NOISE, size=(n, n))
    upper = np.triu(np.clip(np.clip(half_weight_index(data), lo, hi) + noise, lo, hi), 1)
    return HubParams.with_conventions(rho, upper + upper.T)


def _hm_ll(G: NDArray, rho: NDArray, A: NDArray) -> tuple[float, NDArray, NDArray]:
    rows = np.flatnonzero(rho > 0)
    comp = core.component_loglik(G, A, rows)
    per_group = core.row_log_sum(comp + np.log(rho[rows]))
    ll = NEG_INF if np.any(per_group == NEG_INF) else float(per_group.sum())
    return ll, rows, comp


def _has_converged(old: float, new: float, rel_tol: float) -> bool:
    return new == old or abs(new - old) < rel_tol * abs(old)


def run_pseudo_em(
    data: GroupedData,
    start: HubParams,
    eta: float,
    cfg: FitConfig,
    threshold_in_loop: bool = False,
) -> Run:
    """Iterate E-step, A update and rho update from ``start``.

    With ``eta == 1`` this is the standard EM for the hub model and the
    log-likelihood trace is non-decreasing. Convergence is judged on the HM
    log-likelihood for every ``eta``. When ``threshold_in_loop`` is set, rho
    entries falling below ``cfg.zero_threshold`` are zeroed after each update
    and stay zero for the rest of the run.
    """
    if not eta >= 1.0:
        raise ParameterError(f"eta must be >= 1, got {eta}")
    G = data.groups
    n = data.n
    rho = np.array(start.rho)
    A = np.array(start.A)
    ll, rows, comp = _hm_ll(G, rho, A)
    if ll == NEG_INF:
        raise DegenerateMassError(int(np.flatnonzero(core.row_log_sum(comp) == NEG_INF)[0]))
    trace = [ll]
    for it in range(1, cfg.max_iter + 1):
        resp = core.responsibilities(comp + eta * np.log(rho[rows]), rows, n)
        A = core.update_A(G, resp)
        rho = resp.mean(axis=0)
        if threshold_in_loop:
            rho = threshold_rho(rho, cfg.zero_threshold)
            A = core.apply_conventions(rho, A)
        new, rows, comp = _hm_ll(G, rho, A)
        trace.append(new)
        if new == NEG_INF:
            raise DegenerateMassError(int(np.flatnonzero(core.row_log_sum(comp) == NEG_INF)[0]))
        if _has_converged(ll, new, cfg.rel_tol):
            return Run(rho, A, tuple(trace), it, True)
        ll = new
    return Run(rho, A, tuple(trace), cfg.max_iter, False)


def _finalize(data: GroupedData, run: Run, eta: float, cfg: FitConfig) -> FitResult:
    """Threshold rho, renormalize, and run one more E+M cycle for consistency."""
    rho = threshold_rho(run.rho, cfg.zero_threshold)
    params = HubParams.with_conventions(rho, run.A)
    post = core.e_step(data, params, eta)
    rho = threshold_rho(core.m_step_rho(post), cfg.zero_threshold)
    params = HubParams.with_conventions(rho, core.m_step_A(data, post))
    log_lik = core.hm_log_likelihood(data, params)
    n_o = params.n_o
    d = count_params(data.n, n_o)
    return FitResult(
        params=params,
        log_lik=log_lik,
        objective=core.pchm_objective(data, params, eta),
        eta=float(eta),
        bic=bic(log_lik, data.T, d),
        n_o=n_o,
        d=d,
        iterations=run.iterations,
        converged=run.converged,
        seed=cfg.seed,
        trace=run.trace,
    )


def fit_hm(data: GroupedData, cfg: FitConfig = FitConfig()) -> FitResult:
    """Maximum-likelihood hub model from ``cfg.n_starts`` random starts.

    Returns the start with the highest log-likelihood (earliest start on
    ties). Raises :class:`FitFailureError` if every start is degenerate.
    """
    best: Optional[Run] = None
    for s in range(cfg.n_starts):
        start = random_start(data, _start_rng(cfg.seed, s))
        try:
            run = run_pseudo_em(data, start, 1.0, cfg)
        except DegenerateMassError as exc:
            logger.debug("start %d degenerate: %s", s, exc)
            continue
        if best is None or run.log_lik > best.log_lik:
            best = run
    if best is None:
        raise FitFailureError(f"all {cfg.n_starts} starts produced a zero likelihood")
    return _finalize(data, best, 1.0, cfg)


def fit_pchm(data: GroupedData, eta: float, start: HubParams, cfg: FitConfig = FitConfig()) -> FitResult:
    """Pseudo-EM for the penalized model, warm-started from ``start``.

    ``start`` is normally the HM fit. ``converged`` is False when the loop
    bound was hit before the relative log-likelihood change fell below
    ``cfg.rel_tol``.
    """
    if not eta >= 1.0:
        raise ParameterError(f"eta must be >= 1, got {eta}")
    run = run_pseudo_em(data, start, eta, cfg, threshold_in_loop=True)
    return _finalize(data, run, eta, cfg)


def eta_grid(lo: float = 1.0, hi: float = 15.0, step: float = 0.5) -> list[float]:
    """Inclusive grid ``lo, lo+step, ..., hi`` rounded to 10 decimals."""
    if step <= 0 or hi < lo:
        raise ParameterError(f"bad grid {lo}:{hi}:{step}")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 10) for i in range(k + 1)]


def _select(entries: Sequence[EtaEntry]) -> int:
    ok = [i for i, e in enumerate(entries) if not e.failed]
    if not ok:
        raise FitFailureError("every grid point failed")
    converged = [i for i in ok if entries[i].fit.converged]
    pool = converged or ok
    # etas are ascending, so the first minimum is the smallest-eta tie-break
    return min(pool, key=lambda i: (entries[i].bic, entries[i].eta))


def select_eta(
    data: GroupedData,
    grid: Sequence[float],
    cfg: FitConfig = FitConfig(),
    hm: Optional[FitResult] = None,
) -> EtaPath:
    """Fit PCHM on every grid value and pick the minimal-BIC eta.

    Each grid point is warm-started from the HM fit, which is computed here
    unless supplied; the entry for ``eta == 1`` is that HM fit itself.
    Unconverged grid points are ignored by the selection unless every point
    is unconverged.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ParameterError("eta grid is empty")
    if any(g < 1.0 for g in grid):
        raise ParameterError("every eta must be >= 1")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("eta grid must be strictly increasing")
    if hm is None:
        hm = fit_hm(data, cfg)
    entries = []
    for eta in grid:
        if eta == 1.0:
            entries.append(EtaEntry(eta, hm))
            continue
        try:
            entries.append(EtaEntry(eta, fit_pchm(data, eta, hm.params, cfg)))
        except (DegenerateMassError, FitFailureError) as exc:
            logger.warning("eta=%g failed: %s", eta, exc)
            entries.append(EtaEntry(eta, None, str(exc)))
    entries = tuple(entries)
    return EtaPath(entries, _select(entries), hm)
