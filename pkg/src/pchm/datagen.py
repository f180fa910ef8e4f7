"""Seedable generators for hub-model simulation designs.

Three designs are provided:

* i.i.d. hub-model groups on a sparse network whose links are
  Beta-distributed with probability ``p``;
* a time-varying variant in which consecutive groups share a leader within
  Markov segments;
* a two-leader variant in which two leaders jointly attract members through
  a logistic link.

Leaders occupy the first ``n_o`` node indices. Every generator is a
deterministic function of its spec: random streams are
``SeedSequence(seed, spawn_key=(tag,))`` with one fixed tag per purpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit, logit

from .core import GroupedData, HubParams
from .errors import ParameterError

_PARAMS, _CENTER, _MEMBER, _SEGMENT, _LEADERS = 11, 12, 13, 14, 15

THETA_CLAMP = (0.01, 0.99)


def stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag,)))


def uniform_leaders(n: int, n_o: int) -> NDArray[np.float64]:
    rho = np.zeros(n)
    rho[:n_o] = 1.0 / n_o
    return rho


@dataclass(frozen=True)
class SparseBetaSpec:
    n: int
    n_o: int
    p: float = 0.5
    alpha: float = 1.0
    beta: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_o <= self.n:
            raise ParameterError(f"need 1 <= n_o <= n, got n_o={self.n_o}, n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError("link density p must lie in [0, 1]")
        if not (self.alpha > 0 and self.beta > 0):
            raise ParameterError("Beta shape parameters must be positive")


@dataclass(frozen=True, eq=False)
class TimeVaryingSpec:
    """Leader logits ``theta`` (n_o x n), segment-start probability ``q`` and
    the keep / add shifts ``gamma_b`` / ``gamma_c``."""

    theta: NDArray[np.float64]
    q: float
    gamma_b: float
    gamma_c: float
    T: int
    seed: int = 0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.ndim != 2 or theta.shape[0] > theta.shape[1]:
            raise ParameterError("theta must be an n_o x n matrix with n_o <= n")
        if not 0.0 < self.q <= 1.0:
            raise ParameterError("q must lie in (0, 1]")
        if self.T < 1:
            raise ParameterError("T must be >= 1")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True, eq=False)
class TwoLeaderSpec:
    """Non-negative attraction offsets ``h`` (n_o x n) and intercept ``c``."""

    h: NDArray[np.float64]
    c: float
    T: int
    seed: int = 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] > h.shape[1]:
            raise ParameterError("h must be an n_o x n matrix with n_o <= n")
        if h.shape[0] < 2:
            raise ParameterError("the two-leader design needs n_o >= 2")
        if np.any(h < 0):
            raise ParameterError("h entries must be non-negative")
        if self.T < 1:
            raise ParameterError("T must be >= 1")
        object.__setattr__(self, "h", h)


def gen_hub_params(spec: SparseBetaSpec) -> HubParams:
    """Sparse network with uniform weight on the first ``n_o`` nodes.

    Each pair involving at least one leader is linked with probability ``p``,
    with strength drawn from ``Beta(alpha, beta)``; all other pairs are 0.
    """
    n, n_o = spec.n, spec.n_o
    rng = stream(spec.seed, _PARAMS)
    linked = rng.random((n, n)) < spec.p
    strength = rng.beta(spec.alpha, spec.beta, size=(n, n))
    upper = np.triu(np.where(linked, strength, 0.0), 1)
    A = upper + upper.T
    return HubParams.with_conventions(uniform_leaders(n, n_o), A)


def _check_T(T: int) -> None:
    if T < 1:
        raise ParameterError("T must be >= 1")


def gen_groups(params: HubParams, T: int, seed: int, return_centers: bool = False):
    """Draw ``T`` independent groups: a center from ``rho``, then each node
    ``j`` with probability ``A[center, j]``. The center is always a member.
    """
    _check_T(T)
    n = params.n
    centers = stream(seed, _CENTER).choice(n, size=T, p=params.rho)
    u = stream(seed, _MEMBER).random((T, n))
    G = (u < params.A[centers]).astype(np.float64)
    G[np.arange(T), centers] = 1.0
    data = GroupedData(G)
    return (data, centers) if return_centers else data


def theta_from_params(params: HubParams, n_o: Optional[int] = None) -> NDArray[np.float64]:
    """Leader-row logits ``logit(A)`` with ``A`` clamped to [0.01, 0.99] first."""
    if n_o is None:
        n_o = params.n_o
    lo, hi = THETA_CLAMP
    return logit(np.clip(params.A[:n_o], lo, hi))


def gen_time_varying(spec: TimeVaryingSpec, return_segments: bool = False):
    """Groups with Markov dependence inside segments.

    Group 1 always starts a segment and each later group starts one with
    probability ``q``. A segment start draws its leader uniformly from the
    ``n_o`` leaders and members with ``logistic(theta)``. Inside a segment
    the leader persists; previous members stay with ``logistic(theta +
    gamma_b)`` and outsiders join with ``logistic(theta + gamma_c)``.

    The center and membership streams are shared with :func:`gen_groups`, so
    ``q = 1`` reproduces it exactly for ``A = logistic(theta)``.
    """
    theta = spec.theta
    n_o, n = theta.shape
    T = spec.T
    A = expit(theta)
    B = expit(theta + spec.gamma_b)
    C = expit(theta + spec.gamma_c)
    rho = uniform_leaders(n, n_o)
    centers = stream(spec.seed, _CENTER).choice(n, size=T, p=rho)
    u = stream(spec.seed, _MEMBER).random((T, n))
    starts = stream(spec.seed, _SEGMENT).random(T) < spec.q
    starts[0] = True

    G = np.zeros((T, n))
    leader = -1
    for t in range(T):
        if starts[t]:
            leader = centers[t]
            row = u[t] < A[leader]
        else:
            prev = G[t - 1] == 1.0
            row = np.where(prev, u[t] < B[leader], u[t] < C[leader])
        G[t] = row
        G[t, leader] = 1.0
    data = GroupedData(G)
    return (data, starts) if return_segments else data


def random_attraction(n: int, n_o: int, seed: int) -> NDArray[np.float64]:
    """``h`` with i.i.d. U(0, 1) entries, shape (n_o, n)."""
    return stream(seed, _PARAMS).random((n_o, n))


def gen_two_leader(spec: TwoLeaderSpec, return_leaders: bool = False):
    """Groups led jointly by two distinct leaders drawn without replacement.

    Node ``k`` joins with probability ``logistic(h[i, k] + h[j, k] + c)``;
    both leaders are always members.
    """
    h = spec.h
    n_o, n = h.shape
    T = spec.T
    rng = stream(spec.seed, _LEADERS)
    # argsort of uniforms gives a uniform random ordering per row
    pairs = np.argsort(rng.random((T, n_o)), axis=1)[:, :2]
    prob = expit(h[pairs[:, 0]] + h[pairs[:, 1]] + spec.c)
    G = (stream(spec.seed, _MEMBER).random((T, n)) < prob).astype(np.float64)
    idx = np.arange(T)
    G[idx, pairs[:, 0]] = 1.0
    G[idx, pairs[:, 1]] = 1.0
    data = GroupedData(G)
    return (data, pairs) if return_leaders else data
