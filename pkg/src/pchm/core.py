"""Domain types and the pure numerical kernels of the (penalized) hub model.

A hub model explains each observed group by a single latent center ``i``
drawn from the mixing vector ``rho``; the center then includes every node
``j`` independently with probability ``A[i, j]``. The penalized variant
replaces ``rho_i`` by ``rho_i ** eta`` with ``eta >= 1`` in the mixture sum,
which drives small mixing weights to zero.

All products over nodes are accumulated as sums of logs. Bernoulli terms
follow the convention ``0 ** 0 == 1``, so exact zeros and ones in ``A`` are
legal; a contradicted exact term removes that center from the group's
mixture instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateMassError, DimensionError, ParameterError, ValidationError

NEG_INF = float("-inf")
SIMPLEX_TOL = 1e-9


def _frozen(arr: NDArray) -> NDArray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GroupedData:
    """A T x n group-by-individual matrix.

    Row ``t`` marks which nodes were observed together in group ``t``.

    Attributes:
        groups: binary float array of shape (T, n).
        node_labels: optional display names, one per column.
    """

    groups: NDArray[np.float64]
    node_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        g = np.array(self.groups, dtype=np.float64, copy=True)
        if g.ndim != 2:
            raise DimensionError(f"groups must be a 2-D matrix, got {g.ndim} dimensions")
        T, n = g.shape
        if T < 1 or n < 2:
            raise ValidationError(f"need at least 1 group and 2 nodes, got T={T}, n={n}")
        bad = np.argwhere((g != 0.0) & (g != 1.0))
        if bad.size:
            t, i = bad[0]
            raise ValidationError(f"entry ({t}, {i}) is {g[t, i]!r}, expected 0 or 1")
        empty = np.flatnonzero(g.sum(axis=1) == 0)
        if empty.size:
            raise ValidationError(f"group {empty[0]} is empty")
        object.__setattr__(self, "groups", _frozen(g))
        if self.node_labels is not None:
            labels = tuple(str(s) for s in self.node_labels)
            if len(labels) != n:
                raise DimensionError(f"{len(labels)} labels for {n} nodes")
            object.__setattr__(self, "node_labels", labels)

    @property
    def T(self) -> int:
        return self.groups.shape[0]

    @property
    def n(self) -> int:
        return self.groups.shape[1]

    @property
    def labels(self) -> tuple[str, ...]:
        """Node labels, defaulting to ``v1 .. vn``."""
        if self.node_labels is not None:
            return self.node_labels
        return tuple(f"v{i + 1}" for i in range(self.n))

    def __eq__(self, other):
        if not isinstance(other, GroupedData):
            return NotImplemented
        return self.node_labels == other.node_labels and np.array_equal(self.groups, other.groups)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class HubParams:
    """Mixing vector ``rho`` and symmetric adjacency matrix ``A``.

    Structural conventions: ``A[i, i] == 1`` for every leader (``rho_i > 0``)
    and ``A[i, j] == 0`` whenever neither ``i`` nor ``j`` is a leader. Use
    :meth:`with_conventions` to build a valid instance from raw arrays.
    """

    rho: NDArray[np.float64]
    A: NDArray[np.float64]

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.float64, copy=True)
        A = np.array(self.A, dtype=np.float64, copy=True)
        if rho.ndim != 1 or A.shape != (rho.size, rho.size):
            raise DimensionError(f"rho has shape {rho.shape} but A has shape {A.shape}")
        if np.any(rho < 0) or np.any(rho > 1) or not np.all(np.isfinite(rho)):
            raise ValidationError("rho entries must lie in [0, 1]")
        if abs(rho.sum() - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"rho sums to {rho.sum():.12g}, expected 1")
        if not np.all((A >= 0) & (A <= 1)):
            raise ValidationError("A entries must lie in [0, 1]")
        if not np.array_equal(A, A.T):
            raise ValidationError("A must be exactly symmetric")
        leaders = rho > 0
        if not np.all(np.diag(A)[leaders] == 1.0):
            raise ValidationError("A[i, i] must be 1 for every node with rho_i > 0")
        if np.any(A[np.ix_(~leaders, ~leaders)] != 0.0):
            raise ValidationError("A[i, j] must be 0 when rho_i = rho_j = 0")
        object.__setattr__(self, "rho", _frozen(rho))
        object.__setattr__(self, "A", _frozen(A))

    @classmethod
    def with_conventions(cls, rho: ArrayLike, A: ArrayLike) -> "HubParams":
        """Apply the leader-diagonal and zero-block conventions, then validate."""
        rho = np.asarray(rho, dtype=np.float64)
        A = np.array(A, dtype=np.float64, copy=True)
        return cls(rho, apply_conventions(rho, A))

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def leaders(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.rho > 0)

    @property
    def n_o(self) -> int:
        return int(np.count_nonzero(self.rho > 0))

    def permuted(self, order: Sequence[int]) -> "HubParams":
        """Relabel nodes so that new node ``k`` is old node ``order[k]``."""
        order = np.asarray(order)
        return HubParams(self.rho[order], self.A[np.ix_(order, order)])


@dataclass(frozen=True, eq=False)
class Posterior:
    """T x n responsibilities of each node for being the center of each group."""

    resp: NDArray[np.float64]

    def __post_init__(self):
        r = np.array(self.resp, dtype=np.float64, copy=True)
        if r.ndim != 2:
            raise DimensionError("resp must be a 2-D matrix")
        if np.any(r < 0) or np.any(r > 1):
            raise ValidationError("responsibilities must lie in [0, 1]")
        if np.any(np.abs(r.sum(axis=1) - 1.0) > SIMPLEX_TOL):
            raise ValidationError("every row of resp must sum to 1")
        object.__setattr__(self, "resp", _frozen(r))

    @property
    def T(self) -> int:
        return self.resp.shape[0]


def apply_conventions(rho: NDArray, A: NDArray) -> NDArray:
    """Return a copy of ``A`` with leader diagonals set to 1 and the non-leader block zeroed."""
    A = np.array(A, dtype=np.float64, copy=True)
    leaders = np.asarray(rho) > 0
    A[np.ix_(~leaders, ~leaders)] = 0.0
    idx = np.flatnonzero(leaders)
    A[idx, idx] = 1.0
    return A


def _check_dims(data: GroupedData, params: HubParams) -> None:
    if data.n != params.n:
        raise DimensionError(f"data has {data.n} nodes but params have {params.n}")


def component_loglik(G: NDArray, A: NDArray, rows: NDArray) -> NDArray:
    """Log-probability of every group under each candidate center in ``rows``.

    Returns a (T, len(rows)) matrix whose entry ``[t, k]`` is
    ``log(G_i * prod_j A_ij^G_j (1 - A_ij)^(1 - G_j))`` for ``i = rows[k]``,
    with ``-inf`` where that product is zero.
    """
    Ar = A[rows]
    with np.errstate(divide="ignore"):
        log_a = np.log(Ar)
        log_1ma = np.log1p(-Ar)
    zero = Ar == 0.0
    one = Ar == 1.0
    log_a[zero] = 0.0
    log_1ma[one] = 0.0
    # the center's own term is carried by the explicit G_i factor below
    k = np.arange(rows.size)
    for m in (log_a, log_1ma, zero, one):
        m[k, rows] = 0
    out = G @ (log_a - log_1ma).T + log_1ma.sum(axis=1)
    if zero.any() or one.any():
        # counts of members with A=0 plus non-members with A=1, as one product
        impossible = G @ (zero.astype(np.float64) - one).T + one.sum(axis=1)
        out[impossible > 0] = NEG_INF
    out[G[:, rows] == 0.0] = NEG_INF
    return out


def weighted_terms(G: NDArray, rho: NDArray, A: NDArray, eta: float) -> tuple[NDArray, NDArray]:
    """Leader indices and the (T, n_o) matrix of ``eta*log(rho_i) + log component``."""
    rows = np.flatnonzero(rho > 0)
    terms = component_loglik(G, A, rows) + eta * np.log(rho[rows])
    return rows, terms


def row_log_sum(terms: NDArray) -> NDArray:
    """Max-shifted log-sum-exp along rows; rows of all ``-inf`` give ``-inf``."""
    if terms.shape[1] == 0:
        return np.full(terms.shape[0], NEG_INF)
    m = terms.max(axis=1)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(terms - safe[:, None]).sum(axis=1))


def _total(per_group: NDArray) -> float:
    if np.any(per_group == NEG_INF):
        return NEG_INF
    return float(per_group.sum())


def hm_log_likelihood(data: GroupedData, params: HubParams) -> float:
    """Hub-model log-likelihood; ``NEG_INF`` if some group has probability zero."""
    return pchm_objective(data, params, 1.0)


def pchm_objective(data: GroupedData, params: HubParams, eta: float) -> float:
    """Log of the penalized likelihood, with every ``rho_i`` raised to ``eta``.

    At ``eta == 1`` this is exactly :func:`hm_log_likelihood`.
    """
    if not eta >= 1.0:
        raise ParameterError(f"eta must be >= 1, got {eta}")
    _check_dims(data, params)
    _, terms = weighted_terms(data.groups, params.rho, params.A, eta)
    return _total(row_log_sum(terms))


def responsibilities(terms: NDArray, rows: NDArray, n: int) -> NDArray:
    """Normalize weighted log terms into a full (T, n) responsibility matrix."""
    m = terms.max(axis=1) if terms.shape[1] else np.full(terms.shape[0], NEG_INF)
    bad = np.flatnonzero(~np.isfinite(m))
    if bad.size:
        raise DegenerateMassError(int(bad[0]))
    w = np.exp(terms - m[:, None])
    w /= w.sum(axis=1, keepdims=True)
    resp = np.zeros((terms.shape[0], n))
    resp[:, rows] = w
    return resp


def e_step(data: GroupedData, params: HubParams, eta: float) -> Posterior:
    """Pseudo-posterior probability that each member is the center of each group."""
    if not eta >= 1.0:
        raise ParameterError(f"eta must be >= 1, got {eta}")
    _check_dims(data, params)
    rows, terms = weighted_terms(data.groups, params.rho, params.A, eta)
    return Posterior(responsibilities(terms, rows, data.n))


def m_step_rho(post: Posterior) -> NDArray[np.float64]:
    """Column means of the responsibilities."""
    return post.resp.mean(axis=0)


def update_A(G: NDArray, resp: NDArray) -> NDArray:
    """Array-level adjacency update; see :func:`m_step_A`."""
    S = resp.T @ G
    num = S + S.T
    mass = resp.sum(axis=0)
    den = mass[:, None] + mass[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        A = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    np.clip(A, 0.0, 1.0, out=A)
    pos = np.flatnonzero(mass > 0)
    A[pos, pos] = 1.0
    return A


def m_step_A(data: GroupedData, post: Posterior) -> NDArray[np.float64]:
    """Symmetric adjacency update from the responsibilities.

    ``A[x, y] = (sum_t G_y r_tx + sum_t G_x r_ty) / sum_t (r_tx + r_ty)``, and 0
    when neither node carries responsibility mass. The diagonal is exactly 1
    for every node with positive mass.
    """
    if post.resp.shape != data.groups.shape:
        raise DimensionError(f"resp shape {post.resp.shape} != data shape {data.groups.shape}")
    return update_A(data.groups, post.resp)
