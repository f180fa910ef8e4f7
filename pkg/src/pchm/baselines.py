"""Descriptive association matrices computed directly from grouped data."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .core import GroupedData


def co_occurrence(data: GroupedData) -> NDArray[np.float64]:
    """Relative frequency with which each pair of nodes shares a group, ``G'G / T``."""
    G = data.groups
    return (G.T @ G) / data.T


def half_weight_index(data: GroupedData) -> NDArray[np.float64]:
    """Half-weight association index.

    ``H[i, j] = 2 * joint(i, j) / (count(i) + count(j))`` off the diagonal.
    The diagonal is 1 for nodes seen at least once and 0 otherwise; pairs of
    never-seen nodes get 0.
    """
    G = data.groups
    joint = G.T @ G
    counts = G.sum(axis=0)
    den = counts[:, None] + counts[None, :]
    H = np.divide(2.0 * joint, den, out=np.zeros_like(joint), where=den > 0)
    np.fill_diagonal(H, (counts > 0).astype(np.float64))
    return H
