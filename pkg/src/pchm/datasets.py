"""Small reference datasets used in examples and tests."""

from __future__ import annotations

import numpy as np

from .core import GroupedData, HubParams

BIRTHDAY_LABELS = ("Allison", "Drew", "Eliot", "Keith", "Ross", "Sarah")

_BIRTHDAY = [
    [1, 0, 0, 0, 1, 1],
    [0, 1, 1, 0, 1, 1],
    [1, 0, 1, 1, 1, 0],
]

# (pattern, frequency) for the 20-group toy example with two true leaders
_TOY_PATTERNS = [
    ("1000000", 1),
    ("1001000", 1),
    ("1100001", 1),
    ("1101000", 1),
    ("0111100", 2),
    ("1101001", 3),
    ("1101010", 1),
    ("1111000", 1),
    ("1101110", 1),
    ("1110110", 1),
    ("1111010", 5),
    ("1111100", 1),
    ("1111110", 1),
]

_TOY_LEADER_ROWS = np.array(
    [
        [1.0000, 0.7854, 0.0000, 0.9063, 0.0000, 0.0000, 0.7452],
        [0.7854, 1.0000, 0.8324, 0.8817, 0.5885, 0.8594, 0.0000],
    ]
)


def birthday_parties() -> GroupedData:
    """Three parties attended by six children."""
    return GroupedData(np.array(_BIRTHDAY, dtype=float), BIRTHDAY_LABELS)


def toy_groups() -> GroupedData:
    """The 20 observed groups over 7 nodes of the sparse toy example."""
    rows = [[int(c) for c in pat] for pat, freq in _TOY_PATTERNS for _ in range(freq)]
    return GroupedData(np.array(rows, dtype=float))


def toy_truth() -> HubParams:
    """Generating parameters of the toy example: leaders 1 and 2 with weight 1/2 each."""
    n = _TOY_LEADER_ROWS.shape[1]
    A = np.zeros((n, n))
    A[:2] = _TOY_LEADER_ROWS
    A[:, :2] = _TOY_LEADER_ROWS.T
    rho = np.zeros(n)
    rho[:2] = 0.5
    return HubParams.with_conventions(rho, A)
