"""Grayscale adjacency plots: binary portable graymap and labeled SVG.

Darker cells mean stronger links. A cell with value ``v`` gets gray level
``floor((1 - v) * 255 + 0.5)``, so 1 is black, 0 is white and 0.5 is 128.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionError, ValidationError


def check_plot_matrix(M: NDArray) -> NDArray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"plot matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)) or M.min(initial=0.0) < 0.0 or M.max(initial=0.0) > 1.0:
        raise ValidationError("plot matrix values must lie in [0, 1]")
    return M


def gray_levels(M: NDArray) -> NDArray[np.uint8]:
    """Per-cell gray level, rounding halves up."""
    M = check_plot_matrix(M)
    return np.floor((1.0 - M) * 255.0 + 0.5).astype(np.uint8)


def rho_order(rho: NDArray) -> NDArray[np.intp]:
    """Node order by descending ``rho``, ties by original index."""
    rho = np.asarray(rho, dtype=np.float64)
    return np.lexsort((np.arange(rho.size), -rho))


def reorder(M: NDArray, order: Sequence[int]) -> NDArray:
    order = np.asarray(order)
    return M[np.ix_(order, order)]


def pgm_bytes(M: NDArray, cell: int = 1) -> bytes:
    """Binary (P5) graymap with every matrix cell drawn as a ``cell x cell`` block."""
    if cell < 1:
        raise ValidationError("cell size must be >= 1")
    levels = gray_levels(M)
    img = np.kron(levels, np.ones((cell, cell), dtype=np.uint8))
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def read_pgm(data: bytes) -> NDArray[np.uint8]:
    """Parse a P5 graymap as written by :func:`pgm_bytes` (no comments)."""
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise ValidationError("not a binary graymap")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def svg_text(M: NDArray, labels: Optional[Sequence[str]] = None, cell: int = 16) -> str:
    """Vector plot of the matrix with row labels on the left and column labels on top."""
    levels = gray_levels(M)
    n = levels.shape[0]
    if labels is None:
        labels = [f"v{i + 1}" for i in range(n)]
    if len(labels) != n:
        raise DimensionError(f"{len(labels)} labels for a {n}x{n} matrix")
    margin = 8 + 7 * max((len(s) for s in labels), default=1)
    size = margin + n * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="{math.ceil(cell * 0.7)}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i, lab in enumerate(labels):
        c = margin + i * cell + cell / 2
        lab = escape(lab)
        out.append(f'<text x="{margin - 4}" y="{c}" text-anchor="end" dominant-baseline="middle">{lab}</text>')
        out.append(
            f'<text x="{c}" y="{margin - 4}" transform="rotate(-90 {c} {margin - 4})" '
            f'dominant-baseline="middle">{lab}</text>'
        )
    for i in range(n):
        for j in range(n):
            g = int(levels[i, j])
            out.append(
                f'<rect x="{margin + j * cell}" y="{margin + i * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({g},{g},{g})" stroke="#cccccc" stroke-width="0.5"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path, M: NDArray, labels: Optional[Sequence[str]] = None, cell: int = 16) -> None:
    """Write a graymap for ``.pgm`` paths and an SVG for ``.svg`` paths."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        path.write_bytes(pgm_bytes(M, cell))
    elif suffix == ".svg":
        path.write_text(svg_text(M, labels, cell))
    else:
        raise ValidationError(f"unsupported plot format {suffix!r}; use .pgm or .svg")
