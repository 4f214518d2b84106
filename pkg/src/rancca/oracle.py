"""Brute-force maximum correlation for two-column blocks.

Scans unit directions u = (cos t, sin t), v = (cos s, sin s) over a
regular angle grid and returns the largest |corr(X u, Y v)|. Only the
angles in [0, pi) are needed because flipping a direction flips the sign
of the correlation. No whitening or decomposition is involved, so this
serves as an independent check on the SVD solver.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

__all__ = ["grid_max_correlation"]


def _unit_scores(block: np.ndarray, angles: np.ndarray) -> np.ndarray:
    centered = block - block.mean(axis=0)
    directions = np.vstack([np.cos(angles), np.sin(angles)])  # 2 x n
    scores = centered @ directions
    norms = np.linalg.norm(scores, axis=0)
    return scores / norms


def grid_max_correlation(X, Y, grid_size: int = 2000) -> tuple[float, float, float]:
    """Return ``(max |corr|, best angle for X, best angle for Y)``."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != 2 or Y.shape[1] != 2:
        raise ShapeError(f"grid search needs two-column blocks, got {X.shape} and {Y.shape}")
    if X.shape[0] != Y.shape[0]:
        raise ShapeError("row mismatch")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")

    angles = np.arange(grid_size) * (np.pi / grid_size)
    corr = np.abs(_unit_scores(X, angles).T @ _unit_scores(Y, angles))
    i, j = np.unravel_index(int(np.argmax(corr)), corr.shape)
    return float(corr[i, j]), float(angles[i]), float(angles[j])
