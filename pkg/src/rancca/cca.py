"""Canonical correlation analysis by SVD of the whitened cross-covariance.

With population covariances Sxx, Syy, Sxy of the standardized blocks,
the singular values of ``Sxx^-1/2 Sxy Syy^-1/2`` are the canonical
correlations and its singular vectors, mapped back through the inverse
square roots, are the canonical weight vectors. The resulting variates
U = X A and V = Y B have unit variance and are mutually uncorrelated
except within a pair.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateColumnError,
    ShapeError,
    SingularCovarianceError,
    UnderdeterminedError,
)
from .kpi import StandardizationRecord
from .pairing import PairedDataset

__all__ = [
    "CcaModel",
    "VariatePair",
    "fit",
    "transform",
    "transform_arrays",
    "canonical_correlation",
    "loadings",
    "pearson_matrix",
]

log = logging.getLogger(__name__)

SINGULAR_RCOND = 1e-10
DISCARD_RTOL = 1e-12


@dataclass(frozen=True)
class CcaModel:
    """Fitted canonical weights and correlations.

    ``x_weights`` is p x r and ``y_weights`` is q x r; column i holds the
    weights of the i-th canonical pair, in standardized-variable units.
    ``sign_anchors[i]`` is the X variable whose loading was forced positive.
    """

    x_weights: np.ndarray
    y_weights: np.ndarray
    rho: np.ndarray
    x_record: StandardizationRecord
    y_record: StandardizationRecord
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    ridge: float = 0.0
    sign_anchors: tuple[int, ...] = field(default_factory=tuple)
    n_discarded: int = 0

    def __post_init__(self):
        for name in ("x_weights", "y_weights", "rho"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def A(self) -> np.ndarray:
        return self.x_weights

    @property
    def B(self) -> np.ndarray:
        return self.y_weights

    @property
    def p(self) -> int:
        return self.x_weights.shape[0]

    @property
    def q(self) -> int:
        return self.y_weights.shape[0]

    @property
    def r(self) -> int:
        return len(self.rho)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "x_labels": list(self.x_labels),
            "y_labels": list(self.y_labels),
            "ridge": float(self.ridge),
            "rho": [float(v) for v in self.rho],
            "x_weights": self.x_weights.tolist(),
            "y_weights": self.y_weights.tolist(),
            "sign_anchors": [self.x_labels[i] for i in self.sign_anchors],
            "n_discarded": self.n_discarded,
            "x_standardization": self.x_record.to_dict(),
            "y_standardization": self.y_record.to_dict(),
        }


@dataclass(frozen=True)
class VariatePair:
    index: int
    u: np.ndarray
    v: np.ndarray
    rho: float


def _inv_sqrt(cov: np.ndarray, ridge: float, block: str) -> np.ndarray:
    k = cov.shape[0]
    augmented = cov + ridge * np.eye(k)
    w, vecs = np.linalg.eigh(augmented)
    top = w.max()
    if ridge == 0 and not w.min() > SINGULAR_RCOND * top:
        suggestion = float(max(top, 1.0) * 1e-6)
        raise SingularCovarianceError(
            f"covariance of block {block} is numerically singular "
            f"(eigenvalues {w.min():.3e} .. {top:.3e}); "
            f"retry with a ridge, e.g. ridge={suggestion:g}",
            block=block,
            suggested_ridge=suggestion,
        )
    w = np.maximum(w, ridge)
    return (vecs / np.sqrt(w)) @ vecs.T


def fit(data: PairedDataset, ridge: float = 0.0) -> CcaModel:
    """Fit all min(p, q) canonical pairs of a standardized dataset."""
    if not data.standardized:
        raise ValueError("fit requires a standardized PairedDataset")
    ridge = float(ridge)
    if not ridge >= 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    m, p, q = data.m, data.p, data.q
    if m <= max(p, q):
        raise UnderdeterminedError(
            f"{m} observations cannot support blocks of width p={p}, q={q}"
        )

    X = data.X - data.X.mean(axis=0)
    Y = data.Y - data.Y.mean(axis=0)
    sxx = X.T @ X / m
    syy = Y.T @ Y / m
    sxy = X.T @ Y / m

    wx = _inv_sqrt(sxx, ridge, "X")
    wy = _inv_sqrt(syy, ridge, "Y")
    left, s, right_t = np.linalg.svd(wx @ sxy @ wy, full_matrices=False)

    keep = s > DISCARD_RTOL * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    n_discarded = int((~keep).sum())
    if n_discarded:
        log.warning(
            "discarded %d canonical direction(s) with negligible correlation", n_discarded
        )
    A = wx @ left[:, keep]
    B = wy @ right_t.T[:, keep]
    rho = np.clip(s[keep], 0.0, 1.0)

    # joint sign flip: X variable with the largest |loading| gets a positive loading
    anchors = []
    if A.shape[1]:
        u_var = np.einsum("ji,jk,ki->i", A, sxx, A)
        within = (sxx @ A) / np.sqrt(np.outer(np.diag(sxx), u_var))
        for i in range(A.shape[1]):
            j = int(np.argmax(np.abs(within[:, i])))
            if within[j, i] < 0:
                A[:, i] *= -1
                B[:, i] *= -1
            anchors.append(j)

    return CcaModel(
        A,
        B,
        rho,
        data.x_record,
        data.y_record,
        data.x_labels,
        data.y_labels,
        ridge,
        tuple(anchors),
        n_discarded,
    )


def _same_record(a: StandardizationRecord, b: StandardizationRecord) -> bool:
    return a is b or (np.array_equal(a.mean, b.mean) and np.array_equal(a.std, b.std))


def _pairs(model: CcaModel, Xs: np.ndarray, Ys: np.ndarray) -> list[VariatePair]:
    U = Xs @ model.x_weights
    V = Ys @ model.y_weights
    return [
        VariatePair(i, U[:, i], V[:, i], float(model.rho[i])) for i in range(model.r)
    ]


def transform(model: CcaModel, data: PairedDataset) -> list[VariatePair]:
    """Canonical variate scores of a dataset, standardized with the model's statistics."""
    if data.p != model.p or data.q != model.q:
        raise ShapeError(
            f"dataset has p={data.p}, q={data.q}; model expects p={model.p}, q={model.q}"
        )
    Xs = data.X if _same_record(data.x_record, model.x_record) else model.x_record.apply(data.raw_x())
    Ys = data.Y if _same_record(data.y_record, model.y_record) else model.y_record.apply(data.raw_y())
    return _pairs(model, Xs, Ys)


def transform_arrays(model: CcaModel, X, Y) -> list[VariatePair]:
    """Like :func:`transform` but for raw (unstandardized) arrays."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != model.p or Y.shape[1] != model.q:
        raise ShapeError(
            f"expected (M, {model.p}) and (M, {model.q}) arrays, got {X.shape} and {Y.shape}"
        )
    if X.shape[0] != Y.shape[0] or X.shape[0] == 0:
        raise ShapeError(f"need matching nonzero row counts, got {X.shape[0]} and {Y.shape[0]}")
    return _pairs(model, model.x_record.apply(X), model.y_record.apply(Y))


def canonical_correlation(u, v) -> float:
    """Pearson correlation cov(u, v) / sqrt(var(u) var(v))."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch: {u.size} vs {v.size}")
    if u.size < 2:
        raise ShapeError("need at least two observations")
    uc = u - u.mean()
    vc = v - v.mean()
    nu = np.sqrt(uc @ uc)
    nv = np.sqrt(vc @ vc)
    if nu == 0 or nv == 0:
        raise DegenerateColumnError("correlation of a constant vector is undefined")
    return float(np.clip((uc @ vc) / (nu * nv), -1.0, 1.0))


def _corr_with(block: np.ndarray, vec: np.ndarray) -> np.ndarray:
    return np.array([canonical_correlation(block[:, j], vec) for j in range(block.shape[1])])


def loadings(
    model: CcaModel, data: PairedDataset, pair_index: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Correlations of the original variables with the i-th canonical variates.

    Returns ``(corr(X, U_i), corr(Y, V_i), corr(X, V_i), corr(Y, U_i))``:
    the two within-block loadings followed by the two cross-loadings.
    """
    if not 0 <= pair_index < model.r:
        raise IndexError(f"pair index {pair_index} out of range for r={model.r}")
    pair = transform(model, data)[pair_index]
    return (
        _corr_with(data.X, pair.u),
        _corr_with(data.Y, pair.v),
        _corr_with(data.X, pair.v),
        _corr_with(data.Y, pair.u),
    )


def pearson_matrix(columns: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Symmetric correlation matrix of the columns, with an exact unit diagonal."""
    mat = np.column_stack(columns) if not isinstance(columns, np.ndarray) else columns
    centered = mat - mat.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    if np.any(norms == 0):
        j = int(np.argmax(norms == 0))
        raise DegenerateColumnError(f"column {j} is constant", column=j)
    z = centered / norms
    corr = z.T @ z
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr
