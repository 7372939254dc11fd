"""Per-class geometric summaries: centroids, covariances, correlations, precisions.

Estimation follows the class-conditional Gaussian view: each class gets a
centroid and a covariance estimate; the covariance feeds two precision
matrices (one for the covariance itself, one for its Pearson correlation)
that back the two Mahalanobis distance variants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import EmbeddedDataset
from .errors import (
    EmptyClass,
    InsufficientSamples,
    SingularMatrix,
    ValidationError,
)

# Condition number above which a matrix is treated as not directly invertible.
CONDITION_THRESHOLD = 1e12

SHRINKAGE_MODES = ("none", "ledoit_wolf", "ridge")
PRECISION_FALLBACKS = ("pseudo_inverse", "ridge")


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def centroid(samples_of_class) -> np.ndarray:
    """Arithmetic mean of the rows of an (n, d) sample block."""
    a = np.asarray(samples_of_class, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError(f"expected an (n, d) block, got shape {a.shape}")
    if a.shape[0] == 0:
        raise EmptyClass("cannot take the centroid of an empty class")
    return a.mean(axis=0)


def covariance_mle(samples_of_class, unbiased: bool = False) -> np.ndarray:
    """Empirical covariance with 1/n normalization (1/(n-1) when ``unbiased``).

    The biased 1/n form is the default on purpose; the unbiased variant is
    exposed only for comparison runs.
    """
    a = np.asarray(samples_of_class, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError(f"expected an (n, d) block, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        raise EmptyClass("cannot estimate covariance of an empty class")
    if unbiased and n < 2:
        raise InsufficientSamples("unbiased covariance needs at least 2 samples")
    resid = a - a.mean(axis=0)
    denom = n - 1 if unbiased else n
    return _symmetrize(resid.T @ resid / denom)


def correlation_matrix(covariance) -> np.ndarray:
    """Pearson correlation matrix R[i,j] = cov[i,j] / sqrt(cov[i,i]*cov[j,j]).

    Dimensions with zero variance get 1 on the diagonal and 0 off-diagonal so
    that constant embedding dimensions never propagate NaNs and R stays
    invertible after regularization.
    """
    c = np.asarray(covariance, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError(f"covariance must be square, got shape {c.shape}")
    sd = np.sqrt(np.clip(np.diag(c), 0.0, None))
    live = sd > 0.0
    r = np.zeros_like(c)
    if live.any():
        denom = np.outer(sd[live], sd[live])
        r[np.ix_(live, live)] = c[np.ix_(live, live)] / denom
    np.fill_diagonal(r, 1.0)
    return _symmetrize(r)


def shrink_ledoit_wolf(samples_of_class) -> tuple[np.ndarray, float]:
    """Ledoit-Wolf shrinkage of the 1/n covariance toward (tr/d) * I.

    Returns the shrunk covariance and the estimated mixing coefficient,
    clamped to [0, 1]. Output is positive definite whenever the coefficient
    is nonzero and the trace is positive.
    """
    x = np.asarray(samples_of_class, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError(f"expected an (n, d) block, got shape {x.shape}")
    n, d = x.shape
    if n < 2:
        raise InsufficientSamples("Ledoit-Wolf shrinkage needs at least 2 samples")
    xc = x - x.mean(axis=0)
    emp = _symmetrize(xc.T @ xc / n)
    mu = float(np.trace(emp)) / d
    # dispersion of the empirical estimate around the spherical target
    delta = float(((emp - mu * np.eye(d)) ** 2).sum()) / d
    x2 = xc ** 2
    beta = (float((x2.T @ x2).sum()) / n - float((emp ** 2).sum())) / (n * d)
    if delta <= 0.0:
        alpha = 0.0
    else:
        alpha = min(1.0, max(0.0, min(beta, delta) / delta))
    shrunk = (1.0 - alpha) * emp + alpha * mu * np.eye(d)
    return _symmetrize(shrunk), alpha


def precision(matrix, mode: str = "direct", ridge_epsilon: float = 1e-6) -> np.ndarray:
    """Regularized inverse of a symmetric matrix.

    Well-conditioned matrices (condition number below ``CONDITION_THRESHOLD``)
    are inverted directly regardless of mode. Beyond that: ``direct`` raises
    SingularMatrix, ``pseudo_inverse`` falls back to the Moore-Penrose
    pseudo-inverse, ``ridge`` inverts matrix + ridge_epsilon * I.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"precision needs a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=1e-8, atol=1e-12):
        raise ValidationError("precision needs a symmetric matrix")
    cond = np.linalg.cond(m)
    if np.isfinite(cond) and cond < CONDITION_THRESHOLD:
        return _symmetrize(np.linalg.inv(m))
    if mode == "direct":
        raise SingularMatrix(f"matrix is singular or ill-conditioned (cond={cond:.3e})")
    if mode == "pseudo_inverse":
        return _symmetrize(np.linalg.pinv(m, hermitian=True))
    if mode == "ridge":
        return _symmetrize(np.linalg.inv(m + ridge_epsilon * np.eye(m.shape[0])))
    raise ValidationError(f"unknown precision mode {mode!r}")


@dataclass(frozen=True)
class GeometryConfig:
    """Estimation knobs for fit().

    shrinkage: "none" (raw 1/n covariance), "ledoit_wolf" (default), or
        "ridge" (adds ridge_epsilon * tr/d on the diagonal).
    ridge_epsilon: relative ridge strength, scaled by tr/d of the matrix it
        regularizes.
    pooled: share a single covariance across classes (classic pooled
        within-class scatter) instead of one per class.
    unbiased: use 1/(n-1) instead of 1/n for the raw covariance; ignored on
        the ledoit_wolf path, whose estimator is defined on the 1/n form.
    mahalanobis: compute precision matrices; turn off to fit a centroid-only
        model for euclidean/cosine scoring.
    precision_fallback: what precision() does with ill-conditioned matrices.
    """

    shrinkage: str = "ledoit_wolf"
    ridge_epsilon: float = 1e-6
    pooled: bool = False
    unbiased: bool = False
    mahalanobis: bool = True
    precision_fallback: str = "ridge"

    def __post_init__(self):
        if self.shrinkage not in SHRINKAGE_MODES:
            raise ValidationError(f"shrinkage must be one of {SHRINKAGE_MODES}, got {self.shrinkage!r}")
        if self.precision_fallback not in PRECISION_FALLBACKS:
            raise ValidationError(
                f"precision_fallback must be one of {PRECISION_FALLBACKS}, got {self.precision_fallback!r}"
            )
        if not (self.ridge_epsilon > 0):
            raise ValidationError("ridge_epsilon must be positive")

    def to_dict(self) -> dict:
        return {
            "shrinkage": self.shrinkage,
            "ridge_epsilon": self.ridge_epsilon,
            "pooled": self.pooled,
            "unbiased": self.unbiased,
            "mahalanobis": self.mahalanobis,
            "precision_fallback": self.precision_fallback,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeometryConfig":
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass(frozen=True)
class ClassGeometry:
    """Fitted summary of one class: centroid, covariance, correlation, precisions."""

    label: str
    count: int
    centroid: np.ndarray
    covariance: np.ndarray
    correlation: np.ndarray
    precision_cov: np.ndarray | None
    precision_corr: np.ndarray | None
    shrinkage_used: str

    def __post_init__(self):
        for name in ("centroid", "covariance", "correlation", "precision_cov", "precision_corr"):
            a = getattr(self, name)
            if a is not None:
                a = np.asarray(a, dtype=np.float64)
                a.setflags(write=False)
                object.__setattr__(self, name, a)

    @property
    def d(self) -> int:
        return self.centroid.shape[0]


@dataclass(frozen=True)
class GeometryModel:
    """Immutable map of class label to fitted ClassGeometry.

    Safe to share across threads once constructed; nothing mutates after fit.
    """

    geometries: dict[str, ClassGeometry]
    d: int
    config: GeometryConfig

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(self.geometries)

    @property
    def has_mahalanobis(self) -> bool:
        return all(g.precision_cov is not None for g in self.geometries.values())

    def geometry(self, label: str) -> ClassGeometry:
        return self.geometries[label]


def _ridge_scale(matrix: np.ndarray) -> float:
    # tr/d of the matrix, falling back to 1 for an all-zero matrix
    tr = float(np.trace(matrix))
    d = matrix.shape[0]
    return tr / d if tr > 0 else 1.0


def _derive_geometry(
    label: str,
    count: int,
    mu: np.ndarray,
    cov: np.ndarray,
    shrinkage_used: str,
    config: GeometryConfig,
) -> ClassGeometry:
    """Build a ClassGeometry from a final covariance, applying the ridge chain.

    When the covariance is meant to back Mahalanobis distances and fails a
    Cholesky factorization, a small relative ridge is added first; precisions
    are then computed with the configured fallback. This routine is the single
    source of truth for deriving correlation and precisions, so models
    reloaded from disk reproduce fitted models exactly.
    """
    cov = _symmetrize(np.asarray(cov, dtype=np.float64))
    prec_cov = prec_corr = None
    if config.mahalanobis:
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            eps = config.ridge_epsilon * _ridge_scale(cov)
            cov = _symmetrize(cov + eps * np.eye(cov.shape[0]))
            shrinkage_used = (
                f"ridge({eps:g})" if shrinkage_used == "none" else f"{shrinkage_used}+ridge({eps:g})"
            )
    corr = correlation_matrix(cov)
    if config.mahalanobis:
        prec_cov = precision(
            cov, mode=config.precision_fallback, ridge_epsilon=config.ridge_epsilon * _ridge_scale(cov)
        )
        prec_corr = precision(corr, mode=config.precision_fallback, ridge_epsilon=config.ridge_epsilon)
    return ClassGeometry(
        label=label,
        count=count,
        centroid=np.asarray(mu, dtype=np.float64),
        covariance=cov,
        correlation=corr,
        precision_cov=prec_cov,
        precision_corr=prec_corr,
        shrinkage_used=shrinkage_used,
    )


def fit(dataset: EmbeddedDataset, config: GeometryConfig | None = None) -> GeometryModel:
    """Estimate one ClassGeometry per class of the dataset.

    Deterministic given dataset order and config. Classes are independent, so
    the result does not depend on their relative sizes beyond each class's own
    samples (plus the shared covariance when ``pooled`` is set).
    """
    cfg = config or GeometryConfig()
    if len(dataset.classes) < 2:
        raise ValidationError("classification geometry needs at least 2 classes")

    blocks = {label: dataset.vectors_of(label) for label in dataset.classes}
    for label, block in blocks.items():
        if block.shape[0] == 0:
            raise EmptyClass(f"class {label!r} has no samples")
        if cfg.mahalanobis and not cfg.pooled and block.shape[0] < 2:
            if cfg.shrinkage != "ridge":
                raise InsufficientSamples(
                    f"class {label!r} has a single sample; Mahalanobis needs >= 2 "
                    "samples per class, pooled covariance, or ridge shrinkage"
                )

    centroids = {label: centroid(block) for label, block in blocks.items()}

    def estimate(block: np.ndarray) -> tuple[np.ndarray, str]:
        if cfg.shrinkage == "ledoit_wolf":
            cov, _alpha = shrink_ledoit_wolf(block)
            return cov, "ledoit_wolf"
        cov = covariance_mle(block, unbiased=cfg.unbiased)
        if cfg.shrinkage == "ridge":
            eps = cfg.ridge_epsilon * _ridge_scale(cov)
            return cov + eps * np.eye(cov.shape[0]), f"ridge({eps:g})"
        return cov, "none"

    if cfg.pooled:
        # pooled within-class scatter: one shared covariance over the stacked residuals
        resid = np.vstack([blocks[label] - centroids[label] for label in dataset.classes])
        pooled = estimate(resid)
        per_class = {label: pooled for label in dataset.classes}
    else:
        per_class = {label: estimate(blocks[label]) for label in dataset.classes}

    geometries = {}
    for label in dataset.classes:
        cov, tag = per_class[label]
        geometries[label] = _derive_geometry(
            label, blocks[label].shape[0], centroids[label], cov, tag, cfg
        )
    return GeometryModel(geometries=geometries, d=dataset.d, config=cfg)


def model_from_parameters(
    classes: list[tuple[str, np.ndarray, np.ndarray, int]],
    config: GeometryConfig | None = None,
) -> GeometryModel:
    """Build a GeometryModel from explicit (label, mean, covariance, count) tuples.

    No estimation happens: the given covariance is taken as final. Useful for
    evaluating complexity under exact generating parameters instead of fitted
    ones, and for reloading persisted models.
    """
    cfg = config or GeometryConfig()
    if len(classes) < 2:
        raise ValidationError("a model needs at least 2 classes")
    dims = {np.asarray(mu).shape[0] for _, mu, _, _ in classes}
    if len(dims) != 1:
        raise ValidationError(f"class means disagree on dimension: {sorted(dims)}")
    d = dims.pop()
    geometries = {}
    for label, mu, cov, count in classes:
        if label in geometries:
            raise ValidationError(f"duplicate class label {label!r}")
        geometries[label] = _derive_geometry(label, count, mu, cov, "none", cfg)
    return GeometryModel(geometries=geometries, d=d, config=cfg)
