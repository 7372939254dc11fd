"""Distances to class geometries, per-sample complexity, OOD score, baseline classifier.

The complexity of a sample (x, y) is the negative log of the softmax, over
classes, of the negated distances, evaluated at the true class:

    h(x, y) = d(x, y) + log sum_c exp(-d(x, c))

computed with a max-shifted log-sum-exp so it stays finite for distances up
to at least 1e6. exp(-h(x, c)) over all classes c always sums to 1, and the
class minimizing the distance also minimizes h, which makes the induced
nearest-geometry classifier and its negative log-likelihood consistent.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .dataset import EmbeddedDataset
from .errors import (
    DegenerateVector,
    DimensionMismatch,
    EmptyDataset,
    NumericalError,
    UnknownClass,
    ValidationError,
)
from .geometry import ClassGeometry, GeometryModel

# quadratic forms more negative than this are a real numerical failure,
# anything between -QUAD_TOL and 0 is rounding noise and clamps to 0
QUAD_TOL = 1e-8


class DistanceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"
    MAHALANOBIS_COV = "mahalanobis_cov"
    MAHALANOBIS_CORR = "mahalanobis_corr"

    def __str__(self) -> str:  # click and format strings read better this way
        return self.value


ALL_KINDS = tuple(DistanceKind)

# analysis-table column name per distance kind
FEATURE_COLUMNS = {
    DistanceKind.EUCLIDEAN: "compl_euc",
    DistanceKind.COSINE: "compl_cos",
    DistanceKind.MAHALANOBIS_COV: "compl_mah",
    DistanceKind.MAHALANOBIS_CORR: "compl_mah_corr",
}


def normalize_kinds(kinds: Iterable[DistanceKind | str] | None) -> tuple[DistanceKind, ...]:
    """Canonical ordering (enum declaration order), deduplicated."""
    if kinds is None:
        return ALL_KINDS
    wanted = {DistanceKind(k) for k in kinds}
    if not wanted:
        raise ValidationError("at least one distance kind is required")
    return tuple(k for k in ALL_KINDS if k in wanted)


def _distances_to_class(
    x: np.ndarray, geom: ClassGeometry, kind: DistanceKind, literal_cosine: bool = False
) -> np.ndarray:
    """Distance from each row of (n, d) x to one class geometry."""
    diff = x - geom.centroid
    if kind is DistanceKind.EUCLIDEAN:
        return np.linalg.norm(diff, axis=1)
    if kind is DistanceKind.COSINE:
        mu_norm = float(np.linalg.norm(geom.centroid))
        x_norm = np.linalg.norm(x, axis=1)
        if mu_norm == 0.0:
            raise DegenerateVector(f"class {geom.label!r} has a zero-norm centroid")
        if (x_norm == 0.0).any():
            raise DegenerateVector("cosine distance is undefined for a zero-norm sample")
        sim = (x @ geom.centroid) / (x_norm * mu_norm)
        # literal mode feeds the raw similarity through (reproduction aid);
        # default converts to a distance so that larger means farther
        return sim if literal_cosine else 1.0 - sim
    if kind is DistanceKind.MAHALANOBIS_COV:
        prec = geom.precision_cov
    else:
        prec = geom.precision_corr
    if prec is None:
        raise ValidationError(f"model was fitted without Mahalanobis support ({kind})")
    q = np.einsum("ij,jk,ik->i", diff, prec, diff)
    if (q < -QUAD_TOL).any():
        raise NumericalError(
            f"negative quadratic form {q.min():.3e} under {kind}; precision matrix is broken"
        )
    return np.sqrt(np.clip(q, 0.0, None))


def distance(
    x, geometry: ClassGeometry, kind: DistanceKind | str, literal_cosine: bool = False
) -> float:
    """Distance from one sample to one class geometry."""
    kind = DistanceKind(kind)
    xv = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if xv.shape[1] != geometry.d:
        raise DimensionMismatch(f"sample has dimension {xv.shape[1]}, geometry {geometry.d}")
    return float(_distances_to_class(xv, geometry, kind, literal_cosine)[0])


def distance_matrix(
    x, model: GeometryModel, kind: DistanceKind | str, literal_cosine: bool = False
) -> np.ndarray:
    """(n, k) distances from each row of x to each class, in model class order."""
    kind = DistanceKind(kind)
    xv = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if xv.shape[1] != model.d:
        raise DimensionMismatch(f"samples have dimension {xv.shape[1]}, model {model.d}")
    cols = [
        _distances_to_class(xv, model.geometry(label), kind, literal_cosine)
        for label in model.classes
    ]
    return np.column_stack(cols)


def complexity_from_distances(distances, own_index: int) -> float | np.ndarray:
    """Stable h = d_own + log sum_c exp(-d_c) from a raw distance vector or matrix.

    ``distances`` is (k,) or (n, k); ``own_index`` is the column of the true
    class (scalar, or an (n,) index array for the matrix form).
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim == 1:
        return float(complexity_from_distances(d[None, :], np.asarray([own_index]))[0])
    m = d.min(axis=1)
    lse = np.log(np.exp(m[:, None] - d).sum(axis=1))
    rows = np.arange(d.shape[0])
    h = d[rows, np.asarray(own_index)] - m + lse
    # the sum includes the own class, so h >= 0 up to rounding
    return np.clip(h, 0.0, None)


def _require_class(model: GeometryModel, label: str) -> int:
    try:
        return model.classes.index(label)
    except ValueError:
        raise UnknownClass(f"label {label!r} is not a fitted class of this model") from None


def complexity(x, y: str, model: GeometryModel, kind: DistanceKind | str) -> float:
    """h(x, y): difficulty of assigning sample x to its class y under one metric."""
    if len(model.classes) < 2:
        raise ValidationError("complexity needs at least 2 fitted classes")
    j = _require_class(model, y)
    d = distance_matrix(x, model, kind)
    return float(complexity_from_distances(d[0], j))


def ood_score(x, model: GeometryModel) -> float:
    """Label-independent confidence: max over classes of the negated Mahalanobis distance.

    Near 0 for in-distribution points, strongly negative far from every class.
    """
    d = distance_matrix(x, model, DistanceKind.MAHALANOBIS_COV)
    return float(-d.min())


def _lex_order(labels: Sequence[str]) -> np.ndarray:
    return np.asarray(sorted(range(len(labels)), key=lambda i: labels[i]), dtype=np.intp)


def _predict_indices(dmat: np.ndarray, classes: Sequence[str]) -> np.ndarray:
    """Argmin class per row, breaking exact ties lexicographically by label."""
    order = _lex_order(classes)
    j = np.argmin(dmat[:, order], axis=1)  # argmin takes the first of equals
    return order[j]


def baseline_predict(x, model: GeometryModel, kind: DistanceKind | str) -> tuple[str, float]:
    """Nearest-geometry prediction and its negative log-likelihood."""
    d = distance_matrix(x, model, kind)
    j = int(_predict_indices(d, model.classes)[0])
    nll = float(complexity_from_distances(d[0], j))
    return model.classes[j], nll


def baseline_accuracy(
    dataset: EmbeddedDataset, model: GeometryModel, kind: DistanceKind | str
) -> float:
    """Fraction of samples whose nearest-geometry prediction matches the label."""
    if dataset.n == 0:
        raise EmptyDataset("cannot compute accuracy on an empty dataset")
    for label in dataset.classes:
        _require_class(model, label)
    d = distance_matrix(dataset.vectors, model, kind)
    pred = _predict_indices(d, model.classes)
    truth = np.asarray([model.classes.index(l) for l in dataset.labels], dtype=np.intp)
    return float((pred == truth).mean())


@dataclass(frozen=True)
class ComplexityRecord:
    """Everything scored for one sample.

    distances maps kind -> class label -> distance; complexity and
    baseline_nll map kind -> h at the true and at the predicted label;
    ood_score is None when the model carries no Mahalanobis support.
    """

    id: str
    true_label: str
    distances: dict[str, dict[str, float]]
    complexity: dict[str, float]
    baseline_prediction: dict[str, str]
    baseline_nll: dict[str, float]
    ood_score: float | None

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(self.complexity)


def score_dataset(
    score_set: EmbeddedDataset,
    model: GeometryModel,
    kinds: Iterable[DistanceKind | str] | None = None,
) -> list[ComplexityRecord]:
    """Score every sample of score_set against a fitted model, order preserved.

    The score set may be the fit set itself (train use-case) or held-out data
    (test use-case); only the complexity-at-true-label field depends on the
    score set's labels. Scoring never mutates the model, so concurrent calls
    against the same model are safe.
    """
    if score_set.d != model.d:
        raise DimensionMismatch(f"dataset dimension {score_set.d} != model dimension {model.d}")
    if len(model.classes) < 2:
        raise ValidationError("scoring needs at least 2 fitted classes")
    use = normalize_kinds(kinds)
    if not model.has_mahalanobis and (
        DistanceKind.MAHALANOBIS_COV in use or DistanceKind.MAHALANOBIS_CORR in use
    ):
        raise ValidationError("model was fitted without Mahalanobis support")
    for label in score_set.classes:
        _require_class(model, label)

    classes = model.classes
    truth = np.asarray([classes.index(l) for l in score_set.labels], dtype=np.intp)
    dmats = {kind: distance_matrix(score_set.vectors, model, kind) for kind in use}
    h_true = {kind: complexity_from_distances(dmats[kind], truth) for kind in use}
    pred_idx = {kind: _predict_indices(dmats[kind], classes) for kind in use}
    h_pred = {kind: complexity_from_distances(dmats[kind], pred_idx[kind]) for kind in use}
    if model.has_mahalanobis:
        if DistanceKind.MAHALANOBIS_COV in use:
            d_mah = dmats[DistanceKind.MAHALANOBIS_COV]
        else:
            d_mah = distance_matrix(score_set.vectors, model, DistanceKind.MAHALANOBIS_COV)
        ood = -d_mah.min(axis=1)
    else:
        ood = None

    records = []
    for i, (sample_id, true_label) in enumerate(zip(score_set.ids, score_set.labels)):
        records.append(
            ComplexityRecord(
                id=sample_id,
                true_label=true_label,
                distances={
                    kind.value: {c: float(dmats[kind][i, j]) for j, c in enumerate(classes)}
                    for kind in use
                },
                complexity={kind.value: float(h_true[kind][i]) for kind in use},
                baseline_prediction={kind.value: classes[int(pred_idx[kind][i])] for kind in use},
                baseline_nll={kind.value: float(h_pred[kind][i]) for kind in use},
                ood_score=float(ood[i]) if ood is not None else None,
            )
        )
    return records
