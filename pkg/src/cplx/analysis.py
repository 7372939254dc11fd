"""Dataset statistics and error-slice mining over per-sample feature columns.

A slice is a conjunction of one or two closed feature ranges where
misclassifications concentrate. Slices are scored by

    rank = harmonic mean of error precision and error recall

where precision is (errors inside)/(rows inside) and recall is
(errors inside)/(errors total). The harmonic mean rewards both a high error
concentration and coverage of the overall error mass, so a tiny pure slice
and a huge dilute one both rank below a slice that captures most errors with
little else. rank is 1 exactly when a slice holds all errors and nothing but
errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dataset import EmbeddedDataset
from .errors import UndefinedEntropy, ValidationError
from .geometry import GeometryModel
from .scoring import DistanceKind, baseline_accuracy

MAX_UNIQUE_1D = 2048  # above this, 1-D scan candidates are quantile-compressed
DEFAULT_GRID = 32
DEFAULT_MAX_SLICES = 20


def default_min_support(n_rows: int) -> int:
    return max(10, n_rows // 100)


def normalized_entropy(class_counts: Mapping[str, int]) -> float:
    """Entropy of the class distribution divided by log of the class count.

    1.0 means perfectly balanced; the uniform case returns exactly 1.0 (the
    closed form, not the rounded float sum).
    """
    counts = list(class_counts.values())
    if any((not isinstance(c, (int, np.integer))) or c <= 0 for c in counts):
        raise ValidationError("class counts must be positive integers")
    k = len(counts)
    if k < 2:
        raise UndefinedEntropy("entropy normalization needs at least 2 classes (log 1 = 0)")
    if len(set(counts)) == 1:
        return 1.0
    n = sum(counts)
    p = np.asarray(counts, dtype=np.float64) / n
    return float(-(p * np.log(p)).sum()) / math.log(k)


@dataclass(frozen=True)
class DatasetStats:
    num_classes: int
    num_samples: int
    normalized_entropy: float
    median_class_size: int
    baseline_accuracy: float
    class_counts: dict[str, int]


def median_class_size(class_counts: Mapping[str, int]) -> int:
    """Lower median of the class sizes (the smaller middle value when even)."""
    sizes = sorted(class_counts.values())
    if not sizes:
        raise ValidationError("no classes")
    return int(sizes[(len(sizes) - 1) // 2])


def dataset_stats(
    dataset: EmbeddedDataset, model: GeometryModel, kind: DistanceKind | str
) -> DatasetStats:
    counts = dataset.class_counts()
    return DatasetStats(
        num_classes=len(counts),
        num_samples=dataset.n,
        normalized_entropy=normalized_entropy(counts),
        median_class_size=median_class_size(counts),
        baseline_accuracy=baseline_accuracy(dataset, model, kind),
        class_counts=counts,
    )


@dataclass(frozen=True)
class AnalysisTable:
    """Row-per-sample table that slice mining runs on.

    ``features`` holds finite float columns: per-kind complexity, external
    confidence when available, raw coordinates for 2-D data. ``is_error`` is
    derived from the labels, never stored independently.
    """

    ids: tuple[str, ...]
    true_labels: tuple[str, ...]
    predicted_labels: tuple[str, ...]
    features: dict[str, np.ndarray]
    is_error: np.ndarray = field(init=False)

    def __post_init__(self):
        n = len(self.ids)
        if not (len(self.true_labels) == len(self.predicted_labels) == n):
            raise ValidationError("table column lengths disagree")
        feats = {}
        for name, col in self.features.items():
            a = np.asarray(col, dtype=np.float64)
            if a.shape != (n,):
                raise ValidationError(f"feature {name!r} has shape {a.shape}, expected ({n},)")
            if not np.isfinite(a).all():
                raise ValidationError(f"feature {name!r} contains non-finite values")
            a = a.copy()
            a.setflags(write=False)
            feats[name] = a
        object.__setattr__(self, "features", feats)
        err = np.asarray(
            [p != t for p, t in zip(self.predicted_labels, self.true_labels)], dtype=bool
        )
        err.setflags(write=False)
        object.__setattr__(self, "is_error", err)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def n_errors(self) -> int:
        return int(self.is_error.sum())

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(self.features)


@dataclass(frozen=True)
class Slice:
    """One or two closed feature ranges with their error statistics."""

    features: tuple[str, ...]
    ranges: tuple[tuple[float, float], ...]
    support: int
    n_errors: int
    slice_accuracy: float
    error_precision: float
    error_recall: float
    rank: float

    def membership(self, table: AnalysisTable) -> np.ndarray:
        mask = np.ones(table.n, dtype=bool)
        for name, (lo, hi) in zip(self.features, self.ranges):
            col = table.features[name]
            mask &= (col >= lo) & (col <= hi)
        return mask

    def contains(self, other: "Slice") -> bool:
        if self.features != other.features:
            return False
        return all(
            lo_s <= lo_o and hi_o <= hi_s
            for (lo_s, hi_s), (lo_o, hi_o) in zip(self.ranges, other.ranges)
        )


def slice_rank(n_errors_in: int, support: int, n_errors_total: int) -> float:
    """Harmonic mean of error precision and error recall."""
    if support <= 0 or n_errors_total <= 0 or n_errors_in <= 0:
        return 0.0
    p = n_errors_in / support
    r = n_errors_in / n_errors_total
    return 2.0 * p * r / (p + r)


def make_slice(
    table: AnalysisTable,
    features: Sequence[str],
    ranges: Sequence[tuple[float, float]],
) -> Slice:
    """Build a Slice by measuring the given ranges against the table."""
    for name in features:
        if name not in table.features:
            raise ValidationError(f"unknown feature {name!r}")
    if len(features) != len(ranges) or len(features) not in (1, 2):
        raise ValidationError("a slice takes 1 or 2 features with matching ranges")
    probe = Slice(
        features=tuple(features),
        ranges=tuple((float(lo), float(hi)) for lo, hi in ranges),
        support=0,
        n_errors=0,
        slice_accuracy=1.0,
        error_precision=0.0,
        error_recall=0.0,
        rank=0.0,
    )
    mask = probe.membership(table)
    support = int(mask.sum())
    errs = int(table.is_error[mask].sum())
    total = table.n_errors
    return Slice(
        features=probe.features,
        ranges=probe.ranges,
        support=support,
        n_errors=errs,
        slice_accuracy=1.0 - errs / support if support else 1.0,
        error_precision=errs / support if support else 0.0,
        error_recall=errs / total if total else 0.0,
        rank=slice_rank(errs, support, total),
    )


def _compress_groups(values: np.ndarray, errors: np.ndarray, max_groups: int):
    """Aggregate rows into value-ordered groups, same value always same group.

    Returns (lo, hi, count, err) arrays per group, value-sorted. Groups are
    the unique values themselves when there are at most ``max_groups`` of
    them, otherwise unique values are merged into ~max_groups quantile bins
    by row mass.
    """
    uvals, inv, counts = np.unique(values, return_inverse=True, return_counts=True)
    errs = np.bincount(inv, weights=errors.astype(np.float64), minlength=len(uvals))
    if len(uvals) <= max_groups:
        return uvals, uvals, counts.astype(np.int64), errs.astype(np.int64)
    # merge by cumulative row mass so each bin holds ~n/max_groups rows
    cum_before = np.concatenate([[0], np.cumsum(counts)[:-1]])
    bin_of = np.minimum((cum_before * max_groups) // counts.sum(), max_groups - 1)
    n_bins = int(bin_of.max()) + 1
    lo = np.full(n_bins, np.inf)
    hi = np.full(n_bins, -np.inf)
    np.minimum.at(lo, bin_of, uvals)
    np.maximum.at(hi, bin_of, uvals)
    cnt = np.bincount(bin_of, weights=counts, minlength=n_bins).astype(np.int64)
    err = np.bincount(bin_of, weights=errs, minlength=n_bins).astype(np.int64)
    keep = cnt > 0
    return lo[keep], hi[keep], cnt[keep], err[keep]


def _non_dominated(candidates: list[Slice], max_slices: int) -> list[Slice]:
    """Greedy filter: drop any slice contained in an already kept slice.

    Candidates must arrive best-first, so every kept slice has rank >= that
    of anything it contains later in the stream.
    """
    kept: list[Slice] = []
    for cand in candidates:
        if any(k.contains(cand) for k in kept):
            continue
        kept.append(cand)
        if len(kept) >= max_slices:
            break
    return kept


def _sort_candidates(slices: list[Slice]) -> list[Slice]:
    return sorted(slices, key=lambda s: (-s.rank, -s.support, s.ranges))


def find_slices_1d(
    table: AnalysisTable,
    feature: str,
    min_support: int,
    max_slices: int = DEFAULT_MAX_SLICES,
) -> list[Slice]:
    """Exhaustive scan of contiguous value intervals of one feature.

    Every interval between two (possibly compressed) observed values is a
    candidate; candidates need ``min_support`` rows and at least one error.
    The result keeps only non-dominated slices, best rank first: no returned
    slice lies inside another returned slice of greater or equal rank.
    """
    if feature not in table.features:
        raise ValidationError(f"unknown feature {feature!r}")
    if min_support < 1:
        raise ValidationError("min_support must be >= 1")
    if table.n_errors == 0 or table.n < min_support:
        return []
    lo, hi, cnt, err = _compress_groups(
        table.features[feature], table.is_error, MAX_UNIQUE_1D
    )
    u = len(lo)
    csum = np.concatenate([[0], np.cumsum(cnt)])
    esum = np.concatenate([[0], np.cumsum(err)])
    # support/error counts of every interval [i, j] of groups
    sup = csum[None, 1:] - csum[:-1, None]  # [i, j] = csum[j+1] - csum[i]
    ein = esum[None, 1:] - esum[:-1, None]
    valid = np.triu(np.ones((u, u), dtype=bool))
    valid &= (sup >= min_support) & (ein >= 1)
    ii, jj = np.nonzero(valid)
    total = table.n_errors
    candidates = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        support = int(sup[i, j])
        errs = int(ein[i, j])
        candidates.append(
            Slice(
                features=(feature,),
                ranges=((float(lo[i]), float(hi[j])),),
                support=support,
                n_errors=errs,
                slice_accuracy=1.0 - errs / support,
                error_precision=errs / support,
                error_recall=errs / total,
                rank=slice_rank(errs, support, total),
            )
        )
    return _non_dominated(_sort_candidates(candidates), max_slices)


def _quantile_bins(values: np.ndarray, grid: int) -> tuple[np.ndarray, int]:
    """Assign each row to one of <= grid quantile bins; equal values share a bin."""
    edges = np.quantile(values, np.linspace(0.0, 1.0, grid + 1)[1:-1])
    edges = np.unique(edges)
    bins = np.searchsorted(edges, values, side="right")
    return bins, int(bins.max()) + 1


def find_slices_2d(
    table: AnalysisTable,
    features: tuple[str, str],
    min_support: int,
    grid: int = DEFAULT_GRID,
    max_slices: int = DEFAULT_MAX_SLICES,
) -> list[Slice]:
    """Exhaustive search of axis-aligned rectangles over quantile-binned features.

    Both features are split into at most ``grid`` quantile bins; every
    rectangle of bins is scored through 2-D prefix sums. Filtering and
    ordering match the 1-D scan.
    """
    f1, f2 = features
    for name in (f1, f2):
        if name not in table.features:
            raise ValidationError(f"unknown feature {name!r}")
    if grid < 4:
        raise ValidationError("grid must be >= 4")
    if min_support < 1:
        raise ValidationError("min_support must be >= 1")
    if table.n_errors == 0 or table.n < min_support:
        return []
    v1, v2 = table.features[f1], table.features[f2]
    b1, g1 = _quantile_bins(v1, grid)
    b2, g2 = _quantile_bins(v2, grid)

    cnt = np.zeros((g1, g2), dtype=np.int64)
    err = np.zeros((g1, g2), dtype=np.int64)
    np.add.at(cnt, (b1, b2), 1)
    np.add.at(err, (b1, b2), table.is_error.astype(np.int64))
    csum = np.zeros((g1 + 1, g2 + 1), dtype=np.int64)
    esum = np.zeros((g1 + 1, g2 + 1), dtype=np.int64)
    csum[1:, 1:] = cnt.cumsum(axis=0).cumsum(axis=1)
    esum[1:, 1:] = err.cumsum(axis=0).cumsum(axis=1)

    # actual value bounds of each bin along each axis (for exact membership)
    def bin_bounds(values, bins, g):
        lo = np.full(g, np.inf)
        hi = np.full(g, -np.inf)
        np.minimum.at(lo, bins, values)
        np.maximum.at(hi, bins, values)
        return lo, hi

    # per-bin data extremes; empty bins stay infinite and vanish behind the
    # support filter
    lo1, hi1 = bin_bounds(v1, b1, g1)
    lo2, hi2 = bin_bounds(v2, b2, g2)

    total = table.n_errors
    candidates = []
    for i1 in range(g1):
        for j1 in range(i1, g1):
            # vectorize over all (i2, j2) pairs for this row span
            block_c = csum[j1 + 1, 1:] - csum[i1, 1:]  # cumulative along axis 2
            base_c = csum[j1 + 1, :-1] - csum[i1, :-1]
            block_e = esum[j1 + 1, 1:] - esum[i1, 1:]
            base_e = esum[j1 + 1, :-1] - esum[i1, :-1]
            sup2 = block_c[None, :] - base_c[:, None]  # [i2, j2]
            ein2 = block_e[None, :] - base_e[:, None]
            ok = np.triu(np.ones((g2, g2), dtype=bool))
            ok &= (sup2 >= min_support) & (ein2 >= 1)
            r1 = (float(lo1[i1:j1 + 1].min()), float(hi1[i1:j1 + 1].max()))
            for i2, j2 in zip(*np.nonzero(ok)):
                support = int(sup2[i2, j2])
                errs = int(ein2[i2, j2])
                r2 = (float(lo2[i2:j2 + 1].min()), float(hi2[i2:j2 + 1].max()))
                candidates.append(
                    Slice(
                        features=(f1, f2),
                        ranges=(r1, r2),
                        support=support,
                        n_errors=errs,
                        slice_accuracy=1.0 - errs / support,
                        error_precision=errs / support,
                        error_recall=errs / total,
                        rank=slice_rank(errs, support, total),
                    )
                )
    return _non_dominated(_sort_candidates(candidates), max_slices)


def rank_slices(slices: Sequence[Slice]) -> list[Slice]:
    """Descending by rank; ties by support (larger first), then feature name, then range."""
    return sorted(
        slices,
        key=lambda s: (-s.rank, -s.support, ",".join(s.features), s.ranges),
    )
