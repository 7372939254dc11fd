"""Labeled embedding datasets: N samples, each an id, a class label and a d-dim vector."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class EmbeddedDataset:
    """Immutable collection of labeled embedding vectors.

    ``vectors`` is an (n, d) float64 array marked read-only after
    construction. ``classes`` preserves first-appearance order of labels,
    which downstream code relies on for deterministic output.
    """

    ids: tuple[str, ...]
    labels: tuple[str, ...]
    vectors: np.ndarray
    classes: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValidationError(f"vectors must be 2-D, got shape {vectors.shape}")
        n, d = vectors.shape
        if d < 1:
            raise ValidationError("embedding dimension must be >= 1")
        if not (len(self.ids) == len(self.labels) == n):
            raise ValidationError(
                f"ids ({len(self.ids)}), labels ({len(self.labels)}) and vectors ({n}) disagree"
            )
        if not np.isfinite(vectors).all():
            raise ValidationError("vectors contain non-finite values")
        if len(set(self.ids)) != len(self.ids):
            seen, dupes = set(), []
            for i in self.ids:
                if i in seen:
                    dupes.append(i)
                seen.add(i)
            raise ValidationError(f"duplicate sample ids: {sorted(set(dupes))[:10]}")
        vectors = vectors.copy()
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "classes", tuple(dict.fromkeys(self.labels)))

    @classmethod
    def from_samples(cls, samples: Iterable[tuple[str, str, Sequence[float]]]) -> "EmbeddedDataset":
        rows = list(samples)
        if not rows:
            raise ValidationError("cannot build a dataset from zero samples")
        ids = tuple(r[0] for r in rows)
        labels = tuple(r[1] for r in rows)
        vectors = np.asarray([r[2] for r in rows], dtype=np.float64)
        return cls(ids, labels, vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.n

    def samples(self) -> Iterator[tuple[str, str, np.ndarray]]:
        for i in range(self.n):
            yield self.ids[i], self.labels[i], self.vectors[i]

    def class_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in self.classes}
        for label in self.labels:
            counts[label] += 1
        return counts

    def vectors_of(self, label: str) -> np.ndarray:
        mask = np.fromiter((l == label for l in self.labels), dtype=bool, count=self.n)
        return self.vectors[mask]

    def subset(self, indices: Sequence[int]) -> "EmbeddedDataset":
        idx = list(indices)
        return EmbeddedDataset(
            ids=tuple(self.ids[i] for i in idx),
            labels=tuple(self.labels[i] for i in idx),
            vectors=self.vectors[idx],
        )
