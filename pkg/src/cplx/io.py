"""File formats, prediction ingestion, splitting, and report emission.

Formats (all documented bit-exactly in the README):
  dataset CSV     header ``id,label,e0,...,e{d-1}``, UTF-8, one row per sample
  dataset binary  magic ``CPLX1``, little-endian u32 N and d, length-prefixed
                  id and label tables, float32 row-major matrix
  predictions CSV header ``id,predicted_label[,confidence]``
  records CSV     per-sample complexity scores, one column block per metric
  report          JSON document or a stats/records/slices CSV bundle
  heatmap CSV     long format ``x,y,value``

Report serialization writes every float with 17 significant digits, which
round-trips IEEE doubles exactly, so identical runs emit identical bytes.
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import AnalysisTable, DatasetStats, Slice
from .dataset import EmbeddedDataset
from .errors import (
    JoinError,
    ParseError,
    StratificationError,
    ValidationError,
)
from .geometry import ClassGeometry, GeometryConfig, GeometryModel, _derive_geometry
from .scoring import ALL_KINDS, ComplexityRecord, DistanceKind, FEATURE_COLUMNS
from .synth import HeatmapGrid

REPORT_VERSION = "cplx-report/1"
MODEL_VERSION = "cplx-model/1"
BINARY_MAGIC = b"CPLX1"

# short column suffix per metric, shared by records.csv and the report bundle
KIND_SUFFIX = {
    DistanceKind.EUCLIDEAN: "euc",
    DistanceKind.COSINE: "cos",
    DistanceKind.MAHALANOBIS_COV: "mah",
    DistanceKind.MAHALANOBIS_CORR: "mah_corr",
}


def fmt_float(x: float) -> str:
    """17 significant digits: enough to reproduce the exact double on re-read."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# dataset CSV


def read_dataset(path) -> EmbeddedDataset:
    """Strict reader for the dataset CSV format; every defect names its line."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file, expected a header row") from None
        if len(header) < 3 or header[0] != "id" or header[1] != "label":
            raise ParseError(path, 1, f"malformed header {header!r}, expected id,label,e0,...")
        d = len(header) - 2
        expected = [f"e{i}" for i in range(d)]
        if header[2:] != expected:
            raise ParseError(
                path, 1, f"malformed header: embedding columns must be e0..e{d - 1}, got {header[2:]!r}"
            )
        ids: list[str] = []
        labels: list[str] = []
        rows: list[list[float]] = []
        seen: set[str] = set()
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != d + 2:
                raise ParseError(path, line, f"ragged row: {len(row)} fields, expected {d + 2}")
            sample_id, label = row[0], row[1]
            if sample_id in seen:
                raise ParseError(path, line, f"duplicate id {sample_id!r}")
            seen.add(sample_id)
            values = []
            for col, token in zip(expected, row[2:]):
                try:
                    v = float(token)
                except ValueError:
                    raise ParseError(path, line, f"column {col}: {token!r} is not a number") from None
                if not np.isfinite(v):
                    raise ParseError(path, line, f"column {col}: non-finite value {token!r}")
                values.append(v)
            ids.append(sample_id)
            labels.append(label)
            rows.append(values)
    vectors = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, d))
    return EmbeddedDataset(tuple(ids), tuple(labels), vectors)


def write_dataset(dataset: EmbeddedDataset, path) -> Path:
    """Canonical CSV writer; repr floats guarantee an exact re-read."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"] + [f"e{i}" for i in range(dataset.d)])
        for sample_id, label, vec in dataset.samples():
            writer.writerow([sample_id, label] + [repr(float(v)) for v in vec])
    return path


# ---------------------------------------------------------------------------
# dataset binary (CPLX1)


def write_dataset_binary(dataset: EmbeddedDataset, path) -> Path:
    """Compact float32 container for large corpora; CSV stays canonical."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<II", dataset.n, dataset.d))
        for table in (dataset.ids, dataset.labels):
            for text in table:
                raw = text.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
        fh.write(np.ascontiguousarray(dataset.vectors, dtype="<f4").tobytes())
    return path


def read_dataset_binary(path) -> EmbeddedDataset:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:5] != BINARY_MAGIC:
        raise ParseError(path, 0, f"bad magic {blob[:5]!r}, expected {BINARY_MAGIC!r}")
    try:
        n, d = struct.unpack_from("<II", blob, 5)
        offset = 13

        def read_table(count, offset):
            out = []
            for _ in range(count):
                (length,) = struct.unpack_from("<I", blob, offset)
                offset += 4
                out.append(blob[offset:offset + length].decode("utf-8"))
                offset += length
            return out, offset

        ids, offset = read_table(n, offset)
        labels, offset = read_table(n, offset)
        need = n * d * 4
        if len(blob) - offset != need:
            raise ParseError(path, 0, f"matrix payload is {len(blob) - offset} bytes, expected {need}")
        vectors = np.frombuffer(blob, dtype="<f4", count=n * d, offset=offset)
    except struct.error as exc:
        raise ParseError(path, 0, f"truncated file: {exc}") from None
    vectors = vectors.reshape(n, d).astype(np.float64)
    if not np.isfinite(vectors).all():
        raise ParseError(path, 0, "matrix contains non-finite values")
    return EmbeddedDataset(tuple(ids), tuple(labels), vectors)


# ---------------------------------------------------------------------------
# predictions


@dataclass(frozen=True)
class PredictionsFile:
    """External classifier output: id, predicted label, optional confidence."""

    ids: tuple[str, ...]
    predicted: tuple[str, ...]
    confidence: np.ndarray | None

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("predictions contain duplicate ids")
        if self.confidence is not None:
            c = np.asarray(self.confidence, dtype=np.float64)
            if c.shape != (len(self.ids),):
                raise ValidationError("confidence column length mismatch")
            if not np.isfinite(c).all() or (c < 0).any() or (c > 1).any():
                raise ValidationError("confidence values must be finite and within [0, 1]")
            c.setflags(write=False)
            object.__setattr__(self, "confidence", c)

    def label_of(self) -> dict[str, str]:
        return dict(zip(self.ids, self.predicted))

    def confidence_of(self) -> dict[str, float] | None:
        if self.confidence is None:
            return None
        return {i: float(c) for i, c in zip(self.ids, self.confidence)}


def read_predictions(path) -> PredictionsFile:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file, expected a header row") from None
        if header[:2] != ["id", "predicted_label"] or len(header) > 3 or (
            len(header) == 3 and header[2] != "confidence"
        ):
            raise ParseError(
                path, 1, f"malformed header {header!r}, expected id,predicted_label[,confidence]"
            )
        has_conf = len(header) == 3
        ids, predicted, conf = [], [], []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, line, f"ragged row: {len(row)} fields, expected {len(header)}")
            ids.append(row[0])
            predicted.append(row[1])
            if has_conf:
                try:
                    conf.append(float(row[2]))
                except ValueError:
                    raise ParseError(path, line, f"confidence {row[2]!r} is not a number") from None
    return PredictionsFile(
        ids=tuple(ids),
        predicted=tuple(predicted),
        confidence=np.asarray(conf) if has_conf else None,
    )


def write_predictions(predictions: PredictionsFile, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        has_conf = predictions.confidence is not None
        writer.writerow(["id", "predicted_label"] + (["confidence"] if has_conf else []))
        for i, (sample_id, label) in enumerate(zip(predictions.ids, predictions.predicted)):
            row = [sample_id, label]
            if has_conf:
                row.append(fmt_float(predictions.confidence[i]))
            writer.writerow(row)
    return path


# ---------------------------------------------------------------------------
# train/test split


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValidationError("train_fraction must lie strictly between 0 and 1")


def split(dataset: EmbeddedDataset, spec: SplitSpec) -> tuple[EmbeddedDataset, EmbeddedDataset]:
    """Deterministic random split; stratified keeps per-class ratios within one sample.

    Under stratification every class stays present in the train side; a class
    with a single sample cannot be stratified and raises StratificationError.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = dataset.n
    if n < 2:
        raise ValidationError("cannot split a dataset with fewer than 2 samples")
    train_idx: list[int] = []
    if spec.stratified:
        label_arr = np.asarray(dataset.labels)
        for label in dataset.classes:
            idx = np.nonzero(label_arr == label)[0]
            if len(idx) < 2:
                raise StratificationError(
                    f"class {label!r} has {len(idx)} sample(s); stratified split needs >= 2"
                )
            take = int(round(spec.train_fraction * len(idx)))
            take = min(max(take, 1), len(idx))
            perm = rng.permutation(len(idx))
            train_idx.extend(int(idx[p]) for p in perm[:take])
    else:
        take = int(round(spec.train_fraction * n))
        take = min(max(take, 1), n - 1)
        perm = rng.permutation(n)
        train_idx.extend(int(p) for p in perm[:take])
    train_set = set(train_idx)
    test_idx = [i for i in range(n) if i not in train_set]
    if not test_idx or not train_idx:
        raise ValidationError("split produced an empty side; adjust train_fraction")
    return dataset.subset(sorted(train_idx)), dataset.subset(test_idx)


# ---------------------------------------------------------------------------
# analysis table construction


def build_analysis_table(
    records: Sequence[ComplexityRecord],
    predictions: PredictionsFile | None = None,
    extra_features: Mapping[str, np.ndarray] | None = None,
    baseline_kind: DistanceKind | str = DistanceKind.MAHALANOBIS_COV,
) -> AnalysisTable:
    """Join scored records with optional external predictions into a flat table.

    The error flag comes from the external predictions when given, otherwise
    from the baseline prediction under ``baseline_kind``. Feature columns are
    the per-kind complexities, the external confidence when present, and any
    extra columns (typically raw coordinates). Prediction files may cover more
    ids than the records (for example the full corpus when only a test split
    was scored); every record id must be covered, though.
    """
    if not records:
        raise ValidationError("cannot build a table from zero records")
    baseline_kind = DistanceKind(baseline_kind)
    kinds = [k for k in ALL_KINDS if k.value in records[0].complexity]
    ids = tuple(r.id for r in records)
    true_labels = tuple(r.true_label for r in records)

    if predictions is not None:
        label_of = predictions.label_of()
        missing = [i for i in ids if i not in label_of]
        if missing:
            raise JoinError(
                f"{len(missing)} record id(s) absent from predictions: {missing[:10]}"
            )
        predicted = tuple(label_of[i] for i in ids)
    else:
        if baseline_kind.value not in records[0].baseline_prediction:
            raise ValidationError(
                f"records carry no {baseline_kind} baseline and no predictions were given"
            )
        predicted = tuple(r.baseline_prediction[baseline_kind.value] for r in records)

    features: dict[str, np.ndarray] = {}
    for kind in kinds:
        features[FEATURE_COLUMNS[kind]] = np.asarray(
            [r.complexity[kind.value] for r in records], dtype=np.float64
        )
    if predictions is not None and predictions.confidence is not None:
        conf_of = predictions.confidence_of()
        features["confidence"] = np.asarray([conf_of[i] for i in ids], dtype=np.float64)
    for name, col in (extra_features or {}).items():
        if name in features:
            raise ValidationError(f"extra feature {name!r} collides with a built-in column")
        features[name] = np.asarray(col, dtype=np.float64)

    return AnalysisTable(
        ids=ids, true_labels=true_labels, predicted_labels=predicted, features=features
    )


# ---------------------------------------------------------------------------
# stable JSON


def dumps_stable(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant digits."""
    parts: list[str] = []

    def emit(o, depth):
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if o is None:
            parts.append("null")
        elif isinstance(o, bool):
            parts.append("true" if o else "false")
        elif isinstance(o, (int, np.integer)):
            parts.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            if not np.isfinite(o):
                raise ValidationError("cannot serialize non-finite float")
            parts.append(fmt_float(o))
        elif isinstance(o, str):
            parts.append(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                parts.append("{}")
                return
            parts.append("{\n")
            for i, (k, v) in enumerate(o.items()):
                parts.append(pad_in + json.dumps(str(k), ensure_ascii=False) + ": ")
                emit(v, depth + 1)
                parts.append(",\n" if i < len(o) - 1 else "\n")
            parts.append(pad + "}")
        elif isinstance(o, (list, tuple)):
            seq = list(o)
            if not seq:
                parts.append("[]")
                return
            parts.append("[\n")
            for i, v in enumerate(seq):
                parts.append(pad_in)
                emit(v, depth + 1)
                parts.append(",\n" if i < len(seq) - 1 else "\n")
            parts.append(pad + "]")
        elif isinstance(o, np.ndarray):
            emit(o.tolist(), depth)
        else:
            raise ValidationError(f"cannot serialize {type(o).__name__} to stable JSON")

    emit(obj, 0)
    parts.append("\n")
    return "".join(parts)


# ---------------------------------------------------------------------------
# model persistence


def save_model(model: GeometryModel, path) -> Path:
    """Persist centroids and covariances; precisions are re-derived on load."""
    path = Path(path)
    doc = {
        "version": MODEL_VERSION,
        "d": model.d,
        "config": model.config.to_dict(),
        "classes": [
            {
                "label": g.label,
                "count": g.count,
                "shrinkage_used": g.shrinkage_used,
                "centroid": g.centroid,
                "covariance": g.covariance,
            }
            for g in model.geometries.values()
        ],
    }
    path.write_text(dumps_stable(doc), encoding="utf-8")
    return path


def load_model(path) -> GeometryModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if doc.get("version") != MODEL_VERSION:
        raise ParseError(path, 1, f"unsupported model version {doc.get('version')!r}")
    config = GeometryConfig.from_dict(doc["config"])
    geometries: dict[str, ClassGeometry] = {}
    for entry in doc["classes"]:
        geom = _derive_geometry(
            label=entry["label"],
            count=int(entry["count"]),
            mu=np.asarray(entry["centroid"], dtype=np.float64),
            cov=np.asarray(entry["covariance"], dtype=np.float64),
            shrinkage_used=entry["shrinkage_used"],
            config=config,
        )
        geometries[geom.label] = geom
    return GeometryModel(geometries=geometries, d=int(doc["d"]), config=config)


# ---------------------------------------------------------------------------
# records CSV


def _record_columns(kinds: Sequence[DistanceKind]) -> list[str]:
    cols = ["id", "true_label"]
    cols += [f"compl_{KIND_SUFFIX[k]}" for k in kinds]
    cols += [f"pred_{KIND_SUFFIX[k]}" for k in kinds]
    cols += [f"nll_{KIND_SUFFIX[k]}" for k in kinds]
    cols.append("ood_score")
    return cols


def write_records_csv(records: Sequence[ComplexityRecord], path) -> Path:
    """Flat per-sample scores; the per-class distance map only lives in the JSON report."""
    path = Path(path)
    if not records:
        raise ValidationError("no records to write")
    kinds = [k for k in ALL_KINDS if k.value in records[0].complexity]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_record_columns(kinds))
        for r in records:
            row = [r.id, r.true_label]
            row += [fmt_float(r.complexity[k.value]) for k in kinds]
            row += [r.baseline_prediction[k.value] for k in kinds]
            row += [fmt_float(r.baseline_nll[k.value]) for k in kinds]
            row.append("" if r.ood_score is None else fmt_float(r.ood_score))
            writer.writerow(row)
    return path


def read_records_csv(path) -> list[ComplexityRecord]:
    """Inverse of write_records_csv; the distances map is not recoverable and stays empty."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file, expected a header row") from None
        kinds = [k for k in ALL_KINDS if f"compl_{KIND_SUFFIX[k]}" in header]
        if not kinds or _record_columns(kinds) != header:
            raise ParseError(path, 1, f"malformed records header {header!r}")
        col = {name: i for i, name in enumerate(header)}
        records = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, line, f"ragged row: {len(row)} fields, expected {len(header)}")
            try:
                complexity = {k.value: float(row[col[f"compl_{KIND_SUFFIX[k]}"]]) for k in kinds}
                nll = {k.value: float(row[col[f"nll_{KIND_SUFFIX[k]}"]]) for k in kinds}
                ood_raw = row[col["ood_score"]]
                ood = None if ood_raw == "" else float(ood_raw)
            except ValueError as exc:
                raise ParseError(path, line, f"non-numeric value: {exc}") from None
            records.append(
                ComplexityRecord(
                    id=row[col["id"]],
                    true_label=row[col["true_label"]],
                    distances={},
                    complexity=complexity,
                    baseline_prediction={
                        k.value: row[col[f"pred_{KIND_SUFFIX[k]}"]] for k in kinds
                    },
                    baseline_nll=nll,
                    ood_score=ood,
                )
            )
    if not records:
        raise ParseError(path, 1, "records file has a header but no rows")
    return records


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class Report:
    """Bundle of everything one run produced, ready for serialization."""

    stats: DatasetStats
    records: list[ComplexityRecord]
    slices: list[Slice]
    config: dict
    version: str = REPORT_VERSION

    def __post_init__(self):
        if self.stats.num_samples != len(self.records):
            raise ValidationError(
                f"stats cover {self.stats.num_samples} samples but {len(self.records)} records given"
            )


def _slice_to_dict(s: Slice) -> dict:
    return {
        "features": list(s.features),
        "ranges": [[lo, hi] for lo, hi in s.ranges],
        "support": s.support,
        "n_errors": s.n_errors,
        "slice_accuracy": s.slice_accuracy,
        "error_precision": s.error_precision,
        "error_recall": s.error_recall,
        "rank": s.rank,
    }


def _record_to_dict(r: ComplexityRecord) -> dict:
    return {
        "id": r.id,
        "true_label": r.true_label,
        "complexity": dict(r.complexity),
        "baseline_prediction": dict(r.baseline_prediction),
        "baseline_nll": dict(r.baseline_nll),
        "ood_score": r.ood_score,
        "distances": {k: dict(v) for k, v in r.distances.items()},
    }


def report_to_dict(report: Report) -> dict:
    return {
        "version": report.version,
        "config": dict(report.config),
        "stats": {
            "num_classes": report.stats.num_classes,
            "num_samples": report.stats.num_samples,
            "normalized_entropy": report.stats.normalized_entropy,
            "median_class_size": report.stats.median_class_size,
            "baseline_accuracy": report.stats.baseline_accuracy,
            "class_counts": dict(report.stats.class_counts),
        },
        "records": [_record_to_dict(r) for r in report.records],
        "slices": [_slice_to_dict(s) for s in report.slices],
    }


def format_range(ranges: Sequence[tuple[float, float]]) -> str:
    return "; ".join(f"{fmt_float(lo)} ~ {fmt_float(hi)}" for lo, hi in ranges)


def write_slices_csv(slices: Sequence[Slice], path) -> Path:
    """Layout mirrors the result tables: feature(s), slice range, accuracy, size, rank."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["features", "slice", "slice_acc", "size", "rank", "error_precision", "error_recall"]
        )
        for s in slices:
            writer.writerow(
                [
                    ",".join(s.features),
                    format_range(s.ranges),
                    fmt_float(s.slice_accuracy),
                    s.support,
                    fmt_float(s.rank),
                    fmt_float(s.error_precision),
                    fmt_float(s.error_recall),
                ]
            )
    return path


def write_stats_csv(stats: DatasetStats, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["num_classes", "num_samples", "normalized_entropy", "median_class_size", "baseline_accuracy"]
        )
        writer.writerow(
            [
                stats.num_classes,
                stats.num_samples,
                fmt_float(stats.normalized_entropy),
                stats.median_class_size,
                fmt_float(stats.baseline_accuracy),
            ]
        )
    return path


def emit_report(report: Report, directory, format: str = "json") -> list[Path]:
    """Write the report as ``report.json`` or as a stats/records/slices CSV bundle."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if format == "json":
        out = directory / "report.json"
        out.write_text(dumps_stable(report_to_dict(report)), encoding="utf-8")
        return [out]
    if format == "csv_bundle":
        return [
            write_stats_csv(report.stats, directory / "stats.csv"),
            write_records_csv(report.records, directory / "records.csv"),
            write_slices_csv(report.slices, directory / "slices.csv"),
        ]
    raise ValidationError(f"unknown report format {format!r}; use json or csv_bundle")


def read_report(path) -> Report:
    """Load a JSON report back into the in-memory representation."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if doc.get("version") != REPORT_VERSION:
        raise ParseError(path, 1, f"unsupported report version {doc.get('version')!r}")
    st = doc["stats"]
    stats = DatasetStats(
        num_classes=int(st["num_classes"]),
        num_samples=int(st["num_samples"]),
        normalized_entropy=float(st["normalized_entropy"]),
        median_class_size=int(st["median_class_size"]),
        baseline_accuracy=float(st["baseline_accuracy"]),
        class_counts={k: int(v) for k, v in st["class_counts"].items()},
    )
    records = [
        ComplexityRecord(
            id=r["id"],
            true_label=r["true_label"],
            distances={k: {c: float(x) for c, x in v.items()} for k, v in r["distances"].items()},
            complexity={k: float(v) for k, v in r["complexity"].items()},
            baseline_prediction=dict(r["baseline_prediction"]),
            baseline_nll={k: float(v) for k, v in r["baseline_nll"].items()},
            ood_score=None if r["ood_score"] is None else float(r["ood_score"]),
        )
        for r in doc["records"]
    ]
    slices = [
        Slice(
            features=tuple(s["features"]),
            ranges=tuple((float(lo), float(hi)) for lo, hi in s["ranges"]),
            support=int(s["support"]),
            n_errors=int(s["n_errors"]),
            slice_accuracy=float(s["slice_accuracy"]),
            error_precision=float(s["error_precision"]),
            error_recall=float(s["error_recall"]),
            rank=float(s["rank"]),
        )
        for s in doc["slices"]
    ]
    return Report(
        stats=stats,
        records=records,
        slices=slices,
        config=dict(doc["config"]),
        version=doc["version"],
    )


# ---------------------------------------------------------------------------
# heatmap grid CSV


def write_heatmap_csv(grid: HeatmapGrid, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "value"])
        for x, y, v in grid.long_rows():
            writer.writerow([fmt_float(x), fmt_float(y), fmt_float(v)])
    return path
