"""Command-line surface: stats, fit, score, slices, synth, heatmap, report.

Exit codes: 0 success, 2 input validation failure, 3 numerical failure,
4 I/O failure.
"""
from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis, io, synth
from .analysis import default_min_support, find_slices_1d, find_slices_2d, rank_slices
from .dataset import EmbeddedDataset
from .errors import NumericalError, ValidationError
from .geometry import GeometryConfig, GeometryModel, SHRINKAGE_MODES, fit
from .scoring import DistanceKind, score_dataset

METRICS = [k.value for k in DistanceKind]


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except NumericalError as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(3)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(4)

    return wrapper


def metric_option(fn):
    return click.option(
        "--metric",
        type=click.Choice(METRICS),
        default=DistanceKind.MAHALANOBIS_COV.value,
        show_default=True,
        help="Distance kind driving baseline predictions and statistics.",
    )(fn)


def shrinkage_options(fn):
    fn = click.option(
        "--shrinkage",
        type=click.Choice(list(SHRINKAGE_MODES)),
        default="ledoit_wolf",
        show_default=True,
        help="Covariance regularization mode.",
    )(fn)
    fn = click.option(
        "--pooled/--per-class",
        default=False,
        show_default=True,
        help="Share one covariance across classes.",
    )(fn)
    return fn


def _read_dataset(path: str) -> EmbeddedDataset:
    if str(path).endswith(".cplx"):
        return io.read_dataset_binary(path)
    return io.read_dataset(path)


def _config(shrinkage: str, pooled: bool) -> GeometryConfig:
    return GeometryConfig(shrinkage=shrinkage, pooled=pooled)


def _coordinate_features(dataset: EmbeddedDataset) -> dict[str, np.ndarray]:
    if dataset.d != 2:
        return {}
    return {"x1": dataset.vectors[:, 0], "x2": dataset.vectors[:, 1]}


def _mine_slices(table, min_support: int | None, grid: int) -> list:
    support = min_support if min_support is not None else default_min_support(table.n)
    found = []
    for name in table.feature_names:
        found.extend(find_slices_1d(table, name, support))
    if "x1" in table.features and "x2" in table.features:
        found.extend(find_slices_2d(table, ("x1", "x2"), support, grid=grid))
    return rank_slices(found)


@click.group()
@click.version_option(package_name="cplx")
def main():
    """Quantify per-sample classification difficulty from class geometry."""


@main.command("synth")
@click.option("--preset", "preset_name", type=click.Choice(list(synth.PRESET_NAMES)), required=True)
@click.option("--seed", type=int, default=synth.DEFAULT_SEED, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True)
@guarded
def synth_cmd(preset_name, seed, output):
    """Generate a seeded synthetic 2-D Gaussian dataset."""
    dataset = synth.generate(synth.preset(preset_name), seed)
    if str(output).endswith(".cplx"):
        io.write_dataset_binary(dataset, output)
    else:
        io.write_dataset(dataset, output)
    click.echo(f"wrote {dataset.n} samples, {len(dataset.classes)} classes -> {output}")


@main.command("stats")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@metric_option
@shrinkage_options
@click.option("--output", type=click.Path(dir_okay=False), help="Write stats.csv here instead of stdout.")
@guarded
def stats_cmd(dataset_path, metric, shrinkage, pooled, output):
    """Class counts, normalized entropy, median class size, baseline accuracy."""
    dataset = _read_dataset(dataset_path)
    model = fit(dataset, _config(shrinkage, pooled))
    stats = analysis.dataset_stats(dataset, model, metric)
    if output:
        io.write_stats_csv(stats, output)
        click.echo(f"wrote {output}")
        return
    click.echo(f"classes:            {stats.num_classes}")
    click.echo(f"samples:            {stats.num_samples}")
    click.echo(f"normalized entropy: {stats.normalized_entropy:.4f}")
    click.echo(f"median class size:  {stats.median_class_size}")
    click.echo(f"baseline accuracy:  {stats.baseline_accuracy:.4f} ({metric})")


@main.command("fit")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@shrinkage_options
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Model JSON path.")
@guarded
def fit_cmd(dataset_path, shrinkage, pooled, output):
    """Fit per-class geometry and persist it as a model file."""
    dataset = _read_dataset(dataset_path)
    model = fit(dataset, _config(shrinkage, pooled))
    io.save_model(model, output)
    click.echo(f"fitted {len(model.classes)} classes in {model.d} dimensions -> {output}")


@main.command("score")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Score against a saved model instead of fitting on the input.")
@shrinkage_options
@click.option("--split", "split_fraction", type=float,
              help="Fit on this train fraction and score the held-out rest.")
@click.option("--seed", type=int, default=0, show_default=True, help="Split seed.")
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Records CSV path.")
@guarded
def score_cmd(dataset_path, model_path, shrinkage, pooled, split_fraction, seed, output):
    """Compute distances, complexities, baseline predictions and OOD scores."""
    dataset = _read_dataset(dataset_path)
    if model_path:
        model = io.load_model(model_path)
        target = dataset
    elif split_fraction is not None:
        train, target = io.split(dataset, io.SplitSpec(train_fraction=split_fraction, seed=seed))
        model = fit(train, _config(shrinkage, pooled))
    else:
        model = fit(dataset, _config(shrinkage, pooled))
        target = dataset
    records = score_dataset(target, model)
    io.write_records_csv(records, output)
    click.echo(f"scored {len(records)} samples -> {output}")


@main.command("slices")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False),
              help="Dataset file; adds x1,x2 columns for 2-D data.")
@click.option("--predictions", "predictions_path", type=click.Path(exists=True, dir_okay=False),
              help="External predictions CSV giving the error flag and confidence.")
@metric_option
@click.option("--min-support", type=int, help="Smallest slice size [default: max(10, 1% of rows)].")
@click.option("--grid", type=int, default=analysis.DEFAULT_GRID, show_default=True,
              help="Quantile grid resolution for 2-D slices.")
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Slices CSV path.")
@guarded
def slices_cmd(records_path, dataset_path, predictions_path, metric, min_support, grid, output):
    """Mine ranked feature ranges where misclassifications concentrate."""
    records = io.read_records_csv(records_path)
    predictions = io.read_predictions(predictions_path) if predictions_path else None
    extra = {}
    if dataset_path:
        dataset = _read_dataset(dataset_path)
        index = {i: j for j, i in enumerate(dataset.ids)}
        missing = [r.id for r in records if r.id not in index]
        if missing:
            raise ValidationError(f"records reference ids absent from the dataset: {missing[:10]}")
        rows = [index[r.id] for r in records]
        extra = {
            name: col[rows] for name, col in _coordinate_features(dataset).items()
        }
    table = io.build_analysis_table(records, predictions, extra, baseline_kind=metric)
    ranked = _mine_slices(table, min_support, grid)
    io.write_slices_csv(ranked, output)
    click.echo(f"found {len(ranked)} slices over {len(table.feature_names)} features -> {output}")


@main.command("heatmap")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Saved model; otherwise fits on the dataset.")
@metric_option
@shrinkage_options
@click.option("--resolution", default="200x200", show_default=True, help="Grid points, NXxNY.")
@click.option("--label", help="Fix the scored class; default scores each point's nearest class.")
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Grid CSV path.")
@guarded
def heatmap_cmd(dataset_path, model_path, metric, shrinkage, pooled, resolution, label, output):
    """Evaluate complexity over the dataset's bounding region (2-D data only)."""
    dataset = _read_dataset(dataset_path)
    model = io.load_model(model_path) if model_path else fit(dataset, _config(shrinkage, pooled))
    try:
        nx, ny = (int(p) for p in resolution.lower().split("x"))
    except ValueError:
        raise ValidationError(f"resolution must look like 200x200, got {resolution!r}") from None
    lo = dataset.vectors.min(axis=0)
    hi = dataset.vectors.max(axis=0)
    pad = (hi - lo) * 0.08 + 1e-9
    region = ((lo[0] - pad[0], hi[0] + pad[0]), (lo[1] - pad[1], hi[1] + pad[1]))
    grid = synth.heatmap(model, region, (nx, ny), metric, label=label)
    io.write_heatmap_csv(grid, output)
    click.echo(f"wrote {nx}x{ny} grid -> {output}")


@main.command("report")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@metric_option
@shrinkage_options
@click.option("--split", "split_fraction", type=float,
              help="Fit on this train fraction, report on the held-out rest.")
@click.option("--seed", type=int, default=0, show_default=True, help="Split seed.")
@click.option("--predictions", "predictions_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-support", type=int, help="Smallest slice size [default: max(10, 1% of rows)].")
@click.option("--grid", type=int, default=analysis.DEFAULT_GRID, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv_bundle"]), default="json",
              show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render heatmap and histogram figures next to the report.")
@click.option("--output", type=click.Path(file_okay=False), required=True, help="Output directory.")
@guarded
def report_cmd(dataset_path, metric, shrinkage, pooled, split_fraction, seed,
               predictions_path, min_support, grid, fmt, figures, output):
    """Full pipeline: fit, score, stats, slices, figures, one report."""
    dataset = _read_dataset(dataset_path)
    if split_fraction is not None:
        train, target = io.split(dataset, io.SplitSpec(train_fraction=split_fraction, seed=seed))
    else:
        train = target = dataset
    model = fit(train, _config(shrinkage, pooled))
    records = score_dataset(target, model)
    stats = analysis.dataset_stats(target, model, metric)

    predictions = io.read_predictions(predictions_path) if predictions_path else None
    if predictions is not None:
        unknown = [i for i in predictions.ids if i not in set(dataset.ids)]
        if unknown:
            raise ValidationError(f"predictions reference unknown ids: {unknown[:10]}")
    table = io.build_analysis_table(
        records, predictions, _coordinate_features(target), baseline_kind=metric
    )
    ranked = _mine_slices(table, min_support, grid)

    report = io.Report(
        stats=stats,
        records=records,
        slices=ranked,
        config={
            "metric": metric,
            "shrinkage": shrinkage,
            "pooled": pooled,
            "split": split_fraction,
            "seed": seed,
            "min_support": min_support if min_support is not None else default_min_support(table.n),
            "grid": grid,
            "predictions": Path(predictions_path).name if predictions_path else None,
        },
    )
    written = io.emit_report(report, output, fmt)
    if figures:
        from .figures import render_report_figures

        written += render_report_figures(
            target, model, records, ranked, table.is_error, Path(output) / "figures"
        )
    for p in written:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
