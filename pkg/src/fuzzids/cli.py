"""Command-line entry points: ingest, preprocess, select, train, predict, run, report."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .dataset import DatasetSchema, SplitSpec, class_distribution, load_csv
from .errors import ConfigError, FuzzidsError, LoadError, SchemaError, TrainingError
from .fuzzy import TriangularParams, fuzzy_importance, select_vectors
from .models import ClassifierConfig, fit_model, load_model, save_model
from .pipeline import ExperimentConfig, run_experiment
from .preprocess import (
    TransformReport,
    encode_categorical,
    fit_encoder,
    fit_scaler,
    transform,
)

EXIT_CONFIG_ERROR = 1
EXIT_DATA_ERROR = 2
EXIT_TRAINING_ERROR = 3


def _exit_code(exc: FuzzidsError) -> int:
    if isinstance(exc, (LoadError, SchemaError)):
        return EXIT_DATA_ERROR
    if isinstance(exc, TrainingError):
        return EXIT_TRAINING_ERROR
    return EXIT_CONFIG_ERROR


def _fail(exc: FuzzidsError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(_exit_code(exc))


def _write_json(path: str | Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_preprocessed(data_path: str, schema_path: str):
    schema = DatasetSchema.from_file(schema_path)
    ds = load_csv(data_path, schema)
    encoder = fit_encoder(ds)
    ds = encode_categorical(encoder, ds)
    scaler = fit_scaler(ds)
    return transform(scaler, ds)


@click.group()
def main():
    """Fuzzy-logic feature selection IDS toolkit."""


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--report", "report_path", required=True, type=click.Path())
def ingest(data_path, schema_path, report_path):
    """Load a dataset and emit a class-distribution report."""
    try:
        schema = DatasetSchema.from_file(schema_path)
        ds = load_csv(data_path, schema)
        dist = class_distribution(ds)
        _write_json(report_path, {
            "dataset": schema.name,
            "rows": len(ds),
            "class_distribution": {
                schema.decode_label(k): v for k, v in sorted(dist.items())
            },
        })
        click.echo(f"loaded {len(ds)} rows from {data_path}")
    except FuzzidsError as exc:
        _fail(exc)


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--apply", "apply_paths", multiple=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--out-dir", required=True, type=click.Path())
def preprocess(train_path, apply_paths, schema_path, out_dir):
    """Fit scaler/encoder on the training file and transform all partitions."""
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        schema = DatasetSchema.from_file(schema_path)
        train = load_csv(train_path, schema)
        encoder = fit_encoder(train)
        train_enc = encode_categorical(encoder, train)
        scaler = fit_scaler(train_enc)
        _write_json(out / "scaler_state.json", scaler.to_dict())
        _write_json(out / "encoder_state.json", encoder.to_dict())

        reports = {}
        for path in (train_path, *apply_paths):
            name = Path(path).stem
            report = TransformReport()
            ds = load_csv(path, schema)
            ds = transform(scaler, encode_categorical(encoder, ds, report), report)
            _save_matrix_csv(out / f"{name}_scaled.csv", ds)
            reports[name] = {
                "clamped_cells": report.clamped_cells,
                "unseen_categories": report.unseen_categories,
            }
        _write_json(out / "transform_report.json", reports)
        click.echo(f"wrote scaled partitions to {out}")
    except FuzzidsError as exc:
        _fail(exc)


def _save_matrix_csv(path: Path, ds) -> None:
    header = ",".join(ds.schema.feature_names + [ds.schema.label_column])
    rows = [header]
    for row, label in zip(ds.numeric_features(), ds.labels):
        cells = [f"{v:.10g}" for v in row]
        rows.append(",".join(cells + [ds.schema.decode_label(int(label))]))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--params", default="0,0.5,1", help="a,b,c of the membership triangle")
@click.option("--lengths", required=True, help="comma-separated vector lengths")
@click.option("--names", required=True, help="comma-separated vector names")
@click.option("--et-weight", type=float, default=1.0)
@click.option("--out", "out_path", required=True, type=click.Path())
def select(data_path, schema_path, params, lengths, names, et_weight, out_path):
    """Rank features by fuzzy importance and emit named vectors."""
    try:
        ds = _load_preprocessed(data_path, schema_path)
        a, b, c = (float(v) for v in params.split(","))
        ranking = fuzzy_importance(ds, TriangularParams(a, b, c))
        if et_weight < 1.0:
            from .models import fit_et, mean_impurity_decrease
            from .fuzzy import fuse_with_et_importance

            et_model = fit_et(ds.numeric_features(), ds.labels,
                              ClassifierConfig(kind="et", n_trees=50))
            et_scores = mean_impurity_decrease(et_model, ds.n_features)
            ranking = fuse_with_et_importance(ranking, et_scores, et_weight)
        length_list = [int(v) for v in lengths.split(",")]
        name_list = names.split(",")
        vectors = select_vectors(ranking, length_list, name_list)
        feature_names = ds.schema.feature_names
        _write_json(out_path, {
            "scores": [float(s) for s in ranking.scores],
            "order": [int(i) for i in ranking.order],
            "et_weight": ranking.et_weight,
            "vectors": {
                v.name: [feature_names[i] for i in v.indices] for v in vectors
            },
        })
        click.echo(f"wrote ranking and {len(vectors)} vectors to {out_path}")
    except FuzzidsError as exc:
        _fail(exc)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--vector", default=None,
              help="comma-separated feature indices; all features if omitted")
@click.option("--model", "kind", required=True,
              type=click.Choice(["dt", "rf", "et", "gbt", "nb", "svm"]))
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="JSON/YAML file of extra ClassifierConfig fields")
@click.option("--out", "out_path", required=True, type=click.Path())
def train(data_path, schema_path, vector, kind, config_path, out_path):
    """Train one classifier on (optionally projected) scaled features."""
    try:
        ds = _load_preprocessed(data_path, schema_path)
        overrides = {}
        if config_path:
            import yaml

            with open(config_path, "r", encoding="utf-8") as fh:
                overrides = yaml.safe_load(fh) or {}
        cfg = ClassifierConfig(kind=kind, **overrides)
        x = ds.numeric_features()
        if vector:
            cols = [int(v) for v in vector.split(",")]
            x = x[:, cols]
        model = fit_model(x, ds.labels, cfg)
        save_model(model, out_path)
        click.echo(f"trained {kind} on {len(ds)} rows; model saved to {out_path}")
    except FuzzidsError as exc:
        _fail(exc)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--vector", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def predict(model_path, data_path, schema_path, vector, out_path):
    """Predict labels for a dataset with a saved model."""
    try:
        model = load_model(model_path)
        ds = _load_preprocessed(data_path, schema_path)
        x = ds.numeric_features()
        if vector:
            cols = [int(v) for v in vector.split(",")]
            x = x[:, cols]
        labels = model.predict(x)
        Path(out_path).write_text(
            "\n".join(str(int(v)) for v in labels) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {len(labels)} predictions to {out_path}")
    except FuzzidsError as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def run(config_path):
    """Run the full experiment described by a config file."""
    try:
        config = ExperimentConfig.from_file(config_path)
        report = run_experiment(config)
        click.echo(
            f"run complete: {len(report.cells)} cells written to {config.output_dir}"
        )
    except FuzzidsError as exc:
        _fail(exc)


@main.command()
@click.option("--run", "run_dir", required=True, type=click.Path())
@click.option("--format", "fmt", default="table",
              type=click.Choice(["table", "roc", "cm"]))
def report(run_dir, fmt):
    """Print artifacts of a finished run."""
    run_dir = Path(run_dir)
    if fmt == "table":
        path = run_dir / "metrics_table.csv"
        if not path.exists():
            click.echo(f"error: no metrics table in {run_dir}", err=True)
            sys.exit(EXIT_DATA_ERROR)
        click.echo(path.read_text(encoding="utf-8"), nl=False)
    else:
        sub = run_dir / fmt
        if not sub.is_dir():
            click.echo(f"error: no {fmt} directory in {run_dir}", err=True)
            sys.exit(EXIT_DATA_ERROR)
        for path in sorted(sub.iterdir()):
            click.echo(f"== {path.name}")
            click.echo(path.read_text(encoding="utf-8"), nl=False)


if __name__ == "__main__":
    main()
