"""Command-line interface.

Commands mirror the pipeline stages: query candidate entities, gather
and filter face samples, build the dictionary, calibrate thresholds,
identify persons across an image corpus, export the relation graph,
render reports, and serve the curation API.

The threshold flags keep their short config names: ``--lambda1`` is the
sample-filter threshold, ``--lambda2`` the identification threshold.
"""

from __future__ import annotations

import functools
import json
import shlex
import sys
from pathlib import Path

import click

from . import formats, report as report_mod
from .calibration import CalibrationResult, kfold_calibrate
from .cooccurrence import GRAPH_FORMATS, build_graph, count_occurrences, export_graph
from .defaults import (
    DEFAULT_ENTITY_LIMIT,
    DEFAULT_FOLD_COUNT,
    DEFAULT_IDENTIFICATION_THRESHOLD,
    DEFAULT_IMAGES_PER_ENTITY,
    DEFAULT_MIN_BIRTH_YEAR,
    DEFAULT_SAMPLE_FILTER_THRESHOLD,
)
from .dictionary import (
    STRATEGIES,
    build_dictionary,
    evaluate_filtering,
    filter_features,
    gather_samples,
    select_target,
)
from .entities import (
    EntityQuery,
    EntityRecord,
    fetch_entities,
    load_query_config,
    rank_and_truncate,
)
from .errors import FacegraphError
from .identification import identify_corpus
from .ingestion import SearchSpace, apply_constraints, dedupe, embed_corpus, parse_manifest
from .providers import (
    DirectoryImages,
    ExternalProcessDetector,
    SyntheticDetector,
    UrlListImages,
)
from .workspace import Workspace

__all__ = ["main"]


def friendly_errors(fn):
    """Turn library errors into clean CLI failures (exit code 1)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FacegraphError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def make_detector(provider: str, script: str | None, command: str | None):
    if provider == "synthetic":
        if not script:
            raise click.UsageError("--script is required with --provider synthetic")
        return SyntheticDetector.from_file(script)
    if not command:
        raise click.UsageError("--command is required with --provider external")
    return ExternalProcessDetector(shlex.split(command))


def image_source(path: str):
    p = Path(path)
    if p.is_dir():
        return DirectoryImages(p)
    return UrlListImages(p)


@click.group()
@click.version_option(package_name="facegraph")
def main() -> None:
    """Person identification over archived web imagery."""


@main.command()
@click.option("--occupation", required=True,
              help="Occupation name from the query config, or a raw entity id.")
@click.option("--views-year", type=int, required=True,
              help="Year whose page-view counts rank the candidates.")
@click.option("--limit", type=int, default=DEFAULT_ENTITY_LIMIT, show_default=True)
@click.option("--min-birth-year", type=int, default=DEFAULT_MIN_BIRTH_YEAR,
              show_default=True)
@click.option("--source", required=True,
              help="SPARQL endpoint URL, or path to a recorded response file.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Query template file (defaults to the bundled one).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write records as JSON instead of printing only text.")
@friendly_errors
def entities(occupation, views_year, limit, min_birth_year, source, config_path, out_path):
    """Query candidate persons ranked by page views."""
    query = EntityQuery(
        occupation=occupation,
        page_view_year=views_year,
        min_birth_year=min_birth_year,
        limit=limit,
    )
    config = load_query_config(config_path)
    records = rank_and_truncate(fetch_entities(query, source, config=config), limit)
    for rec in records:
        click.echo(
            f"{rec.entity_id}\t{rec.display_name}\t"
            f"views={rec.page_views}\tborn={rec.birth_year}"
        )
    click.echo(f"{len(records)} entities", err=True)
    if out_path:
        payload = json.dumps([r.to_dict() for r in records], indent=2, sort_keys=True)
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}", err=True)


@main.command()
@click.option("--pairs", "pairs_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Verification pairs file (id_a, id_b, same_person).")
@click.option("--embeddings", "embeddings_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Embedding manifest the pair ids reference.")
@click.option("--folds", type=int, default=DEFAULT_FOLD_COUNT, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the result as JSON to this file instead of stdout.")
@friendly_errors
def calibrate(pairs_path, embeddings_path, folds, seed, out_path):
    """Cross-validate the verification threshold on labeled pairs."""
    embeddings = formats.read_embeddings(embeddings_path)
    pairs = formats.resolve_pairs(formats.read_pairs(pairs_path), embeddings)
    result = kfold_calibrate(pairs, k=folds, seed=seed)
    click.echo(f"pairs:          {len(pairs)}")
    click.echo(f"folds:          {result.fold_count}")
    click.echo(f"mean threshold: {result.mean_threshold:.6f}")
    click.echo(f"threshold std:  {result.threshold_std:.6f}")
    click.echo(f"mean accuracy:  {result.mean_accuracy:.6f}")
    payload = json.dumps(result.to_dict(), sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}", err=True)
    else:
        click.echo(payload)


@main.command()
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--entity", "entity_id", required=True, help="Entity id for the samples.")
@click.option("--name", "display_name", default="", help="Display name for the entity.")
@click.option("--images", "images_path", required=True, type=click.Path(exists=True),
              help="Directory of images, or a text file listing locators.")
@click.option("--provider", type=click.Choice(["synthetic", "external"]), required=True)
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Scripted detections file for the synthetic provider.")
@click.option("--command", default=None,
              help="Detector command line for the external provider.")
@click.option("--max-images", type=int, default=DEFAULT_IMAGES_PER_ENTITY,
              show_default=True)
@friendly_errors
def gather(workspace_dir, entity_id, display_name, images_path, provider, script,
           command, max_images):
    """Collect face samples for one entity into the workspace."""
    detector = make_detector(provider, script, command)
    record = EntityRecord(entity_id, display_name or entity_id, 0, 0)
    sample_set = gather_samples(
        record, image_source(images_path), detector, max_images=max_images
    )
    ws = Workspace(workspace_dir).initialize()
    path = ws.save_samples(sample_set)
    click.echo(
        f"stored {len(sample_set.faces)} faces for {entity_id} in {path}"
    )


@main.command("filter")
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--entity", "entity_id", required=True)
@click.option("--strategy", type=click.Choice(list(STRATEGIES)), default="mean",
              show_default=True)
@click.option("--lambda1", type=float, default=DEFAULT_SAMPLE_FILTER_THRESHOLD,
              show_default=True, help="Sample-filter similarity threshold.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the report (and metrics, if available) as JSON.")
@friendly_errors
def filter_cmd(workspace_dir, entity_id, strategy, lambda1, out_path):
    """Preview sample filtering for one entity."""
    ws = Workspace(workspace_dir)
    sample_set = ws.load_samples(entity_id)
    target = select_target(sample_set, strategy)
    report = filter_features(sample_set, target, threshold=lambda1, strategy=strategy)
    metrics = None
    if all(face.ground_truth is not None for face in sample_set.faces):
        metrics = evaluate_filtering(report, sample_set)
    click.echo(
        f"{entity_id}: kept {len(report.kept)} of "
        f"{len(report.kept) + len(report.removed)} faces "
        f"(strategy={strategy}, lambda1={lambda1})"
    )
    if metrics is not None:
        click.echo(
            f"precision={metrics.precision:.4f} recall={metrics.recall:.4f} "
            f"f1={metrics.f1:.4f}"
        )
    if out_path:
        formats.write_filter_report(out_path, report, metrics)
        click.echo(f"wrote {out_path}", err=True)


@main.command("build-dict")
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--strategy", type=click.Choice(list(STRATEGIES)), default="mean",
              show_default=True)
@click.option("--lambda1", type=float, default=DEFAULT_SAMPLE_FILTER_THRESHOLD,
              show_default=True, help="Sample-filter similarity threshold.")
@friendly_errors
def build_dict(workspace_dir, strategy, lambda1):
    """Filter every entity's samples and build the dictionary."""
    ws = Workspace(workspace_dir)
    summaries = ws.list_entities()
    if not summaries:
        raise click.ClickException("workspace holds no sample sets")
    filtered = []
    names = {}
    for summary in summaries:
        sample_set = ws.load_samples(summary.entity_id)
        target = select_target(sample_set, strategy)
        report = filter_features(
            sample_set, target, threshold=lambda1, strategy=strategy
        )
        filtered.append((sample_set, report))
        if summary.display_name:
            names[summary.entity_id] = summary.display_name
        click.echo(
            f"{summary.entity_id}: kept {len(report.kept)} of "
            f"{len(sample_set.faces)}"
        )
    dictionary, dropped = build_dictionary(filtered, names=names)
    for entity_id in dropped:
        click.echo(f"warning: {entity_id} lost every sample, dropped", err=True)
    path = ws.save_dictionary(
        dictionary, sample_filter_threshold=lambda1, strategy=strategy
    )
    click.echo(f"dictionary with {len(dictionary)} entities written to {path}")


@main.command("eval-filter")
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--entity", "entity_id", required=True)
@click.option("--strategy", type=click.Choice(list(STRATEGIES)), default="mean",
              show_default=True)
@click.option("--lambda1", type=float, default=DEFAULT_SAMPLE_FILTER_THRESHOLD,
              show_default=True)
@click.option("--annotations", "annotations_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="face_id to true/false JSON; overrides stored ground truth.")
@friendly_errors
def eval_filter(workspace_dir, entity_id, strategy, lambda1, annotations_path):
    """Score a filter configuration against ground-truth annotations."""
    import dataclasses

    ws = Workspace(workspace_dir)
    sample_set = ws.load_samples(entity_id)
    if annotations_path:
        annotations = formats.read_annotations(annotations_path)
        faces = tuple(
            dataclasses.replace(
                face, ground_truth=annotations.get(face.face_id, face.ground_truth)
            )
            for face in sample_set.faces
        )
        sample_set = dataclasses.replace(sample_set, faces=faces)
    target = select_target(sample_set, strategy)
    report = filter_features(sample_set, target, threshold=lambda1, strategy=strategy)
    try:
        metrics = evaluate_filtering(report, sample_set)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(metrics.to_dict(), sort_keys=True))


@main.command()
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Capture manifest: url timestamp mime digest locator per line.")
@click.option("--domains", required=True, multiple=True,
              help="Allowed domain (repeatable).")
@click.option("--formats", "format_names", default="jpeg,png", show_default=True,
              help="Comma-separated admitted image formats.")
@click.option("--year", type=int, required=True, help="Capture year to admit.")
@click.option("--provider", type=click.Choice(["synthetic", "external"]),
              required=True)
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--command", default=None)
@click.option("--lambda2", type=float, default=DEFAULT_IDENTIFICATION_THRESHOLD,
              show_default=True, help="Identification similarity threshold.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write results to this file (workspace always updated).")
@friendly_errors
def identify(workspace_dir, manifest_path, domains, format_names, year, provider,
             script, command, lambda2, workers, out_path):
    """Run identification over an archived image corpus."""
    from .ingestion import mime_type_for

    ws = Workspace(workspace_dir)
    dictionary, _config = ws.load_dictionary()

    parsed = parse_manifest(manifest_path)
    mimes = [mime_type_for(name.strip()) for name in format_names.split(",") if name.strip()]
    space = SearchSpace.for_year(domains, year, formats=mimes)
    admitted = dedupe(apply_constraints(parsed.records, space))
    click.echo(
        f"manifest: {len(parsed.records)} records "
        f"({len(parsed.rejects)} rejected lines), {len(admitted)} admitted"
    )

    detector = make_detector(provider, script, command)
    extraction = embed_corpus(admitted, detector, max_workers=workers)
    if extraction.failures:
        click.echo(f"warning: {len(extraction.failures)} images failed to decode",
                   err=True)
    results = identify_corpus(
        extraction.observations, dictionary, threshold=lambda2, images=admitted
    )
    path = ws.save_results(results)
    if out_path:
        formats.write_results(out_path, results)
    recognized_images = sum(1 for r in results if r.recognized)
    total_hits = sum(len(r.recognized) for r in results)
    click.echo(
        f"{len(extraction.observations)} faces in {len(admitted)} images; "
        f"{recognized_images} images with recognized persons "
        f"({total_hits} recognitions)"
    )
    click.echo(f"results written to {path}")


@main.command()
@click.option("--results", "results_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(list(GRAPH_FORMATS)),
              default="json", show_default=True)
@click.option("--min-edge-weight", type=int, default=1, show_default=True)
@click.option("--dictionary", "dictionary_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Dictionary file supplying display names for node labels.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output file (stdout when omitted).")
@friendly_errors
def graph(results_path, fmt, min_edge_weight, dictionary_path, out_path):
    """Export the co-occurrence graph from an identification run."""
    results = formats.read_results(results_path)
    names = {}
    if dictionary_path:
        dictionary, _ = formats.read_dictionary(dictionary_path)
        names = {
            eid: entry.display_name
            for eid, entry in dictionary.entries.items()
            if entry.display_name
        }
    built = build_graph(
        count_occurrences(results), names=names, min_edge_weight=min_edge_weight
    )
    data = export_graph(built, fmt)
    if out_path:
        formats.atomic_write(out_path, data)
        click.echo(
            f"{len(built.nodes)} nodes, {len(built.edges)} edges written to {out_path}",
            err=True,
        )
    else:
        sys.stdout.buffer.write(data)


@main.command("report")
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--calibration", "calibration_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Calibration JSON (from the calibrate command) to render.")
@click.option("--top", "top_n", type=int, default=20, show_default=True,
              help="How many entities/pairs the occurrence charts show.")
@friendly_errors
def report_cmd(workspace_dir, out_dir, calibration_path, top_n):
    """Render CSV tables and figures from workspace artifacts."""
    ws = Workspace(workspace_dir)
    written = []

    if calibration_path:
        with open(calibration_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        result = CalibrationResult(
            mean_threshold=raw["mean_threshold"],
            per_fold_thresholds=tuple(raw["per_fold_thresholds"]),
            mean_accuracy=raw["mean_accuracy"],
            threshold_std=raw["threshold_std"],
            fold_count=raw["fold_count"],
        )
        written += report_mod.render_calibration(result, out_dir)

    names = {}
    config = {}
    try:
        dictionary, config = ws.load_dictionary()
        names = {
            eid: e.display_name
            for eid, e in dictionary.entries.items()
            if e.display_name
        }
    except FacegraphError:
        pass

    strategy = config.get("strategy", "mean")
    lambda1 = config.get("lambda1", DEFAULT_SAMPLE_FILTER_THRESHOLD)
    entries = []
    for summary in ws.list_entities():
        sample_set = ws.load_samples(summary.entity_id)
        if not sample_set.faces:
            continue
        if not all(face.ground_truth is not None for face in sample_set.faces):
            continue
        for strat in STRATEGIES:
            if strat == "reference" and sample_set.reference_face_id is None:
                continue
            target = select_target(sample_set, strat)
            rep = filter_features(
                sample_set, target, threshold=lambda1, strategy=strat
            )
            entries.append((rep, evaluate_filtering(rep, sample_set)))
    if entries:
        written += report_mod.render_filter_metrics(entries, out_dir)

    try:
        results = ws.load_results()
    except FacegraphError:
        results = None
    if results is not None:
        counts = count_occurrences(results)
        written += report_mod.render_occurrences(
            counts, out_dir, names=names, top_n=top_n
        )

    if not written:
        raise click.ClickException(
            "nothing to render: no calibration file, no annotated samples, "
            "no results in the workspace"
        )
    for path in written:
        click.echo(f"wrote {path}")
    if strategy not in STRATEGIES:
        click.echo(f"note: dictionary was built with unknown strategy {strategy!r}",
                   err=True)


@main.command()
@click.option("--workspace", "workspace_dir", required=True, type=click.Path())
@click.option("--port", type=int, default=8571, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Directory with the built UI bundle to serve at /.")
@friendly_errors
def serve(workspace_dir, port, host, ui_dir):
    """Serve the curation API (and UI, when a bundle is given)."""
    import uvicorn

    from .service import create_app

    if host not in ("127.0.0.1", "localhost", "::1"):
        click.echo(
            f"warning: binding to {host} exposes the unauthenticated API "
            "beyond this machine",
            err=True,
        )
    app = create_app(workspace_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
