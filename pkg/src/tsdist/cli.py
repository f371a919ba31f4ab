"""Command-line interface: ``tsdist fit | matrix | layout | correlate``.

Exit codes: 0 success, 1 internal error, 2 user or input error.
"""
from concurrent.futures import ThreadPoolExecutor
import csv
import json
import logging
import os
import sys
import time
import traceback
from pathlib import Path

import click

from . import __version__, analysis, gaussian, ingest, layout
from ._io import atomic_write_text, sha256_file
from .errors import (
    InsufficientOverlap,
    MetricNeedsRawData,
    ParseError,
    TsdistError,
    UnknownSourceLabel,
)

log = logging.getLogger("tsdist")

EXPORT_DIGITS = 12
RAW_SUFFIXES = (".jsonl", ".ndjson", ".csv")


def _threads(value):
    if value is None:
        return os.cpu_count() or 1
    if value < 1:
        raise click.BadParameter("must be at least 1", param_hint="--threads")
    return value


def write_manifest(out_dir, command, config, inputs, outputs):
    """Record what a command read and wrote; contains no times or absolute paths."""
    doc = {
        "tool": "tsdist",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": [{"name": Path(p).name, "sha256": sha256_file(p)} for p in inputs],
        "outputs": [{"name": Path(p).name, "sha256": sha256_file(p)} for p in outputs],
    }
    path = Path(out_dir) / f"{command}-manifest.json"
    atomic_write_text(path, json.dumps(doc, indent=1) + "\n")
    return path


def _sampling_config(window_length, samples, seed):
    return ingest.SamplingConfig(window_length=window_length, sample_count=samples, seed=seed)


def _sample_file(path, cfg, fmt):
    ds = ingest.load_dataset(path, format=fmt)
    try:
        return ingest.sample_windows(ingest.minmax_normalize(ds), cfg)
    except TsdistError as exc:
        raise type(exc)(f"dataset {ds.name!r} ({path}): {exc}") from exc


def _sample_all(paths, cfg, fmt, threads):
    names = [Path(p).stem for p in paths]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ParseError(f"dataset names must be unique; repeated: {', '.join(dupes)}")
    if threads > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: _sample_file(p, cfg, fmt), paths))
    return [_sample_file(p, cfg, fmt) for p in paths]


sampling_options = [
    click.option("--window-length", "-L", default=48, show_default=True, type=int,
                 help="Window length L (time steps per sample)."),
    click.option("--samples", "-N", default=20000, show_default=True, type=int,
                 help="Windows drawn per dataset."),
    click.option("--seed", default=42, show_default=True, type=click.IntRange(0, 2**64 - 1),
                 help="Sampling seed; each dataset gets its own stream derived from it."),
    click.option("--format", "fmt", type=click.Choice(ingest.FORMATS), default=None,
                 help="Raw dataset format (default: from the file extension)."),
    click.option("--threads", type=int, default=None, envvar="TSDIST_THREADS",
                 show_envvar=True, help="Worker threads (default: number of CPUs)."),
]


def with_sampling_options(f):
    for opt in reversed(sampling_options):
        f = opt(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="tsdist")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Time-series dataset distances from Gaussian window sketches."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )


@cli.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False),
              help="Output directory for sketch files.")
@with_sampling_options
def fit(inputs, out, window_length, samples, seed, fmt, threads):
    """Fit one Gaussian sketch per raw dataset file."""
    threads = _threads(threads)
    cfg = _sampling_config(window_length, samples, seed)
    started = time.perf_counter()
    sample_sets = _sample_all(inputs, cfg, fmt, threads)
    outputs = []
    for sm in sample_sets:
        params = gaussian.fit_mvn(sm)
        path = Path(out) / f"{sm.dataset_name}.sketch.json"
        gaussian.save_sketch(params, path, digits=EXPORT_DIGITS)
        outputs.append(path)
        click.echo(str(path))
    write_manifest(out, "fit", {"sampling": cfg.to_dict()}, inputs, outputs)
    log.info("fitted %d dataset(s) in %.2fs", len(outputs), time.perf_counter() - started)


def _is_raw(path):
    return Path(path).suffix.lower() in RAW_SUFFIXES


@cli.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", "-m", type=click.Choice(analysis.METRICS), default="wasserstein",
              show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False),
              help="Output directory.")
@click.option("--subsample-linkage", type=click.IntRange(min=1), default=None,
              help="Use at most this many rows per dataset for linkage metrics. "
                   "Results are approximate and flagged as such. Off by default.")
@click.option("--title", default=None, help="Heatmap title.")
@with_sampling_options
def matrix(inputs, metric, out, subsample_linkage, title, window_length, samples, seed, fmt,
           threads):
    """Pairwise distance matrix over sketches (*.sketch.json) or raw datasets.

    Writes matrix.csv, matrix.json and heatmap.svg.
    """
    threads = _threads(threads)
    raw = [p for p in inputs if _is_raw(p)]
    sketches = [p for p in inputs if not _is_raw(p)]
    if metric in analysis.LINKAGE_METRICS and sketches:
        raise MetricNeedsRawData(
            f"metric {metric} needs raw datasets; got sketch file(s): "
            + ", ".join(Path(p).name for p in sketches)
        )
    if raw and sketches:
        raise ParseError("pass either raw dataset files or sketch files, not both")

    started = time.perf_counter()
    config = {"metric": metric}
    if raw:
        cfg = _sampling_config(window_length, samples, seed)
        config["sampling"] = cfg.to_dict()
        sample_sets = _sample_all(inputs, cfg, fmt, threads)
        if metric in analysis.LINKAGE_METRICS:
            config["subsample_linkage"] = subsample_linkage
            m = analysis.pairwise_matrix(sample_sets, metric, threads=threads,
                                         subsample=subsample_linkage, seed=seed)
        else:
            m = analysis.pairwise_matrix(sample_sets, metric, threads=threads)
    else:
        params = [gaussian.load_sketch(p) for p in inputs]
        m = analysis.matrix_from_params(params, metric, threads=threads)
    n = len(m.labels)
    log.info("%s: %d datasets, %d pairs in %.2fs", metric, n, n * (n - 1) // 2,
             time.perf_counter() - started)
    if m.approximate:
        log.warning("linkage distances computed on a subsample of %d rows are approximate",
                    subsample_linkage)

    m = m.rounded(EXPORT_DIGITS)
    out = Path(out)
    outputs = [out / "matrix.csv", out / "matrix.json", out / "heatmap.svg"]
    analysis.export_matrix(m, outputs[0], "csv")
    analysis.export_matrix(m, outputs[1], "json")
    analysis.export_heatmap(m, outputs[2], title=title)
    write_manifest(out, "matrix", config, inputs, outputs)
    for p in outputs:
        click.echo(str(p))


@cli.command("layout")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--color-map", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV of 'label,css_color' used to color nodes by group.")
@click.option("--seed", default=42, show_default=True, type=click.IntRange(0, 2**64 - 1),
              help="Seed for the initial-position jitter.")
def layout_cmd(matrix_file, out, color_map, seed):
    """Kamada-Kawai layout of a distance matrix (CSV or JSON)."""
    m = analysis.load_matrix(matrix_file)
    lc = layout.kamada_kawai_layout(m, seed=seed)
    colors = layout.load_color_map(color_map) if color_map else None
    out = Path(out)
    outputs = [out / "layout.json", out / "layout.svg"]
    layout.export_layout_json(lc, outputs[0], digits=EXPORT_DIGITS)
    layout.export_layout(lc, m, outputs[1], colors=colors)
    inputs = [matrix_file] + ([color_map] if color_map else [])
    write_manifest(out, "layout", {"seed": seed}, inputs, outputs)
    log.info("layout: %d nodes, %d steps, stress %.3g", len(lc.labels), lc.steps, lc.final_stress)
    for p in outputs:
        click.echo(str(p))


def load_losses(path):
    """Read a ``label,loss`` CSV; a header row is optional."""
    losses = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError("expected 'label,loss'", path=path, line=lineno)
            label, value = row[0].strip(), row[1].strip()
            try:
                losses[label] = float(value)
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError(f"loss {value!r} is not a number", path=path, line=lineno) from None
    return losses


@cli.command()
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--source", "-s", required=True, help="Label of the source dataset.")
@click.option("--losses", required=True, type=click.Path(exists=True, dir_okay=False),
              help="CSV of 'label,loss' for target datasets.")
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False))
def correlate(matrix_file, source, losses, out):
    """Correlate distances from SOURCE with per-target losses.

    Writes correlation.json and scatter.svg.
    """
    m = analysis.load_matrix(matrix_file)
    if source not in m.labels:
        raise UnknownSourceLabel(f"source label {source!r} is not in {matrix_file}")
    loss_map = load_losses(losses)
    row = m.values[m.index(source)]
    keep = [i for i, lab in enumerate(m.labels) if lab in loss_map]
    missing = [lab for lab in m.labels if lab not in loss_map]
    extra = sorted(set(loss_map) - set(m.labels))
    if missing:
        log.warning("no loss for: %s", ", ".join(missing))
    if extra:
        log.warning("losses for labels not in the matrix ignored: %s", ", ".join(extra))
    if len(keep) < 3:
        raise InsufficientOverlap(
            f"only {len(keep)} dataset(s) have both a distance and a loss; need at least 3"
        )
    labels = [m.labels[i] for i in keep]
    report = analysis.correlate(row[keep], [loss_map[lab] for lab in labels], labels)
    out = Path(out)
    outputs = [out / "correlation.json", out / "scatter.svg"]
    analysis.export_correlation(report, outputs[0], source=source, digits=EXPORT_DIGITS)
    analysis.export_scatter(report, outputs[1], source=source,
                            xlabel=f"{m.metric_name} distance from {source}")
    write_manifest(out, "correlate", {"source": source, "metric": m.metric_name},
                   [matrix_file, losses], outputs)
    click.echo(f"pearson_r={report.pearson_r:.6f} slope={report.slope:.6g} "
               f"intercept={report.intercept:.6g} n={report.n}")
    for p in outputs:
        click.echo(str(p))


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="tsdist", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except TsdistError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
