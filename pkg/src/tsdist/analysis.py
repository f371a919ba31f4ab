"""Pairwise distance matrices, correlation against losses, and their exports."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import json
import math
import os

import numpy as np
from scipy import stats

from . import baselines, gaussian
from ._io import atomic_write_text, round_sig
from ._svg import Svg, color_level, hex_color, label_text
from .errors import (
    DegenerateVariance,
    DimensionMismatch,
    InvalidMatrix,
    LengthMismatch,
    ParseError,
    TsdistError,
)

MVN_METRICS = ("wasserstein", "euclidean", "dtw")
LINKAGE_METRICS = ("link-min", "link-avg", "link-max")
METRICS = MVN_METRICS + LINKAGE_METRICS


@dataclass
class DistanceMatrix:
    labels: list
    values: np.ndarray
    metric_name: str
    approximate: bool = False

    def __post_init__(self):
        self.labels = [str(x) for x in self.labels]
        self.values = np.asarray(self.values, dtype=np.float64)
        self.validate()

    def validate(self):
        m = len(self.labels)
        v = self.values
        if v.shape != (m, m):
            raise InvalidMatrix(f"{m} labels but values have shape {v.shape}")
        if len(set(self.labels)) != m:
            raise InvalidMatrix("labels must be unique")
        if not np.all(np.isfinite(v)):
            raise InvalidMatrix("matrix has non-finite entries")
        if np.any(v < 0):
            raise InvalidMatrix("matrix has negative entries")
        if not np.array_equal(v, v.T):
            i, j = np.argwhere(v != v.T)[0]
            raise InvalidMatrix(
                f"matrix is not symmetric: [{self.labels[i]}, {self.labels[j]}] = {v[i, j]!r} "
                f"but [{self.labels[j]}, {self.labels[i]}] = {v[j, i]!r}"
            )
        if self.metric_name not in LINKAGE_METRICS and np.any(np.diag(v) != 0):
            raise InvalidMatrix(f"{self.metric_name} matrix must have a zero diagonal")

    def index(self, label):
        return self.labels.index(label)

    def rounded(self, digits=12):
        vals = np.vectorize(lambda x: round_sig(x, digits), otypes=[float])(self.values)
        return DistanceMatrix(list(self.labels), vals, self.metric_name, self.approximate)


def _default_threads():
    env = os.environ.get("TSDIST_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _fill(labels, n, pair_fn, threads, diag_fn=None):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if diag_fn is not None:
        pairs = [(i, i) for i in range(n)] + pairs

    def run(pair):
        i, j = pair
        try:
            return diag_fn(i) if (i == j and diag_fn) else pair_fn(i, j)
        except TsdistError as exc:
            raise type(exc)(f"{labels[i]} vs {labels[j]}: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, pairs))
    else:
        results = [run(p) for p in pairs]
    values = np.zeros((n, n))
    for (i, j), d in zip(pairs, results):
        values[i, j] = d
        values[j, i] = d
    return values


def _check_lengths(names, lengths):
    if len(set(lengths)) > 1:
        detail = ", ".join(f"{n}={L}" for n, L in zip(names, lengths))
        raise DimensionMismatch(f"window lengths differ across datasets: {detail}")


def matrix_from_params(params, metric="wasserstein", threads=None):
    """Pairwise matrix over fitted sketches for an MVN-based metric."""
    if metric not in MVN_METRICS:
        raise ValueError(f"metric {metric!r} cannot be computed from sketches")
    if len(params) < 2:
        raise InvalidMatrix("need at least two datasets")
    labels = [p.dataset_name for p in params]
    _check_lengths(labels, [p.window_length for p in params])
    threads = threads or _default_threads()
    n = len(params)
    if metric == "wasserstein":
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                prepared = list(pool.map(gaussian.prepare, params))
        else:
            prepared = [gaussian.prepare(p) for p in params]

        def pair_fn(i, j):
            return gaussian._w2_prepared(prepared[i], prepared[j])
    elif metric == "euclidean":
        def pair_fn(i, j):
            return baselines.euclidean_mean_distance(params[i], params[j])
    else:
        def pair_fn(i, j):
            return baselines.dtw_mean_distance(params[i], params[j])
    return DistanceMatrix(labels, _fill(labels, n, pair_fn, threads), metric)


def pairwise_matrix(datasets, metric="wasserstein", threads=None, subsample=None, seed=42):
    """Pairwise matrix over sample matrices.

    MVN metrics fit each dataset once. Linkage metrics run one pair at a
    time and parallelize inside the kernel; ``subsample`` caps the rows used
    per dataset and marks the result approximate.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if len(datasets) < 2:
        raise InvalidMatrix("need at least two datasets")
    labels = [d.dataset_name for d in datasets]
    _check_lengths(labels, [d.window_length for d in datasets])
    if metric in MVN_METRICS:
        params = [gaussian.fit_mvn(d) for d in datasets]
        return matrix_from_params(params, metric, threads)

    kind = metric.split("-", 1)[1]
    threads = threads or _default_threads()
    baselines.set_threads(threads)

    def pair_fn(i, j):
        rng = np.random.default_rng([seed, i, j]) if subsample else None
        return baselines.linkage_distance(
            datasets[i], datasets[j], kind, subsample=subsample, rng=rng
        )

    values = _fill(labels, len(datasets), pair_fn, 1, diag_fn=lambda i: pair_fn(i, i))
    return DistanceMatrix(labels, values, metric, approximate=bool(subsample))


# -- export / import -------------------------------------------------------

def _fmt(x, digits):
    return repr(round_sig(x, digits) if digits else float(x))


def export_matrix(m, path, format="json", digits=None):
    """Write ``m`` as CSV or JSON.

    With ``digits=None`` floats are written with their shortest exact repr so
    loading gives back the same bits; otherwise they are rounded to
    ``digits`` significant digits first.
    """
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label"] + m.labels)
        for lab, row in zip(m.labels, m.values):
            w.writerow([lab] + [_fmt(x, digits) for x in row])
        text = buf.getvalue()
    elif format == "json":
        vals = [[float(_fmt(x, digits)) for x in row] for row in m.values]
        doc = {"metric": m.metric_name, "labels": m.labels, "values": vals}
        if m.approximate:
            doc["approximate"] = True
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise ValueError(f"unknown matrix format {format!r}")
    atomic_write_text(path, text)


def load_matrix(path, metric_name=None):
    """Read a matrix written by :func:`export_matrix` (format from the extension)."""
    path = str(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read matrix: {exc.strerror or exc}", path=path) from None
    if path.endswith(".json"):
        try:
            doc = json.loads(text)
            return DistanceMatrix(
                doc["labels"],
                np.array(doc["values"], dtype=np.float64),
                doc.get("metric", metric_name or "unknown"),
                bool(doc.get("approximate", False)),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidMatrix):
                raise InvalidMatrix(f"{path}: {exc}") from None
            raise ParseError(f"malformed matrix JSON: {exc}", path=path) from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:1] != ["label"]:
        raise ParseError("matrix CSV must start with a 'label' header", path=path, line=1)
    labels = rows[0][1:]
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(labels) + 1:
            raise ParseError(f"expected {len(labels) + 1} fields", path=path, line=lineno)
        if row[0] != labels[lineno - 2]:
            raise ParseError(f"row label {row[0]!r} does not match header", path=path, line=lineno)
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
    try:
        return DistanceMatrix(labels, np.array(values).reshape(len(labels), len(labels)),
                              metric_name or "unknown")
    except InvalidMatrix as exc:
        raise InvalidMatrix(f"{path}: {exc}") from None


def export_heatmap(m, path, title=None):
    """Heatmap SVG; the smallest distance gets the darkest color."""
    n = len(m.labels)
    cell = max(8.0, min(28.0, 560.0 / n))
    label_w = 7.0 * max(len(s) for s in m.labels) + 10
    top = label_w + (24 if title else 8)
    left = label_w
    bar_x = left + n * cell + 24
    width = bar_x + 90
    height = max(top + n * cell + 12, top + 220)
    svg = Svg(width, height)
    if title:
        svg.text(left, 16, title, size=13)
    lo, hi = float(m.values.min()), float(m.values.max())
    for i in range(n):
        svg.text(left - 4, top + (i + 0.5) * cell + 4, m.labels[i], anchor="end")
        x = left + (i + 0.5) * cell + 4
        svg.text(x, top - 4, m.labels[i], rotate=-90)
        for j in range(n):
            level = color_level(m.values[i, j], lo, hi)
            svg.rect(left + j * cell, top + i * cell, cell, cell, hex_color(level))
    bar_h = 200.0
    steps = 64
    for k in range(steps):
        level = round(k * 255 / (steps - 1))
        svg.rect(bar_x, top + k * bar_h / steps, 16, bar_h / steps + 0.01, hex_color(level))
    svg.rect(bar_x, top, 16, bar_h, "none", stroke="#000000")
    svg.text(bar_x + 20, top + 8, f"min {label_text(lo)}", size=10)
    svg.text(bar_x + 20, top + bar_h, f"max {label_text(hi)}", size=10)
    atomic_write_text(path, svg.render())


# -- correlation -------------------------------------------------------------

@dataclass
class CorrelationReport:
    pearson_r: float
    slope: float
    intercept: float
    n: int
    pairs: list = field(default_factory=list)
    spearman_r: float = None

    def to_dict(self, digits=12):
        f = (lambda x: round_sig(x, digits)) if digits else float
        return {
            "pearson_r": f(self.pearson_r),
            "spearman_r": f(self.spearman_r),
            "spearman_note": "supplementary rank correlation; pearson_r is the primary statistic",
            "slope": f(self.slope),
            "intercept": f(self.intercept),
            "n": self.n,
            "pairs": [{"label": lab, "distance": f(d), "loss": f(l)} for lab, d, l in self.pairs],
        }


def correlate(distances, losses, labels=None):
    """Pearson r and the least-squares line of loss on distance."""
    x = np.asarray(distances, dtype=np.float64).reshape(-1)
    y = np.asarray(losses, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} distances but {y.size} losses")
    if x.size < 3:
        raise LengthMismatch(f"need at least 3 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise LengthMismatch("distances and losses must be finite")
    labels = [str(s) for s in labels] if labels is not None else [str(i) for i in range(x.size)]
    if len(labels) != x.size:
        raise LengthMismatch(f"{len(labels)} labels for {x.size} points")
    xm = x - math.fsum(x) / x.size
    ym = y - math.fsum(y) / y.size
    sxx = math.fsum(xm * xm)
    syy = math.fsum(ym * ym)
    sxy = math.fsum(xm * ym)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("distances and losses must both vary")
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    slope = sxy / sxx
    intercept = math.fsum(y) / y.size - slope * (math.fsum(x) / x.size)
    rho = float(stats.spearmanr(x, y).statistic)
    pairs = [(lab, float(d), float(l)) for lab, d, l in zip(labels, x, y)]
    return CorrelationReport(r, slope, intercept, int(x.size), pairs, rho)


def export_correlation(report, path, source=None, digits=12):
    doc = report.to_dict(digits)
    if source is not None:
        doc = {"source": source, **doc}
    atomic_write_text(path, json.dumps(doc, indent=1) + "\n")


def export_scatter(report, path, source=None, xlabel="Wasserstein distance", ylabel="loss"):
    """Distance-vs-loss scatter with the fitted line drawn in red."""
    W, H = 520.0, 400.0
    left, right, top, bottom = 64.0, 24.0, 36.0, 52.0
    pw, ph = W - left - right, H - top - bottom
    xs = np.array([p[1] for p in report.pairs])
    ys = np.array([p[2] for p in report.pairs])
    x0, x1 = float(xs.min()), float(xs.max())
    y_line = report.slope * np.array([x0, x1]) + report.intercept
    y0 = float(min(ys.min(), y_line.min()))
    y1 = float(max(ys.max(), y_line.max()))
    xpad = (x1 - x0) * 0.05 or 1.0
    ypad = (y1 - y0) * 0.05 or 1.0
    x0, x1, y0, y1 = x0 - xpad, x1 + xpad, y0 - ypad, y1 + ypad

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    svg = Svg(W, H)
    title = f"r = {report.pearson_r:.3f}"
    if source:
        title = f"source: {source}   {title}"
    svg.text(left, 22, title, size=13)
    svg.rect(left, top, pw, ph, "none", stroke="#000000")
    for lab, d, loss in report.pairs:
        svg.circle(px(d), py(loss), 3.5, "#1f77b4")
        svg.text(px(d) + 5, py(loss) - 5, lab, size=8, fill="#444444")
    xa, xb = float(xs.min()), float(xs.max())
    svg.line(px(xa), py(report.slope * xa + report.intercept),
             px(xb), py(report.slope * xb + report.intercept), stroke="#d62728", width=1.5)
    svg.text(left, top + ph + 16, label_text(x0), size=9)
    svg.text(left + pw, top + ph + 16, label_text(x1), size=9, anchor="end")
    svg.text(left - 4, top + ph, label_text(y0), size=9, anchor="end")
    svg.text(left - 4, top + 8, label_text(y1), size=9, anchor="end")
    svg.text(left + pw / 2, H - 14, xlabel, anchor="middle")
    svg.text(16, top + ph / 2, ylabel, anchor="middle", rotate=-90)
    atomic_write_text(path, svg.render())
