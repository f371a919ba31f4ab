"""Loading raw series, min-max normalization and window sampling."""
from dataclasses import dataclass, field
import csv
import json
import logging
import math
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    DatasetIOError,
    DegenerateRange,
    EmptyDataset,
    InvalidConfig,
    NonFiniteValue,
    NoValidWindow,
    ParseError,
    ResampleExhausted,
)

log = logging.getLogger(__name__)

FORMATS = ("jsonl", "csv-long")


@dataclass
class TimeSeriesDataset:
    """A named collection of univariate series of arbitrary lengths.

    ``series`` is a list of ``(id, values)`` pairs in the order they were read.
    """

    name: str
    series: list

    def __post_init__(self):
        if not self.series:
            raise EmptyDataset(f"dataset {self.name!r} has no series")
        seen = set()
        cleaned = []
        for sid, values in self.series:
            sid = str(sid)
            if sid in seen:
                raise ParseError(f"duplicate series id {sid!r} in dataset {self.name!r}")
            seen.add(sid)
            arr = np.asarray(values, dtype=np.float64).reshape(-1)
            if arr.size < 1:
                raise EmptyDataset(f"series {sid!r} in dataset {self.name!r} is empty")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(f"series {sid!r} in dataset {self.name!r} has non-finite values")
            cleaned.append((sid, arr))
        self.series = cleaned

    @property
    def lengths(self):
        return np.array([len(v) for _, v in self.series], dtype=np.int64)


@dataclass(frozen=True)
class SamplingConfig:
    window_length: int = 48
    sample_count: int = 20000
    seed: int = 42
    max_resample_attempts: int = 1000

    def __post_init__(self):
        if self.window_length < 2:
            raise InvalidConfig(f"window_length must be >= 2, got {self.window_length}")
        if self.sample_count < self.window_length:
            raise InvalidConfig(
                f"sample_count ({self.sample_count}) must be >= window_length ({self.window_length})"
            )
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.max_resample_attempts < 1:
            raise InvalidConfig("max_resample_attempts must be positive")

    def to_dict(self):
        return {
            "window_length": self.window_length,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "max_resample_attempts": self.max_resample_attempts,
        }


@dataclass
class SampleMatrix:
    """N windows of length L drawn from one normalized dataset.

    ``origins`` records ``(series_index, offset)`` for every row when the
    matrix came out of :func:`sample_windows`.
    """

    dataset_name: str
    data: np.ndarray
    config: SamplingConfig = None
    origins: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidConfig(f"sample matrix must be 2-D and non-empty, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue(f"sample matrix {self.dataset_name!r} has non-finite entries")
        if data.min() < 0.0 or data.max() > 1.0:
            raise InvalidConfig(f"sample matrix {self.dataset_name!r} has entries outside [0, 1]")
        if np.any(np.ptp(data, axis=1) <= 0.0):
            raise InvalidConfig(f"sample matrix {self.dataset_name!r} contains a constant row")
        self.data = data

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def window_length(self):
        return self.data.shape[1]


def infer_format(path):
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv-long"
    raise ParseError(f"cannot infer dataset format from extension {suffix!r}", path=path)


def _finite(value, path, line):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"value {value!r} is not a number", path=path, line=line) from None
    if isinstance(value, bool):
        raise ParseError(f"value {value!r} is not a number", path=path, line=line)
    if not math.isfinite(v):
        raise NonFiniteValue(f"non-finite value {value!r}", path=path, line=line)
    return v


def _load_jsonl(path, fh):
    series = []
    seen = set()
    for lineno, raw in enumerate(fh, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=lineno) from None
        if not isinstance(obj, dict) or "id" not in obj or "values" not in obj:
            raise ParseError("expected an object with 'id' and 'values'", path=path, line=lineno)
        values = obj["values"]
        if not isinstance(values, list) or not values:
            raise ParseError("'values' must be a non-empty array", path=path, line=lineno)
        sid = str(obj["id"])
        if sid in seen:
            raise ParseError(f"duplicate series id {sid!r}", path=path, line=lineno)
        seen.add(sid)
        series.append((sid, np.array([_finite(v, path, lineno) for v in values])))
    return series


def _load_csv_long(path, fh):
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise EmptyDataset(f"{path}: file is empty")
    if [h.strip() for h in header] != ["series_id", "t", "value"]:
        raise ParseError("header must be 'series_id,t,value'", path=path, line=1)
    groups = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", path=path, line=lineno)
        sid, t_raw, v_raw = (c.strip() for c in row)
        try:
            t = int(t_raw)
        except ValueError:
            raise ParseError(f"time index {t_raw!r} is not an integer", path=path, line=lineno) from None
        points = groups.setdefault(sid, {})
        if t in points:
            raise ParseError(f"duplicate t={t} for series {sid!r}", path=path, line=lineno)
        points[t] = _finite(v_raw, path, lineno)
    return [
        (sid, np.array([points[t] for t in sorted(points)])) for sid, points in groups.items()
    ]


def load_dataset(path, format=None, name=None):
    """Read a dataset file in ``jsonl`` or ``csv-long`` format.

    The dataset name defaults to the file stem.
    """
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}; expected one of {FORMATS}", path=path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            series = _load_jsonl(path, fh) if fmt == "jsonl" else _load_csv_long(path, fh)
    except OSError as exc:
        raise DatasetIOError(f"{path}: {exc.strerror or exc}") from exc
    if not series:
        raise EmptyDataset(f"{path}: no series found")
    return TimeSeriesDataset(name=name or path.stem, series=series)


def minmax_normalize(ds):
    """Scale every value by the dataset-wide min and max into [0, 1]."""
    lo = min(float(v.min()) for _, v in ds.series)
    hi = max(float(v.max()) for _, v in ds.series)
    if not hi > lo:
        raise DegenerateRange(f"dataset {ds.name!r} has a single distinct value ({lo})")
    span = hi - lo
    scaled = []
    for sid, v in ds.series:
        out = (v - lo) / span
        # guard against 1 + ulp from the division
        np.clip(out, 0.0, 1.0, out=out)
        scaled.append((sid, out))
    return TimeSeriesDataset(name=ds.name, series=scaled)


def dataset_rng(seed, name):
    """Generator for one dataset, independent of processing order.

    The stream is keyed on ``(seed, crc32(name))`` so that adding or
    reordering datasets never changes what any one of them draws.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, key])))


def draw_window_indices(rng, lengths, window_length, size):
    """Draw ``size`` (series, offset) pairs uniformly over all valid windows."""
    counts = np.maximum(np.asarray(lengths, dtype=np.int64) - window_length + 1, 0)
    total = int(counts.sum())
    if total == 0:
        raise NoValidWindow(f"no series has length >= {window_length}")
    cum = np.cumsum(counts)
    flat = rng.integers(0, total, size=size)
    series_idx = np.searchsorted(cum, flat, side="right")
    offsets = flat - (cum[series_idx] - counts[series_idx])
    return series_idx, offsets


def sample_windows(ds, cfg=None, rng=None):
    """Draw ``cfg.sample_count`` non-constant windows from a normalized dataset.

    Sampling is with replacement, uniform over every valid (series, offset)
    pair. Constant windows are redrawn; a slot that stays constant for
    ``cfg.max_resample_attempts`` consecutive draws raises
    :class:`ResampleExhausted`.
    """
    cfg = cfg or SamplingConfig()
    L = cfg.window_length
    lengths = ds.lengths
    short = [sid for sid, v in ds.series if len(v) < L]
    if short and len(short) < len(ds.series):
        log.warning(
            "dataset %r: %d series shorter than window length %d are excluded",
            ds.name, len(short), L,
        )
    if rng is None:
        rng = dataset_rng(cfg.seed, ds.name)

    flat = np.concatenate([v for _, v in ds.series])
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    steps = np.arange(L)

    N = cfg.sample_count
    out = np.empty((N, L))
    origins = np.empty((N, 2), dtype=np.int64)
    pending = np.arange(N)
    attempts = 0
    while pending.size:
        if attempts == cfg.max_resample_attempts:
            raise ResampleExhausted(
                f"dataset {ds.name!r}: {pending.size} window(s) still constant after "
                f"{attempts} draws"
            )
        attempts += 1
        sidx, offs = draw_window_indices(rng, lengths, L, pending.size)
        windows = flat[(starts[sidx] + offs)[:, None] + steps]
        ok = windows.max(axis=1) > windows.min(axis=1)
        keep = pending[ok]
        out[keep] = windows[ok]
        origins[keep, 0] = sidx[ok]
        origins[keep, 1] = offs[ok]
        pending = pending[~ok]
    return SampleMatrix(dataset_name=ds.name, data=out, config=cfg, origins=origins)
