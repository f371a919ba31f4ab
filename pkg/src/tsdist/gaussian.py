"""Multivariate normal sketches of datasets and the Gaussian 2-Wasserstein distance."""
from dataclasses import dataclass
import json
import math

import numpy as np

from . import linalg
from ._io import atomic_write_text, round_sig
from .ingest import SampleMatrix
from .errors import DimensionMismatch, InvalidMatrix, ParseError, TooFewSamples

SKETCH_FORMAT = "tsdist-mvn/1"


@dataclass
class MvnParams:
    """Maximum-likelihood mean and covariance of one dataset's windows."""

    dataset_name: str
    mean: np.ndarray
    cov: np.ndarray
    sample_count: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        L = mean.size
        if L < 1 or cov.shape != (L, L):
            raise DimensionMismatch(f"mean has length {L} but covariance has shape {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidMatrix(f"sketch {self.dataset_name!r} has non-finite entries")
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise InvalidMatrix(f"covariance of {self.dataset_name!r} is not symmetric")
        if np.any(np.diag(cov) < 0):
            raise InvalidMatrix(f"covariance of {self.dataset_name!r} has a negative variance")
        if mean.min() < -1e-12 or mean.max() > 1 + 1e-12:
            raise InvalidMatrix(f"mean of {self.dataset_name!r} lies outside [0, 1]")
        self.mean = mean
        self.cov = cov

    @property
    def window_length(self):
        return self.mean.size

    def to_dict(self, digits=None):
        f = (lambda x: round_sig(x, digits)) if digits else float
        return {
            "format": SKETCH_FORMAT,
            "dataset_name": self.dataset_name,
            "sample_count": int(self.sample_count),
            "window_length": int(self.window_length),
            "mean": [f(x) for x in self.mean],
            "cov": [f(x) for x in self.cov.ravel()],
        }

    @classmethod
    def from_dict(cls, obj):
        try:
            L = int(obj["window_length"])
            return cls(
                dataset_name=str(obj["dataset_name"]),
                mean=np.array(obj["mean"], dtype=np.float64),
                cov=np.array(obj["cov"], dtype=np.float64).reshape(L, L),
                sample_count=int(obj["sample_count"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed sketch: {exc}") from None


def save_sketch(params, path, digits=12):
    """Write a sketch as JSON. Floats are rounded to ``digits`` significant digits."""
    text = json.dumps(params.to_dict(digits), indent=1, separators=(",", ": "))
    atomic_write_text(path, text + "\n")


def load_sketch(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from None
    try:
        return MvnParams.from_dict(obj)
    except ParseError as exc:
        raise ParseError(str(exc), path=path) from None


def fit_mvn(samples, name=None):
    """Fit mean and covariance with divisor N (the MLE, not the unbiased estimator).

    ``samples`` is a :class:`~tsdist.ingest.SampleMatrix` or a bare N x L array.
    """
    if isinstance(samples, SampleMatrix):
        X = np.asarray(samples.data, dtype=np.float64)
        name = name or samples.dataset_name
    else:
        X = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = X.shape[0]
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples to fit, got {n}")
    mu = X.mean(axis=0)
    centered = X - mu
    cov = centered.T @ centered / n
    cov = 0.5 * (cov + cov.T)
    np.clip(mu, 0.0, 1.0, out=mu)
    return MvnParams(dataset_name=name or "", mean=mu, cov=cov, sample_count=n)


class _Prepared:
    """An MvnParams with its covariance square root cached for repeated use."""

    __slots__ = ("params", "sqrt_cov", "trace_cov", "key")

    def __init__(self, params):
        self.params = params
        self.sqrt_cov = linalg.psd_sqrt(params.cov)
        self.trace_cov = float(np.trace(params.cov))
        self.key = (params.mean.tobytes(), params.cov.tobytes())


def prepare(params):
    return _Prepared(params)


def _check_dims(a, b):
    if a.mean.size != b.mean.size:
        raise DimensionMismatch(
            f"window lengths differ: {a.dataset_name!r} has {a.mean.size}, "
            f"{b.dataset_name!r} has {b.mean.size}"
        )


def _w2_prepared(pa, pb):
    a, b = pa.params, pb.params
    _check_dims(a, b)
    if pa.key == pb.key:
        return 0.0
    # Evaluate in a canonical order so d(a, b) and d(b, a) are bit-identical.
    if pb.key < pa.key:
        pa, pb = pb, pa
        a, b = b, a
    diff = a.mean - b.mean
    mean_term = float(diff @ diff)
    if np.array_equal(a.cov, b.cov):
        cov_term = 0.0
    else:
        s = pa.sqrt_cov
        inner = s @ b.cov @ s
        inner = 0.5 * (inner + inner.T)
        cov_term = pa.trace_cov + pb.trace_cov - 2.0 * linalg.trace_sqrt(inner)
    return math.sqrt(max(mean_term + cov_term, 0.0))


def wasserstein_distance(a, b):
    """2-Wasserstein distance between N(a.mean, a.cov) and N(b.mean, b.cov).

    The cross term tr sqrt(Ca Cb) is evaluated as tr sqrt(Ca^1/2 Cb Ca^1/2),
    which has the same nonzero spectrum but stays symmetric PSD.
    """
    _check_dims(a, b)
    return _w2_prepared(_Prepared(a), _Prepared(b))
