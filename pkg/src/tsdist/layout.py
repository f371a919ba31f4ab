"""Kamada-Kawai layout of a dataset distance matrix, plus JSON/SVG export."""
from dataclasses import dataclass, field
import csv
import json
import logging
import math

import numpy as np

from ._io import atomic_write_text, round_sig
from ._svg import Svg
from .errors import LabelMismatch, NonPositiveDistance, ParseError, TooFewNodes

log = logging.getLogger(__name__)

GRADIENT_TOL = 1e-6
MAX_PASSES = 1000
ZERO_DISTANCE_FLOOR = 1e-6
JITTER = 1e-3
MAX_HALVINGS = 40
DEFAULT_NODE_COLOR = "#9ecae1"


@dataclass
class LayoutCoordinates:
    labels: list
    positions: np.ndarray
    final_stress: float
    stress_history: list = field(default_factory=list, repr=False)
    steps: int = 0

    def to_dict(self, digits=12):
        f = (lambda x: round_sig(x, digits)) if digits else float
        return {
            "labels": list(self.labels),
            "positions": [[f(x), f(y)] for x, y in self.positions],
            "stress": f(self.final_stress),
        }


def stress(positions, target):
    """Sum over i < j of (|p_i - p_j| - d_ij)^2 / d_ij^2."""
    diff = positions[:, None, :] - positions[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    iu = np.triu_indices(len(positions), 1)
    d = target[iu]
    return float(np.sum(((r[iu] - d) / d) ** 2))


def _target_distances(values):
    d = np.array(values, dtype=np.float64)
    n = d.shape[0]
    off = ~np.eye(n, dtype=bool)
    dmax = float(d[off].max())
    if not dmax > 0:
        raise NonPositiveDistance("all off-diagonal distances are zero")
    floor = ZERO_DISTANCE_FLOOR * dmax
    d[off] = np.maximum(d[off], floor)
    np.fill_diagonal(d, 1.0)
    return d, dmax


def _node_terms(p, m, target):
    """Gradient and 2x2 Hessian of the stress with respect to node m."""
    delta = p[m] - p
    delta[m] = 0.0
    r = np.sqrt(np.sum(delta * delta, axis=1))
    r[m] = 1.0
    r = np.maximum(r, 1e-300)
    k = 1.0 / target[m] ** 2
    k[m] = 0.0
    d = target[m]
    dx, dy = delta[:, 0], delta[:, 1]
    coef = 2.0 * k * (1.0 - d / r)
    g = np.array([np.sum(coef * dx), np.sum(coef * dy)])
    r3 = r ** 3
    hxx = np.sum(2.0 * k * (1.0 - d * dy * dy / r3))
    hyy = np.sum(2.0 * k * (1.0 - d * dx * dx / r3))
    hxy = np.sum(2.0 * k * d * dx * dy / r3)
    return g, np.array([[hxx, hxy], [hxy, hyy]]), float(np.sum(2.0 * k))


def _all_gradients(p, target):
    delta = p[:, None, :] - p[None, :, :]
    r = np.sqrt(np.sum(delta * delta, axis=-1))
    np.fill_diagonal(r, 1.0)
    r = np.maximum(r, 1e-300)
    coef = 2.0 / target ** 2 * (1.0 - target / r)
    np.fill_diagonal(coef, 0.0)
    return np.einsum("ij,ijk->ik", coef, delta)


def _initial_positions(n, radius, seed):
    angles = 2.0 * np.pi * np.arange(n) / n
    p = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(seed)
    return p + rng.uniform(-1.0, 1.0, size=(n, 2)) * (JITTER * radius)


def _normalize(p):
    p = p - p.mean(axis=0)
    norms = np.hypot(p[:, 0], p[:, 1])
    anchor = int(np.argmax(norms > 1e-12 * max(norms.max(), 1e-300)))
    angle = math.atan2(p[anchor, 1], p[anchor, 0])
    c, s = math.cos(-angle), math.sin(-angle)
    p = p @ np.array([[c, s], [-s, c]])
    p[anchor, 1] = 0.0
    if len(p) > 1:
        other = 1 if anchor != 1 else 0
        if p[other, 1] < 0:
            p[:, 1] = -p[:, 1]
    return p


def kamada_kawai_layout(m, seed=42):
    """2-D positions minimizing the Kamada-Kawai stress of ``m``.

    Nodes are optimized one at a time, always the one with the largest
    gradient, with a Newton step that is halved until the stress does not
    increase. Processing happens in label-sorted order so that the result
    does not depend on how the matrix rows are ordered.
    """
    labels = list(m.labels)
    n = len(labels)
    if n < 2:
        raise TooFewNodes(f"layout needs at least 2 nodes, got {n}")
    order = sorted(range(n), key=lambda i: labels[i])
    target, dmax = _target_distances(np.asarray(m.values)[np.ix_(order, order)])

    p = _initial_positions(n, dmax / 2.0, seed)
    current = stress(p, target)
    history = [current]
    steps = 0
    for _ in range(MAX_PASSES * n):
        gnorm = np.hypot(*_all_gradients(p, target).T)
        node = int(np.argmax(gnorm))
        if gnorm[node] <= GRADIENT_TOL:
            break
        g, h, ksum = _node_terms(p, node, target)
        det = h[0, 0] * h[1, 1] - h[0, 1] ** 2
        if h[0, 0] > 0 and det > 0:
            step = -np.linalg.solve(h, g)
        else:
            step = -g / ksum
        accepted = False
        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            trial = p.copy()
            trial[node] += alpha * step
            s = stress(trial, target)
            if s <= current:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            log.debug("layout stalled at stress %.3e", current)
            break
        p, current = trial, s
        history.append(current)
        steps += 1

    positions = np.empty_like(p)
    positions[order] = p
    positions = _normalize(positions)
    orig_target, _ = _target_distances(np.asarray(m.values))
    return LayoutCoordinates(labels, positions, stress(positions, orig_target), history, steps)


def export_layout_json(lc, path, digits=12):
    atomic_write_text(path, json.dumps(lc.to_dict(digits), indent=1) + "\n")


def load_color_map(path):
    """Read a ``label,css_color`` CSV into a dict."""
    colors = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError("expected 'label,css_color'", path=path, line=lineno)
            label, color = row[0].strip(), row[1].strip()
            if lineno == 1 and label == "label":
                continue
            colors[label] = color
    return colors


def export_layout(lc, m, path, colors=None):
    """Render the layout as an SVG scatter of labeled nodes."""
    if list(lc.labels) != list(m.labels):
        raise LabelMismatch("layout labels do not match the distance matrix labels")
    colors = colors or {}
    unknown = sorted(set(colors) - set(lc.labels))
    if unknown:
        log.warning("color map has labels not in the matrix: %s", ", ".join(unknown))
    W = H = 560.0
    margin = 60.0
    pos = np.asarray(lc.positions)
    lo = pos.min(axis=0)
    span = float(max(np.ptp(pos[:, 0]), np.ptp(pos[:, 1]))) or 1.0
    scale = (W - 2 * margin) / span

    svg = Svg(W, H)
    n = len(lc.labels)
    for i in range(n):
        for j in range(i + 1, n):
            a = margin + (pos[i] - lo) * scale
            b = margin + (pos[j] - lo) * scale
            svg.line(a[0], H - a[1], b[0], H - b[1], stroke="#e0e0e0", width=0.5)
    for label, (x, y) in zip(lc.labels, pos):
        cx = margin + (x - lo[0]) * scale
        cy = H - (margin + (y - lo[1]) * scale)
        svg.circle(cx, cy, 6.0, colors.get(label, DEFAULT_NODE_COLOR))
        svg.text(cx + 8, cy + 4, label, size=10, fill=colors.get(label, "#000000"))
    svg.text(10, 18, f"{m.metric_name} layout, stress {lc.final_stress:.3g}", size=11)
    atomic_write_text(path, svg.render())
