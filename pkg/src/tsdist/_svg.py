"""Minimal deterministic SVG writing.

Everything is formatted with fixed precision so identical inputs give
byte-identical files.
"""
from xml.sax.saxutils import escape, quoteattr

import numpy as np

# Sequential colormap, darkest first. The 256 levels are linear
# interpolations between consecutive stops.
COLORMAP_STOPS = (
    (8, 29, 88),
    (37, 52, 148),
    (34, 94, 168),
    (29, 145, 192),
    (65, 182, 196),
    (127, 205, 187),
    (199, 233, 180),
    (237, 248, 177),
    (255, 255, 217),
)
LEVELS = 256


def _build_colormap():
    stops = np.array(COLORMAP_STOPS, dtype=np.float64)
    pos = np.linspace(0.0, 1.0, len(stops))
    t = np.linspace(0.0, 1.0, LEVELS)
    rgb = np.stack([np.interp(t, pos, stops[:, c]) for c in range(3)], axis=1)
    return [tuple(int(round(v)) for v in row) for row in rgb]


COLORMAP = _build_colormap()


def color_level(value, lo, hi):
    """Colormap index for ``value``; ``lo`` maps to 0 (darkest)."""
    if not hi > lo:
        return 0
    frac = (value - lo) / (hi - lo)
    return int(min(LEVELS - 1, max(0, round(frac * (LEVELS - 1)))))


def hex_color(level):
    r, g, b = COLORMAP[level]
    return f"#{r:02x}{g:02x}{b:02x}"


def luminance(level):
    r, g, b = COLORMAP[level]
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def num(x):
    """Fixed two-decimal coordinate formatting."""
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def label_text(x):
    """Compact numeric annotation for axes and colorbars."""
    return f"{x:.4g}"


class Svg:
    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.parts = []

    def rect(self, x, y, w, h, fill, stroke=None):
        extra = f' stroke="{stroke}" stroke-width="0.5"' if stroke else ""
        self.parts.append(
            f'<rect x="{num(x)}" y="{num(y)}" width="{num(w)}" height="{num(h)}" fill="{fill}"{extra}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0):
        self.parts.append(
            f'<line x1="{num(x1)}" y1="{num(y1)}" x2="{num(x2)}" y2="{num(y2)}" '
            f'stroke="{stroke}" stroke-width="{num(width)}"/>'
        )

    def circle(self, cx, cy, r, fill, stroke="#333333"):
        self.parts.append(
            f'<circle cx="{num(cx)}" cy="{num(cy)}" r="{num(r)}" fill={quoteattr(fill)} '
            f'stroke="{stroke}" stroke-width="0.75"/>'
        )

    def text(self, x, y, s, size=11, anchor="start", rotate=None, fill="#000000"):
        transform = f' transform="rotate({num(rotate)} {num(x)} {num(y)})"' if rotate else ""
        self.parts.append(
            f'<text x="{num(x)}" y="{num(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill={quoteattr(fill)}{transform}>{escape(str(s))}</text>'
        )

    def render(self):
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{num(self.width)}" '
            f'height="{num(self.height)}" viewBox="0 0 {num(self.width)} {num(self.height)}">\n'
            f'<rect x="0" y="0" width="{num(self.width)}" height="{num(self.height)}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"
