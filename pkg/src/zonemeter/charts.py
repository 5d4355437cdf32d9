"""Hand-rolled SVG charts for the report stage.

Presentation only: every number shown here is computed elsewhere. The
files are plain vector markup with fixed-precision coordinates so a
rerun reproduces them byte for byte.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ["#1f6f8b", "#e65c4f", "#5a9e6f", "#8b6fb8", "#c9a227", "#4f7cac"]
BG = "#ffffff"
GRID = "#d8d8d8"
TEXT = "#222222"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    """Accumulates SVG elements inside a fixed plot box."""

    def __init__(self, width=640, height=440, margin=(70, 30, 50, 60)):
        # margin order: left, right, top, bottom
        self.width = width
        self.height = height
        self.ml, self.mr, self.mt, self.mb = margin
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="{BG}"/>',
        ]

    @property
    def plot_w(self):
        return self.width - self.ml - self.mr

    @property
    def plot_h(self):
        return self.height - self.mt - self.mb

    def x(self, frac):
        return self.ml + frac * self.plot_w

    def y(self, frac):
        return self.mt + (1.0 - frac) * self.plot_h

    def line(self, x1, y1, x2, y2, color=GRID, width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{width}"{d}/>'
        )

    def rect(self, x, y, w, h, fill, stroke="none"):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" stroke="{stroke}"/>'
        )

    def polyline(self, pts, color, width=2.0):
        coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>'
        )

    def text(self, x, y, s, size=12, anchor="middle", color=TEXT, rotate=None):
        t = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{color}"{t}>{escape(s)}</text>'
        )

    def frame_box(self, title, x_label, y_label):
        self.rect(self.ml, self.mt, self.plot_w, self.plot_h, "none", stroke=GRID)
        self.text(self.width / 2, self.mt - 12, title, size=15)
        self.text(self.width / 2, self.height - 12, x_label)
        self.text(16, self.height / 2, y_label, rotate=-90)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def lorenz_chart(curves: dict, title: str) -> str:
    """Cumulative-share curves against the equality diagonal.

    curves maps a label to a list of (x, y) points in [0, 1].
    """
    c = _Canvas()
    c.frame_box(title, "cumulative fraction of zones", "cumulative share")
    for frac in (0.25, 0.5, 0.75):
        c.line(c.x(frac), c.y(0), c.x(frac), c.y(1))
        c.line(c.x(0), c.y(frac), c.x(1), c.y(frac))
        c.text(c.x(frac), c.y(0) + 16, _fmt(frac), size=10)
        c.text(c.x(0) - 8, c.y(frac) + 4, _fmt(frac), size=10, anchor="end")
    c.line(c.x(0), c.y(0), c.x(1), c.y(1), color="#999999", dash="5,4")
    for i, (label, pts) in enumerate(sorted(curves.items())):
        color = PALETTE[i % len(PALETTE)]
        c.polyline([(c.x(px), c.y(py)) for px, py in pts], color)
        c.text(c.x(0.03), c.y(0.97) + 14 * i + 4, label, anchor="start", color=color, size=11)
    return c.render()


def _heat_color(frac: float) -> str:
    """White through blue ramp for share intensity."""
    frac = min(max(frac, 0.0), 1.0)
    r = round(255 - frac * (255 - 31))
    g = round(255 - frac * (255 - 111))
    b = round(255 - frac * (255 - 139))
    return f"#{r:02x}{g:02x}{b:02x}"


def share_heatmap(zone_ids, eu_shares, ef_shares, title: str) -> str:
    """Two-column heatmap of each zone's use and flexibility shares."""
    n = len(zone_ids)
    row_h = 18
    height = 110 + n * row_h
    c = _Canvas(width=560, height=height, margin=(220, 40, 60, 40))
    c.text(c.width / 2, 24, title, size=15)
    top = max([*eu_shares, *ef_shares, 1e-12])
    col_w = c.plot_w / 2
    for j, label in enumerate(("use share", "flex share")):
        c.text(c.ml + col_w * (j + 0.5), c.mt - 8, label, size=12)
    for i, zid in enumerate(zone_ids):
        yy = c.mt + i * row_h
        c.text(c.ml - 8, yy + row_h - 5, zid, anchor="end", size=10)
        for j, val in enumerate((eu_shares[i], ef_shares[i])):
            c.rect(c.ml + j * col_w, yy, col_w, row_h, _heat_color(val / top), stroke=GRID)
            c.text(c.ml + col_w * (j + 0.5), yy + row_h - 5, f"{val:.3f}", size=10)
    return c.render()


def bar_chart(labels, values, title: str, y_label: str) -> str:
    """Vertical bars with a zero baseline; negatives hang downward."""
    c = _Canvas(width=max(360, 90 + 26 * len(labels)), height=420)
    lo = min(0.0, min(values, default=0.0))
    hi = max(0.0, max(values, default=0.0))
    if hi - lo <= 0:
        hi = 1.0
    span = hi - lo

    def yv(v):
        return c.y((v - lo) / span)

    c.frame_box(title, "", y_label)
    ticks = 5
    for t in range(ticks + 1):
        v = lo + span * t / ticks
        c.line(c.ml, yv(v), c.ml + c.plot_w, yv(v))
        c.text(c.ml - 8, yv(v) + 4, f"{v:.3g}", anchor="end", size=10)
    c.line(c.ml, yv(0.0), c.ml + c.plot_w, yv(0.0), color="#777777")
    bw = c.plot_w / max(len(labels), 1)
    for i, (label, v) in enumerate(zip(labels, values)):
        x0 = c.ml + i * bw + bw * 0.15
        y0 = min(yv(0.0), yv(v))
        c.rect(x0, y0, bw * 0.7, abs(yv(v) - yv(0.0)), PALETTE[0])
        c.text(c.ml + i * bw + bw / 2, c.mt + c.plot_h + 14, label, size=9, rotate=-35)
    return c.render()


def histogram_chart(values, title: str, x_label: str, bins: int = 10) -> str:
    """Simple count histogram over equal-width bins."""
    c = _Canvas()
    vals = [v for v in values if not (isinstance(v, float) and math.isnan(v))]
    if not vals:
        c.frame_box(title, x_label, "count")
        c.text(c.width / 2, c.height / 2, "no data", size=13)
        return c.render()
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    width = (hi - lo) / bins
    counts = [0] * bins
    for v in vals:
        idx = min(int((v - lo) / width), bins - 1)
        counts[idx] += 1
    top = max(counts)
    c.frame_box(title, x_label, "count")
    for i, n in enumerate(counts):
        x0 = c.x(i / bins)
        h = (n / top) * c.plot_h
        c.rect(x0 + 1, c.mt + c.plot_h - h, c.plot_w / bins - 2, h, PALETTE[2])
    for i in range(bins + 1):
        if i % 2 == 0:
            c.text(c.x(i / bins), c.mt + c.plot_h + 16, f"{lo + i * width:.2f}", size=10)
    c.text(c.x(0) - 8, c.y(1) + 4, str(top), anchor="end", size=10)
    c.text(c.x(0) - 8, c.y(0) + 4, "0", anchor="end", size=10)
    return c.render()
