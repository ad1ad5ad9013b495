"""Minimal deterministic SVG renderers for the report figures.

Hand-rolled on purpose: output bytes depend only on the input data, so
re-running a report reproduces identical files.
"""

from __future__ import annotations

from pathlib import Path

_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
            "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd")


class _Canvas:
    def __init__(self, width=760, height=420, margin=70):
        self.width = width
        self.height = height
        self.margin = margin
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def line(self, x1, y1, x2, y2, color="#333", width=1.0):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )

    def rect(self, x, y, w, h, color, fill="none"):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'stroke="{color}" fill="{fill}"/>'
        )

    def circle(self, x, y, r, color):
        self.parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{color}" '
            f'fill-opacity="0.65"/>'
        )

    def text(self, x, y, s, size=11, anchor="middle", rotate=None):
        transform = f' transform="rotate({rotate} {x:.2f} {y:.2f})"' if rotate else ""
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}"{transform}>{s}</text>'
        )

    def save(self, path):
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def boxplot_svg(path, labels, stats, title, ylabel):
    """stats: list of (lo_whisker, q1, median, q3, hi_whisker) per label."""
    c = _Canvas()
    x0, x1 = c.margin, c.width - 20
    y0, y1 = c.height - c.margin, 30
    values = [v for s in stats for v in s]
    sy = _scale(min(values), max(values), y0, y1)
    c.line(x0, y0, x1, y0)
    c.line(x0, y0, x0, y1)
    c.text(c.width / 2, 18, title, size=13)
    c.text(16, (y0 + y1) / 2, ylabel, rotate=-90)
    for tick in (min(values), (min(values) + max(values)) / 2, max(values)):
        c.text(x0 - 8, sy(tick) + 4, f"{tick:.2f}", size=9, anchor="end")
        c.line(x0 - 4, sy(tick), x0, sy(tick))
    step = (x1 - x0) / max(len(labels), 1)
    for i, (label, (lo, q1, med, q3, hi)) in enumerate(zip(labels, stats)):
        cx = x0 + step * (i + 0.5)
        half = min(22.0, step * 0.3)
        color = _PALETTE[i % len(_PALETTE)]
        c.line(cx, sy(lo), cx, sy(q1), color)
        c.line(cx, sy(q3), cx, sy(hi), color)
        c.line(cx - half / 2, sy(lo), cx + half / 2, sy(lo), color)
        c.line(cx - half / 2, sy(hi), cx + half / 2, sy(hi), color)
        c.rect(cx - half, min(sy(q1), sy(q3)), 2 * half, abs(sy(q1) - sy(q3)), color)
        c.line(cx - half, sy(med), cx + half, sy(med), color, width=2.0)
        c.text(cx, y0 + 14, label, size=9, rotate=25)
    c.save(path)


def lines_svg(path, x_labels, series, title, ylabel):
    """series: ordered dict name -> list of y per x label (NaN skipped)."""
    import math

    c = _Canvas()
    x0, x1 = c.margin, c.width - 150
    y0, y1 = c.height - c.margin, 30
    values = [v for ys in series.values() for v in ys if not math.isnan(v)]
    if not values:
        values = [0.0, 1.0]
    sy = _scale(min(values + [0.0]), max(values + [1.0]), y0, y1)
    sx = _scale(0, max(len(x_labels) - 1, 1), x0, x1)
    c.line(x0, y0, x1, y0)
    c.line(x0, y0, x0, y1)
    c.text((x0 + x1) / 2, 18, title, size=13)
    c.text(16, (y0 + y1) / 2, ylabel, rotate=-90)
    for tick in (0.0, 0.5, 1.0):
        c.text(x0 - 8, sy(tick) + 4, f"{tick:.1f}", size=9, anchor="end")
        c.line(x0 - 4, sy(tick), x0, sy(tick))
    for i, lbl in enumerate(x_labels):
        c.text(sx(i), y0 + 14, lbl, size=9, rotate=20)
    for k, (name, ys) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        prev = None
        for i, v in enumerate(ys):
            if math.isnan(v):
                prev = None
                continue
            if prev is not None:
                c.line(sx(i - 1), sy(prev), sx(i), sy(v), color, 1.6)
            c.circle(sx(i), sy(v), 3.0, color)
            prev = v
        c.text(x1 + 10, 40 + 16 * k, name[:28], size=9, anchor="start")
        c.line(x1 + 2, 36 + 16 * k, x1 + 8, 36 + 16 * k, color, 3.0)
    c.save(path)


def grouped_bars_svg(path, group_labels, bar_labels, values, title, ylabel):
    """values[group][bar] in [0, 1]."""
    c = _Canvas()
    x0, x1 = c.margin, c.width - 150
    y0, y1 = c.height - c.margin, 30
    sy = _scale(0.0, 1.0, y0, y1)
    c.line(x0, y0, x1, y0)
    c.line(x0, y0, x0, y1)
    c.text((x0 + x1) / 2, 18, title, size=13)
    c.text(16, (y0 + y1) / 2, ylabel, rotate=-90)
    for tick in (0.0, 0.5, 1.0):
        c.text(x0 - 8, sy(tick) + 4, f"{tick:.1f}", size=9, anchor="end")
    group_w = (x1 - x0) / max(len(group_labels), 1)
    bar_w = group_w * 0.8 / max(len(bar_labels), 1)
    for gi, glabel in enumerate(group_labels):
        gx = x0 + gi * group_w + group_w * 0.1
        for bi, _ in enumerate(bar_labels):
            v = values[gi][bi]
            color = _PALETTE[bi % len(_PALETTE)]
            c.rect(gx + bi * bar_w, sy(v), bar_w * 0.92, y0 - sy(v), color, fill=color)
        c.text(x0 + gi * group_w + group_w / 2, y0 + 14, glabel, size=9, rotate=20)
    for bi, blabel in enumerate(bar_labels):
        color = _PALETTE[bi % len(_PALETTE)]
        c.rect(x1 + 6, 32 + 16 * bi, 8, 8, color, fill=color)
        c.text(x1 + 18, 40 + 16 * bi, blabel, size=9, anchor="start")
    c.save(path)


def scatter_svg(path, points, title, xlabel, ylabel):
    """points: list of (x, y)."""
    c = _Canvas(width=520, height=420)
    x0, x1 = c.margin, c.width - 20
    y0, y1 = c.height - c.margin, 30
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    sx = _scale(min(xs + [0.0]), max(xs + [1.0]), x0, x1)
    sy = _scale(0.0, max(ys + [1.0]), y0, y1)
    c.line(x0, y0, x1, y0)
    c.line(x0, y0, x0, y1)
    c.text((x0 + x1) / 2, 18, title, size=12)
    c.text((x0 + x1) / 2, c.height - 12, xlabel, size=10)
    c.text(16, (y0 + y1) / 2, ylabel, rotate=-90, size=10)
    for tick in (0.0, 0.5, 1.0):
        c.text(sx(tick), y0 + 12, f"{tick:.1f}", size=9)
        c.text(x0 - 8, sy(tick * max(ys + [1.0])) + 4,
               f"{tick * max(ys + [1.0]):.2f}", size=9, anchor="end")
    for x, y in points:
        c.circle(sx(x), sy(y), 3.0, _PALETTE[0])
    c.save(path)
