"""Static SVG plots: heatmaps, line charts, bars.

Pure string emission with fixed number formatting, so identical data
produces byte-identical files.  These are reproduction aids for the
figure scripts, not a plotting library.
"""

from __future__ import annotations

import math

import numpy as np

_STOPS = (
    (0.267, 0.005, 0.329), (0.283, 0.141, 0.458), (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553), (0.164, 0.471, 0.558), (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518), (0.267, 0.749, 0.441), (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150), (0.993, 0.906, 0.144),
)
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f")


def _color(x: float) -> str:
    x = min(max(float(x), 0.0), 1.0)
    pos = x * (len(_STOPS) - 1)
    i = min(int(pos), len(_STOPS) - 2)
    f = pos - i
    rgb = tuple((1 - f) * a + f * b for a, b in zip(_STOPS[i], _STOPS[i + 1]))
    return "#%02x%02x%02x" % tuple(int(round(255 * c)) for c in rgb)


def _num(v: float) -> str:
    return f"{float(v):.2f}"


def _label(v: float) -> str:
    return f"{float(v):.6g}"


def _text(x, y, s, size=11, anchor="middle", rotate=None) -> str:
    extra = f' transform="rotate(-90 {_num(x)} {_num(y)})"' if rotate else ""
    return (f'<text x="{_num(x)}" y="{_num(y)}" font-family="monospace" '
            f'font-size="{size}" text-anchor="{anchor}"{extra}>{s}</text>')


def _document(width: int, height: int, parts) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>',
                      *parts, "</svg>"]) + "\n"


def _write(path, markup: str) -> str:
    if path is not None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(markup)
    return markup


def heatmap(values, path=None, *, title="", x_label="", y_label="",
            x_ticks=None, y_ticks=None, vmin=None, vmax=None) -> str:
    """Colour-mapped matrix; row 0 is drawn at the top."""
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 2:
        raise ValueError("heatmap needs a 2d array")
    rows, cols = grid.shape
    lo = float(grid.min() if vmin is None else vmin)
    hi = float(grid.max() if vmax is None else vmax)
    span = hi - lo if hi > lo else 1.0
    left, top = 70, 36
    plot_w, plot_h = 560, 360
    cw, ch = plot_w / cols, plot_h / rows
    parts = []
    if title:
        parts.append(_text(left + plot_w / 2, 20, title, size=13))
    for i in range(rows):
        for j in range(cols):
            parts.append(
                f'<rect x="{_num(left + j * cw)}" y="{_num(top + i * ch)}" '
                f'width="{_num(cw + 0.5)}" height="{_num(ch + 0.5)}" '
                f'fill="{_color((grid[i, j] - lo) / span)}"/>')
    parts.append(f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    for frac, text in (x_ticks or ()):
        x = left + frac * plot_w
        parts.append(f'<line x1="{_num(x)}" y1="{top + plot_h}" x2="{_num(x)}" '
                     f'y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(_text(x, top + plot_h + 18, text))
    for frac, text in (y_ticks or ()):
        y = top + frac * plot_h
        parts.append(f'<line x1="{left - 5}" y1="{_num(y)}" x2="{left}" '
                     f'y2="{_num(y)}" stroke="black"/>')
        parts.append(_text(left - 10, y + 4, text, anchor="end"))
    if x_label:
        parts.append(_text(left + plot_w / 2, top + plot_h + 36, x_label))
    if y_label:
        parts.append(_text(22, top + plot_h / 2, y_label, rotate=True))
    bar_x = left + plot_w + 24
    steps = 32
    for k in range(steps):
        frac = 1.0 - (k + 1) / steps
        parts.append(
            f'<rect x="{bar_x}" y="{_num(top + k * plot_h / steps)}" width="16" '
            f'height="{_num(plot_h / steps + 0.5)}" fill="{_color(frac + 1.0 / steps)}"/>')
    parts.append(f'<rect x="{bar_x}" y="{top}" width="16" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    parts.append(_text(bar_x + 20, top + 10, _label(hi), anchor="start", size=10))
    parts.append(_text(bar_x + 20, top + plot_h, _label(lo), anchor="start", size=10))
    return _write(path, _document(760, top + plot_h + 50, parts))


def _axis_ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def line_chart(xs, series: dict, path=None, *, title="", x_label="", y_label="",
               log_y: bool = False) -> str:
    """Polyline chart; ``series`` maps legend names to y arrays."""
    xs = np.asarray(xs, dtype=float)
    if not len(series):
        raise ValueError("no series to plot")
    left, top = 70, 36
    plot_w, plot_h = 560, 360
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    if log_y:
        all_y = all_y[all_y > 0]
        if all_y.size == 0:
            raise ValueError("log scale needs positive values")
        ylo, yhi = math.log10(all_y.min()), math.log10(all_y.max())
    else:
        ylo, yhi = float(all_y.min()), float(all_y.max())
    if yhi <= ylo:
        yhi = ylo + 1.0
    xlo, xhi = float(xs.min()), float(xs.max())
    if xhi <= xlo:
        xhi = xlo + 1.0

    def sx(x):
        return left + (x - xlo) / (xhi - xlo) * plot_w

    def sy(y):
        v = math.log10(y) if log_y else y
        return top + plot_h - (v - ylo) / (yhi - ylo) * plot_h

    parts = []
    if title:
        parts.append(_text(left + plot_w / 2, 20, title, size=13))
    for k, (name, ys) in enumerate(series.items()):
        ys = np.asarray(ys, dtype=float)
        pts = []
        for x, y in zip(xs, ys):
            if log_y and y <= 0:
                continue
            pts.append(f"{_num(sx(x))},{_num(sy(y))}")
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<line x1="{left + plot_w + 8}" y1="{top + 10 + 16 * k}" '
                     f'x2="{left + plot_w + 26}" y2="{top + 10 + 16 * k}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(_text(left + plot_w + 32, top + 14 + 16 * k, name,
                           anchor="start", size=10))
    parts.append(f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    for tick in _axis_ticks(xlo, xhi):
        parts.append(f'<line x1="{_num(sx(tick))}" y1="{top + plot_h}" '
                     f'x2="{_num(sx(tick))}" y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(_text(sx(tick), top + plot_h + 18, _label(tick)))
    for tick in _axis_ticks(ylo, yhi):
        value = 10.0 ** tick if log_y else tick
        y = sy(value)
        parts.append(f'<line x1="{left - 5}" y1="{_num(y)}" x2="{left}" '
                     f'y2="{_num(y)}" stroke="black"/>')
        parts.append(_text(left - 10, y + 4, _label(value), anchor="end"))
    if x_label:
        parts.append(_text(left + plot_w / 2, top + plot_h + 36, x_label))
    if y_label:
        parts.append(_text(22, top + plot_h / 2, y_label, rotate=True))
    return _write(path, _document(780, top + plot_h + 50, parts))


def bar_chart(labels, values, path=None, *, title="", y_label="",
              vmin=None, vmax=None) -> str:
    """Vertical bars with value-axis ticks; labels drawn under each bar."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size != len(labels):
        raise ValueError("labels and values must match")
    lo = float(min(values.min(), 0.0) if vmin is None else vmin)
    hi = float(values.max() if vmax is None else vmax)
    if hi <= lo:
        hi = lo + 1.0
    left, top = 70, 36
    plot_w, plot_h = 560, 360
    bw = plot_w / values.size

    def sy(y):
        return top + plot_h - (y - lo) / (hi - lo) * plot_h

    parts = []
    if title:
        parts.append(_text(left + plot_w / 2, 20, title, size=13))
    for k, v in enumerate(values):
        y0, y1 = sorted((sy(v), sy(0.0) if lo <= 0.0 <= hi else sy(lo)))
        parts.append(f'<rect x="{_num(left + k * bw + 0.15 * bw)}" y="{_num(y0)}" '
                     f'width="{_num(0.7 * bw)}" height="{_num(max(y1 - y0, 0.5))}" '
                     f'fill="#1f77b4"/>')
        parts.append(_text(left + (k + 0.5) * bw, top + plot_h + 14,
                           str(labels[k]), size=9))
    if lo <= 0.0 <= hi:
        parts.append(f'<line x1="{left}" y1="{_num(sy(0.0))}" '
                     f'x2="{left + plot_w}" y2="{_num(sy(0.0))}" stroke="black"/>')
    parts.append(f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    for tick in _axis_ticks(lo, hi):
        parts.append(f'<line x1="{left - 5}" y1="{_num(sy(tick))}" x2="{left}" '
                     f'y2="{_num(sy(tick))}" stroke="black"/>')
        parts.append(_text(left - 10, sy(tick) + 4, _label(tick), anchor="end"))
    if y_label:
        parts.append(_text(22, top + plot_h / 2, y_label, rotate=True))
    return _write(path, _document(700, top + plot_h + 50, parts))
