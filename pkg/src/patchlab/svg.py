"""Standalone SVG charts built with ElementTree.

Coordinates are written with fixed precision and elements are emitted in a
fixed order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _f(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _svg(width: float, height: float) -> ET.Element:
    root = ET.Element(
        "svg",
        {"xmlns": "http://www.w3.org/2000/svg", "width": _f(width), "height": _f(height),
         "viewBox": f"0 0 {_f(width)} {_f(height)}", "font-family": "sans-serif", "font-size": "11"},
    )
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": _f(width), "height": _f(height), "fill": "white"})
    return root


def _text(parent, x, y, s, anchor="middle", size=None, **kw):
    attrs = {"x": _f(x), "y": _f(y), "text-anchor": anchor}
    if size:
        attrs["font-size"] = str(size)
    attrs.update(kw)
    el = ET.SubElement(parent, "text", attrs)
    el.text = s
    return el


def _line(parent, x1, y1, x2, y2, stroke="#333", **kw):
    return ET.SubElement(parent, "line", {"x1": _f(x1), "y1": _f(y1), "x2": _f(x2), "y2": _f(y2), "stroke": stroke, **kw})


def to_bytes(root: ET.Element) -> bytes:
    ET.indent(root)
    return b'<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="utf-8") + b"\n"


def write_svg(root: ET.Element, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(to_bytes(root))
    return path


@dataclass
class _Axes:
    x0: float
    y0: float
    w: float
    h: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.w

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + self.h - (y - lo) / (hi - lo) * self.h


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [round(float(v), 10) for v in np.arange(start, hi + step * 1e-9, step)]


def _frame(g, ax: _Axes, xlabel: str, ylabel: str, xticks=None):
    ET.SubElement(g, "rect", {"x": _f(ax.x0), "y": _f(ax.y0), "width": _f(ax.w), "height": _f(ax.h),
                              "fill": "none", "stroke": "#333"})
    for t in _nice_ticks(*ax.ylim):
        y = ax.py(t)
        _line(g, ax.x0 - 4, y, ax.x0, y)
        _line(g, ax.x0, y, ax.x0 + ax.w, y, stroke="#ddd")
        _text(g, ax.x0 - 6, y + 4, f"{t:g}", anchor="end")
    if xticks is not None:
        for t in xticks:
            x = ax.px(t)
            _line(g, x, ax.y0 + ax.h, x, ax.y0 + ax.h + 4)
            _text(g, x, ax.y0 + ax.h + 16, f"{t:g}")
    _text(g, ax.x0 + ax.w / 2, ax.y0 + ax.h + 32, xlabel)
    _text(g, ax.x0 - 40, ax.y0 + ax.h / 2, ylabel,
          transform=f"rotate(-90 {_f(ax.x0 - 40)} {_f(ax.y0 + ax.h / 2)})")


def bar_chart(panels: dict[str, dict[tuple[float, float], float]], title: str, ylabel: str = "mAP",
              ylim: tuple[float, float] = (0.0, 1.0)) -> ET.Element:
    """Grouped bars: one panel per key, groups by threshold, one bar per overlap.

    ``panels`` maps a panel title to ``{(threshold, overlap): value}``.
    """
    pw, ph, margin = 300.0, 240.0, 60.0
    width = margin + len(panels) * (pw + margin)
    height = ph + 120
    root = _svg(width, height)
    _text(root, width / 2, 20, title, size=14)
    overlaps = sorted({o for p in panels.values() for _, o in p})
    for k, (name, values) in enumerate(panels.items()):
        g = ET.SubElement(root, "g", {"class": "panel", "data-panel": name})
        ax = _Axes(margin + k * (pw + margin), 40, pw, ph, (0, 1), ylim)
        _frame(g, ax, "Threshold", ylabel)
        _text(g, ax.x0 + pw / 2, ax.y0 - 6, name, size=12)
        thresholds = sorted({t for t, _ in values})
        gw = pw / max(1, len(thresholds))
        bw = gw * 0.8 / max(1, len(overlaps))
        for i, t in enumerate(thresholds):
            gx = ax.x0 + i * gw + gw * 0.1
            _text(g, ax.x0 + (i + 0.5) * gw, ax.y0 + ph + 16, f"{t:g}")
            for j, o in enumerate(overlaps):
                if (t, o) not in values:
                    continue
                v = values[(t, o)]
                y = ax.py(max(min(v, ylim[1]), ylim[0]))
                bar = ET.SubElement(g, "rect", {
                    "class": "bar", "x": _f(gx + j * bw), "y": _f(y), "width": _f(bw),
                    "height": _f(ax.y0 + ph - y), "fill": PALETTE[j % len(PALETTE)],
                    "data-threshold": f"{t:g}", "data-overlap": f"{o:g}", "data-value": repr(float(v)),
                })
                ET.SubElement(bar, "title").text = f"T={t:g} O={o:g}: {v:.3f}"
    ly = height - 24
    for j, o in enumerate(overlaps):
        lx = margin + j * 90
        ET.SubElement(root, "rect", {"x": _f(lx), "y": _f(ly - 9), "width": "10", "height": "10",
                                     "fill": PALETTE[j % len(PALETTE)]})
        _text(root, lx + 14, ly, f"Overlap {o:g}", anchor="start")
    return root


def scatter(x: Sequence[float], y: Sequence[float], title: str, xlabel: str, ylabel: str,
            hline: float | None = 0.0, diagonal: bool = False) -> ET.Element:
    x, y = np.asarray(x, float), np.asarray(y, float)
    w, h, m = 420.0, 320.0, 60.0
    root = _svg(w + 2 * m, h + 2 * m)
    _text(root, (w + 2 * m) / 2, 24, title, size=14)
    pad = lambda lo, hi: (lo - 0.05 * (hi - lo or 1), hi + 0.05 * (hi - lo or 1))
    ax = _Axes(m, m - 20, w, h, pad(x.min(), x.max()), pad(min(y.min(), hline or y.min()), max(y.max(), hline or y.max())))
    g = ET.SubElement(root, "g", {"class": "scatter"})
    _frame(g, ax, xlabel, ylabel, _nice_ticks(*ax.xlim))
    if hline is not None:
        _line(g, ax.x0, ax.py(hline), ax.x0 + w, ax.py(hline), stroke="#999", **{"stroke-dasharray": "4 3"})
    if diagonal:
        lo, hi = max(ax.xlim[0], ax.ylim[0]), min(ax.xlim[1], ax.ylim[1])
        _line(g, ax.px(lo), ax.py(lo), ax.px(hi), ax.py(hi), stroke="#999", **{"stroke-dasharray": "4 3"})
    for xi, yi in zip(x, y):
        ET.SubElement(g, "circle", {"class": "point", "cx": _f(ax.px(xi)), "cy": _f(ax.py(yi)), "r": "3",
                                    "fill": PALETTE[0], "fill-opacity": "0.8"})
    return root


def curves(series: dict[str, tuple], points: dict[str, tuple] | None, title: str, xlabel: str,
           ylabel: str) -> ET.Element:
    """Lines with shaded bands; ``series[name] = (x, mean, lower, upper)``, ``points[name] = (x, y)``."""
    w, h, m = 460.0, 320.0, 60.0
    root = _svg(w + 2 * m + 120, h + 2 * m)
    _text(root, (w + 2 * m) / 2, 24, title, size=14)
    xs = np.concatenate([np.asarray(s[0], float) for s in series.values()])
    ys = np.concatenate([np.asarray(v, float) for s in series.values() for v in s[1:]] +
                        [np.asarray(p[1], float) for p in (points or {}).values()])
    span = ys.max() - ys.min() or 1.0
    ax = _Axes(m, m - 20, w, h, (xs.min(), xs.max()), (ys.min() - 0.05 * span, ys.max() + 0.05 * span))
    g = ET.SubElement(root, "g", {"class": "curves"})
    _frame(g, ax, xlabel, ylabel, _nice_ticks(*ax.xlim))
    for k, (name, (x, mean, lo, hi)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        band = [f"{_f(ax.px(a))},{_f(ax.py(b))}" for a, b in zip(x, hi)]
        band += [f"{_f(ax.px(a))},{_f(ax.py(b))}" for a, b in zip(x[::-1], lo[::-1])]
        ET.SubElement(g, "polygon", {"class": "band", "points": " ".join(band), "fill": color, "fill-opacity": "0.2",
                                     "stroke": "none"})
        line = " ".join(f"{_f(ax.px(a))},{_f(ax.py(b))}" for a, b in zip(x, mean))
        ET.SubElement(g, "polyline", {"class": "curve", "points": line, "fill": "none", "stroke": color,
                                      "stroke-width": "1.5"})
        if points and name in points:
            for a, b in zip(*points[name]):
                ET.SubElement(g, "circle", {"class": "point", "cx": _f(ax.px(a)), "cy": _f(ax.py(b)), "r": "3",
                                            "fill": color})
        ly = ax.y0 + 14 + 18 * k
        _line(root, ax.x0 + w + 16, ly - 4, ax.x0 + w + 36, ly - 4, stroke=color, **{"stroke-width": "2"})
        _text(root, ax.x0 + w + 40, ly, name, anchor="start")
    return root
