"""Standalone SVG scatter plots of rate series with a smoothed curve and band."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .curves import RateSeries
from .smoothing import SmoothedCurve


@dataclass(frozen=True)
class PlotStyle:
    width: int = 800
    height: int = 480
    margin_left: int = 72
    margin_right: int = 24
    margin_top: int = 40
    margin_bottom: int = 56
    dot_color: str = "#c0392b"
    line_color: str = "#1f5fbf"
    band_color: str = "#9e9e9e"
    band_opacity: float = 0.45
    dot_radius: float = 2.5
    title: str = ""
    x_label: str = "age (days)"
    y_label: str = "rate"


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round-numbered ticks (1, 2 or 5 times a power of ten) covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [round(k * step, 12) for k in range(first, last + 1)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:g}"


def emit_svg(series: RateSeries, smooth: SmoothedCurve | None = None, style: PlotStyle = PlotStyle()) -> str:
    """Render raw rates as dots (hollow when low-support), plus the smooth.

    The band is one polygon running along the upper bound and back along the
    lower bound, so it has two vertices per smoothed point.
    """
    if not series.points:
        raise ValueError("cannot plot an empty series")
    smooth_pts = smooth.points if smooth is not None else ()

    xs = [p.age_days for p in series.points] + [p.age_days for p in smooth_pts]
    ys = [p.rate for p in series.points]
    ys += [v for p in smooth_pts for v in (p.ci_low, p.ci_high)]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo = min(0.0, min(ys))
    y_hi = max(ys)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_ticks = nice_ticks(x_lo, x_hi)
    y_ticks = nice_ticks(y_lo, y_hi)
    x_lo, x_hi = min(x_lo, x_ticks[0]), max(x_hi, x_ticks[-1])
    y_lo, y_hi = min(y_lo, y_ticks[0]), max(y_hi, y_ticks[-1])

    s = style
    left, top = s.margin_left, s.margin_top
    pw = s.width - s.margin_left - s.margin_right
    ph = s.height - s.margin_top - s.margin_bottom
    bottom = top + ph

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return bottom - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" height="{s.height}" '
        f'viewBox="0 0 {s.width} {s.height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{s.width}" height="{s.height}" fill="white"/>',
    ]
    if s.title:
        out.append(f'<text x="{s.width / 2:.2f}" y="{top / 2 + 6:.2f}" text-anchor="middle" font-size="14">{escape(s.title)}</text>')

    out.append('<g class="axes" stroke="black" stroke-width="1">')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{left + pw}" y2="{bottom}"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>')
    for t in x_ticks:
        x = _fmt(sx(t))
        out.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 5}"/>')
    for t in y_ticks:
        y = _fmt(sy(t))
        out.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}"/>')
    out.append("</g>")

    out.append('<g class="tick-labels">')
    for t in x_ticks:
        out.append(f'<text x="{_fmt(sx(t))}" y="{bottom + 18}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in y_ticks:
        out.append(f'<text x="{left - 8}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{_tick_label(t)}</text>')
    out.append("</g>")
    out.append(f'<text x="{left + pw / 2:.2f}" y="{s.height - 12}" text-anchor="middle">{escape(s.x_label)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(s.y_label)}</text>'
    )

    if smooth_pts:
        upper = [f"{_fmt(sx(p.age_days))},{_fmt(sy(p.ci_high))}" for p in smooth_pts]
        lower = [f"{_fmt(sx(p.age_days))},{_fmt(sy(p.ci_low))}" for p in reversed(smooth_pts)]
        out.append(
            f'<polygon class="band" points="{" ".join(upper + lower)}" '
            f'fill="{s.band_color}" fill-opacity="{s.band_opacity}" stroke="none"/>'
        )

    out.append('<g class="points">')
    for p in series.points:
        cx, cy = _fmt(sx(p.age_days)), _fmt(sy(p.rate))
        if p.low_support:
            out.append(
                f'<circle cx="{cx}" cy="{cy}" r="{s.dot_radius}" fill="none" stroke="{s.dot_color}"/>'
            )
        else:
            out.append(f'<circle cx="{cx}" cy="{cy}" r="{s.dot_radius}" fill="{s.dot_color}"/>')
    out.append("</g>")

    if len(smooth_pts) >= 2:
        line = " ".join(f"{_fmt(sx(p.age_days))},{_fmt(sy(p.fitted))}" for p in smooth_pts)
        out.append(
            f'<polyline class="smooth" points="{line}" fill="none" stroke="{s.line_color}" stroke-width="2"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
