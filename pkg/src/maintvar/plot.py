"""Dependency-free SVG line charts of actual vs forecast generation."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from maintvar.errors import EmptySeries

WIDTH, HEIGHT = 800, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _n(v: float) -> str:
    return f"{v:.2f}"


def render_svg(series: Sequence[tuple], title: str = "", y_label: str = "Total generation (kWh)") -> str:
    """SVG text for a (date, actual, forecast) sequence."""
    if not series:
        raise EmptySeries("cannot plot an empty series")
    dates = [str(d) for d, _, _ in series]
    actual = [float(a) for _, a, _ in series]
    fc = [float(f) for _, _, f in series]
    lo, hi = min(actual + fc), max(actual + fc)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    n = len(series)

    def x(i):
        return LEFT + (pw * i / (n - 1) if n > 1 else pw / 2)

    def y(v):
        return TOP + ph * (hi - v) / (hi - lo)

    def points(vals):
        return " ".join(f"{_n(x(i))},{_n(y(v))}" for i, v in enumerate(vals))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = lo + frac * (hi - lo)
        out.append(
            f'<text x="{LEFT - 6}" y="{_n(y(v) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.1f}</text>'
        )
    for i in sorted({0, n // 2, n - 1}):
        out.append(
            f'<text x="{_n(x(i))}" y="{TOP + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{escape(dates[i])}</text>'
        )
    out += [
        f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">Date</text>',
        f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {TOP + ph / 2})">{escape(y_label)}</text>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{points(actual)}"/>',
        f'<polyline fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="6 3" points="{points(fc)}"/>',
        f'<line x1="{WIDTH - 170}" y1="52" x2="{WIDTH - 140}" y2="52" stroke="#1f77b4" stroke-width="2"/>',
        f'<text x="{WIDTH - 134}" y="56" font-family="sans-serif" font-size="12">Actual</text>',
        f'<line x1="{WIDTH - 170}" y1="70" x2="{WIDTH - 140}" y2="70" stroke="#d62728" stroke-width="2" stroke-dasharray="6 3"/>',
        f'<text x="{WIDTH - 134}" y="74" font-family="sans-serif" font-size="12">Forecast</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def emit_plot(series: Sequence[tuple], path: str | Path, title: str = "") -> Path:
    path = Path(path)
    path.write_text(render_svg(series, title), encoding="utf-8")
    return path
