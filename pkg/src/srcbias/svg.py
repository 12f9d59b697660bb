"""Static SVG charts: grouped bars for delta reports, scatter for 2-D projections."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _frame(width: int, height: int, title: str, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join(
        [
            head,
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
            *body,
            "</svg>",
            "",
        ]
    )


def _legend(names: Sequence[str], x: float, y: float) -> list[str]:
    out = []
    for i, name in enumerate(names):
        yy = y + 16 * i
        out.append(f'<rect x="{_fmt(x)}" y="{_fmt(yy - 9)}" width="10" height="10" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{_fmt(x + 14)}" y="{_fmt(yy)}">{escape(name)}</text>')
    return out


def bar_chart(groups: Sequence[str], series: dict[str, Sequence[float]], title: str = "") -> str:
    """Grouped vertical bars around a zero line; one color per series."""
    width, height = 120 + 90 * max(len(groups), 1), 340
    left, right, top, bottom = 50, 110, 32, 40
    plot_w, plot_h = width - left - right, height - top - bottom
    values = [v for vs in series.values() for v in vs] or [0.0]
    hi = max(max(values), 0.0)
    lo = min(min(values), 0.0)
    if hi == lo:
        hi, lo = 1.0, -1.0
    span = hi - lo

    def y(v: float) -> float:
        return top + (hi - v) / span * plot_h

    body = [f'<line x1="{left}" y1="{_fmt(y(0))}" x2="{left + plot_w}" y2="{_fmt(y(0))}" stroke="black"/>']
    for tick in (lo, 0.0, hi):
        body.append(f'<text x="{left - 4}" y="{_fmt(y(tick) + 4)}" text-anchor="end">{_fmt(tick)}</text>')
    slot = plot_w / max(len(groups), 1)
    bar_w = slot * 0.8 / max(len(series), 1)
    for gi, g in enumerate(groups):
        x0 = left + gi * slot + slot * 0.1
        for si, (name, vs) in enumerate(series.items()):
            v = vs[gi]
            top_y, bot_y = sorted((y(v), y(0)))
            body.append(
                f'<rect x="{_fmt(x0 + si * bar_w)}" y="{_fmt(top_y)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(bot_y - top_y)}" fill="{PALETTE[si % len(PALETTE)]}">'
                f"<title>{escape(name)} {escape(g)}: {_fmt(v)}</title></rect>"
            )
        body.append(
            f'<text x="{_fmt(left + (gi + 0.5) * slot)}" y="{height - bottom + 16}" '
            f'text-anchor="middle">{escape(g)}</text>'
        )
    body += _legend(list(series), left + plot_w + 10, top + 10)
    return _frame(width, height, title, body)


def scatter_plot(points: Sequence[tuple[float, float, str]], title: str = "") -> str:
    """Scatter of ``(x, y, label)`` points, colored by label in first-seen order."""
    width, height = 480, 400
    left, right, top, bottom = 40, 110, 32, 30
    plot_w, plot_h = width - left - right, height - top - bottom
    xs = [p[0] for p in points] or [0.0]
    ys = [p[1] for p in points] or [0.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    labels: list[str] = []
    for p in points:
        if p[2] not in labels:
            labels.append(p[2])
    body = [f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999"/>']
    for x, yv, lbl in points:
        cx = left + (x - x_lo) / x_span * plot_w
        cy = top + (y_hi - yv) / y_span * plot_h
        color = PALETTE[labels.index(lbl) % len(PALETTE)]
        body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.5" fill="{color}" fill-opacity="0.7"/>')
    body += _legend(labels, left + plot_w + 10, top + 10)
    return _frame(width, height, title, body)
