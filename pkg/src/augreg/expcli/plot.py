"""Standalone SVG line plots: trial medians with inter-quartile bands."""
from collections import defaultdict
from dataclasses import dataclass
from html import escape

import numpy as np

from ..errors import IoError, UnknownColumn

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 50


@dataclass
class PlotSpec:
    x: str
    y: list
    group_by: str = None
    logx: bool = False
    logy: bool = False
    title: str = ""


def series_stats(table, spec):
    """{label: (xs, q25, median, q75)} aggregated over rows sharing an x value."""
    for col in [spec.x, *spec.y] + ([spec.group_by] if spec.group_by else []):
        if col not in table.columns:
            raise UnknownColumn(f"no column {col!r}; have {table.columns}")
    xi = table.columns.index(spec.x)
    gi = table.columns.index(spec.group_by) if spec.group_by else None
    out = {}
    for ycol in spec.y:
        yi = table.columns.index(ycol)
        groups = defaultdict(lambda: defaultdict(list))
        order = []
        for row in table.rows:
            g = row[gi] if gi is not None else None
            if g not in groups:
                order.append(g)
            groups[g][float(row[xi])].append(float(row[yi]))
        for g in order:
            xs = sorted(groups[g])
            vals = [np.asarray(groups[g][x]) for x in xs]
            q = np.array([np.percentile(v, [25, 50, 75]) for v in vals])
            if gi is None:
                label = ycol
            else:
                label = f"{spec.group_by}={g}" if len(spec.y) == 1 else f"{ycol} {spec.group_by}={g}"
            out[label] = (np.array(xs), q[:, 0], q[:, 1], q[:, 2])
    return out


def _scale(lo, hi, log, a, b):
    if log:
        lo, hi = np.log10(lo), np.log10(hi)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5

    def f(v):
        v = np.log10(v) if log else v
        return a + (v - lo) / (hi - lo) * (b - a)

    return f, lo, hi


def _ticks(lo, hi, log):
    if log:
        return [10.0**e for e in range(int(np.floor(lo)), int(np.ceil(hi)) + 1) if lo - 1e-9 <= e <= hi + 1e-9]
    return list(np.linspace(lo, hi, 5))


def render_svg(table, spec):
    stats = series_stats(table, spec)
    allx = np.concatenate([s[0] for s in stats.values()]) if stats else np.array([1.0])
    ally = np.concatenate([np.r_[s[1], s[3]] for s in stats.values()]) if stats else np.array([1.0])
    if spec.logx:
        allx = allx[allx > 0]
    if spec.logy:
        ally = ally[ally > 0]
    fx, xlo, xhi = _scale(allx.min(), allx.max(), spec.logx, LEFT, WIDTH - RIGHT)
    fy, ylo, yhi = _scale(ally.min(), ally.max(), spec.logy, HEIGHT - BOTTOM, TOP)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" height="{HEIGHT - TOP - BOTTOM}" '
        'fill="none" stroke="black"/>',
    ]
    if spec.title:
        parts.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle">{escape(spec.title)}</text>')
    for t in _ticks(xlo, xhi, spec.logx):
        px = fx(t)
        parts.append(f'<line class="xtick" x1="{px:.2f}" y1="{HEIGHT - BOTTOM}" x2="{px:.2f}" y2="{HEIGHT - BOTTOM + 4}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{HEIGHT - BOTTOM + 16}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(ylo, yhi, spec.logy):
        py = fy(t)
        parts.append(f'<line class="ytick" x1="{LEFT - 4}" y1="{py:.2f}" x2="{LEFT}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{LEFT - 6}" y="{py + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    parts.append(
        f'<text class="xlabel" x="{(LEFT + WIDTH - RIGHT) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">'
        f'{escape(spec.x)}{" (log)" if spec.logx else ""}</text>'
    )
    ylabel = ", ".join(spec.y)
    parts.append(
        f'<text class="ylabel" transform="translate(16 {(TOP + HEIGHT - BOTTOM) / 2:.1f}) rotate(-90)" '
        f'text-anchor="middle">{escape(ylabel)}{" (log)" if spec.logy else ""}</text>'
    )
    for i, (label, (xs, q1, med, q3)) in enumerate(stats.items()):
        color = PALETTE[i % len(PALETTE)]
        keep = np.ones(xs.size, dtype=bool)
        if spec.logx:
            keep &= xs > 0
        if spec.logy:
            keep &= (q1 > 0) & (med > 0)
        xs, q1, med, q3 = xs[keep], q1[keep], med[keep], q3[keep]
        upper = " ".join(f"{fx(x):.2f},{fy(v):.2f}" for x, v in zip(xs, q3))
        lower = " ".join(f"{fx(x):.2f},{fy(v):.2f}" for x, v in zip(xs[::-1], q1[::-1]))
        parts.append(f'<polygon class="iqr" points="{upper} {lower}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{fx(x):.2f},{fy(v):.2f}" for x, v in zip(xs, med))
        parts.append(f'<polyline class="median" points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 14 + 16 * i
        lx = WIDTH - RIGHT + 10
        parts.append(
            f'<g class="legend-entry"><line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/><text x="{lx + 22}" y="{ly}">{escape(str(label))}</text></g>'
        )
    parts.append("</svg>\n")
    return "\n".join(parts)


def emit_plot(table, spec, path):
    """Write an SVG of trial medians (lines) and inter-quartile ranges (bands)."""
    text = render_svg(table, spec)
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
