"""Hand-written SVG figures for sweep results.

Layout: a 640-px-wide canvas with stacked panels sharing a log-scaled x
axis.  The top panel holds train error, test error and the bound (clipped
to [0, 1]); below it sits the squared norm, and for SVM sweeps a panel with
the support-vector count.  Curves are per-axis-value means; with more than
one seed the test-error min-max band is shaded.  All coordinates are
printed with two decimals, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

from .experiments import SVM, SweepResult, aggregate

WIDTH_PX = 640
PANEL_PX = 200
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 24, 36
COLORS = {"train": "#1f77b4", "test": "#d62728", "bound": "#2ca02c", "norm": "#9467bd", "sv": "#8c564b"}


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Panel:
    def __init__(self, top: float, xlo: float, xhi: float, ylo: float, yhi: float):
        self.top, self.xlo, self.xhi, self.ylo, self.yhi = top, xlo, xhi, ylo, yhi

    def x(self, v: float) -> float:
        span = math.log10(self.xhi) - math.log10(self.xlo) or 1.0
        return MARGIN_L + (math.log10(v) - math.log10(self.xlo)) / span * (WIDTH_PX - MARGIN_L - MARGIN_R)

    def y(self, v: float) -> float:
        span = (self.yhi - self.ylo) or 1.0
        v = min(max(v, self.ylo), self.yhi)
        return self.top + PANEL_PX - (v - self.ylo) / span * PANEL_PX


def _nice_max(v: float) -> float:
    if not math.isfinite(v) or v <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(v))
    for step in (1, 2, 2.5, 5, 10):
        if v <= step * mag:
            return step * mag
    return 10 * mag


def _polyline(panel: _Panel, xs, ys, color: str, dash: str = "") -> str:
    pts = [f"{panel.x(x):.2f},{panel.y(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y)]
    if not pts:
        return ""
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{extra} points="{" ".join(pts)}"/>'


def _band(panel: _Panel, xs, lo, hi, color: str) -> str:
    keep = [(x, a, b) for x, a, b in zip(xs, lo, hi) if math.isfinite(a) and math.isfinite(b)]
    if len(keep) < 2:
        return ""
    up = [f"{panel.x(x):.2f},{panel.y(b):.2f}" for x, _, b in keep]
    down = [f"{panel.x(x):.2f},{panel.y(a):.2f}" for x, a, _ in reversed(keep)]
    return f'<polygon fill="{color}" fill-opacity="0.15" stroke="none" points="{" ".join(up + down)}"/>'


def _axes(panel: _Panel, ylabel: str, show_x: bool, xlabel: str) -> list[str]:
    left, right = MARGIN_L, WIDTH_PX - MARGIN_R
    top, bottom = panel.top, panel.top + PANEL_PX
    out = [f'<rect x="{left}" y="{top:.2f}" width="{right - left}" height="{PANEL_PX}" fill="none" stroke="#000"/>']
    for k in range(5):
        v = panel.ylo + k * (panel.yhi - panel.ylo) / 4
        y = panel.y(v)
        out.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#000"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    e = math.ceil(math.log10(panel.xlo) - 1e-12)
    while 10**e <= panel.xhi * (1 + 1e-12):
        x = panel.x(10**e)
        out.append(f'<line x1="{x:.2f}" y1="{bottom:.2f}" x2="{x:.2f}" y2="{bottom + 4:.2f}" stroke="#000"/>')
        if show_x:
            out.append(f'<text x="{x:.2f}" y="{bottom + 16:.2f}" text-anchor="middle">{10**e:g}</text>')
        e += 1
    cy = top + PANEL_PX / 2
    out.append(f'<text x="14" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 14 {cy:.2f})">{_esc(ylabel)}</text>')
    if show_x:
        out.append(f'<text x="{(left + right) / 2:.2f}" y="{bottom + 32:.2f}" text-anchor="middle">{_esc(xlabel)}</text>')
    return out


def _series(result: SweepResult, width: int | None):
    xs, cols = [], {k: ([], [], []) for k in ("train_error", "test_error", "bound", "norm_sq", "n_support")}
    for (w, value), rows in sorted(result.groups().items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if width is not None and w != width:
            continue
        xs.append(value)
        for name, (mean, lo, hi) in cols.items():
            vals = [float(r.n_support) if r.n_support is not None else math.nan for r in rows] if name == "n_support" \
                else [getattr(r, name) for r in rows]
            m, a, b = aggregate(vals)
            mean.append(m)
            lo.append(a)
            hi.append(b)
    return xs, cols


def render_svg(result: SweepResult, path=None, style: str = "default", title: str | None = None) -> str:
    """Return the SVG text; also write it to ``path`` when given.

    ``style="single"`` suppresses the seed band (the look of a single run).
    For epoch sweeps with several widths, only the widest network is drawn.
    """
    if not result.rows:
        raise ValueError("nothing to plot")
    cfg = result.config
    width = max(cfg.widths) if cfg.axis == "epochs" else None
    xs, cols = _series(result, width)
    xlo, xhi = min(xs), max(xs)
    if xhi == xlo:
        xlo, xhi = xlo / 2, xhi * 2
    xlabel = {"width": "number of features N", "epochs": "epoch", "samples": "training samples n"}[cfg.axis]
    panels = ["errors", "norm"] + (["sv"] if cfg.learner == SVM else [])
    height = MARGIN_T + len(panels) * (PANEL_PX + MARGIN_B) + 8
    label = title or f"{cfg.learner} {cfg.axis} sweep ({cfg.variant}, a1={cfg.a1:g}, a2={cfg.a2:g})"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH_PX}" height="{height}" '
        f'viewBox="0 0 {WIDTH_PX} {height}" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="#fff"/>',
        f'<text x="{WIDTH_PX / 2:.2f}" y="16" text-anchor="middle" font-size="13">{_esc(label)}</text>',
    ]
    for k, name in enumerate(panels):
        top = MARGIN_T + k * (PANEL_PX + MARGIN_B)
        last = k == len(panels) - 1
        if name == "errors":
            tops = [v for key in ("train_error", "test_error", "bound") for v in cols[key][0] if math.isfinite(v)]
            p = _Panel(top, xlo, xhi, 0.0, min(1.0, _nice_max(max(tops, default=1.0))))
            out += _axes(p, "error", last, xlabel)
            if style != "single" and len(cfg.seeds) > 1:
                out.append(_band(p, xs, cols["test_error"][1], cols["test_error"][2], COLORS["test"]))
            out.append(_polyline(p, xs, cols["train_error"][0], COLORS["train"]))
            out.append(_polyline(p, xs, cols["test_error"][0], COLORS["test"]))
            out.append(_polyline(p, xs, cols["bound"][0], COLORS["bound"], dash="5,3"))
            for j, (key, text) in enumerate((("train", "train"), ("test", "test"), ("bound", "VC bound"))):
                lx = WIDTH_PX - MARGIN_R - 90
                ly = top + 14 + 14 * j
                out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{COLORS[key]}" stroke-width="2"/>')
                out.append(f'<text x="{lx + 22}" y="{ly}">{text}</text>')
        else:
            key = "norm_sq" if name == "norm" else "n_support"
            vals = [v for v in cols[key][0] if math.isfinite(v)]
            p = _Panel(top, xlo, xhi, 0.0, _nice_max(max(vals, default=1.0)))
            out += _axes(p, "norm squared" if name == "norm" else "support vectors", last, xlabel)
            out.append(_polyline(p, xs, cols[key][0], COLORS["norm" if name == "norm" else "sv"]))
    out.append("</svg>")
    text = "\n".join(s for s in out if s) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
