"""Convergence tables, CSV output and log-log SVG plots."""

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def observed_orders(h, errors):
    """log(e_l / e_{l+1}) / log(h_l / h_{l+1}); nan for the first level.

    With exact halving of h this is log2(e_l / e_{l+1}).
    """
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    out = np.full(len(e), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:] = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    return out


def fitted_order(h, errors):
    """Least-squares slope of log(error) against log(h)."""
    if len(h) < 2:
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(errors), 1)[0])


@dataclass
class ConvergenceReport:
    experiment: str
    element: str
    domain: str
    solution: str
    norms: list
    labels: list = field(default_factory=list)
    h: list = field(default_factory=list)
    n_dof: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add_row(self, label, h, n_dof, **errors):
        if self.h and not h < self.h[-1]:
            raise ValueError("h must decrease from row to row")
        self.labels.append(label)
        self.h.append(float(h))
        self.n_dof.append(int(n_dof))
        for name in self.norms:
            self.errors.setdefault(name, []).append(float(errors[name]))

    def orders(self, name):
        return observed_orders(self.h, self.errors[name])

    def fitted(self, name):
        return fitted_order(self.h, self.errors[name])

    def __len__(self):
        return len(self.h)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["level", "h", "n_dof"]
        for name in self.norms:
            header += [name, f"order_{name}"]
        w.writerow(header)
        orders = {n: self.orders(n) for n in self.norms}
        for i in range(len(self)):
            row = [i, f"{self.h[i]:.10e}", self.n_dof[i]]
            for n in self.norms:
                o = orders[n][i]
                row += [f"{self.errors[n][i]:.10e}", "" if math.isnan(o) else f"{o:.4f}"]
            w.writerow(row)
        return buf.getvalue()

    def format_table(self):
        head = f"{'grid':>9} {'h':>10} {'dofs':>7}"
        for n in self.norms:
            head += f" {n:>12} {'order':>6}"
        lines = [f"{self.experiment}: {self.element} on {self.domain}, exact {self.solution}",
                 head]
        orders = {n: self.orders(n) for n in self.norms}
        for i in range(len(self)):
            line = f"{self.labels[i]:>9} {self.h[i]:10.4e} {self.n_dof[i]:7d}"
            for n in self.norms:
                o = orders[n][i]
                line += f" {self.errors[n][i]:12.4e} {'' if math.isnan(o) else f'{o:6.2f}':>6}"
            lines.append(line)
        if len(self) >= 2:
            fit = "  ".join(f"{n}: {self.fitted(n):.2f}" for n in self.norms)
            lines.append(f"least-squares orders  {fit}")
        return "\n".join(lines)


def write_csv(report, path):
    Path(path).write_text(report.to_csv())


# SVG plotting

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_DASHES = ("", "6,4", "2,3", "8,3,2,3", "1,2")
W, H = 640, 480
ML, MR, MT, MB = 80, 170, 30, 60


def _ticks(lo, hi):
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def plot_coordinates(report):
    """Map (log10 h, log10 err) to SVG user units; returns the transform data."""
    lx = np.log10(report.h)
    ly = np.concatenate([np.log10(report.errors[n]) for n in report.norms])
    x0, x1 = math.floor(lx.min() * 2) / 2, math.ceil(lx.max() * 2) / 2
    y0, y1 = math.floor(ly.min() * 2) / 2, math.ceil(ly.max() * 2) / 2
    if x1 == x0:
        x1 += 0.5
    if y1 == y0:
        y1 += 0.5

    def tx(v):
        return ML + (v - x0) / (x1 - x0) * (W - ML - MR)

    def ty(v):
        return MT + (y1 - v) / (y1 - y0) * (H - MT - MB)

    return (x0, x1, y0, y1), tx, ty


def render_svg(report):
    if len(report) < 2:
        raise ValueError("plot needs at least two levels")
    (x0, x1, y0, y1), tx, ty = plot_coordinates(report)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" '
        f'height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<g font-family="sans-serif" font-size="12">',
        f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            X = tx(t)
            out.append(f'<line x1="{X:.2f}" y1="{H - MB}" x2="{X:.2f}" y2="{H - MB + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{H - MB + 18}" text-anchor="middle">1e{t}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            Y = ty(t)
            out.append(f'<line x1="{ML - 5}" y1="{Y:.2f}" x2="{ML}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{ML - 8}" y="{Y + 4:.2f}" text-anchor="end">1e{t}</text>')
    out.append(f'<text x="{(ML + W - MR) / 2:.1f}" y="{H - 15}" text-anchor="middle">h</text>')
    out.append(f'<text x="18" y="{(MT + H - MB) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(MT + H - MB) / 2:.1f})">error</text>')
    lx = np.log10(report.h)
    for k, name in enumerate(report.norms):
        ly = np.log10(report.errors[name])
        pts = " ".join(f"{tx(a):.3f},{ty(b):.3f}" for a, b in zip(lx, ly))
        dash = _DASHES[k % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline class="norm" data-norm="{name}" points="{pts}" '
                   f'fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>')
        for a, b in zip(lx, ly):
            out.append(f'<circle cx="{tx(a):.3f}" cy="{ty(b):.3f}" r="3" fill="{color}"/>')
        ly_leg = MT + 20 + 20 * k
        out.append(f'<line x1="{W - MR + 15}" y1="{ly_leg}" x2="{W - MR + 45}" '
                   f'y2="{ly_leg}" stroke="{color}" stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{W - MR + 50}" y="{ly_leg + 4}">{name}</text>')
    # reference slope triangles along the bottom of the axes
    span = 0.2 * (x1 - x0)
    ya = y0 + 0.05 * (y1 - y0)
    for j, slope in enumerate((1, 2)):
        xa = x0 + (0.05 + 0.45 * j) * (x1 - x0)
        xb = xa + span
        yb = ya + slope * span
        if yb > y1:
            yb = y1
            xb = xa + (yb - ya) / slope
        pts = f"{tx(xa):.3f},{ty(ya):.3f} {tx(xb):.3f},{ty(ya):.3f} {tx(xb):.3f},{ty(yb):.3f}"
        out.append(f'<polygon class="reference" data-slope="{slope}" points="{pts}" '
                   'fill="none" stroke="gray"/>')
        out.append(f'<text x="{tx(xb) + 4:.2f}" y="{ty((ya + yb) / 2):.2f}" '
                   f'fill="gray">{slope}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(report, path):
    svg = render_svg(report)
    Path(path).write_text(svg)
    return Path(path)
