"""Static SVG emission: per-input panels and the patch-map grid.

The emitter builds SVG documents by hand (no plotting dependency) so that
identical reports produce byte-identical files. Panels show the spectrum
bars (singular values for the linear regime, Err(p) plus scaled dashed
singular-value bars for the nonlinear one) next to a patch inset with the
first motor direction drawn solid red (id="z1") and the second dashed blue
(id="z2").
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .cli import RunReport

_SVG_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _svg_open(width: float, height: float) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">\n'
    )


def _rect(x, y, w, h, fill, extra="") -> str:
    return (
        f'  <rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
        f'height="{_fmt(h)}" fill="{fill}"{extra}/>\n'
    )


def _line(x1, y1, x2, y2, stroke, extra="") -> str:
    return (
        f'  <line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
        f'y2="{_fmt(y2)}" stroke="{stroke}"{extra}/>\n'
    )


def _text(x, y, content, size=10) -> str:
    return (
        f'  <text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
        f'font-family="sans-serif">{content}</text>\n'
    )


def _bars(values, x0, baseline, bar_w, gap, height, fill, dashed=False) -> str:
    vmax = max((abs(v) for v in values), default=0.0)
    scale = height / vmax if vmax > 0 else 0.0
    out = []
    for j, v in enumerate(values):
        h = abs(v) * scale
        x = x0 + j * (bar_w + gap)
        if dashed:
            extra = ' stroke="steelblue" stroke-dasharray="3,2" fill-opacity="0"'
            out.append(_rect(x, baseline - h, bar_w, h, fill, extra))
        else:
            out.append(_rect(x, baseline - h, bar_w, h, fill))
    return "".join(out)


def _direction_lines(cx, cy, radius, z1_angle, z2_angle) -> str:
    out = []
    if z1_angle is not None:
        dx, dy = radius * math.cos(z1_angle), -radius * math.sin(z1_angle)
        out.append(_line(cx - dx, cy - dy, cx + dx, cy + dy, "red", ' id="z1" stroke-width="2"'))
    if z2_angle is not None:
        dx, dy = radius * math.cos(z2_angle), -radius * math.sin(z2_angle)
        out.append(
            _line(
                cx - dx, cy - dy, cx + dx, cy + dy,
                "blue", ' id="z2" stroke-width="2" stroke-dasharray="6,4"',
            )
        )
    return "".join(out)


def _panel_svg(report: "RunReport", idx: int) -> str:
    char = report.characterizations[idx]
    spectrum = report.spectra[idx]
    z1 = report.z1_angles[idx]
    width, height = 400.0, 220.0
    baseline, bar_h = 190.0, 160.0
    parts = [_SVG_HEADER, _svg_open(width, height)]
    parts.append(_text(10, 16, f"input {char.input_id} ({char.regime})"))

    if char.regime == "nonlinear" and char.detail is not None:
        errs = [e for _, e in char.detail.err_curve]
        parts.append('  <g id="err_bars">\n')
        parts.append(_bars(errs, 20, baseline, 18, 8, bar_h, "darkorange"))
        parts.append("  </g>\n")
        parts.append('  <g id="sv_bars">\n')
        parts.append(_bars(list(spectrum), 140, baseline, 8, 4, bar_h, "none", dashed=True))
        parts.append("  </g>\n")
    else:
        parts.append('  <g id="sv_bars">\n')
        parts.append(_bars(list(spectrum), 20, baseline, 14, 6, bar_h, "gray"))
        parts.append("  </g>\n")
    parts.append(_line(15, baseline, 270, baseline, "black"))

    cx, cy, r = 330.0, 120.0, 55.0
    parts.append(_rect(cx - r, cy - r, 2 * r, 2 * r, "none", ' stroke="black"'))
    parts.append(_direction_lines(cx, cy, r, z1, char.invariant_angle))
    parts.append(_text(cx - r, cy + r + 16, f"verdict: {char.verdict}"))
    parts.append("</svg>\n")
    return "".join(parts)


def _map_svg(report: "RunReport") -> str:
    pm = report.patch_map
    cell = 36.0
    margin = 40.0
    if pm is None or not pm.cells:
        width = height = 2 * margin + cell
        return "".join(
            [
                _SVG_HEADER,
                _svg_open(width, height),
                _text(margin, margin, "empty patch map"),
                "</svg>\n",
            ]
        )
    n_u, n_a = pm.n_u_bins, pm.n_angle_bins
    width = 2 * margin + n_u * cell
    height = 2 * margin + n_a * cell
    angle_by_id = {
        c.input_id: c.invariant_angle for c in report.characterizations
    }
    parts = [_SVG_HEADER, _svg_open(width, height)]
    parts.append(_text(margin, margin - 16, "uniformity quantile (left: most uniform)"))
    for ub in range(n_u):
        for ab in range(n_a):
            x = margin + ub * cell
            y = margin + ab * cell
            iid = pm.cells.get((ub, ab))
            fill = "white" if iid is None else "#dce6f2"
            parts.append(_rect(x, y, cell, cell, fill, ' stroke="#999"'))
            if iid is None:
                continue
            angle = angle_by_id.get(iid)
            if angle is not None:
                r = cell * 0.42
                cx, cy = x + cell / 2, y + cell / 2
                dx, dy = r * math.cos(angle), -r * math.sin(angle)
                parts.append(
                    _line(cx - dx, cy - dy, cx + dx, cy + dy, "black", ' class="orient"')
                )
    parts.append("</svg>\n")
    return "".join(parts)


def emit_plots(report: "RunReport", output_dir) -> list[Path]:
    """Write panel SVGs for a subset of inputs plus the patch-map grid.

    The subset size comes from report.config.plot_samples; inputs are taken
    evenly across the run so the panels span the uniformity range the way
    the ensemble was drawn. Returns the written paths.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_chars = len(report.characterizations)
    n_panels = min(report.config.plot_samples, n_chars)
    paths = []
    if n_panels > 0:
        picks = sorted(set(np.linspace(0, n_chars - 1, num=n_panels).astype(int)))
        for idx in picks:
            char = report.characterizations[idx]
            path = out / f"panel_{char.input_id:04d}.svg"
            path.write_text(_panel_svg(report, idx), encoding="utf-8")
            paths.append(path)
    map_path = out / "patch_map.svg"
    map_path.write_text(_map_svg(report), encoding="utf-8")
    paths.append(map_path)
    return paths
