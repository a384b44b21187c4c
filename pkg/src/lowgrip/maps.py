"""Decision-map output: CSV table and a self-contained SVG rendering."""

from __future__ import annotations

from typing import List, Sequence
from xml.sax.saxutils import escape

from .core import HardSurface, ManeuverId
from .io import _text, fmt
from .predictor import DeformableMapGrid, HardMapGrid, MapCell

COLORS = {
    ManeuverId.Brake100: "#1f77b4",
    ManeuverId.BrakeABS: "#ff7f0e",
    ManeuverId.Turn100: "#2ca02c",
    ManeuverId.Turn100Brake100: "#d62728",
    ManeuverId.Turn100BrakeABS: "#9467bd",
}

PRED_COLUMNS = tuple(f"d_hat_{int(m)}" for m in ManeuverId)
HARD_MAP_COLUMNS = ("v_mps", "mu", "maneuver_ordinal") + PRED_COLUMNS
DEFORMABLE_MAP_COLUMNS = ("v_mps", "z_m", "c_kpa", "phi_deg", "maneuver_ordinal") + PRED_COLUMNS


def map_to_csv(cells: Sequence[MapCell]) -> str:
    if cells and isinstance(cells[0].ground, HardSurface):
        rows = ([fmt(c.v_mps), fmt(c.ground.mu), str(int(c.maneuver))] + [fmt(d) for d in c.predicted]
                for c in cells)
        return _text(rows, HARD_MAP_COLUMNS)
    rows = ([fmt(c.v_mps), fmt(c.ground.sinkage_m), fmt(round(c.ground.cohesion_kpa, 9)),
             fmt(round(c.ground.shear_angle_deg, 9)), str(int(c.maneuver))] + [fmt(d) for d in c.predicted]
            for c in cells)
    return _text(rows, DEFORMABLE_MAP_COLUMNS)


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _panel(out: List[str], x0: float, y0: float, w: float, h: float, labels, xs: Sequence[float],
           ys: Sequence[float], xlabel: str, ylabel: str, title: str) -> None:
    """One heat-map panel; ``labels[j][i]`` is the ordinal at (xs[i], ys[j])."""
    nx, ny = len(xs), len(ys)
    cw, ch = w / nx, h / ny
    out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 - 8:.1f}" style="font:13px sans-serif;text-anchor:middle">'
               f'{escape(title)}</text>')
    for j in range(ny):
        for i in range(nx):
            m = ManeuverId(labels[j][i])
            # y grows upward
            out.append(f'<rect x="{x0 + i * cw:.2f}" y="{y0 + (ny - 1 - j) * ch:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" style="fill:{COLORS[m]};stroke:none"/>')
    out.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" style="fill:none;stroke:#333;stroke-width:1"/>')
    for i in sorted({0, nx // 2, nx - 1}):
        out.append(f'<text x="{x0 + (i + 0.5) * cw:.1f}" y="{y0 + h + 14:.1f}" '
                   f'style="font:11px sans-serif;text-anchor:middle">{_num(xs[i])}</text>')
    for j in sorted({0, ny // 2, ny - 1}):
        out.append(f'<text x="{x0 - 4:.1f}" y="{y0 + (ny - 1 - j + 0.5) * ch + 4:.1f}" '
                   f'style="font:11px sans-serif;text-anchor:end">{_num(ys[j])}</text>')
    out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 + h + 30:.1f}" style="font:12px sans-serif;text-anchor:middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="{x0 - 34:.1f}" y="{y0 + h / 2:.1f}" style="font:12px sans-serif;text-anchor:middle" '
               f'transform="rotate(-90 {x0 - 34:.1f} {y0 + h / 2:.1f})">{escape(ylabel)}</text>')


def _legend(out: List[str], x0: float, y0: float) -> None:
    for k, m in enumerate(ManeuverId):
        y = y0 + 20 * k
        out.append(f'<rect x="{x0}" y="{y}" width="14" height="14" style="fill:{COLORS[m]};stroke:#333"/>')
        out.append(f'<text x="{x0 + 20}" y="{y + 11}" style="font:12px sans-serif">'
                   f'({int(m)}) {escape(m.label)}</text>')


def map_to_svg(cells: Sequence[MapCell], grid) -> str:
    pw, ph, margin = 260.0, 220.0, 60.0
    out: List[str] = []
    if isinstance(grid, HardMapGrid):
        expected = len(grid.v_values) * len(grid.mu_values)
    elif isinstance(grid, DeformableMapGrid):
        expected = len(grid.v_values) * len(grid.c_kpa_values) * len(grid.phi_deg_values)
    else:
        raise TypeError("unknown grid type")
    if len(cells) != expected:
        raise ValueError(f"{len(cells)} cells do not match the {expected}-cell grid")
    if isinstance(grid, HardMapGrid):
        nx, ny = len(grid.v_values), len(grid.mu_values)
        labels = [[int(cells[j * nx + i].maneuver) for i in range(nx)] for j in range(ny)]
        panels = [(labels, grid.mu_values, "mu", "Hard ground")]
    else:
        nx, ny = len(grid.v_values), len(grid.c_kpa_values)
        per = nx * ny
        panels = []
        for k, phi in enumerate(grid.phi_deg_values):
            block = cells[k * per:(k + 1) * per]
            labels = [[int(block[j * nx + i].maneuver) for i in range(nx)] for j in range(ny)]
            panels.append((labels, grid.c_kpa_values, "c [kPa]",
                           f"phi = {_num(phi)} deg, z = {_num(grid.sinkage_m * 100)} cm"))
    width = margin + len(panels) * (pw + margin) + 190
    height = ph + 2 * margin + 10
    for k, (labels, ys, ylabel, title) in enumerate(panels):
        _panel(out, margin + k * (pw + margin), margin, pw, ph, labels, grid.v_values, ys,
               "v [m/s]", ylabel, title)
    _legend(out, margin + len(panels) * (pw + margin), margin)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
            f'viewBox="0 0 {width:.0f} {height:.0f}">')
    return "\n".join([head, f'<rect width="100%" height="100%" style="fill:#ffffff"/>'] + out + ["</svg>"]) + "\n"
