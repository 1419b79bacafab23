"""CSV/JSON serialization and SVG charts for theory grids and experiments."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import asdict, dataclass
from typing import Sequence

from .errors import DomainError, FormatError
from .montecarlo import CellResult, ExperimentConfig, ExperimentResult
from .theory import Mode, collision_prob_birthday_mode, collision_prob_exact

THEORY_HEADER = ["m", "k", "mode", "p", "log10_p"]
EXPERIMENT_HEADER = ["m", "k", "trials", "repeats", "empirical_mean", "empirical_std", "theoretical", "seed"]
MAX_SVG_BYTES = 2_000_000


class FigureKind(str, enum.Enum):
    SURFACE = "surface"
    LOG_SURFACE = "log_surface"
    EXPERIMENT_CURVES = "experiment_curves"


@dataclass(frozen=True)
class FigureSpec:
    which: FigureKind
    m_values: tuple[int, ...]
    k_values: tuple[int, ...]
    mode: Mode = Mode.STANDARD
    log_y: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "which", FigureKind(self.which))
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "m_values", tuple(self.m_values))
        object.__setattr__(self, "k_values", tuple(self.k_values))
        if not self.m_values or not self.k_values:
            raise DomainError("figure ranges must be non-empty")
        if self.which is FigureKind.LOG_SURFACE and not self.log_y:
            raise DomainError("a log surface needs log_y")


def figure_preset(number: int) -> FigureSpec:
    """Grid presets for figures 1-4."""
    if number == 1:
        return FigureSpec(FigureKind.SURFACE, tuple(range(1, 17)), tuple(range(0, 65)))
    if number == 2:
        return FigureSpec(FigureKind.LOG_SURFACE, tuple(range(128, 257, 8)), tuple(range(0, 65)), log_y=True)
    if number == 3:
        return FigureSpec(FigureKind.SURFACE, tuple(range(2, 17, 2)), tuple(range(0, 65)), Mode.BIRTHDAY)
    if number == 4:
        return FigureSpec(FigureKind.EXPERIMENT_CURVES, (4, 8, 12, 16), tuple(range(1, 17)), log_y=True)
    raise DomainError(f"no figure {number}; choose 1-4")


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_theory_grid(spec: FigureSpec) -> str:
    rows = []
    for m in sorted(set(spec.m_values)):
        for k in sorted(set(spec.k_values)):
            if spec.mode is Mode.BIRTHDAY:
                p = collision_prob_birthday_mode(m, k)
            else:
                p = collision_prob_exact(m, k)
            rows.append([m, k, spec.mode.value, _fmt(p), _fmt(math.log10(p))])
    return _write_csv(THEORY_HEADER, rows)


def emit_experiment_csv(result: ExperimentResult) -> str:
    if not result.cells:
        raise DomainError("experiment result has no cells")
    rows = [
        [c.m, c.k, c.trials, c.repeats, _fmt(c.empirical_mean), _fmt(c.empirical_std),
         _fmt(c.theoretical), result.seed]
        for c in sorted(result.cells, key=lambda c: (c.m, c.k))
    ]
    return _write_csv(EXPERIMENT_HEADER, rows)


def experiment_to_dict(result: ExperimentResult) -> dict:
    return {
        "config": asdict(result.config),
        "seed": result.seed,
        "started": result.started,
        "finished": result.finished,
        "engine": result.engine,
        "cells": [asdict(c) for c in result.cells],
    }


def experiment_from_dict(doc: dict) -> ExperimentResult:
    try:
        config = ExperimentConfig(**doc["config"])
        cells = tuple(
            CellResult(**{**c, "per_repeat": tuple(c["per_repeat"])}) for c in doc["cells"]
        )
        return ExperimentResult(config, cells, doc.get("started", ""), doc.get("finished", ""),
                                doc.get("engine", ""))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"not an experiment result document: {exc}") from None


def emit_experiment_json(result: ExperimentResult) -> str:
    return json.dumps(experiment_to_dict(result), indent=1) + "\n"


def load_experiment_json(text: str) -> ExperimentResult:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("experiment document must be a JSON object")
    return experiment_from_dict(doc)


def emit_experiment_report(result: ExperimentResult) -> tuple[str, str]:
    """CSV summary and the full JSON document for ``result``."""
    return emit_experiment_csv(result), emit_experiment_json(result)


# SVG rendering

_W, _H = 720, 480
_MARGIN = dict(left=70, right=150, top=40, bottom=50)
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
# viridis endpoints and midpoints, low to high
_RAMP = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)]


def _read_rows(data: str, needed: Sequence[str]) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(data))
    header = reader.fieldnames or []
    missing = [c for c in needed if c not in header]
    if missing:
        raise FormatError(f"CSV lacks columns: {', '.join(missing)}")
    rows = list(reader)
    if not rows:
        raise FormatError("CSV has no data rows")
    return rows


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    f = t - i
    a, b = _RAMP[i], _RAMP[i + 1]
    return "#%02x%02x%02x" % tuple(round(a[j] + (b[j] - a[j]) * f) for j in range(3))


def _svg_root(title: str) -> ET.Element:
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(_W), height=str(_H),
                     viewBox=f"0 0 {_W} {_H}")
    style = ET.SubElement(svg, "style")
    style.text = (
        "text{font-family:sans-serif;font-size:11px}"
        ".title{font-size:14px;font-weight:bold}"
        ".empirical{fill:none;stroke-width:1.6}"
        ".theory{fill:none;stroke-width:1.2;stroke-dasharray:5 3}"
        ".axis{stroke:#333;stroke-width:1}"
    )
    ET.SubElement(svg, "rect", width=str(_W), height=str(_H), fill="white")
    t = ET.SubElement(svg, "text", x=str(_W // 2), y="22", attrib={"class": "title", "text-anchor": "middle"})
    t.text = title
    return svg


def _text(parent: ET.Element, x: float, y: float, s: str, anchor: str = "middle") -> None:
    el = ET.SubElement(parent, "text", x=f"{x:.1f}", y=f"{y:.1f}", attrib={"text-anchor": anchor})
    el.text = s


def _axes(svg: ET.Element, xlabel: str, ylabel: str) -> tuple[float, float, float, float]:
    x0, x1 = _MARGIN["left"], _W - _MARGIN["right"]
    y0, y1 = _H - _MARGIN["bottom"], _MARGIN["top"]
    ET.SubElement(svg, "line", x1=str(x0), y1=str(y0), x2=str(x1), y2=str(y0), attrib={"class": "axis"})
    ET.SubElement(svg, "line", x1=str(x0), y1=str(y0), x2=str(x0), y2=str(y1), attrib={"class": "axis"})
    _text(svg, (x0 + x1) / 2, _H - 12, xlabel)
    lab = ET.SubElement(svg, "text", x="16", y=f"{(y0 + y1) / 2:.1f}",
                        transform=f"rotate(-90 16 {(y0 + y1) / 2:.1f})", attrib={"text-anchor": "middle"})
    lab.text = ylabel
    return x0, x1, y0, y1


def _render_curves(rows: list[dict[str, str]], spec: FigureSpec) -> ET.Element:
    svg = _svg_root("Empirical vs theoretical root-collision probability")
    x0, x1, y0, y1 = _axes(svg, "path length k", "P(r = r')" + (" (log scale)" if spec.log_y else ""))
    try:
        pts = [(int(r["m"]), int(r["k"]), float(r["empirical_mean"]), float(r["theoretical"])) for r in rows]
    except ValueError as exc:
        raise FormatError(f"bad numeric value in CSV: {exc}") from None
    ks = [p[1] for p in pts]
    positive = [v for p in pts for v in p[2:] if v > 0]
    if not positive:
        raise FormatError("no positive probabilities to plot")
    kmin, kmax = min(ks), max(ks)
    if spec.log_y:
        lo = math.floor(math.log10(min(positive)))
        hi = max(math.ceil(math.log10(max(positive))), lo + 1)
    else:
        lo, hi = 0.0, max(positive)

    def sx(k: float) -> float:
        return x0 + (k - kmin) / max(kmax - kmin, 1) * (x1 - x0)

    def sy(v: float) -> float:
        t = (math.log10(v) - lo) / (hi - lo) if spec.log_y else v / hi
        return y0 - t * (y0 - y1)

    if spec.log_y:
        for e in range(lo, hi + 1):
            _text(svg, x0 - 6, sy(10.0**e) + 4, f"1e{e}", "end")
    for k in sorted(set(ks)):
        _text(svg, sx(k), y0 + 16, str(k))

    for idx, m in enumerate(sorted({p[0] for p in pts})):
        series = sorted((p for p in pts if p[0] == m), key=lambda p: p[1])
        color = _PALETTE[idx % len(_PALETTE)]
        for kind, col in (("empirical", 2), ("theory", 3)):
            d, pen_down = [], False
            for p in series:
                v = p[col]
                if spec.log_y and v <= 0:
                    pen_down = False  # log(0): leave a gap
                    continue
                d.append(("L" if pen_down else "M") + f"{sx(p[1]):.2f},{sy(v):.2f}")
                pen_down = True
            ET.SubElement(svg, "path", d=" ".join(d), stroke=color,
                          attrib={"class": kind, "data-m": str(m)})
        ly = y1 + 14 + idx * 34
        ET.SubElement(svg, "line", x1=str(x1 + 12), y1=str(ly), x2=str(x1 + 36), y2=str(ly), stroke=color,
                      attrib={"class": "empirical"})
        _text(svg, x1 + 40, ly + 4, f"m={m} empirical", "start")
        ET.SubElement(svg, "line", x1=str(x1 + 12), y1=str(ly + 14), x2=str(x1 + 36), y2=str(ly + 14),
                      stroke=color, attrib={"class": "theory"})
        _text(svg, x1 + 40, ly + 18, f"m={m} theory", "start")
    return svg


def _render_heatmap(rows: list[dict[str, str]], spec: FigureSpec) -> ET.Element:
    title = "Root-collision probability"
    if spec.mode is Mode.BIRTHDAY:
        title += " (birthday attack)"
    svg = _svg_root(title + ", colour = log10 P")
    x0, x1, y0, y1 = _axes(svg, "path length k", "hash length m")
    try:
        cells = [(int(r["m"]), int(r["k"]), float(r["log10_p"])) for r in rows]
    except ValueError as exc:
        raise FormatError(f"bad numeric value in CSV: {exc}") from None
    ms = sorted({c[0] for c in cells})
    ks = sorted({c[1] for c in cells})
    vals = [c[2] for c in cells]
    vmin, vmax = min(vals), max(vals)
    span = (vmax - vmin) or 1.0
    cw = (x1 - x0) / len(ks)
    ch = (y0 - y1) / len(ms)
    mi = {m: i for i, m in enumerate(ms)}
    ki = {k: i for i, k in enumerate(ks)}
    grid = ET.SubElement(svg, "g", attrib={"class": "heatmap"})
    for m, k, v in cells:
        ET.SubElement(grid, "rect", x=f"{x0 + ki[k] * cw:.2f}", y=f"{y0 - (mi[m] + 1) * ch:.2f}",
                      width=f"{cw:.2f}", height=f"{ch:.2f}", fill=_color((v - vmin) / span))
    for i, m in enumerate(ms):
        if len(ms) <= 20 or i % max(len(ms) // 10, 1) == 0:
            _text(svg, x0 - 6, y0 - (i + 0.5) * ch + 4, str(m), "end")
    for i, k in enumerate(ks):
        if i % max(len(ks) // 8, 1) == 0:
            _text(svg, x0 + (i + 0.5) * cw, y0 + 16, str(k))
    # colour bar
    bx = x1 + 20
    for i in range(50):
        ET.SubElement(svg, "rect", x=str(bx), y=f"{y0 - (i + 1) * (y0 - y1) / 50:.2f}", width="16",
                      height=f"{(y0 - y1) / 50 + 0.5:.2f}", fill=_color(i / 49))
    _text(svg, bx + 20, y1 + 8, f"{vmax:.3g}", "start")
    _text(svg, bx + 20, y0, f"{vmin:.3g}", "start")
    return svg


def render_chart(data: str, spec: FigureSpec) -> str:
    """Self-contained SVG for a theory grid or experiment CSV."""
    if spec.which is FigureKind.EXPERIMENT_CURVES:
        svg = _render_curves(_read_rows(data, ["m", "k", "empirical_mean", "theoretical"]), spec)
    else:
        svg = _render_heatmap(_read_rows(data, ["m", "k", "p", "log10_p"]), spec)
    out = ET.tostring(svg, encoding="unicode")
    text = '<?xml version="1.0" encoding="UTF-8"?>\n' + out + "\n"
    if len(text.encode("utf-8")) > MAX_SVG_BYTES:
        raise FormatError("chart exceeds the 2 MB size limit")
    return text
