"""CSV / JSON / SVG emission with fixed float formatting and no timestamps."""

from __future__ import annotations

import dataclasses
import enum
import io
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .subnet import Role, SubnetGraph
from .tiling import TileGeom

SCHEMA_VERSION = 1
ROLE_COLOURS = {Role.REPRESENTATIVE: "#d62728", Role.RELAY: "#1f77b4", Role.BOTH: "#9467bd"}


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _plain(obj):
    """Reduce reports, numpy scalars, enums and tuples to JSON-native values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return _plain(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _encode(v, out: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(v.items())
        for i, (k, x) in enumerate(items):
            out.append(f"{pad}  {_str(k)}: ")
            _encode(x, out, indent + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, list):
        if all(not isinstance(x, (dict, list)) for x in v):
            out.append("[" + ", ".join(_scalar(x) for x in v) + "]")
            return
        out.append("[\n")
        for i, x in enumerate(v):
            out.append(pad + "  ")
            _encode(x, out, indent + 1)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(v))


def _str(s: str) -> str:
    return json.dumps(s)


def _scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return fmt_float(x)
    return _str(x)


def to_json(report) -> str:
    """Deterministic JSON text: sorted keys, floats at 17 significant digits."""
    d = _plain(report)
    if isinstance(d, dict):
        d.setdefault("schema_version", SCHEMA_VERSION)
    out: list = []
    _encode(d, out, 0)
    return "".join(out) + "\n"


def _cell(x) -> str:
    x = _plain(x)
    if isinstance(x, float):
        return fmt_float(x)
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, list):
        return "|".join(_cell(y) for y in x)
    return "" if x is None else str(x)


def to_csv(report) -> str:
    """Header of ``report.COLUMNS`` followed by ``report.csv_rows()``."""
    buf = io.StringIO()
    buf.write(",".join(report.COLUMNS) + "\n")
    for row in report.csv_rows():
        buf.write(",".join(_cell(x) for x in row) + "\n")
    return buf.getvalue()


def to_svg(subnet: SubnetGraph, geom: TileGeom, tiles: Optional[list] = None, scale: float = 20.0,
           all_points: bool = True) -> str:
    """Points coloured by role, one polyline per subnet edge, and the tile grid."""
    tiles = sorted(subnet.statuses) if tiles is None else sorted(tiles)
    s = geom.side
    if tiles:
        i0, i1 = min(t[0] for t in tiles), max(t[0] for t in tiles)
        j0, j1 = min(t[1] for t in tiles), max(t[1] for t in tiles)
        x0, x1 = (i0 - 0.5) * s, (i1 + 0.5) * s
        y0, y1 = (j0 - 0.5) * s, (j1 + 0.5) * s
    else:
        x0, y0 = subnet.coords.min(axis=0) if len(subnet.coords) else (0.0, 0.0)
        x1, y1 = subnet.coords.max(axis=0) if len(subnet.coords) else (1.0, 1.0)
    w, h = (x1 - x0) * scale, (y1 - y0) * scale

    def px(x, y):
        return f"{fmt_float(round((x - x0) * scale, 3))},{fmt_float(round((y1 - y) * scale, 3))}"

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3f}" height="{h:.3f}" '
             f'viewBox="0 0 {w:.3f} {h:.3f}">',
             '<g id="tiles" fill="none" stroke="#bbbbbb" stroke-width="0.5">']
    for t in tiles:
        good = subnet.statuses[t].good if t in subnet.statuses else False
        a, b = px((t[0] - 0.5) * s, (t[1] + 0.5) * s).split(",")
        lines.append(f'<rect x="{a}" y="{b}" width="{s * scale:.3f}" height="{s * scale:.3f}" '
                     f'fill="{"#eef6ee" if good else "none"}"/>')
    lines.append("</g>")
    if all_points:
        lines.append('<g id="points" fill="#999999">')
        inside = ((subnet.coords[:, 0] >= x0) & (subnet.coords[:, 0] < x1)
                  & (subnet.coords[:, 1] >= y0) & (subnet.coords[:, 1] < y1))
        members = set(int(m) for m in subnet.members)
        for v in np.flatnonzero(inside):
            if int(v) not in members:
                a, b = px(*subnet.coords[v]).split(",")
                lines.append(f'<circle cx="{a}" cy="{b}" r="1"/>')
        lines.append("</g>")
    lines.append('<g id="edges" fill="none" stroke="#333333" stroke-width="1">')
    for u, v in subnet.edges:
        lines.append(f'<polyline points="{px(*subnet.coords[u])} {px(*subnet.coords[v])}"/>')
    lines.append("</g>")
    lines.append('<g id="nodes">')
    for m in subnet.members:
        a, b = px(*subnet.coords[m]).split(",")
        role = subnet.roles[int(m)]
        lines.append(f'<circle cx="{a}" cy="{b}" r="2.5" fill="{ROLE_COLOURS[role]}" class="{role.value}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_report(report, fmt: str, path, geom: Optional[TileGeom] = None) -> Path:
    """Write ``report`` as ``CSV``, ``JSON`` or ``SVG`` to ``path``."""
    fmt = fmt.upper()
    if fmt == "JSON":
        text = to_json(report)
    elif fmt == "CSV":
        text = to_csv(report)
    elif fmt == "SVG":
        if not isinstance(report, SubnetGraph) or geom is None:
            raise ValueError("SVG output needs a SubnetGraph and its TileGeom")
        text = to_svg(report, geom)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path
