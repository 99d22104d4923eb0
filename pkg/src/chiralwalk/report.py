"""Deterministic report serialization: JSON envelopes and CSV tables.

Floats are written with 17 significant digits (``format(x, '.17g')``) so a
round trip through text reproduces every double exactly, and dictionaries
are emitted with sorted keys. Nothing time-dependent enters the payload.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "chiralwalk"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _plain(obj):
    """Numpy scalars/arrays and tuples to plain Python containers."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _emit(obj, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return fmt_float(obj)
        # JSON has no infinities; spell them out
        return json.dumps("nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf"))
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[" + ",".join(pad + _emit(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items())
        return "{" + ",".join(
            pad + json.dumps(k) + ": " + _emit(v, indent, level + 1) for k, v in items
        ) + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _emit(_plain(obj), indent, 0) + "\n"


def digest(obj) -> str:
    """sha256 of the compact canonical serialization."""
    text = _emit(_plain(obj), 0, 0).replace("\n", "")
    return hashlib.sha256(text.encode()).hexdigest()


def envelope(command: str, model_dict: dict, parameters: dict, results: dict,
             warnings=(), status: str = "ok") -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "model_digest": digest(model_dict),
        "parameters": parameters,
        "results": results,
        "warnings": list(warnings),
        "status": status,
    }


# CSV -----------------------------------------------------------------------

def _write_rows(path, blocks):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for header, rows in blocks:
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())


def write_spectrum_csv(path, intervals, arcs):
    """A ``band_lo,band_hi`` section followed by an ``arc_theta_lo,arc_theta_hi`` one."""
    _write_rows(path, [
        (["band_lo", "band_hi"], [(float(lo), float(hi)) for lo, hi in intervals]),
        (["arc_theta_lo", "arc_theta_hi"], [(float(lo), float(hi)) for lo, hi in arcs]),
    ])


def read_spectrum_csv(path) -> tuple[list, list]:
    sections = {}
    current = None
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0] in ("band_lo", "arc_theta_lo"):
                current = sections.setdefault(row[0], [])
                continue
            current.append((float(row[0]), float(row[1])))
    return sections.get("band_lo", []), sections.get("arc_theta_lo", [])


EIGENSTATE_COLUMNS = ["x", "psi_re", "psi_im", "Psi1_re", "Psi1_im", "Psi2_re", "Psi2_im", "norm_sq"]


def write_eigenstate_csv(path, bundle):
    rows = []
    for x, psi, Psi, nsq in zip(bundle.sites, bundle.psi, bundle.Psi, bundle.norm_sq):
        rows.append([
            int(x), float(psi.real), float(psi.imag),
            float(Psi[0].real), float(Psi[0].imag), float(Psi[1].real), float(Psi[1].imag),
            float(nsq),
        ])
    _write_rows(path, [(EIGENSTATE_COLUMNS, rows)])


def write_cloud_csv(path, cloud):
    rows = [
        (float(w.real), float(w.imag), str(s), float(z.real), float(z.imag))
        for w, s, z in zip(cloud.points, cloud.sides, cloud.phases)
    ]
    _write_rows(path, [(["point_re", "point_im", "side", "phase_re", "phase_im"], rows)])
