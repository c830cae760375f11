"""CSV readers and writers for trajectories and per-sample profiles.

Trajectory files have a header ``t,x,y,z[,segment]`` (comma separated,
UTF-8). Lines starting with ``#`` before the header are annotations; the
filter command uses them to mark its output.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from pathlib import Path

import numpy as np

from .errors import MissingColumn, ParseError
from .trajectory import Trajectory

REQUIRED = ("t", "x", "y", "z")
SEGMENT = "segment"


def _open_text(path):
    return open(path, "r", encoding="utf-8", newline="")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _split_annotations(lines):
    notes = []
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        notes.append(lines[i][1:].strip())
        i += 1
    return notes, i


def read_annotations(path) -> list:
    with _open_text(path) as fh:
        notes, _ = _split_annotations(fh.read().splitlines())
    return notes


def read_trajectory_csv(path, column_map=None, unit_scale=1.0) -> Trajectory:
    """Read a trajectory CSV.

    Parameters
    ----------
    column_map : dict, optional
        Maps canonical names (``t``, ``x``, ``y``, ``z``, ``segment``) to the
        header names used in the file, e.g. ``{"t": "timestamp"}``.
    unit_scale : float
        Factor converting the file's position unit to meters.
    """
    if not unit_scale > 0:
        raise ValueError("unit_scale must be positive")
    column_map = dict(column_map or {})
    with _open_text(path) as fh:
        lines = fh.read().splitlines()
    _, first = _split_annotations(lines)
    reader = csv.reader(lines[first:])
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(first + 1, "missing header row") from None

    idx = {}
    for name in REQUIRED:
        col = column_map.get(name, name)
        if col not in header:
            raise MissingColumn(col)
        idx[name] = header.index(col)
    seg_col = column_map.get(SEGMENT, SEGMENT)
    seg_idx = header.index(seg_col) if seg_col in header else None

    t, pos, labels = [], [], []
    for offset, row in enumerate(reader):
        line_no = first + 2 + offset
        if not row or all(not c.strip() for c in row):
            continue
        try:
            t.append(float(row[idx["t"]]))
            pos.append([float(row[idx[c]]) * unit_scale for c in "xyz"])
        except (ValueError, IndexError) as exc:
            raise ParseError(line_no, str(exc)) from None
        if seg_idx is not None:
            if seg_idx >= len(row):
                raise ParseError(line_no, "missing segment value")
            labels.append(row[seg_idx].strip())
    if not t:
        raise ParseError(first + 2, "no data rows")
    return Trajectory.from_arrays(np.array(t), np.array(pos),
                                  labels=labels if seg_idx is not None else None)


def fmt(value, exact=False) -> str:
    """Nine significant digits, or the shortest round-trip form when ``exact``."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value) if exact else f"{value:.9g}"


def _write_rows(path, header, rows, annotations=(), exact=False):
    buf = io.StringIO()
    for note in annotations:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else fmt(c, exact) for c in row])
    text = buf.getvalue()
    if path is None or path == "-":
        return text
    Path(path).write_text(text, encoding="utf-8")
    return text


def write_trajectory_csv(path, traj: Trajectory, annotations=()):
    """Positions are written at full double precision."""
    header = list(REQUIRED)
    if traj.labels is not None:
        header.append(SEGMENT)
    rows = []
    for i in range(len(traj)):
        row = [traj.t[i], *traj.pos[i]]
        if traj.labels is not None:
            row.append(traj.labels[i])
        rows.append(row)
    return _write_rows(path, header, rows, annotations, exact=True)


def write_profile_csv(path, profile):
    header = ["t", "v", "kappa", "tau", "defined"]
    if profile.labels is not None:
        header.append(SEGMENT)
    rows = []
    for i in range(len(profile)):
        row = [profile.t[i], profile.v[i], profile.kappa[i], profile.tau[i], bool(profile.defined[i])]
        if profile.labels is not None:
            row.append(profile.labels[i])
        rows.append(row)
    return _write_rows(path, header, rows)


def write_ground_truth_csv(path, truth):
    rows = zip(truth.t, truth.v, truth.kappa, truth.tau, truth.s)
    return _write_rows(path, ["t", "v", "kappa", "tau", "s"], rows, exact=True)


def write_table_csv(path, rows, header):
    """Write dict rows, blank where a key is missing."""
    out = [["" if r.get(h) is None else r[h] for h in header] for r in rows]
    return _write_rows(path, header, out)
