"""Trajectory data model, validation and segment slicing.

Positions are in meters and timestamps in seconds throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import NoLabels, NonFiniteValue, NonMonotonicTime, TooFewSamples


class Sample(NamedTuple):
    t: float
    pos: tuple


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped 3D positions with optional per-sample segment labels.

    Build instances through :func:`validate` (or :meth:`from_arrays`); the
    constructor itself does not check invariants.
    """

    t: np.ndarray
    pos: np.ndarray
    rate_hz: float
    labels: Optional[tuple] = None

    @classmethod
    def from_arrays(cls, t, pos, labels=None, rate_hz=None) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        pos = np.asarray(pos, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"pos must have shape (n, 3), got {pos.shape}")
        if len(t) != len(pos):
            raise ValueError("t and pos lengths differ")
        if labels is not None and len(labels) != len(t):
            raise ValueError("labels length differs from sample count")
        _check(t, pos)
        if rate_hz is None:
            rate_hz = (len(t) - 1) / (t[-1] - t[0])
        labels = None if labels is None else tuple(str(lab) for lab in labels)
        return cls(_frozen(t), _frozen(pos), float(rate_hz), labels)

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.rate_hz == other.rate_hz
            and self.labels == other.labels
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.pos, other.pos)
        )

    @property
    def samples(self) -> list:
        return [Sample(float(ti), tuple(map(float, p))) for ti, p in zip(self.t, self.pos)]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def with_positions(self, pos) -> "Trajectory":
        """Copy of this trajectory with new positions, same timing and labels."""
        pos = np.asarray(pos, dtype=float)
        if pos.shape != self.pos.shape:
            raise ValueError(f"expected shape {self.pos.shape}, got {pos.shape}")
        _check(self.t, pos)
        return Trajectory(self.t, _frozen(pos), self.rate_hz, self.labels)

    def slice(self, start, end) -> "Trajectory":
        """Samples ``start..end`` inclusive."""
        labels = None if self.labels is None else self.labels[start:end + 1]
        return Trajectory(self.t[start:end + 1], self.pos[start:end + 1], self.rate_hz, labels)


@dataclass(frozen=True)
class SegmentSlice:
    label: str
    start_index: int
    end_index: int
    trajectory: Trajectory = field(repr=False)

    def __len__(self):
        return self.end_index - self.start_index + 1


def _check(t, pos):
    if len(t) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(t)}")
    bad = ~np.isfinite(t)
    if bad.any():
        raise NonFiniteValue(int(np.argmax(bad)))
    bad = ~np.isfinite(pos).all(axis=1)
    if bad.any():
        raise NonFiniteValue(int(np.argmax(bad)))
    step = np.diff(t)
    if (step <= 0).any():
        raise NonMonotonicTime(int(np.argmax(step <= 0)) + 1)


def validate(raw: Iterable[Sequence], rate_hz: Optional[float] = None) -> Trajectory:
    """Build a :class:`Trajectory` from ``(t, x, y, z[, label])`` rows.

    Either every row carries a label or none does. When ``rate_hz`` is not
    given it is estimated as ``(n - 1) / (t_last - t_first)``.

    Raises
    ------
    TooFewSamples, NonFiniteValue, NonMonotonicTime
    """
    if isinstance(raw, Trajectory):
        return raw
    rows = list(raw)
    if len(rows) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(rows)}")
    widths = {len(r) for r in rows}
    if not widths <= {4, 5} or len(widths) != 1:
        raise ValueError("rows must all be (t, x, y, z) or all (t, x, y, z, label)")
    t = np.array([float(r[0]) for r in rows])
    pos = np.array([[float(v) for v in r[1:4]] for r in rows])
    labels = [r[4] for r in rows] if widths == {5} else None
    return Trajectory.from_arrays(t, pos, labels=labels, rate_hz=rate_hz)


def label_runs(labels: Sequence) -> list:
    """Maximal runs of identical labels as ``(label, start, end)`` with inclusive ends."""
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            runs.append((labels[start], start, i - 1))
            start = i
    return runs


def split_segments(traj: Trajectory) -> list:
    """Split a labelled trajectory into maximal runs of identical labels.

    A label that recurs later in the trial yields a separate slice each time.
    """
    if traj.labels is None:
        raise NoLabels("trajectory has no segment labels")
    return [
        SegmentSlice(label, start, end, traj.slice(start, end))
        for label, start, end in label_runs(traj.labels)
    ]
