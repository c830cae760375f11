"""Resampling and zero-lag low-pass filtering of position signals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.signal import lfilter

from .errors import CutoffAboveNyquist, SignalTooShort, TooFewSamples
from .trajectory import Trajectory

ORDER = 2
PADLEN = 3 * (ORDER + 1)


@dataclass(frozen=True)
class FilterSpec:
    """Second-order Butterworth low-pass at ``cutoff_hz`` for data sampled at ``sample_rate_hz``."""

    cutoff_hz: float
    sample_rate_hz: float
    order: int = ORDER

    def __post_init__(self):
        if self.order != ORDER:
            raise ValueError(f"only order {ORDER} is supported")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not self.cutoff_hz > 0:
            raise ValueError("cutoff_hz must be positive")
        if not self.cutoff_hz < self.sample_rate_hz / 2:
            raise CutoffAboveNyquist(
                f"cutoff {self.cutoff_hz} Hz is not below Nyquist "
                f"({self.sample_rate_hz / 2} Hz at {self.sample_rate_hz} Hz)"
            )


@dataclass(frozen=True)
class Biquad:
    b0: float
    b1: float
    b2: float
    a1: float
    a2: float

    @property
    def b(self):
        return np.array([self.b0, self.b1, self.b2])

    @property
    def a(self):
        return np.array([1.0, self.a1, self.a2])

    @property
    def dc_gain(self):
        return (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)

    def poles(self):
        return np.roots(self.a)

    def response(self, freq_hz, sample_rate_hz):
        """Complex single-pass frequency response at ``freq_hz``."""
        z = np.exp(-2j * np.pi * np.asarray(freq_hz, dtype=float) / sample_rate_hz)
        return (self.b0 + self.b1 * z + self.b2 * z * z) / (1.0 + self.a1 * z + self.a2 * z * z)

    def steady_state(self):
        """Transposed direct-form II state after a long run of unit input."""
        z2 = self.b2 - self.a2
        z1 = self.b1 - self.a1 + z2
        return np.array([z1, z2])


def design_lowpass(spec: FilterSpec) -> Biquad:
    """Bilinear-transform Butterworth low-pass with the cutoff prewarped.

    The magnitude of one pass is exactly ``1/sqrt(2)`` at ``spec.cutoff_hz``.
    """
    if not spec.cutoff_hz < spec.sample_rate_hz / 2:
        raise CutoffAboveNyquist(f"cutoff {spec.cutoff_hz} Hz at {spec.sample_rate_hz} Hz")
    k = math.tan(math.pi * spec.cutoff_hz / spec.sample_rate_hz)
    k2 = k * k
    norm = 1.0 / (1.0 + math.sqrt(2.0) * k + k2)
    b0 = k2 * norm
    return Biquad(
        b0=b0,
        b1=2.0 * b0,
        b2=b0,
        a1=2.0 * (k2 - 1.0) * norm,
        a2=(1.0 - math.sqrt(2.0) * k + k2) * norm,
    )


def zero_lag_filter(signal, spec: FilterSpec, axis: int = 0) -> np.ndarray:
    """Forward-backward filtering with odd-reflection padding.

    The signal is extended by ``PADLEN`` samples at each end with its odd
    reflection (``2*x[0] - x[k]``), run forward from the steady state of the
    first padded value, then backward over the reversed output, and trimmed.
    The effective magnitude response is the single-pass response squared.
    """
    x = np.moveaxis(np.asarray(signal, dtype=float), axis, 0)
    n = x.shape[0]
    if n <= PADLEN:
        raise SignalTooShort(f"need more than {PADLEN} samples, got {n}")
    bq = design_lowpass(spec)
    b, a = bq.b, bq.a
    zi = bq.steady_state().reshape((2,) + (1,) * (x.ndim - 1))

    head = 2.0 * x[0] - x[PADLEN:0:-1]
    tail = 2.0 * x[-1] - x[-2:-PADLEN - 2:-1]
    ext = np.concatenate([head, x, tail], axis=0)

    y, _ = lfilter(b, a, ext, axis=0, zi=zi * ext[0])
    y = y[::-1]
    y, _ = lfilter(b, a, y, axis=0, zi=zi * y[0])
    y = y[::-1][PADLEN:-PADLEN]
    return np.moveaxis(np.ascontiguousarray(y), 0, axis)


def filter_trajectory(traj: Trajectory, cutoff_hz: float) -> Trajectory:
    """Zero-lag filter each coordinate of ``traj`` independently."""
    spec = FilterSpec(cutoff_hz, traj.rate_hz)
    return traj.with_positions(zero_lag_filter(traj.pos, spec, axis=0))


def pchip_resample(traj: Trajectory, target_rate_hz: float, antialias_hz=None) -> Trajectory:
    """Resample onto a uniform grid with monotone piecewise cubic Hermite interpolation.

    Output times are ``t0, t0 + 1/rate, ...`` up to the last source time.
    Labels go to the nearest source sample. ``antialias_hz``, when given,
    zero-lag filters the source at that cutoff first; it is off by default so
    the plain interpolate-and-decimate pipeline is reproduced.
    """
    if len(traj) < 2:
        raise TooFewSamples("need at least 2 samples")
    if not target_rate_hz > 0:
        raise ValueError("target_rate_hz must be positive")
    t = traj.t
    pos = traj.pos
    if antialias_hz is not None:
        pos = zero_lag_filter(pos, FilterSpec(antialias_hz, traj.rate_hz), axis=0)

    dt = 1.0 / target_rate_hz
    n_out = int(math.floor((t[-1] - t[0]) * target_rate_hz + 1e-9)) + 1
    t_out = t[0] + np.arange(n_out) * dt
    t_out = t_out[t_out <= t[-1] + 1e-9 * dt]
    t_out[-1] = min(t_out[-1], t[-1])

    out = PchipInterpolator(t, pos, axis=0)(t_out)

    # snap grid points that land on source samples so aligned data is reproduced bit-exactly
    idx = np.clip(np.searchsorted(t, t_out), 1, len(t) - 1)
    nearest = np.where(np.abs(t[idx - 1] - t_out) <= np.abs(t[idx] - t_out), idx - 1, idx)
    on_node = np.abs(t[nearest] - t_out) <= 1e-9 * dt
    out[on_node] = pos[nearest[on_node]]
    t_out[on_node] = t[nearest[on_node]]

    labels = None
    if traj.labels is not None:
        labels = [traj.labels[i] for i in nearest]
    return Trajectory.from_arrays(t_out, out, labels=labels, rate_hz=target_rate_hz)
