"""Synthetic trajectories whose speed obeys the power law by construction.

A path is traversed with target speed ``alpha * kappa(s)**beta * |tau(s)|**gamma``
along arc length ``s``; the time map ``t(s) = integral ds / v(s)`` is integrated
on a fine grid, inverted, and sampled uniformly.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator, make_interp_spline

from .diffgeo import _curvature, _torsion
from .errors import DegeneratePath, NonFiniteSpeed, OutOfRange
from .trajectory import Trajectory

DEGENERACY_TOL = 1e-9
TABLE_POINTS = 20001


@dataclass(frozen=True)
class PathSpec:
    """Geometric path description.

    ``kind`` is ``"helix"``, ``"modulated_helix"`` or ``"spline"``. The
    modulated helix has radius ``a * (1 + amplitude * sin(wobble_frequency * theta))``
    and pitch ``b`` per radian. A spline path interpolates ``control_points``
    (or, when those are omitted, a randomly perturbed helix drawn from ``seed``)
    with a quintic B-spline so that third derivatives are continuous.
    ``length_s=None`` means the natural length (splines only, or when a
    duration is requested from the generator).
    """

    kind: str
    length_s: Optional[float] = None
    a: float = 0.02
    b: float = 0.01
    amplitude: float = 0.0
    wobble_frequency: float = 0.0
    control_points: Optional[tuple] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("helix", "modulated_helix", "spline"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.kind in ("helix", "modulated_helix"):
            if not self.a > 0:
                raise ValueError("helix radius a must be positive")
            if self.b == 0:
                raise ValueError("helix pitch b must be nonzero")
            if not 0 <= self.amplitude < 1:
                raise ValueError("amplitude must be in [0, 1)")
        if self.kind == "spline" and self.control_points is not None:
            pts = np.asarray(self.control_points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 6:
                raise ValueError("spline needs at least 6 control points of shape (n, 3)")
            if not np.isfinite(pts).all():
                raise ValueError("control points must be finite")
        if self.length_s is not None and not self.length_s > 0:
            raise ValueError("length_s must be positive")


def helix(a=1.0, b=1.0, length_s=None) -> PathSpec:
    return PathSpec("helix", length_s, a=a, b=b)


def modulated_helix(a=0.02, b=0.01, amplitude=0.2, wobble_frequency=3.0, length_s=None) -> PathSpec:
    return PathSpec("modulated_helix", length_s, a=a, b=b, amplitude=amplitude,
                    wobble_frequency=wobble_frequency)


def spline(control_points=None, seed=0, length_s=None) -> PathSpec:
    if control_points is not None:
        control_points = tuple(tuple(float(c) for c in p) for p in control_points)
    return PathSpec("spline", length_s, control_points=control_points, seed=seed)


@dataclass(frozen=True)
class GenSpec:
    path: PathSpec
    alpha: float = 0.05
    beta: float = -1.0 / 3.0
    gamma: float = -1.0 / 6.0
    rate_hz: float = 100.0
    speed_noise_sd: float = 0.0
    seed: int = 0
    duration_s: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")
        if not self.speed_noise_sd >= 0:
            raise ValueError("speed_noise_sd must be non-negative")
        if self.path.length_s is None and self.duration_s is None and self.path.kind != "spline":
            raise ValueError("helical paths need path.length_s or duration_s")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Exact speed, curvature, torsion and arc length at each emitted sample."""

    t: np.ndarray
    v: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    s: np.ndarray


# --- parametric curves -----------------------------------------------------

def _helix_derivs(spec, u):
    a, b = spec.a, spec.b
    c, s = np.cos(u), np.sin(u)
    amp, w = spec.amplitude, spec.wobble_frequency
    r = a * (1 + amp * np.sin(w * u))
    r1 = a * amp * w * np.cos(w * u)
    r2 = -a * amp * w ** 2 * np.sin(w * u)
    r3 = -a * amp * w ** 3 * np.cos(w * u)
    zero = np.zeros_like(u)
    p = np.stack([r * c, r * s, b * u], axis=-1)
    d1 = np.stack([r1 * c - r * s, r1 * s + r * c, b + zero], axis=-1)
    d2 = np.stack([r2 * c - 2 * r1 * s - r * c, r2 * s + 2 * r1 * c - r * s, zero], axis=-1)
    d3 = np.stack([
        r3 * c - 3 * r2 * s - 3 * r1 * c + r * s,
        r3 * s + 3 * r2 * c - 3 * r1 * s - r * c,
        zero,
    ], axis=-1)
    return p, d1, d2, d3


def _spline_points(spec):
    if spec.control_points is not None:
        return np.asarray(spec.control_points, dtype=float)
    rng = np.random.default_rng(spec.seed)
    theta = np.linspace(0.0, 4.0 * np.pi, 13)
    base = np.stack([0.03 * np.cos(theta), 0.03 * np.sin(theta), 0.008 * theta], axis=1)
    return base + rng.normal(0.0, 1e-4, base.shape)


@functools.lru_cache(maxsize=32)
def _spline_curve(spec):
    pts = _spline_points(spec)
    chord = np.r_[0.0, np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))]
    return make_interp_spline(chord / chord[-1], pts, k=5)


def _derivs(spec, u):
    u = np.asarray(u, dtype=float)
    if spec.kind == "spline":
        curve = _spline_curve(spec)
        return curve(u), curve(u, 1), curve(u, 2), curve(u, 3)
    return _helix_derivs(spec, u)


def _u_upper(spec, length):
    """Parameter value certainly beyond arc length ``length``."""
    if spec.kind == "spline":
        return 1.0
    slowest = math.hypot(spec.b, spec.a * (1 - spec.amplitude))
    return 1.05 * length / slowest


@dataclass(frozen=True, eq=False)
class _ArcTable:
    u: np.ndarray
    s: np.ndarray

    def u_at(self, s):
        return np.interp(s, self.s, self.u)


def _table_for(spec, length):
    return _arc_table(spec, None if spec.kind == "spline" else length)


@functools.lru_cache(maxsize=32)
def _arc_table(spec, length):
    if spec.kind == "helix":
        c = math.hypot(spec.a, spec.b)
        u = np.linspace(0.0, length / c, 2)
        return _ArcTable(u, u * c)
    u = np.linspace(0.0, _u_upper(spec, length), TABLE_POINTS)
    speed = np.linalg.norm(_derivs(spec, u)[1], axis=1)
    s = cumulative_trapezoid(speed, u, initial=0.0)
    return _ArcTable(u, s)


def natural_length(spec: PathSpec) -> float:
    if spec.kind != "spline":
        raise ValueError("only spline paths have a natural length")
    return float(_table_for(spec, None).s[-1])


def path_length(spec: PathSpec) -> float:
    return natural_length(spec) if spec.length_s is None else float(spec.length_s)


def _geometry_at_u(spec, u):
    p, d1, d2, d3 = _derivs(spec, u)
    kappa, _ = _curvature(d1, d2)
    tau, _ = _torsion(d1, d2, d3)
    return p, kappa, tau, np.linalg.norm(d1, axis=1)


def analytic_geometry(path: PathSpec, s):
    """Position, curvature and torsion at arc length ``s`` (scalar or array).

    Helices use the closed forms ``a / (a^2 + b^2)`` and ``b / (a^2 + b^2)``;
    other paths evaluate the curvature and torsion formulas on the exact
    derivatives of their parametrization.
    """
    length = path_length(path)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0) or np.any(s_arr > length * (1 + 1e-12)):
        raise OutOfRange(f"arc length outside [0, {length}]")
    u = _table_for(path, length).u_at(s_arr)
    p, kappa, tau, _ = _geometry_at_u(path, u)
    if path.kind == "helix":
        denom = path.a ** 2 + path.b ** 2
        kappa = np.full_like(s_arr, path.a / denom)
        tau = np.full_like(s_arr, path.b / denom)
    if np.ndim(s) == 0:
        return p[0], float(kappa[0]), float(tau[0])
    return p, kappa, tau


# --- generator -------------------------------------------------------------

def _traversal(spec: GenSpec, length, n_fine, noise_fn=None):
    path = spec.path
    table = _table_for(path, length)
    if length > table.s[-1] * (1 + 1e-12):
        raise OutOfRange(f"path is only {table.s[-1]:.6g} m long, {length:.6g} m requested")
    s = np.linspace(0.0, length, n_fine)
    u = table.u_at(s)
    p, kappa, tau, dsdu = _geometry_at_u(path, u)

    bad = np.flatnonzero(kappa <= DEGENERACY_TOL)
    if bad.size:
        raise DegeneratePath("curvature", float(s[bad[0]]))
    # a sign change between grid points hides a zero the tolerance test can miss
    bad = np.flatnonzero((np.abs(tau) <= DEGENERACY_TOL) | (np.sign(tau) != np.sign(tau[0])))
    if bad.size:
        raise DegeneratePath("torsion", float(s[bad[0]]))

    with np.errstate(all="ignore"):
        log_v = math.log(spec.alpha) + spec.beta * np.log(kappa) + spec.gamma * np.log(np.abs(tau))
        if noise_fn is not None:
            log_v = log_v + noise_fn(s)
        v = np.exp(log_v)
    if not np.isfinite(v).all() or np.any(v <= 0):
        raise NonFiniteSpeed("target speed is not finite and positive along the path")
    t = cumulative_trapezoid(1.0 / v, s, initial=0.0)
    return s, u, t, v, kappa, tau


def _fine_traversal(spec, length, noise_fn=None):
    # refine until every quadrature step is at most 1/20 of the output sample period
    n_fine = 2001
    while True:
        out = _traversal(spec, length, n_fine, noise_fn)
        if np.max(np.diff(out[2])) <= 1.0 / (20.0 * spec.rate_hz) or n_fine > 5_000_000:
            return out
        n_fine = int(n_fine * 1.2 * np.max(np.diff(out[2])) * 20.0 * spec.rate_hz) + 1


def _length_for(spec: GenSpec):
    path = spec.path
    if spec.duration_s is None:
        return path_length(path)
    if path.kind == "spline":
        full = path_length(path)
        t = _traversal(spec, full, 20001)[2]
        if t[-1] < spec.duration_s:
            raise OutOfRange(f"spline traversal lasts {t[-1]:.6g} s < {spec.duration_s} s")
        return full
    length = path.length_s or 1.0
    for _ in range(50):
        t = _traversal(spec, length, 4001)[2]
        if t[-1] >= spec.duration_s * 1.02:
            return length
        length *= 1.05 * spec.duration_s / t[-1] + 0.05
    raise NonFiniteSpeed("could not reach the requested duration")


def generate(spec: GenSpec):
    """Sample a power-law traversal of ``spec.path``.

    Returns
    -------
    trajectory : Trajectory
        Positions at uniform ``1 / rate_hz`` spacing from t = 0.
    truth : GroundTruth
        Speed, curvature and torsion at the emitted samples.

    Speed noise is multiplicative: ``log v`` receives Gaussian noise of
    standard deviation ``speed_noise_sd``, drawn once per output sample period
    and interpolated linearly in arc length between draws.
    """
    length = _length_for(spec)
    noise_fn = None
    if spec.speed_noise_sd > 0:
        s0, _, t0, *_ = _fine_traversal(spec, length)
        n_knots = int(math.ceil(t0[-1] * spec.rate_hz)) + 2
        knot_s = np.interp(np.arange(n_knots) / spec.rate_hz, t0, s0)
        rng = np.random.default_rng(spec.seed)
        values = rng.normal(0.0, spec.speed_noise_sd, n_knots)
        noise_fn = lambda s: np.interp(s, knot_s, values)  # noqa: E731

    s, u, t, v, kappa, tau = _fine_traversal(spec, length, noise_fn)
    duration = t[-1] if spec.duration_s is None else min(spec.duration_s, t[-1])
    n_out = int(math.floor(duration * spec.rate_hz + 1e-9)) + 1
    if n_out < 100:
        raise ValueError(f"only {n_out} samples at {spec.rate_hz} Hz; need at least 100")
    t_out = np.arange(n_out) / spec.rate_hz

    s_out = PchipInterpolator(t, s)(t_out)
    u_out = _table_for(spec.path, length).u_at(s_out)
    pos, kappa_out, tau_out, _ = _geometry_at_u(spec.path, u_out)
    log_v = math.log(spec.alpha) + spec.beta * np.log(kappa_out) + spec.gamma * np.log(np.abs(tau_out))
    if noise_fn is not None:
        log_v = log_v + noise_fn(s_out)
    truth = GroundTruth(t_out, np.exp(log_v), kappa_out, tau_out, s_out)
    return Trajectory.from_arrays(t_out, pos, rate_hz=spec.rate_hz), truth
