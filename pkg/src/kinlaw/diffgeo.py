"""Derivatives, speed, curvature and torsion of sampled 3D paths."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonUniformSampling, TooFewSamples
from .filtering import FilterSpec, filter_trajectory, zero_lag_filter
from .trajectory import Trajectory

MIN_SAMPLES = 7
# below these the curvature / torsion denominators are treated as singular
V_MIN = 1e-6
CROSS_MIN = 1e-12


@dataclass(frozen=True, eq=False)
class DerivativeStack:
    """First, second and third time derivatives of position, shape ``(n, 3)`` each."""

    t: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if n < MIN_SAMPLES:
            raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {n}")
        for name in ("d1", "d2", "d3"):
            arr = getattr(self, name)
            if arr.shape != (n, 3):
                raise ValueError(f"{name} has shape {arr.shape}, expected {(n, 3)}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")


@dataclass(frozen=True, eq=False)
class KinematicProfile:
    """Per-sample speed (m/s), curvature (1/m) and signed torsion (1/m).

    Undefined curvature / torsion samples hold 0.0 and are flagged ``False``
    in ``kappa_defined`` / ``tau_defined``.
    """

    t: np.ndarray
    v: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    kappa_defined: np.ndarray
    tau_defined: np.ndarray
    labels: tuple = None

    def __len__(self):
        return len(self.t)

    @property
    def defined(self):
        return self.kappa_defined & self.tau_defined

    def select(self, index) -> "KinematicProfile":
        """Sub-profile at a boolean mask, slice or index array."""
        labels = None
        if self.labels is not None:
            labels = tuple(np.asarray(self.labels, dtype=object)[index])
        return KinematicProfile(
            self.t[index], self.v[index], self.kappa[index], self.tau[index],
            self.kappa_defined[index], self.tau_defined[index], labels,
        )

    @classmethod
    def from_values(cls, v, kappa, tau, t=None) -> "KinematicProfile":
        """Profile from raw arrays, with every sample defined."""
        v = np.asarray(v, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        tau = np.asarray(tau, dtype=float)
        if not (v.shape == kappa.shape == tau.shape):
            raise ValueError("v, kappa and tau must have equal shapes")
        if t is None:
            t = np.arange(len(v), dtype=float)
        ones = np.ones(len(v), dtype=bool)
        return cls(np.asarray(t, dtype=float), v, kappa, tau, ones, ones.copy())


def check_uniform(t, tolerance=0.01):
    dt = np.diff(t)
    mean = dt.mean()
    worst = np.max(np.abs(dt - mean))
    if worst >= tolerance * mean:
        raise NonUniformSampling(
            f"timestamp gaps deviate by {worst:.3g} s from the mean step {mean:.3g} s"
        )
    return float(mean)


def differentiate(traj: Trajectory, deriv_cutoff_hz=10.0) -> DerivativeStack:
    """Three successive central-difference derivatives, each zero-lag filtered.

    Interior samples use ``(s[i+1] - s[i-1]) / (2 dt)``; the two endpoints use
    second-order one-sided differences. ``deriv_cutoff_hz=None`` skips the
    intermediate filtering.
    """
    if len(traj) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {len(traj)}")
    dt = check_uniform(traj.t)
    spec = None if deriv_cutoff_hz is None else FilterSpec(deriv_cutoff_hz, 1.0 / dt)

    derivs = []
    cur = traj.pos
    for _ in range(3):
        cur = np.gradient(cur, dt, axis=0, edge_order=2)
        if spec is not None:
            cur = zero_lag_filter(cur, spec, axis=0)
        derivs.append(cur)
    return DerivativeStack(traj.t.copy(), *derivs)


def speed(stack: DerivativeStack) -> np.ndarray:
    return np.linalg.norm(stack.d1, axis=1)


def _curvature(d1, d2):
    v2 = np.einsum("ij,ij->i", d1, d1)
    a2 = np.einsum("ij,ij->i", d2, d2)
    va = np.einsum("ij,ij->i", d1, d2)
    ok = np.sqrt(v2) >= V_MIN
    num = np.maximum(v2 * a2 - va * va, 0.0)
    kappa = np.zeros(len(d1))
    kappa[ok] = np.sqrt(num[ok] / v2[ok] ** 3)
    return kappa, ok


def curvature(stack: DerivativeStack):
    """Curvature ``sqrt((|x'|^2 |x''|^2 - (x'.x'')^2) / |x'|^6)``.

    Returns
    -------
    kappa : ndarray
        Curvature, 0.0 where undefined.
    defined : ndarray of bool
        False where the speed is below ``V_MIN``.
    """
    return _curvature(stack.d1, stack.d2)


def _torsion(d1, d2, d3):
    cross = np.cross(d1, d2)
    c2 = np.einsum("ij,ij->i", cross, cross)
    triple = np.einsum("ij,ij->i", cross, d3)
    ok = c2 >= CROSS_MIN
    tau = np.zeros(len(d1))
    tau[ok] = triple[ok] / c2[ok]
    return tau, ok


def torsion(stack: DerivativeStack):
    """Signed torsion ``x' . (x'' x x''') / |x' x x''|^2`` and its defined-flag."""
    return _torsion(stack.d1, stack.d2, stack.d3)


def profile_from_stack(stack: DerivativeStack, labels=None) -> KinematicProfile:
    kappa, k_ok = curvature(stack)
    tau, t_ok = torsion(stack)
    return KinematicProfile(stack.t, speed(stack), kappa, tau, k_ok, t_ok, labels)


def kinematic_profile(traj: Trajectory, pos_cutoff_hz=6.0, deriv_cutoff_hz=10.0) -> KinematicProfile:
    """Filter positions, differentiate and evaluate speed, curvature and torsion.

    Either cutoff may be ``None`` to skip that filtering stage.
    """
    if pos_cutoff_hz is not None:
        check_uniform(traj.t)
        traj = filter_trajectory(traj, pos_cutoff_hz)
    stack = differentiate(traj, deriv_cutoff_hz)
    return profile_from_stack(stack, traj.labels)
