"""Fitting ``v = alpha * kappa**beta * |tau|**gamma`` by least squares in log space."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffgeo import KinematicProfile
from .errors import DegenerateDesign, DomainError, InsufficientSamples

TAU_MIN = 2.0
MIN_USED = 10


@dataclass(frozen=True)
class MaskReport:
    """Sample bookkeeping for one fit.

    ``n_undefined`` counts samples whose curvature or torsion is undefined or
    whose speed or curvature is not positive; ``n_below_tau`` counts the
    remaining samples with ``|tau| <= tau_min``.
    """

    n_total: int
    n_below_tau: int
    n_undefined: int
    n_used: int

    def __post_init__(self):
        if self.n_used != self.n_total - self.n_below_tau - self.n_undefined:
            raise ValueError("inconsistent mask counts")


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    beta: float
    gamma: Optional[float]
    r2: float
    mask: MaskReport
    include_torsion: bool = True
    rss: float = float("nan")
    # alpha carries units of m**(1 + beta + gamma) / s, so it is only
    # comparable between fits with equal exponents

    @property
    def alpha_units(self):
        gamma = self.gamma if self.include_torsion else 0.0
        return f"m^{1.0 + self.beta + gamma:.6g}/s"

    def predict(self, kappa, tau=None):
        return predict_speed(self, kappa, tau)


def mask(profile: KinematicProfile, tau_min=TAU_MIN):
    """Select the samples usable for a log-space fit.

    Retains samples where curvature and torsion are defined, ``v > 0``,
    ``kappa > 0`` and ``|tau| > tau_min`` (strict). ``tau_min=None`` drops the
    torsion requirements entirely, for curvature-only fits of planar data.

    Returns
    -------
    (KinematicProfile, MaskReport)
    """
    if tau_min is None:
        usable = profile.kappa_defined & (profile.v > 0) & (profile.kappa > 0)
        keep = usable
    else:
        usable = profile.defined & (profile.v > 0) & (profile.kappa > 0)
        keep = usable & (np.abs(profile.tau) > tau_min)
    n_total = len(profile)
    n_undefined = int(n_total - usable.sum())
    n_used = int(keep.sum())
    report = MaskReport(n_total, n_total - n_undefined - n_used, n_undefined, n_used)
    return profile.select(keep), report


def _check_design(columns, names):
    degenerate = []
    scaled = []
    for col, name in zip(columns, names):
        spread = col.std()
        if spread <= 1e-10 * max(1.0, np.abs(col).max()):
            degenerate.append(name)
        else:
            scaled.append((col - col.mean()) / spread)
    if degenerate:
        raise DegenerateDesign(degenerate)
    if len(scaled) > 1:
        sv = np.linalg.svd(np.column_stack(scaled), compute_uv=False)
        if sv[-1] <= 1e-8 * sv[0]:
            raise DegenerateDesign(names, f"collinear regressors: {', '.join(names)}")


def fit(profile: KinematicProfile, tau_min=TAU_MIN, include_torsion=True) -> PowerLawFit:
    """Fit the power law to the masked samples of ``profile``.

    Ordinary least squares of ``log v`` on ``log kappa`` (and ``log |tau|``
    when ``include_torsion``), solved through a QR decomposition of the design
    matrix. ``alpha`` is ``exp`` of the intercept; ``r2`` is computed in log space.

    The torsion threshold applies whether or not torsion enters the model, so
    the curvature-only fit is nested in the full one on the same samples.
    Pass ``tau_min=None`` with ``include_torsion=False`` to fit planar data.

    Raises
    ------
    InsufficientSamples
        Fewer than ``MIN_USED`` samples survive the mask.
    DegenerateDesign
        A regressor is constant or the regressors are collinear.
    """
    if include_torsion and tau_min is None:
        raise ValueError("tau_min=None requires include_torsion=False")
    kept, report = mask(profile, tau_min)
    if report.n_used < MIN_USED:
        raise InsufficientSamples(report, MIN_USED)

    y = np.log(kept.v)
    columns = [np.log(kept.kappa)]
    names = ["log_kappa"]
    if include_torsion:
        columns.append(np.log(np.abs(kept.tau)))
        names.append("log_tau")
    _check_design(columns, names)

    design = np.column_stack([np.ones_like(y)] + columns)
    q, r = np.linalg.qr(design)
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - design @ coef
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return PowerLawFit(
        alpha=float(np.exp(coef[0])),
        beta=float(coef[1]),
        gamma=float(coef[2]) if include_torsion else None,
        r2=r2,
        mask=report,
        include_torsion=include_torsion,
        rss=rss,
    )


def predict_speed(fitted: PowerLawFit, kappa, tau=None):
    """Evaluate ``alpha * kappa**beta * |tau|**gamma`` (scalar or array)."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise DomainError("curvature must be positive")
    v = fitted.alpha * kappa ** fitted.beta
    if fitted.include_torsion:
        if tau is None:
            raise DomainError("torsion required for a fit that includes it")
        tau = np.abs(np.asarray(tau, dtype=float))
        if np.any(tau == 0):
            raise DomainError("torsion must be nonzero")
        v = v * tau ** fitted.gamma
    return v.item() if v.ndim == 0 else v
