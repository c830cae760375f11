import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinlaw import synth
from kinlaw.diffgeo import KinematicProfile, kinematic_profile
from kinlaw.errors import DegenerateDesign, DomainError, InsufficientSamples
from kinlaw.powerlaw import MIN_USED, TAU_MIN, MaskReport, PowerLawFit, fit, mask, predict_speed

from conftest import interior

ALPHA, BETA, GAMMA = 0.05, -1 / 3, -1 / 6


def _log_exact(n=200, seed=0, alpha=ALPHA, beta=BETA, gamma=GAMMA):
    rng = np.random.default_rng(seed)
    kappa = np.exp(rng.uniform(np.log(5), np.log(200), n))
    tau = np.exp(rng.uniform(np.log(3), np.log(300), n)) * rng.choice([-1, 1], n)
    v = alpha * kappa**beta * np.abs(tau) ** gamma
    return KinematicProfile.from_values(v, kappa, tau)


def test_mask_strict_threshold():
    prof = KinematicProfile.from_values([1, 1, 1], [1, 1, 1], [1.9, 2.0, 2.1])
    kept, report = mask(prof)
    np.testing.assert_array_equal(kept.tau, [2.1])
    assert report == MaskReport(3, 2, 0, 1)


def test_mask_negative_torsion_uses_magnitude():
    prof = KinematicProfile.from_values([1, 1], [1, 1], [-2.5, -1.0])
    _, report = mask(prof)
    assert report.n_used == 1


def test_mask_priority_and_log_domain():
    prof = KinematicProfile(
        t=np.arange(5.0),
        v=np.array([1.0, 0.0, 1.0, 1.0, 1.0]),
        kappa=np.array([1.0, 1.0, 0.0, 1.0, 1.0]),
        tau=np.array([0.5, 5.0, 5.0, 0.0, 5.0]),
        kappa_defined=np.array([True, True, True, True, True]),
        tau_defined=np.array([True, True, True, False, True]),
    )
    _, report = mask(prof)
    # undefined tau with |tau| below threshold counts once, as undefined
    assert report == MaskReport(5, 1, 3, 1)


def test_mask_planar_profile():
    prof = KinematicProfile.from_values(np.ones(20), np.ones(20), np.zeros(20))
    assert mask(prof)[1].n_used == 0


def test_mask_counts_identity():
    with pytest.raises(ValueError):
        MaskReport(10, 2, 2, 5)


def test_unit_helix_falls_below_threshold():
    traj, _ = synth.generate(synth.GenSpec(synth.helix(1.0, 1.0), duration_s=10.0))
    _, report = mask(kinematic_profile(traj), TAU_MIN)
    assert report.n_used == 0
    with pytest.raises(InsufficientSamples, match="n_used=0 "):
        fit(kinematic_profile(traj))


def test_log_exact_recovery():
    result = fit(_log_exact())
    assert result.alpha == pytest.approx(ALPHA, abs=1e-6)
    assert result.beta == pytest.approx(BETA, abs=1e-6)
    assert result.gamma == pytest.approx(GAMMA, abs=1e-6)
    assert result.r2 > 1 - 1e-9
    assert result.mask.n_used == 200


def test_constant_speed_gives_zero_exponents():
    base = _log_exact()
    prof = KinematicProfile.from_values(np.full(len(base), 0.07), base.kappa, base.tau)
    result = fit(prof)
    assert result.alpha == pytest.approx(0.07, rel=1e-9)
    assert abs(result.beta) < 1e-9 and abs(result.gamma) < 1e-9


def test_fit_is_deterministic(modulated_run):
    prof = kinematic_profile(modulated_run[0])
    assert fit(prof) == fit(prof)


def test_minimum_used_samples():
    prof = _log_exact(n=MIN_USED)
    assert fit(prof).mask.n_used == MIN_USED
    with pytest.raises(InsufficientSamples) as info:
        fit(_log_exact(n=MIN_USED - 1))
    assert info.value.report.n_used == MIN_USED - 1


def test_degenerate_design_names_regressor():
    base = _log_exact()
    prof = KinematicProfile.from_values(base.v, np.full(len(base), 10.0), base.tau)
    with pytest.raises(DegenerateDesign, match="log_kappa"):
        fit(prof)
    # on a plain helix curvature and torsion are both constant
    _, truth = synth.generate(synth.GenSpec(synth.helix(0.1, 0.1), duration_s=5.0))
    with pytest.raises(DegenerateDesign):
        fit(KinematicProfile.from_values(truth.v, truth.kappa, truth.tau))


def test_collinear_regressors():
    base = _log_exact()
    prof = KinematicProfile.from_values(base.v, base.kappa, 3.0 * base.kappa**2)
    with pytest.raises(DegenerateDesign, match="collinear"):
        fit(prof)


def test_predict_speed_examples():
    f = PowerLawFit(ALPHA, BETA, GAMMA, 1.0, MaskReport(1, 0, 0, 1))
    assert predict_speed(f, 8.0, 64.0) == pytest.approx(0.0125, rel=1e-12)
    assert predict_speed(f, 8.0, -64.0) == pytest.approx(0.0125, rel=1e-12)
    g = PowerLawFit(1.0, -0.7, 0.4, 1.0, MaskReport(1, 0, 0, 1))
    assert predict_speed(g, 1.0, 1.0) == 1.0
    with pytest.raises(DomainError):
        predict_speed(f, 0.0, 1.0)
    with pytest.raises(DomainError):
        predict_speed(f, 1.0, 0.0)
    planar = PowerLawFit(ALPHA, BETA, None, 1.0, MaskReport(1, 0, 0, 1), include_torsion=False)
    assert predict_speed(planar, 8.0) == pytest.approx(0.025)


def test_predict_round_trip():
    prof = _log_exact(seed=4)
    result = fit(prof)
    np.testing.assert_allclose(result.predict(prof.kappa, prof.tau), prof.v, rtol=1e-6)


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(-0.6, 0.0), gamma=st.floats(-0.6, 0.0), alpha=st.floats(1e-3, 10.0),
       seed=st.integers(0, 1000))
def test_exact_triples_recover_any_exponents(beta, gamma, alpha, seed):
    result = fit(_log_exact(n=60, seed=seed, alpha=alpha, beta=beta, gamma=gamma))
    assert result.beta == pytest.approx(beta, abs=1e-6)
    assert result.gamma == pytest.approx(gamma, abs=1e-6)
    assert result.alpha == pytest.approx(alpha, rel=1e-6)
    assert 0.0 <= result.r2 <= 1.0


def test_pipeline_recovery(modulated_run):
    traj, _ = modulated_run
    prof = kinematic_profile(traj).select(interior(len(traj)))
    result = fit(prof)
    assert abs(result.beta - BETA) < 0.02
    assert abs(result.gamma - GAMMA) < 0.02


# slowing the motion would push samples under the absolute torsion guard
@pytest.mark.parametrize("c", [0.01, 0.5, 0.9])
def test_time_rescaling(modulated_run, c):
    traj, _ = modulated_run
    base = fit(kinematic_profile(traj))
    slow = type(traj).from_arrays(traj.t * c, traj.pos)
    # cutoffs rescale with time so the filters act on the same normalised band
    result = fit(kinematic_profile(slow, 6.0 / c, 10.0 / c))
    assert result.beta == pytest.approx(base.beta, abs=1e-9)
    assert result.gamma == pytest.approx(base.gamma, abs=1e-9)
    assert result.alpha == pytest.approx(base.alpha / c, rel=1e-8)
    assert result.r2 == pytest.approx(base.r2, abs=1e-9)


@pytest.mark.parametrize("c", [2.0, 10.0])
def test_r2_invariant_to_position_scale(modulated_run, c):
    traj, _ = modulated_run
    base = fit(kinematic_profile(traj))
    scaled = fit(kinematic_profile(traj.with_positions(traj.pos * c)), TAU_MIN / c)
    assert scaled.mask == base.mask
    assert scaled.r2 == pytest.approx(base.r2, abs=1e-9)
    assert scaled.beta == pytest.approx(base.beta, abs=1e-6)


def test_curvature_only_model_is_nested(modulated_run):
    prof = kinematic_profile(modulated_run[0])
    full = fit(prof)
    reduced = fit(prof, include_torsion=False)
    assert reduced.mask == full.mask
    assert reduced.gamma is None
    assert reduced.rss >= full.rss
    assert reduced.r2 <= full.r2


def test_planar_curvature_only_fit():
    rng = np.random.default_rng(2)
    kappa = np.exp(rng.uniform(0, 4, 100))
    prof = KinematicProfile(np.arange(100.0), 0.1 * kappa ** (-1 / 3), kappa, np.zeros(100),
                            np.ones(100, bool), np.zeros(100, bool))
    result = fit(prof, tau_min=None, include_torsion=False)
    assert result.beta == pytest.approx(-1 / 3, abs=1e-9)
    assert result.alpha_units == "m^0.666667/s"
    with pytest.raises(ValueError):
        fit(prof, tau_min=None)
