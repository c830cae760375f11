import numpy as np
import pytest

from kinlaw import synth
from kinlaw.diffgeo import KinematicProfile, kinematic_profile
from kinlaw.errors import DegeneratePath, OutOfRange
from kinlaw.powerlaw import fit

from conftest import interior


def _fd_geometry(curve, u, h=1e-3):
    # fourth-order central stencils on positions only
    p = lambda k: curve(u + k * h)  # noqa: E731
    d1 = (p(-2) - 8 * p(-1) + 8 * p(1) - p(2)) / (12 * h)
    d2 = (-p(-2) + 16 * p(-1) - 30 * p(0) + 16 * p(1) - p(2)) / (12 * h**2)
    d3 = (p(-3) - 8 * p(-2) + 13 * p(-1) - 13 * p(1) + 8 * p(2) - p(3)) / (8 * h**3)
    cross = np.cross(d1, d2)
    speed = np.linalg.norm(d1, axis=1)
    kappa = np.linalg.norm(cross, axis=1) / speed**3
    tau = np.einsum("ij,ij->i", cross, d3) / np.einsum("ij,ij->i", cross, cross)
    return kappa, tau


def test_helix_constant_speed():
    traj, truth = synth.generate(synth.GenSpec(synth.helix(1.0, 1.0), duration_s=20.0))
    np.testing.assert_allclose(truth.v, 0.05 * np.sqrt(2), rtol=1e-12)
    np.testing.assert_allclose(truth.kappa, 0.5, rtol=1e-12)
    np.testing.assert_allclose(np.diff(traj.t), 0.01, atol=1e-12)
    assert traj.t[0] == 0.0 and len(traj) == 2001
    # positions land where constant speed puts them
    np.testing.assert_allclose(truth.s, 0.05 * np.sqrt(2) * traj.t, atol=1e-9)


def test_zero_exponents_give_constant_speed(modulated_run):
    spec = synth.GenSpec(synth.modulated_helix(), alpha=0.03, beta=0.0, gamma=0.0, duration_s=10.0)
    traj, truth = synth.generate(spec)
    np.testing.assert_allclose(truth.v, 0.03, rtol=1e-12)
    np.testing.assert_allclose(truth.s, 0.03 * traj.t, rtol=1e-9, atol=1e-12)


def test_helix_closed_forms():
    p, kappa, tau = synth.analytic_geometry(synth.helix(1.0, 1.0, length_s=10.0), 3.0)
    assert (kappa, tau) == (0.5, 0.5)
    _, kappa, tau = synth.analytic_geometry(synth.helix(2.0, 0.5, length_s=10.0), 1.0)
    assert kappa == pytest.approx(2 / 4.25, abs=1e-15)
    assert tau == pytest.approx(0.5 / 4.25, abs=1e-15)
    assert round(kappa, 4) == 0.4706 and round(tau, 4) == 0.1176
    assert np.linalg.norm(p[:2]) == pytest.approx(1.0)


def test_helix_arc_length_parametrisation():
    path = synth.helix(0.02, 0.01, length_s=1.0)
    s = np.linspace(0.0, 1.0, 1001)
    p, _, _ = synth.analytic_geometry(path, s)
    steps = np.linalg.norm(np.diff(p, axis=0), axis=1)
    np.testing.assert_allclose(steps.sum(), 1.0, rtol=1e-4)


@pytest.mark.parametrize("seed", [0, 3, 5])
def test_spline_geometry_matches_finite_differences(seed):
    path = synth.spline(seed=seed)
    length = synth.path_length(path)
    s = np.linspace(0.02, 0.98, 60) * length
    _, kappa, tau = synth.analytic_geometry(path, s)
    u = synth._table_for(path, length).u_at(s)
    fd_kappa, fd_tau = _fd_geometry(synth._spline_curve(path), u)
    np.testing.assert_allclose(kappa, fd_kappa, rtol=1e-6)
    np.testing.assert_allclose(tau, fd_tau, rtol=1e-6)


def test_modulated_geometry_matches_finite_differences():
    path = synth.modulated_helix(length_s=2.0)
    s = np.linspace(0.0, 2.0, 50)
    _, kappa, tau = synth.analytic_geometry(path, s)
    u = synth._table_for(path, 2.0).u_at(s)
    fd_kappa, fd_tau = _fd_geometry(lambda x: synth._derivs(path, x)[0], u, h=3e-3)
    np.testing.assert_allclose(kappa, fd_kappa, rtol=1e-6)
    np.testing.assert_allclose(tau, fd_tau, rtol=1e-6)


def test_out_of_range():
    path = synth.helix(1.0, 1.0, length_s=5.0)
    with pytest.raises(OutOfRange):
        synth.analytic_geometry(path, 5.5)
    with pytest.raises(OutOfRange):
        synth.analytic_geometry(path, -0.1)
    with pytest.raises(OutOfRange):
        synth.generate(synth.GenSpec(synth.spline(seed=0), duration_s=1e6))


def test_degenerate_paths():
    theta = np.linspace(0, 3 * np.pi, 10)
    planar = np.stack([np.cos(theta), np.sin(theta), 0 * theta], axis=1)
    with pytest.raises(DegeneratePath) as info:
        synth.generate(synth.GenSpec(synth.spline(planar)))
    assert info.value.quantity == "torsion"
    assert info.value.arc_length == 0.0
    # strong radius wobble drives the torsion through zero partway along
    wobbly = synth.modulated_helix(amplitude=0.25, wobble_frequency=1.5)
    with pytest.raises(DegeneratePath) as info:
        synth.generate(synth.GenSpec(wobbly, duration_s=20.0))
    assert info.value.arc_length > 0


def test_spec_validation():
    with pytest.raises(ValueError):
        synth.helix(a=0.0, length_s=1.0)
    with pytest.raises(ValueError):
        synth.helix(b=0.0, length_s=1.0)
    with pytest.raises(ValueError):
        synth.spline([[0, 0, 0]] * 4)
    with pytest.raises(ValueError):
        synth.GenSpec(synth.modulated_helix(), alpha=0.0, duration_s=1.0)
    with pytest.raises(ValueError, match="at least 100"):
        synth.generate(synth.GenSpec(synth.modulated_helix(), duration_s=0.5))


def test_determinism():
    spec = synth.GenSpec(synth.spline(seed=2), speed_noise_sd=0.05, seed=9)
    a_traj, a_truth = synth.generate(spec)
    b_traj, b_truth = synth.generate(spec)
    assert a_traj.t.tobytes() == b_traj.t.tobytes()
    assert a_traj.pos.tobytes() == b_traj.pos.tobytes()
    assert a_truth.v.tobytes() == b_truth.v.tobytes()
    c_traj, _ = synth.generate(synth.GenSpec(synth.spline(seed=2), speed_noise_sd=0.05, seed=10))
    assert not np.array_equal(a_traj.pos, c_traj.pos)


@pytest.mark.parametrize("run", ["modulated_run", "spline_run"])
def test_ground_truth_speed_matches_positions(run, request):
    traj, truth = request.getfixturevalue(run)
    fd = np.linalg.norm(np.gradient(traj.pos, traj.t, axis=0, edge_order=2), axis=1)
    inner = interior(len(traj))
    np.testing.assert_allclose(fd[inner], truth.v[inner], rtol=1e-3)


def test_ground_truth_fit_is_exact(modulated_run):
    _, truth = modulated_run
    result = fit(KinematicProfile.from_values(truth.v, truth.kappa, truth.tau))
    assert result.alpha == pytest.approx(0.05, abs=1e-6)
    assert result.beta == pytest.approx(-1 / 3, abs=1e-6)
    assert result.gamma == pytest.approx(-1 / 6, abs=1e-6)


def test_noise_is_multiplicative_lognormal():
    spec = synth.GenSpec(synth.modulated_helix(), speed_noise_sd=0.1, seed=1, duration_s=60.0)
    _, truth = synth.generate(spec)
    clean = 0.05 * truth.kappa ** (-1 / 3) * np.abs(truth.tau) ** (-1 / 6)
    log_ratio = np.log(truth.v / clean)
    # one draw per sample period, interpolated, so the spread is close to sd
    assert abs(log_ratio.mean()) < 0.02
    assert 0.07 < log_ratio.std() < 0.11


@pytest.mark.parametrize("path", [synth.modulated_helix(), synth.spline(seed=3)], ids=["modulated", "spline"])
def test_round_trip_recovery(path):
    spec = synth.GenSpec(path, duration_s=60.0 if path.kind != "spline" else None)
    traj, truth = synth.generate(spec)
    prof = kinematic_profile(traj).select(interior(len(traj)))
    tau_min = 0.5 * np.abs(truth.tau).min()
    result = fit(prof, tau_min)
    assert abs(result.beta - spec.beta) < 0.02
    assert abs(result.gamma - spec.gamma) < 0.02
    assert result.alpha == pytest.approx(spec.alpha, rel=0.05)


def test_noise_degrades_gracefully():
    errors = []
    for sd in (0.0, 0.02, 0.05, 0.1):
        err = []
        for seed in range(6):
            spec = synth.GenSpec(synth.modulated_helix(), speed_noise_sd=sd, seed=seed, duration_s=60.0)
            traj, _ = synth.generate(spec)
            r = fit(kinematic_profile(traj).select(interior(len(traj))))
            err.append(abs(r.beta - spec.beta) + abs(r.gamma - spec.gamma))
        errors.append(np.mean(err))
    assert all(a < b for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 0.05
