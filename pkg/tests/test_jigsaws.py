import numpy as np
import pytest

from kinlaw import jigsaws, synth


@pytest.fixture(scope="module")
def fake_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("Suturing")
    (root / "kinematics" / "AllGestures").mkdir(parents=True)
    (root / "transcriptions").mkdir()
    traj, _ = synth.generate(synth.GenSpec(synth.modulated_helix(), rate_hz=30.0, duration_s=40.0))
    n = len(traj)
    data = np.zeros((n, 76))
    data[:, 57:60] = traj.pos
    data[:, 38:41] = traj.pos[::-1] + 0.1
    np.savetxt(root / "kinematics" / "AllGestures" / "Suturing_B001.txt", data, fmt="%.17g")
    third = n // 4
    (root / "transcriptions" / "Suturing_B001.txt").write_text(
        f"1 {third} G2\n{third + 1} {2 * third} G3\n{2 * third + 1} {3 * third} G6\n"
        f"{3 * third + 1} {n} G4\n")
    (root / "meta_file_Suturing.txt").write_text("Suturing_B001\tN\t13\t2\t2\t2\t3\t2\t2\n")
    return root, traj


def test_meta_and_labels(fake_root):
    root, traj = fake_root
    info = jigsaws.read_meta(root)["Suturing_B001"]
    assert (info.subject, info.skill, info.grs) == ("B", "N", 13.0)
    assert jigsaws.available_trials(root) == ["Suturing_B001"]
    labels = jigsaws.read_labels(root / "transcriptions" / "Suturing_B001.txt", len(traj) + 5)
    assert labels[0] == "G2" and labels[-1] == jigsaws.UNLABELLED


def test_arm_columns(fake_root):
    root, traj = fake_root
    right = jigsaws.load_arm(root, "Suturing_B001", "right")
    np.testing.assert_array_equal(right.pos, traj.pos)
    assert right.rate_hz == jigsaws.RATE_HZ


def test_trial_fits_pick_gestures_per_arm(fake_root):
    root, _ = fake_root
    rows = jigsaws.trial_fits(root, "Suturing_B001")
    assert [r["segment"] for r in rows] == ["G2", "G3", "G6", "G4"]
    # G3 is away from the trial ends, clear of the filter start-up transient
    assert abs(rows[1]["beta"] + 1 / 3) < 0.02
