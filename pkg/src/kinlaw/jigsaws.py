"""Reader for the JIGSAWS suturing kinematics (external data, not bundled).

The dataset directory is the task folder, e.g. ``Suturing/``, holding
``kinematics/AllGestures/<trial>.txt`` (76 whitespace-separated columns at
30 Hz), ``transcriptions/<trial>.txt`` (``start end gesture`` rows, 1-based
inclusive frames) and ``meta_file_Suturing.txt`` (trial, skill level, GRS,
item scores).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pipeline import TRIAL, PipelineConfig, analyze
from .trajectory import Trajectory

RATE_HZ = 30.0
# tool-tip position columns (0-based) of the patient-side manipulators
PSM_COLUMNS = {"left": slice(38, 41), "right": slice(57, 60)}
# gestures analysed per arm: positioning and pushing with the right tool,
# pulling and transferring with the left
GESTURE_ARM = {"G2": "right", "G3": "right", "G6": "left", "G4": "left"}
UNLABELLED = ""


@dataclass(frozen=True)
class TrialInfo:
    trial: str
    subject: str
    skill: str
    grs: float


def read_meta(root) -> dict:
    root = Path(root)
    meta = {}
    for line in (root / "meta_file_Suturing.txt").read_text().splitlines():
        parts = line.split()
        if len(parts) < 3:
            continue
        trial = parts[0]
        # trial names end in <subject letter><3-digit repetition>
        meta[trial] = TrialInfo(trial, trial[-4], parts[1], float(parts[2]))
    return meta


def read_labels(path, n_frames) -> list:
    labels = [UNLABELLED] * n_frames
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if len(parts) < 3:
            continue
        start, end = int(parts[0]), int(parts[1])
        for i in range(max(start - 1, 0), min(end, n_frames)):
            labels[i] = parts[2]
    return labels


def load_arm(root, trial, arm) -> Trajectory:
    """One PSM tool-tip trajectory, labelled with the gesture transcription."""
    root = Path(root)
    data = np.loadtxt(root / "kinematics" / "AllGestures" / f"{trial}.txt")
    pos = data[:, PSM_COLUMNS[arm]]
    t = np.arange(len(pos)) / RATE_HZ
    labels = read_labels(root / "transcriptions" / f"{trial}.txt", len(pos))
    return Trajectory.from_arrays(t, pos, labels=labels, rate_hz=RATE_HZ)


def trial_fits(root, trial, config: PipelineConfig = PipelineConfig()) -> list:
    """Per-repetition fit rows for the analysed gestures of one trial.

    Each arm is filtered over the whole trial, then split into gesture runs.
    """
    rows = []
    for arm in ("right", "left"):
        wanted = {g for g, a in GESTURE_ARM.items() if a == arm}
        arm_rows, _ = analyze(load_arm(root, trial, arm), config)
        rows.extend(r for r in arm_rows if r["segment"] != TRIAL and r["segment"] in wanted)
    return rows


def available_trials(root) -> list:
    root = Path(root)
    meta = read_meta(root)
    kin = root / "kinematics" / "AllGestures"
    return sorted(t for t in meta if (kin / f"{t}.txt").exists()
                  and (root / "transcriptions" / f"{t}.txt").exists())
