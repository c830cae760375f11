"""
Group statistics on fitted exponents
====================================

A simulated study: 8 surgeons, 5 suturing trials each, four segments per
trial. Each trial gets a skill score (GRS, 5..30) and a curvature exponent
that drifts with skill and differs between segments. The script runs the
analyses used for such data: a global regression on GRS, a common-slope
regression with per-surgeon intercepts, a repeated-measures ANOVA across
segments and Bonferroni-corrected paired comparisons.
"""

import itertools

import numpy as np

from kinlaw import stats

rng = np.random.default_rng(7)
segments = ["G2", "G3", "G6", "G4"]
segment_shift = dict(zip(segments, [0.00, -0.03, 0.01, 0.02]))

records = []
for s in range(8):
    subject = f"S{s + 1}"
    base_grs = rng.uniform(8, 24)
    offset = rng.normal(0, 0.04)
    for k in range(5):
        grs = float(np.clip(base_grs + 1.2 * k + rng.normal(0, 1.5), 5, 30))
        for seg in segments:
            for rep in range(4):  # needle passes within a trial
                beta = -0.33 - 0.004 * grs + offset + segment_shift[seg] + rng.normal(0, 0.12)
                records.append(stats.TrialRecord(subject, "dVSS", seg, alpha=0.05, beta=beta,
                                                 gamma=-0.2, r2=0.9, grs=grs, trial_id=f"{subject}-{k}"))

# One value per trial: average the repetitions of each segment, then the segments.
trials = {}
for r in records:
    trials.setdefault(r.trial_id, {}).setdefault(r.segment, []).append(r)
trial_records = []
for trial_id, by_seg in sorted(trials.items()):
    first = next(iter(by_seg.values()))[0]
    beta = np.mean([np.mean([r.beta for r in reps]) for reps in by_seg.values()])
    trial_records.append(stats.TrialRecord(first.subject_id, first.condition, "trial", first.alpha,
                                           beta, first.gamma, first.r2, first.grs, trial_id))

grs = [r.grs for r in trial_records]
beta = [r.beta for r in trial_records]
global_fit = stats.ols(beta, grs, names=["grs"])
slope = global_fit.coefficients["grs"]
print(f"global regression: slope {slope.estimate:+.5f} per GRS point, "
      f"t{slope.dof} = {slope.statistic:.3f}, p = {slope.p_value:.3g}")

rm = stats.rm_regression(trial_records, "beta")
slope = rm.coefficients["grs"]
print(f"repeated-measures regression: slope {slope.estimate:+.5f}, "
      f"F{rm.dof} = {rm.f_stat:.3f}, p = {rm.p_value:.3g}")

anova = stats.rm_anova_1way(records, "beta", factor="segment")
print(f"segment ANOVA: F{anova.dof} = {anova.f_stat:.3f}, p = {anova.p_value:.3g}")

# Post-hoc paired t tests on per-surgeon segment means, Bonferroni corrected
# over the six pairs.
cells = {}
for r in records:
    cells.setdefault((r.subject_id, r.segment), []).append(r.beta)
subjects = sorted({s for s, _ in cells})
means = {seg: np.array([np.mean(cells[(s, seg)]) for s in subjects]) for seg in segments}
pairs = list(itertools.combinations(segments, 2))
print("\npair      mean diff      t      p_B")
for a, b in pairs:
    d = means[a] - means[b]
    t = d.mean() / (d.std(ddof=1) / np.sqrt(len(d)))
    p_b = stats.bonferroni(stats.t_sf_two_sided(t, len(d) - 1), len(pairs))
    print(f"{a}-{b}   {d.mean():+9.4f}  {t:+6.2f}   {p_b:.3g}")

print("\nsegment means with 95% CI")
for row in stats.cell_summaries(records, "beta", by=("segment",)):
    print(f"{row['segment']}  {row['mean']:+.4f}  [{row['ci_low']:+.4f}, {row['ci_high']:+.4f}]  n={row['n']}")
