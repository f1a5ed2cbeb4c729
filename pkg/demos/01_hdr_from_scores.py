"""Estimate a 95% highest-density region from a simulated bivariate sample.

The whole method in a dozen lines: score every sample point with a
neighborhood measure, cut the scores at the right order statistic, and the
region membership test becomes a single comparison.
"""

import numpy as np

import hdrkit as hk
from hdrkit.measures import MeasureSpec, fit_measure

rng = np.random.Generator(np.random.Philox(7))

# a correlated Gaussian cloud with a few planted outliers
n = 800
z = rng.standard_normal((n, 2))
pts = np.column_stack([z[:, 0], 0.8 * z[:, 0] + 0.6 * z[:, 1]])
pts[:10] += rng.choice([-8.0, 8.0], size=(10, 2))
sample = hk.Sample2D(pts)

for kind in ("m0-kde", "m1", "m3-ecdf"):
    fitted = fit_measure(MeasureSpec(kind), sample)
    scores = fitted.score_vector(sample)
    region = hk.estimate_hdr(scores, alpha=0.05, measure_id=kind)
    inside = hk.classify(region, scores.scores)
    flagged_planted = int(np.count_nonzero(~inside[:10]))
    print(
        f"{kind:8s} orientation={fitted.orientation.value:13s} "
        f"threshold={region.threshold:.5f} inside={inside.mean():.1%} "
        f"planted outliers flagged: {flagged_planted}/10"
    )

# the same rule through the classical density-quantile entry point
kde = fit_measure(MeasureSpec("m0-kde"), sample)
region = hk.density_quantile_hdr(kde.score(sample.points), alpha=0.05)
print(f"\ndensity-quantile alias reproduces the KDE threshold: {region.threshold:.5f}")
