# Separability tests: PPT, the structural physical approximation (SPA) and its sampled estimate.
import numpy as np

from entsearch.entdetect import (
    CopyEstimatorConfig,
    choi_state,
    PositiveMapSpec,
    ppt_test,
    spa_test_estimated,
    spa_test_exact,
    transpose_spa,
)
from entsearch.qsim import DensityOp, bell_state, density_from_state, depolarize

spa = transpose_spa(2)
print("Choi spectrum:", np.round(np.linalg.eigvalsh(choi_state(PositiveMapSpec.transpose(2), 2).matrix), 4))
print("lambda", spa.lam, " mixing", round(spa.mixing, 6), " threshold", round(spa.threshold, 6))

bell = density_from_state(bell_state())
for p in (0.0, 0.5, 2 / 3, 0.8, 1.0):
    rho = depolarize(bell, p)
    a, b = ppt_test(rho), spa_test_exact(rho, spa)
    print(f"p={p:.3f}  ppt {a.verdict:<10} {a.statistic:+.4f}   spa {b.verdict:<10} {b.statistic:.4f}")

# a sampled estimate: N copies, r-fold majority vote
for n in (16, 256, 4096, 1 << 14):
    v = spa_test_estimated(bell, spa, CopyEstimatorConfig(n, seed=7, repetitions=5))
    print(f"N={n:<6} estimate {v.statistic:.4f} -> {v.verdict}")

# separable product states sit exactly on the threshold, so the sampled test
# cannot confirm them: the minimum of three bins of weight 2/9 usually undershoots
product = DensityOp(np.diag([1.0, 0, 0, 0]), (2, 2))
print("product state exact:", spa_test_exact(product, spa).statistic)
votes = [spa_test_estimated(product, spa, CopyEstimatorConfig(1 << 14, seed=s, repetitions=5)).verdict
         for s in range(20)]
print("product state sampled verdicts:", {v: votes.count(v) for v in set(votes)})
