"""Sample eigenvalue scales.

For alpha > 1 the top eigenvalue of the X covariance grows like d^alpha and
n * lambda_1 / d^alpha behaves like sigma^2 chi^2_n, with mean n sigma^2.

For alpha < 1 the spike is invisible and the non-spike eigenvalues behave like
tau^2 d / n, and the cross-covariance singular values like tau_x tau_y d / n.
These last two limits are approached slowly: at d = 500, n = 20 the bulk edge
still inflates them by roughly (1 + sqrt(n/d))^2.  The table below shows the
ratio approaching one as d grows with n fixed.
"""
import math

import numpy as np

from hdlss_cca import GridConfig, build_population_model, generate_dataset, joint_sqrt
from hdlss_cca.estimator import cross_covariance_singular_values, sample_eigh
from hdlss_cca.harness import rep_stream, run_grid

n = 20
cfg = GridConfig(n_values=(n,), d_values=(500,), alpha_values=(8.0,), reps=200)
spike = np.mean([r.lambda_x1_scaled for r in run_grid(cfg).records])
print(f"alpha=8, d=500: mean n*lambda_1/d^alpha = {spike:.2f} (limit {n})\n")

print("alpha=0.2, n=20")
print(f"{'d':>6} {'mean n*lambda_2/d':>18} {'mean lambda_xy2/d':>18} {'(1+sqrt(n/d))^2':>16}")
for d in (500, 2000, 8000, 32000):
    p = cfg.params(d, 0.2)
    model = build_population_model(p)
    root = joint_sqrt(model)
    lam2, sxy2 = [], []
    for rep in range(40):
        data = generate_dataset(model, root, n, rep_stream(cfg.master_seed, n, d, 0.2, rep))
        vals, _, _ = sample_eigh(np.asarray(data.x), n)
        lam2.append(n * vals[1] / d)
        sxy2.append(cross_covariance_singular_values(data.x, data.y)[1] / d)
    print(f"{d:>6} {np.mean(lam2):>18.3f} {np.mean(sxy2):>18.4f} "
          f"{(1 + math.sqrt(n / d)) ** 2:>16.3f}")
print(f"{'limit':>6} {1.0:>18.3f} {1 / n:>18.4f}")
