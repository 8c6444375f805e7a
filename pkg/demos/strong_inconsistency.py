"""A weak spike (alpha = 0.2): the spike is buried in the bulk, so every sample
canonical correlation is one and the weight vectors point nowhere near psi_X.
Their inner products with psi_X shrink like 1/sqrt(d).
"""
import numpy as np

from hdlss_cca import GridConfig, run_grid

cfg = GridConfig(n_values=(20,), d_values=(200, 500, 2000), alpha_values=(0.2,), reps=50)
result = run_grid(cfg)

print(f"{'d':>5} {'min rho_hat':>12} {'mean|<psi_i,psi>| (i=1..5)':>40}")
for n, d, alpha in cfg.cells():
    recs = [r for r in result.records if r.cell == (n, d, alpha)]
    rho = np.array([r.rho_hat for r in recs])
    inner = np.array([r.abs_inner_x for r in recs]).mean(axis=0)
    print(f"{d:>5} {rho.min():>12.8f} {np.array2string(inner, precision=3):>40}")
