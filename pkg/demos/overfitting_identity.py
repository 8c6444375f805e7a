"""With fewer samples than variables, pseudoinverse CCA finds perfect correlation
between two independent noise matrices.

Whitening each block by its own sample covariance makes its n x n score matrix
orthogonal, so every canonical correlation equals one regardless of the data.
"""
import numpy as np

from hdlss_cca import cca_fit

rng = np.random.default_rng(20240501)
n, d = 20, 100
x = rng.standard_normal((d, n))
y = rng.standard_normal((d, n))

est = cca_fit(x, y)
print(f"n={n}, d={d}: {len(est.rho_hat)} canonical correlations")
print("rho_hat:", np.array2string(est.rho_hat, precision=12))
print(f"max |rho_hat - 1| = {np.abs(est.rho_hat - 1).max():.2e}")

# with many more samples than variables the same estimator behaves classically
x = rng.standard_normal((5, 2000))
y = rng.standard_normal((5, 2000))
print("\nn=2000, d=5 independent blocks:", np.round(cca_fit(x, y).rho_hat, 3))
