"""Population structure of the two-block spiked covariance model.

Both X and Y live in R^d with covariance diag(sigma2 * d**alpha, tau2, ..., tau2).
A single canonical pair (psi_x, psi_y) with correlation rho mixes the first two
coordinates of each block, so the joint covariance of T = (X, Y) differs from a
diagonal matrix only on the index set {0, 1, d, d+1} (0-based).  Everything here
exploits that: no 2d x 2d matrix is ever stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np

# 0-based positions, inside the joint 2d-vector, of the four mixing coordinates
# are (0, 1, d, d+1); inside the 4x4 core they are (0, 1, 2, 3).
PSD_TOL = 1e-10


class ModelError(ValueError):
    """Raised for invalid spiked-model parameters or a non-PSD joint covariance."""


@dataclass(frozen=True)
class SpikedParams:
    """Population parameters of the spiked model.

    ``alpha`` is the spike exponent, ``rho`` the population canonical correlation
    and ``theta_x``/``theta_y`` the angles between the canonical weight vectors
    and the leading eigenvectors.
    """

    sigma2_x: float = 1.0
    tau2_x: float = 1.0
    sigma2_y: float = 1.0
    tau2_y: float = 1.0
    alpha: float = 8.0
    rho: float = 0.7
    theta_x: float = 0.75 * np.pi
    theta_y: float = 0.75 * np.pi
    d: int = 200


def validate_params(p: SpikedParams) -> None:
    """Raise :class:`ModelError` naming every violated constraint of ``p``."""
    problems = []
    for name in ("sigma2_x", "tau2_x", "sigma2_y", "tau2_y"):
        value = getattr(p, name)
        if not np.isfinite(value) or value <= 0:
            problems.append(f"{name} must be > 0 (got {value!r})")
    if not np.isfinite(p.alpha) or p.alpha < 0:
        problems.append(f"alpha must be >= 0 (got {p.alpha!r})")
    if not (0.0 <= p.rho <= 1.0):
        problems.append(f"rho out of [0,1] (got {p.rho!r})")
    for name in ("theta_x", "theta_y"):
        value = getattr(p, name)
        if not (0.0 <= value <= np.pi):
            problems.append(f"{name} out of [0, pi] (got {value!r})")
    if int(p.d) != p.d or p.d < 3:
        problems.append(f"d must be ≥ 3 (got {p.d!r})")
    if problems:
        raise ModelError("; ".join(problems))


@dataclass(frozen=True)
class StructuredSqrt:
    """Symmetric square root of the joint covariance, stored in O(1).

    ``core4`` acts on latent rows (0, 1, d, d+1); every other X coordinate is
    scaled by ``bulk_x`` and every other Y coordinate by ``bulk_y``.
    """

    core4: np.ndarray
    bulk_x: float
    bulk_y: float


@dataclass(frozen=True)
class PopulationModel:
    params: SpikedParams
    sigma_x_diag: np.ndarray
    sigma_y_diag: np.ndarray
    cross_block: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray
    a_norm: float
    b_norm: float
    _sqrt_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.params.d

    @cached_property
    def core_block(self) -> np.ndarray:
        """The 4x4 sub-block of the joint covariance on indices (0, 1, d, d+1)."""
        block = np.zeros((4, 4))
        block[0, 0], block[1, 1] = self.sigma_x_diag[0], self.sigma_x_diag[1]
        block[2, 2], block[3, 3] = self.sigma_y_diag[0], self.sigma_y_diag[1]
        block[:2, 2:] = self.cross_block
        block[2:, :2] = self.cross_block.T
        return block

    def dense_joint_covariance(self) -> np.ndarray:
        """Materialise the full 2d x 2d joint covariance (testing aid, small d only)."""
        d = self.d
        sigma = np.diag(np.concatenate([self.sigma_x_diag, self.sigma_y_diag]))
        sigma[:2, d:d + 2] = self.cross_block
        sigma[d:d + 2, :2] = self.cross_block.T
        return sigma


def _spike_and_mixing(p: SpikedParams):
    spike_x = p.sigma2_x * float(p.d) ** p.alpha
    spike_y = p.sigma2_y * float(p.d) ** p.alpha
    cx, sx = np.cos(p.theta_x), np.sin(p.theta_x)
    cy, sy = np.cos(p.theta_y), np.sin(p.theta_y)
    return spike_x, spike_y, cx, sx, cy, sy


def build_population_model(p: SpikedParams) -> PopulationModel:
    validate_params(p)
    d = int(p.d)
    spike_x, spike_y, cx, sx, cy, sy = _spike_and_mixing(p)

    sigma_x_diag = np.full(d, float(p.tau2_x))
    sigma_x_diag[0] = spike_x
    sigma_y_diag = np.full(d, float(p.tau2_y))
    sigma_y_diag[0] = spike_y

    # Standard deviations of <psi_x, X> and <psi_y, Y>.
    a_norm = np.sqrt(spike_x * cx**2 + p.tau2_x * sx**2)
    b_norm = np.sqrt(spike_y * cy**2 + p.tau2_y * sy**2)

    # rho * Sigma_x psi_x psi_y^T Sigma_y / (A B), restricted to its nonzero 2x2 block.
    sx_psi = np.array([spike_x * cx, p.tau2_x * sx])
    sy_psi = np.array([spike_y * cy, p.tau2_y * sy])
    cross_block = p.rho * np.outer(sx_psi, sy_psi) / (a_norm * b_norm)

    psi_x = np.zeros(d)
    psi_x[:2] = cx, sx
    psi_y = np.zeros(d)
    psi_y[:2] = cy, sy

    for arr in (sigma_x_diag, sigma_y_diag, cross_block, psi_x, psi_y):
        arr.setflags(write=False)

    return PopulationModel(
        params=p,
        sigma_x_diag=sigma_x_diag,
        sigma_y_diag=sigma_y_diag,
        cross_block=cross_block,
        psi_x=psi_x,
        psi_y=psi_y,
        a_norm=float(a_norm),
        b_norm=float(b_norm),
    )


def _symmetric_sqrt_4x4(block: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Symmetric PSD square root of a small graded symmetric matrix.

    Diagonal entries can differ by 20+ orders of magnitude (spike vs bulk), so a
    double-precision eigensolve would wipe out the small eigenpairs.  The problem
    is solved with mpmath at a working precision sized to the diagonal spread and
    rounded back to float64.  Returns (sqrt, min eigenvalue, max eigenvalue).
    """
    diag = np.abs(np.diag(block))
    spread = diag.max() / max(diag[diag > 0].min(), np.finfo(float).tiny)
    dps = 40 + int(np.ceil(np.log10(max(spread, 1.0))))
    with mpmath.workdps(dps):
        a = mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in block])
        vals, vecs = mpmath.eigsy(a)
        k = block.shape[0]
        lam = [vals[i] for i in range(k)]
        lam_max = max(lam)
        lam_min = min(lam)
        roots = [mpmath.sqrt(v) if v > 0 else mpmath.mpf(0) for v in lam]
        out = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                acc = mpmath.fsum(vecs[i, q] * roots[q] * vecs[j, q] for q in range(k))
                out[i, j] = out[j, i] = float(acc)
    return out, float(lam_min), float(lam_max)


def joint_sqrt(m: PopulationModel) -> StructuredSqrt:
    """Symmetric PSD square root of the joint covariance in structured form.

    Only a 4x4 symmetric eigenproblem is solved, so the cost does not depend on d.
    Raises :class:`ModelError` when the core block has an eigenvalue below
    ``-1e-10 * lambda_max``.
    """
    cached = m._sqrt_cache.get("sqrt")
    if cached is not None:
        return cached

    core4, lam_min, lam_max = _symmetric_sqrt_4x4(m.core_block)
    if lam_min < -PSD_TOL * lam_max:
        raise ModelError(
            f"joint covariance not PSD: eigenvalue {lam_min:.3e} vs largest {lam_max:.3e}"
        )
    core4.setflags(write=False)
    result = StructuredSqrt(
        core4=core4,
        bulk_x=float(np.sqrt(m.params.tau2_x)),
        bulk_y=float(np.sqrt(m.params.tau2_y)),
    )
    m._sqrt_cache["sqrt"] = result
    return result
