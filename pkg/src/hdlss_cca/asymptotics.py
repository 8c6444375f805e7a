"""Closed-form d -> infinity limits (n fixed) for the spiked two-block model."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .spiked_model import SpikedParams, validate_params


class Regime(str, Enum):
    ALPHA_ABOVE_1 = "AlphaAbove1"
    ALPHA_BELOW_1 = "AlphaBelow1"


@dataclass(frozen=True)
class Theorem1Constants:
    """Constants of the alpha > 1 limit of the first sample canonical correlation.

    ``c1 >= c2`` are the eigenvalues of [[s2x, rho sx sy], [rho sx sy, s2y]] and
    (a1, a2), (b1, b2) the matching unit eigenvectors.  ``m1_coef_*`` and
    ``m2_coef_*`` mix the latent rows z1, z2 into the limiting score vectors.
    """

    c1: float
    c2: float
    a1: float
    a2: float
    b1: float
    b2: float
    m1_coef_z1: float
    m1_coef_z2: float
    m2_coef_z1: float
    m2_coef_z2: float


def theorem1_constants(sigma2_x: float, sigma2_y: float, rho: float) -> Theorem1Constants:
    if not (sigma2_x > 0 and sigma2_y > 0):
        raise ValueError("sigma2_x and sigma2_y must be > 0")
    if rho == 0:
        raise ValueError("degenerate: rho=0 (no correlated pair, A/B ratios are 0/0)")
    if not (0 < rho <= 1):
        raise ValueError(f"rho must lie in (0, 1] (got {rho!r})")

    sx, sy = math.sqrt(sigma2_x), math.sqrt(sigma2_y)
    diff = sigma2_x - sigma2_y
    q = 4 * sigma2_x * sigma2_y * rho**2
    root = math.sqrt(diff**2 + q)
    c1 = (sigma2_x + sigma2_y + root) / 2
    # c1 * c2 = det; avoids cancellation in (trace - root) / 2 when rho is small
    c2 = max(sigma2_x * sigma2_y * (1 - rho**2) / c1, 0.0)

    # c1 - s2y = (diff + root) / 2 and c2 - s2y = (diff - root) / 2, each
    # rewritten through (root - diff)(root + diff) = q where the sum cancels
    up = (diff + root) / 2 if diff >= 0 else q / (2 * (root - diff))
    down = (diff - root) / 2 if diff <= 0 else -q / (2 * (diff + root))
    ta = up / (rho * sx * sy)
    tb = down / (rho * sx * sy)
    a1, a2 = ta / math.hypot(ta, 1.0), 1.0 / math.hypot(ta, 1.0)
    b1, b2 = tb / math.hypot(tb, 1.0), 1.0 / math.hypot(tb, 1.0)

    r1, r2 = math.sqrt(c1), math.sqrt(c2)
    diag_coef = r1 * a1**2 + r2 * b1**2
    off_coef = r1 * a1 * a2 + r2 * b1 * b2
    return Theorem1Constants(
        c1=c1, c2=c2, a1=a1, a2=a2, b1=b1, b2=b2,
        m1_coef_z1=diag_coef, m1_coef_z2=off_coef,
        m2_coef_z1=off_coef, m2_coef_z2=diag_coef,
    )


def limit_rho1(z1, z2, c: Theorem1Constants) -> float:
    """Cosine similarity of m1 and m2: the random limit of the first sample correlation."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape != z2.shape or z1.ndim != 1 or z1.size < 2:
        raise ValueError("z1 and z2 must be 1-d arrays of equal length n >= 2")
    m1 = c.m1_coef_z1 * z1 + c.m1_coef_z2 * z2
    m2 = c.m2_coef_z1 * z1 + c.m2_coef_z2 * z2
    n1, n2 = np.linalg.norm(m1), np.linalg.norm(m2)
    if n1 == 0 or n2 == 0:
        raise ValueError("zero-norm m1 or m2")
    return float(np.clip(m1 @ m2 / (n1 * n2), -1.0, 1.0))


@dataclass(frozen=True)
class LimitPrediction:
    regime: Regime
    abs_inner_x_first: float
    abs_inner_y_first: float
    abs_inner_rest: float
    rho_first: float | None
    rho_rest: float
    lambda_xy_rest_over_d: float
    pc_eigval_scale: dict
    pc_eigval_rest: dict

    def to_dict(self) -> dict:
        out = asdict(self)
        out["regime"] = self.regime.value
        return out


def predicted_limits(p: SpikedParams, n: int) -> LimitPrediction:
    """Limits of the CCA and PCA statistics for ``p`` as d grows with ``n`` fixed.

    ``rho_first`` is None for alpha > 1 because the limit is random (see
    :func:`limit_rho1`).  ``pc_eigval_scale`` describes the law of
    lambda_x1 / max(d**alpha, d) as ``scale * chi2(df) / n + shift``, or a
    constant when ``df`` is 0.
    """
    validate_params(p)
    if n < 2:
        raise ValueError(f"n must be >= 2 (got {n})")
    if p.alpha == 1:
        raise ValueError("boundary alpha=1 unsupported")

    rest_eig = {"law": "constant", "scale": 0.0, "df": 0, "shift": p.tau2_x / n,
                "mean": p.tau2_x / n}
    if p.alpha > 1:
        return LimitPrediction(
            regime=Regime.ALPHA_ABOVE_1,
            abs_inner_x_first=abs(math.cos(p.theta_x)),
            abs_inner_y_first=abs(math.cos(p.theta_y)),
            abs_inner_rest=0.0,
            rho_first=None,
            rho_rest=0.0,
            lambda_xy_rest_over_d=0.0,
            pc_eigval_scale={"law": "scaled_chi2", "scale": p.sigma2_x, "df": n, "shift": 0.0,
                             "mean": p.sigma2_x},
            pc_eigval_rest=rest_eig,
        )
    return LimitPrediction(
        regime=Regime.ALPHA_BELOW_1,
        abs_inner_x_first=0.0,
        abs_inner_y_first=0.0,
        abs_inner_rest=0.0,
        rho_first=1.0,
        rho_rest=1.0,
        lambda_xy_rest_over_d=math.sqrt(p.tau2_x * p.tau2_y) / n,
        pc_eigval_scale={"law": "constant", "scale": 0.0, "df": 0, "shift": p.tau2_x / n,
                         "mean": p.tau2_x / n},
        pc_eigval_rest=rest_eig,
    )
