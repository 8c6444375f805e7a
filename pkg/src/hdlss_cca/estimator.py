"""Pseudoinverse CCA for d x n data matrices with d possibly much larger than n.

The sample covariance (1/n) X X^T has rank at most n, so everything is done in
the span of the data: eigenpairs come from a thin SVD of X (the numerically
stable form of the n x n Gram-matrix trick), the whitened cross-covariance is an
r x r core, and no d x d matrix is ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_RANK_TOL = 1e-10


class DegenerateDataError(ValueError):
    pass


class InsufficientRankError(ValueError):
    pass


@dataclass(frozen=True)
class SampleMoments:
    """Truncated spectral summary of the sample covariances.

    ``sxx_basis``/``sxx_vals`` hold the ``rank_x`` retained eigenpairs of
    (1/n) X X^T (descending), likewise for Y, and ``sxy_core`` is the
    rank_x x rank_y matrix Xi_x^T Sigma_xy Xi_y.  ``r = min(rank_x, rank_y)`` is
    the number of canonical pairs.  The ``*_rest`` arrays hold the remaining
    sample eigen-directions spanned by the data, the ones the pseudoinverse cuts
    off.
    """

    sxx_basis: np.ndarray
    sxx_vals: np.ndarray
    syy_basis: np.ndarray
    syy_vals: np.ndarray
    sxy_core: np.ndarray
    r: int
    n: int
    centered: bool
    rank_x: int = 0
    rank_y: int = 0
    x_rest_basis: np.ndarray = field(default=None, repr=False)
    x_rest_vals: np.ndarray = field(default=None, repr=False)
    y_rest_basis: np.ndarray = field(default=None, repr=False)
    y_rest_vals: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class CcaEstimate:
    rho_hat: np.ndarray
    psi_x_hat: np.ndarray
    psi_y_hat: np.ndarray
    diagnostics: dict


def _as_data(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d (d x n) array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def _center(a: np.ndarray) -> np.ndarray:
    return a - a.mean(axis=1, keepdims=True)


def sample_eigh(x: np.ndarray, max_rank: int | None = None):
    """Nonzero-spectrum eigenpairs of (1/n) x x^T from a thin SVD of ``x``.

    Returns ``(vals, basis, coords)`` where ``vals`` are descending eigenvalues,
    ``basis`` the d x m eigenvectors and ``coords`` the m x n matrix
    ``basis^T x`` (the data expressed in the eigenbasis).
    """
    n = x.shape[1]
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if max_rank is not None:
        u, s, vt = u[:, :max_rank], s[:max_rank], vt[:max_rank]
    vals = s**2 / n
    coords = s[:, None] * vt
    return vals, u, coords


def gram_eigh(x: np.ndarray):
    """Eigenpairs of (1/n) x x^T through the n x n Gram matrix (1/n) x^T x.

    Each Gram eigenvector v with eigenvalue lam > 0 maps to x v / sqrt(n lam).
    Squares the condition number, so only suitable for moderately scaled data;
    :func:`sample_eigh` is the production path.
    """
    n = x.shape[1]
    lam, v = np.linalg.eigh(x.T @ x / n)
    lam, v = lam[::-1], v[:, ::-1]
    lam = np.clip(lam, 0.0, None)
    keep = lam > 0
    basis = (x @ v[:, keep]) / np.sqrt(n * lam[keep])
    return lam[keep], basis


def _retained(vals: np.ndarray, rank_tol: float, cap: int, side: str) -> int:
    top = vals[0] if vals.size else 0.0
    if not top > 0:
        raise DegenerateDataError(f"degenerate data: largest {side} eigenvalue is {top!r}")
    return int(min(np.count_nonzero(vals > rank_tol * top), cap))


def sample_moments(x, y, center: bool = False, rank_tol: float = DEFAULT_RANK_TOL) -> SampleMoments:
    """Sample covariance spectra and compressed cross-covariance.

    Eigenvalues at or below ``rank_tol * lambda_max`` are discarded on each side;
    each side keeps its own retained basis.  With ``center`` the rows are
    mean-centred first and the rank is capped at n - 1.
    """
    x = _as_data(x, "x")
    y = _as_data(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"x and y must share n (got {x.shape[1]} and {y.shape[1]})")
    n = x.shape[1]
    if n < 2:
        raise ValueError(f"need n >= 2 samples (got {n})")
    if center:
        x, y = _center(x), _center(y)
    cap_x = min(x.shape[0], n - 1 if center else n)
    cap_y = min(y.shape[0], n - 1 if center else n)

    vals_x, basis_x, coords_x = sample_eigh(x, cap_x)
    vals_y, basis_y, coords_y = sample_eigh(y, cap_y)
    rank_x = _retained(vals_x, rank_tol, cap_x, "x")
    rank_y = _retained(vals_y, rank_tol, cap_y, "y")
    r = min(rank_x, rank_y)

    sxy_core = coords_x[:rank_x] @ coords_y[:rank_y].T / n
    return SampleMoments(
        sxx_basis=basis_x[:, :rank_x],
        sxx_vals=vals_x[:rank_x],
        syy_basis=basis_y[:, :rank_y],
        syy_vals=vals_y[:rank_y],
        sxy_core=sxy_core,
        r=r,
        n=n,
        centered=bool(center),
        rank_x=rank_x,
        rank_y=rank_y,
        x_rest_basis=basis_x[:, rank_x:],
        x_rest_vals=vals_x[rank_x:],
        y_rest_basis=basis_y[:, rank_y:],
        y_rest_vals=vals_y[rank_y:],
    )


def whitened_correlation_core(m: SampleMoments) -> np.ndarray:
    """The rank_x x rank_y matrix Lambda_x^{-1/2} (Xi_x^T Sigma_xy Xi_y) Lambda_y^{-1/2}.

    Its singular values and (lifted) singular vectors are exactly those of the
    d x d pseudo-whitened operator, whose row and column spaces lie in the
    retained eigenbases.
    """
    wx = 1.0 / np.sqrt(m.sxx_vals)
    wy = 1.0 / np.sqrt(m.syy_vals)
    return wx[:, None] * m.sxy_core * wy[None, :]


def _fix_sign(cols: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude entry is positive."""
    if cols.size == 0:
        return cols
    idx = np.argmax(np.abs(cols), axis=0)
    signs = np.sign(cols[idx, np.arange(cols.shape[1])])
    signs[signs == 0] = 1.0
    return cols * signs


def _unit_columns(cols: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(cols, axis=0)
    return cols / norms


def cca_fit(x, y, center: bool = False, rank_tol: float = DEFAULT_RANK_TOL, k: int | None = None) -> CcaEstimate:
    """Sample canonical correlations and weight vectors via pseudoinverse whitening.

    Parameters
    ----------
    x, y : array_like, shape (d_x, n) and (d_y, n)
        Data with samples in columns.
    center : bool
        Subtract row means before estimation.
    rank_tol : float
        Relative eigenvalue cutoff for the pseudoinverse.
    k : int, optional
        Number of components to return.  Defaults to r = min(rank_x, rank_y).
        Components beyond r have correlation 0.  On each side their weight
        vectors are first the remaining singular directions of the whitened
        operator (when that side has the larger rank), then the cut-off
        sample eigen-directions themselves.

    Returns
    -------
    CcaEstimate
        ``rho_hat`` is descending and clamped to [0, 1]; weight vectors are
        unit columns whose largest-magnitude entry is positive.

    Raises
    ------
    InsufficientRankError
        If ``k`` exceeds the number of sample eigen-directions the data span.
    """
    m = sample_moments(x, y, center=center, rank_tol=rank_tol)
    r = m.r
    available = min(m.rank_x + m.x_rest_basis.shape[1], m.rank_y + m.y_rest_basis.shape[1])
    if k is None:
        k = r
    if k < 1:
        raise ValueError(f"k must be >= 1 (got {k})")
    if k > available:
        raise InsufficientRankError(
            f"insufficient rank: requested {k} components, data span only {available} "
            f"(retained rank {r})"
        )

    core = whitened_correlation_core(m)
    u, sv, vt = np.linalg.svd(core, full_matrices=True)
    # LAPACK returns singular values sorted; a stable argsort keeps tie order.
    order = np.argsort(-sv, kind="stable")
    rho = np.clip(sv[order], 0.0, 1.0)
    u = np.hstack([u[:, order], u[:, r:]])
    v = np.hstack([vt.T[:, order], vt.T[:, r:]])

    psi_x = _unit_columns(m.sxx_basis @ (u / np.sqrt(m.sxx_vals)[:, None]))
    psi_y = _unit_columns(m.syy_basis @ (v / np.sqrt(m.syy_vals)[:, None]))
    psi_x = np.hstack([psi_x, m.x_rest_basis])
    psi_y = np.hstack([psi_y, m.y_rest_basis])

    n_extra = max(0, k - r)
    rho_out = np.concatenate([rho[:min(k, r)], np.zeros(n_extra)])
    psi_x_out = psi_x[:, :k]
    psi_y_out = psi_y[:, :k]

    diagnostics = {
        "r": r,
        "rank_x": m.rank_x,
        "rank_y": m.rank_y,
        "n_padded": n_extra,
        "min_eig_ratio_x": float(m.sxx_vals[-1] / m.sxx_vals[0]),
        "min_eig_ratio_y": float(m.syy_vals[-1] / m.syy_vals[0]),
        "lambda_x": m.sxx_vals.copy(),
        "lambda_y": m.syy_vals.copy(),
        "centered": m.centered,
    }
    return CcaEstimate(
        rho_hat=rho_out,
        psi_x_hat=_fix_sign(psi_x_out),
        psi_y_hat=_fix_sign(psi_y_out),
        diagnostics=diagnostics,
    )


def cross_covariance_singular_values(x, y, center: bool = False) -> np.ndarray:
    """Nonzero-spectrum singular values of (1/n) x y^T, descending, in O(n^2 d)."""
    x = _as_data(x, "x")
    y = _as_data(y, "y")
    n = x.shape[1]
    if center:
        x, y = _center(x), _center(y)
    _, _, cx = sample_eigh(x)
    _, _, cy = sample_eigh(y)
    return np.linalg.svd(cx @ cy.T / n, compute_uv=False)


def alignment(v, w, tol: float = 1e-8) -> dict:
    """Signed inner product, its magnitude, and the sign-invariant angle in degrees."""
    v = np.asarray(v, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    for name, vec in (("v", v), ("w", w)):
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > tol:
            raise ValueError(f"{name} is not a unit vector (norm {norm!r})")
    inner = float(v @ w)
    abs_inner = abs(inner)
    angle = float(np.degrees(np.arccos(min(max(abs_inner, 0.0), 1.0))))
    return {"inner": inner, "abs_inner": abs_inner, "angle_deg": angle}
