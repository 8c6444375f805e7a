import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdlss_cca.spiked_model import (
    ModelError,
    SpikedParams,
    build_population_model,
    joint_sqrt,
    validate_params,
)

DEFAULT_PARAMS = SpikedParams(alpha=8.0, rho=0.7, theta_x=0.75 * math.pi, theta_y=0.75 * math.pi, d=200)


def cross_block_mp(p, dps=60):
    """Evaluate the 2x2 cross-covariance block entry by entry at high precision."""
    with mpmath.workdps(dps):
        d = mpmath.mpf(p.d)
        sx2, sy2 = mpmath.mpf(p.sigma2_x), mpmath.mpf(p.sigma2_y)
        tx2, ty2 = mpmath.mpf(p.tau2_x), mpmath.mpf(p.tau2_y)
        da = d ** mpmath.mpf(p.alpha)
        cx, sx = mpmath.cos(mpmath.mpf(p.theta_x)), mpmath.sin(mpmath.mpf(p.theta_x))
        cy, sy = mpmath.cos(mpmath.mpf(p.theta_y)), mpmath.sin(mpmath.mpf(p.theta_y))
        A = mpmath.sqrt(sx2 * da * cx**2 + tx2 * sx**2)
        B = mpmath.sqrt(sy2 * da * cy**2 + ty2 * sy**2)
        rho = mpmath.mpf(p.rho)
        e11 = rho * sx2 * sy2 * d ** (2 * mpmath.mpf(p.alpha)) * cx * cy / (A * B)
        e12 = rho * sx2 * da * ty2 * cx * sy / (A * B)
        e21 = rho * tx2 * sy2 * da * sx * cy / (A * B)
        e22 = rho * tx2 * ty2 * sx * sy / (A * B)
        return np.array([[float(e11), float(e12)], [float(e21), float(e22)]])


params_strategy = st.builds(
    SpikedParams,
    sigma2_x=st.floats(0.1, 10), tau2_x=st.floats(0.1, 10),
    sigma2_y=st.floats(0.1, 10), tau2_y=st.floats(0.1, 10),
    alpha=st.floats(0.0, 8.0), rho=st.floats(0.0, 1.0),
    theta_x=st.floats(0.0, math.pi), theta_y=st.floats(0.0, math.pi),
    d=st.integers(3, 1000),
)


class TestValidate:
    def test_defaults_ok(self):
        validate_params(SpikedParams(alpha=8, rho=0.7, theta_x=0.75 * math.pi, d=200))

    def test_rho_out_of_range(self):
        with pytest.raises(ModelError, match=r"rho out of \[0,1\]"):
            validate_params(SpikedParams(rho=1.2))

    def test_d_too_small(self):
        with pytest.raises(ModelError, match="d must be ≥ 3"):
            validate_params(SpikedParams(d=2))

    @pytest.mark.parametrize("field", ["sigma2_x", "tau2_x", "sigma2_y", "tau2_y"])
    def test_nonpositive_variance(self, field):
        with pytest.raises(ModelError, match=field):
            validate_params(SpikedParams(**{field: 0.0}))

    def test_reports_every_violation(self):
        with pytest.raises(ModelError) as err:
            validate_params(SpikedParams(rho=-0.1, d=1, tau2_y=-1.0))
        msg = str(err.value)
        assert "rho" in msg and "d must" in msg and "tau2_y" in msg


class TestPopulationModel:
    def test_zero_rho_gives_zero_cross_block(self):
        m = build_population_model(SpikedParams(rho=0.0, alpha=2.0, d=50, theta_x=0.3))
        assert np.all(m.cross_block == 0.0)

    def test_hand_evaluated_block(self):
        p = SpikedParams(alpha=1.0, d=100, rho=0.7, theta_x=0.0, theta_y=0.0)
        m = build_population_model(p)
        np.testing.assert_allclose(m.cross_block, [[70.0, 0.0], [0.0, 0.0]], rtol=1e-14, atol=1e-14)

    def test_default_block_matches_high_precision(self):
        for d in (200, 500):
            p = SpikedParams(alpha=8.0, d=d, rho=0.7, theta_x=0.75 * math.pi, theta_y=0.75 * math.pi)
            m = build_population_model(p)
            np.testing.assert_allclose(m.cross_block, cross_block_mp(p), rtol=1e-12)

    def test_diagonals_and_psi(self):
        m = build_population_model(DEFAULT_PARAMS)
        assert m.sigma_x_diag[0] == 200.0**8
        assert np.all(m.sigma_x_diag[1:] == 1.0)
        assert m.psi_x[0] == math.cos(0.75 * math.pi)
        assert m.psi_x[1] == math.sin(0.75 * math.pi)
        assert np.count_nonzero(m.psi_x) == 2
        assert abs(np.linalg.norm(m.psi_x) - 1) < 1e-12
        assert abs(np.linalg.norm(m.psi_y) - 1) < 1e-12

    def test_score_correlation_is_rho(self):
        # corr(<psi_x, X>, <psi_y, Y>) from the dense covariance
        p = SpikedParams(alpha=1.5, d=6, rho=0.4, theta_x=1.0, theta_y=2.5, sigma2_y=2.0)
        m = build_population_model(p)
        sigma = m.dense_joint_covariance()
        w = np.concatenate([m.psi_x, np.zeros(p.d)]), np.concatenate([np.zeros(p.d), m.psi_y])
        cov = w[0] @ sigma @ w[1]
        corr = cov / math.sqrt((w[0] @ sigma @ w[0]) * (w[1] @ sigma @ w[1]))
        assert corr == pytest.approx(0.4, abs=1e-12)
        assert math.sqrt(w[0] @ sigma @ w[0]) == pytest.approx(m.a_norm, rel=1e-12)

    def test_arrays_are_read_only(self):
        m = build_population_model(DEFAULT_PARAMS)
        with pytest.raises(ValueError):
            m.psi_x[0] = 1.0

    @settings(max_examples=200, deadline=None)
    @given(params_strategy)
    def test_invariants(self, p):
        m = build_population_model(p)
        assert np.linalg.norm(m.psi_x) == pytest.approx(1.0, abs=1e-12)
        assert m.psi_x[0] == math.cos(p.theta_x) and m.psi_x[1] == math.sin(p.theta_x)
        assert (np.any(m.cross_block != 0)) == (p.rho > 0 and np.any(
            np.outer([math.cos(p.theta_x), math.sin(p.theta_x)],
                     [math.cos(p.theta_y), math.sin(p.theta_y)]) != 0))
        # PSD of the 4x4 core, checked on the correlation scale so that a spike of
        # size 1000**8 does not swamp the bulk eigenvalues
        block = m.core_block
        scale = np.sqrt(np.diag(block))
        vals = np.linalg.eigvalsh(block / np.outer(scale, scale))
        assert vals.min() >= -1e-10 * vals.max()


class TestJointSqrt:
    @staticmethod
    def graded_error(s, block):
        # error of each entry relative to sqrt(B_ii B_jj), the natural scale of entry ij
        scale = np.sqrt(np.outer(np.diag(block), np.diag(block)))
        return np.abs((s @ s - block) / scale).max()

    def test_rho_zero_is_diagonal(self):
        p = SpikedParams(rho=0.0, alpha=3.0, d=40, sigma2_x=2.0, tau2_y=0.5)
        m = build_population_model(p)
        s = joint_sqrt(m)
        expected = np.diag(np.sqrt([2.0 * 40.0**3, 1.0, 40.0**3, 0.5]))
        np.testing.assert_allclose(s.core4, expected, rtol=1e-14, atol=0)
        assert s.bulk_x == 1.0 and s.bulk_y == math.sqrt(0.5)

    def test_rho_one_round_trip(self):
        m = build_population_model(SpikedParams(rho=1.0, theta_x=0.0, theta_y=0.0, alpha=0.5, d=10))
        s = joint_sqrt(m)
        np.testing.assert_allclose(s.core4 @ s.core4, m.core_block, rtol=1e-10, atol=1e-10)

    def test_grid_round_trip_and_bulk(self):
        for alpha in (0.2, 8.0):
            for d in (200, 500):
                p = SpikedParams(alpha=alpha, d=d, rho=0.7, theta_x=0.75 * math.pi,
                                 theta_y=0.75 * math.pi)
                m = build_population_model(p)
                s = joint_sqrt(m)
                block = m.core_block
                assert self.graded_error(s.core4, block) < 1e-10
                np.testing.assert_array_equal(s.core4, s.core4.T)
                # spot-check bulk coordinates against the dense diagonal
                rng = np.random.default_rng(0)
                for i in rng.integers(2, d, size=5):
                    assert s.bulk_x**2 == m.sigma_x_diag[i]
                    assert s.bulk_y**2 == m.sigma_y_diag[i]

    def test_dense_square_root_small_d(self):
        p = SpikedParams(alpha=1.3, d=5, rho=0.6, theta_x=0.4, theta_y=2.0, tau2_x=0.7)
        m = build_population_model(p)
        s = joint_sqrt(m)
        d = p.d
        full = np.diag(np.concatenate([np.full(d, s.bulk_x), np.full(d, s.bulk_y)]))
        idx = [0, 1, d, d + 1]
        full[np.ix_(idx, idx)] = s.core4
        np.testing.assert_allclose(full @ full, m.dense_joint_covariance(), rtol=1e-12, atol=1e-12)

    def test_cached(self):
        m = build_population_model(DEFAULT_PARAMS)
        assert joint_sqrt(m) is joint_sqrt(m)

    @settings(max_examples=100, deadline=None)
    @given(params_strategy)
    def test_round_trip_property(self, p):
        m = build_population_model(p)
        s = joint_sqrt(m)
        block = m.core_block
        rel = np.linalg.norm(s.core4 @ s.core4 - block) / np.linalg.norm(block)
        assert rel < 1e-10
        assert self.graded_error(s.core4, block) < 1e-10
        assert np.abs(s.core4 - s.core4.T).max() <= 1e-12 * np.abs(s.core4).max()
