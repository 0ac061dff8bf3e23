import numpy as np
import pytest

from covloc import (
    LinearParams,
    analytic_covariance,
    analytic_mean,
    build_system_matrix,
    circulant_covariance_row,
)
from covloc.analytic import NumericalError

from oracles import quadrature_covariance, taylor_expm


class TestBuildSystemMatrix:
    def test_pure_damping(self):
        sysm = build_system_matrix(LinearParams(a=2.0, d_u=0.0, w=0.0), 5)
        np.testing.assert_allclose(sysm.a_matrix, -2.0 * np.eye(5))
        np.testing.assert_allclose(sysm.eigenvalues, -2.0)

    def test_meanfield_spectrum(self):
        # ones/N has spectrum {1, 0^(N-1)}: eigenvalues {-a, -(a+w)^(N-1)}
        for n in (4, 16, 64):
            sysm = build_system_matrix(LinearParams(a=1.0, d_u=0.0, w=5.0), n)
            eigs = np.sort(sysm.eigenvalues)
            np.testing.assert_allclose(eigs[-1], -1.0, atol=1e-10)
            np.testing.assert_allclose(eigs[:-1], -6.0, atol=1e-10)

    def test_circulant_diffusion_spectrum(self):
        # -a - 2 d_u (1 - cos(2 pi k / N)) for N = 4: {-1, -41, -81, -41}
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=20.0, w=0.0), 4)
        np.testing.assert_allclose(
            np.sort(sysm.eigenvalues), [-81.0, -41.0, -41.0, -1.0], atol=1e-9
        )

    def test_negative_definite(self):
        sysm = build_system_matrix(LinearParams(a=0.1, d_u=30.0, w=2.0), 32)
        assert sysm.eigenvalues.max() < 0


class TestAnalyticMean:
    def test_t_zero_is_identity(self):
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=3.0, w=1.0), 8)
        u0 = np.arange(8.0)
        np.testing.assert_allclose(analytic_mean(sysm, u0, 0.0), u0, atol=1e-12)

    def test_constant_field_decays_at_rate_a(self):
        # constants are null vectors of the Laplacian and the centered coupling
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=7.0, w=0.0), 12)
        out = analytic_mean(sysm, np.full(12, 3.0), 0.7)
        np.testing.assert_allclose(out, 3.0 * np.exp(-0.7), rtol=1e-12)

    def test_against_taylor_exponential_oracle(self):
        params = LinearParams(a=1.0, d_u=20.0, w=0.0)
        sysm = build_system_matrix(params, 4)
        u0 = np.eye(4)[0]
        expected = taylor_expm(sysm.a_matrix * 0.1) @ u0
        np.testing.assert_allclose(analytic_mean(sysm, u0, 0.1), expected, rtol=1e-12)


class TestAnalyticCovariance:
    def test_zero_time_zero_initial(self):
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=2.0, w=1.0), 6)
        cov = analytic_covariance(sysm, None, 0.5, 0.0)
        np.testing.assert_allclose(cov.data, 0.0, atol=1e-15)

    def test_scalar_ou_longtime_limit(self):
        # sigma^2 / (2a) on the diagonal, zero elsewhere
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=0.0, w=0.0), 4)
        cov = analytic_covariance(sysm, None, 0.5, 60.0)
        np.testing.assert_allclose(cov.data, 0.125 * np.eye(4), atol=1e-12)

    def test_meanfield_offdiagonals_equal_and_match_spectral_formula(self):
        n = 64
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=0.0, w=5.0), n)
        cov = analytic_covariance(sysm, None, 0.5, 5.0)
        off = cov.data[0, 1:]
        np.testing.assert_allclose(off, off[0], atol=1e-14)
        # (sigma^2/N) ((1 - e^-10)/2 - (1 - e^-60)/12)
        expected = 0.25 / n * ((1 - np.exp(-10)) / 2 - (1 - np.exp(-60)) / 12)
        assert off[0] == pytest.approx(expected, rel=1e-12)
        # the dumb quadrature oracle lands on the same value at its own accuracy
        oracle = quadrature_covariance(sysm.a_matrix, 0.5, 5.0, nodes=10_000)
        assert off[0] == pytest.approx(oracle[0, 1], rel=1e-4)

    def test_quadrature_oracle_agreement(self):
        # trapezoid error is O((t lambda / nodes)^2); 2e5 nodes covers the
        # stiffest parameter set well below the 1e-8 gate
        for params in (
            LinearParams(a=1.0, d_u=20.0, w=0.0),
            LinearParams(a=1.0, d_u=0.0, w=5.0),
            LinearParams(a=1.0, d_u=4.0, w=2.0),
        ):
            for n in (8, 16):
                sysm = build_system_matrix(params, n)
                got = analytic_covariance(sysm, None, 0.5, 1.5).data
                expected = quadrature_covariance(sysm.a_matrix, 0.5, 1.5, nodes=200_000)
                err = np.linalg.norm(got - expected) / np.linalg.norm(expected)
                assert err < 1e-8

    def test_initial_covariance_propagation(self):
        params = LinearParams(a=1.0, d_u=3.0, w=0.0)
        sysm = build_system_matrix(params, 8)
        cov0 = 0.3 * np.eye(8)
        got = analytic_covariance(sysm, cov0, 0.5, 0.8).data
        prop = taylor_expm(sysm.a_matrix * 0.8)
        expected = prop @ cov0 @ prop.T + quadrature_covariance(sysm.a_matrix, 0.5, 0.8)
        np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_result_is_circulant(self):
        # spatial homogeneity: every row is the previous row shifted by one
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=20.0, w=5.0), 64)
        cov = analytic_covariance(sysm, None, 0.5, 5.0).data
        for r in range(1, 64):
            np.testing.assert_allclose(cov[r], np.roll(cov[0], r), atol=1e-10)

    def test_monotone_decay_for_diffusion_only(self):
        for d_u in (1.0, 5.0, 20.0):
            sysm = build_system_matrix(LinearParams(a=1.0, d_u=d_u, w=0.0), 64)
            profile = analytic_covariance(sysm, None, 0.5, 5.0).lag_profile()
            assert (np.diff(profile) <= 1e-15).all()

    def test_psd_up_to_roundoff(self):
        sysm = build_system_matrix(LinearParams(a=1.0, d_u=20.0, w=5.0), 32)
        cov = analytic_covariance(sysm, None, 0.5, 5.0)
        assert np.linalg.eigvalsh(cov.data).min() >= -1e-12 * np.trace(cov.data)


def test_fft_route_matches_dense_route():
    for params in (
        LinearParams(a=1.0, d_u=20.0, w=0.0),
        LinearParams(a=1.0, d_u=0.0, w=5.0),
        LinearParams(a=2.0, d_u=3.0, w=1.5),
    ):
        for n in (8, 64, 257):
            row = circulant_covariance_row(params, n, 5.0)
            sysm = build_system_matrix(params, n)
            dense_row = analytic_covariance(sysm, None, params.sigma_u, 5.0).data[0]
            np.testing.assert_allclose(row, dense_row, atol=1e-12)
