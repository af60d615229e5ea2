import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilab.errors import DimensionError
from levilab.wirtinger import (
    MapJet2,
    RealJet2,
    ScalarJet2,
    StepPolicy,
    apply_differential,
    complex_to_real_scalar_jet,
    eval_real_hessian,
    fd_map_jet,
    fd_real_scalar_jet,
    mixed_apply,
    nu_mu,
    real_hessian_form,
    real_to_complex_scalar_jet,
    trace_mixed,
)
from levilab.zexpr import PolyMapSpec, analytic_map_jet

GALLERY_VIOLATOR = PolyMapSpec.from_strings(["z1 + z2*conj(z2)", "z2"])


def identity_jet(n):
    return MapJet2(np.zeros(n, complex), np.eye(n, dtype=complex),
                   np.zeros((n, n), complex), np.zeros((n, n, n), complex))


def conjugation_jet(n):
    return MapJet2(np.zeros(n, complex), np.zeros((n, n), complex),
                   np.eye(n, dtype=complex), np.zeros((n, n, n), complex))


def random_map_jet(rng, n):
    return MapJet2(rng.standard_normal(n) + 1j * rng.standard_normal(n),
                   rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
                   rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
                   rng.standard_normal((n, n, n)) + 1j * rng.standard_normal((n, n, n)))


class TestConversions:
    def test_abs_squared_jet(self):
        # rho = |z|^2 on R^2: gradient 2(x, y), Hessian 2 I
        j = RealJet2(1.25, np.array([1.0, 2.0]), 2.0 * np.eye(2))
        c = real_to_complex_scalar_jet(j)
        assert c.dz[0] == pytest.approx(0.5 - 1.0j)  # conj(z) at z = 0.5 + 1j
        assert c.hzz[0, 0] == 0
        assert c.hzzbar[0, 0] == 1

    def test_harmonic_polynomial(self):
        # rho = x^2 - y^2 = Re z^2
        j = RealJet2(0.0, np.zeros(2), np.diag([2.0, -2.0]))
        c = real_to_complex_scalar_jet(j)
        assert c.hzz[0, 0] == 1
        assert c.hzzbar[0, 0] == 0

    def test_odd_dimension_rejected(self):
        with pytest.raises(DimensionError):
            RealJet2(0.0, np.zeros(3), np.zeros((3, 3)))

    def test_roundtrip(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            h = rng.standard_normal((2 * n, 2 * n))
            j = RealJet2(rng.standard_normal(), rng.standard_normal(2 * n), h + h.T)
            back = complex_to_real_scalar_jet(real_to_complex_scalar_jet(j))
            np.testing.assert_allclose(back.gradient, j.gradient, atol=1e-14)
            np.testing.assert_allclose(back.hessian, j.hessian, atol=1e-13)

    def test_fd_real_jet_matches_analytic(self):
        from levilab.zexpr import analytic_scalar_jet, random_real_scalar_spec
        rng = np.random.default_rng(3)
        for _ in range(25):
            spec = random_real_scalar_spec(rng, 2, max_degree=3, terms=3)
            z = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            exact = analytic_scalar_jet(spec, z)
            fd = real_to_complex_scalar_jet(fd_real_scalar_jet(spec, z))
            scale = 1.0 + max(np.abs(exact.hzz).max(), np.abs(exact.hzzbar).max(),
                              np.abs(exact.dz).max())
            assert np.abs(fd.dz - exact.dz).max() <= 1e-5 * scale
            assert np.abs(fd.hzz - exact.hzz).max() <= 1e-5 * scale
            assert np.abs(fd.hzzbar - exact.hzzbar).max() <= 1e-5 * scale


class TestRealHessianEval:
    def test_levi_identity_block(self):
        j = ScalarJet2(0.0, np.zeros(2, complex), np.zeros((2, 2), complex),
                       np.eye(2, dtype=complex))
        zeta = np.array([1 + 2j, -0.5j])
        assert eval_real_hessian(j, zeta) == pytest.approx(2 * np.vdot(zeta, zeta).real)

    def test_zero_vector(self):
        j = ScalarJet2(0.0, np.zeros(2, complex), np.zeros((2, 2), complex),
                       np.eye(2, dtype=complex))
        assert eval_real_hessian(j, np.zeros(2)) == 0.0

    def test_model_quadric_value_against_fd(self):
        # jet of z^2 + conj(z)^2 + |z|^2 (= 3x^2 - y^2) at any point
        j = ScalarJet2(0.0, np.zeros(1, complex),
                       2.0 * np.eye(1, dtype=complex), np.eye(1, dtype=complex))
        got = eval_real_hessian(j, np.array([1.0 + 0j]))

        def rho(z):
            x, y = z[0].real, z[0].imag
            return 3 * x * x - y * y

        fd = fd_real_scalar_jet(rho, np.array([0.3 + 0.4j]))
        expected = real_hessian_form(fd, np.array([1.0, 0.0]))
        assert got == pytest.approx(expected, abs=1e-7)
        assert got == pytest.approx(6.0)

    def test_dimension_mismatch(self):
        j = ScalarJet2(0.0, np.zeros(2, complex), np.zeros((2, 2), complex),
                       np.eye(2, dtype=complex))
        with pytest.raises(DimensionError):
            eval_real_hessian(j, np.zeros(3))

    def test_levi_pairing_convention(self):
        # rho = 2 Re(i z1 conj(z2)) = 2(x1 y2 - y1 x2) has the Hermitian block
        # [[0, i], [-i, 0]]; the first index pairs with zeta, the second with
        # conj(zeta).  H(zeta) at zeta = (1, i) must be +4, not -4.
        j = ScalarJet2(0.0, np.zeros(2, complex), np.zeros((2, 2), complex),
                       np.array([[0, 1j], [-1j, 0]]))
        zeta = np.array([1.0, 1.0j])
        assert eval_real_hessian(j, zeta) == pytest.approx(4.0)

        def rho(z):
            return 2.0 * (z[0].real * z[1].imag - z[0].imag * z[1].real)

        fd = fd_real_scalar_jet(rho, np.array([0.3 + 1j, -0.2 + 0.4j]))
        got = real_hessian_form(fd, np.array([1.0, 0.0, 0.0, 1.0]))
        assert got == pytest.approx(4.0, abs=1e-7)


class TestDifferentialOps:
    def test_identity(self):
        zeta = np.array([0.3 - 1j, 2.0])
        np.testing.assert_array_equal(apply_differential(identity_jet(2), zeta), zeta)

    def test_conjugation(self):
        zeta = np.array([0.3 - 1j, 2.0])
        np.testing.assert_array_equal(apply_differential(conjugation_jet(2), zeta),
                                      np.conj(zeta))

    def test_gallery_map_at_origin(self):
        mj = analytic_map_jet(GALLERY_VIOLATOR, np.zeros(2, complex))
        np.testing.assert_allclose(apply_differential(mj, np.array([0, 1])),
                                   np.array([0, 1]), atol=0)

    def test_nu_mu_holomorphic(self):
        rng = np.random.default_rng(1)
        mj = MapJet2(np.zeros(2, complex),
                     rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                     np.zeros((2, 2), complex), np.zeros((2, 2, 2), complex))
        _, mu = nu_mu(mj, np.array([1 + 1j, -2j]))
        assert np.all(mu == 0)

    def test_nu_mu_antiholomorphic(self):
        nu, _ = nu_mu(conjugation_jet(2), np.array([1 + 1j, -2j]))
        assert np.all(nu == 0)

    def test_nu_mu_identity_basis(self):
        nu, mu = nu_mu(identity_jet(2), np.array([1, 0], dtype=complex))
        np.testing.assert_array_equal(nu, np.array([1, 0], dtype=complex))
        np.testing.assert_array_equal(mu, np.zeros(2))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_nu_mu_block_identities_exact(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        mj = random_map_jet(rng, n)
        zeta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nu, mu = nu_mu(mj, zeta)
        np.testing.assert_array_equal(nu + mu, apply_differential(mj, zeta))
        np.testing.assert_array_equal(1j * (nu - mu), apply_differential(mj, 1j * zeta))


class TestMixedOps:
    def test_holomorphic_mixed_zero(self):
        mj = identity_jet(3)
        assert np.all(mixed_apply(mj, np.ones(3), np.ones(3)) == 0)
        assert np.all(trace_mixed(mj) == 0)

    def test_abs_square_component(self):
        spec = PolyMapSpec.from_strings(["z1*conj(z1)"])
        mj = analytic_map_jet(spec, np.array([0.7 - 0.2j]))
        np.testing.assert_allclose(mixed_apply(mj, [1], [1]), [1.0], atol=0)
        np.testing.assert_allclose(trace_mixed(mj), [1.0], atol=0)

    def test_gallery_map_mixed(self):
        mj = analytic_map_jet(GALLERY_VIOLATOR, np.zeros(2, complex))
        np.testing.assert_allclose(mixed_apply(mj, [0, 1], [0, 1]), [1, 0], atol=0)
        np.testing.assert_allclose(trace_mixed(mj), [1, 0], atol=0)

    def test_trace_is_quarter_laplacian(self):
        spec = PolyMapSpec.from_strings(["z1*conj(z1)"])
        z = np.array([0.3 + 0.1j])
        got = 4.0 * trace_mixed(analytic_map_jet(spec, z))

        # independent FD Laplacian oracle
        h = 1e-4
        lap = np.zeros(1, dtype=complex)
        for d in (np.array([h]), np.array([1j * h])):
            lap += (spec(z + d) - 2 * spec(z) + spec(z - d)) / h**2
        np.testing.assert_allclose(got, lap, atol=1e-6)
        np.testing.assert_allclose(got, [4.0], atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_mixed_apply_sesquilinearity(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        mj = random_map_jet(rng, n)
        z1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z2 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        eta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lam = complex(rng.standard_normal(), rng.standard_normal())
        scale = np.abs(mj.mixed).max() * (1 + abs(lam))

        add_zeta = mixed_apply(mj, z1 + z2, eta)
        np.testing.assert_allclose(
            add_zeta, mixed_apply(mj, z1, eta) + mixed_apply(mj, z2, eta),
            atol=1e-12 * scale * (np.abs(z1).max() + np.abs(z2).max() + 1) * (np.abs(eta).max() + 1))
        lin_zeta = mixed_apply(mj, lam * z1, eta)
        np.testing.assert_allclose(lin_zeta, lam * mixed_apply(mj, z1, eta),
                                   atol=1e-12 * scale * 10)
        conj_eta = mixed_apply(mj, z1, lam * eta)
        np.testing.assert_allclose(conj_eta, np.conj(lam) * mixed_apply(mj, z1, eta),
                                   atol=1e-12 * scale * 10)


class TestFdMapJet:
    def test_identity_map(self):
        for z in (np.zeros(2, complex), np.array([0.9 - 0.3j, 0.5 + 0.5j])):
            mj = fd_map_jet(lambda w: w, z)
            assert np.abs(mj.jhol - np.eye(2)).max() <= 1e-8
            assert np.abs(mj.janti).max() <= 1e-8
            assert np.abs(mj.mixed).max() <= 1e-8

    def test_matches_analytic_jet(self):
        from levilab.zexpr import random_map_spec
        rng = np.random.default_rng(11)
        for _ in range(10):
            spec = random_map_spec(rng, 2, max_degree=3, terms=2)
            z = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            exact = analytic_map_jet(spec, z)
            fd = fd_map_jet(spec, z)
            scale = 1.0 + max(np.abs(exact.jhol).max(), np.abs(exact.janti).max(),
                              np.abs(exact.mixed).max())
            assert np.abs(fd.jhol - exact.jhol).max() <= 1e-5 * scale
            assert np.abs(fd.janti - exact.janti).max() <= 1e-5 * scale
            assert np.abs(fd.mixed - exact.mixed).max() <= 1e-5 * scale

    def test_zero_step_rejected(self):
        with pytest.raises(ValueError):
            StepPolicy(rel_step=0.0)

    def test_non_finite_sample_reported(self):
        def bad(w):
            return np.array([np.inf + 0j, w[1]]) if w[0].real > 0 else w

        with pytest.raises(ValueError, match="offset"):
            fd_map_jet(bad, np.zeros(2, complex))
