import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilab.errors import DegeneracyError, DimensionError
from levilab.forms import (
    HermitianForm,
    RLinearMap,
    SesquilinearMapW,
    build_trace_form,
    levi_eval,
    min_eig_hermitian,
    recover_trace_vector,
    restrict_form,
    span_residual,
    split_rlinear,
    trace_sesquilinear,
)


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_invertible(rng, n):
    while True:
        c = RLinearMap(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
                       rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        smin, smax = c.singular_values()
        if smin > 1e-3 * smax:
            return c


def eig2_oracle(m):
    """Closed-form eigenvalues of a 2x2 Hermitian matrix."""
    a, d = m[0, 0].real, m[1, 1].real
    rad = np.sqrt(((a - d) / 2.0) ** 2 + abs(m[0, 1]) ** 2)
    return (a + d) / 2.0 - rad, (a + d) / 2.0 + rad


class TestHermitian:
    def test_levi_eval_identity(self):
        h = HermitianForm(np.eye(2, dtype=complex))
        zeta = random_unit(np.random.default_rng(0), 2)
        assert levi_eval(h, zeta) == pytest.approx(1.0)

    def test_levi_eval_zero(self):
        assert levi_eval(HermitianForm(np.zeros((2, 2), complex)), [1, 1j]) == 0.0

    def test_levi_eval_signature(self):
        h = HermitianForm(np.diag([1.0, -1.0]).astype(complex))
        assert levi_eval(h, [1, 1]) == pytest.approx(0.0)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            HermitianForm(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_min_eig_identity(self):
        assert min_eig_hermitian(HermitianForm(np.eye(3, dtype=complex))) == pytest.approx(1.0)

    def test_min_eig_diagonal(self):
        h = HermitianForm(np.diag([2.0, -3.0]).astype(complex))
        assert min_eig_hermitian(h) == pytest.approx(-3.0)

    def test_min_eig_gram_nonnegative_and_matches_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            gram = a.conj().T @ a
            h = HermitianForm(gram)
            lo = min_eig_hermitian(h)
            want_lo, _ = eig2_oracle(gram)
            assert lo >= -1e-10 * np.linalg.norm(gram, 2)
            assert lo == pytest.approx(want_lo, abs=1e-10 * (1 + abs(want_lo)))


class TestRestrict:
    def test_identity_to_first_axis(self):
        h = HermitianForm(np.eye(2, dtype=complex))
        r = restrict_form(h, [np.array([1, 0], dtype=complex)])
        assert r.matrix.shape == (1, 1)
        assert r.matrix[0, 0] == pytest.approx(1.0)

    def test_signature_to_second_axis(self):
        h = HermitianForm(np.diag([1.0, -1.0]).astype(complex))
        r = restrict_form(h, [np.array([0, 1], dtype=complex)])
        assert r.matrix[0, 0] == pytest.approx(-1.0)

    def test_against_direct_evaluation(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            h = HermitianForm(m @ m.conj().T - 2 * np.eye(3))
            basis = [random_unit(rng, 3), random_unit(rng, 3)]
            r = restrict_form(h, basis)
            coeffs = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            vec = coeffs[0] * basis[0] + coeffs[1] * basis[1]
            want = levi_eval(h, vec)
            # same quadratic form through the restricted matrix
            got = levi_eval(r, coeffs)
            assert got == pytest.approx(want, abs=1e-10 * (1 + abs(want)))

    def test_dependent_basis_rejected(self):
        h = HermitianForm(np.eye(2, dtype=complex))
        v = np.array([1, 1j], dtype=complex)
        with pytest.raises(DegeneracyError):
            restrict_form(h, [v, 2.0 * v])

    def test_positive_definite_restriction_stays_definite(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            h = HermitianForm(a @ a.conj().T + 0.1 * np.eye(3))
            assert min_eig_hermitian(h) > 0
            r = restrict_form(h, [random_unit(rng, 3), random_unit(rng, 3)])
            assert min_eig_hermitian(r) > 0


class TestSplitRLinear:
    def test_identity(self):
        c = split_rlinear(np.eye(4))
        np.testing.assert_array_equal(c.c10, np.eye(2))
        np.testing.assert_array_equal(c.c01, np.zeros((2, 2)))

    def test_conjugation(self):
        c = split_rlinear(np.diag([1.0, 1.0, -1.0, -1.0]))
        np.testing.assert_array_equal(c.c10, np.zeros((2, 2)))
        np.testing.assert_array_equal(c.c01, np.eye(2))

    def test_odd_dimension_rejected(self):
        with pytest.raises(DimensionError):
            split_rlinear(np.eye(3))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_roundtrip_and_basis_action(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        m = rng.standard_normal((2 * n, 2 * n))
        c = split_rlinear(m)
        scale = np.abs(m).max()
        # reproduces the input up to a few re-association roundings
        assert np.abs(c.as_real_matrix() - m).max() <= 2e-15 * max(1.0, scale)
        # action on the 2n standard basis vectors of R^2n ~ {e_k, i e_k}
        for k in range(n):
            e = np.zeros(n, dtype=complex)
            e[k] = 1.0
            for vec in (e, 1j * e):
                want_real = m @ np.concatenate([vec.real, vec.imag])
                got = c(vec)
                got_real = np.concatenate([got.real, got.imag])
                assert np.abs(got_real - want_real).max() <= 2e-15 * max(1.0, scale)


class TestTraceMachinery:
    def test_trace_of_diagonal_family(self):
        v = np.array([2.0 - 1j, 0.5j])
        t = np.einsum("k,ij->kij", v, np.eye(2, dtype=complex))
        np.testing.assert_allclose(trace_sesquilinear(SesquilinearMapW(t)), 2.0 * v, atol=0)

    def test_trace_of_zero(self):
        b = SesquilinearMapW(np.zeros((2, 2, 2), complex))
        assert np.all(trace_sesquilinear(b) == 0)

    def test_trace_unitary_frame_invariance(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            t = rng.standard_normal((3, 3, 3)) + 1j * rng.standard_normal((3, 3, 3))
            b = SesquilinearMapW(t)
            q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
            frame_trace = sum(b(q[:, a], q[:, a]) for a in range(3))
            np.testing.assert_allclose(frame_trace, trace_sesquilinear(b),
                                       atol=1e-10 * (1 + np.abs(t).max()))

    def test_build_zero_vector(self):
        c = random_invertible(np.random.default_rng(0), 2)
        b = build_trace_form(np.zeros(2, complex), c)
        assert np.all(b.tensor == 0)

    def test_build_identity_scalar_case(self):
        b = build_trace_form(np.array([1.0 + 0j]), RLinearMap.identity(1))
        assert b.tensor[0, 0, 0] == 1.0 + 0j

    def test_trace_identity_100_random(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            c = random_invertible(rng, n)
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            b = build_trace_form(v, c)
            want = c.c10 @ v + c.c01 @ np.conj(v)
            got = trace_sesquilinear(b)
            np.testing.assert_allclose(got, want, rtol=0, atol=5e-15 * (1 + np.abs(want).max()))


class TestSpanResidual:
    def test_built_forms_have_tiny_residual(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            c = random_invertible(rng, 2)
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            b = build_trace_form(v, c)
            for _ in range(5):
                assert span_residual(b, c, random_unit(rng, 2)) <= 1e-10

    def test_orthogonal_complement_case(self):
        t = np.zeros((2, 2, 2), complex)
        t[0, 1, 1] = 1.0
        b = SesquilinearMapW(t)
        res = span_residual(b, RLinearMap.identity(2), np.array([0, 1], dtype=complex))
        assert res == pytest.approx(1.0)

    def test_zero_vector_rejected(self):
        b = SesquilinearMapW(np.zeros((2, 2, 2), complex))
        with pytest.raises(ValueError):
            span_residual(b, RLinearMap.identity(2), np.zeros(2))


class TestRecover:
    def test_roundtrip(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            n = int(rng.integers(1, 4))
            c = random_invertible(rng, n)
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            back = recover_trace_vector(build_trace_form(v, c), c)
            assert np.linalg.norm(back - v) <= 1e-10 * (1 + np.linalg.norm(v))

    def test_zero_map(self):
        c = random_invertible(np.random.default_rng(1), 2)
        b = SesquilinearMapW(np.zeros((2, 2, 2), complex))
        assert np.all(recover_trace_vector(b, c) == 0)

    def test_conjugation_inverse(self):
        # C = coordinatewise conjugation is an involution
        c = RLinearMap(np.zeros((2, 2), complex), np.eye(2, dtype=complex))
        t = np.zeros((2, 2, 2), complex)
        t[0, 0, 0] = 0.25
        t[0, 1, 1] = 0.75  # trace = e1
        v = recover_trace_vector(SesquilinearMapW(t), c)
        np.testing.assert_allclose(v, np.array([1.0, 0.0]), atol=1e-14)

    def test_singular_c_rejected(self):
        b = SesquilinearMapW(np.zeros((2, 2, 2), complex))
        singular = RLinearMap(np.eye(2, dtype=complex), np.eye(2, dtype=complex))
        with pytest.raises(DegeneracyError):
            recover_trace_vector(b, singular)
