"""Hermitian and sesquilinear linear algebra.

Implements the span/trace machinery used by the PDE checks: an R-linear
isomorphism C splits into complex-linear and conjugate-linear parts, a
vector-valued sesquilinear map B has a trace, and the pair (B, C) is
"aligned" when B(zeta, conj(zeta)) always lies in the real span of
{C(zeta), C(i zeta)}; such a B is exactly of the form

    B(zeta, conj(eta)) = (v, eta) C10(zeta) + (zeta, v) C01(eta)

with v = C^-1(Tr B).  The Hermitian product convention throughout is
(a, b) = sum_j a_j conj(b_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DimensionError
from .wirtinger import as_cvec, c2r, r2c

_SPAN_FLOOR = 1e-300


@dataclass(frozen=True)
class HermitianForm:
    """A Hermitian matrix used as a quadratic form (e.g. a Levi form)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        scale = np.linalg.norm(m)
        if np.linalg.norm(m - m.conj().T) > 1e-12 * max(1.0, scale):
            raise ValueError("matrix is not Hermitian within tolerance")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def levi_eval(h: HermitianForm, zeta) -> float:
    """Quadratic form sum_ij M[i,j] zeta_i conj(zeta_j); real for Hermitian M."""
    zeta = as_cvec(zeta, h.n)
    v = zeta @ h.matrix @ np.conj(zeta)
    if abs(v.imag) > 1e-12 * max(1.0, abs(v)):
        raise ValueError("quadratic form returned a non-real value")
    return float(v.real)


def min_eig_hermitian(h: HermitianForm) -> float:
    """Smallest eigenvalue (LAPACK Hermitian eigensolver)."""
    return float(np.linalg.eigvalsh(h.matrix)[0])


def restrict_form(h: HermitianForm, basis) -> HermitianForm:
    """Restriction of the form to the span of the given vectors.

    Entries are sum_ij M[i,j] (b_k)_i conj((b_l)_j), so that evaluating the
    restricted form on coefficients equals evaluating the original form on
    the corresponding combination (same pairing as :func:`levi_eval`).
    """
    cols = [as_cvec(b, h.n) for b in basis]
    if not cols:
        raise DimensionError("basis must contain at least one vector")
    b = np.column_stack(cols)
    s = np.linalg.svd(b, compute_uv=False)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        raise DegeneracyError("basis vectors are linearly dependent")
    r = b.T @ h.matrix @ np.conj(b)
    return HermitianForm(0.5 * (r + r.conj().T))


@dataclass(frozen=True)
class RLinearMap:
    """An R-linear map of C^n stored by its parts: z -> c10 z + c01 conj(z)."""

    c10: np.ndarray
    c01: np.ndarray

    def __post_init__(self):
        c10 = np.asarray(self.c10, dtype=complex)
        c01 = np.asarray(self.c01, dtype=complex)
        if c10.shape != c01.shape or c10.ndim != 2 or c10.shape[0] != c10.shape[1]:
            raise DimensionError("parts must be square matrices of equal shape")
        object.__setattr__(self, "c10", c10)
        object.__setattr__(self, "c01", c01)

    @property
    def n(self) -> int:
        return self.c10.shape[0]

    def __call__(self, zeta) -> np.ndarray:
        zeta = as_cvec(zeta, self.n)
        return self.c10 @ zeta + self.c01 @ np.conj(zeta)

    def as_real_matrix(self) -> np.ndarray:
        p, q = self.c10, self.c01
        return np.block([
            [(p + q).real, (q - p).imag],
            [(p + q).imag, (p - q).real],
        ])

    def singular_values(self) -> tuple[float, float]:
        s = np.linalg.svd(self.as_real_matrix(), compute_uv=False)
        return float(s[-1]), float(s[0])

    def require_invertible(self, rel_tol: float = 1e-10) -> None:
        smin, smax = self.singular_values()
        if smin <= rel_tol * max(1.0, smax):
            raise DegeneracyError("R-linear map is numerically singular")

    def inverse(self) -> "RLinearMap":
        self.require_invertible()
        return split_rlinear(np.linalg.inv(self.as_real_matrix()))

    @staticmethod
    def identity(n: int) -> "RLinearMap":
        return RLinearMap(np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))


def split_rlinear(real_matrix) -> RLinearMap:
    """Split a real 2n x 2n matrix into complex-linear and conjugate-linear parts.

    The returned map reproduces the real action on every vector up to
    rounding (one re-association per entry).
    """
    m = np.asarray(real_matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2:
        raise DimensionError(f"real matrix has odd size {m.shape[0]}")
    n = m.shape[0] // 2
    a = m[:n, :n]
    b = m[:n, n:]
    c = m[n:, :n]
    d = m[n:, n:]
    c10 = 0.5 * ((a + d) + 1j * (c - b))
    c01 = 0.5 * ((a - d) + 1j * (c + b))
    return RLinearMap(c10, c01)


@dataclass(frozen=True)
class SesquilinearMapW:
    """Vector-valued sesquilinear map stored as tensor[k, i, j] = B(e_i, conj(e_j))_k."""

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        if t.ndim != 3 or t.shape[1] != t.shape[2]:
            raise DimensionError(f"expected an (m, n, n) tensor, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("tensor has non-finite entries")
        object.__setattr__(self, "tensor", t)

    @property
    def n(self) -> int:
        return self.tensor.shape[1]

    @property
    def m(self) -> int:
        return self.tensor.shape[0]

    def __call__(self, zeta, eta) -> np.ndarray:
        zeta = as_cvec(zeta, self.n)
        eta = as_cvec(eta, self.n)
        return np.einsum("kij,i,j->k", self.tensor, zeta, np.conj(eta))


def trace_sesquilinear(b: SesquilinearMapW) -> np.ndarray:
    """Tr B = sum_a B(e_a, conj(e_a)) over the standard orthonormal frame."""
    return np.einsum("kaa->k", b.tensor)


def build_trace_form(v, c: RLinearMap) -> SesquilinearMapW:
    """The aligned sesquilinear map determined by v and C.

    tensor[k, i, j] = v_j c10[k, i] + conj(v_i) c01[k, j]; its trace equals
    C(v) exactly at block level.
    """
    v = as_cvec(v, c.n)
    t = np.einsum("ki,j->kij", c.c10, v) + np.einsum("i,kj->kij", np.conj(v), c.c01)
    return SesquilinearMapW(t)


def span_residual(b: SesquilinearMapW, c: RLinearMap, zeta) -> float:
    """Relative distance of B(zeta, conj(zeta)) from span_R{C(zeta), C(i zeta)}.

    Least squares over the two real coefficients, normalised by
    |B(zeta, conj(zeta))| (0 when that vector vanishes); result in [0, 1].
    """
    zeta = as_cvec(zeta, b.n)
    if c.n != b.n or c.n != b.m:
        raise DimensionError("B and C dimensions differ")
    norm_zeta = np.linalg.norm(zeta)
    if norm_zeta == 0.0:
        raise ValueError("zeta must be nonzero")
    w = b(zeta, zeta)
    norm_w = np.linalg.norm(w)
    if norm_w == 0.0:
        return 0.0
    u1 = c(zeta)
    u2 = c(1j * zeta)
    if min(np.linalg.norm(u1), np.linalg.norm(u2)) <= 1e-14 * norm_zeta:
        raise DegeneracyError("span {C(zeta), C(i zeta)} is degenerate")
    a = np.column_stack([c2r(u1), c2r(u2)])
    rhs = c2r(w)
    coef, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = np.linalg.norm(rhs - a @ coef)
    return float(resid / max(norm_w, _SPAN_FLOOR))


def recover_trace_vector(b: SesquilinearMapW, c: RLinearMap) -> np.ndarray:
    """v = C^-1(Tr B), solved through the real 2n x 2n system."""
    if c.n != b.n or c.n != b.m:
        raise DimensionError("B and C dimensions differ")
    c.require_invertible()
    tr = trace_sesquilinear(b)
    x = np.linalg.solve(c.as_real_matrix(), c2r(tr))
    return r2c(x)
