"""Second-order Wirtinger jets and real/complex coordinate conversions.

Conventions used across the whole package:

* real coordinates of C^n are ordered ``(x_1..x_n, y_1..y_n)`` with
  ``z_j = x_j + i y_j``;
* ``d/dz = (d/dx - i d/dy)/2`` and ``d/dzbar = (d/dx + i d/dy)/2``;
* for a real-valued function only the blocks ``(dz, hzz, hzzbar)`` are
  stored; the conjugate blocks are derived, never stored;
* all values are immutable after construction and every function here is
  pure, so concurrent use needs no synchronisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError

EPS = float(np.finfo(float).eps)

# Central differences of second order balance O(h^2) truncation against
# O(eps/h^2) rounding near h ~ eps^(1/4).  The factor 2 keeps the rounding
# term of exactly-linear maps comfortably below 1e-8.
DEFAULT_FD_REL_STEP = 2.0 * EPS**0.25

# Step for Richardson-extrapolated stencils applied to polynomials of
# degree <= 5, where one extrapolation level cancels truncation exactly
# and only the O(eps/h^2) rounding term is left.
QUARTIC_FD_REL_STEP = EPS ** (1.0 / 6.0)

_SYM_TOL = 1e-12


def as_cvec(values, n: int | None = None) -> np.ndarray:
    """Validate and return a point/tangent vector of C^n as a complex array."""
    z = np.asarray(values, dtype=complex).reshape(-1)
    if z.size < 1:
        raise DimensionError("vector must have at least one component")
    if n is not None and z.size != n:
        raise DimensionError(f"expected dimension {n}, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise ValueError("vector has non-finite entries")
    return z


def c2r(z: np.ndarray) -> np.ndarray:
    """C^n vector -> real 2n vector in (x_1..x_n, y_1..y_n) order."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag])


def r2c(x: np.ndarray) -> np.ndarray:
    """Real 2n vector -> C^n vector; inverse of :func:`c2r`."""
    x = np.asarray(x, dtype=float)
    if x.size % 2:
        raise DimensionError(f"real vector has odd length {x.size}")
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def _check_symmetric(m: np.ndarray, what: str) -> None:
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > _SYM_TOL * max(1.0, scale):
        raise ValueError(f"{what} is not symmetric within tolerance")


def _check_hermitian(m: np.ndarray, what: str) -> None:
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.conj().T) > _SYM_TOL * max(1.0, scale):
        raise ValueError(f"{what} is not Hermitian within tolerance")


@dataclass(frozen=True)
class RealJet2:
    """Second-order jet of a real-valued function of 2n real variables."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gradient, dtype=float).reshape(-1)
        h = np.asarray(self.hessian, dtype=float)
        if g.size % 2:
            raise DimensionError(f"gradient has odd length {g.size}")
        if h.shape != (g.size, g.size):
            raise DimensionError("hessian shape does not match gradient")
        if not (np.isfinite(self.value) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise ValueError("jet has non-finite entries")
        _check_symmetric(h, "real Hessian")
        object.__setattr__(self, "gradient", g)
        object.__setattr__(self, "hessian", h)

    @property
    def n(self) -> int:
        return self.gradient.size // 2


@dataclass(frozen=True)
class ScalarJet2:
    """Second-order jet of a real-valued function in complex coordinates.

    ``dz[j] = dr/dz_j``, ``hzz[i,j] = d2r/dz_i dz_j`` (symmetric) and
    ``hzzbar[i,j] = d2r/dz_i dzbar_j`` (Hermitian).  The dzbar block is
    ``conj(dz)`` and the zbar-zbar block is ``conj(hzz)``.
    """

    value: float
    dz: np.ndarray
    hzz: np.ndarray
    hzzbar: np.ndarray

    def __post_init__(self):
        dz = np.asarray(self.dz, dtype=complex).reshape(-1)
        n = dz.size
        hzz = np.asarray(self.hzz, dtype=complex)
        hzzbar = np.asarray(self.hzzbar, dtype=complex)
        if hzz.shape != (n, n) or hzzbar.shape != (n, n):
            raise DimensionError("Hessian block shapes do not match dz")
        arrays = (dz, hzz, hzzbar)
        if not (np.isfinite(self.value) and all(np.all(np.isfinite(a)) for a in arrays)):
            raise ValueError("jet has non-finite entries")
        _check_symmetric(hzz.real, "Re hzz")
        _check_symmetric(hzz.imag, "Im hzz")
        _check_hermitian(hzzbar, "hzzbar")
        object.__setattr__(self, "dz", dz)
        object.__setattr__(self, "hzz", hzz)
        object.__setattr__(self, "hzzbar", hzzbar)

    @property
    def n(self) -> int:
        return self.dz.size


@dataclass(frozen=True)
class MapJet2:
    """Second-order Wirtinger jet of a map C^n -> C^n.

    ``jhol[k,a] = dPhi_k/dz_a``, ``janti[k,a] = dPhi_k/dzbar_a`` and
    ``mixed[k,a,b] = d2Phi_k/dz_a dzbar_b``.  The pure second-order blocks
    are not needed by any consumer in this package and are not stored.
    """

    value: np.ndarray
    jhol: np.ndarray
    janti: np.ndarray
    mixed: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.value, dtype=complex).reshape(-1)
        n = v.size
        jhol = np.asarray(self.jhol, dtype=complex)
        janti = np.asarray(self.janti, dtype=complex)
        mixed = np.asarray(self.mixed, dtype=complex)
        if jhol.shape != (n, n) or janti.shape != (n, n) or mixed.shape != (n, n, n):
            raise DimensionError("jet block shapes are inconsistent")
        for a in (v, jhol, janti, mixed):
            if not np.all(np.isfinite(a)):
                raise ValueError("jet has non-finite entries")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "jhol", jhol)
        object.__setattr__(self, "janti", janti)
        object.__setattr__(self, "mixed", mixed)

    @property
    def n(self) -> int:
        return self.value.size

    def real_jacobian(self) -> np.ndarray:
        """The differential as a real 2n x 2n matrix in (x, y) ordering."""
        return real_jacobian_from_blocks(self.jhol, self.janti)

    def singular_values(self) -> tuple[float, float]:
        """(smallest, largest) singular value of the real Jacobian."""
        s = np.linalg.svd(self.real_jacobian(), compute_uv=False)
        return float(s[-1]), float(s[0])

    def is_invertible(self, rel_tol: float = 1e-10) -> bool:
        smin, smax = self.singular_values()
        return smin > rel_tol * max(1.0, smax)


def real_jacobian_from_blocks(jhol: np.ndarray, janti: np.ndarray) -> np.ndarray:
    p, q = np.asarray(jhol), np.asarray(janti)
    return np.block([
        [(p + q).real, (q - p).imag],
        [(p + q).imag, (p - q).real],
    ])


def real_to_complex_scalar_jet(j: RealJet2) -> ScalarJet2:
    """Rewrite a real-coordinate jet in complex coordinates.

    The quadratic forms agree: evaluating the returned jet with
    :func:`eval_real_hessian` at any zeta equals evaluating the real
    Hessian form at (Re zeta, Im zeta).
    """
    n = j.n
    gx, gy = j.gradient[:n], j.gradient[n:]
    a = j.hessian[:n, :n]
    b = j.hessian[n:, n:]
    c = j.hessian[:n, n:]
    dz = 0.5 * (gx - 1j * gy)
    hzz = 0.25 * (a - b - 1j * (c + c.T))
    hzzbar = 0.25 * (a + b + 1j * (c - c.T))
    return ScalarJet2(j.value, dz, hzz, hzzbar)


def complex_to_real_scalar_jet(j: ScalarJet2) -> RealJet2:
    """Inverse of :func:`real_to_complex_scalar_jet` (exact in real arithmetic)."""
    dz, hzz, hzzbar = j.dz, j.hzz, j.hzzbar
    gradient = np.concatenate([2.0 * dz.real, -2.0 * dz.imag])
    hxx = 2.0 * (hzz.real + hzzbar.real)
    hyy = 2.0 * (hzzbar.real - hzz.real)
    hxy = 2.0 * (hzzbar.imag - hzz.imag)
    hessian = np.block([[hxx, hxy], [hxy.T, hyy]])
    return RealJet2(j.value, gradient, hessian)


def real_hessian_form(j: RealJet2, v: np.ndarray) -> float:
    """Real Hessian quadratic form on a real 2n vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != j.gradient.size:
        raise DimensionError("vector length does not match jet dimension")
    return float(v @ j.hessian @ v)


def eval_real_hessian(j: ScalarJet2, zeta) -> float:
    """Real Hessian form evaluated through the complex blocks.

    Returns ``2 Re(zeta^T hzz zeta) + 2 Re(sum hzzbar[i,j] zeta_i conj(zeta_j))``,
    the complex-coordinate expression of the real Hessian with the conjugate
    blocks folded in.
    """
    zeta = as_cvec(zeta, j.n)
    quad = zeta @ j.hzz @ zeta
    levi = zeta @ j.hzzbar @ np.conj(zeta)
    return float(2.0 * quad.real + 2.0 * levi.real)


def apply_differential(m: MapJet2, zeta) -> np.ndarray:
    """dPhi(zeta) = jhol zeta + janti conj(zeta)."""
    zeta = as_cvec(zeta, m.n)
    return m.jhol @ zeta + m.janti @ np.conj(zeta)


def nu_mu(m: MapJet2, zeta) -> tuple[np.ndarray, np.ndarray]:
    """Complex-linear and conjugate-linear parts of the differential.

    nu = jhol zeta and mu = janti conj(zeta); they satisfy
    nu + mu = dPhi(zeta) and i(nu - mu) = dPhi(i zeta) exactly.
    """
    zeta = as_cvec(zeta, m.n)
    return m.jhol @ zeta, m.janti @ np.conj(zeta)


def mixed_apply(m: MapJet2, zeta, eta) -> np.ndarray:
    """Sesquilinear mixed Hessian: component k is sum_ab mixed[k,a,b] zeta_a conj(eta_b)."""
    zeta = as_cvec(zeta, m.n)
    eta = as_cvec(eta, m.n)
    return np.einsum("kab,a,b->k", m.mixed, zeta, np.conj(eta))


def trace_mixed(m: MapJet2) -> np.ndarray:
    """Trace of the mixed Hessian; 4 * trace equals the coordinatewise Laplacian."""
    return np.einsum("kaa->k", m.mixed)


@dataclass(frozen=True)
class StepPolicy:
    """Finite-difference step selection.

    The actual step is ``rel_step * max(1, |z|_inf)``.  With ``richardson``
    set, every stencil is evaluated at h and h/2 and extrapolated, which
    removes the O(h^2) truncation term exactly on polynomials of degree <= 5.
    """

    rel_step: float = DEFAULT_FD_REL_STEP
    richardson: bool = False

    def __post_init__(self):
        if not (self.rel_step > 0.0 and np.isfinite(self.rel_step)):
            raise ValueError(f"step must be positive, got {self.rel_step}")

    def step(self, z) -> float:
        scale = max(1.0, float(np.max(np.abs(np.asarray(z)), initial=0.0)))
        return self.rel_step * scale


def _fd_second_table(f: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, h: float):
    """First and second central differences of f over all real axes at x0.

    Returns (value, first[d, ...], second[d, e, ...]); f may be scalar- or
    vector-valued.  Raises on non-finite samples, reporting the offset.
    """
    dim = x0.size
    f0 = np.asarray(f(x0))

    def probe(offset):
        val = np.asarray(f(x0 + offset))
        if not np.all(np.isfinite(val)):
            raise ValueError(f"non-finite sample at offset {offset.tolist()}")
        return val

    plus, minus = [], []
    for u in range(dim):
        e = np.zeros(dim)
        e[u] = h
        plus.append(probe(e))
        minus.append(probe(-e))

    first = np.stack([(plus[u] - minus[u]) / (2.0 * h) for u in range(dim)])
    second = np.empty((dim, dim) + f0.shape, dtype=f0.dtype)
    for u in range(dim):
        second[u, u] = (plus[u] - 2.0 * f0 + minus[u]) / (h * h)
        for v in range(u + 1, dim):
            off = np.zeros(dim)
            off[u] = h
            off[v] = h
            pp = probe(off)
            off[v] = -h
            pm = probe(off)
            off[u] = -h
            mm = probe(off)
            off[v] = h
            mp = probe(off)
            s = (pp - pm - mp + mm) / (4.0 * h * h)
            second[u, v] = s
            second[v, u] = s
    return f0, first, second


def _fd_tables(f, x0: np.ndarray, policy: StepPolicy):
    h = policy.rel_step * max(1.0, float(np.max(np.abs(x0), initial=0.0)))
    f0, d1, d2 = _fd_second_table(f, x0, h)
    if policy.richardson:
        _, d1h, d2h = _fd_second_table(f, x0, 0.5 * h)
        d1 = (4.0 * d1h - d1) / 3.0
        d2 = (4.0 * d2h - d2) / 3.0
    return f0, d1, d2


def fd_map_jet(f: Callable[[np.ndarray], np.ndarray], z, policy: StepPolicy | None = None) -> MapJet2:
    """Numerical second-order jet of a black-box C^2 map, O(h^2) accurate.

    ``f`` takes and returns complex n-vectors and must be defined on a
    neighbourhood of z of radius at least twice the step.
    """
    policy = policy or StepPolicy()
    z = as_cvec(z)
    n = z.size

    def g(x):
        return np.asarray(f(r2c(x)), dtype=complex).reshape(n)

    f0, d1, d2 = _fd_tables(g, c2r(z), policy)

    dx, dy = d1[:n], d1[n:]
    jhol = 0.5 * (dx - 1j * dy).T
    janti = 0.5 * (dx + 1j * dy).T

    # mixed[k,a,b] = ((Sxx + Syy) + i(Sxy - Syx))/4 with S in (x, y) blocks
    sxx = d2[:n, :n]
    syy = d2[n:, n:]
    sxy = d2[:n, n:]
    syx = d2[n:, :n]
    mixed = 0.25 * np.transpose((sxx + syy) + 1j * (sxy - syx), (2, 0, 1))
    return MapJet2(f0, jhol, janti, mixed)


def fd_real_scalar_jet(f: Callable[[np.ndarray], float], z, policy: StepPolicy | None = None) -> RealJet2:
    """Numerical real-coordinate jet of a black-box real-valued function on C^n."""
    policy = policy or StepPolicy()
    z = as_cvec(z)

    def g(x):
        return float(f(r2c(x)))

    f0, d1, d2 = _fd_tables(g, c2r(z), policy)
    return RealJet2(float(f0), d1, 0.5 * (d2 + d2.T))


def fd_scalar_jet(f: Callable[[np.ndarray], float], z, policy: StepPolicy | None = None) -> ScalarJet2:
    """Numerical complex-coordinate jet of a black-box real-valued function."""
    return real_to_complex_scalar_jet(fd_real_scalar_jet(f, z, policy))
