"""Defining functions, quadrics, tangent frames and point-wise convexity tests.

A quadric stores the constant, the coefficients of a C-linear form (the
real-linear part of the function is ``2 Re(sum lin_j z_j)``) and the two
second-order blocks, so its jet is available in closed form everywhere.

Gradient convention: the package passes real gradients around in their
complex form ``g = dbar rho = conj(d rho)``; the real-coordinate gradient
vector is ``2 (Re g, Im g)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import zexpr
from .errors import DegeneracyError, DimensionError
from .forms import HermitianForm, min_eig_hermitian, restrict_form
from .wirtinger import (
    ScalarJet2,
    StepPolicy,
    as_cvec,
    complex_to_real_scalar_jet,
    fd_scalar_jet,
)

GRAD_TOL = 1e-8


@dataclass(frozen=True)
class Quadric:
    """Real quadratic defining function on C^n.

    rho(z) = c0 + 2 Re(lin . z) + Re(z^T hzz z) + sum_ij hzzbar[i,j] z_i conj(z_j)

    so the jet blocks at any point are exactly (hzz, hzzbar) and
    d rho/dz = lin + hzz z + hzzbar conj(z).
    """

    n: int
    c0: float
    lin: np.ndarray
    hzz: np.ndarray
    hzzbar: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.lin, dtype=complex).reshape(-1)
        hzz = np.asarray(self.hzz, dtype=complex)
        hzzbar = np.asarray(self.hzzbar, dtype=complex)
        if lin.size != self.n or hzz.shape != (self.n, self.n) or hzzbar.shape != (self.n, self.n):
            raise DimensionError("quadric block shapes are inconsistent")
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "hzz", hzz)
        object.__setattr__(self, "hzzbar", hzzbar)
        # validate symmetry/Hermiticity through the jet type
        self.jet(np.zeros(self.n, dtype=complex))

    def value(self, z) -> float:
        z = as_cvec(z, self.n)
        v = (self.c0
             + 2.0 * np.real(self.lin @ z)
             + np.real(z @ self.hzz @ z)
             + np.real(z @ self.hzzbar @ np.conj(z)))
        return float(v)

    def jet(self, z) -> ScalarJet2:
        z = as_cvec(z, self.n)
        dz = self.lin + self.hzz @ z + self.hzzbar @ np.conj(z)
        return ScalarJet2(self.value(z), dz, self.hzz, self.hzzbar)

    def defining_function(self) -> "DefiningFunction":
        return DefiningFunction(self.n, self.value, self.jet, "quadric")

    def to_dict(self) -> dict:
        pair = lambda c: [float(np.real(c)), float(np.imag(c))]
        return {
            "n": self.n,
            "c0": float(self.c0),
            "lin": [pair(c) for c in self.lin],
            "hzz": [[pair(c) for c in row] for row in self.hzz],
            "hzzbar": [[pair(c) for c in row] for row in self.hzzbar],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Quadric":
        unpair = lambda p: complex(p[0], p[1])
        n = int(data["n"])
        lin = np.array([unpair(p) for p in data["lin"]])
        hzz = np.array([[unpair(p) for p in row] for row in data["hzz"]])
        hzzbar = np.array([[unpair(p) for p in row] for row in data["hzzbar"]])
        return cls(n, float(data["c0"]), lin, hzz, hzzbar)


def quadric_centered(center, lin_centered, hzz, hzzbar, c0_centered: float = 0.0) -> Quadric:
    """Quadric given by blocks in coordinates w = z - center, expanded to
    absolute coordinates."""
    center = as_cvec(center)
    n = center.size
    lin_c = as_cvec(lin_centered, n)
    hzz = np.asarray(hzz, dtype=complex)
    hzzbar = np.asarray(hzzbar, dtype=complex)
    lin = lin_c - hzz @ center - hzzbar @ np.conj(center)
    c0 = (c0_centered
          - 2.0 * float(np.real(lin_c @ center))
          + float(np.real(center @ hzz @ center))
          + float(np.real(center @ hzzbar @ np.conj(center))))
    return Quadric(n, c0, lin, hzz, hzzbar)


def strictly_pseudoconvex_quadric(n: int, eps: float, lin=None, center=None) -> Quadric:
    """The model family sum_j (z_j^2 + conj(z_j)^2 + eps |z_j|^2) plus a
    C-linear form and its conjugate; its Levi form is exactly eps * I."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    lin_c = np.zeros(n, dtype=complex) if lin is None else as_cvec(lin, n)
    hzz = 2.0 * np.eye(n, dtype=complex)
    hzzbar = eps * np.eye(n, dtype=complex)
    if center is None:
        return Quadric(n, 0.0, lin_c, hzz, hzzbar)
    return quadric_centered(center, lin_c, hzz, hzzbar)


def random_convex_quadric(rng, through, gradient) -> Quadric:
    """Strictly convex quadric vanishing at ``through`` with prescribed
    complex gradient (dbar rho) there.

    The real Hessian is G^T G + 0.1 I for a standard normal G, so the
    convexity margin is at least 0.1.
    """
    through = as_cvec(through)
    n = through.size
    g = as_cvec(gradient, n)
    if np.linalg.norm(g) == 0.0:
        raise ValueError("prescribed gradient must be nonzero")
    gm = rng.standard_normal((2 * n, 2 * n))
    s = gm.T @ gm + 0.1 * np.eye(2 * n)
    a = s[:n, :n]
    b = s[n:, n:]
    c = s[:n, n:]
    hzz = 0.25 * (a - b - 1j * (c + c.T))
    hzzbar = 0.25 * (a + b + 1j * (c - c.T))
    return quadric_centered(through, np.conj(g), hzz, hzzbar)


def deform_family(q: Quadric, base, t: float) -> Quadric:
    """Tilt the linear part by t times the gradient at ``base``.

    The quadratic blocks are shared unchanged, the surface still passes
    through ``base`` and the gradient there scales by (1 + t); t = -1 is
    rejected because the gradient would vanish.
    """
    base = as_cvec(base, q.n)
    if abs(1.0 + t) < 1e-12:
        raise ValueError("t = -1 collapses the gradient at the base point")
    d = q.jet(base).dz
    lin = q.lin + t * d
    c0 = q.c0 - 2.0 * t * float(np.real(d @ base))
    return Quadric(q.n, c0, lin, q.hzz, q.hzzbar)


class DefiningFunction:
    """A real-valued C^2 function with a jet oracle; rho = 0 cuts the surface."""

    def __init__(self, n: int, value: Callable, jet: Callable, kind: str):
        self.n = n
        self._value = value
        self._jet = jet
        self.kind = kind

    def value(self, z) -> float:
        return float(self._value(as_cvec(z, self.n)))

    def jet(self, z) -> ScalarJet2:
        return self._jet(as_cvec(z, self.n))

    @classmethod
    def from_scalar_spec(cls, spec: zexpr.ScalarSpec) -> "DefiningFunction":
        return cls(spec.n, spec, lambda z: zexpr.analytic_scalar_jet(spec, z), "analytic")

    @classmethod
    def from_quadric(cls, q: Quadric) -> "DefiningFunction":
        return q.defining_function()

    @classmethod
    def from_callable(cls, f: Callable, n: int, policy: StepPolicy | None = None) -> "DefiningFunction":
        policy = policy or StepPolicy()
        return cls(n, f, lambda z: fd_scalar_jet(f, z, policy), "fd")


def jet_at(d: DefiningFunction, z, require_regular: bool = False,
           grad_tol: float = GRAD_TOL) -> ScalarJet2:
    """Jet of a defining function; optionally reject gradient-degenerate points."""
    jet = d.jet(z)
    if require_regular:
        scale = max(1.0, abs(jet.value), float(np.linalg.norm(jet.hzzbar)))
        if np.linalg.norm(jet.dz) <= grad_tol * scale:
            raise DegeneracyError(f"gradient below threshold at {np.asarray(z).tolist()}")
    return jet


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal basis of the complex tangent space at a surface point."""

    base_point: Optional[np.ndarray]
    complex_tangent_basis: tuple
    gradient_dz: np.ndarray


def complex_tangent_basis(jet: ScalarJet2, base_point=None, grad_tol: float = GRAD_TOL) -> TangentFrame:
    """Orthonormal basis of {zeta : sum_j (d rho/dz_j) zeta_j = 0}.

    This is the unique tangency convention under which holomorphic tangent
    vectors of holomorphic graphs are complex tangent.
    """
    dz = jet.dz
    norm = np.linalg.norm(dz)
    if norm <= grad_tol:
        raise DegeneracyError("gradient too small to define a tangent frame")
    row = dz.reshape(1, -1) / norm
    _, _, vh = np.linalg.svd(row)
    basis = tuple(np.conj(vh[k]) for k in range(1, jet.n))
    for b in basis:
        if abs(dz @ b) > 1e-10 * norm:
            raise DegeneracyError("tangent basis failed the annihilation check")
    bp = None if base_point is None else as_cvec(base_point, jet.n)
    return TangentFrame(bp, basis, dz)


def project_complex_tangent(jet: ScalarJet2, zeta) -> np.ndarray:
    """Project a vector onto the complex tangent space at the jet's point."""
    dz = jet.dz
    zeta = as_cvec(zeta, jet.n)
    nrm2 = np.real(dz @ np.conj(dz))
    if nrm2 == 0.0:
        raise DegeneracyError("cannot project on a tangent space with zero gradient")
    return zeta - (dz @ zeta) / nrm2 * np.conj(dz)


def real_hessian_of(jet: ScalarJet2) -> np.ndarray:
    """Full real 2n x 2n Hessian rebuilt from the complex blocks."""
    return complex_to_real_scalar_jet(jet).hessian


def is_strictly_convex_at(jet: ScalarJet2, tol: float = 1e-9) -> bool:
    """Positive definiteness of the full real Hessian at the point."""
    h = real_hessian_of(jet)
    eigs = np.linalg.eigvalsh(h)
    return bool(eigs[0] > tol * max(1.0, abs(eigs[-1]), abs(eigs[0])))


@dataclass(frozen=True)
class PseudoconvexityResult:
    passed: bool
    min_restricted_eig: float
    trivially_pseudoconvex: bool


def pseudoconvexity_details(jet: ScalarJet2, tol: float = 1e-9,
                            grad_tol: float = GRAD_TOL) -> PseudoconvexityResult:
    """Positive definiteness of the Levi form on the complex tangent space.

    In ambient dimension 1 the restriction is empty and the test is
    vacuously true; the flag reports that case.
    """
    if jet.n == 1:
        return PseudoconvexityResult(True, float("inf"), True)
    frame = complex_tangent_basis(jet, grad_tol=grad_tol)
    levi = HermitianForm(jet.hzzbar)
    restricted = restrict_form(levi, frame.complex_tangent_basis)
    lo = min_eig_hermitian(restricted)
    hi = float(np.linalg.norm(restricted.matrix, 2))
    return PseudoconvexityResult(bool(lo > tol * max(1.0, hi)), lo, False)


def is_strictly_pseudoconvex_at(jet: ScalarJet2, tol: float = 1e-9,
                                grad_tol: float = GRAD_TOL) -> bool:
    return pseudoconvexity_details(jet, tol, grad_tol).passed


def surface_sample(d: DefiningFunction, seed_point, count: int, rng,
                   spread: float = 0.3, max_radius: float | None = None,
                   newton_iters: int = 50, rel_tol: float = 1e-10) -> list[np.ndarray]:
    """Random points on {rho = 0}: Gaussian perturbations of a seed point
    projected back along the gradient by Newton iteration."""
    seed_point = as_cvec(seed_point, d.n)
    start = _project_to_surface(d, seed_point, newton_iters, rel_tol)
    if max_radius is None:
        max_radius = 10.0 * (1.0 + float(np.linalg.norm(start)))
    out = []
    for _ in range(count):
        for _attempt in range(8):
            step = spread * (rng.standard_normal(d.n) + 1j * rng.standard_normal(d.n))
            z = _project_to_surface(d, start + step, newton_iters, rel_tol)
            if np.linalg.norm(z - start) <= max_radius:
                out.append(z)
                break
        else:
            raise DegeneracyError("could not place a sample inside the configured region")
    return out


def _project_to_surface(d: DefiningFunction, z: np.ndarray, iters: int, rel_tol: float) -> np.ndarray:
    for _ in range(iters):
        val = d.value(z)
        scale = max(1.0, float(np.max(np.abs(z), initial=0.0)))
        if abs(val) <= rel_tol * scale:
            return z
        jet = d.jet(z)
        g = 2.0 * np.conj(jet.dz)  # complex form of the real gradient
        g2 = float(np.real(g @ np.conj(g)))
        if g2 <= (GRAD_TOL * scale) ** 2:
            raise DegeneracyError("gradient degenerate during Newton projection")
        z = z - val * g / g2
    raise DegeneracyError(f"Newton projection did not converge in {iters} iterations")
