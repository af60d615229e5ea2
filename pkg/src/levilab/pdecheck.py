"""Pushforward Levi decomposition, PDE residuals and map classification.

For a map Phi and a scalar rho' defined near Phi(z), the Levi form of the
composite rho = rho' o Phi at z splits into

* l0 — the part built from first derivatives of Phi and the full second
  order data of rho' (two equivalent formulas, cross-checked), and
* l1 — the coupling of the gradient of rho' with the mixed Hessian of Phi:
  ``2 Re(dz' . mixed_apply(Phi, zeta, zeta))``.

The residuals quantify three properties of Phi at a point:

* span residual: mixed_apply(zeta, zeta) lies in span_R{dPhi(zeta), dPhi(i zeta)};
* trace residual: the sesquilinear identity
  ``mixed(zeta, eta) = (v, eta) dPhi^{1,0}(zeta) + (zeta, v) dPhi^{0,1}(eta)``
  with v recovered as dPhi^-1 of the mixed trace;
* linearized residual: the decoupled, identity-jet form of the trace
  identity, ``mixed[k,a,b] = trace_k delta[k,a] delta[k,b]``, which maps
  with componentwise-separable coordinates satisfy even when one component
  is not harmonic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DimensionError, InvariantViolation
from .forms import (
    RLinearMap,
    SesquilinearMapW,
    recover_trace_vector,
    span_residual,
)
from .wirtinger import (
    EPS,
    MapJet2,
    ScalarJet2,
    apply_differential,
    as_cvec,
    eval_real_hessian,
    mixed_apply,
    nu_mu,
    trace_mixed,
)
from . import zexpr

_L0_CROSS_TOL = 1e-9
_DIRECT_FD_REL_STEP = EPS ** (1.0 / 6.0)


@dataclass(frozen=True)
class LeviDecomposition:
    """Levi form of a composite rho' o Phi at a point, on one tangent vector."""

    l0: float
    l1: float
    total: float
    direct: float
    rel_gap: float


def _levi_value(hzzbar: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(v @ hzzbar @ np.conj(v)))


def pushforward_levi(rj: ScalarJet2, mj: MapJet2, zeta) -> LeviDecomposition:
    """Decompose the Levi form of rho' o Phi at a point.

    ``rj`` is the jet of rho' at Phi(z) and ``mj`` the jet of Phi at z.
    l0 is computed both as the quarter-sum of real Hessian values at
    dPhi(zeta), dPhi(i zeta) and from the (nu, mu) block formula; the two
    must agree to 1e-9 relative or an InvariantViolation is raised.
    ``direct`` re-derives the same number by finite differences of the
    composite of the two Taylor models, an independent numerical path.
    """
    if rj.n != mj.n:
        raise DimensionError("scalar jet and map jet dimensions differ")
    zeta = as_cvec(zeta, mj.n)

    nu, mu = nu_mu(mj, zeta)
    v1 = nu + mu
    v2 = 1j * (nu - mu)
    l0 = 0.25 * (eval_real_hessian(rj, v1) + eval_real_hessian(rj, v2))
    l0_blocks = (2.0 * float(np.real(nu @ rj.hzz @ mu))
                 + _levi_value(rj.hzzbar, nu)
                 + _levi_value(rj.hzzbar, mu))
    if abs(l0 - l0_blocks) > _L0_CROSS_TOL * max(1.0, abs(l0)):
        raise InvariantViolation(
            f"the two l0 formulas disagree: {l0} vs {l0_blocks}")

    b = mixed_apply(mj, zeta, zeta)
    l1 = 2.0 * float(np.real(rj.dz @ b))
    total = l0 + l1

    direct = _direct_levi_fd(rj, mj, zeta)
    rel_gap = abs(total - direct) / max(1.0, abs(direct))
    return LeviDecomposition(l0, l1, total, direct, rel_gap)


def _direct_levi_fd(rj: ScalarJet2, mj: MapJet2, zeta: np.ndarray) -> float:
    """Levi value of the composite via finite differences.

    Both jets are turned into polynomial Taylor models (the pure second
    order blocks of the map do not enter any Levi value and are taken as
    zero), the composite is a quartic, and one Richardson level makes the
    central-difference Hessian exact up to rounding.
    """
    n = mj.n

    def displacement(u: np.ndarray) -> np.ndarray:
        return (mj.jhol @ u + mj.janti @ np.conj(u)
                + np.einsum("kab,a,b->k", mj.mixed, u, np.conj(u)))

    def composite(u: np.ndarray) -> float:
        # constant term omitted: it cancels in second differences and only
        # feeds cancellation noise
        s = displacement(u)
        val = (2.0 * np.real(rj.dz @ s)
               + np.real(s @ rj.hzz @ s)
               + np.real(s @ rj.hzzbar @ np.conj(s)))
        return float(val)

    h0 = _DIRECT_FD_REL_STEP

    def levi_at(h: float) -> float:
        # Levi(zeta) = (H(zeta) + H(i zeta))/4 with H the real Hessian form,
        # read off from plain second differences along the two directions.
        out = 0.0
        for direction in (zeta, 1j * zeta):
            f_p = composite(h * direction)
            f_m = composite(-h * direction)
            f_0 = composite(0.0 * direction)
            out += (f_p - 2.0 * f_0 + f_m) / (h * h)
        return 0.25 * out

    coarse = levi_at(h0)
    fine = levi_at(0.5 * h0)
    return (4.0 * fine - coarse) / 3.0


def span_condition_residual(mj: MapJet2, zeta) -> float:
    """Distance of mixed_apply(zeta, zeta) from span_R{dPhi(zeta), dPhi(i zeta)},
    normalised to [0, 1]; zero when the mixed Hessian vanishes on zeta."""
    zeta = as_cvec(zeta, mj.n)
    if np.linalg.norm(zeta) == 0.0:
        raise ValueError("zeta must be nonzero")
    c = RLinearMap(mj.jhol, mj.janti)
    c.require_invertible()
    return span_residual(SesquilinearMapW(mj.mixed), c, zeta)


def _unit_vector(rng, n: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            return v / nv


def trace_formula_residual(mj: MapJet2, pair_samples: int, rng,
                           kappa: float = 1.0) -> float:
    """Worst relative error of the trace identity over random unit pairs.

    With ``kappa`` = 1 the recovered vector is v = dPhi^-1(Tr mixed); other
    values expose the Laplacian normalisation variant (kappa = 4 matches
    the convention Delta = 4 sum d2/dz dzbar) for reporting purposes.
    """
    if pair_samples < 1:
        raise ValueError("pair_samples must be >= 1")
    c = RLinearMap(mj.jhol, mj.janti)
    b = SesquilinearMapW(mj.mixed)
    v = kappa * recover_trace_vector(b, c)
    worst = 0.0
    for _ in range(pair_samples):
        zeta = _unit_vector(rng, mj.n)
        eta = _unit_vector(rng, mj.n)
        lhs = mixed_apply(mj, zeta, eta)
        rhs = (np.dot(v, np.conj(eta)) * (mj.jhol @ zeta)
               + np.dot(zeta, np.conj(v)) * (mj.janti @ np.conj(eta)))
        err = np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs))
        worst = max(worst, float(err))
    return worst


def linearized_trace_residual(mj: MapJet2, pair_samples: int = 20, rng=None) -> float:
    """Residual of the decoupled trace form mixed[k,a,b] = trace_k d[k,a] d[k,b].

    Separable maps (phi_1(z_1), ..., phi_n(z_n)) satisfy it for any C^2
    components; maps whose mixed Hessian couples coordinates do not.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    tr = trace_mixed(mj)
    worst = 0.0
    for _ in range(pair_samples):
        zeta = _unit_vector(rng, mj.n)
        eta = _unit_vector(rng, mj.n)
        lhs = mixed_apply(mj, zeta, eta)
        rhs = tr * zeta * np.conj(eta)
        err = np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs))
        worst = max(worst, float(err))
    return worst


@dataclass(frozen=True)
class ConditionResiduals:
    """Point-wise residual summary for one map jet."""

    span_iii: float
    trace_ii: float
    holo: float        # norm of the conjugate-linear Jacobian block
    antiholo: float    # norm of the complex-linear Jacobian block
    plurih: float      # norm of the mixed Hessian tensor
    at: np.ndarray

    @property
    def consistent(self) -> bool:
        """Trace identity implies the span property (the converse check
        only applies when the trace residual is tiny)."""
        if self.trace_ii > 1e-9:
            return True
        return self.span_iii <= 1e-7


def point_residuals(mj: MapJet2, at, zeta_samples: int = 16,
                    pair_samples: int = 8, rng=None, zeta=None) -> ConditionResiduals:
    """Evaluate all residuals of one map jet at one point."""
    rng = rng if rng is not None else np.random.default_rng(0)
    at = as_cvec(at, mj.n)
    span_worst = 0.0
    candidates = [zeta] if zeta is not None else []
    candidates.extend(_unit_vector(rng, mj.n) for _ in range(zeta_samples))
    for cand in candidates:
        span_worst = max(span_worst, span_condition_residual(mj, cand))
    trace = trace_formula_residual(mj, pair_samples, rng)
    return ConditionResiduals(
        span_iii=span_worst,
        trace_ii=trace,
        holo=float(np.linalg.norm(mj.janti)),
        antiholo=float(np.linalg.norm(mj.jhol)),
        plurih=float(np.linalg.norm(mj.mixed)),
        at=at,
    )


LABELS = ("holomorphic", "antiholomorphic", "pluriharmonic",
          "weakly_pluriharmonic", "generic")


@dataclass(frozen=True)
class Classification:
    label: str
    worst: dict
    skipped: int
    n_points: int


def _ball_point(rng, n: int, radius: float) -> np.ndarray:
    v = _unit_vector(rng, n)
    r = radius * rng.random() ** (1.0 / (2 * n))
    return r * v


def classify_map(spec: zexpr.PolyMapSpec, region_radius: float = 1.0,
                 samples: int = 200, seed: int = 0, tol: float = 1e-9,
                 weak_tol: float = 1e-6, pair_samples: int = 4) -> Classification:
    """Label a map on a ball by the norms of its jet blocks and residuals.

    The structural labels (holomorphic / antiholomorphic / pluriharmonic)
    need no Jacobian inverse and are decided first; the trace-identity
    stage skips points with a singular differential and fails when more
    than half of the samples are skipped.  Each sample index gets its own
    derived RNG stream, so the result is independent of evaluation order.
    """
    streams = [np.random.default_rng(c)
               for c in np.random.SeedSequence(seed).spawn(samples)]
    points = [_ball_point(r, spec.n, region_radius) for r in streams]
    jets = [zexpr.analytic_map_jet(spec, z) for z in points]

    worst = {
        "holo": max((float(np.linalg.norm(j.janti)) for j in jets), default=0.0),
        "antiholo": max((float(np.linalg.norm(j.jhol)) for j in jets), default=0.0),
        "plurih": max((float(np.linalg.norm(j.mixed)) for j in jets), default=0.0),
    }
    if worst["holo"] <= tol:
        return Classification("holomorphic", worst, 0, samples)
    if worst["antiholo"] <= tol:
        return Classification("antiholomorphic", worst, 0, samples)
    if worst["plurih"] <= tol:
        return Classification("pluriharmonic", worst, 0, samples)

    skipped = 0
    trace_worst = 0.0
    for r, j in zip(streams, jets):
        if not j.is_invertible():
            skipped += 1
            continue
        trace_worst = max(trace_worst, trace_formula_residual(j, pair_samples, r))
    worst["trace_ii"] = trace_worst
    if samples and skipped > samples // 2:
        raise DegeneracyError(
            f"{skipped}/{samples} sample points had a singular differential")
    label = "weakly_pluriharmonic" if trace_worst <= weak_tol else "generic"
    return Classification(label, worst, skipped, samples)
