"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import time

import numpy as np
import pytest

from levilab.experiments import (
    EPS_SCHEDULE,
    gallery,
    gallery_map,
    pseudoconvexity_preservation_check,
    span_trace_self_test,
    validate_certificate,
    verify_map,
)
from levilab.hypersurface import random_convex_quadric
from levilab.pdecheck import (
    linearized_trace_residual,
    pushforward_levi,
    span_condition_residual,
    trace_formula_residual,
)
from levilab.wirtinger import (
    QUARTIC_FD_REL_STEP,
    StepPolicy,
    c2r,
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
from levilab.zexpr import (
    analytic_map_jet,
    analytic_scalar_jet,
    random_map_spec,
    random_real_scalar_spec,
)

RICHARDSON = StepPolicy(rel_step=QUARTIC_FD_REL_STEP, richardson=True)


def _ball(rng, n, radius=1.0):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= max(np.linalg.norm(v), 1e-300)
    return radius * rng.random() ** (1.0 / (2 * n)) * v


def test_criterion_1_hessian_formula_equivalence():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        spec = random_real_scalar_spec(rng, n, max_degree=4, terms=3)
        z = _ball(rng, n, radius=1.5)
        zeta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        jet = analytic_scalar_jet(spec, z)
        via_complex = eval_real_hessian(jet, zeta)
        via_real = real_hessian_form(complex_to_real_scalar_jet(jet), c2r(zeta))
        err = abs(via_complex - via_real) / (1.0 + abs(via_real))
        worst = max(worst, err)
        assert err <= 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(f"\nACCEPTANCE 1 PASS: Hessian formula equivalence "
          f"(1000 cases, worst {worst:.2e}, {elapsed:.2f}s)")


def test_criterion_2_levi_decomposition():
    rng = np.random.default_rng(2)
    worst_analytic = worst_fd = worst_l0_gap = 0.0
    for _ in range(500):
        spec = random_map_spec(rng, 2, max_degree=2, terms=2, coeff_scale=0.3)
        z = _ball(rng, 2)
        mj = analytic_map_jet(spec, z)
        if not mj.is_invertible():
            continue
        g = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        quad = random_convex_quadric(rng, mj.value, g)
        zeta = _ball(rng, 2) + 0.1
        rj = quad.jet(mj.value)

        dec = pushforward_levi(rj, mj, zeta)
        worst_analytic = max(worst_analytic, dec.rel_gap)
        assert dec.rel_gap <= 1e-8

        # the two first-order-free forms of l0, recomputed explicitly
        nu, mu = nu_mu(mj, zeta)
        form_a = 0.25 * (eval_real_hessian(rj, nu + mu)
                         + eval_real_hessian(rj, 1j * (nu - mu)))
        form_b = (2.0 * float(np.real(nu @ rj.hzz @ mu))
                  + float(np.real(nu @ rj.hzzbar @ np.conj(nu)))
                  + float(np.real(mu @ rj.hzzbar @ np.conj(mu))))
        gap = abs(form_a - form_b) / max(1.0, abs(form_a))
        worst_l0_gap = max(worst_l0_gap, gap)
        assert gap <= 1e-9

        dec_fd = pushforward_levi(rj, fd_map_jet(spec, z), zeta)
        worst_fd = max(worst_fd, dec_fd.rel_gap)
        assert dec_fd.rel_gap <= 1e-4
    print(f"\nACCEPTANCE 2 PASS: Levi decomposition (500 cases, analytic gap "
          f"{worst_analytic:.2e}, fd gap {worst_fd:.2e}, l0 gap {worst_l0_gap:.2e})")


def test_criterion_3_trace_laplacian_convention():
    rng = np.random.default_rng(3)
    worst = 0.0
    h = 1e-4
    for _ in range(100):
        spec = random_map_spec(rng, 2, max_degree=3, terms=2, coeff_scale=0.5)
        z = _ball(rng, 2)
        got = 4.0 * trace_mixed(analytic_map_jet(spec, z))
        lap = np.zeros(2, dtype=complex)
        for k in range(2):
            for unit in (1.0, 1.0j):
                e = np.zeros(2, dtype=complex)
                e[k] = unit * h
                lap += (spec(z + e) - 2.0 * spec(z) + spec(z - e)) / (h * h)
        err = np.abs(got - lap).max() / (1.0 + np.abs(lap).max())
        worst = max(worst, err)
        assert err <= 1e-4
    print(f"\nACCEPTANCE 3 PASS: 4*trace equals the FD Laplacian "
          f"(100 maps, worst {worst:.2e})")


def test_criterion_4_gallery_classification_residuals():
    rng = np.random.default_rng(4)
    for name in ("identity", "holomorphic", "antiholomorphic", "pluriharmonic"):
        spec = gallery_map(name)
        for _ in range(50):
            z = _ball(rng, 2)
            mj = analytic_map_jet(spec, z)
            if not mj.is_invertible():
                continue
            assert trace_formula_residual(mj, 4, rng) <= 1e-9, name

    mj = analytic_map_jet(gallery_map("violator"), np.zeros(2, complex))
    span = span_condition_residual(mj, np.array([0.0, 1.0]))
    assert abs(span - 1.0) <= 1e-9
    trace = trace_formula_residual(mj, 8, np.random.default_rng(0))
    assert trace >= 0.1
    print(f"\nACCEPTANCE 4 PASS: gallery residuals (violator span {span:.12f}, "
          f"trace {trace:.3f})")


def test_criterion_5_linearized_equation_separates():
    spec = gallery_map("linearized_only")
    rng = np.random.default_rng(5)
    worst_lin = 0.0
    worst_trace = 0.0
    checked = 0
    for _ in range(50):
        z = _ball(rng, 2)
        mj = analytic_map_jet(spec, z)
        worst_lin = max(worst_lin, linearized_trace_residual(mj, 16, rng))
        if mj.is_invertible():
            checked += 1
            worst_trace = max(worst_trace, trace_formula_residual(mj, 16, rng))
    assert worst_lin <= 1e-10
    assert checked >= 25
    assert worst_trace > 1e-3
    print(f"\nACCEPTANCE 5 PASS: linearized form holds ({worst_lin:.2e}) while the "
          f"full trace identity fails ({worst_trace:.3f})")


def test_criterion_6_three_way_equivalence_sampled():
    start = time.perf_counter()
    lines = []
    for e in gallery():
        report = verify_map(e.spec, name=e.name, budget=200, seed=0)
        assert report.verdicts_agree, e.name
        expected_pass = e.expected_class != "generic"
        assert report.all_pass == expected_pass, e.name
        if not expected_pass:
            assert report.certificates, e.name
            lines.append(f"{e.name} min_levi={report.condition_i['min_levi']:.4g}")

    from levilab.experiments import find_counterexample
    cert = find_counterexample(gallery_map("violator"), np.zeros(2),
                               np.array([0.0, 1.0]))
    fresh = validate_certificate(cert)  # enforces levi <= -1e-6 * scale
    assert abs(fresh - cert.levi_value) <= 1e-8 * max(1.0, abs(cert.levi_value))
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"\nACCEPTANCE 6 PASS: three-way equivalence over the gallery "
          f"({'; '.join(lines)}; {elapsed:.1f}s)")


def test_criterion_7_model_quadric_preservation():
    report = pseudoconvexity_preservation_check(gallery_map("rlinear"),
                                                search_budget=500, seed=0)
    assert report.witness_found
    assert report.witness["coupling_value"] < 0
    assert report.witness["eps"] in EPS_SCHEDULE
    assert report.witness["levi_total"] < 0

    for name in ("holomorphic", "antiholomorphic"):
        rep = pseudoconvexity_preservation_check(gallery_map(name),
                                                 search_budget=500, seed=0)
        assert rep.preserved and rep.violations == 0
        assert rep.n_samples >= 450
    print(f"\nACCEPTANCE 7 PASS: model-quadric family (mixed witness "
          f"{report.witness['coupling_value']:.3f} at eps={report.witness['eps']}, "
          f"holo/antiholo clean over 500 samples each)")


def test_criterion_8_span_trace_suite():
    result = span_trace_self_test(samples=200, seed=8, n=2, zetas_per_case=20)
    assert result.worst_built_span_residual <= 1e-10
    assert result.worst_roundtrip_error <= 1e-10
    assert result.generic_rejected + result.generic_reconstructed == 200
    assert result.passed
    print(f"\nACCEPTANCE 8 PASS: span/trace equivalence (built residual "
          f"{result.worst_built_span_residual:.2e}, roundtrip "
          f"{result.worst_roundtrip_error:.2e}, {result.generic_rejected} generic "
          f"rejected / {result.generic_reconstructed} reconstructed)")


def test_criterion_9_determinism():
    a = verify_map(gallery_map("violator"), budget=100, seed=12345).to_dict()
    b = verify_map(gallery_map("violator"), budget=100, seed=12345).to_dict()
    a.pop("wall_time_s")
    b.pop("wall_time_s")
    text_a = json.dumps(a, sort_keys=True)
    text_b = json.dumps(b, sort_keys=True)
    assert text_a == text_b
    print("\nACCEPTANCE 9 PASS: identical seeds give bitwise-identical reports "
          "(timing excluded)")
