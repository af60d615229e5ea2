"""Command-line front end.

Exit codes: 0 all checks pass, 1 a violation or counterexample was found,
2 usage or parse error, 3 numerical degeneracy.  With ``--output json``
every result, including errors, is a single JSON object on stdout;
diagnostics go to stderr.  Reports are bitwise reproducible for a fixed
seed (the ``wall_time_s`` field excluded).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments, hypersurface, pdecheck, zexpr
from .errors import DegeneracyError, DimensionError, LeviLabError, ParseError
from .experiments import cvec_to_pairs
from .wirtinger import as_cvec

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


class UsageError(ValueError):
    pass


def parse_complex_literal(text: str) -> complex:
    """Parse 're+imi' literals such as '0', '1.5-2i', 'i', '1e-3+0.25i'."""
    s = text.strip().replace(" ", "")
    if not s:
        raise UsageError("empty complex literal")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"bad complex literal {text!r}") from exc


def parse_cvec_flag(text: str) -> np.ndarray:
    try:
        return as_cvec([parse_complex_literal(part) for part in text.split(",")])
    except DimensionError as exc:
        raise UsageError(str(exc)) from exc


def load_map(source: str) -> tuple[str, zexpr.PolyMapSpec]:
    if source.startswith("gallery:"):
        name = source.split(":", 1)[1]
        try:
            return source, experiments.gallery_map(name)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
    try:
        with open(source, "r", encoding="utf-8") as handle:
            return source, zexpr.PolyMapSpec.from_json(handle.read())
    except FileNotFoundError as exc:
        raise UsageError(f"map file not found: {source}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"could not load map from {source}: {exc}") from exc


def load_scalar(source: str) -> zexpr.ScalarSpec:
    try:
        with open(source, "r", encoding="utf-8") as handle:
            return zexpr.ScalarSpec.from_json(handle.read())
    except FileNotFoundError as exc:
        raise UsageError(f"scalar file not found: {source}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"could not load scalar from {source}: {exc}") from exc


def _matrix_pairs(m) -> list:
    return [cvec_to_pairs(row) for row in np.asarray(m, dtype=complex)]


def _emit(payload: dict, lines: list[str], output: str) -> None:
    if output == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _ensure_dim(vec: np.ndarray, n: int, what: str) -> np.ndarray:
    if vec.size != n:
        raise UsageError(f"{what} must have {n} components, got {vec.size}")
    return vec


# ---------------------------------------------------------------------------
# Command handlers: each returns (exit_code, payload, text_lines).

def cmd_gallery(args):
    entries = [{
        "name": e.name,
        "components": [zexpr.to_string(c) for c in e.spec.components],
        "expected_class": e.expected_class,
        "notes": e.notes,
    } for e in experiments.gallery()]
    lines = [f"{e['name']:18s} {e['expected_class']:22s} {'; '.join(e['components'])}"
             for e in entries]
    return EXIT_PASS, {"entries": entries}, lines


def cmd_jet(args):
    name, spec = load_map(args.map)
    at = _ensure_dim(parse_cvec_flag(args.at), spec.n, "--at")
    mj = zexpr.analytic_map_jet(spec, at)
    payload = {
        "map": name,
        "at": cvec_to_pairs(at),
        "value": cvec_to_pairs(mj.value),
        "jhol": _matrix_pairs(mj.jhol),
        "janti": _matrix_pairs(mj.janti),
        "mixed": [_matrix_pairs(sheet) for sheet in mj.mixed],
    }
    lines = [f"value: {mj.value.tolist()}",
             f"jhol:  {mj.jhol.tolist()}",
             f"janti: {mj.janti.tolist()}",
             f"mixed: {mj.mixed.tolist()}"]
    if args.scalar:
        sj = zexpr.analytic_scalar_jet(load_scalar(args.scalar), at)
        payload["scalar"] = {
            "value": sj.value,
            "dz": cvec_to_pairs(sj.dz),
            "hzz": _matrix_pairs(sj.hzz),
            "hzzbar": _matrix_pairs(sj.hzzbar),
        }
        lines.append(f"scalar value: {sj.value}, dz: {sj.dz.tolist()}")
    return EXIT_PASS, payload, lines


def cmd_check_map(args):
    name, spec = load_map(args.map)
    at = _ensure_dim(parse_cvec_flag(args.at), spec.n, "--at")
    zeta = None
    if args.zeta:
        zeta = _ensure_dim(parse_cvec_flag(args.zeta), spec.n, "--zeta")
    mj = zexpr.analytic_map_jet(spec, at)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    res = pdecheck.point_residuals(mj, at, zeta_samples=args.samples,
                                   pair_samples=max(4, args.samples // 8),
                                   rng=rng, zeta=zeta)
    linearized = pdecheck.linearized_trace_residual(
        mj, pair_samples=max(4, args.samples // 8),
        rng=np.random.default_rng(np.random.SeedSequence(args.seed + 1)))
    # the Laplacian-normalisation variant is reported, never gated on
    trace_lap = pdecheck.trace_formula_residual(
        mj, max(4, args.samples // 8),
        np.random.default_rng(np.random.SeedSequence(args.seed + 2)), kappa=4.0)
    ok = res.span_iii <= args.tol and res.trace_ii <= args.tol
    payload = {
        "map": name,
        "at": cvec_to_pairs(at),
        "span_iii": res.span_iii,
        "trace_ii": res.trace_ii,
        "trace_ii_laplacian_form": trace_lap,
        "linearized": linearized,
        "holo_defect": res.holo,
        "antiholo_defect": res.antiholo,
        "plurih_defect": res.plurih,
        "consistent": res.consistent,
        "pass": bool(ok),
    }
    lines = [f"span residual      {res.span_iii:.3e}",
             f"trace residual     {res.trace_ii:.3e}",
             f"linearized residual {linearized:.3e}",
             f"holomorphic defect {res.holo:.3e}",
             f"antiholomorphic defect {res.antiholo:.3e}",
             f"mixed-Hessian norm {res.plurih:.3e}",
             f"verdict: {'pass' if ok else 'violation'}"]
    return (EXIT_PASS if ok else EXIT_VIOLATION), payload, lines


def cmd_classify(args):
    name, spec = load_map(args.map)
    cls = pdecheck.classify_map(spec, region_radius=args.region_radius,
                                samples=args.samples, seed=args.seed,
                                tol=args.tol)
    payload = {
        "map": name,
        "label": cls.label,
        "worst": {k: float(v) for k, v in cls.worst.items()},
        "skipped": cls.skipped,
        "n_points": cls.n_points,
    }
    lines = [f"label: {cls.label}"]
    lines.extend(f"  {k}: {v:.3e}" for k, v in cls.worst.items())
    code = EXIT_VIOLATION if cls.label == "generic" else EXIT_PASS
    return code, payload, lines


def cmd_levi(args):
    name, spec = load_map(args.map)
    at = _ensure_dim(parse_cvec_flag(args.at), spec.n, "--at")
    zeta = _ensure_dim(parse_cvec_flag(args.zeta), spec.n, "--zeta")
    mj = zexpr.analytic_map_jet(spec, at)
    if args.scalar:
        sj = zexpr.analytic_scalar_jet(load_scalar(args.scalar), mj.value)
        scalar_desc = args.scalar
    else:
        lin = np.zeros(spec.n, dtype=complex)
        lin[0] = 1.0
        quad = hypersurface.strictly_pseudoconvex_quadric(
            spec.n, args.eps, lin=lin, center=mj.value)
        sj = quad.jet(mj.value)
        scalar_desc = f"model quadric (eps={args.eps}, lin=e1) at the image point"
    dec = pdecheck.pushforward_levi(sj, mj, zeta)
    payload = {
        "map": name,
        "scalar": scalar_desc,
        "at": cvec_to_pairs(at),
        "zeta": cvec_to_pairs(zeta),
        "l0": dec.l0, "l1": dec.l1, "total": dec.total,
        "direct": dec.direct, "rel_gap": dec.rel_gap,
    }
    lines = [f"l0 = {dec.l0:.12g}", f"l1 = {dec.l1:.12g}",
             f"total = {dec.total:.12g}", f"direct = {dec.direct:.12g}",
             f"rel_gap = {dec.rel_gap:.3e}"]
    return EXIT_PASS, payload, lines


def cmd_verify(args):
    name, spec = load_map(args.map)
    config = experiments.VerifyConfig(region_radius=args.region_radius,
                                      tol_span=args.tol, tol_trace=args.tol)
    report = experiments.verify_map(spec, name=name, budget=args.samples,
                                    seed=args.seed, config=config)
    payload = report.to_dict()
    lines = [
        f"map: {name}",
        f"samples: {report.n_samples} (skipped {report.skipped})",
        f"condition_i   pass={report.condition_i['pass']} min_levi={report.condition_i['min_levi']:.6g}",
        f"condition_ii  pass={report.condition_ii['pass']} max_residual={report.condition_ii['max_residual']:.3e}",
        f"condition_iii pass={report.condition_iii['pass']} max_residual={report.condition_iii['max_residual']:.3e}",
        f"certificates: {len(report.certificates)}",
        f"verdicts agree: {report.verdicts_agree}",
    ]
    if report.inconclusive:
        lines.append("inconclusive: no usable samples")
    return (EXIT_PASS if report.all_pass else EXIT_VIOLATION), payload, lines


def cmd_counterexample(args):
    name, spec = load_map(args.map)
    at = _ensure_dim(parse_cvec_flag(args.at), spec.n, "--at")
    zeta = _ensure_dim(parse_cvec_flag(args.zeta), spec.n, "--zeta")
    try:
        cert = experiments.find_counterexample(spec, at, zeta)
    except ValueError as exc:
        payload = {"map": name, "found": False, "reason": str(exc)}
        return EXIT_PASS, payload, [f"no counterexample: {exc}"]
    experiments.validate_certificate(cert)
    payload = {"map": name, "found": True, "certificate": cert.to_dict()}
    lines = [f"counterexample found: levi_value = {cert.levi_value:.6g} "
             f"at t = {cert.t_star:.6g}",
             f"margins: {cert.margins}"]
    return EXIT_VIOLATION, payload, lines


def cmd_corollary32(args):
    name, spec = load_map(args.map)
    at = parse_cvec_flag(args.at) if args.at else None
    if at is not None:
        at = _ensure_dim(at, spec.n, "--at")
    report = experiments.pseudoconvexity_preservation_check(
        spec, at, search_budget=args.samples, seed=args.seed)
    payload = {"map": name, **report.to_dict()}
    lines = [f"mode: {report.mode}",
             f"samples: {report.n_samples}, violations: {report.violations}",
             f"min levi: {report.min_levi:.6g}"]
    if report.witness is not None:
        lines.append(f"witness: {report.witness}")
    found = report.witness_found or report.violations > 0
    return (EXIT_VIOLATION if found else EXIT_PASS), payload, lines


def cmd_lemma33_test(args):
    result = experiments.span_trace_self_test(samples=args.samples,
                                              seed=args.seed, n=args.dim)
    payload = result.to_dict()
    lines = [
        f"built forms: worst span residual {result.worst_built_span_residual:.3e}, "
        f"worst roundtrip {result.worst_roundtrip_error:.3e}",
        f"generic tensors: {result.generic_rejected} rejected, "
        f"{result.generic_reconstructed} reconstructed of {result.n_generic}",
        f"passed: {result.passed}",
    ]
    return (EXIT_PASS if result.passed else EXIT_VIOLATION), payload, lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levi-lab",
        description="Second-order jet, Levi-form and PDE-residual checks for "
                    "maps between convex and pseudoconvex hypersurfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, with_map=True):
        if with_map:
            p.add_argument("--map", required=True,
                           help="map source: a JSON file or gallery:NAME")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--region-radius", dest="region_radius", type=float, default=1.0)
        p.add_argument("--output", choices=("text", "json"), default="text")

    p = sub.add_parser("gallery", help="list the curated test maps")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_gallery)

    p = sub.add_parser("jet", help="print the second-order jet of a map at a point")
    add_common(p)
    p.add_argument("--at", required=True, help="comma-separated complex point")
    p.add_argument("--scalar", help="optional scalar JSON file to differentiate too")
    p.set_defaults(handler=cmd_jet)

    p = sub.add_parser("check-map", help="span/trace residuals of a map at a point")
    add_common(p)
    p.add_argument("--at", required=True)
    p.add_argument("--zeta", help="optional witness vector")
    p.set_defaults(handler=cmd_check_map)

    p = sub.add_parser("classify", help="label a map on a sampled ball")
    add_common(p)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("levi", help="pushforward Levi decomposition at a point")
    add_common(p)
    p.add_argument("--at", required=True)
    p.add_argument("--zeta", required=True)
    p.add_argument("--eps", type=float, default=1.0,
                   help="model-quadric Levi eigenvalue when no --scalar is given")
    p.add_argument("--scalar", help="scalar JSON file for the image-space function")
    p.set_defaults(handler=cmd_levi)

    p = sub.add_parser("verify", help="sampled three-way equivalence check")
    add_common(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("counterexample",
                       help="construct a convex quadric whose pullback fails "
                            "pseudoconvexity at the witness")
    add_common(p)
    p.add_argument("--at", required=True)
    p.add_argument("--zeta", required=True)
    p.set_defaults(handler=cmd_counterexample)

    p = sub.add_parser("corollary32",
                       help="model-quadric pseudoconvexity preservation search")
    add_common(p)
    p.add_argument("--at", help="base point (defaults to the origin)")
    p.set_defaults(handler=cmd_corollary32)

    p = sub.add_parser("lemma33-test",
                       help="randomized self-test of the span/trace equivalence")
    add_common(p, with_map=False)
    p.add_argument("--dim", type=int, default=2)
    p.set_defaults(handler=cmd_lemma33_test)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    output = getattr(args, "output", "text")
    try:
        code, payload, lines = args.handler(args)
        _emit(payload, lines, output)
        return code
    except (UsageError, ParseError, DimensionError, ValueError) as exc:
        _report_error("usage", exc, output)
        return EXIT_USAGE
    except DegeneracyError as exc:
        _report_error("degeneracy", exc, output)
        return EXIT_DEGENERATE
    except LeviLabError as exc:
        _report_error("internal", exc, output)
        return EXIT_DEGENERATE


def _report_error(kind: str, exc: Exception, output: str) -> None:
    print(f"error: {exc}", file=sys.stderr)
    if output == "json":
        print(json.dumps({"error": {"type": kind, "message": str(exc)}},
                         sort_keys=True, indent=2))


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
