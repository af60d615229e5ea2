"""levilab: second-order Wirtinger jets, Levi forms and numerical checks
for maps sending convex hypersurfaces to pseudoconvex ones."""

from .errors import (
    DegeneracyError,
    DimensionError,
    InvariantViolation,
    LeviLabError,
    ParseError,
)
from .forms import (
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
from .hypersurface import (
    DefiningFunction,
    Quadric,
    TangentFrame,
    complex_tangent_basis,
    deform_family,
    is_strictly_convex_at,
    is_strictly_pseudoconvex_at,
    jet_at,
    quadric_centered,
    random_convex_quadric,
    strictly_pseudoconvex_quadric,
    surface_sample,
)
from .pdecheck import (
    Classification,
    ConditionResiduals,
    LeviDecomposition,
    classify_map,
    linearized_trace_residual,
    point_residuals,
    pushforward_levi,
    span_condition_residual,
    trace_formula_residual,
)
from .experiments import (
    CounterexampleCertificate,
    GalleryEntry,
    VerificationReport,
    VerifyConfig,
    find_counterexample,
    gallery,
    gallery_map,
    pseudoconvexity_preservation_check,
    span_trace_self_test,
    stability_check,
    validate_certificate,
    verify_map,
)
from .wirtinger import (
    MapJet2,
    RealJet2,
    ScalarJet2,
    StepPolicy,
    apply_differential,
    as_cvec,
    complex_to_real_scalar_jet,
    eval_real_hessian,
    fd_map_jet,
    fd_real_scalar_jet,
    fd_scalar_jet,
    mixed_apply,
    nu_mu,
    real_hessian_form,
    real_to_complex_scalar_jet,
    trace_mixed,
)
from .zexpr import (
    PolyMapSpec,
    ScalarSpec,
    analytic_map_jet,
    analytic_scalar_jet,
    evaluate,
    parse,
    to_string,
)

__version__ = "0.1.0"
