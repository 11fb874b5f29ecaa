"""Numerical laboratory for intersection-type curve maps and their limits."""

from .jets import AnalyticFn, DegenerateSystem, Jet, det_jet, eval_jet, solve_linear_jets, trig_poly
from .configs import (
    ChiConfig,
    SymTable,
    alpha11_evenly_spaced,
    assemble_M0_c0,
    dual_dented_chi,
    dual_dented_shift,
    evenly_spaced_chi,
    hyperplane_centralization_test,
    shift_chi,
    short_diagonal_chi,
    solve_alpha_diag,
    sym_table,
)
from .curves import (
    CurveSpec,
    DegenerateLift,
    FrameJet,
    IntegrationFailure,
    gamma_jet,
    normalized_lift,
    random_curve_spec,
    wronskian,
    zero_curve_spec,
)
from .chimap import (
    DegenerateIntersection,
    SubspaceSpan,
    build_spans,
    chi_map_point,
    coplanarity_residual,
    intersect_spans,
)
from .discretize import (
    DiscreteCoords,
    LimitTable,
    A_coords,
    discrete_coords,
    limit_diagnostics,
    tilde_a,
    tilde_from_A,
)
from .fitting import fit_poly_coeffs, fit_poly_full, geometric_ladder, loglog_slope
from .kdvops import (
    PseudoDiffOp,
    kdv_rhs,
    l_operator,
    psdo_mul,
    psdo_pow,
    psdo_root,
    q_m,
)
from .expansion import (
    EpsLadder,
    ExpansionReport,
    alpha_constancy_check,
    extract_alphas,
    kdv_rhs_check,
    verify_G2_structure,
)
from .lax import (
    LaxReport,
    d_eps,
    d_eps_inv,
    frame_drift_matrix,
    l_tilde,
    lax_limit_diagnostics,
    p_tilde,
    u_matrix,
    v_matrix,
    v_matrix_jets,
)
from .realize import (
    Realization34Report,
    Search34Result,
    check_34,
    dof_lower_bound,
    mari_beffa_family,
    r_poly_roots,
    search_34,
)

__all__ = [
    "A_coords",
    "alpha11_evenly_spaced",
    "alpha_constancy_check",
    "AnalyticFn",
    "assemble_M0_c0",
    "build_spans",
    "check_34",
    "chi_map_point",
    "ChiConfig",
    "coplanarity_residual",
    "CurveSpec",
    "d_eps",
    "d_eps_inv",
    "DegenerateIntersection",
    "DegenerateLift",
    "DegenerateSystem",
    "det_jet",
    "discrete_coords",
    "DiscreteCoords",
    "dof_lower_bound",
    "dual_dented_chi",
    "dual_dented_shift",
    "EpsLadder",
    "eval_jet",
    "evenly_spaced_chi",
    "ExpansionReport",
    "extract_alphas",
    "fit_poly_coeffs",
    "fit_poly_full",
    "frame_drift_matrix",
    "FrameJet",
    "gamma_jet",
    "geometric_ladder",
    "hyperplane_centralization_test",
    "IntegrationFailure",
    "intersect_spans",
    "Jet",
    "kdv_rhs",
    "kdv_rhs_check",
    "l_operator",
    "l_tilde",
    "lax_limit_diagnostics",
    "LaxReport",
    "limit_diagnostics",
    "LimitTable",
    "loglog_slope",
    "mari_beffa_family",
    "normalized_lift",
    "p_tilde",
    "psdo_mul",
    "psdo_pow",
    "psdo_root",
    "PseudoDiffOp",
    "q_m",
    "r_poly_roots",
    "random_curve_spec",
    "Realization34Report",
    "Search34Result",
    "search_34",
    "shift_chi",
    "short_diagonal_chi",
    "solve_alpha_diag",
    "solve_linear_jets",
    "SubspaceSpan",
    "sym_table",
    "SymTable",
    "tilde_a",
    "tilde_from_A",
    "trig_poly",
    "u_matrix",
    "v_matrix",
    "v_matrix_jets",
    "verify_G2_structure",
    "wronskian",
    "zero_curve_spec",
]
