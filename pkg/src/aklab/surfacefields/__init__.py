"""Discretized tensor calculus and moment maps on the flat torus."""

from .grid import GridError, TorusGrid
from .fields import (
    FieldState,
    TangentFieldState,
    christoffel_from_J,
    codazzi_residual,
    complex_structure_lie_residual,
    conjugated_state,
    covd_endo,
    covd_pick,
    cplx_I_field,
    curvature_variation_residual,
    d_nabla_pick,
    div_endo,
    endo_inner,
    field_state_from_Q,
    flow_transport_derivative,
    frame_field,
    gauss_curvature,
    hamiltonian_vector_field,
    holomorphic_patch_Q,
    is_symplectic,
    laplace_beltrami,
    lie_derivative,
    lie_tangent,
    metric_from_J,
    normalized_J_step,
    patch_interior_mask,
    patch_window,
    pick_from_Q,
    pick_inner,
    pick_norm_sq,
    random_tangent,
    titeica_state,
    trace_lie_residuals,
)
from .moment import (
    WSystemResiduals,
    circle_act_field,
    circle_generator_field,
    dmu_fd_residual,
    dmu_primitive,
    field_curve,
    field_hamiltonian,
    fuchsian_restriction_gap,
    ghat_field,
    integration_by_parts,
    linearized_codazzi,
    metric_pairing,
    mu_field,
    mu_tilde_field,
    omega_pairing,
    omegahat_field,
    profile_weights,
    symbol_det,
    symbol_det_reference,
    symbol_matrix,
    v_membership,
    w_system,
    wang_bridge,
    wp_pairings,
)

__all__ = [name for name in dir() if not name.startswith("_")]
