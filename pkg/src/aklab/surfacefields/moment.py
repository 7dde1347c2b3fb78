"""Moment-map layer: the W-system, the 2-form moment map and its primitive,
the Wang bridge, integration by parts, Weil-Petersson pairings, the circle
Hamiltonian, and the principal symbol of the linearized system.

All scalar profile inputs (f, f') are evaluated node-wise at
t = |A|_J^2 / 8; cubic-differential norms enter as ||tau||^2 = 2 t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scalarfuncs import ConformalProfile, eval_f, eval_f_prime, eval_F
from .grid import GridError, TorusGrid
from .fields import (
    FieldState,
    TangentFieldState,
    covd_pick,
    cplx_I_field,
    d_nabla_pick,
    div_endo,
    endo_inner,
    gauss_curvature,
    is_symplectic,
    laplace_beltrami,
    lie_derivative,
    metric_from_J,
    normalized_J_step,
    pick_inner,
)

__all__ = [
    "profile_weights",
    "ghat_field",
    "omegahat_field",
    "metric_pairing",
    "omega_pairing",
    "mu_field",
    "mu_tilde_field",
    "wang_bridge",
    "dmu_primitive",
    "dmu_fd_residual",
    "integration_by_parts",
    "WSystemResiduals",
    "w_system",
    "v_membership",
    "linearized_codazzi",
    "wp_pairings",
    "fuchsian_restriction_gap",
    "field_hamiltonian",
    "circle_act_field",
    "symbol_matrix",
    "symbol_det",
    "symbol_det_reference",
    "field_curve",
]


def profile_weights(profile: ConformalProfile, fs: FieldState):
    """(t, f(t), f'(t)) node-wise at t = |A|^2_J / 8."""
    t = fs.fiber_norm_sq()
    return t, eval_f(profile, t), eval_f_prime(profile, t)


# ---------------------------------------------------------------------------
# pointwise metric / 2-form on tangent fields
# ---------------------------------------------------------------------------

def ghat_field(profile, fs, t1: TangentFieldState, t2: TangentFieldState):
    """Node-wise value of the indefinite metric on two tangent fields."""
    _, f, fp = profile_weights(profile, fs)
    return (
        (1.0 - f) * endo_inner(t1.Jdot, t2.Jdot)
        + fp / 6.0 * pick_inner(fs.ginv, t1.Adot0, t2.Adot0)
        - fp / 12.0 * pick_inner(fs.ginv, t1.Adot_tr, t2.Adot_tr)
    )


def omegahat_field(profile, fs, t1, t2):
    """Node-wise 2-form value, via ghat(., I.)."""
    return ghat_field(profile, fs, t1, cplx_I_field(fs, t2))


def metric_pairing(profile, fs, t1, t2):
    """Integrated metric over the torus."""
    return fs.grid.integrate(ghat_field(profile, fs, t1, t2))


def omega_pairing(profile, fs, t1, t2):
    """Integrated symplectic pairing over the torus."""
    return fs.grid.integrate(omegahat_field(profile, fs, t1, t2))


# ---------------------------------------------------------------------------
# moment map
# ---------------------------------------------------------------------------

def _oneform_compose_endo(alpha, B):
    """(alpha o B)_i = alpha_a B^a_i for a 1-form and an endomorphism field."""
    return np.einsum("...a,...ai->...i", alpha, B)


def _df_circ_J(grid, scalar, J):
    dpsi = np.stack([grid.deriv(scalar, 0), grid.deriv(scalar, 1)], axis=-1)
    return _oneform_compose_endo(dpsi, J)


def mu_field(profile, fs: FieldState):
    """Density (w.r.t. rho) of the 2-form moment map.

    -(f'/6) <nabla_1 A, (nabla_2 A) J>  + 2 K (f - 1)  + d(df o J)/rho,
    the last term being the real form of 2i dbar d f.
    """
    grid = fs.grid
    t, f, fp = profile_weights(profile, fs)
    nA = covd_pick(grid, fs.gamma, fs.A)
    n2AJ = np.einsum("...alm,...mk->...alk", nA[..., 1, :, :, :], fs.J)
    term1 = -fp / 6.0 * pick_inner(fs.ginv, nA[..., 0, :, :, :], n2AJ)
    term2 = 2.0 * fs.curvature * (f - 1.0)
    term3 = grid.d_oneform(_df_circ_J(grid, f, fs.J))
    return term1 + term2 + term3


def mu_tilde_field(profile, fs: FieldState):
    """Moment map shifted into exact forms: mu + 2c."""
    return mu_field(profile, fs) + 2.0 * profile.c


def wang_bridge(profile, fs: FieldState):
    """Both sides of the bridge identity tying the moment map to the
    curvature of the Blaschke-type conformal metric.

    Returns (lhs, rhs) densities: lhs = mu_tilde, rhs = -2 e^F (K_h - ||tau||_h^2 + 1)
    with h = e^F g_J; requires the cubic field to be holomorphic where the
    identity is asserted.
    """
    grid = fs.grid
    t = fs.fiber_norm_sq()
    F = eval_F(profile, t)
    expF = np.exp(F)
    K_h = (fs.curvature - 0.5 * laplace_beltrami(grid, fs.g, F)) / expF
    tau_h = 2.0 * t * np.exp(-3.0 * F)
    rhs = -2.0 * expF * (K_h - tau_h + 1.0)
    return mu_tilde_field(profile, fs), rhs


# ---------------------------------------------------------------------------
# primitive of d mu and the W-system
# ---------------------------------------------------------------------------

def _beta_form(fs, nA, Adot0):
    """beta(e_i) = <(nabla_i A) J, Adot0>_g."""
    nAJ = np.einsum("...ialm,...mk->...ialk", nA, fs.J)
    return np.einsum("...ab,...ialm,...bml->...i", fs.ginv, nAJ, Adot0)


def _fdot_scalars(profile, fs, tfs):
    """(f, f', fdot, fdot0) fields for a tangent."""
    _, f, fp = profile_weights(profile, fs)
    fdot = fp / 4.0 * pick_inner(fs.ginv, fs.A, tfs.Adot0)
    Adot0J = np.einsum("...alm,...mk->...alk", tfs.Adot0, fs.J)
    fdot0 = -fp / 4.0 * pick_inner(fs.ginv, fs.A, Adot0J)
    return f, fp, fdot, fdot0


def dmu_primitive(profile, fs: FieldState, tfs: TangentFieldState):
    """1-form primitive of the first variation of the moment map:

    (f - 1) div_g Jdot + df o Jdot + d(fdot) o J - (f'/6) beta.
    """
    grid = fs.grid
    f, fp, fdot, _ = _fdot_scalars(profile, fs, tfs)
    nA = covd_pick(grid, fs.gamma, fs.A)
    beta = _beta_form(fs, nA, tfs.Adot0)
    df = np.stack([grid.deriv(f, 0), grid.deriv(f, 1)], axis=-1)
    return (
        (f - 1.0)[..., None] * div_endo(fs, tfs.Jdot)
        + _oneform_compose_endo(df, tfs.Jdot)
        + _df_circ_J(grid, fdot, fs.J)
        - fp[..., None] / 6.0 * beta
    )


def field_curve(fs: FieldState, tfs: TangentFieldState, eps: float) -> FieldState:
    """State at parameter eps of the curve through fs with velocity tfs.

    J moves on normalized segments (exactly complex structures); the
    (0,3)-tensor C moves linearly, matching the tangent convention.
    """
    J_eps = normalized_J_step(fs.J, tfs.Jdot, eps)
    C = np.einsum("...alj,...lk->...ajk", fs.A, fs.g)
    Cdot = np.einsum("...alj,...lk->...ajk", tfs.Adot, fs.g)
    g_eps_inv = np.linalg.inv(metric_from_J(J_eps))
    A_eps = np.einsum("...lk,...ajk->...alj", g_eps_inv, C + eps * Cdot)
    return FieldState(grid=fs.grid, J=J_eps, A=A_eps)


def dmu_fd_residual(profile, fs, tfs, eps=1e-4):
    """Sup distance between the centered difference of mu_tilde along the
    tangent curve and d(primitive)/rho."""
    mu_p = mu_tilde_field(profile, field_curve(fs, tfs, +eps))
    mu_m = mu_tilde_field(profile, field_curve(fs, tfs, -eps))
    lhs = (mu_p - mu_m) / (2.0 * eps)
    rhs = fs.grid.d_oneform(dmu_primitive(profile, fs, tfs))
    return float(np.max(np.abs(lhs - rhs)))


def integration_by_parts(profile, fs, tfs, V, tol=1e-8):
    """Both sides of the symplectic-orbit pairing identity.

    lhs = omega_f((L_V J, g^-1 L_V C), (Jdot, Adot)) by grid quadrature,
    rhs = -integral( primitive ^ iota_V rho );
    V must be symplectic and fs Codazzi-satisfying.
    """
    if not is_symplectic(fs.grid, V, tol):
        raise GridError("V is not symplectic")
    lie = lie_derivative(fs, V)
    lhs = omega_pairing(profile, fs, lie, tfs)
    iota = np.stack([-V[..., 1], V[..., 0]], axis=-1)
    rhs = -fs.grid.wedge_integral(dmu_primitive(profile, fs, tfs), iota)
    return lhs, rhs


@dataclass
class WSystemResiduals:
    """Left-hand sides of the three W-system equations plus the two 1-forms."""

    E1: np.ndarray
    E2: np.ndarray
    E3: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray

    def sup(self):
        return (
            float(np.max(np.abs(self.E1))),
            float(np.max(np.abs(self.E2))),
            float(np.max(np.abs(self.E3))),
        )

    def masked_sup(self, mask):
        return (
            float(np.max(np.abs(self.E1[mask]))),
            float(np.max(np.abs(self.E2[mask]))),
            float(np.max(np.abs(self.E3[mask, :, :]))),
        )


def w_system(profile, fs: FieldState, tfs: TangentFieldState) -> WSystemResiduals:
    """Evaluate the three defining equations of the preferred subspace.

    alpha1 = div((f-1) Jdot) + d(fdot) o J - (f'/6) beta
    alpha2 = div((f-1) Jdot) o J + d(fdot0) o J - (f'/6) beta o J
    E1 = d alpha1 / rho, E2 = d alpha2 / rho,
    E3 = d^nabla Adot0 - J (div Jdot ^ A).
    """
    grid = fs.grid
    f, fp, fdot, fdot0 = _fdot_scalars(profile, fs, tfs)
    nA = covd_pick(grid, fs.gamma, fs.A)
    beta = _beta_form(fs, nA, tfs.Adot0)
    div_fJd = div_endo(fs, (f - 1.0)[..., None, None] * tfs.Jdot)
    alpha1 = div_fJd + _df_circ_J(grid, fdot, fs.J) - fp[..., None] / 6.0 * beta
    alpha2 = (
        _oneform_compose_endo(div_fJd, fs.J)
        + _df_circ_J(grid, fdot0, fs.J)
        - fp[..., None] / 6.0 * _oneform_compose_endo(beta, fs.J)
    )
    E3 = linearized_codazzi(fs, tfs)
    return WSystemResiduals(
        E1=grid.d_oneform(alpha1),
        E2=grid.d_oneform(alpha2),
        E3=E3,
        alpha1=alpha1,
        alpha2=alpha2,
    )


def linearized_codazzi(fs: FieldState, tfs: TangentFieldState):
    """d^nabla Adot0 (e1,e2) - J (div Jdot ^ A)(e1,e2), endomorphism field."""
    divJd = div_endo(fs, tfs.Jdot)
    wedge = (
        divJd[..., 0, None, None] * fs.A[..., 1, :, :]
        - divJd[..., 1, None, None] * fs.A[..., 0, :, :]
    )
    return d_nabla_pick(fs, tfs.Adot0) - np.einsum("...ij,...jk->...ik", fs.J, wedge)


def v_membership(profile, fs, tfs, tol=1e-5):
    """Exactness of alpha1 + i alpha2 plus the linearized Codazzi equation.

    Returns (is_member, diagnostics); the harmonic and coexact parts of both
    1-forms and the Codazzi sup-norm must all sit below tol.
    """
    res = w_system(profile, fs, tfs)
    diag = {}
    for name, alpha in (("alpha1", res.alpha1), ("alpha2", res.alpha2)):
        _, coexact, harmonic = fs.grid.hodge_decompose(alpha)
        diag[name + "_harmonic"] = float(np.max(np.abs(harmonic)))
        diag[name + "_coexact"] = float(np.max(np.abs(coexact)))
    diag["codazzi"] = float(np.max(np.abs(res.E3)))
    return all(v <= tol for v in diag.values()), diag


# ---------------------------------------------------------------------------
# Weil-Petersson pairings, circle action, Hamiltonian
# ---------------------------------------------------------------------------

def wp_pairings(grid: TorusGrid, Jdot1, Jdot2, dV=None):
    """(omega_wp, g_wp) = (-1/8 int tr(J1 J J2) dV, 1/8 int tr(J1 J2) dV).

    J here is the standard structure of the reference hyperbolic metric whose
    area form dV defaults to rho.
    """
    from .fields import J0

    weight = np.ones(Jdot1.shape[:2]) if dV is None else dV
    om = -0.125 * grid.integrate(
        weight * np.einsum("...ij,jk,...ki->...", Jdot1, J0, Jdot2)
    )
    gw = 0.125 * grid.integrate(weight * np.einsum("...ij,...ji->...", Jdot1, Jdot2))
    return om, gw


def fuchsian_restriction_gap(profile, fs: FieldState, Jdot1, Jdot2):
    """|integrated metric - 4 G_WP| for horizontal tangents at a zero fiber."""
    if np.max(np.abs(fs.A)) > 1e-14:
        raise GridError("restriction check requires a vanishing fiber field")
    t1 = TangentFieldState(Jdot=Jdot1, Adot=np.zeros_like(fs.A))
    t2 = TangentFieldState(Jdot=Jdot2, Adot=np.zeros_like(fs.A))
    lhs = metric_pairing(profile, fs, t1, t2)
    _, gwp = wp_pairings(fs.grid, Jdot1, Jdot2)
    return abs(lhs - 4.0 * gwp)


def field_hamiltonian(profile, fs: FieldState):
    """(2/3) integral of f(||A||_0^2) over the torus."""
    t = fs.fiber_norm_sq()
    return 2.0 / 3.0 * fs.grid.integrate(eval_f(profile, t))


def circle_act_field(theta: float, fs: FieldState) -> FieldState:
    """Node-wise circle action (J, A) -> (J, cos th A - sin th A J)."""
    AJ = np.einsum("...aij,...jk->...aik", fs.A, fs.J)
    return FieldState(
        grid=fs.grid, J=fs.J, A=np.cos(theta) * fs.A - np.sin(theta) * AJ
    )


def circle_generator_field(fs: FieldState) -> TangentFieldState:
    """Generator (0, -A J) of the circle action on fields."""
    AJ = np.einsum("...aij,...jk->...aik", fs.A, fs.J)
    return TangentFieldState(Jdot=np.zeros_like(fs.J), Adot=-AJ)


# ---------------------------------------------------------------------------
# principal symbol of the linearized system
# ---------------------------------------------------------------------------

def symbol_matrix(profile: ConformalProfile, w: complex, xi) -> np.ndarray:
    """4x4 principal symbol at normalized point data (fiber w), covector xi.

    Rows: the two second-order scalar equations, then the two independent
    components of the first-order tensor equation; columns correspond to the
    unknowns (xdot, -ydot, udot, vdot).  Assembled from re-deriving the
    operators at the normalized point; the acceptance gate is the Schur
    determinant identity below.
    """
    xi1, xi2 = float(xi[0]), float(xi[1])
    u, v = np.real(w), np.imag(w)
    wsq = u * u + v * v
    t = wsq / 2.0
    f = eval_f(profile, t)
    fp = eval_f_prime(profile, t)
    n2 = xi1 * xi1 + xi2 * xi2
    theta = np.array(
        [
            [-2.0 * (f - 1.0) * xi1 * xi2,
             (f - 1.0) * (xi1**2 - xi2**2) + 1.5 * wsq * fp * n2],
            [(f - 1.0) * (xi2**2 - xi1**2) - 1.5 * wsq * fp * n2,
             -2.0 * (f - 1.0) * xi1 * xi2],
        ]
    )
    upper_right = np.array([[-fp * u * n2, -fp * v * n2],
                            [-fp * v * n2, fp * u * n2]])
    lower_left = np.array([[-3.0 * u * xi1, -3.0 * v * xi1],
                           [-3.0 * v * xi1, 3.0 * u * xi1]])
    lower_right = np.array([[-xi2, xi1], [-xi1, -xi2]])
    return np.block([[theta, upper_right], [lower_left, lower_right]])


def symbol_det(profile, w, xi):
    """det via the Schur complement |xi|^2 det(Theta - Xi Delta^-1 Gamma)."""
    xi = np.asarray(xi, dtype=float)
    n2 = float(xi @ xi)
    if n2 == 0.0:
        return 0.0
    S = symbol_matrix(profile, w, xi)
    theta, upper = S[:2, :2], S[:2, 2:]
    lower, delta = S[2:, :2], S[2:, 2:]
    schur = theta - upper @ np.linalg.inv(delta) @ lower
    return n2 * float(np.linalg.det(schur))


def symbol_det_reference(profile, w, xi):
    """Closed form |xi|^6 (1 - f + (3/2) f' |w|^2)^2 of the determinant."""
    xi = np.asarray(xi, dtype=float)
    n2 = float(xi @ xi)
    t = abs(w) ** 2 / 2.0
    f = eval_f(profile, t)
    fp = eval_f_prime(profile, t)
    return n2**3 * (1.0 - f + 1.5 * fp * abs(w) ** 2) ** 2
