"""Tensor fields on the flat torus: states, connections, and derived operators.

Conventions (all components in the coordinate frame of the torus chart):
  * J field     (n, n, 2, 2)      complex structure per node, det J = 1
  * A field     (n, n, 2, 2, 2)   A[..., a, :, :] = endomorphism A(e_a)
  * 1-forms     (n, n, 2)
  * metric      g = rho(., J.), always unimodular
  * pick inner  <P, Q>_g = g^{ab} tr(P_a Q_b), frame independent

Tangents follow the Adot = g^{-1} Cdot convention of the point model, so the
trace part of Adot is determined by Jdot node-wise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import GridError, TorusGrid

__all__ = [
    "FieldState",
    "TangentFieldState",
    "metric_from_J",
    "christoffel_from_J",
    "covd_endo",
    "covd_pick",
    "div_endo",
    "d_nabla_pick",
    "codazzi_residual",
    "gauss_curvature",
    "laplace_beltrami",
    "lie_derivative",
    "flow_transport_derivative",
    "curvature_variation_residual",
    "trace_lie_residuals",
    "complex_structure_lie_residual",
    "pick_inner",
    "pick_norm_sq",
    "endo_inner",
    "frame_field",
    "field_state_from_Q",
    "titeica_state",
    "patch_window",
    "holomorphic_patch_Q",
    "conjugated_state",
    "random_tangent",
    "lie_tangent",
    "pick_from_Q",
    "hamiltonian_vector_field",
    "is_symplectic",
]

J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
_EDIAG = np.diag([1.0, -1.0])


# ---------------------------------------------------------------------------
# metric, connection, curvature
# ---------------------------------------------------------------------------

def metric_from_J(J):
    """g = rho(., J.) as a field of Gram matrices; unimodular by construction."""
    g = np.empty_like(J)
    g[..., 0, :] = J[..., 1, :]
    g[..., 1, :] = -J[..., 0, :]
    return g


def christoffel_from_J(grid: TorusGrid, J):
    """Levi-Civita symbols Gamma[..., k, i, j] of g = rho(., J.)."""
    g = metric_from_J(J)
    ginv = np.linalg.inv(g)
    # dg[..., i, j, l] = d_i g_jl
    dg = np.stack([grid.deriv(g, 0), grid.deriv(g, 1)], axis=-3)
    sym = dg + np.einsum("...jil->...ijl", dg) - np.einsum("...lij->...ijl", dg)
    return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, sym)


def covd_scalar(grid, psi):
    return np.stack([grid.deriv(psi, 0), grid.deriv(psi, 1)], axis=-1)


def covd_endo(grid, gamma, B):
    """(nabla_i B)^l_m at [..., i, l, m].

    gamma[..., k, i, j] = Gamma^k_ij; the matrix acting at slot i is
    (Gamma_i)^l_m = gamma[..., l, i, m].
    """
    dB = np.stack([grid.deriv(B, 0), grid.deriv(B, 1)], axis=-3)
    gam_i = np.einsum("...lim->...ilm", gamma)
    return (
        dB
        + np.einsum("...ilk,...km->...ilm", gam_i, B)
        - np.einsum("...lk,...ikm->...ilm", B, gam_i)
    )


def covd_pick(grid, gamma, P):
    """(nabla_i P)_a as endomorphisms, at [..., i, a, l, m]."""
    dP = np.stack([grid.deriv(P, 0), grid.deriv(P, 1)], axis=-4)
    gam_i = np.einsum("...lim->...ilm", gamma)
    out = (
        dP
        + np.einsum("...ilk,...akm->...ialm", gam_i, P)
        - np.einsum("...alk,...ikm->...ialm", P, gam_i)
        - np.einsum("...kia,...klm->...ialm", gamma, P)
    )
    return out


def div_endo(fs, B):
    """(div_g B)(e_m) = (nabla_i B)^i_m, a 1-form field."""
    nb = covd_endo(fs.grid, fs.gamma, B)
    return np.einsum("...iim->...m", nb)


def d_nabla_pick(fs, P):
    """(d^nabla P)(e_1, e_2), an endomorphism field (2-form density)."""
    nP = covd_pick(fs.grid, fs.gamma, P)
    return nP[..., 0, 1, :, :] - nP[..., 1, 0, :, :]


def codazzi_residual(fs):
    """Sup norm of the exterior covariant derivative of the pick field."""
    return float(np.max(np.abs(d_nabla_pick(fs, fs.A))))


def gauss_curvature(grid: TorusGrid, g):
    """Gaussian curvature through the Brioschi formula with grid derivatives."""
    E, F, G = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    Ex, Ey = grid.deriv(E, 0), grid.deriv(E, 1)
    Fx, Fy = grid.deriv(F, 0), grid.deriv(F, 1)
    Gx, Gy = grid.deriv(G, 0), grid.deriv(G, 1)
    Eyy = grid.deriv(Ey, 1)
    Gxx = grid.deriv(Gx, 0)
    Fxy = grid.deriv(Fx, 1)
    det = E * G - F**2
    m1 = np.stack(
        [
            np.stack([-0.5 * Eyy + Fxy - 0.5 * Gxx, 0.5 * Ex, Fx - 0.5 * Ey], axis=-1),
            np.stack([Fy - 0.5 * Gx, E, F], axis=-1),
            np.stack([0.5 * Gy, F, G], axis=-1),
        ],
        axis=-2,
    )
    m2 = np.stack(
        [
            np.stack([np.zeros_like(E), 0.5 * Ey, 0.5 * Gx], axis=-1),
            np.stack([0.5 * Ey, E, F], axis=-1),
            np.stack([0.5 * Gx, F, G], axis=-1),
        ],
        axis=-2,
    )
    return (np.linalg.det(m1) - np.linalg.det(m2)) / det**2


def laplace_beltrami(grid: TorusGrid, g, psi):
    """Metric Laplacian (1/sqrt det g) d_i(sqrt det g g^{ij} d_j psi)."""
    ginv = np.linalg.inv(g)
    root = np.sqrt(np.linalg.det(g))
    dpsi = covd_scalar(grid, psi)
    flux = root[..., None] * np.einsum("...ij,...j->...i", ginv, dpsi)
    return (grid.deriv(flux[..., 0], 0) + grid.deriv(flux[..., 1], 1)) / root


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass
class FieldState:
    """Pair of fields (J, A) over a torus grid, with cached derived tensors."""

    grid: TorusGrid
    J: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.J.shape != (n, n, 2, 2) or self.A.shape != (n, n, 2, 2, 2):
            raise GridError("J or A field has the wrong shape")

    @cached_property
    def g(self):
        return metric_from_J(self.J)

    @cached_property
    def ginv(self):
        return np.linalg.inv(self.g)

    @cached_property
    def gamma(self):
        return christoffel_from_J(self.grid, self.J)

    @cached_property
    def curvature(self):
        return gauss_curvature(self.grid, self.g)

    @cached_property
    def frame(self):
        return frame_field(self.g)

    def fiber_norm_sq(self):
        """Node-wise ||A||_0^2 = |A|^2_J / 8."""
        return pick_norm_sq(self.g, self.A) / 8.0

    def validate(self, tol=1e-9):
        J, A, g = self.J, self.A, self.g
        eye = np.eye(2)
        if np.max(np.abs(np.einsum("...ij,...jk->...ik", J, J) + eye)) > tol:
            raise GridError("J^2 != -Id somewhere on the grid")
        if np.min(g[..., 0, 0]) <= 0:
            raise GridError("metric not positive")
        gA = np.einsum("...alj,...lk->...ajk", A, g)  # C components
        if np.max(np.abs(gA - np.swapaxes(gA, -1, -2))) > tol:
            raise GridError("A not g-symmetric")
        tr = np.einsum("...aii->...a", A)
        if np.max(np.abs(tr)) > tol:
            raise GridError("A not trace-free")
        AJ = np.einsum("...aij,...jk->...aik", A, J)
        JA = np.einsum("...ab,...bij->...aij", np.swapaxes(J, -1, -2), A)
        if np.max(np.abs(JA - AJ)) > tol:
            raise GridError("A(J.) != A(.)J")


@dataclass
class TangentFieldState:
    """Tangent fields (Jdot, Adot) at a FieldState, full Adot with trace part."""

    Jdot: np.ndarray
    Adot: np.ndarray

    @cached_property
    def Adot0(self):
        tr = 0.5 * np.einsum("...aii->...a", self.Adot)
        return self.Adot - tr[..., None, None] * np.eye(2)

    @cached_property
    def Adot_tr(self):
        tr = 0.5 * np.einsum("...aii->...a", self.Adot)
        return tr[..., None, None] * np.eye(2) * np.ones_like(self.Adot)

    def validate(self, fs: FieldState, tol=1e-8):
        J, A = fs.J, fs.A
        anti = np.einsum("...ij,...jk->...ik", J, self.Jdot) + np.einsum(
            "...ij,...jk->...ik", self.Jdot, J
        )
        if np.max(np.abs(anti)) > tol:
            raise GridError("Jdot does not anticommute with J")
        want = np.einsum("...ij,...ajk,...ki->...a", J, A, self.Jdot)
        got = np.einsum("...aii->...a", self.Adot)
        if np.max(np.abs(want - got)) > tol:
            raise GridError("trace of Adot(X) != tr(J A(X) Jdot)")


# ---------------------------------------------------------------------------
# inner products and frames
# ---------------------------------------------------------------------------

def endo_inner(B1, B2):
    """Node-wise (1/2) tr(B1 B2)."""
    return 0.5 * np.einsum("...ij,...ji->...", B1, B2)


def pick_inner(ginv, P, Q):
    """Node-wise <P, Q>_g = g^{ab} tr(P_a Q_b)."""
    return np.einsum("...ab,...aij,...bji->...", ginv, P, Q)


def pick_norm_sq(g, P):
    return pick_inner(np.linalg.inv(g), P, P)


def frame_field(g):
    """Oriented g-orthonormal frame per node (columns), unimodular."""
    s = np.sqrt(g[..., 0, 0])
    E = np.zeros_like(g)
    E[..., 0, 0] = 1.0 / s
    E[..., 0, 1] = -g[..., 0, 1] / s
    E[..., 1, 1] = s
    return E


def pick_change_basis_field(P, B):
    """Pick components in the per-node basis with columns B."""
    Binv = np.linalg.inv(B)
    endo = np.einsum("...li,...aij,...jm->...alm", Binv, P, B)
    return np.einsum("...ba,...blm->...alm", B, endo)


# ---------------------------------------------------------------------------
# Lie derivatives and variation formulas
# ---------------------------------------------------------------------------

def lie_derivative(fs: FieldState, X):
    """(L_X J, g^{-1} L_X C) for a vector field X, as a TangentFieldState."""
    grid, gamma = fs.grid, fs.gamma
    dX = np.stack([grid.deriv(X, 0), grid.deriv(X, 1)], axis=-1)  # [..., k, j] = d_j X^k
    # M^k_j = nabla_j X^k = d_j X^k + Gamma^k_jm X^m
    M = dX + np.einsum("...kjm,...m->...kj", gamma, X)
    LJ = np.einsum("...ij,...jk->...ik", fs.J, M) - np.einsum(
        "...ij,...jk->...ik", M, fs.J
    )
    nA = covd_pick(grid, gamma, fs.A)
    nXA = np.einsum("...i,...ialm->...alm", X, nA)
    Mstar = np.einsum("...ik,...lk,...lj->...ij", fs.ginv, M, fs.g)
    LA = (
        nXA
        + np.einsum("...ka,...klm->...alm", M, fs.A)
        + np.einsum("...alk,...km->...alm", fs.A, M)
        + np.einsum("...lk,...akm->...alm", Mstar, fs.A)
    )
    return TangentFieldState(Jdot=LJ, Adot=LA)


def _advect(grid, X_fun, points, eps, steps=8):
    """RK4 flow of the analytic vector field X_fun for time eps, with Jacobian."""
    pos = points.copy()
    jac = np.zeros(points.shape[:-1] + (2, 2))
    jac[..., 0, 0] = jac[..., 1, 1] = 1.0
    h = eps / steps
    for _ in range(steps):
        k1, d1 = X_fun(pos)
        k2, d2 = X_fun(pos + 0.5 * h * k1)
        k3, d3 = X_fun(pos + 0.5 * h * k2)
        k4, d4 = X_fun(pos + h * k3)
        j1 = np.einsum("...ij,...jk->...ik", d1, jac)
        j2 = np.einsum(
            "...ij,...jk->...ik", d2, jac + 0.5 * h * j1
        )
        j3 = np.einsum(
            "...ij,...jk->...ik", d3, jac + 0.5 * h * j2
        )
        j4 = np.einsum("...ij,...jk->...ik", d4, jac + h * j3)
        pos = pos + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        jac = jac + h / 6.0 * (j1 + 2 * j2 + 2 * j3 + j4)
    return pos, jac


def flow_transport_derivative(fs: FieldState, J_fun, A_fun, X_fun, eps=1e-4):
    """Independent oracle for lie_derivative via pullback along the flow.

    J_fun and A_fun evaluate the analytic fields at arbitrary points; X_fun
    returns (X, DX).  Pulls (J, C) back by the time +/- eps flow and central
    differences in eps; the A-part is contracted with the metric at eps = 0.
    """
    grid = fs.grid
    pts = np.stack([grid.x, grid.y], axis=-1)

    def pullback(sign):
        pos, dphi = _advect(grid, X_fun, pts, sign * eps)
        Jp = J_fun(pos)
        Ap = A_fun(pos)
        dphi_inv = np.linalg.inv(dphi)
        Jpull = np.einsum("...ij,...jk,...kl->...il", dphi_inv, Jp, dphi)
        # A transforms in the 1-form slot and by conjugation in the endo slot
        endo = np.einsum("...ij,...ajk,...kl->...ail", dphi_inv, Ap, dphi)
        Apull = np.einsum("...ba,...bil->...ail", dphi, endo)
        Cpull = np.einsum("...alj,...lk->...ajk", Apull, metric_from_J(Jpull))
        return Jpull, Cpull

    Jp, Cp = pullback(+1)
    Jm, Cm = pullback(-1)
    LJ = (Jp - Jm) / (2 * eps)
    LC = (Cp - Cm) / (2 * eps)
    LA = np.einsum("...lk,...ajk->...alj", fs.ginv, LC)
    return TangentFieldState(Jdot=LJ, Adot=LA)


def normalized_J_step(J, Jdot, eps):
    """(J + eps Jdot)/sqrt(1 + eps^2 det Jdot): exact complex structures."""
    det = np.linalg.det(Jdot)
    return (J + eps * Jdot) / np.sqrt(1.0 + eps * eps * det)[..., None, None]


def curvature_variation_residual(fs: FieldState, Jdot, eps=1e-4):
    """Sup residual of dK(Jdot) rho = (1/2) d(div_g Jdot) via central FD."""
    grid = fs.grid
    K_p = gauss_curvature(grid, metric_from_J(normalized_J_step(fs.J, Jdot, +eps)))
    K_m = gauss_curvature(grid, metric_from_J(normalized_J_step(fs.J, Jdot, -eps)))
    lhs = (K_p - K_m) / (2 * eps)
    rhs = 0.5 * grid.d_oneform(div_endo(fs, Jdot))
    return float(np.max(np.abs(lhs - rhs)))


def trace_lie_residuals(fs: FieldState, Jdot, X):
    """Residuals of the trace/Lie-derivative identity, literal and amended.

    literal : (1/2) tr(Jdot J L_X J) - [(div_g Jdot)(X) - div_g(J X)]
    amended : same with div_g(Jdot X) in place of div_g(J X)

    The literal printed form fails already on constant data; both are
    returned so the discrepancy is reported rather than silently fixed.
    """
    lt = lie_derivative(fs, X)
    lhs = 0.5 * np.einsum("...ij,...jk,...ki->...", Jdot, fs.J, lt.Jdot)
    divJd = div_endo(fs, Jdot)
    term1 = np.einsum("...m,...m->...", divJd, X)
    JX = np.einsum("...ij,...j->...i", fs.J, X)
    JdX = np.einsum("...ij,...j->...i", Jdot, X)
    div_vec = lambda V: _divergence_vector(fs, V)
    literal = lhs - (term1 - div_vec(JX))
    amended = lhs - (term1 - div_vec(JdX))
    return float(np.max(np.abs(literal))), float(np.max(np.abs(amended)))


def _divergence_vector(fs, V):
    """div_g V = nabla_i V^i (unimodular metric: plain coordinate divergence)."""
    grid = fs.grid
    base = grid.deriv(V[..., 0], 0) + grid.deriv(V[..., 1], 1)
    return base + np.einsum("...kkm,...m->...", fs.gamma, V)


def cplx_I_field(fs: FieldState, t: TangentFieldState) -> TangentFieldState:
    """Pointwise complex structure (Jdot, Adot) -> (-J Jdot, -Adot J - A Jdot)."""
    J, A = fs.J, fs.A
    return TangentFieldState(
        Jdot=-np.einsum("...ij,...jk->...ik", J, t.Jdot),
        Adot=-np.einsum("...aij,...jk->...aik", t.Adot, J)
        - np.einsum("...aij,...jk->...aik", A, t.Jdot),
    )


def complex_structure_lie_residual(fs: FieldState, X, tol=1e-8):
    """Sup distance between I(L_X J, g^-1 L_X C) and (-L_JX J, -g^-1 L_JX C).

    Requires X symplectic; valid on Codazzi-satisfying states.
    """
    if not is_symplectic(fs.grid, X, tol):
        raise GridError("vector field is not symplectic")
    lt = lie_derivative(fs, X)
    lhs = cplx_I_field(fs, lt)
    JX = np.einsum("...ij,...j->...i", fs.J, X)
    rt = lie_derivative(fs, JX)
    return float(
        max(np.max(np.abs(lhs.Jdot + rt.Jdot)), np.max(np.abs(lhs.Adot + rt.Adot)))
    )


# ---------------------------------------------------------------------------
# scenario constructors
# ---------------------------------------------------------------------------

def pick_from_Q(Q, J=None):
    """Pick field of the cubic coefficient field Q: A1 = [[Re,-Im],[-Im,-Re]].

    Valid for the standard flat J; for a general J pass the field to build in
    its node frame instead.
    """
    u, v = np.real(Q), np.imag(Q)
    A = np.zeros(Q.shape + (2, 2, 2))
    A[..., 0, 0, 0] = u
    A[..., 0, 0, 1] = -v
    A[..., 0, 1, 0] = -v
    A[..., 0, 1, 1] = -u
    A[..., 1, :, :] = np.einsum("...ij,...jk->...ik", A[..., 0, :, :], J0)
    return A


def field_state_from_Q(grid: TorusGrid, Q) -> FieldState:
    """Flat standard J with the pick field of the cubic coefficient Q."""
    J = np.broadcast_to(J0, (grid.n, grid.n, 2, 2)).copy()
    return FieldState(grid=grid, J=J, A=pick_from_Q(np.asarray(Q, dtype=complex)))


def titeica_state(grid: TorusGrid, w=1.0) -> FieldState:
    """Constant cubic differential over the flat J: the model flat case."""
    Q = np.full((grid.n, grid.n), np.conj(w), dtype=complex)
    return field_state_from_Q(grid, Q)


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-1/t)-glued between."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def patch_window(grid: TorusGrid, lo=0.12, hi=0.88, ramp=0.18):
    """Exact C-infinity bump in y: 0 outside [lo, hi], 1 on [lo+ramp, hi-ramp].

    Being exactly zero near the seam keeps the periodic extension smooth, so
    spectral derivatives of windowed fields converge.
    """
    y = grid.y
    return _smoothstep((y - lo) / ramp) * _smoothstep((hi - y) / ramp)


def holomorphic_patch_Q(grid: TorusGrid, scale=0.35, window=None):
    """Cubic coefficient holomorphic on the patch interior, periodic globally.

    Q = scale * exp(2 pi i (z - i/2)) truncated by the window in y; away from
    the window ramps Q is exactly holomorphic in z = x + iy.
    """
    if window is None:
        window = patch_window(grid)
    z = grid.x + 1j * grid.y
    return scale * np.exp(2j * np.pi * (z - 0.5j)) * window


def patch_interior_mask(grid: TorusGrid, lo=0.12, hi=0.88, ramp=0.18, margin=4):
    """Nodes where the default patch window is identically 1, minus a margin."""
    h = margin / grid.n
    return (grid.y >= lo + ramp + h) & (grid.y <= hi - ramp - h)


def conjugated_state(grid: TorusGrid, seed=0, amp=0.25, wfield=None) -> FieldState:
    """Smooth non-flat state: J conjugated by exp of a random trace-free field."""
    rng = np.random.default_rng(seed)
    B = _random_tracefree_field(grid, rng, amp)
    S = _expm_2x2(B)
    Sinv = np.linalg.inv(S)
    J = np.einsum("...ij,jk,...kl->...il", S, J0, Sinv)
    g = metric_from_J(J)
    E = frame_field(g)
    if wfield is None:
        wfield = _random_smooth(grid, rng, 0.8) + 1j * _random_smooth(grid, rng, 0.8)
    Af = np.zeros((grid.n, grid.n, 2, 2, 2))
    Af[..., 0, 0, 0] = np.real(wfield)
    Af[..., 0, 0, 1] = np.imag(wfield)
    Af[..., 0, 1, 0] = np.imag(wfield)
    Af[..., 0, 1, 1] = -np.real(wfield)
    Af[..., 1, :, :] = np.einsum("...ij,jk->...ik", Af[..., 0, :, :], J0)
    A = pick_change_basis_field(Af, np.linalg.inv(E))
    return FieldState(grid=grid, J=J, A=A)


def _random_smooth(grid: TorusGrid, rng, amp=1.0, kmax=2):
    """Random real trigonometric polynomial with |wavenumbers| <= kmax."""
    out = np.zeros((grid.n, grid.n))
    for kx in range(-kmax, kmax + 1):
        for ky in range(-kmax, kmax + 1):
            if kx == 0 and ky == 0:
                continue
            a, b = rng.normal(size=2)
            phase = 2 * np.pi * (kx * grid.x + ky * grid.y)
            out += a * np.cos(phase) + b * np.sin(phase)
    scale = np.max(np.abs(out)) or 1.0
    return amp * out / scale


def _random_tracefree_field(grid, rng, amp):
    B = np.zeros((grid.n, grid.n, 2, 2))
    B[..., 0, 0] = _random_smooth(grid, rng, amp)
    B[..., 0, 1] = _random_smooth(grid, rng, amp)
    B[..., 1, 0] = _random_smooth(grid, rng, amp)
    B[..., 1, 1] = -B[..., 0, 0]
    return B


def _expm_2x2(B):
    """exp of a field of trace-free 2x2 matrices (unimodular result)."""
    det = np.linalg.det(B)
    out = np.empty_like(B)
    eye = np.eye(2)
    # exp(B) = cosh(s) I + sinh(s)/s B with s^2 = -det B (s may be imaginary)
    s2 = -det
    s = np.sqrt(np.abs(s2))
    pos = s2 >= 0
    c = np.where(pos, np.cosh(s), np.cos(s))
    sdiv = np.where(s > 1e-30, np.where(pos, np.sinh(s), np.sin(s)) / np.where(s > 1e-30, s, 1.0), 1.0)
    out = c[..., None, None] * eye + sdiv[..., None, None] * B
    return out


def random_tangent(fs: FieldState, seed=0, amp=0.5) -> TangentFieldState:
    """Valid random tangent: smooth Jdot plus a free trace-less fiber part."""
    rng = np.random.default_rng(seed)
    grid = fs.grid
    E = fs.frame
    Einv = np.linalg.inv(E)
    p = _random_smooth(grid, rng, amp)
    q = _random_smooth(grid, rng, amp)
    Jd_f = np.zeros((grid.n, grid.n, 2, 2))
    Jd_f[..., 0, 0] = p
    Jd_f[..., 0, 1] = q
    Jd_f[..., 1, 0] = q
    Jd_f[..., 1, 1] = -p
    Jdot = np.einsum("...ij,...jk,...kl->...il", E, Jd_f, Einv)
    ud = _random_smooth(grid, rng, amp)
    vd = _random_smooth(grid, rng, amp)
    tilde_f = np.zeros((grid.n, grid.n, 2, 2, 2))
    tilde_f[..., 0, 0, 0] = ud
    tilde_f[..., 0, 0, 1] = vd
    tilde_f[..., 0, 1, 0] = vd
    tilde_f[..., 0, 1, 1] = -ud
    tilde_f[..., 1, :, :] = np.einsum("...ij,jk->...ik", tilde_f[..., 0, :, :], J0)
    A_f = pick_change_basis_field(fs.A, E)
    T_f = np.stack(
        [
            np.einsum("...ij,jk,...kl,lm->...im", A_f[..., 0, :, :], J0, Jd_f, _EDIAG),
            2.0
            * np.einsum("...ij,jk,...kl,lm->...im", A_f[..., 1, :, :], J0, Jd_f, _EDIAG),
        ],
        axis=-3,
    )
    tr = np.einsum("ij,...ajk,...ki->...a", J0, A_f, Jd_f)
    Adot_f = tilde_f + T_f + 0.5 * tr[..., None, None] * np.eye(2)
    Adot = pick_change_basis_field(Adot_f, Einv)
    return TangentFieldState(Jdot=Jdot, Adot=Adot)


def lie_tangent(fs: FieldState, X) -> TangentFieldState:
    return lie_derivative(fs, X)


def hamiltonian_vector_field(grid: TorusGrid, H):
    """X with iota_X rho = dH on the flat torus: X = (dH/dy, -dH/dx)."""
    return np.stack([grid.deriv(H, 1), -grid.deriv(H, 0)], axis=-1)


def is_symplectic(grid: TorusGrid, X, tol=1e-8):
    """d(iota_X rho) = 0 check: divergence-free in the flat coordinates."""
    div = grid.deriv(X[..., 0], 0) + grid.deriv(X[..., 1], 1)
    return float(np.max(np.abs(div))) <= tol
