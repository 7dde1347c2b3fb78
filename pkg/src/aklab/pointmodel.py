"""Finite-dimensional pseudo-Kahler model on pairs (J, A).

A point is a linear complex structure J on R^2 compatible with the standard
area form together with a cubic-type tensor A (an End-valued 1-form that is
trace-free, g_J-symmetric, totally symmetric and satisfies A(J.) = A(.)J).
The model is a 4-manifold charted by the upper half-plane times C through
(z, w) |-> (j(z), Re(w_bar (dx - z_bar dy)^3)) and carries an indefinite
metric, a complex structure and a symplectic form, an SL(2,R)-action with
moment map, and a Hamiltonian circle action.

Conventions
-----------
* ``reference`` components are taken in the standard basis of R^2.
* Each PointState also carries the oriented g_J-orthonormal frame obtained by
  Gram-Schmidt from the standard basis; the frame components make the literal
  trace formulas for the inner products valid, and in that frame J is the
  standard rotation.
* A tangent (Jdot, Adot) uses Adot := g_J^{-1} Cdot (the derivative is taken
  on the (0,3)-tensor C = g_J A, then contracted with the metric at the base
  point).  This is what makes the trace of Adot(X) equal tr(J A(X) Jdot).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .scalarfuncs import ConformalProfile, eval_f, eval_f_prime

__all__ = [
    "J0",
    "CoordPoint",
    "PointState",
    "TangentVector",
    "point_from_coords",
    "tangent_from_coords",
    "chart_tangent_basis",
    "halfplane_transport",
    "transport_chart_point",
    "transport_chart_basis",
    "inner_A",
    "inner_J",
    "norm0_sq",
    "metric_g",
    "cplx_I",
    "symp_omega",
    "sl2_act",
    "sl2_act_tangent",
    "sl2_generator",
    "moment_hat",
    "circle_act",
    "circle_act_tangent",
    "circle_generator",
    "hamiltonian_hat",
    "state_curve",
    "gram_matrix",
    "gram_signature",
    "omega_closedness_residual",
]

J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
_EDIAG = np.diag([1.0, -1.0])
_I2 = np.eye(2)

VALID_TOL = 1e-12


class ModelError(ValueError):
    """Input violates a structural constraint of the model."""


# ---------------------------------------------------------------------------
# small tensor helpers (reference <-> frame bookkeeping)
# ---------------------------------------------------------------------------

def area_metric(J):
    """Metric g = rho0(., J.) of a compatible J, as a Gram matrix."""
    # rho0(e1, v) = v[1], rho0(e2, v) = -v[0]
    return np.array([[J[1, 0], J[1, 1]], [-J[0, 0], -J[0, 1]]])


def gram_schmidt_frame(g):
    """Columns = oriented g-orthonormal frame from the standard basis.

    det g = 1 for metrics induced by compatible J, so the frame is unimodular
    and the standard area form restricts to the standard one in the frame.
    """
    g11 = g[0, 0]
    if not g11 > 0:
        raise ModelError("metric not positive: J is incompatible with the orientation")
    s = np.sqrt(g11)
    return np.array([[1.0 / s, -g[0, 1] / s], [0.0, s]])


def pick_change_basis(A, B):
    """Components of a pick-type tensor in the basis with columns B.

    A[a] is the endomorphism paired with the a-th dual basis vector; both the
    one-form slot and the endomorphism transform.
    """
    Binv = np.linalg.inv(B)
    endo = np.einsum("li,aij,jm->alm", Binv, A, B)  # conjugate each A[a]
    return np.einsum("ba,blm->alm", B, endo)  # rotate the 1-form slot


def pick_symmetric(u, v):
    """Frame components of the cubic-type tensor with fiber coordinate u+iv."""
    a1 = np.array([[u, v], [v, -u]])
    return np.stack([a1, a1 @ J0])


def pick_to_C(g, A):
    """(0,3)-tensor C_{ajk} = g(A(e_a) e_j, e_k) from pick components."""
    return np.einsum("alj,lk->ajk", A, g)


def C_to_pick(g, C):
    """Invert pick_to_C with the metric g."""
    return np.einsum("lk,ajk->alj", np.linalg.inv(g), C)


# ---------------------------------------------------------------------------
# states and tangents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordPoint:
    """Chart coordinates: z in the upper half-plane, w the fiber coordinate."""

    z: complex
    w: complex

    def __post_init__(self):
        if not np.imag(self.z) > 0:
            raise ModelError(f"Im z must be positive, got z = {self.z}")


@dataclass(frozen=True)
class PointState:
    """Pair (J, A) in the oriented g_J-orthonormal frame, plus that frame.

    ``J`` equals the standard rotation in the frame; ``A[k]`` is the
    endomorphism paired with the k-th dual frame covector.  ``frame`` has the
    frame vectors as columns in the reference basis.
    """

    J: np.ndarray
    A: np.ndarray
    frame: np.ndarray

    @classmethod
    def from_reference(cls, J_ref, A_ref, check=True):
        g = area_metric(J_ref)
        E = gram_schmidt_frame(g)
        Einv = np.linalg.inv(E)
        J = Einv @ J_ref @ E
        A = pick_change_basis(A_ref, E)
        st = cls(J=J, A=A, frame=E)
        if check:
            st.validate(tol=1e-10)
        return st

    def validate(self, tol=VALID_TOL):
        if np.max(np.abs(self.J @ self.J + _I2)) > tol:
            raise ModelError("J^2 != -Id")
        if not self.J[1, 0] > 0:
            raise ModelError("J violates the orientation convention")
        # roundoff in the constraints scales with the size of A and with the
        # conditioning of the two frame conjugations
        kappa = np.linalg.cond(self.frame)
        atol = tol * (1.0 + np.max(np.abs(self.A))) * max(1.0, kappa) ** 2
        for k in range(2):
            if abs(np.trace(self.A[k])) > atol:
                raise ModelError("A components must be trace-free")
            if np.max(np.abs(self.A[k] - self.A[k].T)) > atol:
                raise ModelError("A components must be symmetric in the frame")
        if np.max(np.abs(self.A[1] - self.A[0] @ J0)) > atol:
            raise ModelError("A(J.) = A(.)J fails: A[1] != A[0] J")

    @cached_property
    def J_ref(self):
        return self.frame @ self.J @ np.linalg.inv(self.frame)

    @cached_property
    def A_ref(self):
        return pick_change_basis(self.A, np.linalg.inv(self.frame))

    def fiber_norm_sq(self):
        """||A||_0^2 = |A|_J^2 / 8, the argument fed to f and f'."""
        return norm0_sq(self.A)


@dataclass(frozen=True)
class TangentVector:
    """Tangent (Jdot, Adot) at ``point``, in the point's frame components."""

    point: PointState
    Jdot: np.ndarray
    Adot: np.ndarray

    def validate(self, tol=1e-10):
        J, A = self.point.J, self.point.A
        if np.max(np.abs(J @ self.Jdot + self.Jdot @ J)) > tol:
            raise ModelError("Jdot must anticommute with J")
        for k in range(2):
            want = np.trace(J @ A[k] @ self.Jdot)
            if abs(np.trace(self.Adot[k]) - want) > tol:
                raise ModelError("tr Adot(X) != tr(J A(X) Jdot)")
            if np.max(np.abs(self.Adot[k] - self.Adot[k].T)) > tol:
                raise ModelError("Adot components must be symmetric")

    @cached_property
    def Adot_0(self):
        tr = 0.5 * np.trace(self.Adot, axis1=1, axis2=2)
        return self.Adot - tr[:, None, None] * _I2

    @cached_property
    def Adot_tr(self):
        tr = 0.5 * np.trace(self.Adot, axis1=1, axis2=2)
        return tr[:, None, None] * np.stack([_I2, _I2])

    @cached_property
    def T_tensor(self):
        """Jdot-dependent trace-free part T(J, A, Jdot)."""
        A, Jd = self.point.A, self.Jdot
        return np.stack([A[0] @ J0 @ Jd @ _EDIAG, 2.0 * A[1] @ J0 @ Jd @ _EDIAG])

    @cached_property
    def Adot_tilde0(self):
        """Trace-free part independent of Jdot."""
        return self.Adot_0 - self.T_tensor

    def Jdot_ref(self):
        E = self.point.frame
        return E @ self.Jdot @ np.linalg.inv(E)

    def Adot_ref(self):
        return pick_change_basis(self.Adot, np.linalg.inv(self.point.frame))


def tangent_from_parts(point, Jdot, Adot_tilde0):
    """Assemble a valid tangent from the free data (Jdot, Adot_tilde0)."""
    A = point.A
    T = np.stack([A[0] @ J0 @ Jdot @ _EDIAG, 2.0 * A[1] @ J0 @ Jdot @ _EDIAG])
    tr = np.array([np.trace(J0 @ A[k] @ Jdot) for k in range(2)])
    Adot = Adot_tilde0 + T + 0.5 * tr[:, None, None] * _I2
    return TangentVector(point=point, Jdot=Jdot, Adot=Adot)


def tangent_from_A_curve(point, Jdot, Aprime):
    """Tangent whose honest A-derivative along a curve is ``Aprime``.

    Converts d/dt A_t = Aprime into the Adot = g^{-1} Cdot convention through
    A' = J Jdot A + Adot (first-order variation of the metric contraction).
    """
    J = point.J
    Adot = Aprime - np.einsum("ij,jk,akl->ail", J, Jdot, point.A)
    return TangentVector(point=point, Jdot=Jdot, Adot=Adot)


# ---------------------------------------------------------------------------
# the chart (z, w) -> (j(z), C_(z,w))
# ---------------------------------------------------------------------------

def _j_of_z(z):
    x, y = np.real(z), np.imag(z)
    return np.array([[x, -(x * x + y * y)], [1.0, -x]]) / y


def _dj_of_z(z, xdot, ydot):
    x, y = np.real(z), np.imag(z)
    dx = np.array([[1.0, -2.0 * x], [0.0, -1.0]]) / y
    dy = np.array([[-x, x * x - y * y], [-1.0, x]]) / (y * y)
    return xdot * dx + ydot * dy


def _cubic_C(z, w):
    """Reference components of C = Re(w_bar (dx - z_bar dy)^3)."""
    eta = np.array([1.0, -np.conj(z)])
    q = np.conj(w) * np.einsum("a,b,c->abc", eta, eta, eta)
    return np.real(q)


def _cubic_Cdot(z, w, zdot, wdot):
    eta = np.array([1.0, -np.conj(z)])
    etadot = np.array([0.0, -np.conj(zdot)])
    cube = np.einsum("a,b,c->abc", etadot, eta, eta)
    cube = cube + np.einsum("a,b,c->abc", eta, etadot, eta)
    cube = cube + np.einsum("a,b,c->abc", eta, eta, etadot)
    qdot = np.conj(wdot) * np.einsum("a,b,c->abc", eta, eta, eta)
    qdot = qdot + np.conj(w) * cube
    return np.real(qdot)


def point_from_coords(p: CoordPoint) -> PointState:
    """Chart map (z, w) -> (j(z), g^{-1} C_(z,w))."""
    J_ref = _j_of_z(p.z)
    g = area_metric(J_ref)
    A_ref = C_to_pick(g, _cubic_C(p.z, p.w))
    return PointState.from_reference(J_ref, A_ref)


def tangent_from_coords(p: CoordPoint, xdot, ydot, udot, vdot) -> TangentVector:
    """Pushforward of the chart basis: analytic derivative of the chart map."""
    pt = point_from_coords(p)
    zdot = complex(xdot, ydot)
    wdot = complex(udot, vdot)
    Jdot_ref = _dj_of_z(p.z, xdot, ydot)
    g = area_metric(pt.J_ref)
    Adot_ref = C_to_pick(g, _cubic_Cdot(p.z, p.w, zdot, wdot))
    E, Einv = pt.frame, np.linalg.inv(pt.frame)
    return TangentVector(
        point=pt,
        Jdot=Einv @ Jdot_ref @ E,
        Adot=pick_change_basis(Adot_ref, E),
    )


def chart_tangent_basis(p: CoordPoint):
    """The four coordinate tangent vectors (d/dx, d/dy, d/du, d/dv) at p."""
    units = np.eye(4)
    return [tangent_from_coords(p, *row) for row in units]


# the unique upper-triangular unimodular matrix sending i to x + iy
def halfplane_transport(x, y):
    s = np.sqrt(y)
    return np.array([[s, x / s], [0.0, 1.0 / s]])


def transport_chart_point(coords) -> PointState:
    """Transport chart: (x, y, u, v) -> P_z . (J(i), A_(i, u+iv))."""
    x, y, u, v = coords
    return sl2_act(
        halfplane_transport(x, y), point_from_coords(CoordPoint(1j, complex(u, v)))
    )


def transport_chart_basis(coords):
    """Point and coordinate tangent basis of the transport chart.

    The fiber tangents are group pushforwards of the (i, w) chart tangents;
    the half-plane tangents are infinitesimal generators of d(P_z)P_z^{-1}.
    Because the metric is group invariant, the fiber components of the
    2-form do not vary along the half-plane in this chart, which keeps the
    finite-difference closedness test well conditioned near the zero section.
    """
    x, y, u, v = coords
    P = halfplane_transport(x, y)
    base = CoordPoint(1j, complex(u, v))
    pt = sl2_act(P, point_from_coords(base))
    gen_x = np.array([[0.0, 1.0], [0.0, 0.0]])
    gen_y = np.array([[1.0 / (2 * y), -x / y], [0.0, -1.0 / (2 * y)]])
    basis = [
        sl2_generator(pt, gen_x),
        sl2_generator(pt, gen_y),
        sl2_act_tangent(P, tangent_from_coords(base, 0, 0, 1, 0))[1],
        sl2_act_tangent(P, tangent_from_coords(base, 0, 0, 0, 1))[1],
    ]
    return pt, basis


# ---------------------------------------------------------------------------
# inner products and the pseudo-Kahler triple
# ---------------------------------------------------------------------------

def inner_A(X, Y):
    """<X, Y> = tr(X1 Y1 + X2 Y2) on frame components of pick-type tensors."""
    return float(np.trace(X[0] @ Y[0]) + np.trace(X[1] @ Y[1]))


def inner_J(Jdot, Jdot2):
    """<Jdot, Jdot'> = tr(Jdot Jdot') / 2."""
    return 0.5 * float(np.trace(Jdot @ Jdot2))


def norm0_sq(A):
    """||A||_0^2 = |A|_J^2 / 8."""
    return inner_A(A, A) / 8.0


def metric_g(profile: ConformalProfile, pt: PointState, t1: TangentVector,
             t2: TangentVector) -> float:
    """Indefinite metric (1-f)<Jdot,Jdot'> + f'/6 <A0,A0'> - f'/12 <Atr,Atr'>."""
    t = pt.fiber_norm_sq()
    f = eval_f(profile, t)
    fp = eval_f_prime(profile, t)
    return (
        (1.0 - f) * inner_J(t1.Jdot, t2.Jdot)
        + fp / 6.0 * inner_A(t1.Adot_0, t2.Adot_0)
        - fp / 12.0 * inner_A(t1.Adot_tr, t2.Adot_tr)
    )


def cplx_I(pt: PointState, tv: TangentVector) -> TangentVector:
    """Complex structure (Jdot, Adot) -> (-J Jdot, -Adot J - A Jdot)."""
    J, A = pt.J, pt.A
    Adot = -np.einsum("aij,jk->aik", tv.Adot, J) - np.einsum("aij,jk->aik", A, tv.Jdot)
    return TangentVector(point=pt, Jdot=-J @ tv.Jdot, Adot=Adot)


def _star_oneform(P):
    """Hodge star on the 1-form slot of a frame pick-type tensor."""
    return np.stack([-P[1], P[0]])


def symp_omega(profile: ConformalProfile, pt: PointState, t1: TangentVector,
               t2: TangentVector) -> float:
    """Fundamental 2-form, in its explicit form.

    Equals metric_g(pt, t1, cplx_I(pt, t2)); both routes are exercised by the
    tests.
    """
    t = pt.fiber_norm_sq()
    f = eval_f(profile, t)
    fp = eval_f_prime(profile, t)
    A0J = np.einsum("aij,jk->aik", t2.Adot_0, pt.J)
    return (
        (f - 1.0) * inner_J(t1.Jdot, pt.J @ t2.Jdot)
        - fp / 12.0 * inner_A(t1.Adot_tr, _star_oneform(t2.Adot_tr))
        - fp / 6.0 * inner_A(t1.Adot_0, A0J)
    )


# ---------------------------------------------------------------------------
# SL(2,R)-action, moment map, circle action
# ---------------------------------------------------------------------------

def _check_sl2(P, tol=1e-10):
    if abs(np.linalg.det(P) - 1.0) > tol:
        raise ModelError("group element must have unit determinant")


def sl2_act(P, pt: PointState) -> PointState:
    """(J, A) -> (P J P^-1, P A(P^-1 .) P^-1) on reference components."""
    _check_sl2(P)
    Pinv = np.linalg.inv(P)
    J_ref = P @ pt.J_ref @ Pinv
    A_ref = np.einsum("ba,ij,bjk,kl->ail", Pinv, P, pt.A_ref, Pinv)
    return PointState.from_reference(J_ref, A_ref)


def sl2_act_tangent(P, tv: TangentVector):
    """Image point and pushed-forward tangent under the group action."""
    _check_sl2(P)
    Pinv = np.linalg.inv(P)
    new_pt = sl2_act(P, tv.point)
    Jd = P @ tv.Jdot_ref() @ Pinv
    Ad = np.einsum("ba,ij,bjk,kl->ail", Pinv, P, tv.Adot_ref(), Pinv)
    E, Einv = new_pt.frame, np.linalg.inv(new_pt.frame)
    return new_pt, TangentVector(
        point=new_pt, Jdot=Einv @ Jd @ E, Adot=pick_change_basis(Ad, E)
    )


def sl2_generator(pt: PointState, X) -> TangentVector:
    """Infinitesimal action of X in sl(2,R): d/ds exp(sX).(J,A) at s = 0."""
    if abs(np.trace(X)) > 1e-12:
        raise ModelError("generator must be trace-free")
    E, Einv = pt.frame, np.linalg.inv(pt.frame)
    Xf = Einv @ X @ E  # same element in frame components
    J, A = pt.J, pt.A
    Jdot = Xf @ J - J @ Xf
    Aprime = (
        np.einsum("ij,ajk->aik", Xf, A)
        - np.einsum("aij,jk->aik", A, Xf)
        - np.einsum("ba,bjk->ajk", Xf, A)
    )
    return tangent_from_A_curve(pt, Jdot, Aprime)


def moment_hat(profile: ConformalProfile, pt: PointState, X) -> float:
    """Moment map pairing (1 - f(||A||_0^2)) tr(J X) for trace-free X."""
    if abs(np.trace(X)) > 1e-12:
        raise ModelError("moment map argument must be trace-free")
    f = eval_f(profile, pt.fiber_norm_sq())
    return (1.0 - f) * float(np.trace(pt.J_ref @ X))


def circle_act(theta: float, pt: PointState) -> PointState:
    """(J, A) -> (J, cos(theta) A(.) - sin(theta) A(.) J)."""
    A = np.cos(theta) * pt.A - np.sin(theta) * np.einsum(
        "aij,jk->aik", pt.A, pt.J
    )
    return PointState(J=pt.J, A=A, frame=pt.frame)


def circle_act_tangent(theta: float, tv: TangentVector):
    """Image point and pushed-forward tangent of the circle action."""
    pt = tv.point
    new_pt = circle_act(theta, pt)
    c, s = np.cos(theta), np.sin(theta)
    # at the C-level: C_theta(X,Y,Z) = c C(X,Y,Z) - s C(X,JY,Z); in the frame
    # g = Id so C-components coincide with pick components.
    JT = pt.J.T
    Adot = c * tv.Adot - s * (
        np.einsum("jm,amk->ajk", JT, tv.Adot)
        + np.einsum("jm,amk->ajk", tv.Jdot.T, pt.A)
    )
    return new_pt, TangentVector(point=new_pt, Jdot=tv.Jdot, Adot=Adot)


def circle_generator(pt: PointState) -> TangentVector:
    """Generator (0, -A(.)J) of the circle action."""
    Aprime = -np.einsum("aij,jk->aik", pt.A, pt.J)
    return tangent_from_A_curve(pt, np.zeros((2, 2)), Aprime)


def hamiltonian_hat(profile: ConformalProfile, pt: PointState) -> float:
    """Circle Hamiltonian (2/3) f(||A||_0^2)."""
    return 2.0 / 3.0 * eval_f(profile, pt.fiber_norm_sq())


# ---------------------------------------------------------------------------
# curves, Gram matrix, closedness
# ---------------------------------------------------------------------------

def state_curve(pt: PointState, tv: TangentVector, eps: float) -> PointState:
    """Point at parameter eps of a curve through pt with velocity tv.

    J moves along the normalized segment (J + eps Jdot)/sqrt(1 + eps^2 det
    Jdot), which stays a complex structure exactly; the (0,3)-tensor C moves
    linearly, matching the Adot = g^{-1} Cdot tangent convention.
    """
    J_ref, A_ref = pt.J_ref, pt.A_ref
    Jd, Ad = tv.Jdot_ref(), tv.Adot_ref()
    det = np.linalg.det(Jd)
    J_eps = (J_ref + eps * Jd) / np.sqrt(1.0 + eps * eps * det)
    g = area_metric(J_ref)
    C_eps = pick_to_C(g, A_ref) + eps * pick_to_C(g, Ad)
    A_eps = C_to_pick(area_metric(J_eps), C_eps)
    return PointState.from_reference(J_eps, A_eps, check=False)


def gram_matrix(profile: ConformalProfile, p: CoordPoint) -> np.ndarray:
    """Gram matrix of the metric in the chart basis (xdot, ydot, udot, vdot)."""
    pt = point_from_coords(p)
    basis = chart_tangent_basis(p)
    G = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            G[i, j] = G[j, i] = metric_g(profile, pt, basis[i], basis[j])
    return G


def gram_signature(profile: ConformalProfile, p: CoordPoint,
                   degenerate_tol: float = 1e-10):
    """(n_plus, n_minus) eigenvalue signs of the chart Gram matrix.

    Raises ModelError when an eigenvalue sits inside the degeneracy band.
    """
    eig = np.linalg.eigvalsh(gram_matrix(profile, p))
    if np.any(np.abs(eig) <= degenerate_tol):
        raise ModelError(f"degenerate Gram matrix: eigenvalues {eig}")
    return int(np.sum(eig > 0)), int(np.sum(eig < 0))


def omega_closedness_residual(profile: ConformalProfile, p: CoordPoint,
                              h: float) -> float:
    """Finite-difference residual of d(omega) = 0 at p.

    Central-differences the components of the 2-form in the transport chart
    over the four coordinate directions and returns the largest
    |d omega(e_a, e_b, e_c)|; second-order accurate in h.
    """
    if not h > 0:
        raise ModelError("step size must be positive")
    coords = np.array([np.real(p.z), np.imag(p.z), np.real(p.w), np.imag(p.w)])

    def omega_comp(c, a, b):
        pt, basis = transport_chart_basis(c)
        return symp_omega(profile, pt, basis[a], basis[b])

    def d_omega(a, b, c):
        # d(omega)(e_a,e_b,e_c) = d_a omega_bc - d_b omega_ac + d_c omega_ab
        total = 0.0
        for sgn, d, (i, j) in ((1, a, (b, c)), (-1, b, (a, c)), (1, c, (a, b))):
            step = np.zeros(4)
            step[d] = h
            total += sgn * (
                omega_comp(coords + step, i, j) - omega_comp(coords - step, i, j)
            ) / (2.0 * h)
        return total

    worst = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            for c in range(b + 1, 4):
                worst = max(worst, abs(d_omega(a, b, c)))
    return worst
