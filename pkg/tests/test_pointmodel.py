"""Tests for the 4-dimensional pseudo-Kahler model.

The coordinate matrices at (i, w) are pinned to their published closed forms;
everything else is exercised through seeded random sweeps (invariances,
moment-map properties, signature, closedness).
"""

import numpy as np
import pytest

from aklab import pointmodel as pm
from aklab.scalarfuncs import ConformalProfile, eval_f, eval_f_prime

PROF = ConformalProfile(c=-1.0)


def rand_sl2(rng, scale=3.0):
    while True:
        M = rng.uniform(-scale, scale, (2, 2))
        d = np.linalg.det(M)
        if d < 0:
            M[:, 1] *= -1.0
            d = -d
        if d > 0.5:
            return M / np.sqrt(d)


def rand_coord(rng, wmax=3.0):
    z = complex(rng.uniform(-2, 2), rng.uniform(0.2, 3.0))
    w = complex(rng.uniform(-wmax, wmax), rng.uniform(-wmax, wmax))
    return pm.CoordPoint(z, w)


def rand_tangent(rng, p):
    basis = pm.chart_tangent_basis(p)
    coef = rng.normal(size=4)
    pt = basis[0].point
    Jd = sum(c * b.Jdot for c, b in zip(coef, basis))
    Ad = sum(c * b.Adot for c, b in zip(coef, basis))
    return pm.TangentVector(point=pt, Jdot=Jd, Adot=Ad)


class TestChartAtI:
    def test_fuchsian_point(self):
        st = pm.point_from_coords(pm.CoordPoint(1j, 0))
        assert np.allclose(st.J, [[0, -1], [1, 0]], atol=1e-15)
        assert np.allclose(st.A, 0, atol=1e-15)

    def test_unit_real_fiber(self):
        st = pm.point_from_coords(pm.CoordPoint(1j, 1))
        assert np.allclose(st.A[0], [[1, 0], [0, -1]], atol=1e-14)
        assert np.allclose(st.A[1], [[0, -1], [-1, 0]], atol=1e-14)

    def test_unit_imag_fiber(self):
        st = pm.point_from_coords(pm.CoordPoint(1j, 1j))
        assert np.allclose(st.A[0], [[0, 1], [1, 0]], atol=1e-14)
        assert np.allclose(st.A[1], [[1, 0], [0, -1]], atol=1e-14)

    def test_general_fiber_matrices(self):
        u, v = 0.7, -0.3
        st = pm.point_from_coords(pm.CoordPoint(1j, complex(u, v)))
        assert np.allclose(st.A[0], [[u, v], [v, -u]], atol=1e-14)
        assert np.allclose(st.A[1], [[v, -u], [-u, -v]], atol=1e-14)

    def test_invalid_halfplane_point(self):
        with pytest.raises(pm.ModelError):
            pm.CoordPoint(1.0 - 0.1j, 0)


class TestTangentsAtI:
    W = complex(0.7, -0.3)

    def tangent(self, xd, yd, ud, vd):
        return pm.tangent_from_coords(pm.CoordPoint(1j, self.W), xd, yd, ud, vd)

    def test_zero_tangent(self):
        tv = self.tangent(0, 0, 0, 0)
        assert np.allclose(tv.Jdot, 0) and np.allclose(tv.Adot, 0)

    def test_jdot_matrix(self):
        tv = self.tangent(0.4, -1.1, 0, 0)
        assert np.allclose(tv.Jdot, [[0.4, 1.1], [1.1, -0.4]], atol=1e-14)

    def test_trace_part_xdot(self):
        u, v = self.W.real, self.W.imag
        tv = self.tangent(1, 0, 0, 0)
        assert np.allclose(tv.Adot_tr[0], -v * np.eye(2), atol=1e-14)
        assert np.allclose(tv.Adot_tr[1], u * np.eye(2), atol=1e-14)

    def test_pure_fiber_tangent_at_zero_section(self):
        tv = pm.tangent_from_coords(pm.CoordPoint(1j, 0), 0, 0, 1, 0)
        assert np.allclose(tv.Adot_0[0], [[1, 0], [0, -1]], atol=1e-14)
        assert np.allclose(tv.Adot_0[1], [[0, -1], [-1, 0]], atol=1e-14)
        assert np.allclose(tv.Adot_tr, 0, atol=1e-14)

    def test_displayed_adot_blocks(self):
        # full closed form of the trace-free/trace parts for a mixed tangent
        u, v = self.W.real, self.W.imag
        xd, yd, ud, vd = 0.3, -0.8, 1.2, 0.5
        tv = self.tangent(xd, yd, ud, vd)
        a = ud + u * yd + v * xd
        b = -u * xd + vd + v * yd
        c = vd + 2 * (v * yd - u * xd)
        d = -ud - 2 * (u * yd + v * xd)
        assert np.allclose(tv.Adot_0[0], [[a, b], [b, -a]], atol=1e-13)
        assert np.allclose(tv.Adot_0[1], [[c, d], [d, -c]], atol=1e-13)
        assert np.allclose(
            tv.Adot_tr[0], (-u * yd - v * xd) * np.eye(2), atol=1e-13
        )
        assert np.allclose(tv.Adot_tr[1], (u * xd - v * yd) * np.eye(2), atol=1e-13)
        # decomposition Adot_0 = Adot_tilde0 + T(J, A, Jdot)
        assert np.allclose(tv.Adot_tilde0 + tv.T_tensor, tv.Adot_0, atol=1e-13)

    def test_tangent_constraints_random_points(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            tv = rand_tangent(rng, rand_coord(rng))
            tv.validate(1e-10)


class TestTransportChartConsistency:
    def test_agrees_up_to_fiber_rescaling(self):
        # transport from (i, w y^(3/2)) lands on the chart point (z, w)
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = rand_coord(rng)
            y = np.imag(p.z)
            direct = pm.point_from_coords(p)
            moved = pm.transport_chart_point(
                [np.real(p.z), y, np.real(p.w) * y ** 1.5, np.imag(p.w) * y ** 1.5]
            )
            assert np.allclose(direct.J_ref, moved.J_ref, atol=1e-11)
            assert np.allclose(direct.A_ref, moved.A_ref, atol=1e-10)


class TestInnerProducts:
    def test_norm0_equals_half_fiber_norm(self):
        # ||A||_0^2 = |w|^2 / 2 at (i, w): the norm identity behind all t-args
        rng = np.random.default_rng(5)
        for _ in range(20):
            w = complex(rng.normal(), rng.normal())
            st = pm.point_from_coords(pm.CoordPoint(1j, w))
            assert pm.norm0_sq(st.A) == pytest.approx(abs(w) ** 2 / 2, rel=1e-13)

    def test_norm_invariant_under_transport(self):
        # same identity away from z = i, via the group transport
        rng = np.random.default_rng(6)
        for _ in range(20):
            w = complex(rng.normal(), rng.normal())
            coords = [rng.uniform(-2, 2), rng.uniform(0.3, 3.0), w.real, w.imag]
            st = pm.transport_chart_point(coords)
            assert pm.norm0_sq(st.A) == pytest.approx(abs(w) ** 2 / 2, rel=1e-11)

    def test_inner_A_against_AJ_vanishes(self):
        st = pm.point_from_coords(pm.CoordPoint(1j, 0.8 + 0.4j))
        AJ = np.einsum("aij,jk->aik", st.A, st.J)
        assert pm.inner_A(st.A, AJ) == pytest.approx(0.0, abs=1e-14)

    def test_inner_J_unit(self):
        Jd = np.array([[1.0, 0.0], [0.0, -1.0]])
        assert pm.inner_J(Jd, Jd) == 1.0


class TestMetric:
    def test_fuchsian_unit_horizontal(self):
        p = pm.CoordPoint(1j, 0)
        pt = pm.point_from_coords(p)
        b = pm.chart_tangent_basis(p)
        assert pm.metric_g(PROF, pt, b[0], b[0]) == pytest.approx(1.0, abs=1e-14)

    def test_horizontal_value_equals_positivity_combination(self):
        # hand-traced: <A0,A0> = 10|w|^2, <Atr,Atr> = 2|w|^2 for the x-tangent
        w = 0.7 - 0.3j
        p = pm.CoordPoint(1j, w)
        pt = pm.point_from_coords(p)
        b = pm.chart_tangent_basis(p)
        t = abs(w) ** 2 / 2
        expected = 1 - eval_f(PROF, t) + 1.5 * eval_f_prime(PROF, t) * abs(w) ** 2
        assert pm.metric_g(PROF, pt, b[0], b[0]) == pytest.approx(expected, rel=1e-12)
        assert pm.inner_A(b[0].Adot_0, b[0].Adot_0) == pytest.approx(
            10 * abs(w) ** 2, rel=1e-12
        )
        assert pm.inner_A(b[0].Adot_tr, b[0].Adot_tr) == pytest.approx(
            2 * abs(w) ** 2, rel=1e-12
        )

    def test_vertical_value(self):
        w = 0.7 - 0.3j
        p = pm.CoordPoint(1j, w)
        pt = pm.point_from_coords(p)
        b = pm.chart_tangent_basis(p)
        t = abs(w) ** 2 / 2
        got = pm.metric_g(PROF, pt, b[2], b[2])
        assert got == pytest.approx(2.0 / 3.0 * eval_f_prime(PROF, t), rel=1e-12)
        assert got < 0

    def test_krein_splitting_signs(self):
        # {Adot_tilde0 = 0} positive, {Jdot = 0} negative
        rng = np.random.default_rng(9)
        for _ in range(40):
            p = rand_coord(rng)
            pt = pm.point_from_coords(p)
            Jd = rng.normal() * np.array([[1.0, 0], [0, -1.0]]) + rng.normal() * np.array(
                [[0, 1.0], [1.0, 0]]
            )
            plus = pm.tangent_from_parts(pt, Jd, np.zeros((2, 2, 2)))
            if np.max(np.abs(Jd)) > 1e-3:
                assert pm.metric_g(PROF, pt, plus, plus) > 0
            minus = pm.tangent_from_parts(
                pt, np.zeros((2, 2)), pm.pick_symmetric(rng.normal(), rng.normal())
            )
            if np.max(np.abs(minus.Adot)) > 1e-3:
                assert pm.metric_g(PROF, pt, minus, minus) < 0


class TestComplexStructureAndOmega:
    def test_involution_and_compatibility(self):
        rng = np.random.default_rng(13)
        worst_sq = worst_herm = worst_comp = 0.0
        for _ in range(100):
            p = rand_coord(rng)
            pt = pm.point_from_coords(p)
            t1, t2 = rand_tangent(rng, p), rand_tangent(rng, p)
            tI = pm.cplx_I(pt, pm.cplx_I(pt, t1))
            worst_sq = max(
                worst_sq,
                np.max(np.abs(tI.Jdot + t1.Jdot)),
                np.max(np.abs(tI.Adot + t1.Adot)),
            )
            worst_herm = max(
                worst_herm,
                abs(
                    pm.metric_g(PROF, pt, pm.cplx_I(pt, t1), pm.cplx_I(pt, t2))
                    - pm.metric_g(PROF, pt, t1, t2)
                ),
            )
            worst_comp = max(
                worst_comp,
                abs(
                    pm.symp_omega(PROF, pt, t1, t2)
                    - pm.metric_g(PROF, pt, t1, pm.cplx_I(pt, t2))
                ),
            )
        assert worst_sq <= 1e-12
        assert worst_herm <= 1e-12
        assert worst_comp <= 1e-12

    def test_I_preserves_tangent_constraints(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            p = rand_coord(rng)
            tv = rand_tangent(rng, p)
            pm.cplx_I(tv.point, tv).validate(1e-11)

    def test_omega_antisymmetric(self):
        rng = np.random.default_rng(19)
        p = rand_coord(rng)
        pt = pm.point_from_coords(p)
        tv = rand_tangent(rng, p)
        assert pm.symp_omega(PROF, pt, tv, tv) == pytest.approx(0.0, abs=1e-13)

    def test_fuchsian_omega_value(self):
        # omega(J1, J2) = 1 for the two standard horizontal tangents at (i,0)
        pt = pm.point_from_coords(pm.CoordPoint(1j, 0))
        t1 = pm.tangent_from_parts(pt, np.array([[1.0, 0], [0, -1.0]]), np.zeros((2, 2, 2)))
        t2 = pm.tangent_from_parts(pt, np.array([[0, 1.0], [1.0, 0]]), np.zeros((2, 2, 2)))
        assert pm.symp_omega(PROF, pt, t1, t2) == pytest.approx(1.0, abs=1e-14)


class TestSL2Action:
    def test_identity(self):
        p = pm.CoordPoint(0.4 + 1.3j, 1 - 2j)
        pt = pm.point_from_coords(p)
        out = pm.sl2_act(np.eye(2), pt)
        assert np.allclose(out.J_ref, pt.J_ref, atol=1e-14)
        assert np.allclose(out.A_ref, pt.A_ref, atol=1e-14)

    def test_rejects_non_unimodular(self):
        pt = pm.point_from_coords(pm.CoordPoint(1j, 1))
        with pytest.raises(pm.ModelError):
            pm.sl2_act(2 * np.eye(2), pt)

    def test_rotation_fixes_J(self):
        th = 0.7
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        pt = pm.point_from_coords(pm.CoordPoint(1j, 1 + 1j))
        out = pm.sl2_act(R, pt)
        assert np.allclose(out.J_ref, pt.J_ref, atol=1e-13)

    def test_group_law_and_metric_invariance(self):
        rng = np.random.default_rng(23)
        worst_law = worst_g = 0.0
        for _ in range(100):
            p = rand_coord(rng)
            pt = pm.point_from_coords(p)
            P, Q = rand_sl2(rng), rand_sl2(rng, 2.0)
            s1 = pm.sl2_act(P @ Q, pt)
            s2 = pm.sl2_act(P, pm.sl2_act(Q, pt))
            worst_law = max(
                worst_law,
                np.max(np.abs(s1.J_ref - s2.J_ref)),
                np.max(np.abs(s1.A_ref - s2.A_ref)),
            )
            t1, t2 = rand_tangent(rng, p), rand_tangent(rng, p)
            npt, n1 = pm.sl2_act_tangent(P, t1)
            _, n2 = pm.sl2_act_tangent(P, t2)
            worst_g = max(
                worst_g,
                abs(pm.metric_g(PROF, npt, n1, n2) - pm.metric_g(PROF, pt, t1, t2)),
            )
        assert worst_law <= 1e-9
        assert worst_g <= 1e-9


class TestMomentMap:
    def test_fuchsian_value(self):
        pt = pm.point_from_coords(pm.CoordPoint(1j, 0))
        assert pm.moment_hat(PROF, pt, pm.J0) == pytest.approx(-2.0, abs=1e-14)

    def test_zero_on_trace_orthogonal(self):
        # tr(J X) = 0 kills the moment pairing regardless of the fiber
        pt = pm.point_from_coords(pm.CoordPoint(1j, 2 - 1j))
        X = np.array([[1.0, 0.0], [0.0, -1.0]])  # tr(J0 X) = 0
        assert pm.moment_hat(PROF, pt, X) == pytest.approx(0.0, abs=1e-14)

    def test_rejects_traced_argument(self):
        pt = pm.point_from_coords(pm.CoordPoint(1j, 0))
        with pytest.raises(pm.ModelError):
            pm.moment_hat(PROF, pt, np.eye(2))

    def test_defining_property(self):
        rng = np.random.default_rng(29)
        h, worst = 1e-5, 0.0
        for _ in range(40):
            p = rand_coord(rng, 2.0)
            pt = pm.point_from_coords(p)
            X = rng.normal(size=(2, 2))
            X -= 0.5 * np.trace(X) * np.eye(2)
            v = rand_tangent(rng, p)
            fd = (
                pm.moment_hat(PROF, pm.state_curve(pt, v, +h), X)
                - pm.moment_hat(PROF, pm.state_curve(pt, v, -h), X)
            ) / (2 * h)
            om = pm.symp_omega(PROF, pt, pm.sl2_generator(pt, X), v)
            worst = max(worst, abs(fd - om) / max(1.0, abs(om)))
        assert worst <= 1e-6

    def test_equivariance(self):
        rng = np.random.default_rng(31)
        worst = 0.0
        for _ in range(60):
            p = rand_coord(rng)
            pt = pm.point_from_coords(p)
            P = rand_sl2(rng)
            X = rng.normal(size=(2, 2))
            X -= 0.5 * np.trace(X) * np.eye(2)
            m1 = pm.moment_hat(PROF, pm.sl2_act(P, pt), X)
            m2 = pm.moment_hat(PROF, pt, np.linalg.inv(P) @ X @ P)
            worst = max(worst, abs(m1 - m2) / max(1.0, abs(m2)))
        assert worst <= 1e-10


class TestCircleAction:
    def test_periodicity_and_composition(self):
        pt = pm.point_from_coords(pm.CoordPoint(1j, 1.2 - 0.5j))
        full = pm.circle_act(2 * np.pi, pt)
        assert np.max(np.abs(full.A - pt.A)) <= 1e-12
        a, b = 0.7, 1.9
        c1 = pm.circle_act(a + b, pt)
        c2 = pm.circle_act(a, pm.circle_act(b, pt))
        assert np.max(np.abs(c1.A - c2.A)) <= 1e-12

    def test_isometry(self):
        rng = np.random.default_rng(37)
        worst = 0.0
        for _ in range(50):
            p = rand_coord(rng)
            pt = pm.point_from_coords(p)
            th = rng.uniform(0, 2 * np.pi)
            t1, t2 = rand_tangent(rng, p), rand_tangent(rng, p)
            npt, n1 = pm.circle_act_tangent(th, t1)
            _, n2 = pm.circle_act_tangent(th, t2)
            worst = max(
                worst,
                abs(pm.metric_g(PROF, npt, n1, n2) - pm.metric_g(PROF, pt, t1, t2)),
            )
        assert worst <= 1e-10

    def test_hamiltonian_property(self):
        rng = np.random.default_rng(41)
        h, worst = 1e-5, 0.0
        for _ in range(40):
            p = rand_coord(rng, 2.0)
            pt = pm.point_from_coords(p)
            v = rand_tangent(rng, p)
            fd = (
                pm.hamiltonian_hat(PROF, pm.state_curve(pt, v, +h))
                - pm.hamiltonian_hat(PROF, pm.state_curve(pt, v, -h))
            ) / (2 * h)
            om = pm.symp_omega(PROF, pt, pm.circle_generator(pt), v)
            worst = max(worst, abs(fd - om) / max(1.0, abs(om)))
        assert worst <= 1e-6

    def test_hamiltonian_value_and_invariance(self):
        w = 1.4 + 0.2j
        pt = pm.point_from_coords(pm.CoordPoint(1j, w))
        H = pm.hamiltonian_hat(PROF, pt)
        assert H == pytest.approx(2 / 3 * eval_f(PROF, abs(w) ** 2 / 2), rel=1e-13)
        assert pm.hamiltonian_hat(PROF, pm.circle_act(1.1, pt)) == pytest.approx(
            H, rel=1e-13
        )

    def test_fixed_points_are_zero_section(self):
        pt0 = pm.point_from_coords(pm.CoordPoint(0.5 + 2j, 0))
        for th in (0.3, 1.0, 2.5):
            moved = pm.circle_act(th, pt0)
            assert np.max(np.abs(moved.A - pt0.A)) <= 1e-14
        ptw = pm.point_from_coords(pm.CoordPoint(0.5 + 2j, 1e-3))
        assert np.max(np.abs(pm.circle_act(1.0, ptw).A - ptw.A)) > 1e-5


class TestGramSignature:
    def test_fuchsian_and_fiber_points(self):
        for w in (0.0, 0.1, 1.0, 10.0):
            assert pm.gram_signature(PROF, pm.CoordPoint(1j, w)) == (2, 2)

    def test_sweep_no_degeneracy(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            p = rand_coord(rng, 50.0)
            assert pm.gram_signature(PROF, p) == (2, 2)


class TestClosedness:
    def test_residual_at_spec_points(self):
        assert pm.omega_closedness_residual(PROF, pm.CoordPoint(1j, 0), 1e-3) <= 1e-5
        assert (
            pm.omega_closedness_residual(PROF, pm.CoordPoint(1j, 1 + 1j), 1e-3) <= 1e-5
        )

    def test_second_order_decay(self):
        p = pm.CoordPoint(0.3 + 0.8j, 0.5 - 1.2j)
        r1 = pm.omega_closedness_residual(PROF, p, 1e-3)
        r2 = pm.omega_closedness_residual(PROF, p, 5e-4)
        assert r1 / r2 == pytest.approx(4.0, rel=0.1)
