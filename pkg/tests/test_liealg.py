"""Exterior-calculus engine: structure constants, products, star, norms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from g2lab import coframes, geometries, instantons, liealg


@pytest.fixture(scope="module")
def s3():
    return coframes.s3xs3()


@pytest.fixture(scope="module")
def sp2():
    return coframes.sp2()


@pytest.fixture(scope="module")
def su3():
    return coframes.su3_flag()


def d_of(cf, label):
    k = cf.index(label)
    e = liealg.LieValuedForm(1, "scalar", cf, {(k,): np.array([1.0])})
    de = liealg.d_invariant(e)
    return {tuple(cf.labels[i] for i in idx): float(v[0]) for idx, v in de.components.items()}


class TestStructureConstants:
    def test_d_squared_zero(self, s3, sp2, su3):
        assert liealg.d_squared_max(s3) <= 1e-14
        assert liealg.d_squared_max(sp2) <= 1e-14
        assert liealg.d_squared_max(su3) <= 1e-14

    def test_s3xs3_maurer_cartan(self, s3):
        # d eta_1^+ = -2 (eta_2^+ ^ eta_3^+ + eta_2^- ^ eta_3^-)
        assert d_of(s3, "ep1") == {("ep2", "ep3"): -2.0, ("em2", "em3"): -2.0}
        # d eta_1^- = -2 (eta_2^- ^ eta_3^+ - eta_3^- ^ eta_2^+)
        assert d_of(s3, "em1") == {("ep2", "em3"): -2.0, ("ep3", "em2"): 2.0}

    def test_sp2_maurer_cartan(self, sp2):
        # d om^i = -2 om^{jk} + Omega_i/2 and d eta^i = -2 eta^{jk} - Omegabar_i/2
        assert d_of(sp2, "om1") == {("om2", "om3"): -2.0, ("e1", "e2"): 0.5, ("e3", "e4"): -0.5}
        assert d_of(sp2, "om2") == {("om1", "om3"): 2.0, ("e1", "e3"): 0.5, ("e2", "e4"): 0.5}
        assert d_of(sp2, "om3") == {("om1", "om2"): -2.0, ("e1", "e4"): 0.5, ("e2", "e3"): -0.5}
        assert d_of(sp2, "eta1") == {("eta2", "eta3"): -2.0, ("e1", "e2"): -0.5, ("e3", "e4"): -0.5}
        assert d_of(sp2, "eta2") == {("eta1", "eta3"): 2.0, ("e1", "e3"): -0.5, ("e2", "e4"): 0.5}
        assert d_of(sp2, "eta3") == {("eta1", "eta2"): -2.0, ("e1", "e4"): -0.5, ("e2", "e3"): -0.5}

    def test_su3_fibre_relations(self, su3):
        assert d_of(su3, "s3") == {("nu1", "nu2"): -1.0, ("e1", "e2"): -0.5, ("e3", "e4"): 0.5}
        dn1 = d_of(su3, "nu1")
        assert dn1[("e1", "e4")] == -0.5 and dn1[("e2", "e3")] == 0.5

    def test_antisymmetry_validation(self):
        c = np.zeros((2, 2, 2))
        c[0, 0, 1] = 1.0  # missing the antisymmetric partner
        with pytest.raises(ValueError):
            liealg.CoframeAlgebra(("a", "b"), c)


class TestWedge:
    def test_basis_product(self, s3):
        e1 = liealg.one_form(s3, "ep1", 1.0)
        e2 = liealg.one_form(s3, "ep2", 1.0)
        w = liealg.wedge(e1, e2)
        assert w.components == {(0, 1): pytest.approx(np.array([1.0]))}

    def test_antisymmetry(self, s3):
        e1 = liealg.one_form(s3, "ep1", 1.0)
        assert liealg.wedge(e1, e1).is_zero()

    def test_dt_squared(self, s3):
        cf = s3.with_dt()
        a = liealg.form_from_components(cf, 2, {("dt", "ep1"): 1.0})
        b = liealg.form_from_components(cf, 2, {("dt", "ep2"): 1.0})
        assert liealg.wedge(a, b).is_zero()

    def test_degree_overflow_clamps_to_zero(self, s3):
        rng = np.random.default_rng(0)
        a = liealg.random_form(s3, 4, rng)
        b = liealg.random_form(s3, 4, rng)
        assert liealg.wedge(a, b).is_zero()

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), p=st.integers(1, 3), q=st.integers(1, 3))
    def test_graded_commutativity(self, p, q, seed):
        cf = coframes.s3xs3()
        rng = np.random.default_rng(seed)
        a = liealg.random_form(cf, p, rng)
        b = liealg.random_form(cf, q, rng)
        lhs = liealg.wedge(a, b)
        rhs = ((-1.0) ** (p * q)) * liealg.wedge(b, a)
        assert (lhs + (-1.0) * rhs).max_abs() <= 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000), p=st.integers(1, 2))
    def test_leibniz(self, p, seed):
        cf = coframes.s3xs3()
        rng = np.random.default_rng(seed)
        a = liealg.random_form(cf, p, rng)
        b = liealg.random_form(cf, 2, rng)
        lhs = liealg.d_invariant(liealg.wedge(a, b))
        rhs = (liealg.wedge(liealg.d_invariant(a), b)
               + ((-1.0) ** p) * liealg.wedge(a, liealg.d_invariant(b)))
        assert (lhs + (-1.0) * rhs).max_abs() <= 1e-12


class TestCurvature:
    def test_zero_connection(self, s3):
        cf = s3.with_dt()
        A = liealg.LieValuedForm(1, "su2", cf, {}, {})
        assert liealg.curvature(A).is_zero()

    def test_spin_connection(self):
        # F_theta = -(1/2) sum Omegabar_i T_i
        d = instantons.spin_connection_curvature()
        assert d["deviation"] <= 1e-14

    def test_phym_limit_has_no_dt_part(self, s3):
        cf = s3.with_dt()
        comps = {(f"ep{i}",): [0.0] * (i - 1) + [2.0 / 3.0] + [0.0] * (3 - i)
                 for i in (1, 2, 3)}
        A = liealg.form_from_components(cf, 1, comps, algebra="su2",
                                        t_deriv={k: [0.0, 0.0, 0.0] for k in comps})
        F = liealg.curvature(A)
        assert F.dt_part().is_zero()
        assert not F.is_zero()   # pseudo-HYM, not flat

    def test_bianchi_closed_forms(self):
        prof = geometries.BSCanonicalProfile()
        worst = 0.0
        for r in np.geomspace(1.05, 20.0, 10):
            stt = prof.state_at_coord(r)
            x, dx = instantons.clarke_closed_form(1.0, r)
            A = instantons.connection_form((x, 0.0), (dx, 0.0), stt, "su2cubed")
            worst = max(worst, liealg.bianchi_residual(A))
            x, dx = instantons.alim_x_of_r(r)
            A = instantons.connection_form((x, 0.0), (dx, 0.0), stt, "su2cubed")
            worst = max(worst, liealg.bianchi_residual(A))
        pb = geometries.BGGGCanonicalProfile()
        for r in np.geomspace(2.3, 20.0, 10):
            A = instantons.abelian_bggg_form((0.5, 0.2, -0.1), r)
            worst = max(worst, liealg.bianchi_residual(A))
        assert worst <= 1e-10


class TestHodgeAndNorms:
    def test_star_volume(self, s3):
        rng = np.random.default_rng(3)
        m = liealg.DiagonalMetric(rng.uniform(0.5, 2.0, 6))
        vol = liealg.LieValuedForm(6, "scalar", s3, {tuple(range(6)): np.array([m.volume_coefficient()])})
        one = liealg.hodge_star(vol, m)
        assert abs(one.components[()][0] - 1.0) <= 1e-12
        back = liealg.hodge_star(liealg.LieValuedForm(0, "scalar", s3, {(): np.array([1.0])}), m)
        assert abs(back.components[tuple(range(6))][0] - m.volume_coefficient()) <= 1e-12

    def test_double_star_identity(self, s3):
        rng = np.random.default_rng(11)
        m = liealg.DiagonalMetric(rng.uniform(0.5, 2.0, 6))
        for p in range(7):
            a = liealg.random_form(s3, p, rng)
            ss = liealg.hodge_star(liealg.hodge_star(a, m), m)
            sign = (-1.0) ** (p * (6 - p))     # even-dimensional slice of the engine
            assert (ss + (-sign) * a).max_abs() <= 1e-12 * max(1.0, a.max_abs())

    def test_double_star_dim7(self):
        cf = coframes.s3xs3().with_dt()
        rng = np.random.default_rng(5)
        m = liealg.DiagonalMetric(rng.uniform(0.5, 2.0, 7))
        for p in range(8):
            a = liealg.random_form(cf, p, rng)
            ss = liealg.hodge_star(liealg.hodge_star(a, m), m)
            assert (ss + (-1.0) * a).max_abs() <= 1e-12 * max(1.0, a.max_abs())

    def test_norm_examples(self, s3):
        m = liealg.DiagonalMetric(np.ones(6))
        z = liealg.zero_form(s3, 1, "su2")
        assert liealg.norm_sq(z, m) == 0.0
        e1T1 = liealg.form_from_components(s3, 1, {("ep1",): [1.0, 0.0, 0.0]}, algebra="su2")
        assert liealg.norm_sq(e1T1, m) == pytest.approx(2.0)

    def test_norm_positivity(self, s3):
        rng = np.random.default_rng(8)
        m = liealg.DiagonalMetric(rng.uniform(0.5, 2.0, 6))
        a = liealg.random_form(s3, 2, rng, "su2")
        assert liealg.norm_sq(a, m) > 0.0


class TestASDEnergy:
    def test_basic_instanton_energy_is_8pi2(self):
        """Radial quadrature of |F|^2 for the basic ASD instanton on R^4.

        The flat cone over the unit S^3 carries A = w(t) sum T_i eta_i with
        w = lam t^2/(1 + lam t^2); the Yang-Mills energy must come out 8 pi^2
        in the <T_i, T_j> = 2 delta_ij normalisation, for every scale lam.
        """
        su2 = coframes.s3xs3()
        labels = ("t3_1", "t3_2", "t3_3")
        c = np.zeros((3, 3, 3))
        c[:, :, :] = coframes.sp2().structure[4:7, 4:7, 4:7]  # eta-block: unit S^3
        cone = liealg.CoframeAlgebra(labels, c).with_dt()

        def F_norm_sq(tt, lam):
            w = lam * tt * tt / (1.0 + lam * tt * tt)
            dw = 2.0 * lam * tt / (1.0 + lam * tt * tt) ** 2
            comps = {(f"t3_{i}",): np.eye(3)[i - 1] * w for i in (1, 2, 3)}
            ders = {(f"t3_{i}",): np.eye(3)[i - 1] * dw for i in (1, 2, 3)}
            A = liealg.form_from_components(cone, 1, comps, algebra="su2", t_deriv=ders)
            F = liealg.curvature(A)
            m = liealg.DiagonalMetric(np.array([1.0, tt, tt, tt]))
            return liealg.norm_sq(F, m)

        for lam in (1.0, 0.5):
            val, _ = quad(lambda tt: F_norm_sq(tt, lam) * 2.0 * math.pi ** 2 * tt ** 3,
                          0.0, np.inf, limit=300)
            assert val == pytest.approx(8.0 * math.pi ** 2, rel=1e-7)
