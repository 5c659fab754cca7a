"""Reduced-flow integration and torsion monitoring."""

import math

import numpy as np
import pytest

from g2lab import geometries as geo, hitchin as hf


class TestRightHandSide:
    def test_full_symmetry_fixed_values(self):
        # A_1 = B_1 gives A' = 0, B' = 1
        da, db = hf.hitchin_rhs_full(1.3, 1.3)
        assert da == 0.0 and db == 1.0

    def test_reduced_system_contains_symmetric_case(self):
        st = geo.SU3StructureState((0.7,) * 3, (1.9,) * 3)
        dA1, dA2, dB1, dB2 = hf.hitchin_rhs(st)
        da, db = hf.hitchin_rhs_full(0.7, 1.9)
        assert dA1 == pytest.approx(da, abs=1e-14)
        assert dA2 == pytest.approx(da, abs=1e-14)
        assert dB1 == pytest.approx(db, abs=1e-14)
        assert dB2 == pytest.approx(db, abs=1e-14)

    @pytest.mark.parametrize("prof,x", [
        (geo.BSCanonicalProfile(), 2.0),
        (geo.BSSpinorProfile(1.0), 2.0),
        (geo.BGGGCanonicalProfile(), 3.0),
        (geo.BGGGProfile(1.0, 1.0), 2.0),
        (geo.BGGGProfile(1.0, 1.5), 2.7),
    ])
    def test_rhs_matches_analytic_derivatives(self, prof, x):
        st = prof.state_at_coord(x)
        rhs = hf.hitchin_rhs(st)
        want = (st.dA[0], st.dA[1], st.dB[0], st.dB[1])
        assert max(abs(a - b) for a, b in zip(rhs, want)) <= 1e-10

    def test_singular_point_raises(self):
        st = geo.SU3StructureState((1.0,) * 3, (1.0,) * 3)
        bad = geo.SU3StructureState.__new__(geo.SU3StructureState)
        bad.A, bad.B, bad.dA, bad.dB = (0.0, 1.0, 1.0), (1.0,) * 3, None, None
        with pytest.raises(ZeroDivisionError):
            hf.hitchin_rhs(bad)
        del st


class TestFlowIntegration:
    def test_bs_closed_form_over_a_decade(self):
        prof = geo.BSCanonicalProfile()
        ta, tb = prof.t_of_coord(1.5), prof.t_of_coord(4.0)
        traj = hf.integrate_flow(prof.state_at_coord(1.5), ta, tb, tol=1e-12)
        dev = 0.0
        for t in np.linspace(ta, tb, 25):
            got = traj.dense(t)
            st = prof.state_at_t(t)
            want = np.array([st.A[0], st.A[1], st.B[0], st.B[1]])
            dev = max(dev, float(np.max(np.abs(got - want) / np.abs(want))))
        assert dev <= 1e-8

    def test_bggg_closed_form_over_a_decade(self):
        prof = geo.BGGGCanonicalProfile()
        ta, tb = prof.t_of_coord(3.0), prof.t_of_coord(10.0)
        traj = hf.integrate_flow(prof.state_at_coord(3.0), ta, tb, tol=1e-12)
        dev = 0.0
        for t in np.linspace(ta, tb, 25):
            got = traj.dense(t)
            st = prof.state_at_t(t)
            want = np.array([st.A[0], st.A[1], st.B[0], st.B[1]])
            dev = max(dev, float(np.max(np.abs(got - want) / np.abs(want))))
        assert dev <= 1e-8

    def test_cone_ray_is_invariant(self):
        traj = hf.integrate_flow(geo.ConeProfile().state_at_coord(1.0), 1.0, 8.0, tol=1e-12)
        dev = 0.0
        for t in np.linspace(1.0, 8.0, 20):
            y = traj.dense(t)
            dev = max(dev, abs(y[0] / t - 1.0 / 3.0), abs(y[2] / t - 1.0 / math.sqrt(3.0)))
        assert dev <= 1e-10

    def test_invalid_initial_state(self):
        st = geo.SU3StructureState.__new__(geo.SU3StructureState)
        st.A, st.B, st.dA, st.dB = (0.0, 1.0, 1.0), (1.0,) * 3, None, None
        with pytest.raises(ValueError):
            hf.integrate_flow(st, 0.0, 1.0)

    def test_convergence_order(self):
        """Halving tol reduces the closed-form deviation at a rate compatible
        with the adaptive integrator (error roughly proportional to tol)."""
        prof = geo.BSCanonicalProfile()
        ta, tb = prof.t_of_coord(1.5), prof.t_of_coord(6.0)
        st_end = prof.state_at_t(tb)
        want = np.array([st_end.A[0], st_end.A[1], st_end.B[0], st_end.B[1]])
        tols = np.array([1e-6, 1e-8, 1e-10])
        errs = []
        for tol in tols:
            traj = hf.integrate_flow(prof.state_at_coord(1.5), ta, tb, tol=tol)
            errs.append(max(float(np.max(np.abs(traj.dense(tb) - want))), 1e-16))
        slope, _ = np.polyfit(np.log(tols), np.log(errs), 1)
        assert 0.4 <= slope <= 1.6


class TestResiduals:
    def test_closed_form_torsion(self):
        prof = geo.BSCanonicalProfile()
        ta, tb = prof.t_of_coord(1.3), prof.t_of_coord(5.0)
        traj = hf.integrate_flow(prof.state_at_coord(1.3), ta, tb, tol=1e-12)
        dphi, dpsi = hf.torsion_residual(traj, 20)
        assert np.max(dphi) <= 1e-9 and np.max(dpsi) <= 1e-9

    def test_cone_torsion(self):
        traj = hf.integrate_flow(geo.ConeProfile().state_at_coord(1.0), 1.0, 4.0, tol=1e-12)
        dphi, dpsi = hf.torsion_residual(traj, 12)
        assert np.max(dphi) <= 1e-10 and np.max(dpsi) <= 1e-10

    def test_perturbation_detected(self):
        st = geo.BSCanonicalProfile().state_at_coord(2.0)
        bad = geo.SU3StructureState((st.A[0] + 0.1, st.A[1], st.A[2]), st.B, st.dA, st.dB)
        _, dpsi = hf.torsion_residual_state(bad)
        assert dpsi > 1e-3

    def test_half_flat_persistence(self):
        for prof, x0, x1 in ((geo.BSCanonicalProfile(), 1.4, 5.0),
                             (geo.BGGGCanonicalProfile(), 2.5, 8.0)):
            ta, tb = prof.t_of_coord(x0), prof.t_of_coord(x1)
            traj = hf.integrate_flow(prof.state_at_coord(x0), ta, tb, tol=1e-11)
            assert np.max(hf.half_flat_residual(traj, 10)) <= 1e-9

    def test_half_flat_for_generic_initial_data(self):
        """The invariant ansatz is half-flat for arbitrary positive values, so
        the constraint holds along any flow started from them."""
        st = geo.SU3StructureState((0.9, 1.4, 1.4), (2.0, 1.1, 1.1))
        traj = hf.integrate_flow(st, 1.0, 2.5, tol=1e-11)
        assert np.max(hf.half_flat_residual(traj, 8)) <= 1e-9
        dphi, dpsi = hf.torsion_residual(traj, 8)
        assert np.max(dphi) <= 1e-9 and np.max(dpsi) <= 1e-9
