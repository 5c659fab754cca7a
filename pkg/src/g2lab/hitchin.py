"""The reduced Hitchin-flow system and torsion monitoring.

For the U(1)-reduced invariant structures (A_2 = A_3, B_2 = B_3) the
evolution equations close on four radial functions:

    A_1' = (A_1^2/A_2^2 - A_1^2/B_2^2)/2,
    A_2' = ((B_1^2 + B_2^2 - A_2^2)/(B_1 B_2) - A_1/A_2)/2,
    B_1' = (A_2^2 + B_2^2 - B_1^2)/(A_2 B_2),
    B_2' = ((A_2^2 + B_1^2 - B_2^2)/(A_2 B_1) + A_1/B_2)/2,

and in the fully symmetric case (all A equal, all B equal) reduce further to
A' = (1 - A^2/B^2)/2, B' = A/B.  Integrated structures are monitored through
|d phi| and |d psi| assembled by the invariant exterior calculus, and through
persistence of the half-flat constraint d gamma_1 = 0 = d omega^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import geometries, liealg
from .geometries import SU3StructureState

__all__ = [
    "FlowTrajectory",
    "hitchin_rhs",
    "hitchin_rhs_full",
    "integrate_flow",
    "torsion_residual",
    "half_flat_residual",
    "BLOWUP_CAP",
]

BLOWUP_CAP = 1.0e8


def hitchin_rhs(state: SU3StructureState):
    """(A_1', A_2', B_1', B_2') of the U(1)-reduced flow at a state."""
    A1, A2 = state.A[0], state.A[1]
    B1, B2 = state.B[0], state.B[1]
    if min(A1, A2, B1, B2) <= 0.0:
        raise ZeroDivisionError("singular orbit: flow right-hand side undefined")
    dA1 = 0.5 * (A1 * A1 / (A2 * A2) - A1 * A1 / (B2 * B2))
    dA2 = 0.5 * ((B1 * B1 + B2 * B2 - A2 * A2) / (B1 * B2) - A1 / A2)
    dB1 = (A2 * A2 + B2 * B2 - B1 * B1) / (A2 * B2)
    dB2 = 0.5 * ((A2 * A2 + B1 * B1 - B2 * B2) / (A2 * B1) + A1 / B2)
    return dA1, dA2, dB1, dB2


def hitchin_rhs_full(A: float, B: float):
    """(A', B') of the SU(2)^3-symmetric flow: A' = (1 - A^2/B^2)/2, B' = A/B."""
    if A <= 0.0 or B <= 0.0:
        raise ZeroDivisionError("singular orbit: flow right-hand side undefined")
    return 0.5 * (1.0 - A * A / (B * B)), A / B


def state_with_flow_derivs(vec) -> SU3StructureState:
    """Build a U(1)-reduced state whose t-derivatives come from the flow."""
    A1, A2, B1, B2 = vec
    st = SU3StructureState((A1, A2, A2), (B1, B2, B2))
    dA1, dA2, dB1, dB2 = hitchin_rhs(st)
    return SU3StructureState((A1, A2, A2), (B1, B2, B2),
                             (dA1, dA2, dA2), (dB1, dB2, dB2))


@dataclass
class FlowTrajectory:
    """An integrated Hitchin-flow solution with residual diagnostics."""

    t: np.ndarray
    states: list
    truncated: bool = False
    dense: object = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("flow grid must be strictly increasing")
        for st in self.states:
            if min(st.A) <= 0.0 or min(st.B) <= 0.0:
                raise ValueError("invalid state on the trajectory")

    def state_at(self, t: float) -> SU3StructureState:
        return state_with_flow_derivs(self.dense(t))


def integrate_flow(initial: SU3StructureState, t0: float, t1: float,
                   tol: float = 1e-11, n_samples: int = 80) -> FlowTrajectory:
    """Integrate the U(1)-reduced Hitchin flow from a valid state at t0.

    Blow-up (any function reaching BLOWUP_CAP or collapsing to zero) truncates
    the trajectory and sets the flag; the per-step local error is bounded by
    ``tol`` (relative and absolute).
    """
    if min(initial.A) <= 0.0 or min(initial.B) <= 0.0:
        raise ValueError("initial state must be strictly positive")
    y0 = np.array([initial.A[0], initial.A[1], initial.B[0], initial.B[1]])

    def odefun(t, y):
        return np.array(hitchin_rhs(SU3StructureState((y[0], y[1], y[1]),
                                                      (y[2], y[3], y[3]))))

    def blow(t, y):
        return min(np.min(y) - 1e-12, BLOWUP_CAP - np.max(y))
    blow.terminal = True
    blow.direction = -1

    sol = solve_ivp(odefun, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol,
                    dense_output=True, events=blow)
    truncated = bool(sol.t_events[0].size)
    ts = np.linspace(t0, sol.t[-1], n_samples)
    states = [state_with_flow_derivs(sol.sol(t)) for t in ts]
    traj = FlowTrajectory(ts, states, truncated, sol.sol)
    res = torsion_residual(traj, n_samples=min(12, n_samples))
    traj.diagnostics = {"max_dphi": float(np.max(res[0])),
                        "max_dpsi": float(np.max(res[1])),
                        "max_half_flat": float(np.max(half_flat_residual(traj, 6)))}
    return traj


def torsion_residual(traj: FlowTrajectory, n_samples: int | None = None):
    """Per-sample (|d phi|, |d psi|) along a flow trajectory."""
    if n_samples is None:
        ts = traj.t
    else:
        ts = np.linspace(traj.t[0], traj.t[-1], n_samples)
    cf = geometries.s3xs3_metric  # noqa: F841  (metric factory used below)
    out_phi, out_psi = [], []
    for t in ts:
        st = traj.state_at(t)
        phi, psi = geometries.g2_from_su3(st)
        m = geometries.s3xs3_metric(st)
        out_phi.append(math.sqrt(liealg.norm_sq(liealg.d_invariant(phi), m)))
        out_psi.append(math.sqrt(liealg.norm_sq(liealg.d_invariant(psi), m)))
    return np.array(out_phi), np.array(out_psi)


def torsion_residual_state(state: SU3StructureState):
    """(|d phi|, |d psi|) of a single state carrying its own derivatives."""
    phi, psi = geometries.g2_from_su3(state)
    m = geometries.s3xs3_metric(state)
    return (math.sqrt(liealg.norm_sq(liealg.d_invariant(phi), m)),
            math.sqrt(liealg.norm_sq(liealg.d_invariant(psi), m)))


def half_flat_residual(traj: FlowTrajectory, n_samples: int = 10) -> np.ndarray:
    """max(|d gamma_1|, |d omega^2|) at samples along the trajectory."""
    ts = np.linspace(traj.t[0], traj.t[-1], n_samples)
    out = []
    for t in ts:
        st = traj.state_at(t)
        omega, g1, _ = geometries.su3_forms(st)
        m = geometries.s3xs3_metric(st)
        om2 = liealg.wedge(omega, omega)
        # spatial derivative only: strip the dt ^ (time-derivative) part
        dg1 = liealg.d_invariant(
            liealg.LieValuedForm(g1.degree, g1.algebra, g1.coframe, g1.components))
        dom2 = liealg.d_invariant(
            liealg.LieValuedForm(4, om2.algebra, om2.coframe, om2.components))
        out.append(max(math.sqrt(liealg.norm_sq(dg1, m)),
                       math.sqrt(liealg.norm_sq(dom2, m))))
    return np.array(out)
