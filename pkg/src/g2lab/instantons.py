"""Instanton ODE systems, closed-form solutions, series starts, residuals.

Two invariant ansaetze cover R^4 x S^3:

* SU(2)^3-invariant (spinor-bundle metric):
      A = A_1 x(t) sum_i T_i (x) eta_i^+  +  B_1 y(t) sum_i T_i (x) eta_i^-
  with (x, y) solving
      x' = (A_1'/A_1) x + y^2 - x^2,      y' = ((2A_1' - 3)/A_1) y + 2 x y.

* SU(2)^2 x U(1)-invariant (ALC metric):
      A = A_1 f+ T_1 eta_1^+ + A_2 g+ (T_2 eta_2^+ + T_3 eta_3^+)
        + B_1 f- T_1 eta_1^- + B_2 g- (T_2 eta_2^- + T_3 eta_3^-)
  with the four first-order equations listed in bggg_rhs.

Boundary data at the singular orbit comes in two bundle extensions: p1
(x ~ x_1 t; f+, g+ ~ t) and pid (x, f+, g+ ~ 2/t with even partners).  The
series starter turns that leading data into a degree-(order) expansion by an
order-by-order linear solve against the expanded metric coefficients, and the
intrinsic checker assembles F = dA + [A ^ A]/2 on the coframe and measures
|F ^ psi| (plus the anti-self-duality form |F ^ phi + *F| as a second
opinion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import coframes, geometries, liealg
from .geometries import SU3StructureState, MetricProfile
from .liealg import DiagonalMetric, LieValuedForm, form_from_components
from .series import TSeries, bggg_metric_series, bs_metric_series

__all__ = [
    "BoundaryData",
    "InstantonTrajectory",
    "clarke_rhs",
    "bggg_rhs",
    "rhs_for",
    "clarke_closed_form",
    "alim_closed_form",
    "abelian_closed_form",
    "abelian_bs_form",
    "abelian_bggg_form",
    "lambda2_instantons",
    "spin_connection_curvature",
    "su3_family_u",
    "series_start",
    "SeriesStart",
    "connection_form",
    "instanton_residual",
    "cy_monopole_residual",
    "cone_su3_structure",
    "A_INFTY_COEFF",
]

# the pseudo-Hermitian-Yang-Mills limit a_infty = (2/3) sum T_i eta_i^+
A_INFTY_COEFF = 2.0 / 3.0

# orientation making *phi = psi on (dt, ep1..ep3, em1..em3); fixed by test
ORIENT_S3XS3 = 1.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryData:
    """Leading Taylor data of an instanton at the singular orbit.

    family "bs": p1 params (x1,); pid params (y0,).
    family "bggg": p1 params (f1p, g1p); pid params (b0m,) or (b0m, b2p) --
    when b2p is omitted the value forced by the recurrence is used.
    """

    family: str
    bundle: str
    params: tuple

    def __post_init__(self):
        if self.family not in ("bs", "bggg"):
            raise ValueError("family must be 'bs' or 'bggg'")
        if self.bundle not in ("p1", "pid"):
            raise ValueError("bundle must be 'p1' or 'pid'")
        arity = {("bs", "p1"): (1,), ("bs", "pid"): (1,),
                 ("bggg", "p1"): (2,), ("bggg", "pid"): (1, 2)}[(self.family, self.bundle)]
        if len(self.params) not in arity:
            raise ValueError(f"{self.family}/{self.bundle} takes {arity} parameters")
        if not all(np.isfinite(self.params)):
            raise ValueError("boundary data must be finite")


@dataclass
class InstantonTrajectory:
    """A sampled instanton solution along a metric profile."""

    t: np.ndarray
    values: np.ndarray              # (n, 2) for su2cubed, (n, 4) for u1red
    derivs: np.ndarray
    coords: np.ndarray              # the profile coordinate r (or s) per sample
    system: str                     # "su2cubed" | "u1red"
    profile: MetricProfile
    bundle: str = "p1"
    blown_up: bool = False
    blow_time: float | None = None
    dense: object = None

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("sample grid must be strictly increasing")

    def state(self, i: int) -> SU3StructureState:
        return self.profile.state_at_coord(self.coords[i])


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def clarke_rhs(x: float, y: float, state: SU3StructureState):
    """(x', y') of the SU(2)^3-invariant system at the given metric state."""
    A1, dA1 = state.A[0], state.dA[0]
    if A1 <= 0.0:
        raise ZeroDivisionError("singular point: A_1 = 0 (use a series start)")
    xd = (dA1 / A1) * x + y * y - x * x
    yd = ((2.0 * dA1 - 3.0) / A1) * y + 2.0 * x * y
    return xd, yd


def bggg_rhs(fp: float, gp: float, fm: float, gm: float, state: SU3StructureState):
    """(f+', g+', f-', g-') of the U(1)-reduced system at the metric state."""
    A1, A2 = state.A[0], state.A[1]
    B1, B2 = state.B[0], state.B[1]
    if min(A1, A2, B1, B2) <= 0.0:
        raise ZeroDivisionError("singular point: metric function vanishes")
    S = (A2 * A2 + B1 * B1 + B2 * B2) / (A2 * B1 * B2)
    c_fp = 0.5 * (A1 / (B2 * B2) - A1 / (A2 * A2))
    c_gp = 0.5 * (S - (A1 * A1 + 2.0 * A2 * A2) / (A1 * A2 * A2))
    c_gm = 0.5 * (S + (A1 * A1 + 2.0 * B2 * B2) / (A1 * B2 * B2))
    fpd = -c_fp * fp + gm * gm - gp * gp
    gpd = -c_gp * gp + fm * gm - fp * gp
    fmd = -S * fm + 2.0 * gm * gp
    gmd = -c_gm * gm + gm * fp + gp * fm
    return fpd, gpd, fmd, gmd


def rhs_for(system: str):
    if system == "su2cubed":
        return lambda v, st: np.array(clarke_rhs(v[0], v[1], st))
    if system == "u1red":
        return lambda v, st: np.array(bggg_rhs(v[0], v[1], v[2], v[3], st))
    raise ValueError(f"unknown system {system!r}")


# ---------------------------------------------------------------------------
# closed forms on the spinor-bundle metric (canonical r-form)
# ---------------------------------------------------------------------------

def _bs_w(r: float) -> float:
    return math.sqrt(1.0 - r ** -3)


def clarke_closed_form(x1: float, r: float):
    """x(r) and dx/dt of Clarke's 1-parameter family; y = 0.

    x(r) = 2 x_1 r sqrt(1 - r^-3) / (3 + x_1 (r^2 - 1)).  Defined globally iff
    x_1 >= 0; for x_1 < 0 the denominator has a zero (pole) at finite radius.
    """
    if r < 1.0:
        raise ValueError("r must be >= 1")
    den = 3.0 + x1 * (r * r - 1.0)
    if den == 0.0:
        raise ZeroDivisionError(f"pole of the x_1 = {x1} solution at r = {r}")
    if r == 1.0:
        return 0.0, x1          # x ~ x_1 t at the orbit
    w = _bs_w(r)
    x = 2.0 * x1 * r * w / den
    # d(rw)/dr = w + 3/(2 r^3 w); dx/dt = w dx/dr
    drw = w + 1.5 / (r ** 3 * w)
    dxdr = (2.0 * x1 * drw * den - 2.0 * x1 * r * w * (2.0 * x1 * r)) / (den * den)
    return x, w * dxdr


def alim_closed_form(r: float):
    """eta^+-coefficient c(r) = 2(r^3-1)/(3r(r^2-1)) of A^lim and dc/dt.

    The removable pole at r = 1 is filled with the limit value 1 (the series
    x = 2/t - t/4 + ... times A_1 = t/2 - t^3/8 + ... gives c(1) = 1).
    """
    if r < 1.0:
        raise ValueError("r must be >= 1")
    if r == 1.0:
        return 1.0, 0.0
    q = r * r + r      # c = (2/3)(r^2 + r + 1)/(r^2 + r)
    c = (2.0 / 3.0) * (q + 1.0) / q
    dcdr = -(2.0 / 3.0) * (2.0 * r + 1.0) / (q * q)
    return c, _bs_w(r) * dcdr


def alim_x_of_r(r: float):
    """The trajectory variable x = c/A_1 of A^lim, with dx/dt."""
    st = geometries.BSCanonicalProfile().state_at_coord(r)
    c, dc = alim_closed_form(r)
    x = c / st.A[0]
    dx = (dc * st.A[0] - c * st.dA[0]) / st.A[0] ** 2
    return x, dx


def abelian_bs_form(x: tuple, r: float, coframe=None) -> LieValuedForm:
    """U(1)-instanton A = ((r^3-1)/r) sum x_i eta_i^+ on the spinor bundle."""
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    if r < 1.0:
        raise ValueError("r must be >= 1")
    c = (r ** 3 - 1.0) / r
    dcdr = 2.0 * r + r ** -2
    dc = _bs_w(r) * dcdr
    comps = {(f"ep{i+1}",): [x[i], 0.0, 0.0] for i in range(3)}
    return form_from_components(
        cf, 1, {k: np.array(v) * c for k, v in comps.items()}, algebra="su2",
        t_deriv={k: np.array(v) * dc for k, v in comps.items()})


def abelian_bggg_form(x: tuple, r: float, coframe=None) -> LieValuedForm:
    """U(1)-instanton on the ALC metric:

    A = x_1 q_1(r) eta_1^+ + q_2(r)(x_2 eta_2^+ + x_3 eta_3^+),
    q_1 = (r - 9/4)(r + 9/4)/((r - 3/4)(r + 3/4)), q_2 = (r - 9/4) e^r
    / (sqrt(r) (r + 9/4)^2).  Bounded curvature iff x_2 = x_3 = 0.
    """
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    if r < 2.25:
        raise ValueError("r must be >= 9/4")
    N, D = r * r - 81.0 / 16.0, r * r - 9.0 / 16.0
    q1 = N / D
    dq1 = 2.0 * r / D - N * 2.0 * r / (D * D)
    q2 = (r - 2.25) * math.exp(r) / (math.sqrt(r) * (r + 2.25) ** 2)
    dlog = 1.0 / (r - 2.25) + 1.0 - 0.5 / r - 2.0 / (r + 2.25) if r > 2.25 else 0.0
    dq2 = q2 * dlog
    drdt = math.sqrt(N / D) if N > 0 else 0.0     # dr/dt = A_1
    comps = {("ep1",): np.array([x[0] * q1, 0.0, 0.0]),
             ("ep2",): np.array([x[1] * q2, 0.0, 0.0]),
             ("ep3",): np.array([x[2] * q2, 0.0, 0.0])}
    derivs = {("ep1",): np.array([x[0] * dq1 * drdt, 0.0, 0.0]),
              ("ep2",): np.array([x[1] * dq2 * drdt, 0.0, 0.0]),
              ("ep3",): np.array([x[2] * dq2 * drdt, 0.0, 0.0])}
    return form_from_components(cf, 1, comps, algebra="su2", t_deriv=derivs)


def abelian_closed_form(family: str, x: tuple, r: float, coframe=None) -> LieValuedForm:
    if family == "bs":
        return abelian_bs_form(x, r, coframe)
    if family == "bggg":
        return abelian_bggg_form(x, r, coframe)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# closed forms on the anti-self-dual 2-form bundles
# ---------------------------------------------------------------------------

def su3_family_u(c: float, s: float) -> float:
    """u_c(s) = 1 - 2 c s^2 / (s^2 (1 + c) + 2 (sqrt(1 + s^2) + 1)).

    Profile function of the SU(3)-gauge-group families on the CP^2 bundle:
    u_c(0) = 1, u_0 = 1, u_c(oo) = (1 - c)/(1 + c).
    """
    if s < 0.0 or c < 0.0:
        raise ValueError("need c >= 0 and s >= 0")
    return 1.0 - 2.0 * c * s * s / (s * s * (1.0 + c) + 2.0 * (math.sqrt(1.0 + s * s) + 1.0))


def su3_family_root_term(c: float, s: float):
    """Sign-tracked sqrt(|u_c^2 - 1|) with a flag for a negative radicand.

    On the stated domain u_c <= 1, so u_c^2 - 1 <= 0 and the closed-form
    coefficient sqrt(u_c^2 - 1) is imaginary; the magnitude is returned along
    with radicand_negative so callers can surface the issue rather than hide
    it.
    """
    u = su3_family_u(c, s)
    rad = u * u - 1.0
    return math.sqrt(abs(rad)), rad < 0.0


def lambda2_connection(space: str, s: float, sign: float = 1.0) -> LieValuedForm:
    """The closed-form irreducible instanton on Lambda^2_-(S^4) or (CP^2).

    S^4:  A = om^1 T_1 + sign (1+s^2)^(-1/2) (T_2 om^2 + T_3 om^3);
    CP^2: A = (1/2) s3 T_1 + sign (1+s^2)^(-1/2) (1/2)(T_2 nu_1 + T_3 nu_2),
    both with the coefficient's t-derivative attached (t the arclength).
    """
    u = sign / math.sqrt(1.0 + s * s)
    if space == "lambda2-s4":
        cf = coframes.sp2().with_dt()
        dt_ds = (1.0 + s * s) ** -0.25
        du = sign * (-s) * (1.0 + s * s) ** -1.5 / dt_ds
        comps = {("om1",): [1.0, 0, 0], ("om2",): [0, u, 0], ("om3",): [0, 0, u]}
        deriv = {("om2",): [0, du, 0], ("om3",): [0, 0, du]}
    elif space == "lambda2-cp2":
        cf = coframes.su3_flag().with_dt()
        dt_ds = math.sqrt(2.0) * (1.0 + s * s) ** -0.25
        du = sign * (-s) * (1.0 + s * s) ** -1.5 / dt_ds
        comps = {("s3",): [0.5, 0, 0], ("nu1",): [0, 0.5 * u, 0], ("nu2",): [0, 0, 0.5 * u]}
        deriv = {("nu1",): [0, 0.5 * du, 0], ("nu2",): [0, 0, 0.5 * du]}
    else:
        raise ValueError(f"unknown bundle space {space!r}")
    return form_from_components(cf, 1, comps, algebra="su2", t_deriv=deriv)


def lambda2_instantons(space: str, s: float, sign: float = 1.0) -> dict:
    """Closed-form data at radius s: connection, curvature, residuals.

    Returns a dict with the ODE variable a(s) = sign (1+s^2)^(-1/2), the
    algebraic-constraint residual s^2 f^4 - (1 - a^2), the radial-ODE residual
    da/dt + s f^3 a, the assembled curvature, and |F ^ psi| at the radius.
    """
    if s < 0.0:
        raise ValueError("s must be >= 0")
    f = (1.0 + s * s) ** -0.25
    a = sign / math.sqrt(1.0 + s * s)
    constraint = s * s * f ** 4 - (1.0 - a * a)
    # radial ODE in the fibre coordinate: da/ds = -s f^4 a (equivalently
    # da/dt = -s f^3 a on the S^4 bundle, where dt = f ds)
    dads = sign * (-s) * (1.0 + s * s) ** -1.5
    ode = dads + s * f ** 4 * a
    A = lambda2_connection(space, s, sign)
    F = liealg.curvature(A)
    if s == 0.0:
        # the fibre collapses at the zero section; only the algebraic data is
        # meaningful there
        return {"a": a, "constraint": constraint, "ode_residual": ode,
                "connection": A, "curvature": F, "psi_residual": 0.0,
                "structure": None}
    struct = geometries.lambda2_structure(space, s)
    res = wedge_residual(F, struct)
    return {"a": a, "constraint": constraint, "ode_residual": ode,
            "connection": A, "curvature": F, "psi_residual": res,
            "structure": struct}


def spin_connection_curvature() -> dict:
    """F of the lifted spin connection theta = sum eta^i T_i on Sp(2).

    The curvature is -1/2 sum Omegabar_i T_i (self-dual), so F ^ psi vanishes
    identically on the S^4 bundle.
    """
    cf = coframes.sp2().with_dt()
    theta = form_from_components(
        cf, 1, {("eta1",): [1, 0, 0], ("eta2",): [0, 1, 0], ("eta3",): [0, 0, 1]},
        algebra="su2")
    F = liealg.curvature(theta)
    target_c = {}
    for i, Ob in enumerate(coframes.sp2_sd_forms(cf)):
        for idx, v in Ob.components.items():
            vec = np.zeros(3)
            vec[i] = -0.5 * v[0]
            target_c[idx] = target_c.get(idx, np.zeros(3)) + vec
    target = LieValuedForm(2, "su2", cf, target_c)
    return {"connection": theta, "curvature": F, "target": target,
            "deviation": (F + (-1.0) * target).max_abs()}


def wedge_residual(F: LieValuedForm, struct) -> float:
    """|F ^ psi| on the physical subcoframe of an ASD-bundle structure."""
    R = liealg.wedge(struct.psi, F)
    R7 = liealg.restrict_form(R, struct.physical, tol=1e-9 * max(1.0, F.max_abs()))
    return math.sqrt(liealg.norm_sq(R7, struct.metric))


# ---------------------------------------------------------------------------
# series starts at the singular orbit
# ---------------------------------------------------------------------------

_VAR_NAMES = {"su2cubed": ("x", "y"), "u1red": ("f+", "g+", "f-", "g-")}


def _clarke_series_residual(v: dict, met: dict) -> dict:
    x, y = v["x"], v["y"]
    LA = met["A1"].deriv() / met["A1"]
    LB = (2.0 * met["A1"].deriv() - TSeries.const(3.0, LA.order)) / met["A1"]
    return {"x": x.deriv() - LA * x - y * y + x * x,
            "y": y.deriv() - LB * y - 2.0 * x * y}


def _bggg_series_residual(v: dict, met: dict) -> dict:
    fp, gp, fm, gm = v["f+"], v["g+"], v["f-"], v["g-"]
    A1, A2, B1, B2 = met["A1"], met["A2"], met["B1"], met["B2"]
    S = (A2 * A2 + B1 * B1 + B2 * B2) / (A2 * B1 * B2)
    c_fp = 0.5 * (A1 / (B2 * B2) - A1 / (A2 * A2))
    c_gp = 0.5 * (S - (A1 * A1 + 2.0 * A2 * A2) / (A1 * A2 * A2))
    c_gm = 0.5 * (S + (A1 * A1 + 2.0 * B2 * B2) / (A1 * B2 * B2))
    return {"f+": fp.deriv() + c_fp * fp - gm * gm + gp * gp,
            "g+": gp.deriv() + c_gp * gp - fm * gm + fp * gp,
            "f-": fm.deriv() + S * fm - 2.0 * gm * gp,
            "g-": gm.deriv() + c_gm * gm - gm * fp - gp * fm}


@dataclass
class SeriesStart:
    """Truncated expansion of an instanton branch at the singular orbit."""

    data: BoundaryData
    system: str
    series: dict                    # var name -> TSeries
    order: int
    max_exponent: int

    def values(self, t: float) -> np.ndarray:
        return np.array([self.series[n](t) for n in _VAR_NAMES[self.system]])

    def derivs(self, t: float) -> np.ndarray:
        return np.array([self.series[n].deriv()(t) for n in _VAR_NAMES[self.system]])

    def suggest_t0(self, tol: float = 1e-12) -> float:
        """Largest t0 <= 0.2 at which the top retained term is below tol
        relative to the leading one, per variable."""
        t0 = 0.2
        for name in _VAR_NAMES[self.system]:
            s = self.series[name]
            lead = None
            for k in range(s.order):
                if s.c[k] != 0.0:
                    lead = (s.m + 2 * k, abs(s.c[k]))
                    break
            if lead is None:
                continue
            k_top = s.order - 1
            if s.c[k_top] == 0.0:
                continue
            e_top = s.m + 2 * k_top
            # |c_top| t0^e_top <= tol * |c_lead| t0^e_lead
            ratio = tol * lead[1] / abs(s.c[k_top])
            if e_top > lead[0]:
                t0 = min(t0, ratio ** (1.0 / (e_top - lead[0])))
        return t0


def _metric_series_for(family: str, order: int) -> dict:
    if family == "bs":
        m = bs_metric_series(order + 4)
        return {"A1": m["A1"], "A2": m["A1"], "B1": m["B1"], "B2": m["B1"], "u": m["u"]}
    if family == "bggg":
        m = bggg_metric_series(order + 4)
        return m
    raise ValueError(f"no singular-orbit series for family {family!r}")


def series_start(data: BoundaryData, order: int = 5) -> SeriesStart:
    """Expand the instanton branch selected by ``data`` to the given order.

    ``order`` counts retained powers beyond the leading term (default 5 gives
    terms through t^(lead + 2*order)).  The expansion substitutes the ansatz
    into the ODE system and solves the linear recurrence order by order; free
    coefficients beyond those listed in ``data`` are rejected, and forced
    relations (the pid branches) are resolved by the recurrence itself.
    """
    ncoef = order + 1
    met = _metric_series_for(data.family, 2 * ncoef + 6)
    if data.family == "bs":
        system, residual = "su2cubed", _clarke_series_residual
        if data.bundle == "p1":
            spec = {"x": (1, {0: float(data.params[0])}), "y": (2, {})}
        else:
            spec = {"x": (-1, {0: 2.0}), "y": (0, {0: float(data.params[0])})}
    else:
        system, residual = "u1red", _bggg_series_residual
        if data.bundle == "p1":
            spec = {"f+": (1, {0: float(data.params[0])}),
                    "g+": (1, {0: float(data.params[1])}),
                    "f-": (2, {}), "g-": (2, {})}
        else:
            # The smooth-extension lemma leaves b2+ free, but the instanton
            # recurrence determines it from b0- (the family is 1-parameter);
            # a supplied b2+ is validated against the recurrence below.
            b0m = float(data.params[0])
            spec = {"f+": (-1, {0: 2.0}), "g+": (-1, {0: 2.0}),
                    "f-": (0, {0: b0m}), "g-": (0, {0: b0m})}

    names = _VAR_NAMES[system]
    vars_ = {}
    fixed = set()
    for n in names:
        m, fx = spec[n]
        s = TSeries(m, np.zeros(ncoef))
        for k, val in fx.items():
            s.c[k] = val
            fixed.add((n, k))
        vars_[n] = s

    slots_by_exp: dict = {}
    for n in names:
        m = spec[n][0]
        for k in range(ncoef):
            if (n, k) in fixed:
                continue
            slots_by_exp.setdefault(m + 2 * k, []).append((n, k))

    def residual_coeffs(exp: int, which):
        R = residual(vars_, met)
        return np.array([R[n].coefficient(exp) for n in which])

    for exp in sorted(slots_by_exp):
        slots = slots_by_exp[exp]
        which = [n for (n, _) in slots]
        base = residual_coeffs(exp - 1, which)
        M = np.zeros((len(slots), len(slots)))
        for j, (n, k) in enumerate(slots):
            vars_[n].c[k] = 1.0
            M[:, j] = residual_coeffs(exp - 1, which) - base
            vars_[n].c[k] = 0.0
        sol, res, rank, _ = np.linalg.lstsq(M, -base, rcond=1e-10)
        if rank < len(slots):
            # singular block: require consistency, then keep the minimal-norm
            # solution (free directions not pinned by data stay at zero)
            if np.linalg.norm(M @ sol + base) > 1e-9 * max(1.0, np.linalg.norm(base)):
                raise ValueError(
                    f"series recurrence inconsistent at exponent {exp} for {data}")
        for (n, k), val in zip(slots, sol):
            vars_[n].c[k] = val

    # sanity: all computable residual coefficients must vanish
    R = residual(vars_, met)
    max_e = min(spec[n][0] + 2 * (ncoef - 1) for n in names) - 1
    worst = 0.0
    for n in names:
        for e in range(R[n].m, max_e + 1):
            worst = max(worst, abs(R[n].coefficient(e)))
    if worst > 1e-8:
        raise ValueError(f"series recurrence failed to close (residual {worst:.2e})")

    if data.family == "bggg" and data.bundle == "pid" and len(data.params) == 2:
        a1ppp = 6.0 * met["A1"].coefficient(3)
        b2p_eff = vars_["f+"].c[1] + (2.0 / 3.0) * a1ppp
        if abs(float(data.params[1]) - b2p_eff) > 1e-8 * (1.0 + abs(b2p_eff)):
            raise ValueError(
                f"b2+ = {data.params[1]} is incompatible with b0- = {data.params[0]}: "
                f"the instanton recurrence forces b2+ = {b2p_eff:.12g}")
    return SeriesStart(data, system, vars_, order,
                       max_e + 1)


# ---------------------------------------------------------------------------
# connection assembly and the intrinsic residual
# ---------------------------------------------------------------------------

def connection_form(values, derivs, state: SU3StructureState, system: str,
                    coframe=None) -> LieValuedForm:
    """Assemble the invariant connection 1-form with t-derivative slots."""
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    if system == "su2cubed":
        x, y = values
        dx, dy = derivs
        A1, B1, dA1, dB1 = state.A[0], state.B[0], state.dA[0], state.dB[0]
        cp, dcp = A1 * x, dA1 * x + A1 * dx
        cm, dcm = B1 * y, dB1 * y + B1 * dy
        comps, ders = {}, {}
        for i in range(3):
            ei = np.zeros(3)
            ei[i] = 1.0
            comps[(f"ep{i+1}",)] = cp * ei
            ders[(f"ep{i+1}",)] = dcp * ei
            comps[(f"em{i+1}",)] = cm * ei
            ders[(f"em{i+1}",)] = dcm * ei
        return form_from_components(cf, 1, comps, algebra="su2", t_deriv=ders)
    if system == "u1red":
        fp, gp, fm, gm = values
        dfp, dgp, dfm, dgm = derivs
        A1, A2, B1, B2 = state.A[0], state.A[1], state.B[0], state.B[1]
        dA1, dA2, dB1, dB2 = state.dA[0], state.dA[1], state.dB[0], state.dB[1]
        vals = {("ep1",): (A1 * fp, dA1 * fp + A1 * dfp, 0),
                ("ep2",): (A2 * gp, dA2 * gp + A2 * dgp, 1),
                ("ep3",): (A2 * gp, dA2 * gp + A2 * dgp, 2),
                ("em1",): (B1 * fm, dB1 * fm + B1 * dfm, 0),
                ("em2",): (B2 * gm, dB2 * gm + B2 * dgm, 1),
                ("em3",): (B2 * gm, dB2 * gm + B2 * dgm, 2)}
        comps, ders = {}, {}
        for key, (v, dv, i) in vals.items():
            ei = np.zeros(3)
            ei[i] = 1.0
            comps[key] = v * ei
            ders[key] = dv * ei
        return form_from_components(cf, 1, comps, algebra="su2", t_deriv=ders)
    raise ValueError(f"unknown system {system!r}")


def instanton_residual(values, derivs, state: SU3StructureState, system: str,
                       connection: LieValuedForm | None = None) -> dict:
    """|F ^ psi| and |F ^ phi + *F| for one sample on R^4 x S^3.

    ``connection`` overrides the invariant assembly (used for the abelian
    closed forms, which carry their own radial profiles).
    """
    cf = coframes.s3xs3().with_dt()
    A = connection if connection is not None else connection_form(values, derivs, state, system, cf)
    F = liealg.curvature(A)
    phi, psi = geometries.g2_from_su3(state, cf)
    metric = geometries.s3xs3_metric(state)
    R = liealg.wedge(psi, F)
    res_psi = math.sqrt(liealg.norm_sq(R, metric))
    asd = liealg.wedge(phi, F) + liealg.hodge_star(F, metric, ORIENT_S3XS3)
    res_asd = math.sqrt(liealg.norm_sq(asd, metric))
    return {"psi_residual": res_psi, "asd_residual": res_asd,
            "curvature_norm": math.sqrt(liealg.norm_sq(F, metric)),
            "curvature": F}


def constraint_residual(values, derivs, state: SU3StructureState, system: str) -> float:
    """|F_a ^ omega^2| at a sample (the conserved transversality constraint)."""
    cf = coframes.s3xs3().with_dt()
    A = connection_form(values, derivs, state, system, cf)
    F = liealg.curvature(A)
    Fa = F.spatial_part()
    omega, _, _ = geometries.su3_forms(state, cf)
    om2 = liealg.wedge(omega, omega)
    R = liealg.wedge(om2, Fa)
    return math.sqrt(liealg.norm_sq(R, geometries.s3xs3_metric(state)))


# ---------------------------------------------------------------------------
# Calabi-Yau monopoles on the conifold
# ---------------------------------------------------------------------------

def cone_su3_structure(r: float, coframe=None) -> dict:
    """The conical SU(3)-structure (omega, Omega_2) over Sasaki-Einstein
    S^2 x S^3, on the dt-extended coframe with dt read as dr:

    omega = r^2 omega_1 - r dr ^ alpha,
    Omega_2 = r^2 dr ^ omega_2 + r^3 alpha ^ omega_3  (both closed).
    """
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    se = coframes.sasaki_einstein_forms(cf)
    al, w1, w2, w3 = se["alpha"], se["omega1"], se["omega2"], se["omega3"]
    omega_c = {}
    for idx, v in w1.components.items():
        omega_c[idx] = r * r * v
    for idx, v in al.components.items():
        omega_c[(0,) + idx] = -r * v
    omega_d = {idx: 2.0 * v / r for idx, v in omega_c.items() if idx[0] != 0}
    for idx, v in al.components.items():
        omega_d[(0,) + idx] = -v
    omega = LieValuedForm(2, "scalar", cf, omega_c, omega_d)

    O2_c, O2_d = {}, {}
    for idx, v in w2.components.items():
        O2_c[(0,) + idx] = r * r * v
        O2_d[(0,) + idx] = 2.0 * r * v
    aw3 = liealg.wedge(al, w3)
    for idx, v in aw3.components.items():
        O2_c[idx] = O2_c.get(idx, 0.0) + r ** 3 * v
        O2_d[idx] = O2_d.get(idx, 0.0) + 3.0 * r * r * v
    Omega2 = LieValuedForm(3, "scalar", cf, O2_c, O2_d)

    scale_h = 2.0 * r / math.sqrt(3.0)
    scales = {"dt": 1.0, "ep1": 1.0, "em1": 4.0 * r / 3.0,
              "ep2": scale_h, "ep3": scale_h, "em2": scale_h, "em3": scale_h}
    metric = DiagonalMetric(np.array([scales[lab] for lab in cf.labels]))
    return {"omega": omega, "Omega2": Omega2, "metric": metric, "coframe": cf}


def cy_monopole_residual(a: LieValuedForm, Phi: LieValuedForm, r: float):
    """Residual norms of the Calabi-Yau monopole equations at radius r:

    (|F_a ^ Omega_2 + (1/2) d_a Phi ^ omega^2|, |F_a ^ omega^2|).
    """
    if Phi.degree != 0:
        raise ValueError("Phi must be a 0-form")
    cone = cone_su3_structure(r, a.coframe)
    omega, Omega2, metric = cone["omega"], cone["Omega2"], cone["metric"]
    om2 = liealg.wedge(omega, omega)
    if a.algebra == "scalar" and Phi.algebra == "scalar":
        F = liealg.d_invariant(a)
        dPhi = liealg.d_invariant(Phi)
    else:
        a_su = liealg.embed_u1(a) if a.algebra == "u1" else a
        P_su = liealg.embed_u1(Phi) if Phi.algebra == "u1" else Phi
        if a_su.algebra != "su2" or P_su.algebra != "su2":
            raise ValueError("a and Phi must share a compatible algebra")
        F = liealg.curvature(a_su)
        dPhi = liealg.d_invariant(P_su) + liealg.bracket_wedge(a_su, P_su)
    R1 = liealg.wedge(Omega2, F) + 0.5 * liealg.wedge(om2, dPhi)
    R2 = liealg.wedge(om2, F)
    return (math.sqrt(liealg.norm_sq(R1, metric)),
            math.sqrt(liealg.norm_sq(R2, metric)))
