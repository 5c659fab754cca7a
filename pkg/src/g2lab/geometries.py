"""Closed-form metric profiles and SU(3)/G2-structure assembly.

Four explicit cohomogeneity-one geometries are shipped:

* the R^4 x S^3 spinor-bundle metric in two parametrisations: the scaling
  family A_1(s) = (s/sqrt3) sqrt(1 - c^3 s^-3), B_1(s) = s for s >= c, and the
  canonical r-form A = (r/3) sqrt(1 - r^-3), B = r/sqrt3 on r in [1, oo),
  related by a homothety (the r-form is the one that extends smoothly over the
  singular orbit with A ~ t/2 and is used for all instanton work);
* the ALC metric on R^4 x S^3 (r-form on [9/4, oo) plus the (c, lambda)
  scaling family in s);
* the anti-self-dual 2-form bundles over S^4 and CP^2, via radial profiles
  (f, a, b) on their twistor coframes.

States on S^3 x S^3 package the six radial functions together with their
t-derivatives, so the invariant 3-/4-forms they generate can be
differentiated exactly.  The orbit metric is
g_t = sum (2A_i)^2 (eta_i^+)^2 + (2B_i)^2 (eta_i^-)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import coframes, liealg
from .liealg import DiagonalMetric, LieValuedForm, form_from_components

__all__ = [
    "SU3StructureState",
    "su3_forms",
    "g2_from_su3",
    "s3xs3_metric",
    "MetricProfile",
    "BSSpinorProfile",
    "BSCanonicalProfile",
    "BGGGProfile",
    "BGGGCanonicalProfile",
    "ConeProfile",
    "bs_spinor_profile",
    "bggg_profile",
    "lambda2s4_profile",
    "lambda2cp2_profile",
    "t_of_r",
    "sasaki_einstein_s2s3",
    "bggg_alc_coefficients",
    "alc_model_coefficients",
    "Lambda2Structure",
    "lambda2_structure",
    "ALCData",
]

_SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# SU(3)-structure states on S^3 x S^3
# ---------------------------------------------------------------------------

@dataclass
class SU3StructureState:
    """The six radial functions at one t, with optional t-derivatives.

    symmetry is derived: "full" when all A and all B agree (SU(2)^3 symmetry),
    "u1" when A2 = A3 and B2 = B3, else "generic".
    """

    A: tuple
    B: tuple
    dA: tuple | None = None
    dB: tuple | None = None

    def __post_init__(self):
        self.A = tuple(float(x) for x in self.A)
        self.B = tuple(float(x) for x in self.B)
        if len(self.A) != 3 or len(self.B) != 3:
            raise ValueError("need three A and three B values")
        if min(self.A) <= 0.0 or min(self.B) <= 0.0:
            raise ValueError("metric functions must be strictly positive")
        if self.dA is not None:
            self.dA = tuple(float(x) for x in self.dA)
        if self.dB is not None:
            self.dB = tuple(float(x) for x in self.dB)

    @property
    def symmetry(self) -> str:
        tol = 1e-12 * max(max(self.A), max(self.B))
        if (abs(self.A[0] - self.A[1]) <= tol and abs(self.A[1] - self.A[2]) <= tol
                and abs(self.B[0] - self.B[1]) <= tol and abs(self.B[1] - self.B[2]) <= tol):
            return "full"
        if abs(self.A[1] - self.A[2]) <= tol and abs(self.B[1] - self.B[2]) <= tol:
            return "u1"
        return "generic"

    @property
    def has_derivs(self) -> bool:
        return self.dA is not None and self.dB is not None

    def as_vector(self) -> np.ndarray:
        return np.array([*self.A, *self.B])


def s3xs3_metric(state: SU3StructureState, with_dt: bool = True) -> DiagonalMetric:
    """Diagonal metric scales (1,) + (2A_i,) + (2B_i,) on the (dt-)coframe."""
    scales = [2.0 * a for a in state.A] + [2.0 * b for b in state.B]
    if with_dt:
        scales = [1.0] + scales
    return DiagonalMetric(np.array(scales))


def _pm_indices(cf):
    ep = [cf.index(f"ep{i}") for i in (1, 2, 3)]
    em = [cf.index(f"em{i}") for i in (1, 2, 3)]
    return ep, em


def su3_forms(state: SU3StructureState, coframe=None):
    """The invariant SU(3)-structure (omega, gamma_1, gamma_2) of a state.

    omega   = 4 sum_i A_i B_i  eta_i^- ^ eta_i^+
    gamma_1 = 8 B_1B_2B_3 eta_123^-  - 8 sum_cyc A_iA_jB_k eta_i^+ eta_j^+ eta_k^-
    gamma_2 = -8 A_1A_2A_3 eta_123^+ + 8 sum_cyc B_iB_jA_k eta_i^- eta_j^- eta_k^+

    (the epsilon-sums written out; cyc runs over (1,2,3), (2,3,1), (3,1,2)).
    t-derivatives of all coefficients are attached when the state carries
    derivatives.
    """
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    ep, em = _pm_indices(cf)
    A, B = state.A, state.B
    dA = state.dA if state.dA is not None else (0.0, 0.0, 0.0)
    dB = state.dB if state.dB is not None else (0.0, 0.0, 0.0)
    with_d = state.has_derivs

    def prod_rule(vals, dvals, idxs):
        v = 1.0
        for i in idxs:
            v *= vals[i]
        dv = 0.0
        for i in idxs:
            term = dvals[i]
            for j in idxs:
                if j != i:
                    term *= vals[j]
            dv += term
        return v, dv

    AB = [(A[i] * B[i], dA[i] * B[i] + A[i] * dB[i]) for i in range(3)]
    omega_c = {(em[i], ep[i]): 4.0 * AB[i][0] for i in range(3)}
    omega_d = {(em[i], ep[i]): 4.0 * AB[i][1] for i in range(3)}

    cyc = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    BBB, dBBB = prod_rule(B, dB, (0, 1, 2))
    AAA, dAAA = prod_rule(A, dA, (0, 1, 2))
    g1_c = {(em[0], em[1], em[2]): 8.0 * BBB}
    g1_d = {(em[0], em[1], em[2]): 8.0 * dBBB}
    g2_c = {(ep[0], ep[1], ep[2]): -8.0 * AAA}
    g2_d = {(ep[0], ep[1], ep[2]): -8.0 * dAAA}
    for (i, j, k) in cyc:
        v = A[i] * A[j] * B[k]
        dv = dA[i] * A[j] * B[k] + A[i] * dA[j] * B[k] + A[i] * A[j] * dB[k]
        g1_c[(ep[i], ep[j], em[k])] = -8.0 * v
        g1_d[(ep[i], ep[j], em[k])] = -8.0 * dv
        w = B[i] * B[j] * A[k]
        dw = dB[i] * B[j] * A[k] + B[i] * dB[j] * A[k] + B[i] * B[j] * dA[k]
        g2_c[(em[i], em[j], ep[k])] = 8.0 * w
        g2_d[(em[i], em[j], ep[k])] = 8.0 * dw

    mk = lambda deg, c, d: LieValuedForm(
        deg, "scalar", cf,
        {k: np.array([v]) for k, v in c.items()},
        {k: np.array([v]) for k, v in d.items()} if with_d else None)
    return mk(2, omega_c, omega_d), mk(3, g1_c, g1_d), mk(3, g2_c, g2_d)


def g2_from_su3(state: SU3StructureState, coframe=None):
    """phi = dt ^ omega + gamma_1 and psi = omega^2/2 - dt ^ gamma_2."""
    cf = coframe if coframe is not None else coframes.s3xs3().with_dt()
    if not cf.has_dt:
        raise ValueError("g2_from_su3 needs the dt-extended coframe")
    omega, g1, g2 = su3_forms(state, cf)
    with_d = state.has_derivs

    phi_c, phi_d = {}, {}
    for idx, v in omega.components.items():
        phi_c[(0,) + idx] = v
    for idx, v in g1.components.items():
        phi_c[idx] = phi_c.get(idx, 0.0) + v
    if with_d:
        phi_d = {idx: v for idx, v in (g1.t_deriv or {}).items()}
        for idx, v in (omega.t_deriv or {}).items():
            phi_d[(0,) + idx] = v
    phi = LieValuedForm(3, "scalar", cf, phi_c, phi_d if with_d else None)

    om2 = liealg.wedge(omega, omega, track_deriv=with_d)
    psi_c = {idx: 0.5 * v for idx, v in om2.components.items()}
    psi_d = {idx: 0.5 * v for idx, v in (om2.t_deriv or {}).items()} if with_d else {}
    for idx, v in g2.components.items():
        psi_c[(0,) + idx] = psi_c.get((0,) + idx, 0.0) - v
    if with_d:
        for idx, v in (g2.t_deriv or {}).items():
            psi_d[(0,) + idx] = psi_d.get((0,) + idx, 0.0) - v
    psi = LieValuedForm(4, "scalar", cf, psi_c, psi_d if with_d else None)
    return phi, psi


# ---------------------------------------------------------------------------
# metric profiles on R^4 x S^3
# ---------------------------------------------------------------------------

class MetricProfile:
    """A closed-form cohomogeneity-one metric in a radial coordinate.

    Subclasses provide the six functions and their t-derivatives at a
    coordinate value, the arc-length element dt/dcoord, and the coordinate
    domain.  t is normalised to 0 at the singular orbit (domain start).
    """

    family = "abstract"
    coord = "r"
    coord_start = 0.0

    def state_at_coord(self, x: float) -> SU3StructureState:
        raise NotImplementedError

    def dt_dcoord(self, x: float) -> float:
        raise NotImplementedError

    def _sqrt_weight(self, u: float) -> float:
        """Integrand after the substitution coord = start + u^2 (regular)."""
        x = self.coord_start + u * u
        return 2.0 * u * self.dt_dcoord(x)

    def t_of_coord(self, x: float) -> float:
        if x < self.coord_start - 1e-12:
            raise ValueError(f"{self.coord} = {x} below domain start {self.coord_start}")
        x = max(x, self.coord_start)
        val, _ = quad(self._sqrt_weight, 0.0, math.sqrt(x - self.coord_start),
                      epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def coord_of_t(self, t: float) -> float:
        if t < 0.0:
            raise ValueError("t must be >= 0")
        if t == 0.0:
            return self.coord_start
        hi = self.coord_start + max(t, 1.0)
        while self.t_of_coord(hi) < t:
            hi = self.coord_start + 2.0 * (hi - self.coord_start)
        return brentq(lambda x: self.t_of_coord(x) - t, self.coord_start, hi,
                      xtol=1e-13, rtol=8.9e-16)

    def state_at_t(self, t: float) -> SU3StructureState:
        return self.state_at_coord(self.coord_of_t(t))

    @property
    def orbit_scale(self) -> float:
        """2 B_1 at the singular orbit (the metric scale of the surviving S^3)."""
        eps = 1e-9
        return 2.0 * self.state_at_coord(self.coord_start + eps).B[0]


class BSCanonicalProfile(MetricProfile):
    """Spinor-bundle metric, canonical r-form on [1, oo).

    A = (r/3) sqrt(1 - r^-3), B = r/sqrt3, dt/dr = (1 - r^-3)^(-1/2); extends
    smoothly over the singular orbit with A ~ t/2, B(0) = 1/sqrt3.
    """

    family = "bs"
    coord = "r"
    coord_start = 1.0

    def dt_dcoord(self, r: float) -> float:
        return 1.0 / math.sqrt(1.0 - r ** -3)

    def _sqrt_weight(self, u: float) -> float:
        # dt = ds/sqrt(1-s^-3); s = 1 + u^2 removes the endpoint singularity:
        # dt = 2 s^(3/2) du / sqrt(s^2 + s + 1)
        s = 1.0 + u * u
        return 2.0 * s ** 1.5 / math.sqrt(s * s + s + 1.0)

    @property
    def orbit_scale(self) -> float:
        return 2.0 / _SQRT3

    def state_at_coord(self, r: float) -> SU3StructureState:
        if r < 1.0:
            raise ValueError("r must be >= 1")
        w = math.sqrt(max(1.0 - r ** -3, 0.0))
        A = r / 3.0 * w
        B = r / _SQRT3
        dA = 1.0 / 3.0 + 1.0 / (6.0 * r ** 3)       # dA/dt, exact
        dB = w / _SQRT3
        return SU3StructureState((A,) * 3, (B,) * 3, (dA,) * 3, (dB,) * 3)


class BSSpinorProfile(MetricProfile):
    """Spinor-bundle scaling family: A = (s/sqrt3) sqrt(1-c^3 s^-3), B = s.

    Defined for s >= c > 0; c = 0 degenerates to the cone.  dt/ds =
    sqrt(3)/sqrt(1 - c^3 s^-3) (from B' = A/B along the flow).
    """

    family = "bs-spinor"
    coord = "s"

    def __init__(self, c: float):
        if c < 0.0:
            raise ValueError("c must be >= 0")
        self.c = float(c)
        self.coord_start = self.c

    def dt_dcoord(self, s: float) -> float:
        return _SQRT3 / math.sqrt(1.0 - (self.c / s) ** 3)

    def _sqrt_weight(self, u: float) -> float:
        s = self.c + u * u
        if self.c == 0.0:
            return 2.0 * u * _SQRT3
        q = s * s + s * self.c + self.c * self.c    # (s^3 - c^3)/(s - c)
        return 2.0 * _SQRT3 * s ** 1.5 / math.sqrt(q)

    def state_at_coord(self, s: float) -> SU3StructureState:
        c = self.c
        if s < c:
            raise ValueError(f"s must be >= c = {c}")
        if s == 0.0:
            raise ValueError("cone apex: state undefined at s = 0")
        w = math.sqrt(max(1.0 - (c / s) ** 3, 0.0))
        A = s / _SQRT3 * w
        B = s
        dA = 1.0 / 3.0 + c ** 3 / (6.0 * s ** 3)
        dB = w / _SQRT3
        return SU3StructureState((A,) * 3, (B,) * 3, (dA,) * 3, (dB,) * 3)


class BGGGCanonicalProfile(MetricProfile):
    """ALC metric, canonical r-form on [9/4, oo).

    A_1 = sqrt((r-9/4)(r+9/4)) / sqrt((r-3/4)(r+3/4)),
    A_2 = A_3 = sqrt((r-9/4)(r+3/4)/3), B_1 = 2r/3,
    B_2 = B_3 = sqrt((r-3/4)(r+9/4)/3), dt/dr = 1/A_1.
    """

    family = "bggg"
    coord = "r"
    coord_start = 2.25

    def dt_dcoord(self, r: float) -> float:
        return math.sqrt((r * r - 9.0 / 16.0) / (r * r - 81.0 / 16.0))

    def _sqrt_weight(self, u: float) -> float:
        r = 2.25 + u * u
        return 2.0 * math.sqrt((r * r - 9.0 / 16.0) / (r + 2.25))

    @property
    def orbit_scale(self) -> float:
        return 3.0

    def state_at_coord(self, r: float) -> SU3StructureState:
        if r < 2.25:
            raise ValueError("r must be >= 9/4")
        N = r * r - 81.0 / 16.0
        D = r * r - 9.0 / 16.0
        A1 = math.sqrt(max(N, 0.0) / D)
        A2sq = (r - 2.25) * (r + 0.75) / 3.0
        B2sq = (r - 0.75) * (r + 2.25) / 3.0
        A2 = math.sqrt(max(A2sq, 0.0))
        B1 = 2.0 * r / 3.0
        B2 = math.sqrt(B2sq)
        if A1 == 0.0 or A2 == 0.0:
            raise ValueError("state undefined on the singular orbit; use series data")
        # d/dt = A1 d/dr; d(A1^2)/dr = 9r/D^2, d(A2^2)/dr = (2r - 3/2)/3
        dA1 = 4.5 * r / (D * D)
        dA2 = A1 * (2.0 * r - 1.5) / (6.0 * A2)
        dB1 = A1 * (2.0 / 3.0)
        dB2 = A1 * (2.0 * r + 1.5) / (6.0 * B2)
        return SU3StructureState((A1, A2, A2), (B1, B2, B2), (dA1, dA2, dA2), (dB1, dB2, dB2))


class BGGGProfile(MetricProfile):
    """ALC scaling family in s: the (c, lambda)-parametrised solutions.

    A_1 = 2 c lam sqrt((s^2 - (c lam)^2)/(9 s^2 - (c lam)^2)),
    A_2 = A_3 = (1/2) sqrt((3s + c lam)(s - c lam)), B_1 = s,
    B_2 = B_3 = (1/2) sqrt((3s - c lam)(s + c lam)); dt/ds = c lam / A_1.
    Scaling covariance: profile(c, lam) = lam * profile(c, 1) at s/lam.
    """

    family = "bggg-s"
    coord = "s"

    def __init__(self, c: float, lam: float = 1.0):
        if c <= 0.0 or lam <= 0.0:
            raise ValueError("c and lambda must be positive")
        self.c = float(c)
        self.lam = float(lam)
        self.m = self.c * self.lam
        self.coord_start = self.m

    def dt_dcoord(self, s: float) -> float:
        m = self.m
        return m / (2.0 * m * math.sqrt((s * s - m * m) / (9.0 * s * s - m * m)))

    def _sqrt_weight(self, u: float) -> float:
        m = self.m
        s = m + u * u
        return 2.0 * math.sqrt((9.0 * s * s - m * m) / (4.0 * (s + m)))

    def state_at_coord(self, s: float) -> SU3StructureState:
        m = self.m
        if s < m:
            raise ValueError(f"s must be >= c*lambda = {m}")
        A1 = 2.0 * m * math.sqrt(max(s * s - m * m, 0.0) / (9.0 * s * s - m * m))
        A2 = 0.5 * math.sqrt(max((3.0 * s + m) * (s - m), 0.0))
        B1 = s
        B2 = 0.5 * math.sqrt((3.0 * s - m) * (s + m))
        if A1 == 0.0 or A2 == 0.0:
            raise ValueError("state undefined on the singular orbit; use series data")
        # ds/dt = A1/(c lam); d(A1^2)/ds = 64 m^4 s/(9s^2 - m^2)^2
        ds_dt = A1 / m
        dA1 = ds_dt * 32.0 * m ** 4 * s / (A1 * (9.0 * s * s - m * m) ** 2)
        dA2 = ds_dt * (3.0 * s - m) / (4.0 * A2)
        dB1 = ds_dt
        dB2 = ds_dt * (3.0 * s + m) / (4.0 * B2)
        return SU3StructureState((A1, A2, A2), (B1, B2, B2), (dA1, dA2, dA2), (dB1, dB2, dB2))


class ConeProfile(MetricProfile):
    """The holonomy-G2 cone over nearly Kaehler S^3 x S^3: A = t/3, B = t/sqrt3."""

    family = "cone"
    coord = "t"
    coord_start = 0.0

    def dt_dcoord(self, t: float) -> float:
        return 1.0

    def t_of_coord(self, t: float) -> float:
        return t

    def coord_of_t(self, t: float) -> float:
        return t

    def state_at_coord(self, t: float) -> SU3StructureState:
        if t <= 0.0:
            raise ValueError("the cone state needs t > 0")
        return SU3StructureState((t / 3.0,) * 3, (t / _SQRT3,) * 3,
                                 (1.0 / 3.0,) * 3, (1.0 / _SQRT3,) * 3)


def bs_spinor_profile(c: float, s: float) -> SU3StructureState:
    """Point evaluation of the spinor-bundle family (A_1 = 0 allowed at s = c)."""
    if c == 0.0:
        p = BSSpinorProfile(0.0)
        return p.state_at_coord(s)
    if s < c:
        raise ValueError(f"s must be >= c = {c}")
    if s == c:
        # singular orbit: return the degenerate values without derivatives
        st = SU3StructureState.__new__(SU3StructureState)
        st.A, st.B, st.dA, st.dB = (0.0,) * 3, (float(s),) * 3, None, None
        return st
    return BSSpinorProfile(c).state_at_coord(s)


def bggg_profile(c: float, lam: float, s: float) -> SU3StructureState:
    """Point evaluation of the ALC scaling family (degenerate at s = c*lam)."""
    m = c * lam
    if s < m:
        raise ValueError(f"s must be >= c*lambda = {m}")
    if s == m:
        st = SU3StructureState.__new__(SU3StructureState)
        B2 = 0.5 * math.sqrt((3.0 * s - m) * (s + m))
        st.A, st.B, st.dA, st.dB = (0.0, 0.0, 0.0), (float(s), B2, B2), None, None
        return st
    return BGGGProfile(c, lam).state_at_coord(s)


_FAMILIES = {
    "bs": BSCanonicalProfile,
    "bggg": BGGGCanonicalProfile,
}


def profile_by_name(name: str, **kwargs) -> MetricProfile:
    name = name.lower()
    if name in ("bs", "bs-spinor-r", "bs-canonical"):
        return BSCanonicalProfile()
    if name in ("bs-spinor",):
        return BSSpinorProfile(kwargs.get("c", 1.0))
    if name in ("bggg", "bggg-canonical"):
        return BGGGCanonicalProfile()
    if name in ("bggg-s",):
        return BGGGProfile(kwargs.get("c", 1.0), kwargs.get("lam", 1.0))
    if name == "cone":
        return ConeProfile()
    raise ValueError(f"unknown metric family {name!r}")


def t_of_r(family: str, r: float, **kwargs) -> float:
    """Arc-length coordinate of the canonical profiles (t = 0 at domain start)."""
    return profile_by_name(family, **kwargs).t_of_coord(r)


# ---------------------------------------------------------------------------
# anti-self-dual 2-form bundles over S^4 and CP^2
# ---------------------------------------------------------------------------

def lambda2s4_profile(s: float):
    """(f, a, b) for the S^4 bundle: f = (1+s^2)^(-1/4), a = 2 s f, b = sqrt2/f.

    a is the twistor-fibre scale on (om^2, om^3), b the horizontal scale on
    e^1..e^4; arc length is t(s) = int_0^s f.
    """
    if s < 0.0:
        raise ValueError("s must be >= 0")
    f = (1.0 + s * s) ** -0.25
    return f, 2.0 * s * f, math.sqrt(2.0) / f


def lambda2cp2_profile(s: float):
    """(f, a, b) for the CP^2 bundle: a = sqrt2 s f, b = sqrt2/f, t = sqrt2 int f.

    The fibre scale sqrt2 (rather than 2) is what the flag-manifold structure
    constants require for a torsion-free structure; it also makes the norm
    constraint 2 s^2 f^-2 |Lambda_2|^2 = 1 hold for the closed-form connection.
    """
    if s < 0.0:
        raise ValueError("s must be >= 0")
    f = (1.0 + s * s) ** -0.25
    return f, math.sqrt(2.0) * s * f, math.sqrt(2.0) / f


@dataclass
class Lambda2Structure:
    """G2-structure data of an anti-self-dual bundle at one radius."""

    space: str
    s: float
    coframe: object
    phi: LieValuedForm
    psi: LieValuedForm
    metric: DiagonalMetric          # on the physical subcoframe
    physical: object                # star/norm subcoframe
    orientation: float
    a: float
    b: float
    f: float
    dt_ds: float


def _lambda2_s4_structure(s: float) -> Lambda2Structure:
    cf = coframes.sp2().with_dt()
    Om = coframes.sp2_asd_forms(cf)
    f, a, b = lambda2s4_profile(s)
    ff = form_from_components
    om23 = ff(cf, 2, {("om2", "om3"): 1.0})
    w2 = ff(cf, 1, {("om2",): 1.0})
    w3 = ff(cf, 1, {("om3",): 1.0})
    g1 = liealg.wedge(w3, Om[1]) + (-1.0) * liealg.wedge(w2, Om[2])
    g2 = liealg.wedge(w2, Om[1]) + liealg.wedge(w3, Om[2])
    e1234 = ff(cf, 4, {("e1", "e2", "e3", "e4"): 1.0})

    phi_c = {}
    for form, coef in ((om23, a * a), (Om[0], b * b)):
        for idx, v in form.components.items():
            phi_c[(0,) + idx] = phi_c.get((0,) + idx, 0.0) + coef * v
    for idx, v in g1.components.items():
        phi_c[idx] = phi_c.get(idx, 0.0) + a * b * b * v
    phi = LieValuedForm(3, "scalar", cf, phi_c)

    psi_c = {}
    for form, coef in ((e1234, b ** 4), (liealg.wedge(om23, Om[0]), -a * a * b * b)):
        for idx, v in form.components.items():
            psi_c[idx] = psi_c.get(idx, 0.0) + coef * v
    for idx, v in g2.components.items():
        psi_c[(0,) + idx] = psi_c.get((0,) + idx, 0.0) - a * b * b * v
    psi = LieValuedForm(4, "scalar", cf, psi_c)

    sub = liealg.subcoframe(cf, ("dt", "e1", "e2", "e3", "e4", "om2", "om3"))
    metric = DiagonalMetric(np.array([1.0, b, b, b, b, a, a]))
    return Lambda2Structure("lambda2-s4", s, cf, phi, psi, metric, sub, 1.0, a, b, f, f)


def _lambda2_cp2_structure(s: float) -> Lambda2Structure:
    cf = coframes.su3_flag().with_dt()
    Om = coframes.su3_asd_forms(cf)
    f, a, b = lambda2cp2_profile(s)
    ff = form_from_components
    n1 = ff(cf, 1, {("nu1",): 1.0})
    n2 = ff(cf, 1, {("nu2",): 1.0})
    nu12 = ff(cf, 2, {("nu1", "nu2"): 1.0})
    Sig = liealg.wedge(n2, Om[2]) + (-1.0) * liealg.wedge(n1, Om[1])
    X3 = liealg.wedge(n1, Om[2]) + liealg.wedge(n2, Om[1])
    e1234 = ff(cf, 4, {("e1", "e2", "e3", "e4"): 1.0})

    ab2 = a * b * b
    phi_c = {}
    for idx, v in nu12.components.items():
        phi_c[(0,) + idx] = (a * a) * v
    for idx, v in Om[0].components.items():
        phi_c[(0,) + idx] = phi_c.get((0,) + idx, 0.0) - (b * b) * v
    for idx, v in Sig.components.items():
        phi_c[idx] = phi_c.get(idx, 0.0) - ab2 * v
    phi = LieValuedForm(3, "scalar", cf, phi_c)

    psi_c = {}
    for idx, v in liealg.wedge(nu12, Om[0]).components.items():
        psi_c[idx] = psi_c.get(idx, 0.0) - (a * a * b * b) * v
    for idx, v in e1234.components.items():
        psi_c[idx] = psi_c.get(idx, 0.0) - b ** 4 * v
    for idx, v in X3.components.items():
        psi_c[(0,) + idx] = psi_c.get((0,) + idx, 0.0) - ab2 * v
    psi = LieValuedForm(4, "scalar", cf, psi_c)

    sub = liealg.subcoframe(cf, ("dt", "nu1", "nu2", "e1", "e2", "e3", "e4"))
    metric = DiagonalMetric(np.array([1.0, a, a, b, b, b, b]))
    return Lambda2Structure("lambda2-cp2", s, cf, phi, psi, metric, sub, -1.0,
                            a, b, f, math.sqrt(2.0) * f)


def lambda2_structure(space: str, s: float) -> Lambda2Structure:
    if space == "lambda2-s4":
        return _lambda2_s4_structure(s)
    if space == "lambda2-cp2":
        return _lambda2_cp2_structure(s)
    raise ValueError(f"unknown bundle space {space!r}")


# ---------------------------------------------------------------------------
# Sasaki-Einstein link and ALC model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ALCData:
    """Asymptotic circle-bundle data: fibre length parameter m and rate nu."""

    m: float
    nu: float
    eta_infty: LieValuedForm

    def __post_init__(self):
        if self.nu >= 0.0:
            raise ValueError("ALC decay rate nu must be negative")


def sasaki_einstein_s2s3(coframe=None) -> dict:
    """alpha, omega_1..omega_3, eta_infty on S^2 x S^3 (basic for diag U(1))."""
    cf = coframe if coframe is not None else coframes.s3xs3()
    return coframes.sasaki_einstein_forms(cf)


def bggg_alc_data() -> ALCData:
    cf = coframes.s3xs3()
    eta = form_from_components(cf, 1, {("ep1",): 2.0})
    return ALCData(m=1.0, nu=-1.0, eta_infty=eta)


def bggg_alc_coefficients(t: float):
    """Scales (2A_1, 2A_2, 2B_1, 2B_2) of the asymptotic model h at arclength t:
    h = dt^2 + 4 (eta_1^+)^2 + (4t^2/3)((eta_2^+)^2 + (eta_3^+)^2)
             + (16 t^2/9)(eta_1^-)^2 + (4t^2/3)((eta_2^-)^2 + (eta_3^-)^2).
    """
    return 2.0, 2.0 * t / _SQRT3, 4.0 * t / 3.0, 2.0 * t / _SQRT3


def alc_model_coefficients(family: str, t: float):
    """Reference model coefficients for decay-rate fits.

    bggg -> the circle-bundle model h; bs -> the cone over nearly Kaehler
    S^3 x S^3 (2A = 2t/3, 2B = 2t/sqrt3).
    """
    if family == "bggg":
        return bggg_alc_coefficients(t)
    if family in ("bs", "cone"):
        return 2.0 * t / 3.0, 2.0 * t / 3.0, 2.0 * t / _SQRT3, 2.0 * t / _SQRT3
    raise ValueError(f"no ALC/AC model for family {family!r}")
