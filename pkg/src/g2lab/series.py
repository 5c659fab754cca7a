"""Parity-graded Laurent series in the arclength t near a singular orbit.

Every radial quantity in this package is either even or odd in t (smooth
extension over the singular orbit forces definite parity), so series are
stored as f = t^m * sum_k P[k] t^(2k) with an integer leading exponent m.
That is enough to expand the closed-form metrics around t = 0 and to run the
order-by-order recurrences that start instanton trajectories at the orbit.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["TSeries", "arc_inversion", "bs_metric_series", "bggg_metric_series"]


class TSeries:
    """f(t) = sum_k coeffs[k] t^(m + 2k), truncated after len(coeffs) terms."""

    __slots__ = ("m", "c")

    def __init__(self, m: int, coeffs):
        self.m = int(m)
        self.c = np.asarray(coeffs, dtype=float).copy()
        if self.c.ndim != 1 or len(self.c) == 0:
            raise ValueError("coeffs must be a nonempty 1-d array")

    # number of stored powers
    @property
    def order(self) -> int:
        return len(self.c)

    @classmethod
    def const(cls, value: float, order: int) -> "TSeries":
        c = np.zeros(order)
        c[0] = value
        return cls(0, c)

    @classmethod
    def t_power(cls, m: int, order: int) -> "TSeries":
        c = np.zeros(order)
        c[0] = 1.0
        return cls(m, c)

    def truncate(self, order: int) -> "TSeries":
        if order >= self.order:
            c = np.zeros(order)
            c[: self.order] = self.c
            return TSeries(self.m, c)
        return TSeries(self.m, self.c[:order])

    def _normalized(self) -> "TSeries":
        """Strip leading zero coefficients (shifting m up by 2 each)."""
        k = 0
        while k < len(self.c) - 1 and self.c[k] == 0.0:
            k += 1
        return TSeries(self.m + 2 * k, self.c[k:]) if k else self

    # -- ring operations ----------------------------------------------------

    def __neg__(self):
        return TSeries(self.m, -self.c)

    def __add__(self, other):
        if not isinstance(other, TSeries):
            other = TSeries.const(float(other), self.order)
        a, b = self, other
        if (a.m - b.m) % 2 != 0:
            raise ValueError("cannot add series of opposite parity")
        m = min(a.m, b.m)
        sa, sb = (a.m - m) // 2, (b.m - m) // 2
        n = max(sa + a.order, sb + b.order)
        c = np.zeros(n)
        c[sa: sa + a.order] += a.c
        c[sb: sb + b.order] += b.c
        return TSeries(m, c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TSeries) else TSeries.const(-float(other), self.order))

    def __mul__(self, other):
        if not isinstance(other, TSeries):
            return TSeries(self.m, self.c * float(other))
        n = max(self.order, other.order)
        c = np.convolve(self.c, other.c)[:n]
        return TSeries(self.m + other.m, c)

    __rmul__ = __mul__

    def recip(self) -> "TSeries":
        s = self._normalized()
        if s.c[0] == 0.0:
            raise ZeroDivisionError("series with vanishing leading coefficient")
        n = s.order
        inv = np.zeros(n)
        inv[0] = 1.0 / s.c[0]
        for k in range(1, n):
            inv[k] = -inv[0] * float(np.dot(s.c[1: k + 1], inv[k - 1:: -1][:k]))
        return TSeries(-s.m, inv)

    def __truediv__(self, other):
        if isinstance(other, TSeries):
            return self * other.recip()
        return TSeries(self.m, self.c / float(other))

    def sqrt(self) -> "TSeries":
        s = self._normalized()
        if s.m % 2 != 0:
            raise ValueError("sqrt of odd leading exponent is not a TSeries")
        if s.c[0] <= 0.0:
            raise ValueError("sqrt needs a positive leading coefficient")
        n = s.order
        r = np.zeros(n)
        r[0] = math.sqrt(s.c[0])
        for k in range(1, n):
            acc = s.c[k] - float(np.dot(r[1:k], r[k - 1: 0: -1]))
            r[k] = acc / (2.0 * r[0])
        return TSeries(s.m // 2, r)

    def deriv(self) -> "TSeries":
        """d/dt of t^m P(t^2) = t^(m-1) (m P + 2 tau P')."""
        c = np.array([(self.m + 2 * k) * self.c[k] for k in range(self.order)])
        return TSeries(self.m - 1, c)

    def integrate(self) -> "TSeries":
        """Antiderivative with zero constant; exponents m+2k+1 must be nonzero."""
        c = np.zeros(self.order)
        for k in range(self.order):
            p = self.m + 2 * k + 1
            if p == 0:
                if self.c[k] != 0.0:
                    raise ValueError("cannot integrate a 1/t term in TSeries")
                continue
            c[k] = self.c[k] / p
        return TSeries(self.m + 1, c)

    def __call__(self, t: float) -> float:
        tau = t * t
        acc = 0.0
        for ck in self.c[::-1]:
            acc = acc * tau + ck
        return acc * t ** self.m

    def coefficient(self, exponent: int) -> float:
        """Coefficient of t^exponent (0 if absent or wrong parity)."""
        if (exponent - self.m) % 2 != 0:
            return 0.0
        k = (exponent - self.m) // 2
        if 0 <= k < self.order:
            return float(self.c[k])
        return 0.0

    def __repr__(self):
        terms = [f"{c:+.6g} t^{self.m + 2 * k}" for k, c in enumerate(self.c) if c != 0.0]
        return " ".join(terms) if terms else "0"


def arc_inversion(g_of_u: TSeries, order: int) -> TSeries:
    """Solve du/dt = sqrt(u) g(u) with u ~ t^2, for u as a series in t.

    g is an even analytic series in u (given as a TSeries in u with m = 0,
    interpreted coefficient-wise); returns u(t) with leading t^2.  This is the
    inversion of the arclength integral t = int du / (sqrt(u) g(u)).
    """
    a1 = (g_of_u.c[0] / 2.0) ** 2
    u = TSeries(2, np.zeros(order))
    u.c[0] = a1
    for _ in range(order + 2):  # Picard: one order gained per sweep
        gu = _compose_even(g_of_u, u, order)
        rhs = u.sqrt() * gu
        u_new = rhs.integrate().truncate(order)
        if np.allclose(u_new.c, u.c, rtol=1e-15, atol=1e-300):
            u = u_new
            break
        u = u_new
    return u


def _compose_even(g: TSeries, u: TSeries, order: int) -> TSeries:
    """g(u(t)) for g a power series in u (coefficients g.c) and u ~ t^2."""
    if g.m != 0:
        raise ValueError("composition target must have m = 0")
    out = TSeries.const(0.0, order)
    upow = TSeries.const(1.0, order)
    for k in range(g.order):
        out = (out + g.c[k] * upow).truncate(order)
        upow = (upow * u).truncate(order)
    return out


# ---------------------------------------------------------------------------
# metric Taylor data at the singular orbit
# ---------------------------------------------------------------------------

def _poly_in_u(coeffs, order) -> TSeries:
    return TSeries(0, np.pad(np.asarray(coeffs, float), (0, max(0, order - len(coeffs)))))


def bs_metric_series(order: int = 10) -> dict:
    """Series of A(t), B(t) for the canonical spinor-bundle metric.

    r = 1 + u with dr/dt = sqrt(u) g(u), g = sqrt((3 + 3u + u^2)/(1+u)^3);
    A = sqrt(u) (1+u) g(u)/3, B = (1+u)/sqrt3.
    """
    one_u = _poly_in_u([1.0, 1.0], order)
    num = _poly_in_u([3.0, 3.0, 1.0], order)
    g = (num / (one_u * one_u * one_u)).sqrt().truncate(order)
    u = arc_inversion(g, order)
    gu = _compose_even(g, u, order)
    one_u_t = TSeries.const(1.0, order) + u
    A = (u.sqrt() * one_u_t * gu * (1.0 / 3.0)).truncate(order)
    B = (one_u_t * (1.0 / math.sqrt(3.0))).truncate(order)
    return {"A1": A, "A2": A, "B1": B, "B2": B, "u": u}


def bggg_metric_series(order: int = 10) -> dict:
    """Series of A_i(t), B_i(t) for the canonical ALC metric (r = 9/4 + u).

    dr/dt = A_1 = sqrt(u) g(u) with g = sqrt((u + 9/2)/((9/4+u)^2 - 9/16)).
    """
    num = _poly_in_u([4.5, 1.0], order)
    den = _poly_in_u([(2.25) ** 2 - 9.0 / 16.0, 4.5, 1.0], order)
    g = (num / den).sqrt().truncate(order)
    u = arc_inversion(g, order)
    gu = _compose_even(g, u, order)
    A1 = (u.sqrt() * gu).truncate(order)
    # A2^2 = u(u+3)/3  ->  A2 = sqrt(u) sqrt(1 + u/3)
    A2 = (u.sqrt() * _compose_even(_poly_in_u([1.0, 1.0 / 3.0], order), u, order).sqrt()).truncate(order)
    B1 = (TSeries.const(1.5, order) + (2.0 / 3.0) * u).truncate(order)
    # B2^2 = (3/2 + u)(9/2 + u)/3 = 9/4 + 2u + u^2/3
    B2sq = _compose_even(_poly_in_u([9.0 / 4.0, 2.0, 1.0 / 3.0], order), u, order)
    B2 = B2sq.sqrt().truncate(order)
    return {"A1": A1, "A2": A2, "B1": B1, "B2": B2, "u": u}
