"""Enumeration of positive discriminants with small fundamental unit.

The family of interest is the set of d in D (d = 0,1 mod 4, nonsquare) with
fundamental unit eps_d = (t + u sqrt(d))/2 <= d^(1/2+alpha), where (t, u) is
the minimal solution of t^2 - d u^2 = 4.  Writing d = (t^2-4)/u^2 turns the
family into lattice points (t, u) with u <= X_alpha and t in a per-u window
[Y2, Y3]; each family member arises from exactly one such point.

fundamental_unit_cf provides an independent oracle for (t, u) by expanding
the continued fraction of (b + sqrt(d))/2, b = d mod 2, and reading the unit
off one full period.  It never consults the lattice parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .arith import is_discriminant

_MEMBERSHIP_GUARD = 1e-9   # relative band around u = d^alpha - d^(-1-alpha)
_MP_DPS = 50


@dataclass(frozen=True)
class FamilyParams:
    """Cutoff x, unit exponent alpha, and the derived enumeration bounds."""

    x: float
    alpha: float
    x_alpha: float
    alpha0: float
    alpha1: float


@dataclass(frozen=True)
class PellPoint:
    """One family member: t^2 - d u^2 = 4 exactly, eps = (t + u sqrt d)/2."""

    t: int
    u: int
    d: int

    @property
    def epsilon(self) -> float:
        return (self.t + self.u * math.sqrt(self.d)) / 2.0

    @property
    def log_epsilon(self) -> float:
        return math.log(self.t + self.u * math.sqrt(self.d)) - math.log(2.0)


@dataclass(frozen=True)
class YBounds:
    """Per-u window of the t range: Y2 = sqrt(Y1 u^2 + 4) <= t <= Y3 =
    sqrt(x u^2 + 4), with Y1 the unit-threshold discriminant for this u."""

    y1: float
    y2: float
    y3: float


def x_alpha_of(x: float, alpha: float) -> float:
    return x**alpha - x ** (-1.0 - alpha)


def y_bounds(u: int, alpha: float, x: float) -> YBounds:
    y1 = solve_Y1(u, alpha)
    return YBounds(y1=y1, y2=math.sqrt(y1 * u * u + 4.0), y3=math.sqrt(x * u * u + 4.0))


def _solve_alpha_for(x: float, target: float) -> float:
    # X_alpha is increasing in alpha; bisection on [0, 1/2]
    lo, hi = 0.0, 0.5
    if x_alpha_of(x, hi) < target:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if x_alpha_of(x, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(hi, 1e-3):
            break
    return 0.5 * (lo + hi)


def family_bounds(x: float, alpha: float) -> FamilyParams:
    """FamilyParams with X_alpha and the thresholds alpha0 (X=1), alpha1 (X=2)."""
    if x < 2:
        raise ValueError("family_bounds: x must be >= 2")
    if not 0 < alpha < 0.5:
        raise ValueError("family_bounds: alpha must lie in (0, 1/2)")
    return FamilyParams(
        x=float(x),
        alpha=float(alpha),
        x_alpha=x_alpha_of(x, alpha),
        alpha0=_solve_alpha_for(x, 1.0),
        alpha1=_solve_alpha_for(x, 2.0),
    )


def solve_Y1(u: int, alpha: float) -> float:
    """Unique positive Y with Y^alpha - Y^(-1-alpha) = u, to 1e-12 relative.

    alpha = 1/2 is accepted (the defining equation stays monotone there).
    """
    if u < 1:
        raise ValueError("solve_Y1: u must be >= 1")
    if not 0 < alpha <= 0.5:
        raise ValueError("solve_Y1: alpha must lie in (0, 1/2]")

    def f(v: float) -> float:
        # v = log Y
        return math.exp(alpha * v) - math.exp(-(1.0 + alpha) * v) - u

    lo = 0.0
    hi = max(math.log(u) / alpha if u > 1 else 0.0, 1.0)
    it = 0
    while f(hi) < 0:
        hi *= 2.0
        it += 1
        if it > 500:
            raise ArithmeticError("solve_Y1: bracketing failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if abs(f(mid)) <= 1e-13 * u and hi - lo < 1e-13 * max(1.0, mid):
            break
    v = 0.5 * (lo + hi)
    y = math.exp(v)
    if abs(y**alpha - y ** (-1.0 - alpha) - u) > 1e-12 * u:
        raise ArithmeticError("solve_Y1: did not reach the residual tolerance")
    return y


def _member_test(d: int, u: int, alpha: float) -> bool:
    """Exact family membership eps_d <= d^(1/2+alpha), i.e. u <= d^alpha - d^(-1-alpha).

    Floating evaluation with a symmetric relative guard band; points inside
    the band are resolved with 50-digit arithmetic so boundary cases are
    bit-stable.
    """
    if u.bit_length() > int(0.5 * math.log2(d)) + 4:
        return False  # u already exceeds d**alpha for any alpha < 1/2
    rhs = d**alpha - d ** (-1.0 - alpha)
    gap = rhs - u
    if abs(gap) > _MEMBERSHIP_GUARD * max(abs(rhs), float(u)):
        return gap >= 0
    with mpmath.workdps(_MP_DPS):
        dd = mpmath.mpf(d)
        a = mpmath.mpf(alpha)
        return mpmath.mpf(u) <= dd**a - dd ** (-1 - a)


def _sqrt4_residues(usq: int) -> list:
    """Residues r mod u^2 with r^2 = 4 (mod u^2)."""
    return [r for r in range(usq) if (r * r - 4) % usq == 0]


def enumerate_family(params: FamilyParams) -> list:
    """All of D_alpha(x) as PellPoints, sorted by d, one point per d."""
    x, alpha = params.x, params.alpha
    if x * params.x_alpha**2 + 4 > 2**127:
        raise OverflowError("enumerate_family: parameters exceed the 128-bit envelope")
    out = []
    seen = set()
    u_cap = int(params.x_alpha) + 1
    u = 1
    while u <= u_cap:
        yb = y_bounds(u, alpha, x)
        if yb.y1 > x * (1.0 + 1e-9):
            break  # u > X_alpha: window is empty and stays empty
        y2, y3 = yb.y2, yb.y3
        # round the window outward by one, then filter exactly
        t_lo = max(3, int(math.floor(y2)) - 1)
        t_hi = int(math.ceil(y3)) + 1
        usq = u * u
        for r in _sqrt4_residues(usq):
            t = t_lo + ((r - t_lo) % usq)
            while t <= t_hi:
                num = t * t - 4
                d = num // usq
                if d >= 1 and d <= x and is_discriminant(d) and _member_test(d, u, alpha):
                    if d in seen:
                        raise AssertionError(f"duplicate discriminant d={d} at (t={t}, u={u})")
                    seen.add(d)
                    out.append(PellPoint(t=t, u=u, d=d))
                t += usq
        u += 1
    out.sort(key=lambda p: p.d)
    return out


# ---------------------------------------------------------------------------
# Continued-fraction oracle for the fundamental unit


def _floor_div_sqrt(p: int, s: int, q: int) -> int:
    # floor((p + sqrt(d)) / q) with s = isqrt(d), sqrt(d) irrational
    if q > 0:
        return (p + s) // q
    return -((p + s) // (-q)) - 1


def fundamental_unit_cf(d: int, max_iter: int = 10_000_000):
    """Minimal (t, u) with t^2 - d u^2 = 4 via the continued fraction of
    (b + sqrt d)/2, b = d mod 2.  Exact integer arithmetic throughout;
    returns Python ints (they can be astronomically large).
    """
    if not is_discriminant(d):
        raise ValueError(f"fundamental_unit_cf: {d} not in D")
    s = math.isqrt(d)
    p, q = d % 2, 2
    seen = {}
    hist = []
    i = 0
    while (p, q) not in seen:
        seen[(p, q)] = i
        a = _floor_div_sqrt(p, s, q)
        hist.append(a)
        p1 = a * q - p
        num = d - p1 * p1
        if num % q != 0:
            raise ArithmeticError("fundamental_unit_cf: lost the discriminant invariant")
        p, q = p1, num // q
        if q == 0:
            raise ArithmeticError("fundamental_unit_cf: square discriminant slipped through")
        i += 1
        if i > max_iter:
            raise ArithmeticError("fundamental_unit_cf: iteration cap reached")
    k = seen[(p, q)]
    # unit of one full period: eta = C*omega_k + D from the cycle's matrix
    aa, bb, cc, dd = 1, 0, 0, 1
    for a in hist[k:]:
        aa, bb, cc, dd = aa * a + bb, aa, cc * a + dd, cc
    # omega_k = (P_k + sqrt d)/Q_k; recover P_k, Q_k by replaying to index k
    p, q = d % 2, 2
    for a in hist[:k]:
        p1 = a * q - p
        p, q = p1, (d - p1 * p1) // q
    t2 = 2 * (cc * p + dd * q)
    u2 = 2 * cc
    if t2 % q or u2 % q:
        raise ArithmeticError("fundamental_unit_cf: unit not in the order")
    t, u = t2 // q, u2 // q
    norm = t * t - d * u * u
    if norm == -4:
        t, u = t * t + 2, t * u
    elif norm != 4:
        raise ArithmeticError(f"fundamental_unit_cf: unexpected norm {norm} for d={d}")
    assert t * t - d * u * u == 4
    return t, u


def brute_force_family(x: float, alpha: float) -> list:
    """Independent family scan: test eps_d <= d^(1/2+alpha) for every d in
    D(x) using the continued-fraction unit.  Intended for x <= ~1e5."""
    pts = []
    for d in range(5, int(x) + 1):
        if not is_discriminant(d):
            continue
        t, u = fundamental_unit_cf(d)
        if _member_test(d, u, alpha):
            pts.append(PellPoint(t=t, u=u, d=d))
    return pts
