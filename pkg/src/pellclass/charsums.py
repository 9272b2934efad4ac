"""Character-sum machinery over the lattice parametrization.

Core objects: the complete quadratic character sums C_{m,a,u} over one
residue class of t, their closed product form, the per-u totals B_m(u) in
both unit normalizations (pell4: t^2 - d u^2 = 4, the convention used by the
enumeration; hooley: t^2 - d u^2 = 1), the count rho(u) of admissible
residues a, the Dirichlet series Sigma(m, s) = G_m(s) zeta(s)^2 behind the
Perron analysis, and the empirical-vs-main-term comparison for
sum_{d in family} chi_d(m).

Every closed form here has a brute-force twin (mode="direct"); the
acceptance suite sweeps them against each other for exact equality.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np

from . import model
from .arith import factorize, is_discriminant, kronecker, primes_upto
from .model import EULER_GAMMA, ZETA2
from .pell import FamilyParams, enumerate_family, family_bounds, solve_Y1

PELL4 = "pell4"
HOOLEY = "hooley"


def d_of(a: int, u: int):
    """d(a, u) = (a^2 - 4)/u^2 when integral, else None."""
    num = a * a - 4
    if num <= 0 or num % (u * u):
        return None
    return num // (u * u)


def _is_square_vec(d: np.ndarray) -> np.ndarray:
    s = np.floor(np.sqrt(d.astype(np.float64))).astype(np.int64)
    ok = np.zeros(d.shape, dtype=bool)
    for off in (-1, 0, 1):
        ok |= (s + off) * (s + off) == d
    return ok


def valid_a(u: int) -> list:
    """All 2 < a <= 4u^2 + 2 with d(a, u) in D, paired with d(a, u)."""
    a = np.arange(3, 4 * u * u + 3, dtype=np.int64)
    num = a * a - 4
    usq = u * u
    mask = num % usq == 0
    a = a[mask]
    d = num[mask] // usq
    ok = (d % 4 <= 1) & ~_is_square_vec(d)
    return list(zip(a[ok].tolist(), d[ok].tolist()))


def _b_au(m_odd: bool, e1: int, d_au: int) -> int:
    """b_{a,u}(m): 1 for odd m; for even m decided by d(a,u) mod 8."""
    if m_odd:
        return 1
    if d_au % 4 == 0:
        return 0
    if d_au % 8 == 1:
        return 1
    # d(a,u) = 5 mod 8
    return -1 if e1 % 2 else 1


def c_mau(m: int, a: int, u: int, mode: str = "closed") -> Fraction:
    """C_{m,a,u} = sum_{0<l<=m} ((16 u^2 l^2 + 8 a l + d(a,u)) / m).

    mode="direct": brute-force Kronecker sum.
    mode="closed": the product formula; zero when gcd(m0, u) > 1.
    """
    d = d_of(a, u)
    if d is None or not is_discriminant(d) or a <= 2:
        raise ValueError(f"c_mau: (a={a}, u={u}) does not give d(a,u) in D")
    if mode == "direct":
        total = 0
        uu16 = 16 * u * u
        a8 = 8 * a
        for el in range(1, m + 1):
            total += kronecker(uu16 * el * el + a8 * el + d, m)
        return Fraction(total)
    if mode != "closed":
        raise ValueError("mode must be 'direct' or 'closed'")
    f = factorize(m)
    if math.gcd(f.m0, u) > 1:
        return Fraction(0)
    val = Fraction(m) * _b_au(f.e1 == 0, f.e1, d) * Fraction((-1) ** f.omega_m0, f.m0)
    for p in f.odd_primes_even_exp():
        val *= Fraction(p - 2, p)
        if u % p == 0:
            val *= Fraction(p - 1, p - 2)
    return val


def b_m(m: int, u: int, convention: str = PELL4, mode: str = "closed") -> int:
    """B_m(u) = sum over admissible a of b_{a,u}(m).

    Closed form: a case table in (e1, r1 = v2(u), eta(u)); the pell4 and
    hooley normalizations differ exactly in the r1 cases.  Direct mode sums
    b_{a,u}(m) over the admissible a (pell4 convention only).
    """
    f = factorize(m)
    if mode == "direct":
        if convention != PELL4:
            raise ValueError("direct B_m is defined for the pell4 convention")
        return sum(_b_au(f.e1 == 0, f.e1, d) for _, d in valid_a(u))
    if mode != "closed":
        raise ValueError("mode must be 'direct' or 'closed'")
    uf = factorize(u)
    eta = uf.eta
    r1 = uf.e1
    two_eta = 1 << eta
    e1 = f.e1
    if convention == PELL4:
        if e1 == 0:
            if r1 <= 1:
                return 4 * two_eta
            if r1 == 2:
                return 8 * two_eta
            return 16 * two_eta
        if r1 == 0:
            return 2 * (-1) ** e1 * two_eta
        if r1 >= 3:
            return 4 * (1 + (-1) ** e1) * two_eta
        return 0
    if convention == HOOLEY:
        if e1 == 0:
            if r1 == 0:
                return 4 * two_eta
            if r1 == 1:
                return 8 * two_eta
            return 16 * two_eta
        if r1 == 0:
            return (1 + (-1) ** e1) * two_eta
        if r1 == 1:
            return 0
        return 4 * (1 + (-1) ** e1) * two_eta
    raise ValueError(f"unknown convention {convention!r}")


def a_of(m: int) -> int:
    """a(m) = 4 for odd m, 2(-1)^e1 otherwise."""
    e1 = factorize(m).e1
    return 4 if e1 == 0 else 2 * (-1) ** e1


def rho_count(u: int) -> int:
    """rho(u): number of 2 < a <= 4u^2 + 2 with d(a, u) in D (direct scan)."""
    return len(valid_a(u))


# ---------------------------------------------------------------------------
# The Dirichlet series Sigma(m, s) = G_m(s) zeta(s)^2


def kappa_factor(m: int, s: float) -> float:
    e1 = factorize(m).e1
    if e1 >= 1:
        return 1.0 + 2.0 * (1.0 + (-1.0) ** e1) / (4.0**s * (2.0**s - 1.0))
    return 1.0 + 2.0**-s + 2.0 * 4.0**-s + 4.0 / (4.0**s * (2.0**s - 1.0))


def g_factor(m: int, s: float) -> float:
    """G_m(s): kappa times the even-exponent product over the 2m-support."""
    f = factorize(m)
    val = kappa_factor(m, s)
    for p in f.odd_primes_even_exp():
        val *= 1.0 + 2.0 * (p - 1.0) / ((p - 2.0) * (p**s - 1.0))
    den = 1.0 + 2.0 / (2.0**s - 1.0)
    for p in f.odd_primes():
        den *= 1.0 + 2.0 / (p**s - 1.0)
    return val / den / model.zeta_val(2.0 * s)


def sigma_series_check(m: int, s: float, u_trunc: int = 100_000):
    """(lhs, rhs): truncated series over u vs the closed G_m(s) zeta(s)^2."""
    if s <= 1.0:
        raise ValueError("sigma_series_check: need s > 1")
    f = factorize(m)
    u_max = int(u_trunc)
    us = np.arange(1, u_max + 1, dtype=np.int64)

    # eta(u) and r1(u) by sieving
    eta = np.zeros(u_max + 1, dtype=np.int16)
    for p in primes_upto(u_max):
        if p > 2:
            eta[p::p] += 1
    uu = us
    r1 = np.zeros(u_max + 1, dtype=np.int16)
    r1[1:] = np.log2((uu & -uu).astype(np.float64)).round().astype(np.int16)

    e1 = f.e1
    two_eta = np.exp2(eta[1:].astype(np.float64))
    rr = r1[1:]
    if e1 == 0:
        bm = np.select([rr <= 1, rr == 2], [4.0 * two_eta, 8.0 * two_eta], 16.0 * two_eta)
    else:
        sgn = (-1.0) ** e1
        bm = np.select([rr == 0, rr >= 3], [2.0 * sgn * two_eta, 4.0 * (1.0 + sgn) * two_eta], 0.0)

    corr = np.ones(u_max, dtype=np.float64)
    for p in f.odd_primes_even_exp():
        corr[p - 1 :: p] *= 1.0 + 1.0 / (p - 2.0)
    keep = np.ones(u_max, dtype=bool)
    for p, e in factorize(f.m0).pairs:
        keep[p - 1 :: p] = False

    terms = np.where(keep, (bm / a_of(m)) * corr / us.astype(np.float64) ** s, 0.0)
    lhs = float(terms.sum())
    rhs = g_factor(m, s) * model.zeta_val(s) ** 2
    return lhs, rhs


# ---------------------------------------------------------------------------
# Empirical vs theoretical character sums over the family


def charsum_empirical(params: FamilyParams, m: int, points=None) -> int:
    """Exact sum of chi_d(m) over the enumerated family."""
    if points is None:
        points = enumerate_family(params)
    return sum(kronecker(p.d, m) for p in points)


def charsum_main_term(x: float, alpha: float, m: int) -> float:
    """Main term for sum_{d in family} chi_d(m): square-root-of-x block with
    the three residue coefficients, plus the u=1 boundary contribution.  The
    contour remainder is not evaluated; it lands in the observed deviation."""
    fb = family_bounds(x, alpha)
    if alpha < fb.alpha0:
        raise ValueError("charsum_main_term: alpha below alpha0, family empty")
    if alpha < fb.alpha1:
        warnings.warn("charsum_main_term: alpha below alpha1; main term not valid there")
    ex = model.expected_chi(m, 1.0)
    h1 = model.series_weight_deriv(m, 1)
    lx = math.log(x)
    block = (
        alpha * alpha * ex / (2.0 * ZETA2) * lx * lx
        + alpha * (h1 + (2.0 * EULER_GAMMA - 2.0 * alpha) * ex / ZETA2) * (lx - 2.0)
        + model.eth2(m)
    )
    boundary = (1.0 - math.sqrt(solve_Y1(1, alpha))) * model.expected_chi_infinity(m)
    return math.sqrt(x) * block + boundary


def charfreq_rows(points, p_max: int = 100):
    """Figure-1 data: per prime p <= p_max the empirical frequencies of
    chi_d(p) in {1, -1, 0} over the family, next to a_p, b_p, c_p."""
    n = len(points)
    rows = []
    for p in primes_upto(p_max):
        p = int(p)
        plus = minus = zero = 0
        for pt in points:
            k = kronecker(pt.d, p)
            if k == 1:
                plus += 1
            elif k == -1:
                minus += 1
            else:
                zero += 1
        sp = model.site_probabilities(p)
        rows.append(
            dict(p=p, freq_plus=plus / n, freq_minus=minus / n, freq_zero=zero / n,
                 a_p=sp.a, b_p=sp.b, c_p=sp.c)
        )
    return rows
