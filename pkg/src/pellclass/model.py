"""Random Euler-product model for L(1, chi_d) over the small-unit family.

A random completely multiplicative chi is modeled by independent site values
X(p) in {1, -1, 0} with probabilities (a_p, b_p, c_p).  Four variants are
supported: the standard model, the one-parameter generalization X_s (s > 1/2,
s = 1 recovering the standard model), its s -> infinity limit, and the
variant matching the t^2 - d u^2 = 1 unit normalization ("hooley"), which
differs only at p = 2.

Exact quantities: truncated Euler products for E(L(1,X_s)^z), the shift
constant phi(z) entering the moment main terms, the multiplicative means
E(X_s(m)) and their Dirichlet-series weights H_m(s), the tail constant C_0,
and the double-exponential tail law.  Monte Carlo: seeded sampling of
L(1, X) and empirical tail estimation, reproducible independently of the
worker count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import zeta as _scipy_zeta

from .arith import factorize, multiplicative_table, primes_upto

EULER_GAMMA = float(np.euler_gamma)
ZETA2 = math.pi**2 / 6.0


class EulerFactorZero(ArithmeticError):
    """An Euler factor E((1 - X(p)/p)^(-z)) vanished; phi(z) alone is not
    defined there, only the product E(L^z) phi(z) is."""


@lru_cache(maxsize=None)
def zeta_prime_over_zeta_2() -> float:
    with mpmath.workdps(30):
        return float(mpmath.zeta(2, derivative=1) / mpmath.zeta(2))


@lru_cache(maxsize=None)
def stieltjes_gamma1() -> float:
    with mpmath.workdps(30):
        return float(mpmath.stieltjes(1))


# ---------------------------------------------------------------------------
# Variants and site probabilities


@dataclass(frozen=True)
class ModelVariant:
    kind: str          # "standard" | "generalized" | "infinity" | "hooley"
    s: float | None = None

    def __post_init__(self):
        if self.kind not in ("standard", "generalized", "infinity", "hooley"):
            raise ValueError(f"unknown variant {self.kind!r}")
        if self.kind == "generalized":
            if self.s is None or self.s <= 0.5:
                raise ValueError("generalized variant needs s > 1/2")
        elif self.s is not None:
            raise ValueError("only the generalized variant takes s")


STANDARD = ModelVariant("standard")
INFINITY = ModelVariant("infinity")
HOOLEY = ModelVariant("hooley")


def generalized(s: float) -> ModelVariant:
    return ModelVariant("generalized", float(s))


@dataclass(frozen=True)
class SiteProbabilities:
    p: int
    a: float   # P(X(p) = 1)
    b: float   # P(X(p) = -1)
    c: float   # P(X(p) = 0)


def _prob_arrays(ps: np.ndarray, variant: ModelVariant):
    """(a, b) arrays over the primes ps; c = 1 - a - b by construction."""
    p = ps.astype(np.float64)
    kind = variant.kind
    if kind == "standard":
        a = (p - 1.0) ** 2 / (2.0 * p * (p + 1.0))
        b = (p - 1.0) / (2.0 * p)
        return a, b
    if kind == "hooley":
        a = (p - 1.0) ** 2 / (2.0 * p * (p + 1.0))
        b = (p - 1.0) / (2.0 * p)
        two = ps == 2
        a[two] = 3.0 / 16.0
        b[two] = 3.0 / 16.0
        return a, b
    if kind == "infinity":
        a = (p - 3.0) / (2.0 * p)
        b = (p - 1.0) / (2.0 * p)
        two = ps == 2
        a[two] = 0.0
        b[two] = 0.5
        return a, b
    s = variant.s
    a = (p - 3.0) / (2.0 * p) + 2.0 / (p * (p**s + 1.0))
    b = (p - 1.0) / (2.0 * p)
    two = ps == 2
    if two.any():
        den = 8.0**s + 2.0**s + 2.0
        a[two] = 1.0 / den
        b[two] = 0.5 * (8.0**s - 4.0**s + 2.0) / den
    return a, b


def site_probabilities(p: int, variant: ModelVariant = STANDARD) -> SiteProbabilities:
    """The exact (a, b, c) at prime p for the chosen variant."""
    ps = np.array([p], dtype=np.int64)
    a, b = _prob_arrays(ps, variant)
    return SiteProbabilities(p=p, a=float(a[0]), b=float(b[0]), c=float(1.0 - a[0] - b[0]))


# ---------------------------------------------------------------------------
# Euler products


@dataclass(frozen=True)
class EulerProductConfig:
    p_trunc: int = 100_000


DEFAULT_CFG = EulerProductConfig()


class EulerExpectation(NamedTuple):
    value: complex
    tail_estimate: float


def _euler_factors(z: complex, variant: ModelVariant, p_trunc: int) -> np.ndarray:
    ps = primes_upto(p_trunc)
    a, b = _prob_arrays(ps, variant)
    c = 1.0 - a - b
    pf = ps.astype(np.float64)
    # real-base powers: (1 -+ 1/p)^(-z) via exp(-z log(...)), no branch issues
    t1 = np.exp(-z * np.log1p(-1.0 / pf))
    t2 = np.exp(-z * np.log1p(1.0 / pf))
    return a * t1 + b * t2 + c


def euler_expectation(z: complex, variant: ModelVariant = STANDARD,
                      cfg: EulerProductConfig = DEFAULT_CFG) -> EulerExpectation:
    """Truncated E(L(1, X_s)^z) = prod_p (a_p (1-1/p)^-z + b_p (1+1/p)^-z + c_p),
    with a crude analytic bound on the neglected log-tail."""
    z = complex(z)
    factors = _euler_factors(z, variant, cfg.p_trunc)
    scale = np.abs(factors).max() if factors.size else 1.0
    if factors.size and np.abs(factors).min() < 1e-14 * max(scale, 1.0):
        p_bad = int(primes_upto(cfg.p_trunc)[int(np.abs(factors).argmin())])
        raise EulerFactorZero(f"Euler factor vanishes at p={p_bad} for z={z}")
    value = complex(np.prod(factors))
    az = abs(z)
    tail = (az + az * az + 1.0) / max(cfg.p_trunc, 2)
    if z.imag == 0:
        value = complex(value.real, 0.0)
    return EulerExpectation(value, tail)


def log_euler_expectation_real(r: float, variant: ModelVariant = STANDARD,
                               p_trunc: int = 4_000_000) -> float:
    """log E(L(1,X)^r) for real r, summed in log space (factors stay positive)."""
    factors = _euler_factors(float(r), variant, p_trunc).real
    if factors.size and factors.min() <= 0:
        raise EulerFactorZero("nonpositive factor in real Euler product")
    return float(np.log(factors).sum())


def _phi_summands(z: complex, p_trunc: int):
    """Per-prime numerators g_p of E(L^z) phi(z) = sum_p g_p prod_{q != p} E_q
    + (2 gamma - 2 zeta'(2)/zeta(2)) E(L^z).  g_2 carries the explicit p = 2
    rational term; odd p carry 2 log p/(p+1)^2 (1 - (1-1/p)^(-z))."""
    ps = primes_upto(p_trunc)
    pf = ps.astype(np.float64)
    g = 2.0 * np.log(pf) / (pf + 1.0) ** 2 * (1.0 - np.exp(-z * np.log1p(-1.0 / pf)))
    g = g.astype(np.complex128)
    g[0] = -(math.log(2.0) / 18.0) * (4.0 * np.exp(z * math.log(2.0)) + 5.0)
    return ps, g


def moment_phi(z: complex, p_trunc: int = 100_000) -> complex:
    """phi(z): truncated prime sum, explicit p=2 term, -2 zeta'(2)/zeta(2) + 2 gamma.

    Raises EulerFactorZero when some Euler factor vanishes; use
    euler_and_phi_product there.
    """
    z = complex(z)
    factors = _euler_factors(z, STANDARD, p_trunc)
    ps, g = _phi_summands(z, p_trunc)
    scale = max(np.abs(factors).max(), 1.0)
    if np.abs(factors).min() < 1e-12 * scale:
        p_bad = int(ps[int(np.abs(factors).argmin())])
        raise EulerFactorZero(f"phi pole: Euler factor vanishes at p={p_bad}")
    val = complex(np.sum(g / factors)) - 2.0 * zeta_prime_over_zeta_2() + 2.0 * EULER_GAMMA
    if z.imag == 0:
        return complex(val.real, 0.0)
    return val


def euler_and_phi_product(z: complex, cfg: EulerProductConfig = DEFAULT_CFG):
    """(E(L^z), E(L^z) phi(z)) with the product form evaluated directly, so
    the pair stays finite at the isolated z where a single factor vanishes."""
    z = complex(z)
    factors = _euler_factors(z, STANDARD, cfg.p_trunc)
    ps, g = _phi_summands(z, cfg.p_trunc)
    n = len(factors)
    pre = np.ones(n + 1, dtype=np.complex128)
    np.cumprod(factors, out=pre[1:])
    suf = np.ones(n + 1, dtype=np.complex128)
    suf[:-1] = np.cumprod(factors[::-1])[::-1]
    value = complex(pre[n])
    leave_one_out = pre[:-1] * suf[1:]
    ephi = complex(np.sum(g * leave_one_out)) \
        + (2.0 * EULER_GAMMA - 2.0 * zeta_prime_over_zeta_2()) * value
    return value, ephi


# ---------------------------------------------------------------------------
# Multiplicative means E(X_s(m)) and series weights H_m(s)


def psi_weight(s: float) -> float:
    """(8^s + 2^s + 2) / (8^s + 4^s)."""
    return (8.0**s + 2.0**s + 2.0) / (8.0**s + 4.0**s)


def _kappa_tilde(e1: int, s: float) -> float:
    if e1 == 0:
        return 1.0
    sign = -1.0 if e1 % 2 else 1.0
    return (
        0.5 * sign
        * (8.0**s + 4.0**s) / (8.0**s + 2.0**s + 2.0)
        * (1.0 + 2.0 * (1.0 + sign) / (4.0**s * (2.0**s - 1.0)))
    )


def expected_chi(m: int, s: float = 1.0) -> float:
    """E(X_s(m)): the multiplicative closed form (kappa-tilde normalization)."""
    if s <= 0.5:
        raise ValueError("expected_chi: s must exceed 1/2")
    f = factorize(m)
    res = (-1.0) ** f.omega_m0 / f.m0
    for p in f.odd_primes_even_exp():
        res *= (1.0 - 2.0 / p) * (1.0 + 2.0 * (p - 1.0) / ((p - 2.0) * (p**s - 1.0)))
    for p in f.all_primes():
        res /= 1.0 + 2.0 / (p**s - 1.0)
    return res * _kappa_tilde(f.e1, s)


def expected_chi_infinity(m: int) -> float:
    """E(X_inf(m)) = (-1)^omega(m0)/m0 prod(1 - 2/p_j) a(m)/4."""
    f = factorize(m)
    res = (-1.0) ** f.omega_m0 / f.m0
    for p in f.odd_primes_even_exp():
        res *= 1.0 - 2.0 / p
    if f.e1:
        res *= 0.5 * ((-1.0) ** f.e1)
    return res


def expected_chi_table(limit: int, s: float = 1.0, infinity: bool = False) -> np.ndarray:
    """E(X_s(m)) (or E(X_inf(m))) for 0 <= m <= limit, sieved."""
    variant = INFINITY if infinity else (STANDARD if s == 1.0 else generalized(s))

    def ppv(p_arr, e_arr):
        a, b = _prob_arrays(p_arr, variant)
        return np.where(e_arr % 2 == 1, a - b, a + b)

    return multiplicative_table(ppv, limit, dtype=np.float64)


def zeta_val(x: float) -> float:
    return float(_scipy_zeta(x, 1))


def series_weight(m: int, s: float = 1.0) -> float:
    """H_m(s) = psi(s) / zeta(2s) * E(X_s(m))."""
    return psi_weight(s) / zeta_val(2.0 * s) * expected_chi(m, s)


_FD_STEP = 1e-5


def series_weight_deriv(m: int, order: int = 1, step: float = _FD_STEP) -> float:
    """H_m^(order)(1) by central finite differences (order in {0, 1, 2})."""
    if order == 0:
        return series_weight(m, 1.0)
    hp = series_weight(m, 1.0 + step)
    hm = series_weight(m, 1.0 - step)
    if order == 1:
        return (hp - hm) / (2.0 * step)
    if order == 2:
        return (hp - 2.0 * series_weight(m, 1.0) + hm) / step**2
    raise ValueError("order must be 0, 1 or 2")


def series_weight_table(limit: int, s: float = 1.0) -> np.ndarray:
    return psi_weight(s) / zeta_val(2.0 * s) * expected_chi_table(limit, s)


def eth2(m: int) -> float:
    """Second residue coefficient: H''_m(1)/2 + 2 gamma H'_m(1)
    + (gamma^2 - 2 gamma_1) H_m(1)."""
    h0 = series_weight(m, 1.0)
    h1 = series_weight_deriv(m, 1)
    h2 = series_weight_deriv(m, 2)
    g = EULER_GAMMA
    return 0.5 * h2 + 2.0 * g * h1 + (g * g - 2.0 * stieltjes_gamma1()) * h0


# ---------------------------------------------------------------------------
# Tail constant and tail law


@lru_cache(maxsize=None)
def c0_constant() -> float:
    """C_0 = int_0^1 tanh(t)/t dt + int_1^inf (tanh(t)-1)/t dt, quadrature to < 1e-8."""
    v1, e1 = integrate.quad(lambda t: math.tanh(t) / t if t > 0 else 1.0, 0.0, 1.0,
                            epsabs=1e-12, epsrel=1e-12)
    v2, e2 = integrate.quad(lambda t: (math.tanh(t) - 1.0) / t, 1.0, np.inf,
                            epsabs=1e-12, epsrel=1e-12)
    if e1 + e2 > 1e-8:
        raise ArithmeticError("c0_constant: quadrature error above 1e-8")
    return v1 + v2


def tail_formula(tau: float) -> float:
    """Leading-order upper-tail law exp(-e^(tau - C_0)/tau)."""
    if tau <= 0:
        raise ValueError("tail_formula: tau must be positive")
    return math.exp(-math.exp(tau - c0_constant()) / tau)


# ---------------------------------------------------------------------------
# Monte Carlo

_CHUNK = 1 << 15


def _chunk_log_draws(rng: np.random.Generator, size: int, ps: np.ndarray,
                     a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """log of `size` independent draws of the truncated product
    prod (1 - x_p/p)^-1; one uniform per site against cumulative (a, a+b, 1)."""
    logl = np.zeros(size)
    for j in range(len(ps)):
        p = float(ps[j])
        u = rng.random(size)
        up = -math.log1p(-1.0 / p)   # x = +1 contribution
        dn = -math.log1p(1.0 / p)    # x = -1 contribution
        logl += np.where(u < a[j], up, np.where(u < a[j] + b[j], dn, 0.0))
    return logl


def sample_L(variant: ModelVariant = STANDARD, cfg: EulerProductConfig = DEFAULT_CFG,
             seed: int = 0) -> float:
    """One deterministic draw of the truncated random Euler product."""
    ps = primes_upto(cfg.p_trunc)
    a, b = _prob_arrays(ps, variant)
    rng = np.random.default_rng(seed)
    return float(np.exp(_chunk_log_draws(rng, 1, ps, a, b)[0]))


def sample_log_L_batch(n: int, variant: ModelVariant = STANDARD,
                       cfg: EulerProductConfig = DEFAULT_CFG, seed: int = 0) -> np.ndarray:
    """n draws of log L(1, X).  Chunked with per-chunk seeds spawned from the
    master seed, so the stream is reproducible and independent of any worker
    split over chunks."""
    ps = primes_upto(cfg.p_trunc)
    a, b = _prob_arrays(ps, variant)
    n_chunks = (n + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    out = np.empty(n)
    pos = 0
    for i in range(n_chunks):
        size = min(_CHUNK, n - pos)
        rng = np.random.default_rng(children[i])
        out[pos : pos + size] = _chunk_log_draws(rng, size, ps, a, b)
        pos += size
    return out


def tail_mc(tau: float, n: int, variant: ModelVariant = STANDARD,
            cfg: EulerProductConfig = DEFAULT_CFG, seed: int = 0,
            lower: bool = False):
    """Empirical tail estimate with binomial standard error.

    Upper mode: fraction of draws with L > e^gamma tau.
    Lower mode: fraction with L < zeta(2) / (e^gamma tau).
    """
    if n < 1000:
        raise ValueError("tail_mc: need at least 1e3 samples")
    logl = sample_log_L_batch(n, variant, cfg, seed)
    if lower:
        thr = math.log(ZETA2) - EULER_GAMMA - math.log(tau)
        hits = int(np.count_nonzero(logl < thr))
    else:
        thr = EULER_GAMMA + math.log(tau)
        hits = int(np.count_nonzero(logl > thr))
    est = hits / n
    stderr = math.sqrt(max(est * (1.0 - est), 1e-300) / n)
    if hits < 25:
        warnings.warn(f"tail_mc: only {hits} hits at tau={tau}; estimate unreliable")
    return est, stderr
