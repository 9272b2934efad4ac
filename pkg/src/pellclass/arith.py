"""Exact integer arithmetic primitives.

Kronecker symbols (scalar and vectorized), discriminant membership,
factorization with the derived quantities used throughout (2-adic exponent,
odd squarefree part, prime-factor counts), and the generalized divisor
function d_z(m) given by the coefficients of zeta(s)^z.

Everything here is a pure function of its inputs.  The prime sieve and the
smallest-prime-factor table are built once, grown on demand, and read-only
afterwards, so concurrent use is safe.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_lock = threading.RLock()

# ---------------------------------------------------------------------------
# Prime sieve / smallest-prime-factor machinery


class _SieveState:
    limit = 0
    spf: np.ndarray | None = None        # spf[n] = smallest prime factor, spf[1] = 1
    primes: np.ndarray | None = None     # ascending primes <= limit
    cofactor: np.ndarray | None = None   # n // spf[n]
    layers: list | None = None           # index arrays grouped by Omega(n), ascending
    pexp: np.ndarray | None = None       # exponent of spf(n) in n
    rest: np.ndarray | None = None       # n / spf(n)**pexp(n)


_state = _SieveState()


def _grow_sieve(limit: int) -> None:
    limit = max(limit, 1 << 10)
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[1] = 1
    i = 2
    while i * i <= limit:
        if spf[i] == 0:
            spf[i] = i
            sl = spf[i * i :: i]
            sl[sl == 0] = i
        i += 1
    rest = np.flatnonzero(spf[2:] == 0) + 2
    spf[rest] = rest
    _state.spf = spf
    _state.primes = np.flatnonzero(spf[2:] == np.arange(2, limit + 1)) + 2
    _state.cofactor = None
    _state.layers = None
    _state.pexp = None
    _state.rest = None
    _state.limit = limit


def primes_upto(limit: int) -> np.ndarray:
    """Ascending primes <= limit (view into the shared cached sieve)."""
    with _lock:
        if _state.limit < limit:
            _grow_sieve(limit)
        primes = _state.primes
    return primes[: np.searchsorted(primes, limit, side="right")]


def _layers(limit: int):
    """spf / cofactor / Omega-layer structure, cached for the current sieve."""
    with _lock:
        if _state.limit < limit:
            _grow_sieve(limit)
        if _state.layers is None:
            spf = _state.spf
            n = _state.limit
            idx = np.arange(n + 1)
            cof = np.ones(n + 1, dtype=np.int64)
            cof[2:] = idx[2:] // spf[2:]
            omega = np.zeros(n + 1, dtype=np.int8)
            for _ in range(int(n).bit_length() + 1):
                new = omega[cof] + 1
                new[:2] = 0
                if np.array_equal(new, omega):
                    break
                omega = new
            layers = [np.flatnonzero(omega == lv) for lv in range(1, int(omega.max()) + 1)]
            # n = spf(n)**pexp(n) * rest(n) with spf(n) not dividing rest(n)
            pexp = np.zeros(n + 1, dtype=np.int8)
            rest = np.ones(n + 1, dtype=np.int64)
            for lay in layers:
                p = spf[lay]
                c = cof[lay]
                same = spf[c] == p
                pexp[lay] = np.where(same, pexp[c] + 1, 1)
                rest[lay] = np.where(same, rest[c], c)
            _state.cofactor = cof
            _state.layers = layers
            _state.pexp = pexp
            _state.rest = rest
        return _state


def completely_multiplicative_table(prime_values: np.ndarray, limit: int, dtype=np.float64) -> np.ndarray:
    """Table f(0..limit) of the completely multiplicative extension of the
    given values at primes_upto(limit).  f(0) = 0, f(1) = 1."""
    st = _layers(limit)
    out = np.zeros(limit + 1, dtype=dtype)
    out[1] = 1
    prm = primes_upto(limit)
    assert len(prime_values) == len(prm)
    out[prm] = prime_values
    for lay in st.layers[1:]:
        lay = lay[: np.searchsorted(lay, limit, side="right")]
        if lay.size:
            out[lay] = out[st.spf[lay]] * out[st.cofactor[lay]]
    return out


def multiplicative_table(prime_power_values, limit: int, dtype=np.float64) -> np.ndarray:
    """Table of the multiplicative function with f(p^e) = prime_power_values(p_arr, e_arr).

    prime_power_values must accept two int64 arrays and return the values
    vectorized.  f(1) = 1.
    """
    st = _layers(limit)
    out = np.zeros(limit + 1, dtype=dtype)
    out[1] = 1
    for lay in st.layers:
        lay = lay[: np.searchsorted(lay, limit, side="right")]
        if lay.size:
            out[lay] = prime_power_values(st.spf[lay], st.pexp[lay].astype(np.int64)) * out[st.rest[lay]]
    return out


# ---------------------------------------------------------------------------
# Kronecker symbol


def kronecker(d: int, m: int) -> int:
    """Full Kronecker symbol (d/m) for m >= 0; completely multiplicative in m."""
    if m < 0:
        raise ValueError("kronecker: m must be nonnegative")
    if m == 0:
        return 1 if d in (1, -1) else 0
    res = 1
    # (d/2^e) part, decided by d mod 8 before any reduction
    e = (m & -m).bit_length() - 1
    if e:
        if d % 2 == 0:
            return 0
        if e % 2 == 1 and d % 8 in (3, 5):
            res = -res
        m >>= e
    if m == 1:
        return res
    a = d % m
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                res = -res
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            res = -res
        a %= m
    return res if m == 1 else 0


def kronecker_many(d: int, ms: np.ndarray) -> np.ndarray:
    """Vectorized (d/m) over an array of positive m.  Requires d != 0 and
    |d| < 2**62; agrees with kronecker() elementwise."""
    if d == 0:
        raise ValueError("kronecker_many: d must be nonzero")
    m = np.asarray(ms, dtype=np.int64).copy()
    if m.size and int(m.min()) <= 0:
        raise ValueError("kronecker_many: m must be positive")
    res = np.ones(m.shape, dtype=np.int8)

    even = (m & 1) == 0
    if d % 2 == 0:
        res[even] = 0
    tz = np.zeros(m.shape, dtype=np.int64)
    while even.any():
        m[even] >>= 1
        tz[even] += 1
        even = (m & 1) == 0
    if d % 2 and d % 8 in (3, 5):
        res[(tz & 1) == 1] *= -1

    a = np.mod(d, m)
    active = (a != 0) & (m != 1) & (res != 0)
    while active.any():
        ai = a[active]
        mi = m[active]
        ri = res[active]
        ev = (ai & 1) == 0
        # halve even tops, flipping by (2/m); swap-and-reduce odd tops
        if ev.any():
            flip = ev & ((mi % 8 == 3) | (mi % 8 == 5))
            ai[ev] >>= 1
            ri[flip] *= -1
        odd = ~ev
        if odd.any():
            flip = odd & ((ai & 3) == 3) & ((mi & 3) == 3)
            ri[flip] *= -1
            ao = ai[odd]
            mo = mi[odd]
            ai[odd] = mo % ao
            mi[odd] = ao
        a[active] = ai
        m[active] = mi
        res[active] = ri
        active = (a != 0) & (m != 1) & (res != 0)
    res[m != 1] = 0
    return res


def kronecker_prime_values(d: int, limit: int) -> np.ndarray:
    """(d/p) over primes_upto(limit) as int8."""
    return kronecker_many(d, primes_upto(limit))


def chi_table(d: int, limit: int | None = None) -> np.ndarray:
    """chi_d(n) = (d/n) for 0 <= n <= limit (default limit = d - 1), int8.

    chi_d is periodic mod d for d = 0, 1 mod 4, so the default table is the
    full period.
    """
    if limit is None:
        limit = d - 1
    vals = kronecker_prime_values(d, limit) if limit >= 2 else np.zeros(0, dtype=np.int8)
    return completely_multiplicative_table(vals, limit, dtype=np.int8)


def is_discriminant(d: int) -> bool:
    """Membership in D: d >= 1, d = 0 or 1 mod 4, and d not a perfect square."""
    if d < 1:
        return False
    if d % 4 not in (0, 1):
        return False
    r = math.isqrt(d)
    return r * r != d


# ---------------------------------------------------------------------------
# Factorization


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of m with the derived quantities the character-sum
    closed forms key on.

    pairs:    ((p, e), ...) ascending by p
    e1:       exponent of 2 (0 if m odd)
    m0:       squarefree part of m / 2**e1 (odd primes with odd exponent)
    omega_m0: number of primes dividing m0
    eta:      number of odd prime factors of m
    """

    m: int
    pairs: tuple
    e1: int
    m0: int
    omega_m0: int
    eta: int

    def odd_primes_even_exp(self):
        return tuple(p for p, e in self.pairs if p != 2 and e % 2 == 0)

    def odd_primes(self):
        return tuple(p for p, _ in self.pairs if p != 2)

    def all_primes(self):
        return tuple(p for p, _ in self.pairs)


@lru_cache(maxsize=500_000)
def factorize(m: int) -> Factorization:
    if m < 1:
        raise ValueError("factorize: m must be positive")
    n = m
    pairs = []
    e1 = 0
    while n % 2 == 0:
        n //= 2
        e1 += 1
    if e1:
        pairs.append((2, e1))
    p = 3
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            pairs.append((p, e))
        p += 2
    if n > 1:
        pairs.append((n, 1))
    m0 = 1
    omega_m0 = 0
    eta = 0
    for p, e in pairs:
        if p == 2:
            continue
        eta += 1
        if e % 2 == 1:
            m0 *= p
            omega_m0 += 1
    return Factorization(m=m, pairs=tuple(pairs), e1=e1, m0=m0, omega_m0=omega_m0, eta=eta)


def squarefree_decomposition(m: int):
    """m = core * square**2 with core squarefree."""
    f = factorize(m)
    core = 1
    sq = 1
    for p, e in f.pairs:
        if e % 2:
            core *= p
        sq *= p ** (e // 2)
    return core, sq


def fundamental_decomposition(d: int):
    """d = dfund * ell**2 with dfund a fundamental discriminant (d in D)."""
    if not is_discriminant(d):
        raise ValueError(f"{d} is not a positive discriminant")
    core, ell = squarefree_decomposition(d)
    if core % 4 == 1:
        return core, ell
    # core = 2,3 mod 4 forces ell even because d = 0,1 mod 4
    assert ell % 2 == 0
    return 4 * core, ell // 2


# ---------------------------------------------------------------------------
# Generalized divisor function


def _dz_prime_power(z: complex, e: int) -> complex:
    val = complex(1.0)
    for v in range(1, e + 1):
        val *= (z + v - 1) / v
    return val


def divisor_dz(z: complex, m: int) -> complex:
    """d_z(m): multiplicative, d_z(p^v) = d_z(p^(v-1)) (z+v-1)/v (no Gamma)."""
    if m < 1:
        raise ValueError("divisor_dz: m must be positive")
    z = complex(z)
    out = complex(1.0)
    for _, e in factorize(m).pairs:
        out *= _dz_prime_power(z, e)
    return out


def divisor_dz_table(z: complex, limit: int) -> np.ndarray:
    """d_z(m) for 0 <= m <= limit as complex128."""
    z = complex(z)
    emax = int(limit).bit_length()
    by_exp = np.array([0] + [_dz_prime_power(z, e) for e in range(1, emax + 1)], dtype=np.complex128)

    def ppv(p_arr, e_arr):
        return by_exp[e_arr]

    return multiplicative_table(ppv, limit, dtype=np.complex128)
