"""Moment, tail, and counting comparisons for the enumerated family.

Theoretical main terms come in three modes:

  h-moment:  E(L^z)/(2 zeta(2)) int_2^x t^((z-1)/2) / log(t)^z
             [I_{z,1} log^2 t + phi(z) I_{z,0} log t] dt,
  L-moment:  sqrt(x)/zeta(2) E(L^z) (alpha^2 log^2 x / 2
             + alpha (phi(z) - 2 alpha)(log x - 2)),
  corollary: x^((z+1)/2)/((z+1) zeta(2)) I_{z,1} E(L^z) log(x)^(2-z),

all evaluated through the product pair (E(L^z), E(L^z) phi(z)) so isolated
zeros of an Euler factor never surface as poles.  Empirical sums are exact
reductions over DiscriminantRecords.  Complex powers of positive reals use
the real logarithm throughout.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import model
from .model import EULER_GAMMA, ZETA2, EulerProductConfig

_SERIES_RADIUS = 1e-4
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class MomentReport:
    z: complex
    empirical: complex
    theoretical: complex
    rel_dev: float
    x: float
    alpha: float
    mode: str


@dataclass(frozen=True)
class TailCurve:
    tau: np.ndarray
    empirical: np.ndarray
    model: np.ndarray


def _power_diff_over_w(w: complex, log_a: float, log_b: float) -> complex:
    """(e^(w log_a) - e^(w log_b)) / w, series-expanded for small |w|."""
    if abs(w) > _SERIES_RADIUS:
        return (cmath.exp(w * log_a) - cmath.exp(w * log_b)) / w
    total = 0.0 + 0.0j
    fact = 1.0
    for k in range(6):
        fact *= k + 1
        total += w**k * (log_a ** (k + 1) - log_b ** (k + 1)) / fact
    return total


def i_integrals(z: complex, alpha: float):
    """(I_{z,0}, I_{z,1}) = int_{1/2}^{alpha+1/2} u^-z (1, u - 1/2) du,
    closed forms with series fallbacks at the removable z = 1, 2."""
    if not 0 < alpha <= 0.5:
        raise ValueError("i_integrals: alpha must lie in (0, 1/2]")
    z = complex(z)
    log_a = math.log(alpha + 0.5)
    i0 = _power_diff_over_w(1.0 - z, log_a, _LOG_HALF)
    j = _power_diff_over_w(2.0 - z, log_a, _LOG_HALF)
    i1 = j - 0.5 * i0
    return i0, i1


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _composite_gl(f, lo: float, hi: float, panels: int) -> complex:
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    v = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = f(v).reshape(panels, -1)
    return complex((half * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)).sum())

def _growth_matched_integral(f, lo: float, hi: float, z: complex,
                             epsrel: float) -> complex:
    """Integrate f over [lo, hi] by composite Gauss-Legendre with panel
    widths matched to the exponential growth rate (z+1)/2 and the
    oscillation Im(z)/2.  Globally adaptive schemes lose the integrand here:
    its magnitude can span hundreds of orders over the interval.  Panel
    count doubles until two refinements agree to epsrel."""
    rate = max(abs(z.real + 1.0) / 2.0, abs(z.imag), 1.0)
    panels = max(8, int((hi - lo) * rate / 4.0) + 1)
    prev = _composite_gl(f, lo, hi, panels)
    for _ in range(8):
        panels *= 2
        cur = _composite_gl(f, lo, hi, panels)
        if abs(cur - prev) <= epsrel * abs(cur):
            return cur
        prev = cur
    raise ArithmeticError("moment quadrature did not converge")


def _uniformity_cap(x: float, alpha: float) -> float:
    l1 = math.log(x)
    l2 = math.log(l1)
    l3 = math.log(max(l2, 1.001))
    return (1.0 - 2.0 * alpha) ** 2 / 75.0 * l1 / (l2 * l3)


def moment_main_term(x: float, alpha: float, z: complex, mode: str = "h-moment",
                     cfg: EulerProductConfig = model.DEFAULT_CFG,
                     quad_epsrel: float = 1e-9) -> complex:
    """Theoretical main term in the requested mode (see module docstring)."""
    z = complex(z)
    if abs(z) > _uniformity_cap(x, alpha):
        warnings.warn(f"|z|={abs(z):.3g} outside the proven uniformity range; "
                      "value is exploratory")
    ev, ephi = model.euler_and_phi_product(z, cfg)
    i0, i1 = i_integrals(z, alpha)
    lx = math.log(x)

    if mode == "L-moment":
        return (
            math.sqrt(x) / ZETA2
            * (0.5 * alpha * alpha * lx * lx * ev
               + alpha * (lx - 2.0) * (ephi - 2.0 * alpha * ev))
        )
    if mode == "corollary":
        return (
            cmath.exp(0.5 * (z + 1.0) * lx) / ((z + 1.0) * ZETA2)
            * i1 * ev * cmath.exp((2.0 - z) * math.log(lx))
        )
    if mode != "h-moment":
        raise ValueError(f"unknown mode {mode!r}")

    # substitute t = e^v: integrand e^(v(z+1)/2) v^(1-z) (E I1 v + E phi I0)
    def f(v: np.ndarray) -> np.ndarray:
        return np.exp(0.5 * (z + 1.0) * v + (1.0 - z) * np.log(v)) \
            * (ev * i1 * v + ephi * i0)

    val = _growth_matched_integral(f, math.log(2.0), lx, z, quad_epsrel)
    return val / (2.0 * ZETA2)


def moment_empirical(records, z: complex, mode: str = "h-moment") -> complex:
    """Exact sum h(d)^z or L(1,chi_d)^z over the records (via z log of the
    positive base)."""
    z = complex(z)
    if mode == "h-moment":
        logs = np.log([r.h for r in records])
    elif mode == "L-moment":
        logs = np.log([r.L1 for r in records])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    vals = np.exp(z * logs)
    out = complex(vals.sum())
    if z.imag == 0:
        return complex(out.real, 0.0)
    return out


def moment_report(records, x: float, alpha: float, z: complex,
                  mode: str = "h-moment") -> MomentReport:
    emp = moment_empirical(records, z, mode)
    th = moment_main_term(x, alpha, z, mode)
    rel = abs(emp - th) / abs(th) if th != 0 else math.inf
    return MomentReport(z=complex(z), empirical=emp, theoretical=th,
                        rel_dev=rel, x=x, alpha=alpha, mode=mode)


# ---------------------------------------------------------------------------
# Tail of the class-number distribution


def tail_threshold(x: float, tau: float) -> float:
    return 2.0 * math.exp(EULER_GAMMA) * math.sqrt(x) / math.log(x) * tau


def tail_empirical(records, x: float, alpha: float, tau_grid) -> TailCurve:
    """Proportion of records with h(d) >= 2 e^gamma sqrt(x) tau / log(x),
    paired with the leading-order model curve."""
    taus = np.asarray(tau_grid, dtype=np.float64)
    hs = np.array([r.h for r in records], dtype=np.float64)
    emp = np.array([np.mean(hs >= tail_threshold(x, t)) for t in taus])
    mod = np.array([model.tail_formula(t) for t in taus])
    return TailCurve(tau=taus, empirical=emp, model=mod)


# ---------------------------------------------------------------------------
# Counting discriminants with bounded class number


def bounded_count_constant(alpha: float, p_trunc: int = 100_000) -> float:
    """2 alpha^2 (4 alpha + 3)/3 prod_p (1 - (2p-1)/p^4), truncated; the tail
    beyond p_trunc is below sum 2/p^3 < p_trunc^-2."""
    if not 0 < alpha < 0.5:
        raise ValueError("bounded_count_constant: alpha in (0, 1/2)")
    ps = model.primes_upto(p_trunc).astype(np.float64)
    prod = float(np.exp(np.log1p(-(2.0 * ps - 1.0) / ps**4).sum()))
    return 2.0 * alpha**2 * (4.0 * alpha + 3.0) / 3.0 * prod


def class_count_cumulative(records, h_grid, alpha: float,
                           p_trunc: int = 100_000) -> list:
    """Rows (H, count, reference): count = #{d in records: h(d) <= H},
    reference = bounded_count_constant(alpha) H log^3 H."""
    hs = np.array([r.h for r in records])
    const = bounded_count_constant(alpha, p_trunc)
    out = []
    for hmax in h_grid:
        cnt = int(np.count_nonzero(hs <= hmax))
        ref = const * hmax * math.log(hmax) ** 3
        out.append((int(hmax), cnt, ref))
    return out
