"""Saddle-point machinery for Psi(x, y).

The saddle point alpha(x, y) is the minimiser of sigma -> x^sigma zeta(sigma, y),
i.e. the root of

    sum_{p <= y} log p / (p^alpha - 1) = log x.

From alpha we get the Hildebrand-Tenenbaum estimate
x^alpha zeta(alpha, y) / (alpha sqrt(2 pi sigma2)) and the Rankin bound.
All prime sums are accumulated with :func:`math.fsum`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError
from .sieve import factorize, euler_phi, small_primes

ALPHA_LO = 1e-6
ALPHA_HI = 1.5
ALPHA_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@lru_cache(maxsize=32)
def _primes_cached(n: int) -> np.ndarray:
    p = small_primes(n)
    p.flags.writeable = False
    return p


def primes_upto(y: float) -> np.ndarray:
    """Primes p <= y, cached per integer part of y."""
    return _primes_cached(int(math.floor(y)))


@dataclass(frozen=True)
class SaddleData:
    """Saddle-point bundle for one (x, y)."""

    x: float
    y: float
    u: float
    alpha: float
    sigma2: float
    zeta_alpha_y: float
    h_u: float
    primes_y: np.ndarray = field(repr=False)
    log_zeta_alpha_y: float = 0.0

    @property
    def residual(self) -> float:
        return alpha_residual(self.alpha, self.primes_y, math.log(self.x))


def alpha_residual(alpha: float, primes: np.ndarray, log_x: float) -> float:
    """sum_{p} log p / (p^alpha - 1) - log x."""
    logp = np.log(primes.astype(np.float64))
    return math.fsum(logp / np.expm1(alpha * logp)) - log_x


def _sigma2(alpha: float, primes: np.ndarray) -> float:
    logp = np.log(primes.astype(np.float64))
    d = np.expm1(alpha * logp)
    # p^a (log p)^2 / (p^a - 1)^2 written as (log p)^2 / ((p^a - 1)(1 - p^-a))
    return math.fsum(logp * logp / (d * -np.expm1(-alpha * logp)))


def solve_alpha(x: float, y: float, primes: np.ndarray | None = None) -> SaddleData:
    """Solve the saddle-point equation for alpha(x, y), 2 <= y <= x.

    Safeguarded Newton iteration inside a bisection bracket; the residual is
    strictly decreasing and convex in alpha, with derivative -sigma2.
    """
    if not (2 <= y <= x):
        raise DomainError(f"need 2 <= y <= x, got x={x}, y={y}")
    if primes is None:
        primes = primes_upto(y)
    log_x = math.log(x)
    lo, hi = ALPHA_LO, ALPHA_HI
    f_lo = alpha_residual(lo, primes, log_x)
    f_hi = alpha_residual(hi, primes, log_x)
    while f_hi > 0 and hi < 64:
        lo, f_lo = hi, f_hi
        hi *= 2
        f_hi = alpha_residual(hi, primes, log_x)
    if not (f_lo > 0 > f_hi):
        raise NumericError(
            "could not bracket the saddle point",
            {"x": x, "y": y, "f_lo": f_lo, "f_hi": f_hi, "bracket": (lo, hi)},
        )

    a = 1.0 if lo < 1.0 < hi else 0.5 * (lo + hi)
    for _ in range(200):
        f = alpha_residual(a, primes, log_x)
        if f > 0:
            lo = a
        elif f < 0:
            hi = a
        else:
            break
        step = f / _sigma2(a, primes)
        a_new = a + step
        if not (lo < a_new < hi):
            a_new = 0.5 * (lo + hi)
        if abs(a_new - a) <= ALPHA_TOL * max(1.0, a) or hi - lo <= ALPHA_TOL:
            a = a_new
            break
        a = a_new
    else:
        raise NumericError("saddle-point iteration did not converge", {"x": x, "y": y, "alpha": a})

    res = alpha_residual(a, primes, log_x)
    if abs(res) > RESIDUAL_TOL * log_x:
        raise NumericError("saddle-point residual too large", {"alpha": a, "residual": res})
    logz = log_zeta_y(a, y, primes)
    u = log_x / math.log(y)
    return SaddleData(
        x=float(x),
        y=float(y),
        u=u,
        alpha=a,
        sigma2=_sigma2(a, primes),
        zeta_alpha_y=math.exp(logz),
        h_u=h_of_u(u),
        primes_y=primes,
        log_zeta_alpha_y=logz,
    )


def alpha_asymptotic(x: float, y: float) -> float:
    """Leading term log(1 + y/log x)/log y of the asymptotic for alpha."""
    if not (2 <= y <= x):
        raise DomainError(f"need 2 <= y <= x, got x={x}, y={y}")
    return math.log1p(y / math.log(x)) / math.log(y)


def log_zeta_y(s, y: float, primes: np.ndarray | None = None):
    """log zeta(s, y) = -sum_{p <= y} log(1 - p^-s).

    ``s`` may be a real or complex scalar, or an array of them. The complex
    logarithm is the sum of principal branches, which is the continuous
    branch along vertical lines since each |p^-s| < 1.
    """
    if primes is None:
        primes = primes_upto(y)
    logp = np.log(primes.astype(np.float64))
    s_arr = np.asarray(s)
    if np.any(np.real(s_arr) <= 0):
        raise DomainError("zeta(s, y) needs Re(s) > 0")
    if s_arr.ndim == 0:
        if np.iscomplexobj(s_arr):
            terms = -np.log1p(-np.exp(-complex(s) * logp))
            return complex(math.fsum(terms.real), math.fsum(terms.imag))
        return math.fsum(-np.log1p(-np.exp(-float(s) * logp)))
    terms = -np.log1p(-np.exp(-s_arr[..., None] * logp))
    return terms.sum(axis=-1)


def zeta_y(s, y: float, primes: np.ndarray | None = None):
    """Truncated Euler product prod_{p <= y} (1 - p^-s)^-1, Re(s) > 0."""
    lz = log_zeta_y(s, y, primes)
    if isinstance(lz, float):
        return math.exp(lz)
    if isinstance(lz, complex):
        return complex(np.exp(lz))
    return np.exp(lz)


def zeta_q_y(s, q: int, y: float, primes: np.ndarray | None = None):
    """zeta(s, q; y) = q^(1-s)/phi(q) prod_{p | q} (1 - p^(s-1)) zeta(s, y)."""
    fac = factorize(q)
    if fac and max(fac) > y:
        raise DomainError(f"q={q} is not {y}-friable")
    return zeta_q_factor(s, q) * zeta_y(s, y, primes)


def zeta_q_factor(s, q: int):
    """The factor q^(1-s)/phi(q) prod_{p | q}(1 - p^(s-1)) multiplying zeta(s, y)."""
    s = np.asarray(s) if np.ndim(s) else s
    out = q ** (1 - s) / euler_phi(q)
    for p in factorize(q):
        out = out * (1 - p ** (s - 1))
    return out


def sigma2(sd: SaddleData) -> float:
    """sum_{p <= y} p^alpha (log p)^2 / (p^alpha - 1)^2 at the saddle point."""
    return _sigma2(sd.alpha, sd.primes_y)


def ht_psi_estimate(sd: SaddleData) -> float:
    """x^alpha zeta(alpha, y) / (alpha sqrt(2 pi sigma2))."""
    a = sd.alpha
    return math.exp(a * math.log(sd.x) + sd.log_zeta_alpha_y - math.log(a * math.sqrt(2 * math.pi * sd.sigma2)))


def rankin_bound(sd: SaddleData, sigma: float) -> float:
    """x^sigma zeta(sigma, y), an upper bound for Psi(x, y) for every sigma > 0."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return math.exp(sigma * math.log(sd.x) + log_zeta_y(sigma, sd.y, sd.primes_y))


def h_of_u(u: float) -> float:
    """H(u) = exp(u / log(u+1)^2) for u >= 1."""
    if u < 1:
        raise DomainError(f"H(u) needs u >= 1, got {u}")
    return math.exp(u / math.log1p(u) ** 2)


def sigma2_shape(x: float, y: float) -> float:
    """log x log y (1 + log x / y), the leading-order size of sigma2."""
    lx = math.log(x)
    return lx * math.log(y) * (1 + lx / y)
