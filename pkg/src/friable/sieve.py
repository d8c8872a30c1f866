"""Largest-prime-factor sieve and exact counts of friable integers.

Everything downstream that needs an exact value of Psi(x, y), the set
S(x, y) or an arithmetic function (Moebius, Euler phi) goes through a
:class:`SmoothTable`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, OutOfRangeError

TABLE_CAP = 10**9
SEGMENT_SIZE = 1 << 20


@dataclass(frozen=True)
class SmoothTable:
    """Immutable table of P(n), the largest prime factor, for n <= x_max.

    Attributes:
        x_max: largest n covered.
        lpf: int32 array of length x_max + 1 with lpf[n] = P(n) for n >= 1,
            lpf[1] = 1 and lpf[0] = 0.
        primes: sorted int64 array of the primes <= x_max.
    """

    x_max: int
    lpf: np.ndarray
    primes: np.ndarray

    def primes_upto(self, y: float) -> np.ndarray:
        """Primes p <= y (y may exceed x_max only if no prime is missed)."""
        if y > self.x_max:
            raise OutOfRangeError(f"y={y} exceeds table range {self.x_max}")
        return self.primes[: np.searchsorted(self.primes, math.floor(y), side="right")]


def small_primes(n: int) -> np.ndarray:
    """Primes <= n by a plain Eratosthenes sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if is_p[i]:
            is_p[i * i :: i] = False
    return np.flatnonzero(is_p).astype(np.int64)


def _sieve_segment(lo: int, hi: int, base: np.ndarray, out: np.ndarray) -> None:
    # After dividing out every prime <= sqrt(hi), the cofactor is 1 or the
    # single prime factor above sqrt(hi), which is then the largest one.
    n = hi - lo
    rem = np.arange(lo, hi, dtype=np.int64)
    big = np.zeros(n, dtype=np.int64)
    for p in base:
        p = int(p)
        if p >= hi:
            break
        start = (-lo) % p
        big[start::p] = p
        pk = p
        while pk < hi:
            rem[(-lo) % pk :: pk] //= p
            pk *= p
    seg = np.where(rem > 1, rem, big)
    if lo <= 1 < hi:
        seg[1 - lo] = 1
    if lo == 0:
        seg[0] = 0
    out[lo:hi] = seg


def build_table(x_max: int, segment_size: int = SEGMENT_SIZE, threads: int = 1) -> SmoothTable:
    """Build the largest-prime-factor table for 1 <= n <= x_max.

    The range is sieved in independent segments of ``segment_size``
    entries; with ``threads > 1`` segments are dispatched to a thread pool.
    """
    x_max = int(x_max)
    if x_max < 1 or x_max > TABLE_CAP:
        raise CapacityError(f"x_max must lie in [1, {TABLE_CAP}], got {x_max}")
    base = small_primes(math.isqrt(x_max) + 1)
    lpf = np.empty(x_max + 1, dtype=np.int32)
    bounds = [(lo, min(lo + segment_size, x_max + 1)) for lo in range(0, x_max + 1, segment_size)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: _sieve_segment(b[0], b[1], base, lpf), bounds))
    else:
        for lo, hi in bounds:
            _sieve_segment(lo, hi, base, lpf)
    primes = np.flatnonzero(lpf == np.arange(x_max + 1, dtype=np.int32))
    primes = primes[primes >= 2].astype(np.int64)
    lpf.flags.writeable = False
    primes.flags.writeable = False
    return SmoothTable(x_max=x_max, lpf=lpf, primes=primes)


def _check_range(t: SmoothTable, x: float, y: float) -> int:
    if y < 1:
        raise DomainError(f"y must be >= 1, got {y}")
    n = math.floor(x)
    if n > t.x_max:
        raise OutOfRangeError(f"x={x} exceeds table range {t.x_max}")
    return max(n, 0)


def psi_exact(t: SmoothTable, x: float, y: float) -> int:
    """Psi(x, y) = #{n <= x : P(n) <= y}."""
    n = _check_range(t, x, y)
    return int(np.count_nonzero(t.lpf[1 : n + 1] <= y))


def enumerate_smooth(t: SmoothTable, x: float, y: float) -> np.ndarray:
    """Sorted array of the elements of S(x, y)."""
    n = _check_range(t, x, y)
    return np.flatnonzero(t.lpf[1 : n + 1] <= y).astype(np.int64) + 1


def indicator_vector(t: SmoothTable, x: int, y: float) -> np.ndarray:
    """0/1 vector v of length x + 1 with v[n] = 1 iff n is in S(x, y)."""
    n = _check_range(t, x, y)
    v = np.zeros(n + 1, dtype=np.uint8)
    v[1:] = t.lpf[1 : n + 1] <= y
    return v


def psi_buchstab_array(n_max: int, y: float) -> np.ndarray:
    """Psi(m, y) for m = 0..n_max from Psi(m, y) = 1 + sum_{p <= y} Psi(m/p, p).

    Independent of any table; meant as a cross-check for moderate x. With
    f_k(m) = Psi(m, p_k) the recursion reads f_k(m) = 1 + s_{k-1}(m) + f_k(m // p_k),
    s_k(m) = sum_{j <= k} f_j(m // p_j), and f_k is filled over the blocks
    [p_k^i, p_k^(i+1)) so the self-reference always hits finished entries.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    m = np.arange(n_max + 1, dtype=np.int64)
    f = np.ones(n_max + 1, dtype=np.int64)  # f_0: only n = 1
    f[0] = 0
    s = np.zeros(n_max + 1, dtype=np.int64)
    for p in small_primes(min(math.floor(y), max(n_max, 1))):
        p = int(p)
        g = np.empty_like(f)
        g[:p] = f[:p]  # no multiple of p below p
        lo = p
        while lo <= n_max:
            hi = min(lo * p, n_max + 1)
            g[lo:hi] = 1 + s[lo:hi] + g[m[lo:hi] // p]
            lo = hi
        s += g[m // p]
        f = g
    return f


def psi_buchstab(x: float, y: float) -> int:
    """Psi(x, y) by the Buchstab recursion (see :func:`psi_buchstab_array`)."""
    n = math.floor(x)
    if n < 1:
        return 0
    return int(psi_buchstab_array(n, y)[n])


def factorize(n: int, t: SmoothTable | None = None) -> dict[int, int]:
    """Prime factorization {p: k} of n >= 1.

    Uses the table when n is covered, trial division otherwise.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    out: dict[int, int] = {}
    if t is not None and n <= t.x_max:
        while n > 1:
            p = int(t.lpf[n])
            while n % p == 0:
                n //= p
                out[p] = out.get(p, 0) + 1
        return out
    d = 2
    while d * d <= n:
        while n % d == 0:
            n //= d
            out[d] = out.get(d, 0) + 1
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def largest_prime_factor(n: int) -> int:
    return max(factorize(n), default=1)


def mobius(n: int, t: SmoothTable | None = None) -> int:
    f = factorize(n, t)
    if any(k > 1 for k in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int, t: SmoothTable | None = None) -> int:
    out = int(n)
    for p in factorize(n, t):
        out = out // p * (p - 1)
    return out


def divisors(n: int, t: SmoothTable | None = None) -> list[int]:
    divs = [1]
    for p, k in factorize(n, t).items():
        divs = [d * p**e for d in divs for e in range(k + 1)]
    return sorted(divs)


def mobius_array(t: SmoothTable, x: int) -> np.ndarray:
    """mu(n) for 0 <= n <= x (mu(0) set to 0), from the lpf table."""
    n = _check_range(t, x, 1)
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    for p in t.primes[t.primes <= n]:
        p = int(p)
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
    return mu
