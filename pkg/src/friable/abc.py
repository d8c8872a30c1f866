"""Exact count of friable solutions to a + b = c.

N(x, y) = #{(a, b, c) in S(x, y)^3 : a + b = c} is the sum, over c in S(x, y),
of the self-convolution of the indicator of S(x, y) at c. The convolution is
done with a number-theoretic transform over NTT-friendly primes below 2^31,
so every count is an exact integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .saddle import SaddleData
from .sieve import SmoothTable, indicator_vector, psi_exact

# (prime, primitive root, largest supported power-of-two length exponent)
NTT_PRIMES = (
    (2013265921, 31, 27),
    (1811939329, 13, 26),
    (469762049, 3, 26),
)
LENGTH_CAP = 1 << 27


def _ntt(a: np.ndarray, p: int, root: int) -> np.ndarray:
    """Length-L transform X_k = sum_j a_j root^(jk) mod p (L a power of two).

    Iterative Cooley-Tukey without bit reversal: the array is viewed as an
    (m, L/m) matrix whose rows are the size-m transforms of interleaved
    subsequences, and each pass doubles m.
    """
    n = a.size
    x = a.reshape(1, n)
    m = 1
    while m < n:
        half = x.shape[1] // 2
        w = pow(root, n // (2 * m), p)
        factor = _powers(w, m, p)[:, None]
        ev = x[:, :half]
        od = x[:, half:] * factor
        od %= p
        top = ev + od
        top %= p
        bot = ev - od
        bot %= p
        x = np.vstack((top, bot))
        m *= 2
    return x.ravel()


def _powers(w: int, m: int, p: int) -> np.ndarray:
    out = np.empty(m, dtype=np.int64)
    out[0] = 1
    filled = 1
    step = w
    # doubling: out[filled:2*filled] = out[:filled] * w^filled
    while filled < m:
        take = min(filled, m - filled)
        out[filled : filled + take] = out[:take] * step % p
        filled += take
        step = step * step % p
    return out


def _cyclic_square(v: np.ndarray, length: int, p: int, g: int) -> np.ndarray:
    root = pow(g, (p - 1) // length, p)
    buf = np.zeros(length, dtype=np.int64)
    buf[: v.size] = v % p
    f = _ntt(buf, p, root)
    f = f * f % p
    inv_root = pow(root, p - 2, p)
    out = _ntt(f, p, inv_root)
    out = out * pow(length, p - 2, p) % p
    return out


def convolve_exact(v) -> np.ndarray:
    """Exact self-convolution (v*v)[k] = sum_i v[i] v[k-i] of an integer vector.

    Uses as many NTT primes as the size bound len(v) * max|v|^2 requires and
    recombines residues by the Chinese remainder theorem.
    """
    v = np.asarray(v)
    if v.size == 0:
        return np.zeros(0, dtype=np.int64)
    if not np.issubdtype(v.dtype, np.integer):
        raise TypeError("convolve_exact needs an integer array")
    v = v.astype(np.int64)
    n_out = 2 * v.size - 1
    length = 1 << (n_out - 1).bit_length()
    if length > LENGTH_CAP:
        raise CapacityError(f"convolution length {length} exceeds cap {LENGTH_CAP}")
    vmax = int(np.abs(v).max())
    bound = v.size * vmax * vmax
    signed = bool((v < 0).any())
    need = 2 * bound + 1 if signed else bound + 1

    primes = []
    prod = 1
    for p, g, k in NTT_PRIMES:
        if primes and prod >= need:
            break
        if length > (1 << k):
            raise CapacityError(f"length {length} too long for modulus {p}")
        primes.append((p, g))
        prod *= p
    if prod < need:
        raise CapacityError("value bound exceeds the product of available moduli")

    residues = [_cyclic_square(v, length, p, g)[:n_out] for p, g in primes]
    if len(primes) == 1:
        out = residues[0]
    elif len(primes) == 2:
        (p1, _), (p2, _) = primes
        r1, r2 = residues
        t = (r2 - r1) % p2 * pow(p1, -1, p2) % p2
        out = r1 + p1 * t  # < p1 p2 < 2^63
    else:
        out = _crt_objects(residues, [p for p, _ in primes])
    if signed:
        out = np.where(out > prod // 2, out - prod, out)
    return out


def _crt_objects(residues, moduli) -> np.ndarray:
    acc = residues[0].astype(object)
    mod = moduli[0]
    for r, p in zip(residues[1:], moduli[1:]):
        inv = pow(mod, -1, p)
        t = ((r.astype(object) - acc) * inv) % p
        acc = acc + mod * t
        mod *= p
    return acc


def count_abc_exact(t: SmoothTable, x: int, y: float) -> int:
    """N(x, y): ordered (a, b) in S(x, y)^2 with a + b in S(x, y)."""
    v = indicator_vector(t, int(x), y)
    conv = convolve_exact(v)
    return int(np.dot(conv[: v.size], v.astype(np.int64)))


@dataclass(frozen=True)
class AbcReport:
    x: int
    y: float
    n_exact: int
    psi: int
    prediction: float
    ratio: float
    bound_shape: float


def abc_report(t: SmoothTable, sd: SaddleData | None, x: int, y: float) -> AbcReport:
    """Exact N(x, y) against the prediction Psi(x, y)^3 / (2x)."""
    n = count_abc_exact(t, x, y)
    psi = psi_exact(t, x, y)
    pred = psi**3 / (2.0 * x)
    u = sd.u if sd is not None else math.log(x) / math.log(y)
    return AbcReport(
        x=int(x),
        y=float(y),
        n_exact=n,
        psi=psi,
        prediction=pred,
        ratio=n / pred,
        bound_shape=math.log(u + 1) / math.log(y),
    )
