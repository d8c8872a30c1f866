"""Exponential sums over friable integers and their major-arc predictors.

E(x, y; theta) = sum_{n in S(x, y)} e(n theta), e(t) = exp(2 pi i t).

Phases n*theta are reduced mod 1 with an error-free (Dekker) product before
the trigonometric call, so n up to 1e9 keeps full phase accuracy. Sums of
cos/sin are accumulated with :func:`math.fsum`.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np

from .dickman import DickmanTable, lambda_at_integers
from .errors import AliasingError, DomainError, InputError, NumericError, PoleError
from .saddle import SaddleData, log_zeta_y, zeta_q_factor
from .sieve import SmoothTable, divisors, enumerate_smooth, euler_phi, factorize, indicator_vector, mobius

TWO_PI = 2.0 * math.pi
PHI0_MAX_TERMS = 5000
PHI0_QUAD_LAMBDA = 700.0
ASYM_MIN_Z = 40.0


@dataclass(frozen=True)
class ExpSumValue:
    re: float
    im: float
    n_terms: int = 0

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)


@dataclass(frozen=True)
class MajorArc:
    """theta = a/q + eta with (a, q) = 1, 0 <= a < q, |eta| <= 1/(qQ)."""

    a: int
    q: int
    eta: float
    Q: int


# -- phases -------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def frac_phase(n: np.ndarray, theta: float) -> np.ndarray:
    """n * theta mod 1, in [-1/2, 1/2], via an error-free product."""
    nf = np.asarray(n, dtype=np.float64)
    p = nf * theta
    nh, nl = _split(nf)
    th, tl = _split(theta)
    err = ((nh * th - p) + nh * tl + nl * th) + nl * tl
    f = (p - np.rint(p)) + err
    return f - np.rint(f)


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _phase_sum(n: np.ndarray, theta: float, coeff=None) -> complex:
    ang = TWO_PI * frac_phase(n, theta)
    c, s = np.cos(ang), np.sin(ang)
    if coeff is None:
        return complex(math.fsum(c), math.fsum(s))
    coeff = np.asarray(coeff)
    if np.iscomplexobj(coeff):
        re = coeff.real * c - coeff.imag * s
        im = coeff.real * s + coeff.imag * c
        return complex(math.fsum(re), math.fsum(im))
    return complex(math.fsum(coeff * c), math.fsum(coeff * s))


# -- exact sums -----------------------------------------------------------------


def exp_sum_exact(t: SmoothTable, x: float, y: float, theta: float) -> ExpSumValue:
    """E(x, y; theta) summed exactly over S(x, y)."""
    n = enumerate_smooth(t, x, y)
    z = _phase_sum(n, theta)
    return ExpSumValue(z.real, z.imag, int(n.size))


def exp_sum_weighted(
    t: SmoothTable,
    x: float,
    y: float,
    theta: float,
    weights: Mapping[int, complex] | Callable[[int], complex] | np.ndarray,
) -> ExpSumValue:
    """sum_{n in S(x, y)} f(n) e(n theta).

    ``weights`` is a mapping n -> f(n), a callable, or an array indexed by n.
    """
    n = enumerate_smooth(t, x, y)
    if isinstance(weights, np.ndarray):
        if weights.size <= (n[-1] if n.size else 0):
            raise InputError("weight array shorter than the summation range")
        f = weights[n]
    elif isinstance(weights, Mapping):
        missing = [int(k) for k in n if int(k) not in weights]
        if missing:
            raise InputError(f"no weight for n={missing[:5]}{'...' if len(missing) > 5 else ''}")
        f = np.array([weights[int(k)] for k in n], dtype=np.complex128)
    else:
        f = np.array([weights(int(k)) for k in n], dtype=np.complex128)
    z = _phase_sum(n, theta, f)
    return ExpSumValue(z.real, z.imag, int(n.size))


def _gcd_coefficients(n: np.ndarray, q: int) -> np.ndarray:
    """mu(q/(q, n)) / phi(q/(q, n)) for each n."""
    g = np.gcd(n, q)
    out = np.empty(n.size)
    for d in divisors(q):
        out[g == d] = mobius(q // d) / euler_phi(q // d)
    return out


def v_exact(t: SmoothTable, x: float, y: float, q: int, eta: float) -> ExpSumValue:
    """V(x, y; q, eta) = sum_{n in S(x,y)} mu(q/(q,n))/phi(q/(q,n)) e(n eta)."""
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    n = enumerate_smooth(t, x, y)
    z = _phase_sum(n, eta, _gcd_coefficients(n, int(q)))
    return ExpSumValue(z.real, z.imag, int(n.size))


class ParsevalResult(NamedTuple):
    value: int
    raw: float
    rounding_error: float


def discrete_parseval(t: SmoothTable, x: float, y: float, N: int) -> ParsevalResult:
    """(1/N) sum_{j < N} |E(x, y; j/N)|^2, which equals Psi(x, y) when N > x.

    The N sample values E(x, y; j/N) come from one length-N FFT of the
    indicator of S(x, y).
    """
    n = math.floor(x)
    if N <= n:
        raise AliasingError(f"N={N} must exceed floor(x)={n}")
    v = indicator_vector(t, n, y)
    buf = np.zeros(int(N))
    buf[: v.size] = v
    e_vals = np.fft.ifft(buf) * N  # E(j/N) = sum v[n] e(nj/N)
    raw = math.fsum(np.abs(e_vals) ** 2) / N
    value = int(round(raw))
    return ParsevalResult(value, raw, abs(raw - value))


# -- rational approximation ---------------------------------------------------------


def _convergent_denominators(theta: Fraction, limit: int):
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    r = theta
    while True:
        a = math.floor(r)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > limit:
            return
        yield k1
        frac = r - a
        if frac == 0:
            return
        r = 1 / frac


def rational_approx(theta: float, Q: int) -> MajorArc:
    """Smallest q <= Q with |theta - a/q| <= 1/(qQ) for some a coprime to q.

    The smallest such q is a best approximation of the second kind of theta,
    hence q = 1 or a continued-fraction denominator; those are tried in order.
    """
    Q = int(Q)
    if Q < 3:
        raise DomainError(f"Q must be >= 3, got {Q}")
    th = Fraction(theta)
    bound = Fraction(1, Q)
    for q in [1, *_convergent_denominators(th, Q)]:
        a = math.floor(q * th + Fraction(1, 2))
        if abs(q * th - a) <= bound:
            eta = float(th - Fraction(a, q))
            return MajorArc(a=a % q, q=q, eta=eta, Q=Q)
    raise NumericError("no rational approximation found", {"theta": theta, "Q": Q})


# -- the kernel Phi0 -------------------------------------------------------------------


def _pole_order(s: complex):
    if s.imag == 0 and s.real <= 0 and float(s.real).is_integer():
        return int(-s.real)
    return None


def phi0_residue(lam: float, n: int) -> complex:
    """Residue of s -> Phi0(lam, s) at s = -n: (2 i pi lam)^n / n!."""
    return (2j * math.pi * lam) ** n / math.factorial(n)


def phi0_residue_limit(lam: float, n: int, delta: float = 1e-7) -> complex:
    """Residue at s = -n read off as the limit of (s + n) Phi0(lam, s).

    Averages eps * Phi0(lam, -n + eps) over eps in {+-delta, +-i delta}, which
    cancels the regular part through third order in delta.
    """
    acc = 0j
    for e in (delta, -delta, 1j * delta, -1j * delta):
        s = complex(-n) + e
        acc += (s + n) * phi0(lam, s)
    return acc / 4


def _phi0_series_double(z: complex, s: complex):
    total = 1.0 / s
    term = 1.0 + 0j
    biggest = abs(total)
    az = abs(z)
    for n in range(1, PHI0_MAX_TERMS):
        term *= z / n
        contrib = term / (n + s)
        total += contrib
        a = abs(contrib)
        biggest = max(biggest, a)
        if n > az and abs(term) * az / (n + 1) / max(abs(n + 1 + s), 1e-300) < 1e-17 * max(abs(total), 1e-300):
            return total, biggest
    raise NumericError("Phi0 series did not converge", {"z": z, "s": s})


def _phi0_series_mp(z: complex, s: complex, digits: int) -> complex:
    with mpmath.workdps(digits):
        zz = mpmath.mpc(z)
        ss = mpmath.mpc(s)
        total = 1 / ss
        term = mpmath.mpc(1)
        eps = mpmath.mpf(10) ** (-20)
        for n in range(1, 40 * PHI0_MAX_TERMS):
            term *= zz / n
            contrib = term / (n + ss)
            total += contrib
            if n > abs(zz) and abs(contrib) < eps * abs(total) * mpmath.mpf(10) ** (-5):
                return complex(total)
    raise NumericError("extended-precision Phi0 series did not converge", {"z": z, "s": s})


def phi0_quad(lam: float, s: complex, dps: int = 30) -> complex:
    """Phi0(lam, s) = int_0^1 e(lam t) t^(s-1) dt by tanh-sinh quadrature, Re(s) > 0."""
    if s.real <= 0:
        raise DomainError("the integral representation needs Re(s) > 0")
    with mpmath.workdps(dps):
        z = 2j * mpmath.pi * lam
        ss = mpmath.mpc(s)
        pieces = max(2, int(2 * abs(lam)) + 2)
        pts = [mpmath.mpf(k) / pieces for k in range(pieces + 1)]
        val = mpmath.quad(lambda u: mpmath.exp(z * u) * u ** (ss - 1), pts)
        return complex(val)


def phi0_asymptotic(lam: float, s: complex):
    """Phi0 for large |lam| and Re(s) > 0, or None when not accurate enough.

    Phi0(lam, s) = Gamma(s) (-z)^(-s) - int_1^oo e^(zt) t^(s-1) dt with
    z = 2 i pi lam; the tail integral has the asymptotic expansion
    -(e^z / z) sum_k (s-1)(s-2)...(s-k) (-1/z)^k, truncated at its smallest
    term, which is about e^(-|z|).
    """
    s = complex(s)
    z = 2j * math.pi * lam
    az = abs(z)
    if s.real <= 0 or az < ASYM_MIN_Z:
        return None
    tail = 0j
    term = 1.0 + 0j
    prev = math.inf
    for k in range(1, int(az) + 2):
        tail += term
        term *= -(s - k) / z
        a = abs(term)
        if a < 1e-17 * abs(tail):
            break
        if a > prev:  # past the smallest term
            return None
        prev = a
    else:
        return None
    tail *= -cmath.exp(z) / z
    # principal branch: arg(-z) = -pi/2 sign(lam)
    log_mz = complex(math.log(az), -math.copysign(math.pi / 2, lam))
    g = complex(mpmath.gamma(mpmath.mpc(s)))
    return g * cmath.exp(-s * log_mz) - tail


def phi0(lam: float, s: complex) -> complex:
    """Phi0(lam, s) = int_0^1 e(lam t) t^(s-1) dt, continued to all s.

    Evaluated from sum_{n>=0} (2 i pi lam)^n / ((n + s) n!), in double
    precision when cancellation is mild and in extended precision otherwise.
    For |lam| > 700 the integral is used after shifting Re(s) > 0 with
    Phi0(lam, s) = (e(lam) - 2 i pi lam Phi0(lam, s + 1)) / s.
    Raises :class:`PoleError` at s = 0, -1, -2, ... (except lam = 0, s < 0).
    """
    s = complex(s)
    lam = float(lam)
    n_pole = _pole_order(s)
    if n_pole is not None:
        res = phi0_residue(lam, n_pole)
        if n_pole == 0 or res != 0:
            raise PoleError(f"Phi0 has a pole at s={-n_pole}", res)
    if lam == 0.0:
        return 1.0 / s
    z = 2j * math.pi * lam
    if abs(lam) > PHI0_QUAD_LAMBDA:
        if s.real > 0:
            return phi0_quad(lam, s, dps=20)
        return (cmath.exp(z) - z * phi0(lam, s + 1)) / s
    if s.real > 0:
        asym = phi0_asymptotic(lam, s)
        if asym is not None:
            return asym
    total, biggest = _phi0_series_double(z, s)
    if biggest <= 1e2 * abs(total):
        return complex(total)
    # the double-precision total is unreliable here; size the working
    # precision from the largest term and confirm with a second pass
    digits = int(math.log10(biggest)) + 30
    val = _phi0_series_mp(z, s, digits)
    for _ in range(8):
        check = _phi0_series_mp(z, s, digits + 20)
        if abs(check - val) <= 1e-15 * abs(check):
            return check
        digits += 20
        val = check
    raise NumericError("Phi0 extended-precision evaluation unstable", {"lam": lam, "s": s})


def phi0_vec(lam: float, s: np.ndarray) -> np.ndarray:
    """phi0 over an array of s values (fixed lam)."""
    s = np.asarray(s, dtype=np.complex128)
    if lam == 0.0:
        return 1.0 / s
    z = 2j * math.pi * lam
    if abs(z) <= 8.0:
        total = 1.0 / s
        term = 1.0 + 0j
        for n in range(1, PHI0_MAX_TERMS):
            term *= z / n
            total = total + term / (n + s)
            if n > abs(z) and abs(term) < 1e-18:
                return total
    return np.array([phi0(lam, complex(v)) for v in s.ravel()]).reshape(s.shape)


def phi0_bounds_check(lam: float, s: complex) -> bool:
    """Both explicit bounds |Phi0| <= 1/sigma and |Phi0| <= (1 + 2 pi |lam|/(sigma+1))/|s|."""
    s = complex(s)
    if s.real < 0.5:
        raise DomainError("the bounds are stated for Re(s) >= 1/2")
    v = abs(phi0(lam, s))
    slack = 1 + 1e-12
    b1 = 1.0 / s.real
    b2 = (1.0 + TWO_PI * abs(lam) / (s.real + 1.0)) / abs(s)
    return v <= b1 * slack and v <= b2 * slack


# -- predictors -----------------------------------------------------------------------


def _check_friable_q(q: int, y: float) -> None:
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    f = factorize(q)
    if f and max(f) > y:
        raise DomainError(f"q={q} is not {y}-friable")


def major_arc_main_term(sd: SaddleData, psi: float, q: int, eta: float) -> complex:
    """alpha q^(1-alpha)/phi(q) prod_{p|q}(1 - p^(alpha-1)) Phi0(eta x, alpha) Psi(x, y)."""
    _check_friable_q(q, sd.y)
    a = sd.alpha
    return a * zeta_q_factor(a, q) * phi0(eta * sd.x, a) * psi


def v_tilde(
    t: SmoothTable,
    dt: DickmanTable,
    x: float,
    y: float,
    q: int,
    eta: float,
    lam: np.ndarray | None = None,
) -> complex:
    """sum_{k|q} mu(q/k) k / phi(q) sum_{n <= x, k | n} e(n eta) lambda(n/k, y).

    ``lam`` may carry precomputed lambda(m, y) for m <= x (index m).
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    n_max = math.floor(x)
    if lam is None:
        lam = lambda_at_integers(dt, n_max, y)
    elif lam.size <= n_max:
        raise InputError("lambda table shorter than floor(x) + 1")
    phi_q = euler_phi(q)
    total = 0j
    for k in divisors(q):
        mu = mobius(q // k)
        if mu == 0:
            continue
        m = np.arange(1, n_max // k + 1, dtype=np.int64)
        total += mu * k / phi_q * _phase_sum(m * k, eta, lam[m])
    return total


# -- truncated Perron integral ---------------------------------------------------------

# Gauss-Kronrod 7/15 nodes on [-1, 1] (nonnegative half).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G7_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes of the half table
_g_idx = [1, 3, 5, 7]
for _i, _w in zip(_g_idx, _WG7):
    G7_WEIGHTS[_i] = _w
    G7_WEIGHTS[14 - _i] = _w


class PerronResult(NamedTuple):
    value: complex
    error_estimate: float
    panels: int


def _perron_integrand(sd: SaddleData, q: int, x: float, lam: float, s: np.ndarray) -> np.ndarray:
    logz = log_zeta_y(s, sd.y, sd.primes_y)
    return zeta_q_factor(s, q) * np.exp(logz + s * math.log(x)) * phi0_vec(lam, s)


def perron_numeric(
    sd: SaddleData,
    q: int,
    x: float,
    eta: float,
    T: float,
    rel_tol: float = 1e-10,
    max_depth: int = 12,
    chunk: int = 4096,
) -> PerronResult:
    """(1/2 pi i) int_{alpha-iT}^{alpha+iT} zeta(s, q; y) x^s Phi0(eta x, s) ds.

    The line Re(s) = alpha is cut into panels of width <= pi/(2 log x), each
    integrated by Gauss-Kronrod 7/15 and bisected while the Kronrod-Gauss
    difference exceeds its share of ``rel_tol * x^alpha zeta(alpha, y)``.
    """
    if T < 2:
        raise DomainError(f"T must be >= 2, got {T}")
    _check_friable_q(q, sd.y)
    a = sd.alpha
    log_x = math.log(x)
    lam = eta * x
    width = math.pi / (2 * log_x)
    n_panels = int(math.ceil(2 * T / width))
    edges = np.linspace(-T, T, n_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    scale = math.exp(a * log_x + sd.log_zeta_alpha_y)
    budget = rel_tol * scale

    total = 0j
    err_total = 0.0
    done = 0
    depth = 0
    while lo.size:
        vals = np.empty((lo.size, 15), dtype=np.complex128)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        for c0 in range(0, lo.size, chunk):
            tau = mid[c0 : c0 + chunk, None] + half[c0 : c0 + chunk, None] * GK_NODES[None, :]
            vals[c0 : c0 + chunk] = _perron_integrand(sd, q, x, lam, a + 1j * tau)
        k = (vals @ GK_WEIGHTS) * half
        g = (vals @ G7_WEIGHTS) * half
        err = np.abs(k - g)
        share = budget * (hi - lo) / (2 * T)
        ok = err <= share
        if depth >= max_depth:
            if not np.all(ok):
                raise NumericError(
                    "Perron quadrature did not converge",
                    {"unconverged_panels": int((~ok).sum()), "worst_error": float(err.max()), "T": T, "x": x},
                )
        total += _fsum_complex(k[ok])
        err_total += float(err[ok].sum())
        done += int(ok.sum())
        bad = ~ok
        lo, hi = lo[bad], hi[bad]
        m = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])
        depth += 1
    return PerronResult(total / (2 * math.pi), err_total / (2 * math.pi), done)
