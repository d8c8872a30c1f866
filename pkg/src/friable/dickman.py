"""Dickman's function and the de Bruijn approximations Lambda(x, y), lambda(t, y).

rho is tabulated on a uniform grid whose spacing divides 1, so the integer
knots (where rho loses smoothness) are grid points and no panel straddles
one. Each unit interval [k, k+1] is filled from the previous one through
the integrated form of u rho'(u) + rho(u - 1) = 0,

    u rho(u) = int_{u-1}^{u} rho(t) dt,

whose right side is a sum of positive terms. The differentiated form
rho(u) = rho(k) - int_k^u rho(t-1)/t dt loses a factor ~ k log k of relative
accuracy per interval and turns negative before u = 20 in double precision.
Panels of width ``step`` carry 8 Gauss-Legendre nodes; on each panel the
unknown node values solve a small linear collocation system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRangeError

GL_ORDER = 8


@dataclass(frozen=True)
class DickmanTable:
    """rho and rho' on the grid u_j = j * step, 0 <= u_j <= u_max.

    rho_prime at u = 1 holds the right derivative -1.
    """

    u_max: float
    step: float
    rho: np.ndarray
    rho_prime: np.ndarray

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.step))

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.rho.size) * self.step


def _lagrange_matrix(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """L[i, j] = j-th Lagrange basis polynomial on ``nodes`` evaluated at points[i]."""
    out = np.ones((points.size, nodes.size))
    for j, xj in enumerate(nodes):
        for k, xk in enumerate(nodes):
            if k != j:
                out[:, j] *= (points - xk) / (xj - xk)
    return out


def build_dickman(u_max: float = 20.0, step: float = 1e-3) -> DickmanTable:
    """Tabulate rho on [0, ceil(u_max)].

    ``step`` is snapped to 1/ceil(1/step) so that integers are grid points.
    """
    if not (u_max >= 2) or not (0 < step <= 1e-3):
        raise DomainError(f"need u_max >= 2 and 0 < step <= 1e-3, got {u_max}, {step}")
    m = int(math.ceil(1.0 / step - 1e-9))
    h = 1.0 / m
    k_max = int(math.ceil(u_max))

    xg, wg = np.polynomial.legendre.leggauss(GL_ORDER)
    xg = 0.5 * (xg + 1.0)
    wg = 0.5 * wg
    # head[i, l] = int_0^{x_i} L_l, tail[i, l] = int_{x_i}^1 L_l
    sub = (xg[:, None] * xg[None, :]).ravel()
    head = ((xg[:, None] * wg[None, :]).ravel()[:, None] * _lagrange_matrix(xg, sub)).reshape(GL_ORDER, GL_ORDER, GL_ORDER).sum(axis=1)
    tail = wg[None, :] - head

    rho = np.empty(k_max * m + 1)
    rho[: m + 1] = 1.0
    prev = np.ones((m, GL_ORDER))
    j = np.arange(m)
    eye = np.eye(GL_ORDER)
    for k in range(1, k_max):
        prev_int = h * (prev @ wg)
        tail_after = np.concatenate((np.cumsum(prev_int[::-1])[::-1][1:], [0.0]))
        t_nodes = tail_after[:, None] + h * (prev @ tail.T)
        u_nodes = k + (j[:, None] + xg[None, :]) * h
        mats = u_nodes[:, :, None] * eye - h * head[None, :, :]
        rhs = np.stack([t_nodes, np.ones_like(t_nodes)], axis=2)
        sol = np.linalg.solve(mats, rhs)
        a, b = sol[..., 0], sol[..., 1]
        # node values a_j + C_j b_j, with C_j = int_k^{u_j} rho
        grow = 1.0 + h * (b @ wg)
        add = h * (a @ wg)
        c = np.empty(m + 1)
        c[0] = 0.0
        for jj in range(m):
            c[jj + 1] = c[jj] * grow[jj] + add[jj]
        prev = a + c[:-1, None] * b
        u_ends = k + (j + 1) * h
        rho[k * m + 1 : (k + 1) * m + 1] = (tail_after + c[1:]) / u_ends

    grid = np.arange(rho.size) * h
    rho_prime = np.zeros_like(rho)
    rho_prime[m:] = -rho[: rho.size - m] / grid[m:]
    rho.flags.writeable = False
    rho_prime.flags.writeable = False
    return DickmanTable(u_max=float(k_max), step=h, rho=rho, rho_prime=rho_prime)


def _hermite(t: DickmanTable, u: np.ndarray) -> np.ndarray:
    m = t.per_unit
    pos = u * m
    idx = np.minimum(pos.astype(np.int64), t.rho.size - 2)
    s = pos - idx
    s2 = s * s
    s3 = s2 * s
    h = t.step
    return (
        (2 * s3 - 3 * s2 + 1) * t.rho[idx]
        + (s3 - 2 * s2 + s) * h * t.rho_prime[idx]
        + (-2 * s3 + 3 * s2) * t.rho[idx + 1]
        + (s3 - s2) * h * t.rho_prime[idx + 1]
    )


def rho(t: DickmanTable, u):
    """rho(u) by cubic Hermite interpolation; rho(u) = 0 for u < 0."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr > t.u_max):
        raise OutOfRangeError(f"u={np.max(arr)} exceeds table range {t.u_max}")
    out = np.where(arr <= 1.0, 1.0, 0.0)
    mid = arr > 1.0
    if np.any(mid):
        out[mid] = _hermite(t, arr[mid])
    out[arr < 0] = 0.0
    return float(out) if out.ndim == 0 else out


def rho_prime(t: DickmanTable, u):
    """rho'(u) = -rho(u - 1)/u for u >= 1 (right derivative at 1), 0 below."""
    arr = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(arr)
    hi = arr >= 1.0
    if np.any(hi):
        out[hi] = -np.asarray(rho(t, arr[hi] - 1.0)) / arr[hi]
    return float(out) if out.ndim == 0 else out


def ode_residual(t: DickmanTable) -> np.ndarray:
    """|u rho'(u) + rho(u - 1)| at grid points u > 1, with rho' from the grid.

    rho' is taken by fourth-order finite differences of the tabulated rho
    values, one-sided near integer knots so that stencils stay inside a
    single interval [k, k+1].
    """
    m = t.per_unit
    h = t.step
    r = t.rho
    n = r.size
    j = np.arange(m + 1, n)
    i = j % m
    i = np.where(i == 0, m, i)  # u = k lies at the right end of [k-1, k]
    d = np.empty(j.size)
    c = (i >= 2) & (i <= m - 2)
    f = i < 2
    b = i > m - 2
    jc, jf, jb = j[c], j[f], j[b]
    d[c] = (r[jc - 2] - 8 * r[jc - 1] + 8 * r[jc + 1] - r[jc + 2]) / (12 * h)
    d[f] = (-25 * r[jf] + 48 * r[jf + 1] - 36 * r[jf + 2] + 16 * r[jf + 3] - 3 * r[jf + 4]) / (12 * h)
    d[b] = (25 * r[jb] - 48 * r[jb - 1] + 36 * r[jb - 2] - 16 * r[jb - 3] + 3 * r[jb - 4]) / (12 * h)
    u = j * h
    return np.abs(u * d + r[j - m])


# -- de Bruijn Lambda and lambda ---------------------------------------------
#
# With w = y^v and F(w) = floor(w)/w (F = 0 below 1), Lambda(t, y)/t is the
# Stieltjes integral of rho(log(t/w)/log y) against dF(w). F jumps by 1/m at
# each integer m and has density -floor(w)/w^2 elsewhere. rho = 1 for
# w in [t/y, t], so only the range [1, t/y] needs quadrature.


def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _lower_parts(table: DickmanTable, ts: np.ndarray, y: float, refine: int = 1):
    """Integrals of rho(arg) and rho'(arg) against dF(w) over w in [1, t/y].

    Returns two arrays aligned with ``ts`` (sorted ascending). ``refine``
    multiplies the Gauss-Legendre orders, for self-convergence checks.
    """
    ts = np.asarray(ts, dtype=np.float64)
    n = ts.size
    s_rho = np.zeros(n)
    s_rhop = np.zeros(n)
    if n == 0:
        return s_rho, s_rhop
    log_y = math.log(y)
    a_all = ts / y
    m_top = int(math.floor(a_all.max()))
    if m_top < 1:
        return s_rho, s_rhop
    u_top = math.log(ts.max()) / log_y
    if u_top > table.u_max:
        raise OutOfRangeError(f"u={u_top} exceeds Dickman table range {table.u_max}")
    k_knots = np.arange(int(math.floor(u_top)), 1, -1)  # descending k: knots ascending in w
    gl_small = _gl(8 * refine)
    gl_large = _gl(4 * refine)
    first = np.searchsorted(a_all, 1.0, side="left")
    for m in range(1, m_top + 1):
        lo = max(first, int(np.searchsorted(a_all, m, side="left")))
        # a >= m must also hold exactly for integer multiples of y
        while lo > 0 and ts[lo - 1] >= m * y:
            lo -= 1
        if lo >= n:
            break
        tt = ts[lo:]
        lt = np.log(tt)
        arg = np.maximum((lt - math.log(m)) / log_y, 1.0)
        s_rho[lo:] += rho(table, arg) / m
        s_rhop[lo:] += rho_prime(table, arg) / m

        end = np.minimum(m + 1.0, tt / y)
        live = end > m
        if not np.any(live):
            continue
        tt, lt, end = tt[live], lt[live], end[live]
        if k_knots.size:
            knots = tt[:, None] / np.power(float(y), k_knots)[None, :]
            pts = np.concatenate([np.full((tt.size, 1), float(m)), np.clip(knots, m, end[:, None]), end[:, None]], axis=1)
        else:
            pts = np.stack([np.full(tt.size, float(m)), end], axis=1)
        z = np.log(pts)
        z0 = z[:, :-1, None]
        dz = (z[:, 1:] - z[:, :-1])[:, :, None]
        xg, wg = gl_small if m < 16 else gl_large
        nodes = z0 + dz * xg
        wts = dz * wg
        arg = np.maximum((lt[:, None, None] - nodes) / log_y, 1.0)
        ez = np.exp(-nodes) * wts * m
        s_rho[lo:][live] -= (rho(table, arg) * ez).sum(axis=(1, 2))
        s_rhop[lo:][live] -= (rho_prime(table, arg) * ez).sum(axis=(1, 2))
    return s_rho, s_rhop


def _floor_ratio(w: np.ndarray) -> np.ndarray:
    return np.where(w >= 1.0, np.floor(w) / np.maximum(w, 1.0), 0.0)


def _lambda_parts(table: DickmanTable, ts, y: float, refine: int = 1):
    ts = np.asarray(ts, dtype=np.float64)
    order = np.argsort(ts, kind="stable")
    srt = ts[order]
    lr, lp = _lower_parts(table, srt, y, refine)
    a = srt / y
    upper = _floor_ratio(srt) - np.where(a >= 1.0, _floor_ratio(a), 0.0)
    big_over_t = np.empty_like(srt)
    small_extra = np.empty_like(srt)
    big_over_t[order] = upper + lr
    small_extra[order] = lp / math.log(y)
    return big_over_t, small_extra


def _check(table: DickmanTable, x, y: float):
    if y < 2:
        raise DomainError(f"need y >= 2, got {y}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 1):
        raise DomainError("Lambda and lambda need t >= 1")
    return arr


def lambda_de_bruijn_big(table: DickmanTable, x, y: float, refine: int = 1):
    """de Bruijn's Lambda(x, y), right-continuous at integers (x + 0)."""
    arr = _check(table, x, y)
    big, _ = _lambda_parts(table, arr.ravel(), y, refine)
    out = arr.ravel() * big
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def lambda_small(table: DickmanTable, t, y: float, refine: int = 1):
    """lambda(t, y) = Lambda(t, y)/t + (1/log y) int rho'(log t/log y - v) d(floor(y^v)/y^v)."""
    arr = _check(table, t, y)
    big, extra = _lambda_parts(table, arr.ravel(), y, refine)
    out = big + extra
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def lambda_at_integers(table: DickmanTable, n_max: int, y: float, refine: int = 1) -> np.ndarray:
    """Array L with L[n] = lambda(n, y) for 1 <= n <= n_max (L[0] = 0)."""
    out = np.zeros(int(n_max) + 1)
    if n_max >= 1:
        out[1:] = lambda_small(table, np.arange(1, int(n_max) + 1, dtype=np.float64), y, refine)
    return out
