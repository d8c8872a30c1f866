"""Acceptance matrix: every release criterion as a timed, self-describing check.

Each check returns a :class:`CriterionResult`; ``severity`` is ``hard`` for
identities and oracle equivalences and ``soft`` for trend and envelope
statements whose constants the theory leaves open. Three scale tiers are
provided. ``large`` runs every criterion at its stated parameters; ``small``
and ``medium`` shrink the grids for quick smoke runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from .abc import abc_report, convolve_exact
from .dickman import DickmanTable, build_dickman, lambda_de_bruijn_big, ode_residual, rho
from .expsum import (
    discrete_parseval,
    exp_sum_exact,
    major_arc_main_term,
    perron_numeric,
    phi0,
    phi0_quad,
    phi0_residue,
    phi0_residue_limit,
)
from .saddle import ht_psi_estimate, rankin_bound, solve_alpha
from .sieve import SmoothTable, build_table, enumerate_smooth, psi_buchstab_array, psi_exact

TIERS = ("small", "medium", "large")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def friable_scale_y(x: float) -> float:
    """exp(2 sqrt(log x log log x)), the y scale used by the trend checks."""
    lx = math.log(x)
    return math.exp(2.0 * math.sqrt(lx * math.log(lx)))


def nudge(x: float) -> float:
    """Move x off the integers the way the Perron-type checks expect."""
    return x * (1.0 + 1e-9)


@dataclass
class CriterionResult:
    cid: int
    title: str
    severity: str
    passed: bool
    seconds: float
    budget: float | None
    detail: str
    data: dict = field(default_factory=dict, repr=False)

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL" if self.severity == "hard" else "WARN"

    def line(self) -> str:
        budget = f" (budget {self.budget:.0f}s)" if self.budget else ""
        return f"C{self.cid:<2d} {self.status:4s} [{self.severity}] {self.title}: {self.detail} [{self.seconds:.2f}s{budget}]"


@dataclass
class VerifyReport:
    tier: str
    results: list[CriterionResult]
    seconds: float

    @property
    def hard_ok(self) -> bool:
        return all(r.passed for r in self.results if r.severity == "hard")

    def by_id(self, cid: int) -> CriterionResult:
        return next(r for r in self.results if r.cid == cid)


class Context:
    """Lazily built shared tables for one suite run."""

    def __init__(self, x_max: int, tol: dict[str, float], seed: int = 0):
        self.x_max = int(x_max)
        self.tol = tol
        self.seed = seed
        self._table: SmoothTable | None = None
        self._dickman: DickmanTable | None = None

    @property
    def table(self) -> SmoothTable:
        if self._table is None:
            self._table = build_table(self.x_max)
        return self._table

    @property
    def dickman(self) -> DickmanTable:
        if self._dickman is None:
            self._dickman = build_dickman()
        return self._dickman


# -- tier parameters -------------------------------------------------------------------

_PARAMS = {
    "large": {
        "c2_x": (10**4, 10**5, 10**6, 10**7),
        "c5_points": ((10**5, 300), (10**6, 500), (10**6, 1000)),
        "c6_lams": (-50.0, -20.0, -3.7, -1.0, 0.0, 0.5, 1.0, 7.25, 20.0, 50.0),
        "c6_sigmas": (0.3, 0.7, 1.0, 1.5, 2.0),
        "c6_taus": (0.0, 2.5),
        "c7_x": (16, 10**3, 10**5),
        "c8_x": (10**4, 10**6),
        "c9_T": (1000, 2000, 4000),
        "c10_x": (10**5, 10**6, 10**7),
        "c11_trials": 100,
        "c12_x": (10**4, 10**5, 10**6),
    },
    "medium": {
        "c2_x": (10**4, 10**5, 10**6),
        "c5_points": ((10**5, 300), (10**6, 500), (10**6, 1000)),
        "c6_lams": (-50.0, -3.7, 0.0, 1.0, 20.0, 50.0),
        "c6_sigmas": (0.3, 1.0, 2.0),
        "c6_taus": (0.0, 2.5),
        "c7_x": (16, 10**3, 10**5),
        "c8_x": (10**4, 10**6),
        "c9_T": (1000, 2000, 4000),
        "c10_x": (10**4, 10**5, 10**6),
        "c11_trials": 100,
        "c12_x": (10**4, 10**5, 10**6),
    },
    "small": {
        "c2_x": (10**4, 10**5),
        "c5_points": ((10**5, 300),),
        "c6_lams": (-50.0, 0.0, 1.0, 20.0),
        "c6_sigmas": (0.3, 1.0, 2.0),
        "c6_taus": (0.0,),
        "c7_x": (16, 10**3, 10**5),
        "c8_x": (10**4, 10**6),
        "c9_T": (500, 1000, 2000),
        "c10_x": (10**4, 10**5),
        "c11_trials": 20,
        "c12_x": (10**4, 10**5, 10**6),
    },
}


def tier_params(tier: str) -> dict:
    if tier not in _PARAMS:
        raise ValueError(f"unknown tier {tier!r}; choose from {TIERS}")
    return _PARAMS[tier]


def tier_x_max(tier: str) -> int:
    p = tier_params(tier)
    return max(10**4, max(p["c2_x"]), max(x for x, _ in p["c5_points"]), max(p["c7_x"]),
               max(p["c8_x"]), 10**4 + 1, max(p["c10_x"]), max(p["c12_x"]))


# -- the criteria ----------------------------------------------------------------------


def c1_exact_counts(ctx: Context, p: dict):
    """psi_exact vs enumeration length and the Buchstab recursion, x <= 10^4."""
    ys = (2, 3, 5, 7, 10, 30, 100)
    n = 10**4
    bad = []
    for y in ys:
        buch = psi_buchstab_array(n, y)
        for x in range(0, n + 1):
            ex = psi_exact(ctx.table, x, y)
            if ex != len(enumerate_smooth(ctx.table, x, y)) or ex != buch[x]:
                bad.append((x, y))
                break
    return not bad, f"{len(ys)} y values x {n + 1} x values, mismatches: {bad or 'none'}", {"mismatches": bad}


def _c2_grid(p: dict):
    for x in p["c2_x"]:
        for y in np.geomspace(30.0, math.sqrt(x), 6):
            yield x, float(y)


def c2_hildebrand_tenenbaum(ctx: Context, p: dict):
    tol = ctx.tol["ht_rel_tol"]
    rows = []
    for x, y in _c2_grid(p):
        sd = solve_alpha(x, y)
        psi = psi_exact(ctx.table, x, y)
        rows.append((x, y, ht_psi_estimate(sd) / psi - 1.0))
    worst = max(abs(r[2]) for r in rows)
    return worst <= tol, f"max |HT/Psi - 1| = {worst:.4g} over {len(rows)} points (tol {tol})", {"rows": rows}


def c3_rankin(ctx: Context, p: dict):
    slack = ctx.tol["rankin_slack"]
    worst = math.inf
    n = 0
    for x, y in _c2_grid(p):
        sd = solve_alpha(x, y)
        psi = psi_exact(ctx.table, x, y)
        for sigma in np.concatenate([np.linspace(0.05, 1.5, 30), [sd.alpha]]):
            worst = min(worst, rankin_bound(sd, float(sigma)) * (1 + slack) / psi)
            n += 1
    return worst >= 1.0, f"min bound*(1+slack)/Psi = {worst:.6g} over {n} (x, y, sigma)", {"worst": worst}


def c4_dickman(ctx: Context, p: dict):
    t0 = time.perf_counter()
    dt = build_dickman()
    ctx._dickman = dt
    res = float(np.max(np.abs(ode_residual(dt))))
    err2 = abs(rho(dt, 2.0) - (1.0 - math.log(2.0)))
    ok = res <= ctx.tol["dickman_residual"] and err2 <= ctx.tol["dickman_closed_form"]
    detail = f"max ODE residual {res:.3g}, |rho(2) - (1 - log 2)| = {err2:.3g} (build {time.perf_counter() - t0:.2f}s)"
    return ok, detail, {"residual": res, "rho2_error": err2}


def c5_de_bruijn(ctx: Context, p: dict):
    tol = ctx.tol["debruijn_rel_tol"]
    rows = []
    for x, y in p["c5_points"]:
        lam = lambda_de_bruijn_big(ctx.dickman, x, y)
        rows.append((x, y, lam / psi_exact(ctx.table, x, y) - 1.0))
    worst = max(abs(r[2]) for r in rows)
    text = ", ".join(f"({x:.0e},{y}): {e:+.4f}" for x, y, e in rows)
    return worst <= tol, f"Lambda/Psi - 1 at {text} (tol {tol})", {"rows": rows}


def c6_phi0(ctx: Context, p: dict):
    tol = ctx.tol["phi0_agreement"]
    worst_q = 0.0
    for lam in p["c6_lams"]:
        for sig in p["c6_sigmas"]:
            for tau in p["c6_taus"]:
                s = complex(sig, tau)
                a, b = phi0(lam, s), phi0_quad(lam, s)
                worst_q = max(worst_q, abs(a - b) / max(1.0, abs(b)))
    worst_r = 0.0
    for lam in p["c6_lams"]:
        for n in (0, 1, 2):
            r = phi0_residue(lam, n)
            worst_r = max(worst_r, abs(phi0_residue_limit(lam, n) - r) / max(1.0, abs(r)))
    ok = worst_q <= tol and worst_r <= tol
    return ok, f"series vs quadrature {worst_q:.3g}, residues {worst_r:.3g} (tol {tol})", {
        "quad": worst_q, "residue": worst_r}


def c7_parseval(ctx: Context, p: dict):
    tol = ctx.tol["parseval_rounding"]
    rows = []
    for x in p["c7_x"]:
        N = 1 << int(x).bit_length()
        for y in (2, 3, 7, 50, 300):
            if y > x:
                continue
            res = discrete_parseval(ctx.table, x, y, N)
            rows.append((x, y, N, res.value, psi_exact(ctx.table, x, y), res.rounding_error))
    ok = all(v == e and r <= tol for _, _, _, v, e, r in rows)
    worst = max(r[5] for r in rows)
    return ok, f"{len(rows)} (x, y) exact; max rounding error {worst:.3g}", {"rows": rows}


def c8_major_arc(ctx: Context, p: dict):
    tol = ctx.tol["major_arc_rel_tol"]
    y = 200
    x_lo, x_hi = p["c8_x"]
    cases = []
    for q in (1, 2, 3, 4, 5):
        for a in (a for a in range(q) if math.gcd(a, q) == 1):
            for eta_x in (0.0, 0.25):
                errs = []
                for x in (x_lo, x_hi):
                    sd = solve_alpha(x, y)
                    psi = psi_exact(ctx.table, x, y)
                    eta = eta_x / x
                    e = complex(exp_sum_exact(ctx.table, x, y, a / q + eta))
                    errs.append(abs(e - major_arc_main_term(sd, psi, q, eta)) / psi)
                # q = 1, eta = 0 is an identity (E = main = Psi); both errors vanish
                exact = max(errs) <= 1e-12
                ok = errs[1] < tol and (errs[1] < errs[0] or exact)
                cases.append((q, a, eta_x, errs[0], errs[1], ok))
    failed = [(q, a, ex) for q, a, ex, _, _, ok in cases if not ok]
    worst = max(c[4] for c in cases)
    detail = (f"max error at x={x_hi:.0e}: {worst:.4f} (tol {tol}); "
              f"trend fails for (q, a, eta*x) in {failed or 'none'}")
    return not failed, detail, {"cases": cases}


def c9_perron(ctx: Context, p: dict):
    tol = ctx.tol["perron_rel_tol"]
    x = nudge(10**4)
    y = 50
    sd = solve_alpha(x, y)
    psi = psi_exact(ctx.table, x, y)
    T_lo, T_mid, T_hi = p["c9_T"]
    errs = {T: abs(perron_numeric(sd, 1, x, 0.0, T).value - psi) for T in (T_lo, T_mid, T_hi)}
    ok = errs[T_mid] <= tol * psi and errs[T_hi] <= errs[T_lo]
    text = ", ".join(f"T={T}: {e:.4f}" for T, e in errs.items())
    return ok, f"|perron - Psi| with Psi={psi}: {text}", {"errors": errs, "psi": psi}


def c10_abc(ctx: Context, p: dict):
    C = ctx.tol["abc_envelope"]
    rows = []
    for x in p["c10_x"]:
        y = round(friable_scale_y(x))
        r = abc_report(ctx.table, None, x, y)
        rows.append((x, y, r.ratio, r.bound_shape, r.n_exact))
    envelope = all(abs(ratio - 1) <= C * s for _, _, ratio, s, _ in rows)
    devs = [abs(r[2] - 1) for r in rows]
    trend = all(b < a for a, b in zip(devs, devs[1:]))
    text = ", ".join(f"x={x:.0e}: |ratio-1|={abs(ra - 1):.4f} <= {C * s:.3f}" for x, _, ra, s, _ in rows)
    detail = f"{text}; envelope {'ok' if envelope else 'FAILS'}, decreasing trend {'ok' if trend else 'FAILS'}"
    return envelope and trend, detail, {"rows": rows, "envelope": envelope, "trend": trend}


def c11_convolution(ctx: Context, p: dict):
    rng = np.random.default_rng(ctx.seed)
    bad = 0
    for i in range(p["c11_trials"]):
        n = int(rng.integers(1, 4097))
        if i % 2:
            v = rng.integers(0, 2, n)
        else:
            v = rng.integers(-1000, 1001, n)
        if not np.array_equal(convolve_exact(v), np.convolve(v, v)):
            bad += 1
    return bad == 0, f"{p['c11_trials']} random vectors, {bad} mismatches", {"mismatches": bad}


def c12_golden_trend(ctx: Context, p: dict):
    rows = []
    for x in p["c12_x"]:
        y = round(friable_scale_y(x))
        rows.append((x, y, abs(complex(exp_sum_exact(ctx.table, x, y, GOLDEN))) / psi_exact(ctx.table, x, y)))
    vals = [r[2] for r in rows]
    ok = all(b < a for a, b in zip(vals, vals[1:]))
    return ok, "|E|/Psi = " + ", ".join(f"{v:.3e}" for v in vals), {"rows": rows}


# (id, title, severity, budget seconds at full scale, check)
CRITERIA: tuple[tuple[int, str, str, float | None, Callable], ...] = (
    (1, "exact-count oracle equivalence", "hard", 5.0, c1_exact_counts),
    (2, "saddle-point estimate", "hard", 120.0, c2_hildebrand_tenenbaum),
    (3, "Rankin bound", "hard", None, c3_rankin),
    (4, "Dickman ODE residual and rho(2)", "hard", 10.0, c4_dickman),
    (5, "de Bruijn approximation", "soft", None, c5_de_bruijn),
    (6, "Phi0 series, quadrature and residues", "hard", None, c6_phi0),
    (7, "discrete Parseval identity", "hard", 60.0, c7_parseval),
    (8, "major-arc main term", "soft", None, c8_major_arc),
    (9, "Perron evaluator", "hard", 120.0, c9_perron),
    (10, "a + b = c count", "hard", 300.0, c10_abc),
    (11, "convolution exactness", "hard", None, c11_convolution),
    (12, "golden-ratio exponential sum trend", "soft", None, c12_golden_trend),
)


def run_criterion(cid: int, ctx: Context, tier: str) -> CriterionResult:
    _, title, severity, budget, fn = next(c for c in CRITERIA if c[0] == cid)
    params = tier_params(tier)
    t0 = time.perf_counter()
    try:
        ok, detail, data = fn(ctx, params)
    except Exception as exc:  # a crash is a failure, reported in place
        ok, detail, data = False, f"raised {type(exc).__name__}: {exc}", {}
    secs = time.perf_counter() - t0
    if budget is not None and tier == "large" and secs > budget:
        ok = False
        detail += f"; over time budget ({secs:.1f}s > {budget:.0f}s)"
    return CriterionResult(cid, title, severity, bool(ok), secs, budget if tier == "large" else None, detail, data)


def verify_suite(tier: str = "small", tol: dict[str, float] | None = None,
                 only: tuple[int, ...] | None = None, echo: Callable[[str], None] | None = None) -> VerifyReport:
    """Run the acceptance matrix (or the criteria in ``only``) at ``tier``."""
    t0 = time.perf_counter()
    ctx = Context(tier_x_max(tier), config.resolve(tol))
    results = []
    for cid, *_ in CRITERIA:
        if only is not None and cid not in only:
            continue
        r = run_criterion(cid, ctx, tier)
        results.append(r)
        if echo is not None:
            echo(r.line())
    return VerifyReport(tier, results, time.perf_counter() - t0)
