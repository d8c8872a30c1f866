"""Command-line front end: parameter sweeps and prediction-vs-exact reports.

Every command walks the (x, y) grid and emits one row per grid point with
the columns

    schema, command, <parameters>, exact, predicted, abs_err, rel_err,
    severity, ok, <extras>

as CSV (header row, ``.`` decimal point) or JSON lines. Floats are written
with ``repr`` so both formats round-trip bit for bit. Exit status is 0 when
every hard check passes, 1 when one fails and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import config
from .abc import abc_report
from .dickman import build_dickman, lambda_de_bruijn_big, rho
from .errors import FriableError
from .expsum import (
    discrete_parseval,
    exp_sum_exact,
    major_arc_main_term,
    perron_numeric,
    rational_approx,
    v_exact,
)
from .saddle import alpha_asymptotic, ht_psi_estimate, solve_alpha
from .sieve import TABLE_CAP, SmoothTable, build_table, psi_exact
from .verify import TIERS, verify_suite

SCHEMA = "friable/1"
REL_FLOOR = 1e-30
NUDGE = 1e-9
COMMANDS = ("psi", "alpha", "rho", "lambda", "expsum", "major-arc", "perron", "parseval", "abc", "verify")


class ConfigError(ValueError):
    """Invalid command-line configuration (exit status 2)."""


@dataclass
class PredictionReport:
    params: dict
    exact: float
    predicted: float
    severity: str = "report"
    tol: float | None = None
    extras: dict = field(default_factory=dict)
    # quantity compared against tol; rel_err when None
    score: float | None = None

    @property
    def abs_err(self) -> float:
        return abs(self.exact - self.predicted)

    @property
    def rel_err(self) -> float:
        return self.abs_err / max(abs(self.exact), REL_FLOOR)

    @property
    def ok(self) -> bool:
        if self.tol is None:
            return True
        return (self.rel_err if self.score is None else self.score) <= self.tol

    def row(self, command: str) -> dict:
        out = {"schema": SCHEMA, "command": command}
        out.update(self.params)
        out.update(exact=self.exact, predicted=self.predicted, abs_err=self.abs_err,
                   rel_err=self.rel_err, severity=self.severity, ok=self.ok)
        out.update(self.extras)
        return out


# -- argument parsing -------------------------------------------------------------------


def _number(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ConfigError(f"non-finite value {text!r}")
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


def parse_grid(spec: str) -> list[float]:
    """``a``, ``a,b,c`` or the geometric range ``start:stop:factor``.

    The result is a finite, strictly ascending list.
    """
    spec = spec.strip()
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError(f"grid range needs start:stop:factor, got {spec!r}")
            start, stop, factor = (float(p) for p in parts)
            if not (start > 0 and stop >= start and factor > 1):
                raise ConfigError(f"grid range needs 0 < start <= stop and factor > 1, got {spec!r}")
            out = []
            k = 0
            while True:
                v = start * factor**k
                if v > stop * (1 + 1e-12):
                    break
                out.append(_number(repr(round(v, 9))) if abs(v - round(v)) < 1e-9 * v else v)
                k += 1
        else:
            out = [_number(p) for p in spec.split(",") if p.strip()]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse grid {spec!r}: {exc}") from None
    if not out:
        raise ConfigError(f"empty grid {spec!r}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"grid {spec!r} is not strictly ascending")
    return out


def parse_tol(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {key}: not a number: {value!r}") from None
    try:
        config.resolve(out)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="friable", description="Friable integers: exact counts against analytic predictions.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--x", default=None, help="x grid: value, comma list or start:stop:factor")
    p.add_argument("--y", default=None, help="y grid, same syntax as --x")
    p.add_argument("--u", default=None, help="u grid for the rho command")
    p.add_argument("--theta", type=float, default=None, help="frequency for expsum")
    p.add_argument("--q", type=int, default=1, help="modulus for major-arc/perron")
    p.add_argument("--a", type=int, default=None, help="residue a for major-arc (default 1, or 0 when q = 1)")
    p.add_argument("--eta", type=float, default=0.0, help="frequency offset")
    p.add_argument("--T", type=float, default=2000.0, help="Perron truncation height")
    p.add_argument("--Q", type=int, default=None, help="approximation parameter for expsum (default sqrt x)")
    p.add_argument("--N", type=int, default=None, help="sampling modulus for parseval (default next power of two > x)")
    p.add_argument("--tier", choices=TIERS, default="small", help="scale tier for verify")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads (env FRIABLE_THREADS overrides)")
    p.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                   help=f"override a tolerance; keys: {', '.join(sorted(config.DEFAULTS))}")
    return p


def _threads(args) -> int:
    env = os.environ.get("FRIABLE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"FRIABLE_THREADS must be an integer, got {env!r}") from None
    else:
        n = args.threads
    if n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}")
    return n


# -- per-point evaluators ---------------------------------------------------------------


class Runner:
    def __init__(self, args, tol: dict[str, float]):
        self.args = args
        self.tol = tol
        self._table: SmoothTable | None = None
        self._dickman = None
        self.x_max = 1

    @property
    def table(self) -> SmoothTable:
        if self._table is None:
            self._table = build_table(self.x_max)
        return self._table

    @property
    def dickman(self):
        if self._dickman is None:
            self._dickman = build_dickman()
        return self._dickman

    def psi(self, x, y):
        sd = solve_alpha(x, y)
        return PredictionReport({"x": x, "y": y}, psi_exact(self.table, x, y), ht_psi_estimate(sd),
                                extras={"alpha": sd.alpha, "u": sd.u})

    def alpha(self, x, y):
        sd = solve_alpha(x, y)
        return PredictionReport({"x": x, "y": y}, sd.alpha, alpha_asymptotic(x, y),
                                extras={"residual": sd.residual, "sigma2": sd.sigma2})

    def rho(self, x, y):
        u = math.log(x) / math.log(y)
        return PredictionReport({"x": x, "y": y}, psi_exact(self.table, x, y) / x, rho(self.dickman, u),
                                extras={"u": u})

    def lambda_(self, x, y):
        return PredictionReport({"x": x, "y": y}, psi_exact(self.table, x, y),
                                lambda_de_bruijn_big(self.dickman, x, y),
                                severity="soft", tol=self.tol["debruijn_rel_tol"])

    def expsum(self, x, y):
        xn, nudged = _nudged(x)
        theta = self.args.theta if self.args.theta is not None else 0.0
        Q = self.args.Q or max(3, math.isqrt(int(xn)))
        arc = rational_approx(theta, Q)
        e = exp_sum_exact(self.table, xn, y, theta)
        extras = {"theta": theta, "a": arc.a, "q": arc.q, "eta": arc.eta, "Q": Q,
                  "exact_re": e.re, "exact_im": e.im, "nudge": nudged}
        try:
            sd = solve_alpha(xn, y)
            main = major_arc_main_term(sd, psi_exact(self.table, xn, y), arc.q, arc.eta)
        except FriableError:  # q not y-friable: no principal main term
            main = 0j
        extras.update(predicted_re=main.real, predicted_im=main.imag)
        return PredictionReport({"x": xn, "y": y}, abs(e), abs(main), extras=extras)

    def major_arc(self, x, y):
        q, eta = self.args.q, self.args.eta
        a = self.args.a if self.args.a is not None else (0 if q == 1 else 1)
        if q < 1 or math.gcd(a, q) != 1:
            raise ConfigError(f"need q >= 1 and gcd(a, q) = 1, got a={a}, q={q}")
        sd = solve_alpha(x, y)
        psi = psi_exact(self.table, x, y)
        e = complex(exp_sum_exact(self.table, x, y, a / q + eta))
        main = major_arc_main_term(sd, psi, q, eta)
        err = abs(e - main) / psi
        return PredictionReport(
            {"x": x, "y": y, "q": q, "a": a, "eta": eta}, abs(e), abs(main), severity="soft",
            tol=self.tol["major_arc_rel_tol"], score=err,
            extras={"exact_re": e.real, "exact_im": e.imag, "predicted_re": main.real,
                    "predicted_im": main.imag, "err_over_psi": err, "psi": psi})

    def perron(self, x, y):
        xn, nudged = _nudged(x)
        q, eta, T = self.args.q, self.args.eta, self.args.T
        sd = solve_alpha(xn, y)
        v = complex(v_exact(self.table, xn, y, q, eta))
        res = perron_numeric(sd, q, xn, eta, T)
        return PredictionReport(
            {"x": xn, "y": y, "q": q, "eta": eta, "T": T}, abs(v), abs(res.value),
            severity="soft", tol=self.tol["perron_rel_tol"],
            extras={"exact_re": v.real, "exact_im": v.imag, "predicted_re": res.value.real,
                    "predicted_im": res.value.imag, "quad_error": res.error_estimate, "nudge": nudged})

    def parseval(self, x, y):
        N = self.args.N or (1 << int(math.floor(x)).bit_length())
        res = discrete_parseval(self.table, x, y, N)
        return PredictionReport({"x": x, "y": y, "N": N}, psi_exact(self.table, x, y), res.value,
                                severity="hard", tol=self.tol["parseval_rounding"],
                                extras={"raw": res.raw, "rounding_error": res.rounding_error})

    def abc(self, x, y):
        if not float(x).is_integer():
            raise ConfigError(f"abc needs integer x, got {x}")
        r = abc_report(self.table, None, int(x), y)
        C = self.tol["abc_envelope"]
        return PredictionReport({"x": int(x), "y": y}, r.n_exact, r.prediction, severity="soft",
                                tol=C * r.bound_shape, score=abs(r.ratio - 1),
                                extras={"psi": r.psi, "ratio": r.ratio, "bound_shape": r.bound_shape})


def _nudged(x):
    if float(x).is_integer():
        return x * (1 + NUDGE), NUDGE
    return x, 0.0


_METHODS = {"psi": "psi", "alpha": "alpha", "rho": "rho", "lambda": "lambda_", "expsum": "expsum",
            "major-arc": "major_arc", "perron": "perron", "parseval": "parseval", "abc": "abc"}
_NEEDS_TABLE = {"psi", "rho", "lambda", "expsum", "major-arc", "perron", "parseval", "abc"}


def _grid(args) -> list[tuple[float, float]]:
    if args.command == "rho" and args.u is not None:
        if args.y is None:
            raise ConfigError("rho with --u needs --y")
        ys = parse_grid(args.y)
        return [(round(y**u), y) for y in ys for u in parse_grid(args.u)]
    if args.x is None or args.y is None:
        raise ConfigError(f"{args.command} needs --x and --y")
    pts = [(x, y) for x in parse_grid(args.x) for y in parse_grid(args.y)]
    for x, y in pts:
        if not (2 <= y <= x):
            raise ConfigError(f"need 2 <= y <= x, got x={x}, y={y}")
    return pts


# -- output -----------------------------------------------------------------------------


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        for r in rows:
            out.write(json.dumps(r) + "\n")
        return
    if not rows:
        return
    header = list(rows[0])
    for r in rows[1:]:
        header += [k for k in r if k not in header]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r[k]) if k in r else "" for k in header])


# -- entry points -----------------------------------------------------------------------


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        tol_over = parse_tol(args.tol)
        tol = config.resolve(tol_over)
        threads = _threads(args)
        if args.command == "verify":
            return _run_verify(args, tol_over, out)
        pts = _grid(args)
        runner = Runner(args, tol)
        if args.command in _NEEDS_TABLE:
            runner.x_max = max(int(math.floor(x * (1 + NUDGE))) for x, _ in pts)
            if runner.x_max > TABLE_CAP:
                raise ConfigError(f"x={runner.x_max} exceeds the table cap {TABLE_CAP}")
            runner.table  # build once before any worker starts
        if args.command in ("rho", "lambda"):
            runner.dickman
        fn = getattr(runner, _METHODS[args.command])
        if threads > 1 and len(pts) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                reports = list(pool.map(lambda p: fn(*p), pts))  # map keeps grid order
        else:
            reports = [fn(x, y) for x, y in pts]
    except ConfigError as exc:
        err.write(f"config error: {exc}\n")
        return 2
    except FriableError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2

    emit([r.row(args.command) for r in reports], args.format, out)
    status = 0
    for r in reports:
        if r.ok:
            continue
        if r.severity == "hard":
            score = r.rel_err if r.score is None else r.score
            err.write(f"hard check failed: {r.params} check value {score:.3g} > {r.tol}\n")
            status = 1
        elif r.severity == "soft":
            score = r.rel_err if r.score is None else r.score
            err.write(f"warning: {r.params} check value {score:.3g} > {r.tol}\n")
    return status


def _run_verify(args, tol_over: dict[str, float], out) -> int:
    report = verify_suite(args.tier, tol_over)
    rows = [{"schema": SCHEMA, "command": "verify", "tier": report.tier, "criterion": f"C{r.cid}",
             "title": r.title, "severity": r.severity, "status": r.status, "ok": r.passed,
             "seconds": r.seconds, "detail": r.detail} for r in report.results]
    emit(rows, args.format, out)
    return 0 if report.hard_ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
