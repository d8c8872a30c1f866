"""Tunable constants for the empirical envelope and trend checks.

Only the keys of :data:`DEFAULTS` may be overridden (``--tol key=value`` on
the command line).
"""

from __future__ import annotations

DEFAULTS: dict[str, float] = {
    # zeta(alpha, y) x^alpha <= C (log x) Psi(x, y)
    "rankin_log_constant": 10.0,
    # Psi(x/d, y) <= C Psi(x, y) / d^alpha
    "psi_ratio_constant": 10.0,
    # |ht/Psi - 1| bound for the saddle-point formula
    "ht_rel_tol": 0.1,
    # slack on Psi <= x^sigma zeta(sigma, y)
    "rankin_slack": 1e-6,
    # |Lambda/Psi - 1|
    "debruijn_rel_tol": 0.05,
    # |E - main| / Psi at the largest x for the major-arc term
    "major_arc_rel_tol": 0.25,
    # |perron - Psi| / Psi
    "perron_rel_tol": 0.05,
    # N(x, y) ratio envelope: |2xN/Psi^3 - 1| <= C log(u+1)/log y
    "abc_envelope": 5.0,
    # Dickman ODE residual and closed-form checks
    "dickman_residual": 1e-8,
    "dickman_closed_form": 1e-9,
    # Phi0 series vs quadrature, residue extraction
    "phi0_agreement": 1e-9,
    # discrete Parseval rounding error
    "parseval_rounding": 1e-6,
}


def resolve(overrides: dict[str, float] | None = None) -> dict[str, float]:
    """Defaults updated with ``overrides``; unknown keys raise KeyError."""
    out = dict(DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise KeyError(f"unknown tolerance key {key!r}; known: {sorted(DEFAULTS)}")
        out[key] = float(value)
    return out
