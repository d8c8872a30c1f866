"""Friable (smooth) integers: exact counts, saddle-point and Dickman
approximations, exponential sums over S(x, y) and the a + b = c count."""

from .abc import AbcReport, abc_report, convolve_exact, count_abc_exact
from .dickman import (
    DickmanTable,
    build_dickman,
    lambda_at_integers,
    lambda_de_bruijn_big,
    lambda_small,
    rho,
    rho_prime,
)
from .errors import (
    AliasingError,
    CapacityError,
    DomainError,
    FriableError,
    InputError,
    NumericError,
    OutOfRangeError,
    PoleError,
)
from .expsum import (
    ExpSumValue,
    MajorArc,
    discrete_parseval,
    exp_sum_exact,
    exp_sum_weighted,
    major_arc_main_term,
    perron_numeric,
    phi0,
    phi0_bounds_check,
    rational_approx,
    v_exact,
    v_tilde,
)
from .saddle import SaddleData, ht_psi_estimate, rankin_bound, solve_alpha, zeta_q_y, zeta_y
from .sieve import SmoothTable, build_table, enumerate_smooth, indicator_vector, psi_buchstab, psi_exact

__version__ = "0.1.0"
