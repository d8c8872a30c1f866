import math

import numpy as np
import pytest
from scipy import integrate

from friable.dickman import (
    build_dickman,
    lambda_at_integers,
    lambda_de_bruijn_big,
    lambda_small,
    ode_residual,
    rho,
    rho_prime,
)
from friable.errors import DomainError, OutOfRangeError
from friable.sieve import psi_exact

# classical reference values of Dickman's function
RHO_REF = {
    3.0: 0.048608388291131566,
    4.0: 0.0049109256477608,
    5.0: 0.00035472470045603,
    10.0: 2.7701718377259e-11,
}


def test_closed_forms(dickman):
    for u in (0.0, 0.3, 1.0):
        assert rho(dickman, u) == 1.0
    assert rho(dickman, -0.5) == 0.0
    for u in (1.2, 1.5, 2.0):
        assert abs(rho(dickman, u) - (1 - math.log(u))) < 1e-12
    assert abs(rho(dickman, 2.0) - (1 - math.log(2))) < 1e-9


def test_second_interval_against_quadrature(dickman):
    # rho(u) = 1 - log u + int_2^u log(t - 1)/t dt on [2, 3]
    for u in (2.25, 2.5, 2.9):
        ref = 1 - math.log(u) + integrate.quad(lambda t: math.log(t - 1) / t, 2, u, epsabs=1e-15)[0]
        assert abs(rho(dickman, u) - ref) < 1e-12


def test_reference_values(dickman):
    for u, ref in RHO_REF.items():
        assert rho(dickman, u) == pytest.approx(ref, rel=1e-11)
    assert 0 < rho(dickman, 20.0) < 1e-28


def test_ode_residual(dickman):
    assert np.max(np.abs(ode_residual(dickman))) <= 1e-8


def test_derivative_relation(dickman):
    u = np.linspace(1.01, 19.9, 400)
    assert np.allclose(rho_prime(dickman, u), -rho(dickman, u - 1) / u, rtol=1e-12, atol=0)
    h = 1e-5
    for v in (1.5, 3.7, 8.2, 15.3):
        fd = (rho(dickman, v + h) - rho(dickman, v - h)) / (2 * h)
        assert fd == pytest.approx(rho_prime(dickman, v), rel=1e-6)


def test_rho_decreasing_positive(dickman):
    u = np.linspace(1.0, 20.0, 5000)
    r = rho(dickman, u)
    assert np.all(r > 0) and np.all(np.diff(r) < 0)


def test_step_convergence():
    coarse = build_dickman(10, 1e-3)
    fine = build_dickman(10, 5e-4)
    for u in (2.5, 5.0, 9.5):
        assert rho(coarse, u) == pytest.approx(rho(fine, u), rel=1e-12)
    with pytest.raises(DomainError):
        build_dickman(10, 1e-2)


def test_out_of_range(dickman):
    with pytest.raises(OutOfRangeError):
        rho(dickman, 20.5)


def _lambda_oracle(dickman, x, y):
    # x * [ sum_{m <= x} rho(log(x/m)/log y)/m - int_1^x rho(log(x/w)/log y) floor(w)/w^2 dw ]
    ly = math.log(y)
    f = lambda w: rho(dickman, math.log(x / w) / ly)
    atoms = sum(f(m) / m for m in range(1, math.floor(x) + 1))
    cont = 0.0
    for m in range(1, math.floor(x) + 1):
        hi = min(m + 1.0, x)
        if hi > m:
            cont += m * integrate.quad(lambda w: f(w) / w**2, m, hi, epsabs=1e-14, epsrel=1e-12, limit=100)[0]
    return x * (atoms - cont)


def test_lambda_against_stieltjes_oracle(dickman):
    for x, y in [(400.5, 30), (1000, 10), (2500, 200)]:
        assert lambda_de_bruijn_big(dickman, x, y) == pytest.approx(_lambda_oracle(dickman, x, y), rel=1e-9)


def test_lambda_below_y_is_floor(dickman):
    for x in (1.0, 2.5, 99.9, 300.0):
        assert lambda_de_bruijn_big(dickman, x, 300) == pytest.approx(math.floor(x), abs=1e-12)
    # lambda jumps at t = y because rho' does at 1
    assert lambda_small(dickman, 299.999, 300) == pytest.approx(math.floor(299.999) / 299.999)
    assert lambda_small(dickman, 300, 300) == pytest.approx(1 - 1 / math.log(300), rel=1e-12)


def test_lambda_derivative(dickman):
    # between integers d Lambda/dt = lambda(t) - floor(t)/t
    y = 50
    for t in (1234.3, 5678.6, 30000.25):
        h = 1e-3
        d = (lambda_de_bruijn_big(dickman, t + h, y) - lambda_de_bruijn_big(dickman, t - h, y)) / (2 * h)
        assert d == pytest.approx(lambda_small(dickman, t, y) - math.floor(t) / t, abs=1e-6)


def test_lambda_tracks_psi(dickman, table):
    for x, y in [(1e5, 300), (1e6, 500), (1e6, 1000)]:
        assert abs(lambda_de_bruijn_big(dickman, x, y) / psi_exact(table, x, y) - 1) < 0.05


def test_lambda_refine_stable(dickman):
    a = lambda_de_bruijn_big(dickman, 123456.5, 100)
    b = lambda_de_bruijn_big(dickman, 123456.5, 100, refine=2)
    assert a == pytest.approx(b, rel=1e-12)


def test_lambda_vectorised_and_integer_table(dickman):
    ts = np.array([5000.0, 17.0, 12345.0, 400.0])
    vec = lambda_small(dickman, ts, 40)
    for t, v in zip(ts, vec):
        assert v == pytest.approx(lambda_small(dickman, float(t), 40), rel=1e-13)
    L = lambda_at_integers(dickman, 3000, 40)
    assert L[0] == 0 and L.size == 3001
    for n in (1, 39, 40, 41, 2999, 3000):
        assert L[n] == pytest.approx(lambda_small(dickman, n, 40), rel=1e-13)


def test_lambda_errors(dickman):
    with pytest.raises(DomainError):
        lambda_small(dickman, 10, 1.5)
    with pytest.raises(DomainError):
        lambda_de_bruijn_big(dickman, 0.5, 10)
    with pytest.raises(OutOfRangeError):
        lambda_de_bruijn_big(dickman, 1e30, 2)
