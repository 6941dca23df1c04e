"""Exit criteria, one test per criterion, at the stated tolerances.

A one-line PASS/FAIL summary per criterion is printed at the end of the run
(see ``pytest_terminal_summary`` in conftest.py).
"""
import math
import time

import mpmath
import numpy as np
import pytest
from click.testing import CliRunner

import biasedtree.cli as cli_mod
from biasedtree import (
    convolve_first_return,
    darboux_report,
    first_return_catalan,
    first_return_dp,
    make_params,
    pn_return_dp,
    series_g,
    spectral_radius,
    u_closed,
)
from biasedtree.exact import ProbTable, log_central_binomial_return, log_first_return_catalan
from biasedtree.montecarlo import SimConfig, simulate_first_return
from biasedtree.records import validate_text
from conftest import oracle_grid

pytestmark = pytest.mark.acceptance

RHO_31 = 2 * math.sqrt(2) / 3


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_exact_oracle_equality():
    with Timer() as t:
        for params in oracle_grid():
            f = first_return_dp(params, 60)
            p = pn_return_dp(params, 60)
            for n in range(1, 31):
                assert f[2 * n] == first_return_catalan(params, n), (params, n)
            assert convolve_first_return(f).values == p.values, params
    assert t.elapsed < 10


def test_criterion_02_series_dp_identity():
    with Timer() as t:
        for params in oracle_grid():
            g = series_g(params, 60)
            p = pn_return_dp(params, 60)
            assert g.coefficients == p.values, params
    assert t.elapsed < 10


def test_criterion_03_spectral_radius_root_test():
    with Timer() as t:
        table = pn_return_dp(make_params(3, 1.0), 4000, "scaled_float")
        roots = [math.exp(table.log(2 * n) / (2 * n)) for n in (500, 1000, 2000)]
    assert abs(roots[-1] - RHO_31) < 1e-2
    assert roots[0] < roots[1] < roots[2] < RHO_31
    assert t.elapsed < 30


@pytest.mark.parametrize("lam", [1, 2, 4])
def test_criterion_04_first_return_asymptotic(lam):
    """Ratio exact / (pi^-1/2 base^2n n^-3/2) within 5% at n=400 and 2% at n=1600.

    The exact ratio tends to (d - 1 + lam) / (4 (d - 1)) = 0.375, 0.5, 0.75 for
    lam = 1, 2, 4, so this criterion cannot hold as stated.
    """
    d = 3
    branch = d - 1
    params = make_params(d, lam)
    base = 2 * math.sqrt(branch * lam) / (branch + lam)
    with Timer() as t:
        ratios = {}
        for n in (400, 1600):
            log_f = log_first_return_catalan(params, n)
            ratios[n] = math.exp(log_f + 0.5 * math.log(math.pi) - 2 * n * math.log(base) + 1.5 * math.log(n))
    assert t.elapsed < 30
    assert abs(ratios[400] - 1) <= 0.05 and abs(ratios[1600] - 1) <= 0.02, (
        f"ratios {ratios}; limit is (d-1+lam)/(4(d-1)) = {(branch + lam) / (4 * branch)}"
    )


def test_criterion_05_transient_p_constant():
    """Ratio p_exact / (0.0124693 rho^2n n^-3/2) within 10% at n=800, closer than at n=200.

    The exact ratio tends to (d-1)(d-1+lam) / ((d-1-lam)^2 sqrt(pi)) / 0.0124693,
    about 271 for d = 3, lam = 1, so this criterion cannot hold as stated.
    """
    with Timer() as t:
        table = pn_return_dp(make_params(3, 1.0), 1600, "scaled_float")

        def ratio(n):
            return math.exp(table.log(2 * n) - math.log(0.0124693) - 2 * n * math.log(RHO_31) + 1.5 * math.log(n))

        r200, r800 = ratio(200), ratio(800)
    assert t.elapsed < 60
    assert abs(r800 - 1) < 0.1 and abs(r800 - 1) < abs(r200 - 1), f"r(200)={r200}, r(800)={r800}"


def test_criterion_06_critical_asymptotic():
    with Timer() as t:
        n = 10**4
        value = math.exp(log_central_binomial_return(n) + 0.5 * math.log(math.pi * n))
    assert abs(value - 1) < 1e-3
    assert t.elapsed < 5


def test_criterion_07_return_probability():
    with Timer() as t:
        for params in oracle_grid():
            expected = min(params.lam, params.d - 1) / (params.d - 1)
            assert abs(u_closed(params, 1.0) - float(expected)) <= 1e-12, params
        est = simulate_first_return(SimConfig(make_params(3, 1), 10**6, 10**4, 42)).returned
    assert abs(est.estimate - 0.5) <= 0.003, est
    assert t.elapsed < 60


def _fd_derivatives(d, lam):
    """Central differences of Psi(u, v) = Phi(uv) - v, built from a, b, rho alone."""
    with mpmath.workdps(50):
        D = mpmath.mpf(d - 1)
        L = mpmath.mpf(lam.numerator) / lam.denominator
        a = 2 * D / (D + L)
        b = (D - L) / (D + L)
        rho = 2 * mpmath.sqrt(D * L) / (D + L)

        def psi(u, v):
            t = u * v
            return (-a * b + mpmath.sqrt(a**2 + rho**2 * (1 - b**2) * t**2)) / (1 - b**2) - v

        u0 = 1 / rho
        v0 = a / b
        h = mpmath.mpf("1e-12")
        d2v = (psi(u0, v0 + h) - 2 * psi(u0, v0) + psi(u0, v0 - h)) / h**2
        du = (psi(u0 + h, v0) - psi(u0 - h, v0)) / (2 * h)
        return float(d2v), float(du)


def test_criterion_08_darboux_consistency():
    with Timer() as t:
        transient = [p for p in oracle_grid() if p.lam < p.d - 1]
        assert transient
        for params in transient:
            r = darboux_report(params)
            d2v, du = _fd_derivatives(params.d, params.lam)
            assert abs(d2v / r.c1 - 1) <= 1e-5, params
            assert abs(du / r.c2 - 1) <= 1e-5, params
            D, lam = params.d - 1, float(params.lam)
            printed_implicit = math.sqrt(r.c1 / (2 * math.pi * r.rho * r.c2)) * 2**-1.5
            printed_explicit = (D - lam) ** 2 / (16 * math.sqrt(math.pi * lam) * D**1.5)
            assert abs(printed_implicit / printed_explicit - 1) <= 1e-13
            assert abs(r.p_const_uncorrected / printed_explicit - 1) <= 1e-13
            corrected_implicit = math.sqrt(r.c2 / (math.pi * r.rho * r.c1)) / 2
            assert abs(corrected_implicit / r.p_const - 1) <= 1e-13
    assert t.elapsed < 5


def test_criterion_09_monotonicity_and_boundary():
    with Timer() as t:
        for d in (3, 4, 5):
            grid = np.linspace(0, d - 1, 102)[1:-1]
            rho = [spectral_radius(make_params(d, float(x))) for x in grid]
            assert all(b > a for a, b in zip(rho, rho[1:]))
            assert spectral_radius(make_params(d, d - 1)) == 1
            assert spectral_radius(make_params(d, float(d - 1))) == 1
            for lam in (d - 1 + 1e-9, d - 0.5, 2 * d, 1e6):
                assert spectral_radius(make_params(d, lam)) == 1
    assert t.elapsed < 1


PINNED = {
    "exact": ["exact", "--d", "3", "--lambda", "1", "--n-max", "40"],
    "series": ["series", "--d", "4", "--lambda", "3/2", "--order", "30", "--format", "json"],
    "sweep": ["sweep", "--d", "3", "--lambda-min", "0.25", "--lambda-max", "4", "--points", "16"],
    "asymptote": ["asymptote", "--d", "3", "--lambda", "1", "--n-list", "50,100,200,400"],
    "simulate": ["simulate", "--d", "3", "--lambda", "1", "--paths", "50000", "--max-steps", "2000", "--seed", "42"],
}


def test_criterion_10_cli_contract(monkeypatch):
    runner = CliRunner()
    with Timer() as t:
        for name, args in PINNED.items():
            first = runner.invoke(cli_mod.cli, args)
            second = runner.invoke(cli_mod.cli, args)
            assert first.exit_code == 0 and second.exit_code == 0, (name, first.output)
            assert first.stdout_bytes == second.stdout_bytes, name
            assert validate_text(first.stdout)["command"] == name

        real = cli_mod.first_return_dp

        def corrupted(*args, **kwargs):
            table = real(*args, **kwargs)
            values = list(table.values)
            values[10] *= 2
            return ProbTable(table.kind, table.arithmetic, tuple(values), table.log_scale)

        monkeypatch.setattr(cli_mod, "first_return_dp", corrupted)
        assert runner.invoke(cli_mod.cli, PINNED["exact"]).exit_code == 4
    assert t.elapsed < 30
