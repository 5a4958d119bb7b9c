"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from compnorm.estimators import (
    blaschke_cov_check,
    default_schedule,
    empirical_c0,
    essential_norm_proxy,
    noncompact_lower_bound,
    nt_profile,
)
from compnorm.functionals import carleson_sup
from compnorm.quadrature import QuadConfig, integrate_disk, monte_carlo_disk, series_kernel_integral
from compnorm.symbols import Identity, Polynomial, make_blaschke, valency

EIGHT_OVER_PI = 8 / math.pi


def random_zeros(n, rmax, seed):
    g = np.random.default_rng(seed)
    return tuple(rmax * np.sqrt(g.random(n)) * np.exp(2j * np.pi * g.random(n)))


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def c0_scan():
    return empirical_c0()


def test_01_identity_limit(report):
    t0 = time.perf_counter()
    e = essential_norm_proxy(Identity(), default_schedule(13))
    dt = time.perf_counter() - t0
    rel = abs(e.proxy - EIGHT_OVER_PI) / EIGHT_OVER_PI
    report(1, rel <= 0.02 and e.quadrature_converged and dt < 120,
           f"identity proxy {e.proxy:.6f} vs 8/pi, rel err {rel:.2e} (tol 2e-2), {dt:.1f}s")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_02_blaschke_asymptote(report, n):
    B = make_blaschke(random_zeros(n, 0.7, 100 + n))
    e = essential_norm_proxy(B, default_schedule(13))
    rel = abs(e.proxy - n * EIGHT_OVER_PI) / (n * EIGHT_OVER_PI)
    report(2, rel <= 0.05 and e.quadrature_converged,
           f"degree {n}: proxy {e.proxy:.5f} vs 8n/pi = {n * EIGHT_OVER_PI:.5f}, rel err {rel:.2e} (tol 5e-2)")


def test_03_change_of_variables(report):
    worst = 0.0
    for n in range(1, 5):
        B = make_blaschke((0,) + random_zeros(n - 1, 0.9, 300 + n), np.exp(0.3j * n))
        for r in (0.3, 0.6, 0.9):
            for j in range(8):
                worst = max(worst, blaschke_cov_check(B, r * np.exp(2j * np.pi * j / 8)))
    report(3, worst <= 1e-3, f"max relative discrepancy {worst:.2e} over n<=4, |alpha| in {{0.3,0.6,0.9}} (tol 1e-3)")


@pytest.mark.parametrize("r", [0.5, 0.9])
def test_04_compact_direction(report, r):
    e = essential_norm_proxy(Polynomial((0, r)), default_schedule(13))
    report(4, e.proxy <= 1e-2, f"psi = {r} z: proxy {e.proxy:.3e} at s = 1 - 2^-13 (tol 1e-2)")


def test_05_oracle_agreement(report):
    worst_series, worst_z = 0.0, 0.0
    for p in (2, 3, 4):
        for a in (0.0, 0.5, 0.9):
            f = lambda z, a=a, p=p: np.abs(1 - a * z) ** (-p)
            q = integrate_disk(f, QuadConfig(rel_tol=1e-10, singular_refine_threshold=min(1.0, 10 * (1 - a))))
            exact = series_kernel_integral(a, p)
            worst_series = max(worst_series, abs(q.value - exact) / exact)
            mc, se = monte_carlo_disk(f, 1_000_000, 17 * p + int(10 * a))
            z = abs(q.value - mc) / se if se > 0 else (0.0 if abs(q.value - mc) < 1e-12 else math.inf)
            worst_z = max(worst_z, z)
    report(5, worst_series <= 1e-6 and worst_z <= 3,
           f"quadrature vs series max rel {worst_series:.1e} (tol 1e-6); vs Monte Carlo max |z| {worst_z:.2f} (tol 3)")


def test_06_cone_mass_constant(report, c0_scan):
    c0, scans = c0_scan
    monotone = all(all(a.mass < b.mass for a, b in zip(rows, rows[1:])) for rows in scans.values())
    converged = all(r.converged for rows in scans.values() for r in rows)
    report(6, c0 > 0 and monotone and converged,
           f"measured c0 = {c0:.4f} over {len(scans)} functions x 10 radii; masses monotone in r: {monotone}")


def test_07_noncompact_lower_bound(report, c0_scan):
    c0, _ = c0_scan
    psi = Polynomial((0, 0.5, 0.5))
    rows = noncompact_lower_bound(psi, [1 - 2.0**-k for k in range(1, 11)])
    margin = min(r.kappa / (c0 * r.bound) for r in rows)
    report(7, all(r.kappa > c0 * r.bound for r in rows),
           f"z(1+z)/2, k = 1..10: min kappa / (c0 * bound) = {margin:.3f} (must exceed 1)")


def test_08_valency(report):
    failures = 0
    g = np.random.default_rng(800)
    for n in range(1, 6):
        B = make_blaschke(random_zeros(n, 0.9, 800 + n), np.exp(2j * np.pi * g.random()))
        pts = 0.999 * np.sqrt(g.random(100)) * np.exp(2j * np.pi * g.random(100))
        failures += sum(valency(B, z).count != n for z in pts)
    report(8, failures == 0, f"degree 1..5, 100 points each: {failures} failures")


def test_09_carleson_linearity(report):
    base, _ = carleson_sup(Identity())
    ratios = []
    for n in (1, 2, 3):
        v, _ = carleson_sup(make_blaschke(random_zeros(n, 0.8, 900 + n)))
        ratios.append(v / base)
    worst = max(abs(r - n) / n for n, r in zip((1, 2, 3), ratios))
    report(9, worst <= 0.05, f"sup ratios {[round(r, 6) for r in ratios]} vs 1,2,3; max rel err {worst:.1e} (tol 5e-2)")


def test_10_nt_values(report):
    p2 = nt_profile(Polynomial((0, 0, 1)), 1.0, (10, 100, 1000, 10000))
    p3 = nt_profile(Polynomial((0, 0, 0, 1)), 1.0, (10, 100, 1000, 10000))
    ok = p2.n == 2 and p2.t >= 0.99 and p3.n == 3 and p3.t >= 0.99
    report(10, ok, f"z^2 -> (n, t) = ({p2.n}, {p2.t:.6f}); z^3 -> ({p3.n}, {p3.t:.6f}) (t >= 0.99)")
