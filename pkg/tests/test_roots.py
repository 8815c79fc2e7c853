import math

import mpmath
import numpy as np
import pytest

from powerwall.roots import (cubic_aux, expected_sine_root_count, sine_line, sine_line_complement, sine_line_roots,
                             solve_monic_cubic, tangency_time)


def test_tangency_time_at_rho_one_is_pi():
    assert tangency_time(1.0) == pytest.approx(math.pi, abs=1e-15)
    assert math.isnan(tangency_time(0.5))


def test_tangency_time_rho_two():
    # frozen: sqrt(3) + arccos(-1/2)
    assert tangency_time(2.0) == pytest.approx(math.sqrt(3.0) + 2.0 * math.pi / 3.0, rel=1e-14)


@pytest.mark.parametrize("rho,T,count", [(2.0, 3.5, 2), (2.0, 4.0, 0), (0.5, 2.0, 1), (0.5, 3.5, 0),
                                         (3.0, 1.0, 1)])
def test_root_count_rule(rho, T, count):
    assert expected_sine_root_count(rho, T) == count
    r, f = sine_line_roots(rho, T)
    assert int(np.isfinite(r)) + int(np.isfinite(f)) == count


def test_dense_scan_agrees_for_spec_cases():
    # 10^6-sample sign-change scan over (0, pi)
    w = np.linspace(0.0, math.pi, 1_000_001)
    for rho, T, count in [(2.0, 3.5, 2), (2.0, 4.0, 0)]:
        f = sine_line(w, rho, T)
        assert np.count_nonzero(np.sign(f[1:]) != np.sign(f[:-1])) == count


def test_sine_roots_are_accurate():
    rng = np.random.default_rng(3)
    rho = rng.uniform(0, 5, 2000)
    T = rng.uniform(0, 7, 2000)
    r, f = sine_line_roots(rho, T)
    for roots in (r, f):
        ok = np.isfinite(roots)
        assert np.all(np.abs(sine_line(roots[ok], rho[ok], T[ok])) < 1e-11)
        assert np.all((roots[ok] > 0) & (roots[ok] < math.pi))


def test_cubic_against_numpy_roots():
    rng = np.random.default_rng(4)
    for _ in range(500):
        a2, a1, a0 = rng.uniform(-5, 5, 3)
        roots, _ = solve_monic_cubic(a2, a1, a0)
        ref = np.roots([1.0, a2, a1, a0])
        real_ref = np.sort(ref[np.abs(ref.imag) < 1e-7].real)
        got = np.sort(roots[np.isfinite(roots)])
        Q, R, D = cubic_aux(a2, a1, a0)
        assert D == pytest.approx(R * R + Q ** 3)
        if abs(D) > 1e-6:
            assert got.size == real_ref.size
            np.testing.assert_allclose(got, real_ref, atol=1e-9)


def test_cubic_repeated_root():
    # (z - 1)^2 (z + 2) = z^3 - 3z + 2
    roots, _ = solve_monic_cubic(0.0, -3.0, 2.0)
    got = np.sort(roots[np.isfinite(roots)])
    assert got[0] == pytest.approx(-2.0)
    assert np.all(np.abs(got[1:] - 1.0) < 1e-6)


@pytest.mark.parametrize("rho, T", [(5.84, 3.2453421668134466), (40.0, 3.15), (0.5, 1e-3), (3.0, 3.1416)])
def test_short_complement_keeps_relative_digits(rho, T):
    rise, fall = sine_line_roots(rho, T)
    for root in (float(r) for r in (rise, fall) if np.isfinite(r)):
        u = float(sine_line_complement(rho, T, root))
        with mpmath.workdps(40):
            exact = mpmath.findroot(lambda v: rho * mpmath.sin(mpmath.mpf(T) - v) - v, mpmath.mpf(T - root))
        assert u == pytest.approx(float(exact), rel=1e-14)
