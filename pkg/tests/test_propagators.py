import math

import numpy as np
import pytest

from powerwall.classical_paths import enumerate_paths
from powerwall.domain import BoundaryProblem, CausticSingular, PathType, Potential
from powerwall.oracle import pde_residual
from powerwall.propagators import k_free, k_harmonic, k_linear, k_scl, k_scl_grid
from powerwall.scl_terms import residual, scl_term

QUAD1 = Potential.quadratic(1.0)
QUADPI = Potential.quadratic(math.pi)
LIN1 = Potential.linear(1.0)
ROOT_MINUS_I = np.exp(-0.25j * math.pi)


def test_free_kernel_at_coincident_points():
    assert k_free(0.3, 0.3, 1.0) == pytest.approx(ROOT_MINUS_I / math.sqrt(4 * math.pi), abs=1e-16)


def test_free_kernel_modulus():
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(np.abs(k_free(x, 1.2, 0.7)), (4 * math.pi * 0.7) ** -0.5, rtol=1e-14)


def test_free_kernel_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        k_free(0.0, 0.0, 0.0)


def gaussian(y, c=0.0, s=0.5, k0=0.0):
    return np.exp(-((y - c) ** 2) / (4 * s * s) + 1j * k0 * y)


def apply(kernel, x, y, phi, dy):
    return (kernel(x[:, None], y[None, :]) * phi[None, :]).sum(axis=1) * dy


def test_free_semigroup_on_gaussian():
    y = np.arange(-30, 30, 0.01)
    phi = gaussian(y, 0.2, 0.6, 1.0)
    mid = apply(lambda a, b: k_free(a, b, 0.4), y, y, phi, 0.01)
    two = apply(lambda a, b: k_free(a, b, 0.3), y, y, mid, 0.01)
    one = apply(lambda a, b: k_free(a, b, 0.7), y, y, phi, 0.01)
    core = np.abs(y) < 8
    assert np.max(np.abs(two[core] - one[core])) < 1e-6


def test_harmonic_small_omega_limit():
    a = k_harmonic(0.3, -0.4, 0.8, 1e-6)
    assert a == pytest.approx(k_free(0.3, -0.4, 0.8), abs=1e-9)


def test_harmonic_quarter_period_at_origin():
    w = 1.7
    assert k_harmonic(0.0, 0.0, math.pi / (2 * w), w) == pytest.approx(math.sqrt(w / (4 * math.pi)) * ROOT_MINUS_I)


def test_harmonic_maslov_continuation():
    w, x, y = 1.0, 0.3, 0.5
    t = 1.5 * math.pi
    S = w * ((x * x + y * y) * math.cos(w * t) - 2 * x * y) / (4 * math.sin(w * t))
    expected = math.sqrt(w / (4 * math.pi * abs(math.sin(w * t)))) * ROOT_MINUS_I * (-1j) * np.exp(1j * S)
    assert k_harmonic(x, y, t, w) == pytest.approx(expected)
    with pytest.raises(ZeroDivisionError):
        k_harmonic(x, y, math.pi, w)


@pytest.mark.parametrize("kernel,p", [
    (lambda x, t: k_harmonic(x, 0.4, t, 1.3), Potential.quadratic(1.3)),
    (lambda x, t: k_linear(x, 0.4, t, 0.8), Potential.linear(0.8)),
    (lambda x, t: k_free(x, 0.4, t), None),
])
def test_exact_kernels_solve_schroedinger(kernel, p):
    for x in (-0.7, 0.2, 1.1):
        r = pde_residual(kernel, p, x, 0.9, 1e-3, whole_line=True)
        assert abs(r) < 1e-4


def test_linear_kernel_examples():
    assert k_linear(0.3, -0.2, 0.9, 0.0) == pytest.approx(k_free(0.3, -0.2, 0.9))
    t, k = 1.3, 0.7
    assert k_linear(0.0, 0.0, t, k) == pytest.approx(
        ROOT_MINUS_I / math.sqrt(4 * math.pi * t) * np.exp(-1j * k * k * t ** 3 / 12))


def test_scl_equals_free_in_direct_regime():
    bp = BoundaryProblem(-1.0, -2.0, 0.3)
    v = k_scl(bp, QUAD1)
    assert [term[0] for term in v.terms] == [PathType.A]
    assert abs(v.value - k_free(-2.0, -1.0, 0.3)) <= 1e-12 * abs(v.value)


def test_scl_equals_harmonic_inside_quadratic_wall():
    bp = BoundaryProblem(0.8, 1.9, 2.0)
    v = k_scl(bp, QUAD1).value
    assert abs(v - k_harmonic(1.9, 0.8, 2.0, 1.0)) <= 1e-12 * abs(v)


def test_scl_equals_linear_kernel_inside_linear_wall():
    bp = BoundaryProblem(0.8, 1.9, 3.0)
    v = k_scl(bp, LIN1).value
    assert abs(v - k_linear(1.9, 0.8, 3.0, 1.0)) <= 1e-12 * abs(v)


def test_quadratic_A_plus_E_example():
    bp = BoundaryProblem(-1.0, -1.0, 2.0)
    v = k_scl(bp, QUADPI)
    t = 2.0
    e_term = -1j * abs(2 * (t - 1)) ** -0.5 * (2 * math.pi) ** -0.5 * ROOT_MINUS_I * np.exp(1j * 1.0)
    assert v.value == pytest.approx(k_free(-1.0, -1.0, t) + e_term, abs=1e-15)
    assert v.value == pytest.approx(sum(c for _, c, _ in v.terms), abs=1e-15)


def test_forbidden_region_is_zero():
    v = k_scl(BoundaryProblem(0.5, 0.5, 4.0), QUAD1)
    assert v.value == 0 and v.terms == ()


def test_special_family_raises():
    with pytest.raises(CausticSingular):
        k_scl(BoundaryProblem(0.0, 0.0, math.pi), QUAD1)


def test_grid_matches_scalar():
    rng = np.random.default_rng(9)
    for p in (QUAD1, LIN1, Potential.quadratic(2.5), Potential.linear(3.0)):
        y, x = rng.uniform(-3, 3, (2, 400))
        t = rng.uniform(0.1, 5, 400)
        grid, sing = k_scl_grid(p, x, y, t)
        for i in range(400):
            try:
                v = k_scl(BoundaryProblem(y[i], x[i], t[i]), p).value
            except CausticSingular:
                assert sing[i]
                continue
            assert abs(grid[i] - v) <= 1e-9 * max(1.0, abs(v))


def test_symmetry_under_endpoint_exchange():
    rng = np.random.default_rng(10)
    for p in (QUAD1, LIN1):
        for _ in range(100):
            y, x = rng.uniform(-3, 3, 2)
            t = rng.uniform(0.1, 5)
            a = k_scl(BoundaryProblem(y, x, t), p).value
            b = k_scl(BoundaryProblem(x, y, t), p).value
            assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
    assert k_harmonic(0.3, 1.2, 0.7, 1.1) == pytest.approx(k_harmonic(1.2, 0.3, 0.7, 1.1))


def test_unitarity_proxy_for_exact_kernel():
    y = np.arange(-25, 25, 0.01)
    phi = gaussian(y, -0.5, 0.7, 0.8)
    out = apply(lambda a, b: k_harmonic(a, b, 0.9, 1.0), y, y, phi, 0.01)
    assert np.sum(np.abs(out) ** 2) * 0.01 == pytest.approx(np.sum(np.abs(phi) ** 2) * 0.01, rel=1e-6)


def test_small_time_delta_limit():
    y = np.arange(-3, 3, 2e-4)
    phi = gaussian(y, -1.0, 0.4)
    x = np.array([-1.3, -1.0, -0.6])
    errs = []
    for t in (1e-3, 1e-4):
        out = apply(lambda a, b: k_free(a, b, t), x, y, phi, 2e-4)
        errs.append(np.max(np.abs(out - gaussian(x, -1.0, 0.4))))
    # first order in t: a tenfold shorter time gives a tenfold smaller error
    assert errs[1] < errs[0] / 5
    assert errs[1] < 1e-3


def test_single_C_term_pde_residual_matches_closed_form():
    # [-d2/dx2 + V - i d/dt] (A e^{iS}) = -(Delta A / A) A e^{iS}
    y = -1.3
    for p, x, t in ((QUAD1, 0.7, 1.1), (LIN1, 1.0, 1.0)):
        def term(xx, tt):
            (c,) = [q for q in enumerate_paths(BoundaryProblem(y, xx, tt), p) if q.path_type is PathType.C]
            return scl_term(c, p).contribution()

        (c,) = [q for q in enumerate_paths(BoundaryProblem(y, x, t), p) if q.path_type is PathType.C]
        lhs = pde_residual(term, p, x, t, 1e-3)
        rhs = -residual(c, p) * term(x, t)
        assert abs(lhs - rhs) <= 1e-3 * abs(rhs)
