import math
import warnings

import numpy as np
import pytest

from powerwall.domain import BoundaryProblem, PathType, Potential
from powerwall.neumann import (ConcatenationDomain, GuardBandExcluded, NeumannQuadrature, classify_domain,
                               first_order_term, firstbound_envelope, q_kernel, q_on_grid, table1_boundaries)
from powerwall.propagators import k_scl
from powerwall.validation import brute_sine_count

QUAD1 = Potential.quadratic(1.0)
LIN1 = Potential.linear(1.0)


def test_q_vanishes_where_residual_is_zero():
    # A-only and quadratic E legs carry no residual
    assert q_kernel(QUAD1, -1.0, 2.0, -0.5, 0.0) == 0
    assert q_kernel(QUAD1, -1.0, 4.5, -0.5, 0.5) == 0
    assert q_kernel(QUAD1, 0.5, 5.0, 0.5, 0.0) == 0  # no path at all


def test_q_for_linear_E_is_five_over_W_squared():
    x, y, t = -1.5, -1.5, 4.0
    W = t * t + 4 * (x + y)
    e = sum(c for kind, c, _ in k_scl(BoundaryProblem(y, x, t), LIN1).terms if kind is PathType.E)
    q = q_kernel(LIN1, x, t + 1.0, y, 1.0)
    assert q == pytest.approx(5.0 / W ** 2 * e, rel=1e-12)


def test_q_on_grid_matches_scalar():
    rng = np.random.default_rng(4)
    for p in (QUAD1, LIN1):
        x, y = rng.uniform(-3, 3, (2, 200))
        s = rng.uniform(0.2, 4, 200)
        val, exc, _, _ = q_on_grid(p, x, y, s)
        for i in np.nonzero(~exc)[0]:
            v = q_kernel(p, x[i], s[i], y[i], 0.0)
            assert abs(val[i] - v) <= 1e-9 * max(1.0, abs(v))


def test_q_modulus_is_residual_times_kernel_modulus():
    # single C path: |Q| = |Delta A / A| |A|
    x, y, t = 0.7, -1.3, 1.1
    ((kind, c, term),) = [r for r in k_scl(BoundaryProblem(y, x, t), QUAD1).terms if r[0] is PathType.C]
    others = sum(abs(tt.residual) for k, _, tt in k_scl(BoundaryProblem(y, x, t), QUAD1).terms if k is not PathType.C)
    assert others == 0
    assert abs(q_kernel(QUAD1, x, t, y, 0.0)) == pytest.approx(abs(term.residual) * math.sqrt(abs(term.A2) / (2 * math.pi)))


def test_classify_domain_examples():
    assert classify_domain(QUAD1, BoundaryProblem(-0.5, -0.5, 4.0), 5.0, 2.0) == 1
    assert classify_domain(QUAD1, BoundaryProblem(-2.0, -2.0, 8.0), 100.0, 4.0) == 0
    assert classify_domain(QUAD1, BoundaryProblem(-2.0, -2.0, 8.0), 0.5, 4.0) == 4
    assert classify_domain(QUAD1, BoundaryProblem(-2.0, -2.0, 8.0), 0.1, 1.0) == 2
    with pytest.raises(ValueError):
        classify_domain(LIN1, BoundaryProblem(-2.0, -2.0, 8.0), 0.5, 4.0)
    with pytest.raises(ValueError):
        classify_domain(QUAD1, BoundaryProblem(-2.0, -2.0, 8.0), -0.5, 4.0)


def test_classify_domain_matches_brute_force_scans():
    bp = BoundaryProblem(-2.0, -1.5, 8.0)
    rng = np.random.default_rng(1)
    q = rng.uniform(0.05, 4, 300)
    tau = rng.uniform(0.1, 7.9, 300)
    got = classify_domain(QUAD1, bp, q, tau)
    for qi, ti, g in zip(q, tau, got):
        want = brute_sine_count(-bp.y / qi, ti) * brute_sine_count(-bp.x / qi, bp.t - ti)
        assert g == want


def test_classify_domain_jumps_only_on_table1_curves():
    w = 1.3
    p = Potential.quadratic(w)
    bp = BoundaryProblem(-2.0, -1.5, 7.0)
    dom = ConcatenationDomain(p, bp)
    qs = np.linspace(0.05, 3.0, 60)
    taus = np.linspace(0.01, 6.99, 4000)
    dtau = taus[1] - taus[0]
    curves = dom.boundary_curves(qs)
    for i, q in enumerate(qs):
        counts = dom.branch_count_map(np.full(taus.shape, q), taus)
        jumps = taus[1:][np.diff(counts) != 0]
        lines = [curves["tau_T_C"], curves["tau_T_D"], curves["tau_Tstar_C"][i], curves["tau_Tstar_D"][i]]
        lines = np.array([v for v in lines if np.isfinite(v)])
        for j in jumps:
            assert np.min(np.abs(lines - j)) <= 2 * dtau


def test_table1_vertical_lines_and_fold_at_rho_one():
    bp = BoundaryProblem(-2.0, -1.5, 7.0)
    c = table1_boundaries(QUAD1, bp, np.array([2.0, 1.5]))
    assert c["q_rho_C"] == 2.0 and c["q_rho_D"] == 1.5
    # at rho = 1 the fold time is pi / omega
    assert c["tau_Tstar_C"][0] == pytest.approx(math.pi)
    assert c["tau_Tstar_D"][1] == pytest.approx(7.0 - math.pi)


FAST = NeumannQuadrature((-4, 4), (-2.0, -0.3), panels=3, order=4, outer_nodes=12, min_leg=0.1, max_step=0.1)


def gauss(c, w):
    return lambda y: np.exp(-((y - c) ** 2) / (4 * w * w))


def test_first_order_term_is_linear_in_phi():
    x = np.linspace(-3, 3, 7)
    f, g = gauss(-1.0, 0.3), gauss(-1.4, 0.2)
    a, b = 0.7 - 0.2j, -1.3
    Ff = first_order_term(QUAD1, x, 1.5, f, FAST).value
    Fg = first_order_term(QUAD1, x, 1.5, g, FAST).value
    Fab = first_order_term(QUAD1, x, 1.5, lambda y: a * f(y) + b * g(y), FAST).value
    np.testing.assert_allclose(Fab, a * Ff + b * Fg, atol=1e-12 * np.max(np.abs(Fab)))


def test_first_order_term_vanishes_without_residual():
    quad = NeumannQuadrature((-5, -0.5), (-2.0, -0.5), panels=2, order=4, outer_nodes=8, min_leg=0.1)
    res = first_order_term(QUAD1, np.array([-2.0, -1.0]), 2.0, gauss(-1.0, 0.2), quad)
    assert np.all(res.value == 0) and res.max_residual == 0


def test_first_order_term_accepts_samples():
    ys = np.linspace(-2, -0.3, 400)
    x = np.array([-1.0, 0.5])
    a = first_order_term(QUAD1, x, 1.5, gauss(-1.0, 0.3), FAST).value
    b = first_order_term(QUAD1, x, 1.5, (ys, gauss(-1.0, 0.3)(ys)), FAST).value
    np.testing.assert_allclose(a, b, rtol=1e-3, atol=1e-6)


def test_guard_band_doubling_within_excised_weight():
    # legs long enough for C folds: the guard band is active
    quad = NeumannQuadrature((0.2, 3.0), (-2.5, -0.5), panels=3, order=4, outer_nodes=12, min_leg=0.05,
                             guard=0.2, max_step=0.1)
    wide = NeumannQuadrature(**{**quad.__dict__, "guard": 0.4})
    x = np.array([-1.0, 0.5])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        a = first_order_term(QUAD1, x, 4.0, gauss(-1.5, 0.3), quad)
        b = first_order_term(QUAD1, x, 4.0, gauss(-1.5, 0.3), wide)
    assert any(issubclass(w.category, GuardBandExcluded) for w in caught)
    assert a.excised_nodes > 0 and b.excised_nodes > a.excised_nodes
    assert np.max(np.abs(a.value - b.value)) <= b.excised_weight


def test_envelope_formula():
    assert firstbound_envelope(2.0, 1.5, 3.0, 0.5) == pytest.approx(2.0 * 2.25 * 9 / 2 * 0.5)
