import json
import math

import pytest

from powerwall.classical_paths import enumerate_paths
from powerwall.domain import BoundaryProblem, PathType, Potential
from powerwall.hypothesis import (GridSpec, HypothesisReport, Window, estimate_opnorm, opnorm_scan,
                                  required_nodes, scan_residual)
from powerwall.propagators import k_free, k_harmonic
from powerwall.scl_terms import residual

QUAD1 = Potential.quadratic(1.0)
LIN1 = Potential.linear(1.0)


def test_window_validation():
    with pytest.raises(ValueError):
        Window((1, 0), (0, 1), (1, 2))
    with pytest.raises(ValueError):
        Window((0, 1), (0, 1), (0, 2))
    assert Window.from_dict({"x": [0, 1], "y": [0, 1], "t": [1, 2]}) == Window((0, 1), (0, 1), (1, 2))


@pytest.mark.parametrize("window", [
    Window((-2, -0.5), (-2, -0.5), (0.5, 2.5)),
    Window((0.5, 2), (0.5, 2), (0.5, 2.5)),
])
def test_quadratic_window_without_residual(window):
    r = scan_residual(QUAD1, window)
    assert r.verdict_i and r.sup_residual == 0.0


def test_linear_E_window_is_finite_and_attained():
    r = scan_residual(LIN1, Window((-1, -0.5), (-1, -0.5), (4, 5)))
    assert r.verdict_i
    assert 0 < r.sup_residual < 1
    x, y, t = r.argmax
    es = [q for q in enumerate_paths(BoundaryProblem(y, x, t), LIN1) if q.path_type is PathType.E]
    assert max(abs(residual(q, LIN1)) for q in es) == pytest.approx(r.sup_residual, rel=1e-12)
    assert r.refinement_sups == sorted(r.refinement_sups)


@pytest.mark.parametrize("p,window", [
    (QUAD1, Window((0.3, 1.5), (-2.5, -1.5), (3.4, 3.9))),
    (LIN1, Window((0.2, 1.0), (-2, -0.5), (0.5, 3))),
])
def test_window_across_caustic_diverges_like_fourth_power(p, window):
    r = scan_residual(p, window, GridSpec())
    assert not r.verdict_i
    assert math.isinf(r.sup_residual)
    assert r.denom_exponent == pytest.approx(-4.0, abs=0.2)


def test_report_serialises_to_json():
    r = scan_residual(QUAD1, Window((0.3, 1.5), (-2.5, -1.5), (3.4, 3.9)))
    d = json.loads(json.dumps(r.to_dict()))
    assert d["sup_residual"] == "inf"
    assert d["window"]["t"] == [3.4, 3.9]


def test_opnorm_of_exact_kernels_is_one():
    dom = (-4.0, 4.0)
    n = required_nodes(dom, 1.0)
    assert estimate_opnorm(None, 1.0, 0.0, dom, n, kernel=k_free) == pytest.approx(1.0, abs=0.05)
    h = estimate_opnorm(None, 1.0, 0.0, dom, n, kernel=lambda a, b, d: k_harmonic(a, b, d, 1.0))
    assert h == pytest.approx(1.0, abs=0.05)


def test_opnorm_scan_sets_verdict():
    rep = HypothesisReport(window=Window((0, 1), (0, 1), (1, 2)))
    out = opnorm_scan(QUAD1, [(1.0, 0.0), (2.0, 0.5)], (-4, 4), report=rep)
    assert len(out) == 2 and rep.verdict_ii
    with pytest.raises(ValueError):
        estimate_opnorm(QUAD1, 1.0, 1.0, (-1, 1), 10)
