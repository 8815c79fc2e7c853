"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary.
"""
import math
import time

import numpy as np

from powerwall.classical_paths import enumerate_paths, solve_type_B_special, solve_type_E
from powerwall.domain import BoundaryProblem, PathType, Potential
from powerwall.hypothesis import GridSpec, Window, estimate_opnorm, required_nodes, scan_residual
from powerwall.neumann import NeumannQuadrature
from powerwall.propagators import k_free, k_harmonic, k_linear, k_scl
from powerwall.roots import tangency_time
from powerwall.scl_terms import action, caustic_probe, residual
from powerwall.validation import (check_cubic_discriminant, check_finite_differences, check_shooting,
                                  check_sine_counts, neumann_bound_check, wavepacket_errors)

QUADS = [Potential.quadratic(w) for w in (0.7, 1.0, 2.0)]
LINS = [Potential.linear(k) for k in (0.5, 1.0, 3.0)]


def _rel(a, b):
    return abs(a - b) / abs(b)


def _exactness_cases(rng, n):
    """(potential, problem, exact value) triples on inputs where K_scl must be exact."""
    cases = []
    for p in QUADS:
        half = math.pi / p.omega
        for _ in range(n):
            y, x = -rng.uniform(0.0, 3.0, 2)
            t = rng.uniform(0.02, 0.98) * half
            cases.append((p, BoundaryProblem(y, x, t), k_free(x, y, t)))
            y, x = rng.uniform(0.0, 3.0, 2)
            cases.append((p, BoundaryProblem(y, x, t), k_harmonic(x, y, t, p.omega)))
    for p in LINS:
        for _ in range(n):
            y, x = -rng.uniform(0.1, 3.0, 2)
            t = rng.uniform(0.02, 0.98) * math.sqrt(-4.0 * (x + y) / p.k)  # below the bounce threshold
            cases.append((p, BoundaryProblem(y, x, t), k_free(x, y, t)))
            y, x = rng.uniform(0.0, 3.0, 2)
            t = rng.uniform(0.1, 5.0)
            cases.append((p, BoundaryProblem(y, x, t), k_linear(x, y, t, p.k)))
    return cases


def test_criterion_1_exactness(acceptance):
    rng = np.random.default_rng(0)
    cases = _exactness_cases(rng, 40)
    exact_zero = []
    for p in QUADS:
        for _ in range(40):
            y, x = -rng.uniform(0.0, 3.0, 2)
            exact_zero.append((p, BoundaryProblem(y, x, rng.uniform(1.02, 1.98) * math.pi / p.omega)))
    clock = time.perf_counter()
    worst = max(_rel(k_scl(bp, p).value, ref) for p, bp, ref in cases)
    paths = [(q, p) for p, bp, _ in cases for q in enumerate_paths(bp, p)]
    paths += [(q, p) for p, bp in exact_zero for q in enumerate_paths(bp, p)]
    zero_types = {PathType.A, PathType.B}
    nonzero = sum(residual(q, p) != 0.0 for q, p in paths
                  if q.path_type in zero_types or (p.is_quadratic and q.path_type is PathType.E))
    n_E = sum(q.path_type is PathType.E for q, _ in paths)
    seconds = time.perf_counter() - clock
    ok = worst < 1e-12 and nonzero == 0 and n_E >= 100 and seconds < 1.0
    acceptance(1, "exactness", ok, f"worst rel err {worst:.2e} over {len(cases)} kernels, "
                                   f"{nonzero} nonzero residuals on {len(paths)} A/B/quad-E paths, {seconds:.2f} s")
    assert ok


def test_criterion_2_special_cases(acceptance):
    errs = {}
    for k, t in ((1.0, 2.0), (1.3, 3.1), (0.4, 5.0)):
        x = -3.0 * k * t * t / 32.0
        firsts = sorted(q.t1 for q in solve_type_E(BoundaryProblem(x, x, t), Potential.linear(k)))
        errs[f"double root k={k}"] = max(abs(firsts[0] - t / 8.0), abs(firsts[1] - 3.0 * t / 8.0)) / t
    axis_on = True
    for k, t in ((1.0, 3.0), (2.0, 1.5)):
        p = Potential.linear(k)
        bp = BoundaryProblem(y=-k * t * t / 4.0, x=0.0, t=t)
        (e,) = [q for q in enumerate_paths(bp, p) if q.path_type is PathType.E]
        errs[f"axis caustic k={k}"] = abs(t - 2.0 * e.t1) / t
        axis_on &= caustic_probe(e, p).on_caustic
    for w, v in ((1.0, 1.0), (math.pi, 2.5), (0.3, 0.7)):
        errs[f"special action w={w}"] = abs(action(solve_type_B_special(w, v), Potential.quadratic(w)))
    (sp,) = enumerate_paths(BoundaryProblem(0.0, 0.0, 1.0), Potential.quadratic(math.pi))
    errs["T*(1)"] = abs(float(tangency_time(1.0)) - math.pi)
    worst_name = max(errs, key=errs.get)
    ok = errs[worst_name] < 1e-12 and axis_on and sp.path_type is PathType.B_SPECIAL
    acceptance(2, "closed-form special cases", ok, f"worst {errs[worst_name]:.1e} ({worst_name}), "
                                             f"axis on caustic {axis_on}, origin path {sp.path_type.name}")
    assert ok


def test_criterion_3_root_classification(acceptance):
    clock = time.perf_counter()
    results = [check_sine_counts(10_000, seed=0), check_cubic_discriminant(10_000, seed=0)]
    seconds = time.perf_counter() - clock
    ok = all(r.passed for r in results) and seconds < 30.0
    acceptance(3, "root classification", ok, "; ".join(r.line() for r in results) + f"; {seconds:.1f} s")
    assert ok


def test_criterion_4_finite_differences(acceptance):
    clock = time.perf_counter()
    results = [r for p in QUADS + LINS for r in check_finite_differences(p, n=1000, seed=0)]
    seconds = time.perf_counter() - clock
    failed = [r.line() for r in results if not r.passed]
    worst = {}
    for r in results:
        name = r.name.split(" ", 1)[1]
        worst[name] = max(worst.get(name, 0.0), r.worst / r.tolerance)
    ok = not failed and seconds < 60.0
    summary = ", ".join(f"{k} {v:.2f}" for k, v in worst.items())
    acceptance(4, "finite-difference suite", ok, f"6 potentials x 1000 paths, worst/tol: {summary}; {seconds:.1f} s"
               + ("; " + "; ".join(failed) if failed else ""))
    assert ok


def test_criterion_5_shooting(acceptance):
    results = [check_shooting(p, n=1000, seed=0) for p in QUADS + LINS]
    failed = [r.line() for r in results if not r.passed]
    worst = max(r.worst for r in results)
    ok = not failed
    acceptance(5, "shooting closure", ok, f"6 potentials x 1000 paths, worst {worst:.1e} (tol 1e-6)"
               + ("; " + "; ".join(failed) if failed else ""))
    assert ok


def test_criterion_6_wavepackets(acceptance):
    clock = time.perf_counter()
    quad = wavepacket_errors(Potential.quadratic(1.0), [1.5, 2.9, 3.36])
    lin = wavepacket_errors(Potential.linear(6.0), [1.0, 1.5, 2.5])
    # the omega = pi, t = 2 packet: compared on x <= 0, where no fold reaches
    pi_case = wavepacket_errors(Potential.quadratic(math.pi), [2.0], y0=-6.0, k0=6.0, sigma=1.0,
                                half_width=60.0, x_window=(-60.0, 0.0))
    seconds = time.perf_counter() - clock
    clean = [r.l2_error for r in quad[:2] + lin[:2] + pi_case]
    ratios = [quad[2].l2_error / max(r.l2_error for r in quad[:2]),
              lin[2].l2_error / max(r.l2_error for r in lin[:2])]
    ok = max(clean) < 1e-2 and min(ratios) > 10.0 and seconds < 300.0
    acceptance(6, "wavepackets", ok,
               f"pre-caustic max L2 {max(clean):.1e}, caustic/clean ratios {ratios[0]:.0f}x (quadratic) "
               f"{ratios[1]:.0f}x (linear), {seconds:.0f} s")
    assert ok


CLEAN_WINDOWS = [
    (Potential.quadratic(1.0), Window((-2, -0.5), (-2, -0.5), (0.5, 2.5))),
    (Potential.quadratic(1.0), Window((0.5, 2), (-2, -0.5), (0.2, 1.0))),
    (Potential.quadratic(1.0), Window((-2, -0.5), (0.5, 2), (0.2, 1.0))),
    (Potential.linear(1.0), Window((0.5, 2), (-2, -0.5), (0.2, 1.0))),
    (Potential.linear(1.0), Window((-2, -0.5), (0.5, 2), (0.2, 1.0))),
    (Potential.linear(1.0), Window((-1, -0.5), (-1, -0.5), (4, 5))),
]
CAUSTIC_WINDOWS = [
    (Potential.quadratic(1.0), Window((0.3, 1.5), (-2.5, -1.5), (3.4, 3.9))),
    (Potential.linear(1.0), Window((0.2, 1.0), (-2, -0.5), (0.5, 3))),
]


def test_criterion_7_hypothesis_scans(acceptance):
    clean = [scan_residual(p, w) for p, w in CLEAN_WINDOWS]
    bad = [scan_residual(p, w, GridSpec()) for p, w in CAUSTIC_WINDOWS]
    clean_ok = all(r.verdict_i and math.isfinite(r.sup_residual) for r in clean)
    exps = [r.denom_exponent for r in bad]
    bad_ok = all(not r.verdict_i and e is not None and abs(e + 4.0) <= 0.2 for r, e in zip(bad, exps))
    dom = (-4.0, 4.0)
    n = required_nodes(dom, 1.0)
    norms = [estimate_opnorm(None, 1.0, 0.0, dom, n, kernel=k_free),
             estimate_opnorm(None, 1.0, 0.0, dom, n, kernel=lambda a, b, d: k_harmonic(a, b, d, 1.0)),
             estimate_opnorm(None, 1.0, 0.0, dom, n, kernel=lambda a, b, d: k_linear(a, b, d, 1.0))]
    norm_ok = all(abs(v - 1.0) <= 0.05 for v in norms)
    ok = clean_ok and bad_ok and norm_ok
    acceptance(7, "hypothesis scans", ok,
               f"{sum(r.verdict_i for r in clean)}/{len(clean)} clean windows finite, caustic exponents "
               + ", ".join(f"{e:.2f}" if e is not None else "none" for e in exps)
               + ", opnorms " + ", ".join(f"{v:.3f}" for v in norms))
    assert ok


def test_criterion_8_neumann_bound(acceptance):
    quad = NeumannQuadrature((-5.0, 5.0), (-2.5, -0.2), panels=6, order=6, outer_nodes=36, min_leg=0.05)
    r = neumann_bound_check(Potential.quadratic(1.0), 2.0, np.linspace(-6.0, 6.0, 241), -1.0, 0.3, quad)
    ok = r.passed
    acceptance(8, "Neumann bound", ok, f"||K Q phi|| {r.norm:.3g} <= envelope {r.envelope:.3g} "
                                       f"(D {r.D:.3g}, C {r.C:.3f}, t 2)")
    assert ok
