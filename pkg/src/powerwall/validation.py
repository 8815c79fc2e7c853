"""Cross-checks of the closed forms against independent numerical oracles.

Each ``check_*`` function draws random caustic-free instances, compares a
closed form with a finite-difference or brute-force estimate and returns a
:class:`CheckResult`.  The test suite and ``powerwall validate`` both use
them.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .classical_paths import enumerate_paths
from .domain import BoundaryProblem, CausticSingular, NoPath, PathType, Potential
from .hypothesis import GridSpec, Window, opnorm_scan, scan_residual
from .neumann import GuardBandExcluded, NeumannQuadrature, first_order_term, firstbound_envelope
from .oracle import cn_grid, crank_nicolson, l2_norm, shoot_many
from .propagators import scl_propagate
from .roots import cubic_aux, expected_sine_root_count, sine_line, sine_line_roots
from .scl_terms import action, amplitude_sq, caustic_probe, residual

# instances whose denominator is this close to zero (relative) are skipped
_SAFE_DENOM = 5e-2
# ... and so are paths whose free or wall leg is shorter than this fraction of t:
# A2 carries 1/t1 or 1/(t - t1) and blows up as a leg shrinks to nothing
_SAFE_LEG = 2e-2


@dataclass
class CheckResult:
    name: str
    passed: bool
    samples: int
    worst: float
    tolerance: float
    detail: Dict[str, float] = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3g} tol={self.tolerance:.3g} n={self.samples}"


def random_problem(rng: np.random.Generator, span: float = 3.0, t_range=(0.1, 5.0)) -> BoundaryProblem:
    y, x = rng.uniform(-span, span, 2)
    return BoundaryProblem(y=float(y), x=float(x), t=float(rng.uniform(*t_range)))


def _key(paths):
    """(type, rank among paths of that type) for each path."""
    seen: Dict[PathType, int] = {}
    out = []
    for p in sorted(paths, key=lambda q: (q.path_type.value, q.t1 if q.t1 is not None else 0.0)):
        r = seen.get(p.path_type, 0)
        seen[p.path_type] = r + 1
        out.append(((p.path_type, r), p))
    return out


def _counts(paths):
    c: Dict[PathType, int] = {}
    for p in paths:
        c[p.path_type] = c.get(p.path_type, 0) + 1
    return c


def _stencil_paths(bp, p, dx=0.0, dy=0.0, dt=0.0):
    return enumerate_paths(BoundaryProblem(bp.y + dy, bp.x + dx, bp.t + dt), p)


def _safe(path, p):
    probe = caustic_probe(path, p)
    scale = path.problem.scale
    t = path.problem.t
    legs_ok = all(_SAFE_LEG * t < c < (1.0 - _SAFE_LEG) * t for c in path.crossings)
    return legs_ok and abs(probe.denom) > _SAFE_DENOM * scale and path.path_type is not PathType.B_SPECIAL


def sample_paths(p: Potential, n: int, rng: np.random.Generator, span: float = 3.0,
                 t_range=(0.1, 5.0), margin: float = 0.25):
    """Collect ``n`` caustic-free paths whose endpoints sit at least ``margin`` from the wall."""
    out = []
    while len(out) < n:
        bp = random_problem(rng, span, t_range)
        if min(abs(bp.x), abs(bp.y)) < margin:
            continue
        for path in enumerate_paths(bp, p):
            if _safe(path, p):
                out.append(path)
    return out[:n]


def _matched(bp, p, key, **shift):
    paths = _stencil_paths(bp, p, **shift)
    for k, q in _key(paths):
        if k == key:
            return q
    return None


def _stencil_values(path, p, fn, h, shifts):
    """fn evaluated on the matching branch at each shifted problem; None if any branch vanishes."""
    bp = path.problem
    base = _key(enumerate_paths(bp, p))
    key = next(k for k, q in base if q == path)
    base_counts = _counts(enumerate_paths(bp, p))
    vals = []
    for sh in shifts:
        shifted = {name: h * s for name, s in sh.items()}
        paths = _stencil_paths(bp, p, **shifted)
        if _counts(paths).get(key[0], 0) != base_counts.get(key[0], 0):
            return None
        q = dict(_key(paths)).get(key)
        if q is None or not _safe(q, p):
            return None
        vals.append(fn(q))
    return vals


def fd_derivatives(path, p, h: float = 1e-4, h_res: Optional[float] = None) -> Optional[dict]:
    """Finite-difference S_x, S_y, S_t, -S_xy and d2|A|/dx2 / |A| on the path's own branch.

    The mixed difference is Richardson-extrapolated from steps h and h / 2.
    ``h_res`` (default h) is the step for the second difference of |A|,
    extrapolated twice from h_res, h_res / 2 and h_res / 4.
    """
    h_res = h if h_res is None else h_res
    S = lambda q: action(q, p)
    absA = lambda q: math.sqrt(abs(amplitude_sq(q, p)[0]))
    s = _stencil_values(path, p, S, h, [dict(dx=1), dict(dx=-1), dict(dy=1), dict(dy=-1), dict(dt=1), dict(dt=-1),
                                        dict(dx=1, dy=1), dict(dx=1, dy=-1), dict(dx=-1, dy=1), dict(dx=-1, dy=-1),
                                        dict(dx=.5, dy=.5), dict(dx=.5, dy=-.5), dict(dx=-.5, dy=.5),
                                        dict(dx=-.5, dy=-.5)])
    if s is None:
        return None
    a = _stencil_values(path, p, absA, h_res, [dict(dx=1), dict(dx=-1), dict(dx=0.5), dict(dx=-0.5),
                                               dict(dx=0.25), dict(dx=-0.25)])
    if a is None:
        return None
    a0 = absA(path)
    d2 = [(a[2 * i] - 2 * a0 + a[2 * i + 1]) / (h_res * 0.5 ** i) ** 2 for i in range(3)]
    r1 = [(4 * d2[i + 1] - d2[i]) / 3 for i in range(2)]
    return {
        "S_x": (s[0] - s[1]) / (2 * h),
        "S_y": (s[2] - s[3]) / (2 * h),
        "S_t": (s[4] - s[5]) / (2 * h),
        "A2": -(16 * (s[10] - s[11] - s[12] + s[13]) - (s[6] - s[7] - s[8] + s[9])) / (12 * h * h),
        "res": (16 * r1[1] - r1[0]) / (15 * a0),
    }


def check_finite_differences(p: Potential, n: int = 1000, seed: int = 0, h: float = 1e-4,
                             h_res: float = 1e-3, tol_vv: float = 1e-4, tol_hj: float = 1e-4,
                             tol_res: float = 1e-3, res_floor: float = 1e-6) -> List[CheckResult]:
    """Hamilton-Jacobi, momentum, Van Vleck and residual identities by central differences.

    Errors are relative.  The residual divides a second difference of |A|
    by h_res^2, so it uses a coarser step to keep rounding noise (about
    1e-14 / h_res^2) below the truncation error, and its budget is
    ``tol_res`` relative plus ``res_floor`` absolute.
    """
    rng = np.random.default_rng(seed)
    worst = {"hj": 0.0, "mom": 0.0, "vv": 0.0, "res": 0.0}
    done = 0
    pool: List = []
    while done < n:
        # every safe path of each drawn problem, so bounce and two-root
        # families are sampled as often as the direct path
        if not pool:
            pool = sample_paths(p, 64, rng)
        path = pool.pop()
        d = fd_derivatives(path, p, h, h_res)
        if d is None:
            continue
        bp = path.problem
        V = float(p(bp.x))
        hj_scale = abs(d["S_t"]) + d["S_x"] ** 2 + V + 1.0
        worst["hj"] = max(worst["hj"], abs(d["S_t"] + d["S_x"] ** 2 + V) / hj_scale)
        pf, pi = 0.5 * path.final_velocity, 0.5 * path.initial_velocity
        worst["mom"] = max(worst["mom"], abs(d["S_x"] - pf) / (1 + abs(pf)), abs(d["S_y"] + pi) / (1 + abs(pi)))
        a2, _ = amplitude_sq(path, p)
        worst["vv"] = max(worst["vv"], abs(d["A2"] - a2) / abs(a2))
        r = residual(path, p)
        worst["res"] = max(worst["res"], abs(d["res"] - r) / (tol_res * abs(r) + res_floor) * tol_res)
        done += 1
    name = p.kind
    return [
        CheckResult(f"{name} Hamilton-Jacobi", worst["hj"] < tol_hj, n, worst["hj"], tol_hj),
        CheckResult(f"{name} momentum identities", worst["mom"] < tol_hj, n, worst["mom"], tol_hj),
        CheckResult(f"{name} Van Vleck", worst["vv"] < tol_vv, n, worst["vv"], tol_vv),
        CheckResult(f"{name} residual", worst["res"] < tol_res, n, worst["res"], tol_res),
    ]


def check_shooting(p: Potential, n: int = 1000, seed: int = 0, dt: float = 1e-3,
                   tol_x: float = 1e-6, tol_s: float = 1e-6) -> CheckResult:
    """Re-integrate enumerated paths with RK4; compare endpoint and action."""
    rng = np.random.default_rng(seed)
    paths = []
    while len(paths) < n:
        bp = random_problem(rng)
        paths.extend(q for q in enumerate_paths(bp, p) if q.path_type is not PathType.B_SPECIAL)
    paths = paths[:n]
    y = np.array([q.problem.y for q in paths])
    v = np.array([q.initial_velocity for q in paths])
    t = np.array([q.problem.t for q in paths])
    x = np.array([q.problem.x for q in paths])
    S = np.array([action(q, p) for q in paths])
    shot = shoot_many(p, y, v, t, dt)
    ex = float(np.max(np.abs(shot.x_final - x) / (1.0 + np.abs(x) + np.abs(y))))
    es = float(np.max(np.abs(shot.action - S) / np.maximum(np.abs(S), 1.0)))
    return CheckResult(f"{p.kind} shooting closure", ex < tol_x and es < tol_s, n, max(ex, es), tol_x,
                       {"endpoint": ex, "action": es})


def brute_sine_count(rho: float, T: float, samples: int = 10_000) -> int:
    """Sign changes of rho sin W + W - T on a uniform grid over (0, pi)."""
    # endpoints included: f(0) = -T and f(pi) = pi - T fix the outer signs
    w = np.linspace(0.0, math.pi, samples + 1)
    f = sine_line(w, rho, T)
    return int(np.count_nonzero(np.sign(f[1:]) != np.sign(f[:-1])))


def check_sine_counts(n: int = 10_000, seed: int = 0) -> CheckResult:
    """Analytic root-count rule and the solver's roots against a dense sign-change scan."""
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.0, 4.0, n)
    T = rng.uniform(0.0, 6.0, n)
    rule = expected_sine_root_count(rho, T)
    r, f = sine_line_roots(rho, T)
    solver = np.isfinite(r).astype(int) + np.isfinite(f).astype(int)
    w = np.linspace(0.0, math.pi, 4001)
    vals = rho[:, None] * np.sin(w)[None, :] + w[None, :] - T[:, None]
    scan = np.count_nonzero(np.sign(vals[:, 1:]) != np.sign(vals[:, :-1]), axis=1)
    agree = (rule == scan) & (solver == scan)
    bad = int(n - agree.sum())
    return CheckResult("quadratic C root counts", bad == 0, n, bad, 0)


def check_cubic_discriminant(n: int = 10_000, seed: int = 0) -> CheckResult:
    """sign(D) of the crossing-time cubic against companion-matrix eigenvalues."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        x, y = rng.uniform(-5, 5, 2)
        t = rng.uniform(0.1, 6.0)
        k = rng.uniform(0.2, 3.0)
        a2, a1, a0 = -2.0 * t, (x - y) / k + t * t, y * t / k
        _, _, D = cubic_aux(a2, a1, a0)
        ev = np.linalg.eigvals(np.array([[-a2, -a1, -a0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
        nreal = int(np.sum(np.abs(ev.imag) <= 1e-9 * (1.0 + np.abs(ev.real))))
        if (D > 0 and nreal != 1) or (D < 0 and nreal != 3):
            bad += 1
    return CheckResult("linear C discriminant sign", bad == 0, n, bad, 0)


@dataclass(frozen=True)
class WavepacketPoint:
    """K_scl propagation against Crank-Nicolson at one time."""

    t: float
    l2_error: float
    cn_norm: float
    singular_nodes: int
    seconds: float


def gaussian_packet(x, y0: float, k0: float, sigma: float, dx: float) -> np.ndarray:
    """Normalised Gaussian centred at y0 with mean wavenumber k0 (mean velocity 2 k0)."""
    psi = np.exp(-((x - y0) ** 2) / (4.0 * sigma ** 2) + 1j * k0 * x)
    return psi / l2_norm(psi, dx)


def wavepacket_errors(p: Potential, times, y0: float = -12.0, k0: float = 6.0, sigma: float = 1.0,
                      dx: float = 0.02, dt: float = 2e-4, half_width: float = 50.0,
                      support: float = 8.0, dy: float = 0.005, stride: int = 4,
                      x_window: Optional[Tuple[float, float]] = None) -> List[WavepacketPoint]:
    """L^2 distance between K_scl and Crank-Nicolson evolutions of a Gaussian packet.

    Crank-Nicolson runs on [-half_width, half_width] with spacing dx.  The
    K_scl quadrature samples the packet analytically every ``dy`` within
    ``support`` widths of y0; dy must be fine enough that the fastest
    path reaching the box (initial momentum up to ~x / sin(omega t) near a
    half period) does not alias onto the packet's own momentum.  The two
    results are compared on every ``stride``-th grid node, restricted to
    ``x_window`` when given.
    """
    n = int(round(2 * half_width / dx)) + 1
    x = cn_grid(n, dx)
    psi = gaussian_packet(x, y0, k0, sigma, dx)
    ref = float(np.max(np.abs(psi)))
    yq = np.arange(y0 - support * sigma, y0 + support * sigma + 0.5 * dy, dy)
    phi = np.exp(-((yq - y0) ** 2) / (4.0 * sigma ** 2) + 1j * k0 * yq) / l2_norm(
        np.exp(-((x - y0) ** 2) / (4.0 * sigma ** 2)), dx)
    xs = x[::stride]
    keep = np.ones(xs.shape, bool) if x_window is None else (xs >= x_window[0]) & (xs <= x_window[1])
    xs = xs[keep]
    prev = 0.0
    out = []
    for t in sorted(times):
        clock = time.perf_counter()
        psi = crank_nicolson(p, psi, t - prev, dx, dt, edge_ref=ref)
        prev = t
        scl, nsing = scl_propagate(p, phi, yq, xs, t, dy)
        cn = psi[::stride][keep]
        out.append(WavepacketPoint(float(t), l2_norm(scl - cn, stride * dx), l2_norm(cn, stride * dx), nsing,
                                   time.perf_counter() - clock))
    return out


@dataclass(frozen=True)
class NeumannBoundCheck:
    """First Neumann term against its envelope D C^2 t^2 / 2 ||phi||."""

    norm: float
    D: float
    C: float
    phi_norm: float
    envelope: float
    excised_nodes: int

    @property
    def passed(self) -> bool:
        return math.isfinite(self.envelope) and self.norm <= self.envelope


def neumann_bound_check(p: Potential, t: float, x, center: float, width: float,
                        quad: NeumannQuadrature, levels: int = 10) -> NeumannBoundCheck:
    """Measure D and C on the quadrature window and compare ||F(., t)|| with the envelope.

    D is the refined sup of |Delta A / A| over final points ``quad.x1_range``,
    initial points ``quad.y_range`` and leg durations ``[min_leg t, t]``; C
    is the largest operator-norm estimate over a few leg durations on a
    domain covering every point involved.  ``phi`` is the unnormalised
    Gaussian ``exp(-(y - center)^2 / 4 width^2)``.
    """
    x = np.asarray(x, float)
    s_min = quad.min_leg * t
    window = Window(tuple(quad.x1_range), tuple(quad.y_range), (s_min, t))
    D = scan_residual(p, window, GridSpec(levels=levels)).sup_residual
    lo = min(quad.x1_range[0], quad.y_range[0], float(x.min()))
    hi = max(quad.x1_range[1], quad.y_range[1], float(x.max()))
    legs = np.linspace(s_min, t, 4)
    C = max(v for *_, v in opnorm_scan(p, [(float(s), 0.0) for s in legs], (lo, hi)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GuardBandExcluded)
        res = first_order_term(p, x, t, lambda y: np.exp(-((y - center) ** 2) / (4.0 * width ** 2)), quad)
    norm = math.sqrt(float(trapezoid(np.abs(res.value) ** 2, x)))
    phi_norm = (2.0 * math.pi) ** 0.25 * math.sqrt(width)
    return NeumannBoundCheck(norm, float(D), float(C), phi_norm, firstbound_envelope(D, C, t, phi_norm),
                             res.excised_nodes)


def run_all(quick: bool = True, seed: int = 0) -> List[CheckResult]:
    """Every cross-check at either a quick or a full sample size."""
    n_fd = 100 if quick else 1000
    n_shoot = 100 if quick else 1000
    n_roots = 2000 if quick else 10_000
    out = [check_sine_counts(n_roots, seed), check_cubic_discriminant(n_roots, seed)]
    for p in (Potential.quadratic(1.0), Potential.linear(1.0)):
        out.extend(check_finite_differences(p, n_fd, seed))
        out.append(check_shooting(p, n_shoot, seed))
    return out
