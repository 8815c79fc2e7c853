"""Two-point boundary-value solutions for the quadratic and linear walls.

Paths are classified by where they start and end:

* A: free straight line, both ends left of the wall;
* B: entirely inside the wall;
* C: free segment, then into the wall;
* D: wall segment, then out into the free region;
* E: in from the left, bounce, and back out to the left.

``enumerate_paths`` dispatches on the signs of (y, x) and returns every
path that exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .domain import BoundaryProblem, ClassicalPath, NoPath, PathType, Potential
from .roots import (TANGENCY_TOL, cubic_aux, expected_sine_root_count, sine_line_complement, sine_line_roots,
                    solve_monic_cubic, tangency_time)

# physicality filter for cubic roots
ROOT_EDGE = 1e-12
_SAMPLES = 64
# exact-pi detection for the special oscillator family
_HALF_PERIOD_TOL = 1e-12


@dataclass(frozen=True)
class RootAnalysisQuadC:
    """Dimensionless root structure of ``rho sin(W) + W - T = 0`` on (0, pi)."""

    rho: float
    T: float
    Tstar: Optional[float]
    omegas: tuple

    @property
    def expected_count(self) -> int:
        return expected_sine_root_count(self.rho, self.T)


@dataclass(frozen=True)
class CubicAnalysisLinC:
    """Cubic crossing-time equation for a linear-wall type C path.

    The monic cubic is ``t1^3 + a2 t1^2 + a1 t1 + a0`` with
    a2 = -2t, a1 = (x - y)/k + t^2, a0 = y t / k.
    """

    a2: float
    a1: float
    a0: float
    Qc: float
    Rc: float
    D: float
    s: float
    real_roots: tuple
    roots: tuple = field(default=())

    @property
    def n_real(self) -> int:
        return len(self.real_roots)


def _check_quadratic(p: Potential):
    if not p.is_quadratic:
        raise ValueError("expected a quadratic wall")


# -- type A -----------------------------------------------------------------

def solve_type_A(bp: BoundaryProblem, p: Optional[Potential] = None) -> ClassicalPath:
    """Direct free path; exists whenever both endpoints are left of the wall.

    The potential only tags the returned path; the A formulas never use it.
    """
    if bp.x > 0 or bp.y > 0:
        raise NoPath(f"straight segment {bp.y} -> {bp.x} enters the wall")
    return ClassicalPath(PathType.A, bp, p, interior_coeffs=((bp.x - bp.y) / bp.t,))


# -- type B -----------------------------------------------------------------

def solve_type_B(bp: BoundaryProblem, p: Potential) -> ClassicalPath:
    """Path that stays inside the wall for the whole interval."""
    y, x, t = bp.y, bp.x, bp.t
    if x < 0 or y < 0:
        raise NoPath("type B needs both endpoints inside the wall")
    if p.is_quadratic:
        wt = p.omega * t
        if wt >= math.pi:
            raise NoPath(f"omega t = {wt:.6g} >= pi: no wall-only path")
        b = (x - y * math.cos(wt)) / math.sin(wt)
        path = ClassicalPath(PathType.B, bp, p, interior_coeffs=(y, b))
    else:
        a = (x - y + p.k * t * t) / t
        path = ClassicalPath(PathType.B, bp, p, interior_coeffs=(a, y))
    if not _segment_nonnegative(path, 0.0, t):
        raise NoPath("type B trajectory leaves the wall")
    return path


def solve_type_B_special(omega: float, v: float) -> ClassicalPath:
    """Member of the one-parameter family q = (v/omega) sin(omega tau), 0 -> 0 in pi/omega."""
    if not v > 0:
        raise ValueError("initial speed v must be positive")
    p = Potential.quadratic(omega)
    bp = BoundaryProblem(y=0.0, x=0.0, t=math.pi / omega)
    return ClassicalPath(PathType.B_SPECIAL, bp, p, interior_coeffs=(float(v),))


# -- type E -----------------------------------------------------------------

def _quad_E(bp, p):
    y, x, t = bp.y, bp.x, bp.t
    lag = t - p.half_period
    if lag <= 0:
        raise NoPath("type E in a quadratic wall needs t > pi/omega")
    if x + y == 0:
        raise NoPath("type E needs x + y < 0")
    v = -(x + y) / lag
    t1 = -y / v
    return [ClassicalPath(PathType.E, bp, p, t1=t1, t2=t1 + p.half_period, interior_coeffs=(v,))]


def linear_E_speeds(x, y, t, k):
    """Entry speeds v of the two linear-wall bounce paths (low, high); NaN if none.

    They solve v^2/k - v t - y = x, equivalent to the crossing-time quadratic.
    """
    W = k * t * t + 4.0 * (x + y)
    root = np.sqrt(np.maximum(k * W, 0.0))
    ok = W >= 0
    hi = np.where(ok, 0.5 * (k * t + root), np.nan)
    # the product of the roots is -k (x + y); this avoids cancellation in the slow one
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(ok, -k * (x + y) / hi, np.nan)
    return lo, hi


def _lin_E(bp, p):
    y, x, t, k = bp.y, bp.x, bp.t, p.k
    W = k * t * t + 4.0 * (x + y)
    if W < 0:
        raise NoPath(f"t^2 = {t * t:.6g} < 4|x+y|/k: no bounce path")
    if x + y == 0:
        raise NoPath("type E needs x + y < 0")
    lo, hi = linear_E_speeds(x, y, t, k)
    speeds = [float(lo)] if W == 0 else [float(hi), float(lo)]
    out = []
    for v in speeds:
        t1 = -y / v
        t2 = t1 + v / k
        a = 2.0 * k * t1 + v
        c = -k * t1 * t1 - v * t1
        out.append(ClassicalPath(PathType.E, bp, p, t1=t1, t2=t2, interior_coeffs=(a, c)))
    return out


def solve_type_E(bp: BoundaryProblem, p: Potential) -> List[ClassicalPath]:
    """Bounce paths between two points left of the wall, ordered by entry time."""
    if bp.x > 0 or bp.y > 0:
        raise ValueError("type E needs x <= 0 and y <= 0")
    paths = _quad_E(bp, p) if p.is_quadratic else _lin_E(bp, p)
    return sorted(paths, key=lambda q: q.t1)


# -- type C -----------------------------------------------------------------

def analyze_type_C_quadratic(bp: BoundaryProblem, omega: float) -> RootAnalysisQuadC:
    """Solve omega x t1 + y sin(omega (t - t1)) = 0 in the scaled form.

    With rho = -y/x, T = omega t and W = omega (t - t1) the equation becomes
    rho sin W + W - T = 0 with W in (0, pi).
    """
    if not (bp.y < 0 and bp.x > 0):
        raise ValueError("type C analysis needs y < 0 < x")
    rho = -bp.y / bp.x
    T = omega * bp.t
    return analyze_sine_line(rho, T)


def analyze_sine_line(rho: float, T: float) -> RootAnalysisQuadC:
    rising, falling = sine_line_roots(rho, T)
    omegas = tuple(float(w) for w in (rising, falling) if np.isfinite(w))
    Ts = float(tangency_time(rho)) if rho >= 1 else None
    return RootAnalysisQuadC(rho=float(rho), T=float(T), Tstar=Ts, omegas=omegas)


def analyze_type_C_linear(bp: BoundaryProblem, k: float) -> CubicAnalysisLinC:
    """Classify and solve k t1^3 - 2kt t1^2 + (kt^2 + x - y) t1 + y t = 0."""
    y, x, t = bp.y, bp.x, bp.t
    a2, a1, a0 = -2.0 * t, (x - y) / k + t * t, y * t / k
    Q, R, D = cubic_aux(a2, a1, a0)
    roots, _ = solve_monic_cubic(a2, a1, a0)
    real = tuple(float(r) for r in roots if np.isfinite(r))
    phys = tuple(r for r in real if _lin_C_physical(bp, k, r))
    return CubicAnalysisLinC(a2=a2, a1=a1, a0=a0, Qc=float(Q), Rc=float(R), D=float(D),
                             s=8.0 * x + y, real_roots=real, roots=phys)


def _lin_C_path(bp, p, t1):
    a = 2.0 * p.k * t1 - bp.y / t1
    c = bp.y - p.k * t1 * t1
    return ClassicalPath(PathType.C, bp, p, t1=t1, interior_coeffs=(a, c))


def _lin_C_physical(bp, k, t1):
    edge = ROOT_EDGE * max(1.0, bp.t)
    if not (edge < t1 < bp.t - edge):
        return False
    return _segment_nonnegative(_lin_C_path(bp, Potential.linear(k), t1), t1, bp.t)


def quad_C_entry(x, y, t, W, omega):
    """Crossing time t1 = t - W/omega and entry speed -y/t1 for a quadratic C root W.

    When the free leg is the shorter one it is taken from the polished
    complement omega t1 = omega t - W, so t1 keeps its relative digits.
    """
    T = omega * t
    with np.errstate(divide="ignore", invalid="ignore"):
        u = sine_line_complement(-y / x, T, W)
        t1 = np.where(u < W, u / omega, t - W / omega)
        v = -y / t1
    if np.ndim(t1) == 0:
        return float(t1), float(v)
    return t1, v


def quad_D_exit(x, y, t, theta, omega):
    """Crossing time t1 and exit velocity for a quadratic D root theta = omega t1.

    A short exit leg comes from the polished complement omega (t - t1).
    """
    T = omega * t
    with np.errstate(divide="ignore", invalid="ignore"):
        u = sine_line_complement(-x / y, T, theta)
        short = u < theta
        t1 = np.where(short, t - u / omega, theta / omega)
        vout = np.where(short, omega * x / u, -omega * y / np.sin(theta))
    if np.ndim(t1) == 0:
        return float(t1), float(vout)
    return t1, vout


def solve_type_C(bp: BoundaryProblem, p: Potential) -> List[ClassicalPath]:
    """All free-then-wall paths, sorted by crossing time."""
    if not (bp.y < 0 and bp.x > 0):
        raise ValueError("type C needs y < 0 < x")
    if p.is_quadratic:
        an = analyze_type_C_quadratic(bp, p.omega)
        paths = []
        for w in an.omegas:
            t1, v = quad_C_entry(bp.x, bp.y, bp.t, w, p.omega)
            paths.append(ClassicalPath(PathType.C, bp, p, t1=t1, interior_coeffs=(float(v),)))
    else:
        an = analyze_type_C_linear(bp, p.k)
        paths = [_lin_C_path(bp, p, r) for r in an.roots]
    return sorted(paths, key=lambda q: q.t1)


# -- type D -----------------------------------------------------------------

def solve_type_D(bp: BoundaryProblem, p: Potential) -> List[ClassicalPath]:
    """All wall-then-free paths, sorted by exit time.

    Quadratic: y omega (t - t1) + x sin(omega t1) = 0.  With theta = omega t1
    and rho' = -x/y this is rho' sin(theta) + theta - omega t = 0.
    Linear: k t1^2 (t - t1) + x t1 + y (t - t1) = 0.
    """
    y, x, t = bp.y, bp.x, bp.t
    if not (y > 0 and x < 0):
        raise ValueError("type D needs x < 0 < y")
    paths = []
    if p.is_quadratic:
        w = p.omega
        an = analyze_sine_line(-x / y, w * t)
        for theta in an.omegas:
            t1, vout = quad_D_exit(x, y, t, theta, w)
            # the wall arc is A sin(omega (t1 - s)) with exit velocity -omega A;
            # building it from the exit velocity keeps its digits when theta is
            # within rounding of pi, where -y / tan(theta) does not
            amp = -vout / w
            paths.append(ClassicalPath(PathType.D, bp, p, t1=t1,
                                       interior_coeffs=(amp * math.sin(theta), -amp * math.cos(theta))))
    else:
        k = p.k
        roots, _ = solve_monic_cubic(-t, -(x - y) / k, -y * t / k)
        edge = ROOT_EDGE * max(1.0, t)
        for r in roots:
            if not (np.isfinite(r) and edge < r < t - edge):
                continue
            t1 = float(r)
            path = ClassicalPath(PathType.D, bp, p, t1=t1,
                                 interior_coeffs=((k * t1 * t1 - y) / t1, y))
            if _segment_nonnegative(path, 0.0, t1):
                paths.append(path)
    return sorted(paths, key=lambda q: q.t1)


# -- helpers ----------------------------------------------------------------

def _segment_nonnegative(path: ClassicalPath, lo: float, hi: float) -> bool:
    """Sampled check (plus the parabola vertex) that q >= 0 on [lo, hi]."""
    tau = np.linspace(lo, hi, _SAMPLES)
    p = path.potential
    if not p.is_quadratic and path.path_type in (PathType.B, PathType.C, PathType.D, PathType.E):
        a = path.interior_coeffs[0]
        vertex = a / (2.0 * p.k)
        if lo < vertex < hi:
            tau = np.append(tau, vertex)
    q = path.position(tau)
    tol = 1e-9 * path.problem.scale
    return bool(np.all(q >= -tol))


def enumerate_paths(bp: BoundaryProblem, p: Potential, special_speed: float = 1.0) -> List[ClassicalPath]:
    """Every classical path from (y, 0) to (x, t), dispatched on the signs of y and x.

    Boundary cases: y = 0 with x > 0 is treated as type B; x = 0 with y < 0 is
    the left-side limit (A plus the bounce that exits exactly at t); the
    quadratic origin-to-origin problem at omega t = pi returns one member of
    the special family with initial speed ``special_speed``.
    """
    y, x, t = bp.y, bp.x, bp.t
    paths: List[ClassicalPath] = []

    def attempt(fn, *args):
        try:
            res = fn(*args)
        except NoPath:
            return
        paths.extend(res if isinstance(res, list) else [res])

    if y == 0 and x == 0:
        if p.is_quadratic:
            wt = p.omega * t
            if abs(wt - math.pi) <= _HALF_PERIOD_TOL * math.pi:
                return [solve_type_B_special(p.omega, special_speed)]
            if wt > math.pi:
                return [solve_type_A(bp, p)]
        attempt(solve_type_B, bp, p)
        return paths
    if y > 0 or (y == 0 and x > 0):
        if x >= 0:
            attempt(solve_type_B, bp, p)
        else:
            paths.extend(solve_type_D(bp, p))
        return paths
    # y <= 0 from here on
    if x > 0:
        return solve_type_C(bp, p)
    paths.append(solve_type_A(bp, p))
    attempt(solve_type_E, bp, p)
    return paths
