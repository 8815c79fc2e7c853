"""Action, Van Vleck amplitude, residual and caustic data for each path type.

The closed forms below are written as plain array functions of the boundary
data (x, y, t) plus the crossing time t1 where one is needed, so that grid
evaluators can call them on whole arrays.  The path-level wrappers at the
bottom dispatch a :class:`ClassicalPath` onto the right formula.

Notation: ``A2 = -d^2 S/dx dy`` (signed), ``residual = (d^2 A/dx^2) / A``.
Applying ``-d^2/dx^2 + V - i d/dt`` to a single WKB term ``A exp(iS)``
leaves ``-residual * A exp(iS)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CausticSingular, ClassicalPath, PathType, Potential, SclTerm

CAUSTIC_TOL = 1e-8


@dataclass(frozen=True)
class CausticProbe:
    """Caustic denominator of a path and whether it is numerically zero."""

    denom: float
    on_caustic: bool


def caustic_tolerance(x, y):
    return CAUSTIC_TOL * (1.0 + np.abs(x) + np.abs(y))


# -- free motion (type A) ---------------------------------------------------

def action_free(x, y, t):
    return (x - y) ** 2 / (4.0 * t)


def a2_free(t):
    return 1.0 / (2.0 * t)


# -- quadratic wall ---------------------------------------------------------

def action_quad_B(x, y, t, w):
    wt = w * t
    return w * ((x * x + y * y) * np.cos(wt) - 2.0 * x * y) / (4.0 * np.sin(wt))


def a2_quad_B(t, w):
    return w / (2.0 * np.sin(w * t))


def action_quad_E(x, y, t, w):
    return (x + y) ** 2 / (4.0 * (t - np.pi / w))


def a2_quad_E(t, w):
    return -1.0 / (2.0 * (t - np.pi / w))


def denom_quad_C(x, y, t, t1, w):
    """Y = x - y cos(omega (t - t1)); vanishes on the fold rho cos(W) = -1."""
    return x - y * np.cos(w * (t - t1))


def entry_speed_quad_C(x, y, t, t1, w):
    """Entry speed -y/t1 of a quadratic C path (t1 from the path solver keeps full relative precision)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return -y / t1


def action_quad_C(x, y, t, t1, w):
    # free leg plus oscillator leg through the wall point; stationary in t1
    # (both legs carry the same energy at the root), so root error enters
    # only at second order.  x / sin(Omega) = v / omega keeps it finite as x -> 0.
    Om = w * (t - t1)
    v = entry_speed_quad_C(x, y, t, t1, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        return y * y / (4.0 * t1) + x * v * np.cos(Om) / 4.0


def action_quad_C_xfree(x, y, t, t1, w):
    """Same action in the x-free form y^2/4t1 + v^2 sin(2 Omega) / 8 omega."""
    Om = w * (t - t1)
    v = entry_speed_quad_C(x, y, t, t1, w)
    return -y * v / 4.0 + v * v * np.sin(2.0 * Om) / (8.0 * w)


def a2_quad_C(x, y, t, t1, w):
    return entry_speed_quad_C(x, y, t, t1, w) / (2.0 * denom_quad_C(x, y, t, t1, w))


def residual_quad_C(x, y, t, t1, w):
    Om = w * (t - t1)
    Y = denom_quad_C(x, y, t, t1, w)
    wt1 = w * t1
    bracket = 4.0 * x * y * np.cos(Om) - 6.0 * x * x + 2.0 * y * y + 3.0 * x * x * wt1 * wt1
    return wt1 * wt1 * bracket / (4.0 * Y ** 4)


def denom_quad_D(x, y, t, t1, w):
    """X = y - x cos(omega t1)."""
    return y - x * np.cos(w * t1)


def exit_leg_ratio(x, y, t, t1, w):
    """(t - t1) / x for a quadratic D root.

    On the root it equals -sin(omega t1) / (omega y), which stays accurate
    when the free leg is short (|x| <= |y|); otherwise the direct quotient
    is better conditioned.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(x) <= np.abs(y), -np.sin(w * t1) / (w * y), (t - t1) / x)


def action_quad_D(x, y, t, t1, w):
    wt1 = w * t1
    return w * y * y * np.cos(wt1) / (4.0 * np.sin(wt1)) + x / (4.0 * exit_leg_ratio(x, y, t, t1, w))


def a2_quad_D(x, y, t, t1, w):
    return -1.0 / (2.0 * exit_leg_ratio(x, y, t, t1, w) * denom_quad_D(x, y, t, t1, w))


def residual_quad_D(x, y, t, t1, w):
    X = denom_quad_D(x, y, t, t1, w)
    wr = w * exit_leg_ratio(x, y, t, t1, w)
    ws = w * (t - t1)
    bracket = 4.0 * x * y * np.cos(w * t1) - 6.0 * x * x + 2.0 * y * y + y * y * ws * ws
    return -y * y * wr * wr * bracket / (4.0 * X ** 4)


# -- linear wall ------------------------------------------------------------

def action_lin_B(x, y, t, k):
    return (x - y) ** 2 / (4.0 * t) - (x + y) * k * t / 2.0 - k * k * t ** 3 / 12.0


def denom_lin_E(x, y, t, k):
    """k t^2 + 4(x + y); the two bounce paths merge where it vanishes."""
    return k * t * t + 4.0 * (x + y)


def action_lin_E(x, y, t, k, branch):
    """Bounce action; ``branch`` is +1 for the slow (shallow) path, -1 for the fast one.

    The W^(3/2) term carries sqrt(k): that is what Hamilton-Jacobi and
    A2 = -sqrt(k) / (2 sqrt(W)) require; a k^(3/2) prefactor agrees only at k = 1.
    """
    W = np.maximum(denom_lin_E(x, y, t, k), 0.0)
    return branch * np.sqrt(k) * W ** 1.5 / 24.0 - k * t * (x + y) / 4.0 - k * k * t ** 3 / 24.0


def a2_lin_E(x, y, t, k, branch):
    return -branch * np.sqrt(k) / (2.0 * np.sqrt(np.maximum(denom_lin_E(x, y, t, k), 0.0)))


def residual_lin_E(x, y, t, k):
    return 5.0 / denom_lin_E(x, y, t, k) ** 2


def denom_lin_C(x, y, t, t1, k):
    """Y = f'(t1) of the crossing-time cubic."""
    return 3.0 * k * t1 * t1 - 4.0 * k * t * t1 + k * t * t + x - y


def action_lin_C(x, y, t, t1, k):
    s = t - t1
    return y * y / (4.0 * t1) + x * x / (4.0 * s) - x * k * s / 2.0 - k * k * s ** 3 / 12.0


def a2_lin_C(x, y, t, t1, k):
    return -y / (2.0 * t1 * denom_lin_C(x, y, t, t1, k))


def residual_lin_C(x, y, t, t1, k):
    # reduced modulo the cubic, so t1 must be an actual root
    Y = denom_lin_C(x, y, t, t1, k)
    num = (-24.0 * t * t * y - 9.0 * t * (2.0 * k * t * t + 2.0 * x - y) * t1
           + (23.0 * k * t * t - 21.0 * x + 21.0 * y) * t1 * t1)
    return k * num / Y ** 4


def denom_lin_D(x, y, t, t1, k):
    return -x + y - 2.0 * k * t * t1 + 3.0 * k * t1 * t1


def action_lin_D(x, y, t, t1, k):
    return (x * x / (4.0 * (t - t1)) - k * k * t1 ** 3 / 12.0 - k * t1 * y / 2.0
            + y * y / (4.0 * t1))


def a2_lin_D(x, y, t, t1, k):
    return -x / (2.0 * (t - t1) * denom_lin_D(x, y, t, t1, k))


def residual_lin_D(x, y, t, t1, k):
    X = denom_lin_D(x, y, t, t1, k)
    kt2 = k * t * t
    c0 = t * t * y * (-4.0 * kt2 * kt2 * y - 47.0 * x * x * y + 76.0 * x * y * y - 20.0 * y ** 3
                      + 6.0 * kt2 * x * x - 20.0 * kt2 * x * y + 40.0 * kt2 * y * y)
    c1 = 2.0 * t * y * (-21.0 * x ** 3 + 12.0 * kt2 * kt2 * y + 69.0 * x * x * y - 60.0 * x * y * y
                        + 12.0 * y ** 3 - 22.0 * kt2 * x * x + 60.0 * kt2 * x * y - 40.0 * kt2 * y * y)
    c2 = (5.0 * x ** 4 + 10.0 * x ** 3 * y + 38.0 * kt2 * x * x * y - 39.0 * x * x * y * y
          - 84.0 * kt2 * x * y * y + 28.0 * x * y ** 3 - 20.0 * kt2 * kt2 * y * y
          + 40.0 * kt2 * y ** 3 - 4.0 * y ** 4)
    return (c0 + c1 * t1 + c2 * t1 * t1) / (x * x * (t - t1) ** 2 * X ** 4)


# -- path-level dispatch ----------------------------------------------------

def lin_E_branch(path: ClassicalPath) -> int:
    """+1 for the slow bounce (entry speed below kt/2), -1 for the fast one."""
    k, t = path.potential.k, path.problem.t
    a = path.interior_coeffs[0]
    v = a - 2.0 * k * path.t1
    return 1 if v <= 0.5 * k * t else -1


def _unpack(path: ClassicalPath):
    bp = path.problem
    return bp.x, bp.y, bp.t


def _param(p: Potential):
    return p.omega if p.is_quadratic else p.k


def action(path: ClassicalPath, p: Potential) -> float:
    """Classical action S of ``path``."""
    x, y, t = _unpack(path)
    kind = path.path_type
    if kind is PathType.A:
        return float(action_free(x, y, t))
    if kind is PathType.B_SPECIAL:
        return 0.0
    c = _param(p)
    if p.is_quadratic:
        table = {PathType.B: lambda: action_quad_B(x, y, t, c),
                 PathType.E: lambda: action_quad_E(x, y, t, c),
                 PathType.C: lambda: action_quad_C(x, y, t, path.t1, c),
                 PathType.D: lambda: action_quad_D(x, y, t, path.t1, c)}
    else:
        table = {PathType.B: lambda: action_lin_B(x, y, t, c),
                 PathType.E: lambda: action_lin_E(x, y, t, c, lin_E_branch(path)),
                 PathType.C: lambda: action_lin_C(x, y, t, path.t1, c),
                 PathType.D: lambda: action_lin_D(x, y, t, path.t1, c)}
    return float(table[kind]())


def caustic_probe(path: ClassicalPath, p: Potential) -> CausticProbe:
    """Caustic denominator (Y for C, X for D, kt^2 + 4(x+y) or t - pi/omega for E)."""
    x, y, t = _unpack(path)
    kind = path.path_type
    if kind is PathType.A:
        d = t
    elif kind is PathType.B_SPECIAL:
        d = 0.0
    elif kind is PathType.B:
        d = np.sin(p.omega * t) / p.omega if p.is_quadratic else t
    elif p.is_quadratic:
        d = {PathType.E: lambda: t - p.half_period,
             PathType.C: lambda: denom_quad_C(x, y, t, path.t1, p.omega),
             PathType.D: lambda: denom_quad_D(x, y, t, path.t1, p.omega)}[kind]()
    else:
        d = {PathType.E: lambda: denom_lin_E(x, y, t, p.k),
             PathType.C: lambda: denom_lin_C(x, y, t, path.t1, p.k),
             PathType.D: lambda: denom_lin_D(x, y, t, path.t1, p.k)}[kind]()
    d = float(d)
    return CausticProbe(denom=d, on_caustic=bool(abs(d) < caustic_tolerance(x, y)))


def _require_regular(path, p):
    probe = caustic_probe(path, p)
    if probe.on_caustic:
        raise CausticSingular(f"type {path.path_type} path on a caustic (denominator {probe.denom:.3g})")
    return probe


def amplitude_sq(path: ClassicalPath, p: Potential):
    """Signed A2 = -d^2 S/dx dy and the Maslov count (1 iff A2 < 0)."""
    _require_regular(path, p)
    x, y, t = _unpack(path)
    kind = path.path_type
    if kind is PathType.A:
        a2 = a2_free(t)
    elif p.is_quadratic:
        w = p.omega
        a2 = {PathType.B: lambda: a2_quad_B(t, w),
              PathType.E: lambda: a2_quad_E(t, w),
              PathType.C: lambda: a2_quad_C(x, y, t, path.t1, w),
              PathType.D: lambda: a2_quad_D(x, y, t, path.t1, w)}[kind]()
    else:
        k = p.k
        a2 = {PathType.B: lambda: a2_free(t),
              PathType.E: lambda: a2_lin_E(x, y, t, k, lin_E_branch(path)),
              PathType.C: lambda: a2_lin_C(x, y, t, path.t1, k),
              PathType.D: lambda: a2_lin_D(x, y, t, path.t1, k)}[kind]()
    a2 = float(a2)
    return a2, int(a2 < 0)


def residual(path: ClassicalPath, p: Potential) -> float:
    """Delta A / A for ``path``; zero for A, B and the quadratic bounce."""
    _require_regular(path, p)
    x, y, t = _unpack(path)
    kind = path.path_type
    if kind in (PathType.A, PathType.B):
        return 0.0
    if p.is_quadratic:
        w = p.omega
        r = {PathType.E: lambda: 0.0,
             PathType.C: lambda: residual_quad_C(x, y, t, path.t1, w),
             PathType.D: lambda: residual_quad_D(x, y, t, path.t1, w)}[kind]()
    else:
        k = p.k
        r = {PathType.E: lambda: residual_lin_E(x, y, t, k),
             PathType.C: lambda: residual_lin_C(x, y, t, path.t1, k),
             PathType.D: lambda: residual_lin_D(x, y, t, path.t1, k)}[kind]()
    return float(r)


def scl_term(path: ClassicalPath, p: Potential) -> SclTerm:
    """Bundle S, A2, Maslov count and residual; residual is None on a caustic."""
    S = action(path, p)
    probe = caustic_probe(path, p)
    if probe.on_caustic:
        return SclTerm(path, S, float("nan"), 0, None, probe.denom)
    a2, m = amplitude_sq(path, p)
    return SclTerm(path, S, a2, m, residual(path, p), probe.denom)
