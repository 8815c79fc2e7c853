"""First-order Neumann term: one scattering off the WKB residual.

With a source phi(y) that is constant in time, the first correction is

    F(x, t) = int_0^t dtau1 int dx1 K_scl(x, t; x1, tau1) G(x1, tau1),
    G(x1, tau1) = int_0^tau1 dtau int dy Q(x1, tau1; y, tau) phi(y),

with Q = (Delta A / A) K_scl summed over paths.  Every kernel depends on
its two times only through their difference, so G is a cumulative integral
of g(x1, s) = int dy Q(x1, s; y) phi(y) over the leg duration s.

For the quadratic wall, :func:`classify_domain` counts how many C-then-D
concatenations pass through an interior point (q, tau).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .classical_paths import analyze_sine_line, enumerate_paths
from .domain import BoundaryProblem, CausticSingular, NoPath, Potential
from .families import kernel_on_grid, terms_on_grid
from .roots import expected_sine_root_count, sine_line_roots, tangency_time
from .scl_terms import scl_term

GUARD_HALF_WIDTH = 1e-2


class GuardBandExcluded(UserWarning):
    """Quadrature nodes inside a caustic guard band were dropped."""


class QuadratureNotConverged(RuntimeError):
    """Refined quadrature disagrees with the base one beyond tolerance."""


# -- the residual kernel ------------------------------------------------------

def q_kernel(p: Potential, x: float, t: float, y: float, tau: float) -> complex:
    """Q(x, t; y, tau) = sum over paths of (Delta A / A) times the path's kernel term."""
    if not t > tau:
        raise ValueError("need t > tau")
    bp = BoundaryProblem(y=y, x=x, t=t - tau)
    try:
        paths = enumerate_paths(bp, p)
    except NoPath:
        return 0j
    total = 0j
    for path in paths:
        term = scl_term(path, p)
        if term.singular:
            raise CausticSingular(f"type {path.path_type} path at {bp} is on a caustic")
        if term.residual != 0.0:
            total += term.residual * term.contribution()
    return total


def q_on_grid(p: Potential, x, y, s, guard: float = 0.0):
    """Vectorised Q over leg duration s, dropping families with |denom| < guard.

    Returns
    -------
    value : ndarray of complex
    excised : ndarray of bool
        Nodes where at least one family was dropped.
    excised_abs : ndarray
        |Q| carried by the dropped families (NaN when exactly singular).
    max_residual : float
        Largest |Delta A / A| among the kept terms.
    """
    fams = terms_on_grid(p, x, y, s)
    shape = np.broadcast(np.asarray(x), np.asarray(y), np.asarray(s)).shape
    value = np.zeros(shape, complex)
    excised = np.zeros(shape, bool)
    excised_abs = np.zeros(shape)
    max_res = 0.0
    for f in fams:
        res = np.nan_to_num(f.residual)
        if not np.any(f.mask & (res != 0)) and not np.any(f.mask & f.singular):
            continue
        near = f.mask & ((np.abs(f.denom) < guard) | f.singular)
        keep = f.mask & ~near
        c = np.nan_to_num(f.contribution())
        value = value + np.where(keep, res * c, 0.0)
        excised |= near
        excised_abs = excised_abs + np.where(near & ~f.singular, np.abs(res * c), 0.0)
        excised_abs = np.where(near & f.singular, np.inf, excised_abs)
        if np.any(keep):
            max_res = max(max_res, float(np.max(np.abs(res[keep]))))
    return value, excised, excised_abs, max_res


# -- concatenation domains (quadratic wall) -------------------------------------

def classify_domain(p: Potential, bp: BoundaryProblem, q, tau):
    """Number of C-then-D concatenations from y through (q, tau) to x.

    The C leg goes y -> q in time tau (rho = -y/q, T = omega tau); the D leg
    goes q -> x in time t - tau (rho' = -x/q, T' = omega (t - tau)).
    Works elementwise on arrays of (q, tau).
    """
    if not p.is_quadratic:
        raise ValueError("classify_domain is defined for the quadratic wall")
    if not (bp.y < 0 and bp.x < 0):
        raise ValueError("classify_domain needs y < 0 and x < 0")
    q, tau = np.broadcast_arrays(np.asarray(q, float), np.asarray(tau, float))
    if np.any(q <= 0) or np.any((tau <= 0) | (tau >= bp.t)):
        raise ValueError("need q > 0 and 0 < tau < t")
    w = p.omega
    nc = _count(*sine_line_roots(-bp.y / q, w * tau))
    nd = _count(*sine_line_roots(-bp.x / q, w * (bp.t - tau)))
    out = nc * nd
    return int(out) if out.ndim == 0 else out


def _count(rise, fall):
    return np.isfinite(rise).astype(int) + np.isfinite(fall).astype(int)


def table1_boundaries(p: Potential, bp: BoundaryProblem, q) -> Dict[str, object]:
    """Curves in the (q, tau) plane where the concatenation count can change.

    Returns vertical lines ``q_rho_C = -y`` and ``q_rho_D = -x``, horizontal
    lines ``tau_T_C = pi/omega`` and ``tau_T_D = t - pi/omega``, and the fold
    curves

        tau = (1/omega) [sqrt(y^2 - q^2)/q + arccos(q/y)]        (C leg, q <= -y)
        tau = t - (1/omega) [sqrt(x^2 - q^2)/q + arccos(q/x)]    (D leg, q <= -x)

    sampled at ``q`` (NaN where undefined).
    """
    w = p.omega
    q = np.asarray(q, float)

    def fold(end):
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (q > 0) & (q <= -end)
            qq = np.where(ok, q, -end)
            val = (np.sqrt(np.maximum(end * end - qq * qq, 0.0)) / qq + np.arccos(np.clip(qq / end, -1, 1))) / w
        return np.where(ok, val, np.nan)

    return {
        "q_rho_C": -bp.y,
        "q_rho_D": -bp.x,
        "tau_T_C": math.pi / w,
        "tau_T_D": bp.t - math.pi / w,
        "tau_Tstar_C": fold(bp.y),
        "tau_Tstar_D": bp.t - fold(bp.x),
    }


@dataclass(frozen=True)
class ConcatenationDomain:
    potential: Potential
    problem: BoundaryProblem

    def branch_count_map(self, q, tau):
        return classify_domain(self.potential, self.problem, q, tau)

    def boundary_curves(self, q):
        return table1_boundaries(self.potential, self.problem, q)


# -- first-order term -----------------------------------------------------------

@dataclass(frozen=True)
class NeumannQuadrature:
    """Resolution controls for :func:`first_order_term`.

    Leg durations below ``min_leg`` (as a fraction of t) are cut off; the
    spatial spacing at leg duration s is the quarter-wavelength step
    ``pi s / (2 span)`` where ``span`` bounds |x1 - y|, floored at
    ``max_step`` and capped at ``max_nodes`` nodes.
    """

    x1_range: Tuple[float, float]
    y_range: Tuple[float, float]
    panels: int = 8
    order: int = 8
    outer_nodes: int = 48
    min_leg: float = 0.02
    guard: float = GUARD_HALF_WIDTH
    max_step: float = 0.05
    max_nodes: int = 4000


@dataclass
class FirstOrderResult:
    x: np.ndarray
    value: np.ndarray
    max_residual: float
    excised_nodes: int
    excised_weight: float
    cutoff_estimate: float
    excised_samples: List[tuple] = field(default_factory=list)


def _gauss_panels(lo, hi, panels, order):
    g, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * g + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * gw)
    return edges, np.array(nodes), np.array(weights)


def _uniform(lo, hi, step, cap):
    n = min(cap, max(3, int(math.ceil((hi - lo) / step)) + 1))
    if n % 2 == 0:
        n += 1
    nodes = np.linspace(lo, hi, n)
    h = nodes[1] - nodes[0]
    w = np.full(n, 2.0 * h / 3.0)
    w[1::2] = 4.0 * h / 3.0
    w[0] = w[-1] = h / 3.0
    return nodes, w


def _phi_callable(phi) -> Callable:
    if callable(phi):
        return phi
    ys, vals = (np.asarray(a) for a in phi)
    vals = vals.astype(complex)
    return lambda y: np.interp(y, ys, vals.real, left=0.0, right=0.0) + 1j * np.interp(y, ys, vals.imag,
                                                                                        left=0.0, right=0.0)


def first_order_term(p: Potential, x, t: float, phi: Union[Callable, Tuple[np.ndarray, np.ndarray]],
                     quadrature: NeumannQuadrature) -> FirstOrderResult:
    """Evaluate F(x, t) at the final points ``x`` for a time-independent source ``phi``.

    ``phi`` is a vectorised callable or a pair (y_nodes, values) that is
    linearly interpolated (zero outside).  Legs are integrated with
    composite Gauss-Legendre in time and Simpson in space; nodes inside
    the caustic guard band are dropped and reported through a
    :class:`GuardBandExcluded` warning.
    """
    quad = quadrature
    f = _phi_callable(phi)
    x = np.atleast_1d(np.asarray(x, float))
    s_min = quad.min_leg * t
    x1_lo, x1_hi = quad.x1_range
    y_lo, y_hi = quad.y_range
    span_in = max(abs(x1_hi - y_lo), abs(x1_lo - y_hi), 1.0)
    span_out = max(abs(x.max() - x1_lo), abs(x1_hi - x.min()), 1.0)

    # x1 grid must resolve the outer kernel at its shortest leg
    step1 = min(quad.max_step, math.pi * s_min / (2.0 * span_out))
    x1, wx1 = _uniform(x1_lo, x1_hi, step1, quad.max_nodes)

    # inner legs: g(x1, s) on composite Gauss panels in s
    edges, s_nodes, s_weights = _gauss_panels(s_min, t - s_min, quad.panels, quad.order)
    max_res = 0.0
    excised_nodes = 0
    excised_weight = 0.0
    samples: List[tuple] = []
    panel_int = np.zeros((quad.panels, x1.size), complex)
    g_first = None
    for i in range(quad.panels):
        for j in range(quad.order):
            s = s_nodes[i, j]
            step = min(quad.max_step, math.pi * s / (2.0 * span_in))
            ys, wy = _uniform(y_lo, y_hi, step, quad.max_nodes)
            fy = f(ys)
            val, exc, exc_abs, mres = q_on_grid(p, x1[:, None], ys[None, :], s, quad.guard)
            max_res = max(max_res, mres)
            g = (val * (fy * wy)[None, :]).sum(axis=1)
            if g_first is None:
                g_first = g
            panel_int[i] += s_weights[i, j] * g
            if np.any(exc):
                n_exc = int(exc.sum())
                excised_nodes += n_exc
                weighted = np.abs(fy)[None, :] * wy[None, :] * wx1[:, None] * s_weights[i, j]
                excised_weight += float(np.sum(np.where(exc, exc_abs * weighted, 0.0)))
                if len(samples) < 64:
                    for a, b in np.argwhere(exc)[: 64 - len(samples)]:
                        samples.append((float(x1[a]), float(s), float(ys[b])))
    G_edges = np.vstack([np.zeros(x1.size, complex), np.cumsum(panel_int, axis=0)])
    spline = CubicSpline(edges, G_edges, axis=0)

    # outer leg: u = t - tau1 in [s_min, t - s_min]; G evaluated at tau1 = t - u
    _, u_nodes, u_weights = _gauss_panels(s_min, t - s_min, max(1, quad.outer_nodes // quad.order), quad.order)
    u_nodes, u_weights = u_nodes.ravel(), u_weights.ravel()
    F = np.zeros(x.size, complex)
    for u, wu in zip(u_nodes, u_weights):
        tau1 = t - u
        if tau1 <= s_min:
            continue
        G = spline(tau1)
        K, sing = kernel_on_grid(p, x[:, None], x1[None, :], u)
        if np.any(sing):
            drop = sing
            excised_nodes += int(drop.sum())
            K = np.where(drop, 0.0, K)
        F += wu * (K * (G * wx1)[None, :]).sum(axis=1)

    cutoff = float(2.0 * s_min * np.max(np.abs(g_first)) * t) if g_first is not None else 0.0
    if excised_nodes:
        warnings.warn(GuardBandExcluded(f"{excised_nodes} quadrature nodes inside caustic guard band "
                                        f"(half-width {quad.guard:g}); excised |Q| weight {excised_weight:.3g}"),
                      stacklevel=2)
    return FirstOrderResult(x=x, value=F, max_residual=max_res, excised_nodes=excised_nodes,
                            excised_weight=excised_weight, cutoff_estimate=cutoff, excised_samples=samples)


def firstbound_envelope(D: float, C: float, t: float, phi_norm: float) -> float:
    """D C^2 t^2 / 2 * sup ||phi||: the envelope for ||K_scl Q phi|| at time t."""
    return D * C * C * t * t / 2.0 * phi_norm
