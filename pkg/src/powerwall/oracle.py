"""Brute-force checks that share no formulas with the closed forms.

* :func:`shoot` / :func:`shoot_many` integrate the equations of motion with
  RK4, locating wall crossings by bisection so the step never straddles the
  kink of the potential at x = 0.  The action is integrated alongside.
* :func:`pde_residual` applies the Schroedinger operator to any kernel with
  central differences.
* :func:`crank_nicolson` evolves a sampled wavefunction on a finite box and
  stands in for the (unknown) exact wall propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .domain import Potential, potential_eval

MAX_STEPS = 20_000_000
_EVENT_ITERS = 60
_MAX_CROSSINGS = 8


class StepOverflow(RuntimeError):
    """The requested time step would need more than ``MAX_STEPS`` steps."""


class BoxEdgeContamination(RuntimeError):
    """The wavefunction reached the edge of the Crank-Nicolson box."""


@dataclass(frozen=True)
class ShotBatch:
    """Results of :func:`shoot_many`; crossing slots beyond ``n_cross`` are NaN."""

    x_final: np.ndarray
    v_final: np.ndarray
    action: np.ndarray
    crossings: np.ndarray
    n_cross: np.ndarray
    energy_drift: np.ndarray


# -- shooting -----------------------------------------------------------------

def _rhs(p, q, v, inside):
    """Derivatives of (q, v, S) with the smooth force of the current region."""
    force = np.where(inside, -2.0 * p.inside_gradient(q), 0.0)
    lag = 0.25 * v * v - np.where(inside, p.inside(q), 0.0)
    return v, force, lag


def _rk4(p, q, v, S, inside, h):
    k1 = _rhs(p, q, v, inside)
    k2 = _rhs(p, q + 0.5 * h * k1[0], v + 0.5 * h * k1[1], inside)
    k3 = _rhs(p, q + 0.5 * h * k2[0], v + 0.5 * h * k2[1], inside)
    k4 = _rhs(p, q + h * k3[0], v + h * k3[1], inside)
    q1 = q + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    v1 = v + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    S1 = S + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return q1, v1, S1


def _region(q, v):
    return (q > 0) | ((q == 0) & (v > 0))


def _advance(p, q, v, S, inside, h, now, cross, ncross, idx, depth=0):
    """One step of length h with crossing detection.

    ``idx`` maps the local entries onto rows of the shared ``cross`` and
    ``ncross`` arrays, which are updated in place.
    """
    q1, v1, S1 = _rk4(p, q, v, S, inside, h)
    flipped = np.where(inside, q1 < 0, q1 > 0) & (h > 0)
    if not np.any(flipped) or depth > 4:
        return q1, v1, S1
    loc = np.nonzero(flipped)[0]
    qi, vi, Si, ini, hi = q[loc], v[loc], S[loc], inside[loc], h[loc]
    lo = np.zeros_like(hi)
    up = hi.copy()
    for _ in range(_EVENT_ITERS):
        mid = 0.5 * (lo + up)
        qm, _, _ = _rk4(p, qi, vi, Si, ini, mid)
        past = np.where(ini, qm < 0, qm > 0)
        up = np.where(past, mid, up)
        lo = np.where(past, lo, mid)
    hstar = 0.5 * (lo + up)
    _, vc, Sc = _rk4(p, qi, vi, Si, ini, hstar)
    rows = idx[loc]
    slot = np.minimum(ncross[rows], _MAX_CROSSINGS - 1)
    cross[rows, slot] = now[loc] + hstar
    ncross[rows] += 1
    q2, v2, S2 = _advance(p, np.zeros_like(vc), vc, Sc, vc > 0, hi - hstar, now[loc] + hstar,
                          cross, ncross, rows, depth + 1)
    q1, v1, S1 = q1.copy(), v1.copy(), S1.copy()
    q1[loc], v1[loc], S1[loc] = q2, v2, S2
    return q1, v1, S1


def _energy(p, q, v):
    return 0.25 * v * v + potential_eval(p, q)


def shoot_many(p: Potential, y, v0, t, dt: float, max_steps: int = MAX_STEPS) -> ShotBatch:
    """Integrate many trajectories at once from (y, v0) to time t (arrays broadcast).

    Each trajectory uses ``ceil(t/dt)`` equal steps.  Trajectories that
    finish early are frozen.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    y, v0, t = (a.ravel().astype(float) for a in np.broadcast_arrays(np.asarray(y, float),
                                                                      np.asarray(v0, float),
                                                                      np.asarray(t, float)))
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    nsteps = np.ceil(t / dt).astype(np.int64)
    nmax = int(nsteps.max(initial=0))
    if nmax > max_steps:
        raise StepOverflow(f"{nmax} steps requested, limit is {max_steps}")
    h_each = np.where(nsteps > 0, t / np.maximum(nsteps, 1), 0.0)
    q, v = y.copy(), v0.copy()
    S = np.zeros_like(q)
    e0 = _energy(p, q, v)
    inside = _region(q, v)
    cross = np.full((q.size, _MAX_CROSSINGS), np.nan)
    ncross = np.zeros(q.size, dtype=int)
    rows = np.arange(q.size)
    for step in range(nmax):
        active = step < nsteps
        h = np.where(active, h_each, 0.0)
        now = step * h_each
        q, v, S = _advance(p, q, v, S, inside, h, now, cross, ncross, rows)
        inside = np.where(q == 0, v > 0, q > 0)
    return ShotBatch(q, v, S, cross, ncross, np.abs(_energy(p, q, v) - e0) / np.maximum(np.abs(e0), 1e-300))


def shoot(p: Potential, y: float, v0: float, t: float, dt: float):
    """Single trajectory; returns (x_final, action, crossings)."""
    b = shoot_many(p, y, v0, t, dt)
    n = int(b.n_cross[0])
    return float(b.x_final[0]), float(b.action[0]), [float(c) for c in b.crossings[0, :min(n, _MAX_CROSSINGS)]]


# -- finite-difference Schroedinger residual ----------------------------------

def pde_residual(kernel: Callable, p: Optional[Potential], x, t, h: float, whole_line: bool = False):
    """[-d^2/dx^2 + V(x) - i d/dt] kernel at (x, t) by central differences.

    ``kernel`` is called as ``kernel(x, t)``; pass ``p=None`` for V = 0, or
    ``whole_line=True`` to use the wall-side branch of V on both sides.
    """
    x = np.asarray(x, dtype=float)
    f0 = kernel(x, t)
    d2 = (kernel(x + h, t) - 2.0 * f0 + kernel(x - h, t)) / (h * h)
    dt = (kernel(x, t + h) - kernel(x, t - h)) / (2.0 * h)
    if p is None:
        V = 0.0
    elif whole_line:
        V = p.inside(x)
    else:
        V = potential_eval(p, x)
    out = -d2 + V * f0 - 1j * dt
    return complex(out) if np.ndim(out) == 0 else out


# -- Crank-Nicolson -------------------------------------------------------------

def cn_grid(n: int, dx: float, x_min: Optional[float] = None) -> np.ndarray:
    """Uniform grid of n points spaced dx, centred on 0 unless ``x_min`` is given."""
    if x_min is None:
        x_min = -0.5 * (n - 1) * dx
    return x_min + dx * np.arange(n)


def crank_nicolson(p: Optional[Potential], psi0, t: float, dx: float, dt: float, *,
                   x_min: Optional[float] = None, scheme: str = "numerov",
                   whole_line: bool = False, edge_tol: float = 1e-6,
                   edge_fraction: float = 0.02, check_every: int = 50,
                   edge_ref: Optional[float] = None) -> np.ndarray:
    """Evolve ``psi0`` (sampled on :func:`cn_grid`) for time t under H = -d^2/dx^2 + V.

    Dirichlet walls sit at the box ends; the run raises
    :class:`BoxEdgeContamination` if |psi| in the outer ``edge_fraction`` of the
    box exceeds ``edge_tol`` times ``edge_ref`` (default max |psi0|; pass the
    initial peak when chaining runs).

    ``scheme="numerov"`` uses the compact fourth-order Laplacian
    M^{-1} Delta / dx^2 with M = (1, 10, 1)/12; ``"second"`` the plain
    three-point one.  Both give a Hermitian H, so each step is unitary.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    n = psi.size
    x = cn_grid(n, dx, x_min)
    if p is None:
        V = np.zeros(n)
    elif whole_line:
        V = np.asarray(p.inside(x), dtype=float)
    else:
        V = np.asarray(potential_eval(p, x), dtype=float)
    nsteps = max(1, int(math.ceil(t / dt)))
    if nsteps > MAX_STEPS:
        raise StepOverflow(f"{nsteps} steps requested")
    h = t / nsteps
    if scheme == "numerov":
        m_off, m_diag = 1.0 / 12.0, 10.0 / 12.0
    elif scheme == "second":
        m_off, m_diag = 0.0, 1.0
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    # M psi_t = -i (-Delta/dx^2 + M V) psi, M symmetric tridiagonal
    lap_off, lap_diag = -1.0 / dx ** 2, 2.0 / dx ** 2  # -Delta/dx^2
    a = 0.5j * h
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = m_off + a * (lap_off + m_off * V[1:])
    ab[1, :] = m_diag + a * (lap_diag + m_diag * V)
    ab[2, :-1] = m_off + a * (lap_off + m_off * V[:-1])
    up = m_off - a * (lap_off + m_off * V[1:])
    lo = m_off - a * (lap_off + m_off * V[:-1])
    diag = m_diag - a * (lap_diag + m_diag * V)

    ref = edge_ref if edge_ref is not None else (np.max(np.abs(psi)) or 1.0)
    ne = max(1, int(edge_fraction * n))

    def check():
        edge = max(np.max(np.abs(psi[:ne])), np.max(np.abs(psi[-ne:])))
        if edge > edge_tol * ref:
            raise BoxEdgeContamination(f"edge amplitude {edge:.3g} exceeds {edge_tol:g}")

    check()
    rhs = np.empty_like(psi)
    for step in range(nsteps):
        rhs[:] = diag * psi
        rhs[:-1] += up * psi[1:]
        rhs[1:] += lo * psi[:-1]
        psi = solve_banded((1, 1), ab, rhs, check_finite=False)
        if (step + 1) % check_every == 0:
            check()
    check()
    return psi


def l2_norm(psi, dx: float) -> float:
    return float(np.sqrt(np.sum(np.abs(psi) ** 2) * dx))
