"""Vectorised evaluation of every path family over arrays of boundary data.

The scalar API (``enumerate_paths`` then ``scl_term``) builds one object per
path.  Quadrature and grid scans need millions of kernel values, so this
module evaluates each path *family* (for example "the rising type C root")
directly on broadcast arrays of (x, y, t) and returns masked arrays.  The
routing of boundary cases matches :func:`powerwall.classical_paths.enumerate_paths`,
except that the one-parameter special family is represented by a single
always-singular entry.

Every physical crossing-time root in (0, t) yields an admissible trajectory
here: the in-wall segments are concave parabolas or sub-half-period sine
arcs joining points at or above the axis, so no sampling filter is needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import scl_terms as st
from .classical_paths import _HALF_PERIOD_TOL, ROOT_EDGE, quad_C_entry, quad_D_exit
from .domain import PathType, Potential, wkb_weight
from .roots import sine_line_roots, solve_monic_cubic


@dataclass(frozen=True)
class TermFamily:
    """One path family on a grid; entries outside ``mask`` are NaN."""

    name: str
    path_type: PathType
    mask: np.ndarray
    S: np.ndarray
    A2: np.ndarray
    residual: np.ndarray
    denom: np.ndarray
    singular: np.ndarray
    t1: Optional[np.ndarray] = None

    @property
    def maslov(self) -> np.ndarray:
        return (self.A2 < 0).astype(int)

    def contribution(self) -> np.ndarray:
        """Kernel term on the mask, 0 elsewhere and NaN on singular nodes."""
        ok = self.mask & ~self.singular
        S = np.where(ok, self.S, 0.0)
        A2 = np.where(ok, self.A2, 0.0)
        val = wkb_weight(A2, (A2 < 0).astype(int)) * np.exp(1j * S)
        val = np.where(ok, val, 0.0)
        return np.where(self.mask & self.singular, np.nan, val)


def _family(name, kind, mask, x, y, t, S, A2, res, denom, t1=None):
    mask = np.asarray(mask, bool)
    with np.errstate(all="ignore"):
        denom = np.where(mask, denom, np.nan)
        sing = mask & (np.abs(denom) < st.caustic_tolerance(x, y))
        ok = mask & ~sing

        def keep(a):
            return np.where(ok, np.broadcast_to(a, mask.shape), np.nan)

        return TermFamily(name, kind, mask, np.where(mask, np.broadcast_to(S, mask.shape), np.nan),
                          keep(A2), keep(res), denom, sing,
                          None if t1 is None else np.where(mask, t1, np.nan))


def _safe(a, mask, fill):
    return np.where(mask, a, fill)


def terms_on_grid(p: Potential, x, y, t) -> List[TermFamily]:
    """All path families for final points x, initial points y and times t (broadcast)."""
    x, y, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, t)))
    x, y, t = x.copy(), y.copy(), t.copy()
    if p.is_quadratic:
        return _quadratic(p.omega, x, y, t)
    return _linear(p.k, x, y, t)


def _free_family(x, y, t, exclude_origin):
    mask = (x <= 0) & (y <= 0) & ~exclude_origin
    zero = np.zeros_like(x)
    return _family("A", PathType.A, mask, x, y, t, st.action_free(x, y, t), st.a2_free(t), zero, t)


def _quadratic(w, x, y, t):
    out = []
    origin = (x == 0) & (y == 0)
    wt = w * t
    zero = np.zeros_like(x)
    special = origin & (np.abs(wt - np.pi) <= _HALF_PERIOD_TOL * np.pi)
    out.append(_free_family(x, y, t, origin & ((wt <= np.pi) | special)))
    nan = np.full(x.shape, np.nan)
    out.append(TermFamily("Bs", PathType.B_SPECIAL, special, np.where(special, 0.0, np.nan), nan, nan,
                          np.where(special, 0.0, np.nan), special))

    with np.errstate(all="ignore"):
        mB = (x >= 0) & (y >= 0) & (wt < np.pi) & ~special
        tB = _safe(t, mB, 1.0)
        out.append(_family("B", PathType.B, mB, x, y, t, st.action_quad_B(x, y, tB, w),
                           st.a2_quad_B(tB, w), zero, np.sin(w * tB) / w))

        lag = t - np.pi / w
        mE = (x <= 0) & (y <= 0) & (lag > 0) & (x + y < 0)
        tE = _safe(t, mE, 2.0 * np.pi / w)
        out.append(_family("E", PathType.E, mE, x, y, t, st.action_quad_E(x, y, tE, w),
                           st.a2_quad_E(tE, w), zero, tE - np.pi / w))

        mC = (y < 0) & (x > 0)
        rho = _safe(-y / x, mC, 0.5)
        rise, fall = sine_line_roots(rho, _safe(wt, mC, 1.0))
        for nm, Om in (("C+", rise), ("C-", fall)):
            m = mC & np.isfinite(Om)
            t1, _ = quad_C_entry(x, y, t, _safe(Om, m, 1.0), w)
            m = m & (t1 > 0)
            t1 = np.where(m, t1, 0.5 * t)
            out.append(_family(nm, PathType.C, m, x, y, t, st.action_quad_C(x, y, t, t1, w),
                               st.a2_quad_C(x, y, t, t1, w), st.residual_quad_C(x, y, t, t1, w),
                               st.denom_quad_C(x, y, t, t1, w), t1))

        mD = (y > 0) & (x < 0)
        rho = _safe(-x / y, mD, 0.5)
        rise, fall = sine_line_roots(rho, _safe(wt, mD, 1.0))
        for nm, Th in (("D+", rise), ("D-", fall)):
            m = mD & np.isfinite(Th)
            t1, _ = quad_D_exit(x, y, t, _safe(Th, m, 1.0), w)
            t1 = np.where(m, t1, 0.5 * t)
            out.append(_family(nm, PathType.D, m, x, y, t, st.action_quad_D(x, y, t, t1, w),
                               st.a2_quad_D(x, y, t, t1, w), st.residual_quad_D(x, y, t, t1, w),
                               st.denom_quad_D(x, y, t, t1, w), t1))
    return out


def _interval_roots(roots, t):
    edge = ROOT_EDGE * np.maximum(1.0, t)[..., None]
    ok = np.isfinite(roots) & (roots > edge) & (roots < t[..., None] - edge)
    return ok


def _linear(k, x, y, t):
    out = []
    origin = (x == 0) & (y == 0)
    zero = np.zeros_like(x)
    out.append(_free_family(x, y, t, origin))
    with np.errstate(all="ignore"):
        mB = (x >= 0) & (y >= 0)
        out.append(_family("B", PathType.B, mB, x, y, t, st.action_lin_B(x, y, t, k),
                           st.a2_free(t), zero, t))

        W = st.denom_lin_E(x, y, t, k)
        mE = (x <= 0) & (y <= 0) & (W >= 0) & (x + y < 0)
        for nm, br in (("E-slow", 1), ("E-fast", -1)):
            m = mE if br == 1 else mE & (W > 0)
            out.append(_family(nm, PathType.E, m, x, y, t, st.action_lin_E(x, y, t, k, br),
                               st.a2_lin_E(x, y, t, k, br), st.residual_lin_E(x, y, t, k), W))

        mC = (y < 0) & (x > 0)
        roots, _ = solve_monic_cubic(-2.0 * t, (x - y) / k + t * t, y * t / k)
        ok = _interval_roots(roots, t) & mC[..., None]
        for j in range(3):
            m = ok[..., j]
            t1 = _safe(roots[..., j], m, 0.5 * t)
            out.append(_family(f"C{j + 1}", PathType.C, m, x, y, t, st.action_lin_C(x, y, t, t1, k),
                               st.a2_lin_C(x, y, t, t1, k), st.residual_lin_C(x, y, t, t1, k),
                               st.denom_lin_C(x, y, t, t1, k), t1))

        mD = (y > 0) & (x < 0)
        roots, _ = solve_monic_cubic(-t, -(x - y) / k, -y * t / k)
        ok = _interval_roots(roots, t) & mD[..., None]
        for j in range(3):
            m = ok[..., j]
            t1 = _safe(roots[..., j], m, 0.5 * t)
            out.append(_family(f"D{j + 1}", PathType.D, m, x, y, t, st.action_lin_D(x, y, t, t1, k),
                               st.a2_lin_D(x, y, t, t1, k), st.residual_lin_D(x, y, t, t1, k),
                               st.denom_lin_D(x, y, t, t1, k), t1))
    return out


def kernel_on_grid(p: Potential, x, y, t):
    """Semiclassical kernel summed over families.

    Returns
    -------
    value : ndarray of complex
        Kernel values, NaN where some contributing path is on a caustic.
    singular : ndarray of bool
    """
    fams = terms_on_grid(p, x, y, t)
    total = sum(f.contribution() for f in fams)
    singular = np.logical_or.reduce([f.mask & f.singular for f in fams])
    return total, singular


def residual_kernel_on_grid(p: Potential, x, y, t):
    """Sum over families of (Delta A / A) times the kernel term, with the singular mask."""
    fams = terms_on_grid(p, x, y, t)
    total = 0.0
    for f in fams:
        ok = f.mask & ~f.singular
        total = total + np.where(ok, np.nan_to_num(f.residual) * np.nan_to_num(f.contribution()), 0.0)
    singular = np.logical_or.reduce([f.mask & f.singular for f in fams])
    return np.where(singular, np.nan, total), singular
