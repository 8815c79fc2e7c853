"""Vectorised root finders for the crossing-time equations.

Two equations need solving:

* the quadratic wall's sine-line equation ``rho sin(W) + W - T = 0`` on
  ``(0, pi)`` (types C and D);
* the linear wall's cubic in the crossing time (types C and D).

Everything here broadcasts over numpy arrays so the grid evaluators can
solve many boundary problems at once; scalars go through the same code.
"""
from __future__ import annotations

import numpy as np

TANGENCY_TOL = 1e-9


def sine_line(w, rho, T):
    return rho * np.sin(w) + w - T


def sine_line_prime(w, rho):
    return rho * np.cos(w) + 1.0


def sine_line_complement(rho, T, root, steps=3):
    """T - root for a root of rho sin(w) + w = T, polished by Newton in u = T - w.

    sin(T - u) is expanded as sin T cos u - cos T sin u, so a short
    complement keeps its relative digits instead of inheriting the absolute
    rounding of a root near T.
    """
    sT, cT = np.sin(T), np.cos(T)
    u = T - root
    with np.errstate(all="ignore"):
        for _ in range(steps):
            g = rho * (sT * np.cos(u) - cT * np.sin(u)) - u
            gp = -rho * (sT * np.sin(u) + cT * np.cos(u)) - 1.0
            u = u - g / gp
    return u


def tangency_time(rho):
    """T*(rho) = sqrt(rho^2 - 1) + arccos(-1/rho); NaN for rho < 1."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(rho >= 1.0, np.sqrt(np.maximum(rho * rho - 1.0, 0.0))
                       + np.arccos(-1.0 / np.where(rho >= 1.0, rho, 1.0)), np.nan)
    return float(out) if out.ndim == 0 else out


def expected_sine_root_count(rho, T, tol=TANGENCY_TOL):
    """Number of roots on (0, pi) predicted from (rho, T) alone.

    T < pi gives one root; for rho >= 1, pi <= T < T* gives two, T = T*
    one and T > T* none.  For rho < 1 there are none once T >= pi.
    """
    rho, T = np.broadcast_arrays(np.asarray(rho, float), np.asarray(T, float))
    Ts = tangency_time(rho)
    n = np.zeros(rho.shape, dtype=int)
    n = np.where((T > 0) & (T < np.pi), 1, n)
    big = (rho >= 1.0) & (T >= np.pi)
    n = np.where(big & (T < Ts - tol), 2, n)
    n = np.where(big & (np.abs(T - Ts) <= tol), 1, n)
    return int(n) if n.ndim == 0 else n


def _safe_newton(rho, T, lo, hi, active, tol=1e-14, max_iter=100, start=None):
    """Newton steps kept inside a shrinking bracket, bisecting when Newton misbehaves.

    The bracket [lo, hi] must have f(lo), f(hi) of opposite sign.  Converges
    quadratically away from tangency and at worst like bisection next to it.
    Only unconverged entries are iterated.
    """
    out = np.full(rho.shape, np.nan)
    idx = np.nonzero(active)[0]
    rho, T, lo, hi = rho[idx], T[idx], lo[idx].astype(float), hi[idx].astype(float)
    slo = np.sign(sine_line(lo, rho, T))
    w = 0.5 * (lo + hi) if start is None else start[idx]
    for _ in range(max_iter):
        if idx.size == 0:
            break
        fw = sine_line(w, rho, T)
        same = np.sign(fw) == slo
        lo = np.where(same, w, lo)
        hi = np.where(same, hi, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = w - fw / sine_line_prime(w, rho)
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        new = np.where(bad, 0.5 * (lo + hi), cand)
        # relative tolerance: for rho >> 1 the rising root is tiny and must keep its digits
        done = (np.abs(new - w) <= tol * np.abs(w)) | (fw == 0) | (hi - lo <= tol * np.abs(w))
        out[idx[done]] = w[done]
        keep = ~done
        idx, rho, T, lo, hi, slo, w = idx[keep], rho[keep], T[keep], lo[keep], hi[keep], slo[keep], new[keep]
    out[idx] = w
    return out


def sine_line_roots(rho, T, tol=TANGENCY_TOL):
    """Roots of ``rho sin(W) + W - T`` in the open interval (0, pi).

    Brackets are split at the critical point arccos(-1/rho) (when rho > 1)
    and each is solved by bracket-safeguarded Newton iteration.

    Returns
    -------
    rising, falling : ndarray
        Root on the increasing branch (f' > 0) and on the decreasing branch
        (f' < 0); NaN where absent.  At tangency |T - T*| <= tol the single
        root is reported in ``rising`` and sits at the critical point.
    """
    rho, T = np.broadcast_arrays(np.asarray(rho, float), np.asarray(T, float))
    shape = rho.shape
    rho = rho.ravel()
    T = T.ravel()
    rising = np.full(rho.shape, np.nan)
    falling = np.full(rho.shape, np.nan)

    steep = rho > 1.0
    wc = np.where(steep, np.arccos(-1.0 / np.where(steep, rho, 2.0)), np.pi)
    Ts = np.where(steep, tangency_time(np.where(steep, rho, 1.0)), np.pi)
    tangent = steep & (T >= np.pi) & (np.abs(T - Ts) <= tol)
    has_rise = (T > 0) & (((~steep) & (T < np.pi)) | (steep & (T < Ts - tol)))
    has_fall = steep & (T > np.pi) & (T < Ts - tol)

    if np.any(has_rise):
        # sin(w) <= w puts T/(1 + rho) at or left of the rising root, and f is
        # concave there, so Newton from it climbs monotonically (tiny roots
        # for rho >> 1 included)
        with np.errstate(divide="ignore", invalid="ignore"):
            start = np.clip(T / (1.0 + rho), 0.0, wc)
        r = _safe_newton(rho, T, np.zeros_like(rho), wc, has_rise, start=start)
        rising = np.where(has_rise, r, rising)
    if np.any(has_fall):
        r = _safe_newton(rho, T, wc, np.full_like(rho, np.pi), has_fall)
        falling = np.where(has_fall, r, falling)
    rising = np.where(tangent, wc, rising)
    return rising.reshape(shape), falling.reshape(shape)


# -- cubic -------------------------------------------------------------------

def cubic_aux(a2, a1, a0):
    """Auxiliary quantities Q, R and discriminant D = R^2 + Q^3 of a monic cubic."""
    a2, a1, a0 = (np.asarray(a, dtype=float) for a in (a2, a1, a0))
    Q = (3.0 * a1 - a2 * a2) / 9.0
    R = (9.0 * a2 * a1 - 27.0 * a0 - 2.0 * a2 ** 3) / 54.0
    return Q, R, R * R + Q ** 3


def _cubic_eval(z, a2, a1, a0):
    return ((z + a2) * z + a1) * z + a0


def _cubic_polish(z, a2, a1, a0, steps=3):
    for _ in range(steps):
        fz = _cubic_eval(z, a2, a1, a0)
        d = (3.0 * z + 2.0 * a2) * z + a1
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = z - fz / d
        ok = np.isfinite(cand) & (np.abs(_cubic_eval(cand, a2, a1, a0)) <= np.abs(fz))
        z = np.where(ok, cand, z)
    return z


def solve_monic_cubic(a2, a1, a0, eps=1e-14):
    """Real roots of ``z^3 + a2 z^2 + a1 z + a0``.

    Uses the Cardano form when the discriminant is clearly positive (one real
    root) and the trigonometric (Viete) form otherwise, then Newton-polishes.

    Returns
    -------
    roots : ndarray, shape (..., 3)
        Real roots in ascending order, NaN-padded when only one is real.
    disc : ndarray
        The discriminant R^2 + Q^3.
    """
    a2, a1, a0 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (a2, a1, a0)))
    _, _, D_out = cubic_aux(a2, a1, a0)
    # solve for u = z / s with O(1) coefficients so Q^3 and R^2 cannot under- or overflow
    s = np.maximum.reduce([np.abs(a2), np.sqrt(np.abs(a1)), np.cbrt(np.abs(a0))])
    s = np.where(s > 0, s, 1.0)
    a2, a1, a0 = a2 / s, a1 / s / s, a0 / s / s / s
    Q, R, D = cubic_aux(a2, a1, a0)
    shift = -a2 / 3.0
    scale = np.maximum(R * R, np.abs(Q) ** 3)
    one_real = D > eps * scale

    # Cardano: S1 = cbrt(R + sgn(R) sqrt(D)) avoids cancellation, S1*S2 = -Q
    sq = np.sqrt(np.where(one_real, D, 0.0))
    sgn = np.where(R >= 0, 1.0, -1.0)
    s1 = np.cbrt(R + sgn * sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.where(s1 != 0, -Q / s1, 0.0)
    cardano = shift + s1 + s2

    # Viete
    mq = np.maximum(-Q, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_arg = np.where(mq > 0, R / np.sqrt(mq ** 3), 1.0)
    theta = np.arccos(np.clip(cos_arg, -1.0, 1.0))
    amp = 2.0 * np.sqrt(mq)
    viete = np.stack([shift + amp * np.cos((theta + 2.0 * np.pi * j) / 3.0) for j in range(3)], axis=-1)

    roots = np.where(one_real[..., None],
                     np.stack([cardano, np.full_like(cardano, np.nan), np.full_like(cardano, np.nan)], axis=-1),
                     viete)
    roots = _cubic_polish(roots, a2[..., None], a1[..., None], a0[..., None]) * s[..., None]
    roots = np.sort(roots, axis=-1)  # NaN sorts last
    return roots, D_out
