"""Caustic loci in two-dimensional slices of (x, y, t) by sign-change contouring.

Each path family that can fold has a continuous indicator field whose zero
set contains its caustic:

=========  ===================================  ==============================
family     quadratic wall                       linear wall
=========  ===================================  ==============================
C          omega t - T*(-y/x)                   discriminant R^2 + Q^3 of the
                                                crossing-time cubic
D          omega t - T*(-x/y)                   same, for the exit-time cubic
E          omega t - pi                         k t^2 + 4 (x + y)
=========  ===================================  ==============================

A zero of the indicator is only a caustic if the number of paths in that
family changes across it (the cubic discriminant also vanishes where two
unphysical roots merge), so a crossing is reported only on grid edges where
both the indicator changes sign and the family's path count changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .domain import PathType, Potential
from .families import terms_on_grid
from .roots import cubic_aux, tangency_time

AXES = ("x", "y", "t")


@dataclass(frozen=True)
class CausticPoint:
    family: str
    first: float
    second: float


def indicator_fields(p: Potential, x, y, t) -> Dict[str, np.ndarray]:
    """Indicator field per family (NaN outside the family's region)."""
    x, y, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, t)))
    nan = np.full(x.shape, np.nan)
    with np.errstate(all="ignore"):
        if p.is_quadratic:
            w = p.omega
            mC = (x > 0) & (y < 0)
            mD = (y > 0) & (x < 0)
            fC = np.where(mC, w * t - tangency_time(np.where(mC, -y / np.where(mC, x, 1.0), 0.0)), nan)
            fD = np.where(mD, w * t - tangency_time(np.where(mD, -x / np.where(mD, y, 1.0), 0.0)), nan)
            fE = np.where((x <= 0) & (y <= 0), w * t - math.pi, nan)
        else:
            k = p.k
            mC = (x > 0) & (y < 0)
            mD = (y > 0) & (x < 0)
            _, _, DC = cubic_aux(-2.0 * t, (x - y) / k + t * t, y * t / k)
            _, _, DD = cubic_aux(-t, -(x - y) / k, -y * t / k)
            fC = np.where(mC, DC, nan)
            fD = np.where(mD, DD, nan)
            fE = np.where((x <= 0) & (y <= 0), k * t * t + 4.0 * (x + y), nan)
    return {"C": fC, "D": fD, "E": fE}


def family_counts(p: Potential, x, y, t) -> Dict[str, np.ndarray]:
    """Number of classical paths of type C, D and E at each node."""
    fams = terms_on_grid(p, x, y, t)
    shape = fams[0].mask.shape
    out = {}
    for name, kind in (("C", PathType.C), ("D", PathType.D), ("E", PathType.E)):
        out[name] = sum((f.mask.astype(int) for f in fams if f.path_type is kind), np.zeros(shape, int))
    return out


def trace_slice(p: Potential, axes: Sequence[str], first: Sequence[float], second: Sequence[float],
                fixed: float) -> List[CausticPoint]:
    """Caustic crossings on the tensor grid ``first`` x ``second``.

    ``axes`` names the two varying coordinates (two of "x", "y", "t"); the
    third is held at ``fixed``.  Crossings are located by linear
    interpolation of the indicator along grid edges and returned sorted.
    """
    a, b = axes
    if a == b or a not in AXES or b not in AXES:
        raise ValueError(f"axes must be two distinct names from {AXES}, got {axes}")
    (c,) = [n for n in AXES if n not in axes]
    A, B = np.meshgrid(np.asarray(first, float), np.asarray(second, float), indexing="ij")
    coords = {a: A, b: B, c: np.full(A.shape, float(fixed))}
    if c == "t" and not fixed > 0:
        raise ValueError("the fixed time must be positive")
    if np.any(coords["t"] <= 0):
        raise ValueError("time axis must be positive")
    fields = indicator_fields(p, coords["x"], coords["y"], coords["t"])
    counts = family_counts(p, coords["x"], coords["y"], coords["t"])
    out: List[CausticPoint] = []
    for name in ("C", "D", "E"):
        f, n = fields[name], counts[name]
        for axis in (0, 1):
            sl0 = [slice(None), slice(None)]
            sl1 = [slice(None), slice(None)]
            sl0[axis] = slice(None, -1)
            sl1[axis] = slice(1, None)
            f0, f1 = f[tuple(sl0)], f[tuple(sl1)]
            hit = (np.isfinite(f0) & np.isfinite(f1) & (np.sign(f0) != np.sign(f1))
                   & (n[tuple(sl0)] != n[tuple(sl1)]))
            if not np.any(hit):
                continue
            A0, A1 = A[tuple(sl0)][hit], A[tuple(sl1)][hit]
            B0, B1 = B[tuple(sl0)][hit], B[tuple(sl1)][hit]
            s = _bisect_edges(p, name, (a, b, c), fixed, A0, A1, B0, B1, f0[hit])
            pa = A0 + s * (A1 - A0)
            pb = B0 + s * (B1 - B0)
            out.extend(CausticPoint(name, float(u), float(v)) for u, v in zip(pa, pb))
    out.sort(key=lambda q: (q.family, q.first, q.second))
    return out


def _bisect_edges(p, name, names, fixed, A0, A1, B0, B1, f0, iters=60):
    """Fraction along each edge where the indicator changes sign."""
    lo = np.zeros(A0.shape)
    hi = np.ones(A0.shape)
    a, b, c = names
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        coords = {a: A0 + mid * (A1 - A0), b: B0 + mid * (B1 - B0), c: np.full(mid.shape, float(fixed))}
        fm = indicator_fields(p, coords["x"], coords["y"], coords["t"])[name]
        same = np.sign(fm) == np.sign(f0)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)
