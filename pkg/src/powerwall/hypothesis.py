"""Numerical checks of the two convergence hypotheses for the Neumann series.

(i)  sup |Delta A / A| is finite over a space-time window;
(ii) the fixed-time slices of K_scl are uniformly bounded on L^2.

(i) is probed by a grid scan followed by repeated local zooms around the
worst node: a smooth residual settles under refinement, a caustic pole
keeps growing.  (ii) is probed by the largest singular value of the
quadrature-weighted kernel matrix.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .domain import CausticSingular, Potential
from .families import kernel_on_grid, terms_on_grid

DIVERGENCE_RATIO = 4.0


@dataclass(frozen=True)
class Window:
    """Box of final points x, initial points y and elapsed times t."""

    x: Tuple[float, float]
    y: Tuple[float, float]
    t: Tuple[float, float]

    def __post_init__(self):
        for name in ("x", "y", "t"):
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"bad {name}-range {(lo, hi)}")
        if self.t[0] <= 0:
            raise ValueError("t-range must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(tuple(d["x"]), tuple(d["y"]), tuple(d["t"]))


@dataclass(frozen=True)
class GridSpec:
    """Base resolution per axis and the number of 2x zoom levels."""

    nx: int = 17
    ny: int = 17
    nt: int = 17
    levels: int = 6
    zoom_points: int = 9


@dataclass
class HypothesisReport:
    window: Window
    sup_residual: float = 0.0
    caustic_hits: List[tuple] = field(default_factory=list)
    opnorm_estimates: List[tuple] = field(default_factory=list)
    verdict_i: bool = True
    verdict_ii: Optional[bool] = None
    refinement_sups: List[float] = field(default_factory=list)
    argmax: Optional[tuple] = None
    denom_exponent: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = asdict(self.window)
        if not math.isfinite(self.sup_residual):
            d["sup_residual"] = "inf"
        return d


def _axis(lo, hi, n):
    return np.linspace(lo, hi, n) if hi > lo else np.array([lo])


def _residual_field(p, X, Y, T):
    """Worst |Delta A/A| over path families, its denominator, and singular flags."""
    fams = terms_on_grid(p, X, Y, T)
    worst = np.zeros(np.broadcast(X, Y, T).shape)
    denom = np.full(worst.shape, np.nan)
    singular = np.zeros(worst.shape, bool)
    for f in fams:
        r = np.abs(np.where(f.mask & ~f.singular, f.residual, 0.0))
        r = np.nan_to_num(r, nan=0.0)
        better = r > worst
        denom = np.where(better, f.denom, denom)
        worst = np.maximum(worst, r)
        singular |= f.mask & f.singular
    return worst, denom, singular


def scan_residual(p: Potential, window: Window, grid: GridSpec = GridSpec()) -> HypothesisReport:
    """Sup of |Delta A / A| over ``window`` with zoom refinement at the worst node.

    The level-0 grid is a tensor grid; each later level samples a box of
    +-2 previous spacings around the current argmax at half the spacing.
    The running sup is kept, so it never decreases with refinement.  The
    verdict is False if any node is on a caustic, or if the sup grows by
    more than 4x across two successive refinements while the caustic
    denominator along the zoom trail shrinks (fitted exponent below -1).
    """
    xs = _axis(*window.x, grid.nx)
    ys = _axis(*window.y, grid.ny)
    ts = _axis(*window.t, grid.nt)
    X, Y, T = np.meshgrid(xs, ys, ts, indexing="ij")
    worst, denom, singular = _residual_field(p, X, Y, T)
    report = HypothesisReport(window=window)
    hits = np.argwhere(singular)
    report.caustic_hits = [(float(X[tuple(i)]), float(Y[tuple(i)]), float(T[tuple(i)])) for i in hits]

    i = np.unravel_index(np.argmax(worst), worst.shape)
    best = worst[i]
    centre = np.array([X[i], Y[i], T[i]])
    trail = [(float(best), abs(float(denom[i])))]
    spacing = np.array([_step(window.x, grid.nx), _step(window.y, grid.ny), _step(window.t, grid.nt)])
    lows = np.array([window.x[0], window.y[0], window.t[0]])
    highs = np.array([window.x[1], window.y[1], window.t[1]])
    sups = [float(best)]
    for _ in range(grid.levels):
        half = 2.0 * spacing
        spacing = spacing / 2.0
        axes = [_axis(max(lows[j], centre[j] - half[j]), min(highs[j], centre[j] + half[j]), grid.zoom_points)
                for j in range(3)]
        Xz, Yz, Tz = np.meshgrid(*axes, indexing="ij")
        wz, dz, sz = _residual_field(p, Xz, Yz, Tz)
        for idx in np.argwhere(sz):
            report.caustic_hits.append((float(Xz[tuple(idx)]), float(Yz[tuple(idx)]), float(Tz[tuple(idx)])))
        j = np.unravel_index(np.argmax(wz), wz.shape)
        if wz[j] > best:
            best = wz[j]
            centre = np.array([Xz[j], Yz[j], Tz[j]])
            trail.append((float(best), abs(float(dz[j]))))
        sups.append(float(best))

    report.refinement_sups = sups
    report.argmax = tuple(float(c) for c in centre)
    growing = any(sups[k + 2] > DIVERGENCE_RATIO * sups[k] and sups[k] > 0 for k in range(len(sups) - 2))
    report.denom_exponent = _fit_exponent(trail)
    # steep but bounded growth (the residual near x = 0+ tends to a finite
    # limit) keeps the denominator fixed; only a shrinking one signals a pole
    diverging = growing and report.denom_exponent is not None and report.denom_exponent < -1.0
    report.sup_residual = float("inf") if (diverging or report.caustic_hits) else float(best)
    report.verdict_i = not (diverging or report.caustic_hits)
    return report


def _step(rng, n):
    return (rng[1] - rng[0]) / (n - 1) if n > 1 else 0.0


def _fit_exponent(trail, keep=3):
    """Slope of log|residual| against log|denom| over the last ``keep`` trail points.

    Only the points nearest the caustic are used, where the leading pole
    dominates the subleading ones.
    """
    pts = [(r, d) for r, d in trail if r > 0 and d > 0 and np.isfinite(d)][-keep:]
    if len(pts) < 2:
        return None
    r, d = np.log(np.array(pts)).T
    if np.ptp(d) < 0.3:
        return None
    return float(np.polyfit(d, r, 1)[0])


def estimate_opnorm(p: Optional[Potential], t: float, tau: float, domain: Sequence[float], n: int,
                    kernel: Optional[Callable] = None) -> float:
    """Largest singular value of the discretised kernel slice K(., t; ., tau).

    The matrix is ``sqrt(w_i) K(x_i, y_j) sqrt(w_j)`` with trapezoid weights
    on ``n`` nodes spanning ``domain``.  ``kernel(x, y, dt)`` overrides the
    semiclassical kernel of ``p``.
    """
    if not t > tau:
        raise ValueError("need t > tau")
    dt = t - tau
    nodes = np.linspace(domain[0], domain[1], n)
    w = np.full(n, (domain[1] - domain[0]) / (n - 1))
    w[0] = w[-1] = 0.5 * w[0]
    if kernel is None:
        K, singular = kernel_on_grid(p, nodes[:, None], nodes[None, :], dt)
        if np.any(singular):
            raise CausticSingular(f"{int(singular.sum())} kernel nodes on a caustic")
    else:
        K = kernel(nodes[:, None], nodes[None, :], dt)
    sw = np.sqrt(w)
    M = sw[:, None] * K * sw[None, :]
    return float(np.linalg.norm(M, 2))


def required_nodes(domain: Sequence[float], dt: float, per_wavelength: float = 8.0) -> int:
    """Node count resolving the free phase (x - y)^2 / 4 dt across ``domain``."""
    L = domain[1] - domain[0]
    kmax = L / (2.0 * dt)
    return int(math.ceil(per_wavelength * kmax * L / (2.0 * math.pi))) + 1


def opnorm_scan(p: Potential, pairs: Sequence[Tuple[float, float]], domain, n: Optional[int] = None,
                report: Optional[HypothesisReport] = None, tol: float = 0.05):
    """Estimate the norm at each (t, tau); verdict (ii) holds if all stay below 1 + tol."""
    out = []
    for t, tau in pairs:
        nn = n or required_nodes(domain, t - tau)
        out.append((float(t), float(tau), estimate_opnorm(p, t, tau, domain, nn)))
    if report is not None:
        report.opnorm_estimates = out
        report.verdict_ii = all(v <= 1.0 + tol for _, _, v in out)
    return out
