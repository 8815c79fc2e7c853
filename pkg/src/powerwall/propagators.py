"""Exact reference kernels and the semiclassical sum over classical paths.

All kernels use hbar = 1, m = 1/2, so the free kernel is
``(4 pi i t)^(-1/2) exp(i (x - y)^2 / 4t)`` with ``i^(1/2) = exp(i pi/4)``.
"""
from __future__ import annotations

import numpy as np

from . import families
from .classical_paths import enumerate_paths
from .domain import BoundaryProblem, CausticSingular, NoPath, PathType, Potential, PropagatorValue
from .scl_terms import scl_term

_ROOT_MINUS_I = np.exp(-0.25j * np.pi)


def _scalar(v):
    return complex(v) if np.ndim(v) == 0 else v


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("elapsed time must be positive")


def k_free(x, y, t):
    """Free kernel, elementwise."""
    _check_t(t)
    x, y, t = (np.asarray(a, dtype=float) for a in (x, y, t))
    return _scalar(_ROOT_MINUS_I / np.sqrt(4.0 * np.pi * t) * np.exp(0.25j * (x - y) ** 2 / t))


def k_harmonic(x, y, t, omega):
    """Oscillator kernel for V = omega^2 x^2 / 4 on the whole line.

    Past each half period the kernel picks up a factor -i, so for
    n pi < omega t < (n+1) pi it is
    ``sqrt(omega / (4 pi |sin omega t|)) exp(-i pi/4) (-i)^n exp(iS)``.
    """
    _check_t(t)
    x, y, t = (np.asarray(a, dtype=float) for a in (x, y, t))
    wt = omega * t
    n = np.floor(wt / np.pi)
    s = np.sin(wt)
    if np.any(np.isclose(wt / np.pi, np.round(wt / np.pi), rtol=0.0, atol=1e-13)):
        raise ZeroDivisionError("oscillator kernel is singular at omega t = n pi")
    S = omega * ((x * x + y * y) * np.cos(wt) - 2.0 * x * y) / (4.0 * s)
    amp = np.sqrt(omega / (4.0 * np.pi * np.abs(s)))
    return _scalar(amp * _ROOT_MINUS_I * (-1j) ** (n % 4) * np.exp(1j * S))


def k_linear(x, y, t, k):
    """Kernel for V = k x on the whole line."""
    _check_t(t)
    x, y, t = (np.asarray(a, dtype=float) for a in (x, y, t))
    phase = 0.25 * (x - y) ** 2 / t - 0.5 * (x + y) * k * t - k * k * t ** 3 / 12.0
    return _scalar(_ROOT_MINUS_I / np.sqrt(4.0 * np.pi * t) * np.exp(1j * phase))


def k_scl(bp: BoundaryProblem, p: Potential) -> PropagatorValue:
    """Semiclassical kernel K(x, t; y, 0) summed over all classical paths.

    Raises
    ------
    CausticSingular
        If any contributing path sits on a caustic (including the special
        origin-to-origin oscillator family).
    """
    try:
        paths = enumerate_paths(bp, p)
    except NoPath:
        paths = []
    terms = []
    for path in paths:
        term = scl_term(path, p)
        if path.path_type is PathType.B_SPECIAL or term.singular:
            raise CausticSingular(f"type {path.path_type} path at {bp} is on a caustic")
        terms.append((path.path_type, term.contribution(), term))
    value = complex(sum(c for _, c, _ in terms)) if terms else 0j
    return PropagatorValue(value=value, terms=tuple(terms))


def k_scl_grid(p: Potential, x, y, t):
    """Vectorised K_scl; returns (values, singular) with NaN on singular nodes."""
    return families.kernel_on_grid(p, x, y, t)


def exact_reference(p: Potential, x, y, t):
    """Whole-line kernel of the wall-side branch (oscillator or linear)."""
    if p.is_quadratic:
        return k_harmonic(x, y, t, p.omega)
    return k_linear(x, y, t, p.k)


def scl_propagate(p: Potential, psi0, y, x, t: float, dy: float):
    """Apply K_scl(., t; ., 0) to samples ``psi0`` on nodes ``y`` by the rectangle rule.

    Returns ``(psi, n_singular)``.  Caustic nodes of the kernel are dropped
    from the sum and counted in ``n_singular``.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    K, singular = families.kernel_on_grid(p, x[:, None], y[None, :], t)
    psi = np.nan_to_num(K) @ np.asarray(psi0, dtype=complex) * dy
    return psi, int(np.count_nonzero(singular))
