"""Core value types for the power-wall semiclassical problem.

Units are fixed throughout the package: hbar = 1 and particle mass m = 1/2,
so the Schroedinger operator reads ``-d^2/dx^2 + V(x) - i d/dt`` and the
Lagrangian is ``qdot**2 / 4 - V(q)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

HBAR = 1.0
MASS = 0.5


class NoPath(ValueError):
    """No classical path of the requested type joins the two endpoints."""


class CausticSingular(ArithmeticError):
    """A closed form was evaluated on (or numerically at) a caustic."""


class PathType(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    B_SPECIAL = "BSpecial"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Potential:
    """Wall potential, zero for x < 0.

    Use :meth:`quadratic` (``V = omega**2 x**2 / 4``) or :meth:`linear`
    (``V = k x``) rather than the raw constructor.
    """

    kind: str
    omega: Optional[float] = None
    k: Optional[float] = None

    def __post_init__(self):
        if self.kind == "quadratic":
            if self.omega is None or not self.omega > 0:
                raise ValueError("quadratic wall needs omega > 0")
        elif self.kind == "linear":
            if self.k is None or not self.k > 0:
                raise ValueError("linear wall needs k > 0")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def quadratic(cls, omega: float) -> "Potential":
        return cls("quadratic", omega=float(omega))

    @classmethod
    def linear(cls, k: float) -> "Potential":
        return cls("linear", k=float(k))

    @property
    def is_quadratic(self) -> bool:
        return self.kind == "quadratic"

    @property
    def half_period(self) -> float:
        """pi/omega, the duration of every complete excursion into a quadratic wall."""
        if not self.is_quadratic:
            raise AttributeError("half_period is only defined for the quadratic wall")
        return math.pi / self.omega

    def __call__(self, x):
        return potential_eval(self, x)

    def inside(self, q):
        """Smooth continuation of the wall-side branch to all q."""
        q = np.asarray(q, dtype=float)
        if self.is_quadratic:
            return 0.25 * self.omega ** 2 * q ** 2
        return self.k * q

    def inside_gradient(self, q):
        q = np.asarray(q, dtype=float)
        if self.is_quadratic:
            return 0.5 * self.omega ** 2 * q
        return np.full_like(q, self.k)

    def gradient(self, q):
        """V'(q), taking the right limit at q = 0."""
        q = np.asarray(q, dtype=float)
        return np.where(q >= 0, self.inside_gradient(q), 0.0)

    def to_dict(self) -> dict:
        if self.is_quadratic:
            return {"kind": "quadratic", "omega": self.omega}
        return {"kind": "linear", "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "Potential":
        kind = d.get("kind")
        if kind == "quadratic":
            return cls.quadratic(d["omega"])
        if kind == "linear":
            return cls.linear(d["k"])
        raise ValueError(f"unknown potential kind {kind!r}")


def potential_eval(p: Potential, x):
    """Evaluate V(x); works elementwise on arrays and returns a float for scalars."""
    xa = np.asarray(x, dtype=float)
    v = np.where(xa >= 0, p.inside(np.maximum(xa, 0.0)), 0.0)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class BoundaryProblem:
    """Two-point problem q(0) = y, q(t) = x."""

    y: float
    x: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"elapsed time must be positive, got t={self.t}")

    @property
    def scale(self) -> float:
        return 1.0 + abs(self.x) + abs(self.y)

    def reversed(self) -> "BoundaryProblem":
        return BoundaryProblem(y=self.x, x=self.y, t=self.t)


@dataclass(frozen=True)
class ClassicalPath:
    """A solved trajectory from (y, 0) to (x, t).

    ``interior_coeffs`` holds the coefficients of the in-wall segment:

    ========== ===================== =========================================
    type       quadratic wall        linear wall
    ========== ===================== =========================================
    A          (velocity,)           (velocity,)
    B          (a, b): a cos + b sin (a, b): -k tau^2 + a tau + b
    C, E       (v,): entry speed     (a, c): -k tau^2 + a tau + c
    D          (a, b): a cos + b sin (a, b): -k tau^2 + a tau + b
    BSpecial   (v,)                  --
    ========== ===================== =========================================
    """

    path_type: PathType
    problem: BoundaryProblem
    potential: Optional[Potential]
    t1: Optional[float] = None
    t2: Optional[float] = None
    interior_coeffs: tuple = field(default=())

    # -- piecewise description -------------------------------------------------
    def _segments(self):
        """List of (start, end, position, velocity) callables covering [0, t]."""
        p, bp = self.potential, self.problem
        y, x, t = bp.y, bp.x, bp.t
        kind = self.path_type
        w = p.omega if p is not None else None
        k = p.k if p is not None else None

        def free(q0, v0, s0):
            return (lambda s: q0 + v0 * (s - s0), lambda s: v0 + 0.0 * s)

        def osc(amp_cos, amp_sin, s0):
            return (
                lambda s: amp_cos * np.cos(w * (s - s0)) + amp_sin * np.sin(w * (s - s0)),
                lambda s: w * (-amp_cos * np.sin(w * (s - s0)) + amp_sin * np.cos(w * (s - s0))),
            )

        def parab(a, c):
            return (lambda s: -k * s ** 2 + a * s + c, lambda s: -2.0 * k * s + a)

        if kind is PathType.A:
            return [(0.0, t) + free(y, self.interior_coeffs[0], 0.0)]
        if kind is PathType.B_SPECIAL:
            (v,) = self.interior_coeffs
            return [(0.0, t) + osc(0.0, v / w, 0.0)]
        if kind is PathType.B:
            a, b = self.interior_coeffs
            seg = osc(a, b, 0.0) if p.is_quadratic else parab(a, b)
            return [(0.0, t) + seg]
        if kind is PathType.C:
            t1 = self.t1
            if p.is_quadratic:
                (v,) = self.interior_coeffs
                inner = osc(0.0, v / w, t1)
            else:
                v = -y / t1
                inner = parab(*self.interior_coeffs)
            return [(0.0, t1) + free(y, v, 0.0), (t1, t) + inner]
        if kind is PathType.D:
            t1 = self.t1
            a, b = self.interior_coeffs
            inner = osc(a, b, 0.0) if p.is_quadratic else parab(a, b)
            # exit speed from the wall segment: x / (t - t1) cancels when the free leg is short
            vout = float(inner[1](t1))
            return [(0.0, t1) + inner, (t1, t) + free(0.0, vout, t1)]
        if kind is PathType.E:
            t1, t2 = self.t1, self.t2
            if p.is_quadratic:
                (v,) = self.interior_coeffs
                inner = osc(0.0, v / w, t1)
            else:
                a, c = self.interior_coeffs
                v = a - 2.0 * k * t1
                inner = parab(a, c)
            return [(0.0, t1) + free(y, v, 0.0), (t1, t2) + inner, (t2, t) + free(0.0, -v, t2)]
        raise AssertionError(kind)

    def _eval(self, tau, which):
        tau = np.asarray(tau, dtype=float)
        out = np.full(tau.shape, np.nan)
        segs = self._segments()
        for i, seg in enumerate(segs):
            lo, hi = seg[0], seg[1]
            last = i == len(segs) - 1
            mask = (tau >= lo) & ((tau <= hi) if last else (tau < hi))
            if np.any(mask):
                out[mask] = seg[2 + which](tau[mask])
        return float(out) if out.ndim == 0 else out

    def position(self, tau):
        """q(tau) for tau in [0, t]."""
        return self._eval(tau, 0)

    def velocity(self, tau):
        """qdot(tau) for tau in [0, t]."""
        return self._eval(tau, 1)

    __call__ = position

    @property
    def initial_velocity(self) -> float:
        return float(self.velocity(0.0))

    @property
    def final_velocity(self) -> float:
        return float(self.velocity(self.problem.t))

    @property
    def crossings(self) -> tuple:
        return tuple(c for c in (self.t1, self.t2) if c is not None)


@dataclass(frozen=True)
class SclTerm:
    """Semiclassical data for one path.

    ``A2`` is the signed Van Vleck quantity -d^2 S / dx dy.  ``residual`` is
    Delta A / A, or ``None`` when the path sits on a caustic.
    """

    path: ClassicalPath
    S: float
    A2: float
    maslov: int
    residual: Optional[float]
    denom: float

    @property
    def singular(self) -> bool:
        return self.residual is None

    def contribution(self) -> complex:
        """(2 pi i)^(-1/2) |A2|^(1/2) (-i)^maslov exp(iS)."""
        if self.singular:
            raise CausticSingular(f"type {self.path.path_type} path is on a caustic")
        return wkb_weight(self.A2, self.maslov) * complex(math.cos(self.S), math.sin(self.S))


def wkb_weight(A2, maslov):
    """Prefactor (2 pi i)^(-1/2) |A2|^(1/2) (-i)^maslov, elementwise."""
    phase = np.exp(-0.25j * np.pi) * (-1j) ** np.asarray(maslov)
    w = phase * np.sqrt(np.abs(A2) / (2.0 * np.pi))
    return complex(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class PropagatorValue:
    value: complex
    terms: Sequence = ()

    def __complex__(self) -> complex:
        return complex(self.value)

    def __abs__(self) -> float:
        return abs(self.value)
