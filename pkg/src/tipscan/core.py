"""Map systems, parameter shifts, and evaluation primitives.

A nonautonomous map ``x_{n+1} = f(x_n, L(r*n))`` is assembled from two
pieces: a :class:`MapSystem` holding the autonomous rule ``f(x, lam)``
and a :class:`ParameterShift` holding the drifting parameter curve
``L(s)`` with its asymptotic values.  Everything here is immutable and
pure, so values can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable

import numpy as np

from .errors import NumericalOverflow, UnsupportedDimension

Array = np.ndarray

#: default shift time beyond which built-in shifts are clamped to their limits
DEFAULT_SATURATION = 20.0

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


def _vec(v, name: str = "vector") -> Array:
    out = np.atleast_1d(np.asarray(v, dtype=float))
    if out.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class MapSystem:
    """Autonomous rule ``f(state, params)`` with dimension metadata.

    Parameters
    ----------
    dimension : int
        State dimension.
    evaluator : callable
        Pure function ``(state, params) -> state``.  Built-in systems
        broadcast over leading axes of ``state``, which batch consumers
        (basin grids, washout probes) rely on for speed.
    jacobian : callable, optional
        Analytic state Jacobian ``(state, params) -> (dimension, dimension)``.
        When absent, central finite differences are used.
    name : str
        Identifier used in reports and file headers.
    """

    dimension: int
    evaluator: Callable[[Array, Array], Array]
    jacobian: Callable[[Array, Array], Array] | None = None
    name: str = "map"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    def apply(self, x: Array, lam: Array) -> Array:
        """Evaluate the rule, normalizing to a float64 array."""
        y = np.asarray(self.evaluator(np.asarray(x, dtype=float),
                                      np.asarray(lam, dtype=float)), dtype=float)
        return y

    def validate_jacobian(self, probes: Array, lam: Array, rtol: float = 1e-5) -> float:
        """Worst relative disagreement between analytic and finite-difference
        Jacobians over ``probes`` (rows are states).  Raises if above ``rtol``."""
        if self.jacobian is None:
            raise ValueError(f"system {self.name!r} has no analytic jacobian")
        worst = 0.0
        for x in np.atleast_2d(np.asarray(probes, dtype=float)):
            a = np.asarray(self.jacobian(x, np.asarray(lam, dtype=float)), dtype=float)
            fd = _fd_jacobian(self, x, lam)
            scale = max(1.0, float(np.max(np.abs(a))))
            worst = max(worst, float(np.max(np.abs(a - fd))) / scale)
        if worst > rtol:
            raise ValueError(
                f"analytic jacobian of {self.name!r} deviates from finite "
                f"differences by relative {worst:.3e} > {rtol:.1e}")
        return worst


@dataclass(frozen=True)
class ParameterShift:
    """Parameter curve ``L(s)`` interpolating between two limits.

    ``value(s)`` returns exactly ``limit_minus`` for ``s <= -saturation_s``
    and exactly ``limit_plus`` for ``s >= saturation_s``.  The clamp keeps
    far-field evaluations finite (some raw curves overflow for large ``|s|``)
    and makes the asymptotic values available bit-exactly, which the
    pullback seeding protocol exploits.
    """

    value_fn: Callable[[float], Array]
    limit_minus: Array
    limit_plus: Array
    saturation_s: float = DEFAULT_SATURATION
    derivative_fn: Callable[[float], Array] | None = None
    name: str = "shift"

    def __post_init__(self):
        object.__setattr__(self, "limit_minus", _vec(self.limit_minus, "limit_minus"))
        object.__setattr__(self, "limit_plus", _vec(self.limit_plus, "limit_plus"))
        if self.limit_minus.shape != self.limit_plus.shape:
            raise ValueError("limit_minus and limit_plus must have equal shape")
        if not self.saturation_s > 0:
            raise ValueError("saturation_s must be positive")

    @property
    def m(self) -> int:
        """Parameter dimension."""
        return self.limit_minus.size

    def value(self, s: float) -> Array:
        """Shift value at time ``s``, clamped to the limits beyond saturation."""
        if s <= -self.saturation_s:
            return self.limit_minus.copy()
        if s >= self.saturation_s:
            return self.limit_plus.copy()
        return _vec(self.value_fn(float(s)), "shift value")

    def derivative(self, s: float, h: float = 1e-6) -> Array:
        """dL/ds at ``s``; analytic if supplied, else central differences.

        Exactly zero in the clamped region, consistent with ``value``.
        """
        if abs(s) >= self.saturation_s:
            return np.zeros(self.m)
        if self.derivative_fn is not None:
            return _vec(self.derivative_fn(float(s)), "shift derivative")
        return (self.value(s + h) - self.value(s - h)) / (2.0 * h)


def constant_shift(lam, name: str = "constant") -> ParameterShift:
    """Degenerate shift with ``limit_minus == limit_plus == lam``."""
    lam = _vec(lam, "lam")
    return ParameterShift(value_fn=lambda s: lam.copy(), limit_minus=lam,
                          limit_plus=lam, name=name)


@dataclass(frozen=True)
class RateConfig:
    """Rate and index window for a nonautonomous run."""

    r: float
    n_min: int
    n_max: int

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("rate r must be positive")
        if not (self.n_min < 0 < self.n_max):
            raise ValueError("index window must satisfy n_min < 0 < n_max")


def step(sys: MapSystem, shift: ParameterShift, r: float, n: int, x: Array) -> Array:
    """One step of the nonautonomous map: ``f(x, L(r*n))``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sys.dimension:
        raise ValueError(f"state dimension {x.shape[-1]} != system dimension {sys.dimension}")
    y = sys.apply(x, shift.value(r * n))
    if not np.all(np.isfinite(y)):
        raise NumericalOverflow(f"non-finite state after step at n={n}", index=n)
    return y


def evolve(sys: MapSystem, shift: ParameterShift, r: float,
           n0: int, n1: int, y: Array) -> Array:
    """Evolution operator: state at index ``n1`` of the orbit seeded with
    ``y`` at index ``n0``.  ``y`` may carry leading batch axes."""
    if n1 < n0:
        raise ValueError("n1 must be >= n0")
    x = np.asarray(y, dtype=float)
    for n in range(n0, n1):
        x = sys.apply(x, shift.value(r * n))
        if not np.all(np.isfinite(x)):
            raise NumericalOverflow(f"non-finite state after step at n={n}", index=n)
    return x


def _fd_jacobian(sys: MapSystem, x: Array, lam: Array) -> Array:
    x = np.asarray(x, dtype=float)
    ell = sys.dimension
    J = np.empty((ell, ell))
    for i in range(ell):
        h = _SQRT_EPS * max(1.0, abs(float(x[i])))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        J[:, i] = (sys.apply(xp, lam) - sys.apply(xm, lam)) / (2.0 * h)
    return J


def jacobian_at(sys: MapSystem, x: Array, lam: Array) -> Array:
    """State Jacobian of ``f`` at ``(x, lam)``.

    Uses the analytic jacobian when available, otherwise central
    differences with per-coordinate step ``sqrt(eps) * max(1, |x_i|)``.
    """
    x = _vec(x, "state")
    if x.size != sys.dimension:
        raise ValueError(f"state dimension {x.size} != system dimension {sys.dimension}")
    if sys.jacobian is not None:
        J = np.asarray(sys.jacobian(x, np.asarray(lam, dtype=float)), dtype=float)
        J = J.reshape(sys.dimension, sys.dimension)
    else:
        J = _fd_jacobian(sys, x, lam)
    if not np.all(np.isfinite(J)):
        raise NumericalOverflow("non-finite jacobian entries")
    return J


def eigenvalues_small(A: Array) -> Array:
    """Eigenvalues of a square matrix of dimension <= 3, via the
    characteristic polynomial.  Returns a complex array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    if n == 1:
        return A[0, 0] + 0j * np.ones(1)
    if n == 2:
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = complex(tr * tr / 4.0 - det)
        root = np.sqrt(disc)
        return np.array([tr / 2.0 + root, tr / 2.0 - root])
    if n == 3:
        c2 = -float(np.trace(A))
        c1 = 0.5 * (np.trace(A) ** 2 - np.trace(A @ A))
        c0 = -float(np.linalg.det(A))
        return np.roots([1.0, c2, c1, c0]).astype(complex)
    raise UnsupportedDimension(
        f"eigenvalues supported for dimension <= 3, got {n}")


def spectral_radius(A: Array) -> float:
    """Largest eigenvalue modulus of a square matrix of dimension <= 3."""
    return float(np.max(np.abs(eigenvalues_small(A))))


def saturated_n_max(shift: ParameterShift, r: float,
                    tail_window: int = 50) -> int:
    """Default forward horizon: past saturation plus a generous settle-and-
    classify tail (at least ``r * n_max >= 3 * saturation_s``)."""
    n_sat = ceil(shift.saturation_s / r)
    return n_sat + max(2 * tail_window, 2 * n_sat)
