"""Continuation of fixed-point branches along a parameter shift.

A path is a connected curve ``s -> X(s)`` of fixed points of the frozen
map ``f(., L(s))``, classified stable or unstable through the spectral
radius of the state Jacobian, including at the asymptotic limits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Array, MapSystem, ParameterShift, jacobian_at, spectral_radius
from .errors import BranchJump, NewtonDivergence

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 10
#: floor on the local slope estimate used for branch-jump detection
SLOPE_FLOOR = 1e-3


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Path:
    """Sampled fixed-point branch with stability classification.

    ``s`` and ``states`` hold the grid samples (rows of ``states`` are
    ``X(s_i)``), ``rho`` the spectral radii along the branch.  ``X_minus``
    and ``X_plus`` are genuine fixed points at the shift limits, solved
    directly rather than extrapolated.
    """

    s: Array
    states: Array
    rho: Array
    X_minus: Array
    X_plus: Array
    rho_minus: float
    rho_plus: float
    stability: Stability
    s_grid: tuple[float, float, float]

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    @property
    def amplitude(self) -> float:
        """Largest sample norm; used to scale tracking tolerances."""
        return float(np.max(np.linalg.norm(self.states, axis=1)))

    def interpolate(self, s: float) -> Array:
        """Linear interpolation of ``X(s)``, clamped to the limit points
        outside the sampled range."""
        if s <= self.s[0]:
            return self.X_minus.copy()
        if s >= self.s[-1]:
            return self.X_plus.copy()
        i = int(np.searchsorted(self.s, s)) - 1
        i = min(max(i, 0), len(self.s) - 2)
        w = (s - self.s[i]) / (self.s[i + 1] - self.s[i])
        return (1.0 - w) * self.states[i] + w * self.states[i + 1]


def newton_fixed_point(sys: MapSystem, lam: Array, x0: Array,
                       tol: float = NEWTON_TOL,
                       max_iter: int = NEWTON_MAX_ITER) -> Array:
    """Solve ``f(x, lam) = x`` by Newton iteration from ``x0``.

    Raises :class:`NewtonDivergence` when the residual fails to reach
    ``tol`` within ``max_iter`` iterations.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    eye = np.eye(sys.dimension)
    for _ in range(max_iter):
        fx = sys.apply(x, lam)
        res = fx - x
        if not np.all(np.isfinite(res)):
            break
        if float(np.linalg.norm(res)) <= tol:
            return x
        J = jacobian_at(sys, x, lam) - eye
        try:
            dx = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(dx)):
            break
        x = x + dx
    fx = sys.apply(x, lam)
    if np.all(np.isfinite(fx)) and float(np.linalg.norm(fx - x)) <= tol:
        return x
    raise NewtonDivergence("newton iteration for fixed point did not converge")


def _solve_with_refinement(sys: MapSystem, shift: ParameterShift,
                           s_from: float, x_from: Array, s_to: float,
                           tol: float, depth: int = 0) -> Array:
    """Newton at ``s_to`` seeded from ``x_from``; bisect the step in ``s``
    up to MAX_HALVINGS times when the direct solve fails."""
    try:
        return newton_fixed_point(sys, shift.value(s_to), x_from, tol=tol)
    except NewtonDivergence:
        if depth >= MAX_HALVINGS:
            raise NewtonDivergence(
                f"continuation stalled near s={s_to:.6g} after {MAX_HALVINGS} halvings",
                s=s_to)
        s_mid = 0.5 * (s_from + s_to)
        x_mid = _solve_with_refinement(sys, shift, s_from, x_from, s_mid, tol, depth + 1)
        return _solve_with_refinement(sys, shift, s_mid, x_mid, s_to, tol, depth + 1)


def _march(sys: MapSystem, shift: ParameterShift, s_values, x_seed: Array,
           tol: float) -> list[Array]:
    """Continue the branch over ``s_values`` (ordered away from the seed)."""
    out = []
    prev_s = None
    prev_x = x_seed
    slope = None
    for s in s_values:
        if prev_s is None:
            x = newton_fixed_point(sys, shift.value(s), prev_x, tol=tol)
        else:
            x = _solve_with_refinement(sys, shift, prev_s, prev_x, s, tol)
            ds = abs(s - prev_s)
            jump = float(np.linalg.norm(x - prev_x))
            if slope is not None:
                bound = 10.0 * ds * max(slope, SLOPE_FLOOR)
                if jump > bound:
                    raise BranchJump(
                        f"branch jump at s={s:.6g}: step {jump:.3e} exceeds bound {bound:.3e}")
            slope = jump / ds if ds > 0 else slope
        out.append(x)
        prev_s, prev_x = s, x
    return out


def continue_path(sys: MapSystem, shift: ParameterShift, seed_s: float,
                  seed_x: Array, s_range: tuple[float, float], ds: float,
                  newton_tol: float = NEWTON_TOL) -> Path:
    """Continue a fixed-point branch over a uniform grid in ``s``.

    The grid is anchored at ``seed_s`` and marched outward in both
    directions, each Newton solve seeded with the neighboring solution.
    Limits ``X_minus``/``X_plus`` are solved at the exact shift limits
    whenever the range reaches the saturated zone on that side; otherwise
    the end sample is used (partial branches).
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    s_min, s_max = float(s_range[0]), float(s_range[1])
    if not (s_min <= seed_s <= s_max):
        raise ValueError("seed_s must lie inside s_range")

    n_left = int(np.floor((seed_s - s_min) / ds + 1e-9))
    n_right = int(np.floor((s_max - seed_s) / ds + 1e-9))
    left = seed_s - ds * np.arange(1, n_left + 1)
    right = seed_s + ds * np.arange(1, n_right + 1)

    x_seed = newton_fixed_point(sys, shift.value(seed_s), seed_x, tol=newton_tol)
    xs_left = _march(sys, shift, left, x_seed, newton_tol)
    xs_right = _march(sys, shift, right, x_seed, newton_tol)

    s_all = np.concatenate([left[::-1], [seed_s], right])
    states = np.vstack([arr for arr in (list(reversed(xs_left)) + [x_seed] + xs_right)])
    rho = np.array([
        spectral_radius(jacobian_at(sys, states[i], shift.value(s_all[i])))
        for i in range(len(s_all))
    ])

    sat = shift.saturation_s
    if s_all[0] <= -sat:
        X_minus = newton_fixed_point(sys, shift.limit_minus, states[0], tol=newton_tol)
    else:
        X_minus = states[0].copy()
    if s_all[-1] >= sat:
        X_plus = newton_fixed_point(sys, shift.limit_plus, states[-1], tol=newton_tol)
    else:
        X_plus = states[-1].copy()
    rho_minus = spectral_radius(jacobian_at(sys, X_minus, shift.limit_minus))
    rho_plus = spectral_radius(jacobian_at(sys, X_plus, shift.limit_plus))

    stability = _classify(rho, rho_minus, rho_plus)
    return Path(s=s_all, states=states, rho=rho, X_minus=X_minus, X_plus=X_plus,
                rho_minus=rho_minus, rho_plus=rho_plus,
                stability=stability, s_grid=(s_min, s_max, ds))


def _classify(rho: Array, rho_minus: float, rho_plus: float) -> Stability:
    rhos = np.concatenate([rho, [rho_minus, rho_plus]])
    if np.all(rhos < 1.0):
        return Stability.STABLE
    if np.all(rhos > 1.0):
        return Stability.UNSTABLE
    return Stability.MIXED


def classify_stability(path: Path) -> Stability:
    """Stable iff the spectral radius is below 1 at every sample and at both
    limit points; unstable iff above 1 everywhere; mixed otherwise."""
    if path.s.size < 1:
        raise ValueError("path must contain at least one sample")
    return _classify(path.rho, path.rho_minus, path.rho_plus)


def path_point(sys: MapSystem, shift: ParameterShift, path: Path, s: float) -> Array:
    """Exact branch point ``X(s)``: Newton at ``L(s)`` seeded with the
    interpolated sample."""
    return newton_fixed_point(sys, shift.value(s), path.interpolate(s))


def path_to_csv(path: Path, fh, header_lines=()) -> None:
    """Write samples as CSV with columns ``s, X_1..X_l, rho``."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    cols = ["s"] + [f"X_{i + 1}" for i in range(path.dimension)] + ["rho"]
    fh.write(",".join(cols) + "\n")
    for i in range(len(path.s)):
        row = [repr(float(path.s[i]))]
        row += [repr(float(v)) for v in path.states[i]]
        row.append(repr(float(path.rho[i])))
        fh.write(",".join(row) + "\n")
