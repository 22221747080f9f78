"""Flows, time-1 maps, and flow-vs-map pullback comparison.

Discretizing a flow by unit-time sampling freezes the drifting parameter
across each whole step, while the flow sees it move continuously.  The
two resulting pullback attractors can behave very differently at the
same rate; :func:`compare_flow_map` puts the two verdicts side by side.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable

import numpy as np

from .core import Array, MapSystem, ParameterShift, jacobian_at, eigenvalues_small
from .errors import NewtonDivergence, NumericalOverflow, SeedNotWashingOut
from .paths import Path, newton_fixed_point
from .pullback import (ESCAPE_RADIUS, MAX_DOUBLINGS, PULLBACK_TOL,
                       SEED_PERTURBATION, PullbackOrbit, TrackingVerdict,
                       classify_tracking)

DEFAULT_ODE_STEP = 1e-2
ODE_TOL = 1e-7


@dataclass(frozen=True)
class VectorField:
    """Autonomous right-hand side ``dx/dt = f(x, lam)``."""

    dimension: int
    evaluator: Callable[[Array, Array], Array]
    name: str = "flow"

    def apply(self, x: Array, lam: Array) -> Array:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float),
                                         np.asarray(lam, dtype=float)), dtype=float)


def integrate(vf: VectorField, lam, x0: Array, t0: float, t1: float,
              h: float = DEFAULT_ODE_STEP) -> Array:
    """Classical fixed-step RK4 from ``t0`` to ``t1``.

    ``lam`` is either a parameter vector (frozen) or a callable
    ``t -> vector`` evaluated continuously at the stage times.  The final
    partial step is shortened to land exactly on ``t1``.  ``x0`` may
    carry leading batch axes.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    lam_fn = lam if callable(lam) else (lambda t, _v=np.asarray(lam, dtype=float): _v)
    x = np.asarray(x0, dtype=float).copy()
    n_full = int(ceil((t1 - t0) / h - 1e-12))
    t = t0
    for k in range(n_full):
        dt = min(h, t1 - t)
        k1 = vf.apply(x, lam_fn(t))
        k2 = vf.apply(x + 0.5 * dt * k1, lam_fn(t + 0.5 * dt))
        k3 = vf.apply(x + 0.5 * dt * k2, lam_fn(t + 0.5 * dt))
        k4 = vf.apply(x + dt * k3, lam_fn(t + dt))
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (k + 1) * h if k + 1 < n_full else t1
        if not np.all(np.isfinite(x)):
            raise NumericalOverflow(f"non-finite flow state at t={t:.6g}", index=t)
    return x


def time_one_map(vf: VectorField, h: float = DEFAULT_ODE_STEP) -> MapSystem:
    """Time-1 map of the flow with the parameter frozen per application.

    The returned system evaluates ``x -> Phi_lam(1, x)``; driving it with
    a shift keeps ``lam`` fixed across each unit interval, never sampled
    mid-step, which is exactly what distinguishes the discretized system
    from the flow.
    """

    def evaluator(x, lam):
        return integrate(vf, lam, x, 0.0, 1.0, h)

    return MapSystem(dimension=vf.dimension, evaluator=evaluator,
                     name=f"{vf.name}_time1")


def flow_jacobian(vf: VectorField, x: Array, lam: Array) -> Array:
    """Finite-difference Jacobian of the vector field."""
    probe = MapSystem(dimension=vf.dimension, evaluator=vf.evaluator,
                      name=f"{vf.name}_rhs")
    return jacobian_at(probe, x, lam)


def flow_equilibrium(vf: VectorField, lam: Array, x0: Array) -> Array:
    """Solve ``f(x, lam) = 0`` by Newton iteration from ``x0``."""
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    for _ in range(50):
        fx = vf.apply(x, lam)
        if float(np.linalg.norm(fx)) <= 1e-12:
            return x
        J = flow_jacobian(vf, x, lam)
        x = x + np.linalg.solve(J, -fx)
    fx = vf.apply(x, lam)
    if float(np.linalg.norm(fx)) <= 1e-12:
        return x
    raise NewtonDivergence("flow equilibrium Newton did not converge")


def _check_flow_path_stable(vf: VectorField, shift: ParameterShift,
                            X_minus: Array, n_samples: int = 9) -> None:
    """Spot-check that the equilibrium branch through X_minus has
    eigenvalues with negative real part at sampled shift times."""
    sat = shift.saturation_s
    x = np.atleast_1d(np.asarray(X_minus, dtype=float))
    for s in np.linspace(-sat, sat, n_samples):
        x = flow_equilibrium(vf, shift.value(s), x)
        eigs = eigenvalues_small(flow_jacobian(vf, x, shift.value(s)))
        if not np.all(eigs.real < 0):
            raise ValueError(
                f"flow path unstable at s={s:.6g}: eigenvalue real parts "
                f"{np.round(eigs.real, 6).tolist()}")


@dataclass(frozen=True)
class FlowOrbit:
    """Flow pullback orbit sampled at integer times.

    ``states[k]`` is the state at time ``t_start + k``; the integrator
    spec (method, step) is carried for step-halving verification.
    """

    r: float
    t_start: int
    t_max: int
    states: Array
    method: str
    h: float
    escaped_at: int | None
    n_conv: int
    washout_error: float
    depth_error: float

    @property
    def times(self) -> Array:
        return self.t_start + np.arange(len(self.states))

    @property
    def final_state(self) -> Array:
        return self.states[-1].copy()

    def as_pullback_orbit(self) -> PullbackOrbit:
        """View the integer-time samples as a discrete orbit so the
        tracking classifier can be reused unchanged."""
        return PullbackOrbit(r=self.r, n_start=self.t_start, n_max=self.t_max,
                             states=self.states, escaped_at=self.escaped_at,
                             n_conv=self.n_conv,
                             washout_error=self.washout_error,
                             depth_error=self.depth_error)


def _flow_run(vf: VectorField, shift: ParameterShift, r: float, t_start: int,
              t_max: int, x0: Array, h: float, escape_radius: float):
    lam_fn = lambda t: shift.value(r * t)  # noqa: E731 - tiny closure
    x = np.asarray(x0, dtype=float).copy()
    states = [x.copy()]
    for t in range(t_start, t_max):
        if float(np.linalg.norm(x)) > escape_radius:
            return np.vstack(states), t
        x = integrate(vf, lam_fn, x, float(t), float(t + 1), h)
        states.append(x.copy())
    if float(np.linalg.norm(x)) > escape_radius:
        return np.vstack(states), t_max
    return np.vstack(states), None


def flow_pullback(vf: VectorField, shift: ParameterShift, X_minus: Array,
                  r: float, t_max: int | None = None, *,
                  h: float = DEFAULT_ODE_STEP,
                  pullback_tol: float = PULLBACK_TOL,
                  perturbation: float = SEED_PERTURBATION,
                  max_doublings: int = MAX_DOUBLINGS,
                  escape_radius: float = ESCAPE_RADIUS,
                  protocol: str = "paired",
                  check_stability: bool = True) -> FlowOrbit:
    """Pullback orbit of the shift-driven flow, sampled at integer times.

    Uses the same two-seed washout and start-depth doubling protocol as
    the map pullback: start at a saturated time with ``x = X_minus``,
    integrate forward, and double the start depth until seed dependence
    has contracted below ``pullback_tol``.
    """
    if not r > 0:
        raise ValueError("rate r must be positive")
    if protocol not in ("paired", "single"):
        raise ValueError(f"unknown seed protocol {protocol!r}")
    X_minus = np.atleast_1d(np.asarray(X_minus, dtype=float))
    if check_stability:
        _check_flow_path_stable(vf, shift, X_minus)
    sat = shift.saturation_s
    if t_max is None:
        t_sat = ceil(sat / r)
        t_max = t_sat + max(100, 2 * t_sat)
    t0 = -max(1, ceil(sat / r))
    ell = X_minus.size
    pert = X_minus + perturbation * np.ones(ell) / np.sqrt(ell)

    from .pullback import _agreement_index  # shared protocol helper

    prev = None
    for d in range(max_doublings + 1):
        t_start = t0 * (2 ** d)
        a_states, esc_a = _flow_run(vf, shift, r, t_start, t_max, X_minus,
                                    h, escape_radius)
        if protocol == "paired":
            b_states, esc_b = _flow_run(vf, shift, r, t_start, t_max, pert,
                                        h, escape_radius)
            n_conv = _agreement_index(a_states, b_states, t_start,
                                      esc_a, esc_b, pullback_tol)
            if n_conv is None:
                prev = None
                continue
            k0 = n_conv - t_start
            k1 = min(len(a_states), len(b_states))
            washout_error = float(np.max(
                np.linalg.norm(a_states[k0:k1] - b_states[k0:k1], axis=1)))
        else:
            n_conv = t_start
            washout_error = float("nan")

        if prev is not None:
            p_states, p_esc, p_start = prev
            n_from = max(n_conv, p_start)
            off_a = n_from - t_start
            off_p = n_from - p_start
            k = min(len(a_states) - off_a, len(p_states) - off_p)
            same_escape = (esc_a is None) == (p_esc is None) and (
                esc_a is None or esc_a == p_esc)
            if k > 0 and same_escape:
                depth_error = float(np.max(np.linalg.norm(
                    a_states[off_a:off_a + k] - p_states[off_p:off_p + k], axis=1)))
                if depth_error < pullback_tol:
                    return FlowOrbit(r=r, t_start=t_start, t_max=t_max,
                                     states=a_states, method="rk4", h=h,
                                     escaped_at=esc_a, n_conv=n_conv,
                                     washout_error=washout_error,
                                     depth_error=depth_error)
        prev = (a_states, esc_a, t_start)

    raise SeedNotWashingOut(
        f"flow seed dependence at r={r} did not wash out within "
        f"{max_doublings} start-depth doublings")


@dataclass(frozen=True)
class CompareRow:
    """Flow and map verdicts at one rate; disagreements are flagged."""

    r: float
    flow_verdict: TrackingVerdict | None
    map_verdict: TrackingVerdict | None
    error: str | None = None

    @property
    def disagree(self) -> bool:
        if self.flow_verdict is None or self.map_verdict is None:
            return True
        return self.flow_verdict.kind != self.map_verdict.kind


def compare_flow_map(vf: VectorField, shift: ParameterShift, X_minus: Array,
                     r_grid, *, h: float = DEFAULT_ODE_STEP,
                     map_path: Path | None = None,
                     known_attractors=(), eps_track: float | None = None,
                     escape_radius: float = ESCAPE_RADIUS,
                     protocol: str = "paired") -> list[CompareRow]:
    """Per-rate flow vs time-1-map tracking verdicts.

    Equilibria of the flow are fixed points of the time-1 map, so one
    continued branch (``map_path``, continued on demand when omitted)
    serves as the tracking reference for both systems.
    """
    from .paths import continue_path
    from .pullback import compute_pullback

    _check_flow_path_stable(vf, shift, X_minus)
    msys = time_one_map(vf, h)
    if map_path is None:
        sat = shift.saturation_s
        map_path = continue_path(msys, shift, seed_s=-1.1 * sat,
                                 seed_x=np.atleast_1d(X_minus),
                                 s_range=(-1.1 * sat, 1.1 * sat), ds=0.2)

    rows = []
    for r in (float(v) for v in r_grid):
        try:
            fo = flow_pullback(vf, shift, X_minus, r, h=h,
                               escape_radius=escape_radius, protocol=protocol,
                               check_stability=False)
            fv = classify_tracking(fo.as_pullback_orbit(), map_path,
                                   known_attractors, eps_track, escape_radius)
            mo = compute_pullback(msys, shift, map_path, r,
                                  escape_radius=escape_radius, protocol=protocol)
            mv = classify_tracking(mo, map_path, known_attractors, eps_track,
                                   escape_radius)
            rows.append(CompareRow(r=r, flow_verdict=fv, map_verdict=mv))
        except Exception as exc:  # noqa: BLE001 - per-rate errors become rows
            rows.append(CompareRow(r=r, flow_verdict=None, map_verdict=None,
                                   error=f"{type(exc).__name__}: {exc}"))
    return rows


def flow_orbit_to_csv(orbit: FlowOrbit, fh, header_lines=()) -> None:
    """Write integer-time samples as CSV with columns ``t, s, x_1..x_l``."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    ell = orbit.states.shape[1]
    cols = ["t", "s"] + [f"x_{i + 1}" for i in range(ell)]
    fh.write(",".join(cols) + "\n")
    for k, t in enumerate(orbit.times):
        row = [str(int(t)), repr(float(orbit.r * t))]
        row += [repr(float(v)) for v in orbit.states[k]]
        fh.write(",".join(row) + "\n")
