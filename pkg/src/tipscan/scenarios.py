"""Ready-made systems, the tipping-inducing reparametrization, and the
plain-text scenario configuration loader.

Five built-in scenarios cover the standard demonstrations: a logistic
map that always tracks, a one-dimensional map that tips at moderate
rates, a forward-basin-stable map that still fails to track at high
rate, a cubic flow whose time-1 map disagrees with the flow, and the
two-dimensional Ikeda map.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from .basins import InflowingFamily
from .core import (Array, DEFAULT_SATURATION, MapSystem, ParameterShift,
                   jacobian_at, spectral_radius, eigenvalues_small)
from .errors import ConfigError, InvalidWindow, NewtonDivergence, UnknownScenario
from .flowbridge import DEFAULT_ODE_STEP, VectorField, time_one_map
from .paths import Path, Stability, continue_path, newton_fixed_point

SCENARIO_IDS = ("logistic", "rtip1d", "fbs1d", "cubicflow", "ikeda")


def _sech(x):
    """Overflow-safe sech: 2 e^{-|x|} / (1 + e^{-2|x|})."""
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


# ---------------------------------------------------------------------------
# built-in functional families (all evaluators broadcast over leading axes)

def make_logistic_system() -> MapSystem:
    """f(x, lam) = lam * x * (1 - x)."""

    def evaluator(state, params):
        lam = params[0]
        x = state[..., 0]
        return (lam * x * (1.0 - x))[..., None]

    def jac(state, params):
        lam = params[0]
        x = state[..., 0]
        return np.array([[lam * (1.0 - 2.0 * x)]])

    return MapSystem(dimension=1, evaluator=evaluator, jacobian=jac,
                     name="logistic")


def make_shifted_rational_system(amplitude: float = 2.0) -> MapSystem:
    """f(x, lam) = A (x - lam) / (1 + (x - lam)^2)^2 + lam."""

    def evaluator(state, params):
        lam = params[0]
        u = state[..., 0] - lam
        return (amplitude * u / (1.0 + u * u) ** 2 + lam)[..., None]

    def jac(state, params):
        lam = params[0]
        u = state[..., 0] - lam
        return np.array([[amplitude * (1.0 - 3.0 * u * u) / (1.0 + u * u) ** 3]])

    return MapSystem(dimension=1, evaluator=evaluator, jacobian=jac,
                     name="shifted_rational")


def make_shifted_quadratic_system(curvature: float = 0.25) -> MapSystem:
    """f(x, lam) = a ((x - lam)^2 - (x - lam)) + lam."""

    def evaluator(state, params):
        lam = params[0]
        u = state[..., 0] - lam
        return (curvature * (u * u - u) + lam)[..., None]

    def jac(state, params):
        lam = params[0]
        u = state[..., 0] - lam
        return np.array([[curvature * (2.0 * u - 1.0)]])

    return MapSystem(dimension=1, evaluator=evaluator, jacobian=jac,
                     name="shifted_quadratic")


def make_cubic_vector_field(offsets=(0.0, 1.0, 2.0)) -> VectorField:
    """dx/dt = -(x - lam - o0)(x - lam - o1)(x - lam - o2)."""
    o0, o1, o2 = (float(v) for v in offsets)

    def evaluator(state, params):
        lam = params[0]
        u = state[..., 0] - lam
        return (-(u - o0) * (u - o1) * (u - o2))[..., None]

    return VectorField(dimension=1, evaluator=evaluator, name="cubic")


def make_ikeda_system(R: float = 0.9, phi: float = 1.0, p: float = 6.0) -> MapSystem:
    """Ikeda laser-cavity map; the drifting parameter is the input
    amplitude ``a``:

        theta = phi - p / (1 + x^2 + y^2)
        x' = a + R (x cos(theta) - y sin(theta))
        y' =     R (x sin(theta) + y cos(theta))
    """

    def evaluator(state, params):
        a = params[0]
        x = state[..., 0]
        y = state[..., 1]
        theta = phi - p / (1.0 + x * x + y * y)
        ct = np.cos(theta)
        st = np.sin(theta)
        return np.stack([a + R * (x * ct - y * st),
                         R * (x * st + y * ct)], axis=-1)

    def jac(state, params):
        x = state[..., 0]
        y = state[..., 1]
        D = 1.0 + x * x + y * y
        theta = phi - p / D
        tx = 2.0 * p * x / (D * D)
        ty = 2.0 * p * y / (D * D)
        ct = np.cos(theta)
        st = np.sin(theta)
        gx = -x * st - y * ct
        gy = x * ct - y * st
        return np.array([[R * (ct + gx * tx), R * (-st + gx * ty)],
                         [R * (st + gy * tx), R * (ct + gy * ty)]])

    return MapSystem(dimension=2, evaluator=evaluator, jacobian=jac,
                     name="ikeda")


# ---------------------------------------------------------------------------
# built-in shift families

def make_affine_tanh_shift(c0: float, c1: float,
                           saturation: float = DEFAULT_SATURATION,
                           name: str = "affine_tanh") -> ParameterShift:
    """L(s) = c0 + c1 tanh(s)."""
    return ParameterShift(
        value_fn=lambda s: np.array([c0 + c1 * np.tanh(s)]),
        limit_minus=np.array([c0 - c1]),
        limit_plus=np.array([c0 + c1]),
        saturation_s=saturation,
        derivative_fn=lambda s: np.array([c1 * _sech(s) ** 2]),
        name=name)


def make_sech_power_shift(amplitude: float = 3.0, exponent: float = 10.0,
                          saturation: float = DEFAULT_SATURATION,
                          name: str = "sech_power") -> ParameterShift:
    """L(s) = amp * sech(s^k); both limits are zero."""
    return ParameterShift(
        value_fn=lambda s: np.array([amplitude * _sech(s ** exponent)]),
        limit_minus=np.array([0.0]),
        limit_plus=np.array([0.0]),
        saturation_s=saturation,
        name=name)


def make_sech_plus_tanh_shift(a: float = 1.0, b: float = 0.4,
                              saturation: float = DEFAULT_SATURATION,
                              name: str = "sech_plus_tanh") -> ParameterShift:
    """L(s) = a sech(s) + b tanh(s)."""
    return ParameterShift(
        value_fn=lambda s: np.array([a * _sech(s) + b * np.tanh(s)]),
        limit_minus=np.array([-b]),
        limit_plus=np.array([b]),
        saturation_s=saturation,
        name=name)


# ---------------------------------------------------------------------------
# frozen-map fixed-point scanning

def frozen_fixed_points(sys: MapSystem, lam: Array, window: float = 10.0,
                        n_per_axis: int = 21, dedup_tol: float = 1e-7) -> list[Array]:
    """All fixed points of ``f(., lam)`` found by Newton from a coarse
    grid over ``[-window, window]^l``, sorted by descending norm."""
    lam = np.asarray(lam, dtype=float)
    axes = [np.linspace(-window, window, n_per_axis)] * sys.dimension
    mesh = np.meshgrid(*axes, indexing="ij")
    starts = np.column_stack([m.ravel() for m in mesh])
    found: list[Array] = []
    for x0 in starts:
        try:
            x = newton_fixed_point(sys, lam, x0)
        except NewtonDivergence:
            continue
        if float(np.linalg.norm(x)) > 10.0 * window:
            continue
        if all(float(np.linalg.norm(x - y)) > dedup_tol for y in found):
            found.append(x)
    found.sort(key=lambda y: -float(np.linalg.norm(y)))
    return found


def fixed_point_character(sys: MapSystem, x: Array, lam: Array) -> str:
    """'stable', 'saddle', or 'repelling' from the Jacobian eigenvalues."""
    eigs = np.abs(eigenvalues_small(jacobian_at(sys, x, lam)))
    if np.all(eigs < 1.0):
        return "stable"
    if np.all(eigs > 1.0):
        return "repelling"
    return "saddle"


# ---------------------------------------------------------------------------
# scenario container

@dataclass(frozen=True)
class PathSeed:
    s: float
    x: tuple[float, ...]
    stability: Stability


@dataclass(frozen=True)
class Golden:
    """One machine-checkable expectation with tolerance and source tag."""

    name: str
    kind: str
    payload: dict
    tol: float
    source: str


@dataclass(frozen=True)
class Scenario:
    """Fully populated setup: system, shift, seeds, grids, expectations."""

    id: str
    kind: str  # "map" | "flow"
    map_system: MapSystem
    shift: ParameterShift
    seeds: tuple[PathSeed, ...]
    r_grid: tuple[float, ...]
    continuation: tuple[float, float, float]  # (s_min, s_max, ds)
    check_s_grid: tuple[float, ...]
    known_attractors: tuple[tuple[str, tuple[float, ...]], ...]
    goldens: tuple[Golden, ...]
    vector_field: VectorField | None = None
    ode_step: float = DEFAULT_ODE_STEP
    basin_region: tuple[float, float, float, float] | None = None
    basin_attractors: tuple[tuple[str, tuple[float, ...]], ...] = ()

    def attractor_points(self) -> list[tuple[str, Array]]:
        return [(aid, np.asarray(pt, dtype=float))
                for aid, pt in self.known_attractors]

    def basin_attractor_points(self) -> list[tuple[str, Array]]:
        return [(aid, np.asarray(pt, dtype=float))
                for aid, pt in self.basin_attractors]


def primary_path(scenario: Scenario, ds: float | None = None) -> Path:
    """Continue the scenario's primary stable branch."""
    seed = scenario.seeds[0]
    s_min, s_max, ds_default = scenario.continuation
    return continue_path(scenario.map_system, scenario.shift,
                         seed_s=seed.s, seed_x=np.asarray(seed.x, dtype=float),
                         s_range=(s_min, s_max), ds=ds or ds_default)


def logistic_inflowing_family(path: Path, pad: float = 0.05,
                              n_grid: int = 81) -> InflowingFamily:
    """Nested interval family around the logistic branch: lower end pinned
    just below the pre-shift fixed point, upper end padding the branch."""
    s_lo, s_hi = path.s[0], path.s[-1]
    x_minus = path.X_minus

    def center(s: float) -> Array:
        return 0.5 * (x_minus + path.interpolate(s))

    def radius(s: float) -> float:
        return 0.5 * float(np.linalg.norm(path.interpolate(s) - x_minus)) + pad

    return InflowingFamily(center=center, radius=radius,
                           s_grid=np.linspace(s_lo, s_hi, n_grid))


# ---------------------------------------------------------------------------
# built-in scenarios

_SQRT2M1 = float(np.sqrt(np.sqrt(2.0) - 1.0))  # offset of the outer branches


def _build_logistic() -> Scenario:
    sysm = make_logistic_system()
    shift = make_affine_tanh_shift(2.0, 0.9, name="logistic_shift")
    goldens = (
        Golden("X_minus", "limit_minus", {"value": (1.0 - 1.0 / 1.1,)},
               tol=1e-9, source="analytic"),
        Golden("X_plus", "limit_plus", {"value": (1.0 - 1.0 / 2.9,)},
               tol=1e-9, source="analytic"),
        Golden("tracks_everywhere", "verdicts",
               {"expected": {r: ("TRACKS", None) for r in (0.05, 0.1, 0.5)}},
               tol=0.0, source="derived"),
    )
    return Scenario(
        id="logistic", kind="map", map_system=sysm, shift=shift,
        seeds=(PathSeed(0.0, (0.5,), Stability.STABLE),),
        r_grid=(0.05, 0.1, 0.5),
        continuation=(-40.0, 40.0, 0.05),
        check_s_grid=tuple(np.linspace(-6.0, 6.0, 25)) + (-40.0, 40.0),
        known_attractors=(),
        goldens=goldens)


def _build_rtip1d() -> Scenario:
    sysm = make_shifted_rational_system(2.0)
    shift = make_affine_tanh_shift(0.0, 1.0, name="rtip_shift")
    c = _SQRT2M1
    goldens = (
        Golden("X_minus", "limit_minus", {"value": (-1.0 + c,)},
               tol=1e-9, source="analytic"),
        Golden("X_plus", "limit_plus", {"value": (1.0 + c,)},
               tol=1e-9, source="analytic"),
        Golden("tracks_then_tips", "verdicts",
               {"expected": {0.2: ("TRACKS", None), 0.5: ("TIPS_TO", "Z+")}},
               tol=0.0, source="reference"),
        Golden("fbs_violated", "fbs_holds", {"expected": False},
               tol=0.0, source="derived"),
    )
    return Scenario(
        id="rtip1d", kind="map", map_system=sysm, shift=shift,
        seeds=(PathSeed(0.0, (c,), Stability.STABLE),
               PathSeed(0.0, (0.0,), Stability.UNSTABLE),
               PathSeed(0.0, (-c,), Stability.STABLE)),
        r_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6),
        continuation=(-40.0, 40.0, 0.05),
        check_s_grid=tuple(np.linspace(-6.0, 6.0, 61)) + (-40.0, 40.0),
        known_attractors=(("Z+", (1.0 - c,)), ("Y+", (1.0,))),
        goldens=goldens)


def _build_fbs1d() -> Scenario:
    sysm = make_shifted_quadratic_system(0.25)
    shift = make_sech_power_shift(3.0, 10.0, name="fbs_shift")
    goldens = (
        Golden("Z_points", "large_rate", {"Z1": (6.0,), "Z2": (7.5,)},
               tol=1e-12, source="analytic"),
        Golden("diverges_at_2", "verdicts",
               {"expected": {2.0: ("DIVERGED", None)}},
               tol=0.0, source="reference"),
        Golden("fbs_holds", "fbs_holds", {"expected": True},
               tol=0.0, source="reference"),
    )
    return Scenario(
        id="fbs1d", kind="map", map_system=sysm, shift=shift,
        seeds=(PathSeed(0.0, (3.0,), Stability.STABLE),
               PathSeed(0.0, (8.0,), Stability.UNSTABLE)),
        r_grid=(0.5, 1.0, 2.0),
        continuation=(-40.0, 40.0, 0.05),
        check_s_grid=tuple(np.linspace(-2.5, 2.5, 51)) + (-40.0, 40.0),
        known_attractors=(),
        goldens=goldens)


def _build_cubicflow() -> Scenario:
    vf = make_cubic_vector_field((0.0, 1.0, 2.0))
    shift = make_sech_plus_tanh_shift(1.0, 0.4, name="cubic_shift")
    msys = time_one_map(vf, DEFAULT_ODE_STEP)
    goldens = (
        Golden("flow_tracks_at_3", "flow_verdicts",
               {"expected": {3.0: ("TRACKS", None), 0.05: ("TRACKS", None)}},
               tol=0.0, source="reference"),
        Golden("map_tips_at_3", "verdicts",
               {"expected": {3.0: ("TIPS_TO", "Z+"), 0.05: ("TRACKS", None)}},
               tol=0.0, source="reference"),
    )
    return Scenario(
        id="cubicflow", kind="flow", map_system=msys, shift=shift,
        seeds=(PathSeed(-22.0, (1.6,), Stability.STABLE),
               PathSeed(-22.0, (0.6,), Stability.UNSTABLE),
               PathSeed(-22.0, (-0.4,), Stability.STABLE)),
        r_grid=(0.05, 3.0),
        continuation=(-22.0, 22.0, 0.2),
        check_s_grid=tuple(np.linspace(-6.0, 6.0, 25)) + (-22.0, 22.0),
        known_attractors=(("Z+", (0.4,)), ("Y+", (1.4,))),
        goldens=goldens,
        vector_field=vf, ode_step=DEFAULT_ODE_STEP)


def _build_ikeda() -> Scenario:
    sysm = make_ikeda_system(R=0.9, phi=1.0, p=6.0)
    shift = make_affine_tanh_shift(2.5, -2.0, name="ikeda_shift")
    a_minus, a_plus = shift.limit_minus, shift.limit_plus
    fps_minus = frozen_fixed_points(sysm, a_minus)
    fps_plus = frozen_fixed_points(sysm, a_plus)
    if len(fps_plus) < 3:
        raise RuntimeError("expected three post-shift Ikeda fixed points")
    x_minus_seed = fps_minus[0]
    x_plus, y_plus, z_plus = fps_plus[0], fps_plus[1], fps_plus[2]
    goldens = (
        Golden("X_minus", "limit_minus", {"value": (2.9698, 5.0274)},
               tol=5e-5, source="reference"),
        Golden("tips_at_2", "verdicts",
               {"expected": {2.0: ("TIPS_TO", "Z+")}},
               tol=0.0, source="reference"),
        Golden("x_minus_in_z_basin", "membership_at_plus",
               {"expected": "Z+"}, tol=0.0, source="reference"),
        Golden("post_shift_pattern", "fixed_point_pattern",
               {"expected": ("stable", "saddle", "stable")},
               tol=0.0, source="reference"),
    )
    return Scenario(
        id="ikeda", kind="map", map_system=sysm, shift=shift,
        seeds=(PathSeed(-40.0, tuple(float(v) for v in x_minus_seed),
                        Stability.STABLE),),
        r_grid=(0.5, 1.0, 2.0),
        continuation=(-40.0, 40.0, 0.05),
        check_s_grid=tuple(np.linspace(-3.0, 3.0, 25)) + (-40.0, 40.0),
        known_attractors=(("Z+", tuple(float(v) for v in z_plus)),
                          ("Y+", tuple(float(v) for v in y_plus))),
        goldens=goldens,
        basin_region=(-1.5, 4.5, -3.0, 6.0),
        basin_attractors=(("X+", tuple(float(v) for v in x_plus)),
                          ("Z+", tuple(float(v) for v in z_plus))))


_BUILDERS = {
    "logistic": _build_logistic,
    "rtip1d": _build_rtip1d,
    "fbs1d": _build_fbs1d,
    "cubicflow": _build_cubicflow,
    "ikeda": _build_ikeda,
}


def builtin(scenario_id: str) -> Scenario:
    """Fully populated built-in scenario; raises UnknownScenario otherwise."""
    try:
        builder = _BUILDERS[scenario_id]
    except KeyError:
        raise UnknownScenario(
            f"unknown scenario {scenario_id!r}; "
            f"choose one of {', '.join(SCENARIO_IDS)}") from None
    return builder()


# ---------------------------------------------------------------------------
# tipping-inducing reparametrization

def tipping_reparametrization(u: float, v: float, r: float):
    """Monotone C^1 time change: identity-slope translation by ``u`` for
    s <= 0 and by ``v - r`` for s >= r, bridged on (0, r) by a cubic
    Hermite segment with unit end slopes.  Requires ``r < v - u``; the
    bridge is then monotone (its slope is ``r + 6 t (1-t) (v-u-r) >= r``).
    """
    if not u < v:
        raise InvalidWindow(f"need u < v, got u={u}, v={v}")
    if not 0 < r < v - u:
        raise InvalidWindow(
            f"rate r={r} must lie in (0, v-u) = (0, {v - u})")

    def rho(s: float) -> float:
        if s <= 0.0:
            return s + u
        if s >= r:
            return s + v - r
        t = s / r
        h00 = 2.0 * t ** 3 - 3.0 * t ** 2 + 1.0
        h10 = t ** 3 - 2.0 * t ** 2 + t
        h01 = -2.0 * t ** 3 + 3.0 * t ** 2
        h11 = t ** 3 - t ** 2
        return h00 * u + h10 * r + h01 * v + h11 * r

    slopes = np.diff([rho(s) for s in np.linspace(0.0, r, 201)])
    if not np.all(slopes > 0):
        raise InvalidWindow("reparametrization bridge failed to be monotone")
    return rho


def construct_tipping_shift(shift: ParameterShift, u: float, v: float,
                            r: float) -> ParameterShift:
    """Reparametrized shift ``L(rho(s))`` that lingers at ``L(u)`` until
    step time 0 and reaches ``L(v)`` by step time ``r``, with the same
    asymptotic limits as ``shift``.

    When some earlier path point ``X(u)`` lies in the basin of a different
    stable branch at time ``v``, driving the system with the returned
    shift at a small enough rate produces tipping onto that branch.
    """
    rho = tipping_reparametrization(u, v, r)
    sat = shift.saturation_s + max(abs(u), abs(v - r)) + r + 1.0
    return ParameterShift(
        value_fn=lambda s: shift.value(rho(s)),
        limit_minus=shift.limit_minus,
        limit_plus=shift.limit_plus,
        saturation_s=sat,
        name=f"{shift.name}_reparam")


# ---------------------------------------------------------------------------
# plain-text configuration loader

_SYSTEM_FAMILIES = {
    "logistic": (make_logistic_system, ()),
    "shifted_rational": (make_shifted_rational_system, ("amplitude",)),
    "shifted_quadratic": (make_shifted_quadratic_system, ("curvature",)),
    "ikeda": (make_ikeda_system, ("R", "phi", "p")),
}

_SHIFT_KINDS = {
    "affine_tanh": (make_affine_tanh_shift, ("c0", "c1")),
    "sech_power": (make_sech_power_shift, ("amplitude", "exponent")),
    "sech_plus_tanh": (make_sech_plus_tanh_shift, ("a", "b")),
}


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse numbers from {text!r}") from exc


def load_scenario_config(path) -> Scenario:
    """Load a user scenario from an INI-style key-value file.

    Sections: ``[system]`` (family + coefficients), ``[shift]`` (kind +
    coefficients + optional saturation), ``[seeds]`` (``seedN = s x_1
    [x_2] stability``), ``[rates]`` (``grid = ...``), optional
    ``[continuation]`` (``s_min``, ``s_max``, ``ds``) and ``[scenario]``
    (``id``).  Only the built-in functional families are supported; see
    the README for the full schema.
    """
    cp = configparser.ConfigParser()
    if not cp.read(str(path)):
        raise ConfigError(f"cannot read configuration file {path}")
    if "system" not in cp or "shift" not in cp:
        raise ConfigError("configuration needs [system] and [shift] sections")

    sys_sec = cp["system"]
    family = sys_sec.get("family", "").strip()
    if family == "cubic_flow":
        offsets = _floats(sys_sec.get("offsets", "0 1 2"))
        if len(offsets) != 3:
            raise ConfigError("cubic_flow needs exactly three offsets")
        vf = make_cubic_vector_field(offsets)
        msys = time_one_map(vf, DEFAULT_ODE_STEP)
        kind = "flow"
    elif family in _SYSTEM_FAMILIES:
        maker, keys = _SYSTEM_FAMILIES[family]
        kwargs = {k: float(sys_sec[k]) for k in keys if k in sys_sec}
        msys = maker(**kwargs)
        vf = None
        kind = "map"
    else:
        raise ConfigError(f"unknown system family {family!r}")

    sh_sec = cp["shift"]
    sh_kind = sh_sec.get("kind", "").strip()
    if sh_kind == "constant":
        from .core import constant_shift
        shift = constant_shift(_floats(sh_sec.get("values", "0")))
    elif sh_kind in _SHIFT_KINDS:
        maker, keys = _SHIFT_KINDS[sh_kind]
        missing = [k for k in keys if k not in sh_sec]
        if missing:
            raise ConfigError(f"shift {sh_kind!r} needs keys {missing}")
        kwargs = {k: float(sh_sec[k]) for k in keys}
        if "saturation" in sh_sec:
            kwargs["saturation"] = float(sh_sec["saturation"])
        shift = maker(**kwargs)
    else:
        raise ConfigError(f"unknown shift kind {sh_kind!r}")

    seeds = []
    if "seeds" in cp:
        for key in sorted(cp["seeds"]):
            toks = cp["seeds"][key].split()
            if len(toks) != msys.dimension + 2:
                raise ConfigError(
                    f"seed {key!r} needs 's x_1..x_{msys.dimension} stability'")
            try:
                stab = Stability(toks[-1].capitalize())
            except ValueError as exc:
                raise ConfigError(f"bad stability {toks[-1]!r}") from exc
            seeds.append(PathSeed(float(toks[0]),
                                  tuple(float(t) for t in toks[1:-1]), stab))
    if not seeds:
        raise ConfigError("configuration needs at least one seed")

    r_grid = tuple(_floats(cp["rates"]["grid"])) if "rates" in cp else (0.1, 0.5)
    if "continuation" in cp:
        cont = cp["continuation"]
        continuation = (float(cont.get("s_min", -2 * shift.saturation_s)),
                        float(cont.get("s_max", 2 * shift.saturation_s)),
                        float(cont.get("ds", 0.05)))
    else:
        sat = shift.saturation_s
        continuation = (-2.0 * sat, 2.0 * sat, 0.05)

    scen_id = cp["scenario"].get("id", "") if "scenario" in cp else ""
    scen_id = scen_id or FsPath(str(path)).stem
    return Scenario(
        id=scen_id, kind=kind, map_system=msys, shift=shift,
        seeds=tuple(seeds), r_grid=r_grid, continuation=continuation,
        check_s_grid=tuple(np.linspace(continuation[0], continuation[1], 25)),
        known_attractors=(), goldens=(), vector_field=vf)
