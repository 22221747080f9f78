"""Local pullback attractors and their forward-fate classification.

The pullback attractor to ``X_minus`` is the unique orbit limiting
backward to the pre-shift fixed point.  It is computed here by forward
iteration from a start index deep in the saturated regime, with a
two-seed washout check and start-depth doubling turning the contraction
argument into a runtime assertion instead of an assumption.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import ceil

import numpy as np

from .core import Array, MapSystem, ParameterShift, saturated_n_max
from .errors import InvalidBracket, NumericalOverflow, SeedNotWashingOut
from .paths import Path, Stability

PULLBACK_TOL = 1e-10
SEED_PERTURBATION = 1e-4
MAX_DOUBLINGS = 6
TAIL_WINDOW = 50
ESCAPE_RADIUS = 1e6
TRACK_EPS_BASE = 1e-3

TRACKS = "TRACKS"
TIPS_TO = "TIPS_TO"
DIVERGED = "DIVERGED"
UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class PullbackOrbit:
    """Computed pullback orbit over ``[n_start, n_max]``.

    ``states[k]`` is the state at index ``n_start + k``.  Orbits that
    cross the escape radius are truncated at the crossing; ``escaped_at``
    then records the first escaped index.  ``n_conv`` and the two error
    estimates summarize the seed-washout diagnostics.
    """

    r: float
    n_start: int
    n_max: int
    states: Array
    escaped_at: int | None
    n_conv: int
    washout_error: float
    depth_error: float

    @property
    def indices(self) -> Array:
        return self.n_start + np.arange(len(self.states))

    @property
    def n_end(self) -> int:
        """Last index actually stored (``n_max`` unless the orbit escaped)."""
        return self.n_start + len(self.states) - 1

    @property
    def final_state(self) -> Array:
        return self.states[-1].copy()

    @property
    def seed_diagnostics(self) -> tuple[int, float]:
        return (self.n_start, self.washout_error)

    def state_at(self, n: int) -> Array:
        k = n - self.n_start
        if not 0 <= k < len(self.states):
            raise IndexError(f"index {n} outside stored range "
                             f"[{self.n_start}, {self.n_end}]")
        return self.states[k].copy()


def _iterate(sys: MapSystem, shift: ParameterShift, r: float, n_start: int,
             n_max: int, x0: Array, escape_radius: float):
    """Forward iteration; returns (states, escaped_at)."""
    x = np.asarray(x0, dtype=float).copy()
    states = [x.copy()]
    for n in range(n_start, n_max):
        if float(np.linalg.norm(x)) > escape_radius:
            return np.vstack(states), n
        x = sys.apply(x, shift.value(r * n))
        if not np.all(np.isfinite(x)):
            raise NumericalOverflow(f"non-finite state at n={n + 1}", index=n + 1)
        states.append(x.copy())
    if float(np.linalg.norm(x)) > escape_radius:
        return np.vstack(states), n_max
    return np.vstack(states), None


def _agreement_index(a_states: Array, b_states: Array, n_start: int,
                     esc_a, esc_b, tol: float) -> int | None:
    """Smallest index ``n <= 0`` past which the two runs agree to ``tol``
    at every shared index.  None when the runs never lock together."""
    if (esc_a is None) != (esc_b is None):
        return None
    if esc_a is not None and esc_a != esc_b:
        return None
    k = min(len(a_states), len(b_states))
    diffs = np.linalg.norm(a_states[:k] - b_states[:k], axis=1)
    bad = np.nonzero(diffs >= tol)[0]
    first_ok = 0 if bad.size == 0 else int(bad[-1]) + 1
    if first_ok >= k:
        return None
    n_conv = n_start + first_ok
    return n_conv if n_conv <= 0 else None


def compute_pullback(sys: MapSystem, shift: ParameterShift, path: Path,
                     r: float, n_max: int | None = None, *,
                     pullback_tol: float = PULLBACK_TOL,
                     perturbation: float = SEED_PERTURBATION,
                     max_doublings: int = MAX_DOUBLINGS,
                     escape_radius: float = ESCAPE_RADIUS,
                     protocol: str = "paired") -> PullbackOrbit:
    """Compute the pullback orbit to ``path.X_minus`` at rate ``r``.

    Seeds ``X_minus`` at a start index with ``r * n_start <= -S`` (S the
    shift saturation horizon) and iterates forward.  The start depth is
    doubled until (a) a run re-seeded with a perturbed state agrees with
    the clean run past some index ``n_conv <= 0``, and (b) doubling the
    depth no longer moves the trajectory on ``[n_conv, n_max]``.  Raises
    :class:`SeedNotWashingOut` when the doubling budget is exhausted.

    ``protocol="single"`` skips the perturbed-seed check (debug aid); the
    depth-doubling comparison is still enforced.
    """
    if path.stability is not Stability.STABLE:
        raise ValueError("pullback orbits are defined for stable paths only")
    if not r > 0:
        raise ValueError("rate r must be positive")
    if protocol not in ("paired", "single"):
        raise ValueError(f"unknown seed protocol {protocol!r}")
    if n_max is None:
        n_max = saturated_n_max(shift, r)
    if n_max <= 0:
        raise ValueError("n_max must be positive")

    n0 = -max(1, ceil(shift.saturation_s / r))
    ell = path.dimension
    pert = path.X_minus + perturbation * np.ones(ell) / np.sqrt(ell)

    prev = None  # (states, escaped_at, n_start, n_conv, washout_error)
    for d in range(max_doublings + 1):
        n_start = n0 * (2 ** d)
        a_states, esc_a = _iterate(sys, shift, r, n_start, n_max,
                                   path.X_minus, escape_radius)
        if protocol == "paired":
            b_states, esc_b = _iterate(sys, shift, r, n_start, n_max,
                                       pert, escape_radius)
            n_conv = _agreement_index(a_states, b_states, n_start,
                                      esc_a, esc_b, pullback_tol)
            if n_conv is None:
                prev = None
                continue
            k0 = n_conv - n_start
            k1 = min(len(a_states), len(b_states))
            washout_error = float(np.max(
                np.linalg.norm(a_states[k0:k1] - b_states[k0:k1], axis=1)))
        else:
            n_conv = n_start
            washout_error = float("nan")

        if prev is not None:
            p_states, p_esc, p_start, _, _ = prev
            n_from = max(n_conv, p_start)
            off_a = n_from - n_start
            off_p = n_from - p_start
            k = min(len(a_states) - off_a, len(p_states) - off_p)
            same_escape = (esc_a is None) == (p_esc is None) and (
                esc_a is None or esc_a == p_esc)
            if k > 0 and same_escape:
                depth_error = float(np.max(np.linalg.norm(
                    a_states[off_a:off_a + k] - p_states[off_p:off_p + k], axis=1)))
                if depth_error < pullback_tol:
                    return PullbackOrbit(
                        r=r, n_start=n_start, n_max=n_max, states=a_states,
                        escaped_at=esc_a, n_conv=n_conv,
                        washout_error=washout_error, depth_error=depth_error)
        prev = (a_states, esc_a, n_start, n_conv, washout_error)

    raise SeedNotWashingOut(
        f"seed dependence at r={r} did not wash out within "
        f"{max_doublings} start-depth doublings")


@dataclass(frozen=True)
class TrackingVerdict:
    """Forward fate of a pullback orbit.

    ``kind`` is one of TRACKS / TIPS_TO / DIVERGED / UNDECIDED;
    ``attractor_id`` names the target for TIPS_TO verdicts.
    """

    kind: str
    attractor_id: str | None
    sup_track_error: float
    final_state: Array

    def to_dict(self, r: float | None = None) -> dict:
        d = {
            "kind": self.kind,
            "attractor_id": self.attractor_id,
            "sup_track_error": self.sup_track_error,
            "final_state": [float(v) for v in self.final_state],
        }
        if r is not None:
            d = {"r": float(r), **d}
        return d


def default_track_eps(path: Path) -> float:
    """Default tracking tolerance, scaled by the path amplitude."""
    return TRACK_EPS_BASE * max(1.0, path.amplitude)


def sup_tracking_error(orbit: PullbackOrbit, path: Path) -> float:
    """``sup_n ||x_n - X(r*n)||`` over the stored orbit indices."""
    errs = [
        float(np.linalg.norm(orbit.states[k] - path.interpolate(orbit.r * n)))
        for k, n in enumerate(orbit.indices)
    ]
    return max(errs)


def classify_tracking(orbit: PullbackOrbit, path: Path,
                      known_attractors=(), eps_track: float | None = None,
                      escape_radius: float = ESCAPE_RADIUS,
                      tail_window: int = TAIL_WINDOW) -> TrackingVerdict:
    """Classify the forward fate of a pullback orbit.

    TRACKS when the final ``tail_window`` states all sit inside the
    ``eps_track``-ball around ``X_plus``; TIPS_TO(id) likewise for another
    known attractor; DIVERGED when the escape radius was crossed;
    UNDECIDED otherwise.
    """
    if eps_track is None:
        eps_track = default_track_eps(path)
    sup_err = sup_tracking_error(orbit, path)
    final = orbit.final_state

    norms = np.linalg.norm(orbit.states, axis=1)
    if orbit.escaped_at is not None or bool(np.any(norms > escape_radius)):
        return TrackingVerdict(DIVERGED, None, sup_err, final)

    if len(orbit.states) >= tail_window:
        tail = orbit.states[-tail_window:]
        d_plus = np.linalg.norm(tail - path.X_plus, axis=1)
        if bool(np.all(d_plus < eps_track)):
            return TrackingVerdict(TRACKS, None, sup_err, final)
        for attr_id, point in known_attractors:
            d = np.linalg.norm(tail - np.asarray(point, dtype=float), axis=1)
            if bool(np.all(d < eps_track)):
                return TrackingVerdict(TIPS_TO, str(attr_id), sup_err, final)
    return TrackingVerdict(UNDECIDED, None, sup_err, final)


@dataclass(frozen=True)
class RateScanRow:
    """One row of a rate scan; ``error`` records a per-rate failure."""

    r: float
    verdict: TrackingVerdict | None
    error: str | None = None


def rate_scan(sys: MapSystem, shift: ParameterShift, path: Path, r_grid, *,
              known_attractors=(), eps_track: float | None = None,
              escape_radius: float = ESCAPE_RADIUS,
              n_max: int | None = None, jobs: int = 1,
              protocol: str = "paired") -> list[RateScanRow]:
    """Verdict per rate over an ascending grid.

    Rates are independent; with ``jobs > 1`` they are dispatched to a
    thread pool and reassembled by index, so the output is deterministic
    regardless of worker count.  Per-rate errors are recorded in the row
    and the scan continues.
    """
    rates = [float(r) for r in r_grid]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("r_grid must be strictly ascending")

    def one(r: float) -> RateScanRow:
        try:
            orbit = compute_pullback(sys, shift, path, r, n_max=n_max,
                                     escape_radius=escape_radius,
                                     protocol=protocol)
            verdict = classify_tracking(orbit, path, known_attractors,
                                        eps_track, escape_radius)
            return RateScanRow(r=r, verdict=verdict)
        except Exception as exc:  # noqa: BLE001 - per-rate errors become rows
            return RateScanRow(r=r, verdict=None,
                               error=f"{type(exc).__name__}: {exc}")

    if jobs > 1 and len(rates) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, rates))
    return [one(r) for r in rates]


def critical_rate(sys: MapSystem, shift: ParameterShift, path: Path,
                  r_lo: float, r_hi: float, tol_r: float, *,
                  known_attractors=(), eps_track: float | None = None,
                  escape_radius: float = ESCAPE_RADIUS,
                  protocol: str = "paired") -> tuple[float, float]:
    """Bisect a TRACKS -> non-TRACKS transition inside ``[r_lo, r_hi]``.

    Tipping need not be monotone in the rate, so the result is only the
    transition within the supplied bracket.  Raises
    :class:`InvalidBracket` unless ``r_lo`` tracks and ``r_hi`` does not.
    """
    if not (0 < r_lo < r_hi):
        raise InvalidBracket(f"bracket [{r_lo}, {r_hi}] is not an interval "
                             "of positive rates")
    if not tol_r > 0:
        raise ValueError("tol_r must be positive")

    def verdict_kind(r: float) -> str:
        orbit = compute_pullback(sys, shift, path, r,
                                 escape_radius=escape_radius, protocol=protocol)
        return classify_tracking(orbit, path, known_attractors, eps_track,
                                 escape_radius).kind

    if verdict_kind(r_lo) != TRACKS:
        raise InvalidBracket(f"verdict at r_lo={r_lo} is not TRACKS")
    if verdict_kind(r_hi) == TRACKS:
        raise InvalidBracket(f"verdict at r_hi={r_hi} is TRACKS")
    lo, hi = r_lo, r_hi
    while hi - lo > tol_r:
        mid = 0.5 * (lo + hi)
        if verdict_kind(mid) == TRACKS:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def large_rate_limit(sys: MapSystem, shift: ParameterShift,
                     path: Path) -> tuple[Array, Array]:
    """Two-step construction of the infinite-rate limit points:
    ``Z1 = f(X_minus, L(0))`` and ``Z2 = f(Z1, limit_plus)``.

    Feeding Z2 to basin membership predicts the fate of the pullback
    orbit for all sufficiently large rates.
    """
    if path.stability is not Stability.STABLE:
        raise ValueError("large-rate limit is defined for stable paths only")
    z1 = sys.apply(path.X_minus, shift.value(0.0))
    if not np.all(np.isfinite(z1)):
        raise NumericalOverflow("non-finite Z1 = f(X_minus, L(0))")
    z2 = sys.apply(z1, shift.limit_plus)
    if not np.all(np.isfinite(z2)):
        raise NumericalOverflow("non-finite Z2 = f(Z1, limit_plus)")
    return z1, z2


@dataclass(frozen=True)
class LargeRateReport:
    """Convergence of early orbit points toward the large-rate limits.

    ``errors`` has one row per rate with columns
    ``(|x_-1 - X_minus|, |x_0 - X_minus|, |x_1 - Z1|, |x_2 - Z2|)``.
    """

    r_list: tuple[float, ...]
    Z1: Array
    Z2: Array
    errors: Array
    decreasing: tuple[bool, bool, bool, bool]
    saturated: tuple[bool, ...]

    @property
    def all_decreasing(self) -> bool:
        return all(self.decreasing)

    def to_dict(self) -> dict:
        return {
            "r_list": list(self.r_list),
            "Z1": [float(v) for v in self.Z1],
            "Z2": [float(v) for v in self.Z2],
            "errors": [[float(v) for v in row] for row in self.errors],
            "decreasing": list(self.decreasing),
            "saturated": list(self.saturated),
        }


def verify_large_rate(sys: MapSystem, shift: ParameterShift, path: Path,
                      r_list, *, protocol: str = "paired",
                      escape_radius: float = ESCAPE_RADIUS) -> LargeRateReport:
    """Check that ``x_{-1}, x_0, x_1, x_2`` of the pullback orbit approach
    ``X_minus, X_minus, Z1, Z2`` as the rate grows along ``r_list``.

    Failures are recorded in the report rather than raised.  A rate is
    flagged unsaturated when the shift has not essentially reached its
    limits within one step at that rate.
    """
    rates = [float(r) for r in r_list]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("r_list must be strictly ascending")
    z1, z2 = large_rate_limit(sys, shift, path)
    targets = [path.X_minus, path.X_minus, z1, z2]

    span = 1.0 + float(np.linalg.norm(shift.limit_plus - shift.limit_minus))
    saturated = tuple(
        float(np.linalg.norm(shift.value(-r) - shift.limit_minus)) <= 1e-2 * span
        and float(np.linalg.norm(shift.value(r) - shift.limit_plus)) <= 1e-2 * span
        for r in rates)

    errors = np.empty((len(rates), 4))
    for i, r in enumerate(rates):
        orbit = compute_pullback(sys, shift, path, r, n_max=2,
                                 escape_radius=escape_radius, protocol=protocol)
        for j, n in enumerate((-1, 0, 1, 2)):
            errors[i, j] = float(np.linalg.norm(orbit.state_at(n) - targets[j]))

    slack = 1e-15
    decreasing = tuple(
        bool(np.all(np.diff(errors[:, j]) <= slack)) for j in range(4))
    return LargeRateReport(r_list=tuple(rates), Z1=z1, Z2=z2, errors=errors,
                           decreasing=decreasing, saturated=saturated)


def orbit_to_csv(orbit: PullbackOrbit, fh, header_lines=()) -> None:
    """Write the orbit as CSV with columns ``n, s, x_1..x_l``."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    ell = orbit.states.shape[1]
    cols = ["n", "s"] + [f"x_{i + 1}" for i in range(ell)]
    fh.write(",".join(cols) + "\n")
    for k, n in enumerate(orbit.indices):
        row = [str(int(n)), repr(float(orbit.r * n))]
        row += [repr(float(v)) for v in orbit.states[k]]
        fh.write(",".join(row) + "\n")
