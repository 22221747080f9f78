"""Basin membership, basin boundaries and grids, and the forward
basin-stability / forward inflowing-stability checkers.

Membership labels a point by iterating the frozen map and watching for
sustained residence in a small ball around a known attractor.  Grid
labeling batches all cells through the same loop, relying on evaluators
that broadcast over leading axes (all built-ins do; a scalar fallback
covers those that do not).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Array, MapSystem, ParameterShift
from .errors import SameLabel
from .paths import Path, newton_fixed_point

DIVERGED = "DIVERGED"
UNDECIDED = "UNDECIDED"

MEMBERSHIP_BUDGET = 10000
HOLD_WINDOW = 20
ATTRACTOR_EPS = 1e-6
ESCAPE_RADIUS = 1e6
FBS_MARGIN = 1e-3


def _check_attractors(sys: MapSystem, lam: Array, attractors, tol: float = 1e-6):
    ids, points = [], []
    for attr_id, point in attractors:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        res = float(np.linalg.norm(sys.apply(p, lam) - p))
        if res > tol:
            raise ValueError(
                f"attractor {attr_id!r} is not a fixed point at this parameter "
                f"(residual {res:.3e})")
        ids.append(str(attr_id))
        points.append(p)
    return ids, points


def _apply_batch(sys: MapSystem, pts: Array, lam: Array) -> Array:
    """Batched map application with a per-row fallback for evaluators that
    do not broadcast."""
    try:
        out = sys.apply(pts, lam)
        if out.shape == pts.shape:
            return out
    except Exception:  # noqa: BLE001 - fall back to the scalar route
        pass
    return np.vstack([sys.apply(p, lam) for p in pts])


def _membership_batch(sys: MapSystem, lam: Array, pts: Array, ids, points,
                      budget: int, eps: float, hold_window: int,
                      escape_radius: float) -> list[str]:
    """Labels for a batch of points under the frozen map ``f(., lam)``."""
    m = len(pts)
    k = len(points)
    x = np.array(pts, dtype=float)
    labels = [UNDECIDED] * m
    active = np.ones(m, dtype=bool)
    cand = np.full(m, -1, dtype=int)
    streak = np.zeros(m, dtype=int)
    targets = np.array(points) if k else np.empty((0, x.shape[1]))

    for _ in range(budget + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[idx]
        norms = np.linalg.norm(xa, axis=1)
        bad = ~np.all(np.isfinite(xa), axis=1) | (norms > escape_radius)
        for i in idx[bad]:
            labels[i] = DIVERGED
        active[idx[bad]] = False
        idx = idx[~bad]
        if idx.size == 0:
            continue
        xa = x[idx]
        if k:
            d = np.linalg.norm(xa[:, None, :] - targets[None, :, :], axis=2)
            nearest = np.argmin(d, axis=1)
            inside = d[np.arange(len(idx)), nearest] < eps
            same = inside & (cand[idx] == nearest)
            streak[idx[same]] += 1
            fresh = inside & ~same
            cand[idx[fresh]] = nearest[fresh]
            streak[idx[fresh]] = 1
            streak[idx[~inside]] = 0
            cand[idx[~inside]] = -1
            done = streak[idx] >= hold_window
            for i in idx[done]:
                labels[i] = ids[cand[i]]
            active[idx[done]] = False
            idx = idx[~done]
            if idx.size == 0:
                continue
        x[idx] = _apply_batch(sys, x[idx], lam)
    return labels


def membership(sys: MapSystem, lam: Array, x: Array, attractors,
               budget: int = MEMBERSHIP_BUDGET, *, eps: float = ATTRACTOR_EPS,
               hold_window: int = HOLD_WINDOW,
               escape_radius: float = ESCAPE_RADIUS) -> str:
    """Basin label of ``x`` under the frozen map ``f(., lam)``.

    Returns the id of the first attractor whose ``eps``-ball the orbit
    enters and holds for ``hold_window`` consecutive steps, DIVERGED once
    the escape radius is crossed, UNDECIDED when the budget runs out.
    ``attractors`` is a list of ``(id, point)`` pairs of verified fixed
    points.
    """
    lam = np.asarray(lam, dtype=float)
    ids, points = _check_attractors(sys, lam, attractors)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    return _membership_batch(sys, lam, pts, ids, points, budget, eps,
                             hold_window, escape_radius)[0]


def boundary_1d(sys: MapSystem, lam: Array, a: float, b: float, tol: float,
                attractors, budget: int = MEMBERSHIP_BUDGET,
                **membership_kwargs) -> float:
    """Bisection point in ``[a, b]`` where the basin label changes.

    Raises :class:`SameLabel` when both endpoints carry the same label.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    la = membership(sys, lam, [a], attractors, budget, **membership_kwargs)
    lb = membership(sys, lam, [b], attractors, budget, **membership_kwargs)
    if la == lb:
        raise SameLabel(f"both endpoints have label {la!r}")
    lo, hi = float(a), float(b)
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        lm = membership(sys, lam, [mid], attractors, budget, **membership_kwargs)
        if lm == la:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BasinGrid:
    """Labeled grid over an axis-aligned window at a frozen parameter.

    ``labels[iy, ix]`` indexes into ``label_names``; cell centers are at
    ``x0 + (ix + 0.5) * dx`` and ``y0 + (iy + 0.5) * dy``.
    """

    region: tuple[float, float, float, float]
    resolution: tuple[int, int]
    labels: Array
    label_names: tuple[str, ...]
    lam: Array

    def cell_centers(self) -> tuple[Array, Array]:
        x0, x1, y0, y1 = self.region
        nx, ny = self.resolution
        xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
        ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
        return xs, ys

    def label_at(self, x: float, y: float) -> str:
        """Label of the cell containing the point ``(x, y)``."""
        x0, x1, y0, y1 = self.region
        nx, ny = self.resolution
        ix = min(max(int((x - x0) / (x1 - x0) * nx), 0), nx - 1)
        iy = min(max(int((y - y0) / (y1 - y0) * ny), 0), ny - 1)
        return self.label_names[self.labels[iy, ix]]


def basin_grid_2d(sys: MapSystem, lam: Array, region, resolution, attractors,
                  budget: int = MEMBERSHIP_BUDGET, *, jobs: int = 1,
                  eps: float = ATTRACTOR_EPS, hold_window: int = HOLD_WINDOW,
                  escape_radius: float = ESCAPE_RADIUS) -> BasinGrid:
    """Label a 2-D grid of cell centers by basin membership.

    Cells are independent; with ``jobs > 1`` row blocks are dispatched to
    threads and reassembled by index (deterministic output either way).
    """
    if sys.dimension != 2:
        raise ValueError("basin grids are 2-D only")
    lam = np.asarray(lam, dtype=float)
    ids, points = _check_attractors(sys, lam, attractors)
    x0, x1, y0, y1 = (float(v) for v in region)
    nx, ny = (int(v) for v in resolution)
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be at least 1x1")
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    label_names = tuple(ids) + (DIVERGED, UNDECIDED)
    index = {name: i for i, name in enumerate(label_names)}

    def label_rows(iy_block) -> Array:
        pts = np.array([[x, ys[iy]] for iy in iy_block for x in xs])
        got = _membership_batch(sys, lam, pts, ids, points, budget, eps,
                                hold_window, escape_radius)
        return np.array([index[g] for g in got],
                        dtype=np.int16).reshape(len(iy_block), nx)

    if jobs > 1 and ny > 1:
        blocks = np.array_split(np.arange(ny), min(jobs, ny))
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(label_rows, blocks))
        labels = np.vstack(parts)
    else:
        labels = label_rows(np.arange(ny))
    return BasinGrid(region=(x0, x1, y0, y1), resolution=(nx, ny),
                     labels=labels, label_names=label_names, lam=lam)


@dataclass(frozen=True)
class FbsReport:
    """Outcome of the forward basin-stability check."""

    holds: bool
    pairs_checked: int
    s1: float | None = None
    s2: float | None = None
    witness_point: Array | None = None
    witness_label: str | None = None

    def to_dict(self) -> dict:
        d = {"holds": self.holds, "pairs_checked": self.pairs_checked}
        if not self.holds:
            d.update({
                "s1": self.s1,
                "s2": self.s2,
                "witness_point": [float(v) for v in self.witness_point],
                "witness_label": self.witness_label,
            })
        return d


def _fattened(point: Array, margin: float) -> Array:
    """Point plus a margin shell approximating the closure of the sampled
    path segment (two offsets in 1-D, eight directions in 2-D)."""
    ell = point.size
    if margin <= 0:
        return point[None, :]
    if ell == 1:
        offs = np.array([[0.0], [-margin], [margin]])
    else:
        ang = 2.0 * np.pi * np.arange(8) / 8.0
        ring = margin * np.column_stack([np.cos(ang), np.sin(ang)])
        offs = np.vstack([np.zeros((1, ell)), np.pad(ring, ((0, 0), (0, ell - 2)))])
    return point[None, :] + offs


def check_forward_basin_stability(sys: MapSystem, shift: ParameterShift,
                                  path: Path, s_grid, margin: float = FBS_MARGIN,
                                  *, other_attractors_at=None,
                                  budget: int = MEMBERSHIP_BUDGET,
                                  escape_radius: float = ESCAPE_RADIUS) -> FbsReport:
    """Check that every earlier path point lies in the basin of every
    later frozen fixed point along the path.

    The closure of the earlier-path segment is approximated by its grid
    samples fattened by ``margin``.  ``other_attractors_at(s)`` may
    supply competing attractor points at each grid time, which lets the
    membership test resolve violations quickly and name where the orbit
    actually went.  Returns the first violation found.
    """
    grid = np.asarray(sorted(float(v) for v in s_grid))
    X = [newton_fixed_point(sys, shift.value(s), path.interpolate(s)) for s in grid]
    pairs = 0
    for j in range(1, len(grid)):
        s2 = grid[j]
        lam2 = shift.value(s2)
        attractors = [("path", X[j])]
        if other_attractors_at is not None:
            attractors += [(str(a), p) for a, p in other_attractors_at(s2)]
        ids, points = _check_attractors(sys, lam2, attractors)
        pts = np.vstack([_fattened(X[i], margin) for i in range(j)])
        labels = _membership_batch(sys, lam2, pts, ids, points, budget,
                                   ATTRACTOR_EPS, HOLD_WINDOW, escape_radius)
        pairs += j
        per_point = len(_fattened(X[0], margin))
        for k, lab in enumerate(labels):
            if lab != "path":
                i = k // per_point
                return FbsReport(holds=False, pairs_checked=pairs,
                                 s1=float(grid[i]), s2=float(s2),
                                 witness_point=pts[k], witness_label=lab)
    return FbsReport(holds=True, pairs_checked=pairs)


@dataclass(frozen=True)
class InflowingFamily:
    """Nested family of balls (intervals in 1-D) ``K(s)`` around a center
    curve, sampled on ``s_grid``."""

    center: Callable[[float], Array]
    radius: Callable[[float], float]
    s_grid: Array

    def __post_init__(self):
        object.__setattr__(self, "s_grid",
                           np.asarray(sorted(float(v) for v in self.s_grid)))


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class InflowingReport:
    """Per-condition outcome of the forward inflowing-stability check."""

    nesting: ConditionResult
    mapped_inside: ConditionResult
    endpoints_interior: ConditionResult
    absorbed_in_plus_basin: ConditionResult

    @property
    def all_hold(self) -> bool:
        return (self.nesting.passed and self.mapped_inside.passed
                and self.endpoints_interior.passed
                and self.absorbed_in_plus_basin.passed)

    def to_dict(self) -> dict:
        out = {}
        for key in ("nesting", "mapped_inside", "endpoints_interior",
                    "absorbed_in_plus_basin"):
            c = getattr(self, key)
            out[key] = {"passed": c.passed, "witness": c.witness}
        out["all_hold"] = self.all_hold
        return out


def _ball_boundary(center: Array, radius: float, n: int) -> Array:
    ell = center.size
    if ell == 1:
        return center[None, :] + radius * np.array([[-1.0], [1.0]])
    ang = 2.0 * np.pi * np.arange(n) / n
    ring = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return center[None, :] + np.pad(ring, ((0, 0), (0, ell - 2)))


def check_inflowing(sys: MapSystem, shift: ParameterShift,
                    family: InflowingFamily, X_plus: Array, lam_plus: Array, *,
                    boundary_samples: int | None = None,
                    budget: int = MEMBERSHIP_BUDGET,
                    escape_radius: float = ESCAPE_RADIUS) -> InflowingReport:
    """Verify the four forward inflowing-stability conditions on the grid:
    nesting of the family, each boundary mapped strictly inside its own
    set, the shift-limit fixed points interior to the end sets, and the
    final set absorbed in the basin of ``X_plus``.

    Passing certifies that the pullback orbit tracks at every rate; a
    failing family refutes nothing (other families may still work).
    """
    X_plus = np.atleast_1d(np.asarray(X_plus, dtype=float))
    lam_plus = np.asarray(lam_plus, dtype=float)
    grid = family.s_grid
    if boundary_samples is None:
        boundary_samples = 2 if X_plus.size == 1 else 64
    centers = [np.atleast_1d(np.asarray(family.center(s), dtype=float)) for s in grid]
    radii = [float(family.radius(s)) for s in grid]

    nesting = ConditionResult(True)
    for i in range(len(grid) - 1):
        gap = float(np.linalg.norm(centers[i] - centers[i + 1]))
        if gap + radii[i] > radii[i + 1] + 1e-12:
            nesting = ConditionResult(False,
                f"K(s={grid[i]:.6g}) not contained in K(s={grid[i + 1]:.6g})")
            break

    mapped = ConditionResult(True)
    for i, s in enumerate(grid):
        bpts = _ball_boundary(centers[i], radii[i], boundary_samples)
        img = _apply_batch(sys, bpts, shift.value(s))
        dist = np.linalg.norm(img - centers[i], axis=1)
        if not np.all(dist < radii[i]):
            j = int(np.argmax(dist))
            mapped = ConditionResult(False,
                f"boundary point of K(s={s:.6g}) maps to distance "
                f"{dist[j]:.6g} >= radius {radii[i]:.6g}")
            break

    X_minus = newton_fixed_point(sys, shift.limit_minus, centers[0])
    d_minus = float(np.linalg.norm(X_minus - centers[0]))
    d_plus = float(np.linalg.norm(X_plus - centers[-1]))
    if d_minus < radii[0] and d_plus < radii[-1]:
        interior = ConditionResult(True)
    else:
        interior = ConditionResult(False,
            f"limit fixed point not interior (distances {d_minus:.6g}/{d_plus:.6g} "
            f"vs radii {radii[0]:.6g}/{radii[-1]:.6g})")

    bpts = np.vstack([_ball_boundary(centers[-1], radii[-1], boundary_samples),
                      centers[-1][None, :]])
    labels = _membership_batch(sys, lam_plus, bpts, ["X_plus"], [X_plus],
                               budget, ATTRACTOR_EPS, HOLD_WINDOW, escape_radius)
    if all(lab == "X_plus" for lab in labels):
        absorbed = ConditionResult(True)
    else:
        k = labels.index(next(lab for lab in labels if lab != "X_plus"))
        absorbed = ConditionResult(False,
            f"boundary sample {bpts[k].tolist()} of the final set has label "
            f"{labels[k]!r} in the post-shift map")

    return InflowingReport(nesting=nesting, mapped_inside=mapped,
                           endpoints_interior=interior,
                           absorbed_in_plus_basin=absorbed)


def grid_to_csv(grid: BasinGrid, fh, header_lines=()) -> None:
    """Write the grid as CSV with columns ``x, y, label``."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write("x,y,label\n")
    xs, ys = grid.cell_centers()
    for iy in range(grid.resolution[1]):
        for ix in range(grid.resolution[0]):
            fh.write(f"{xs[ix]!r},{ys[iy]!r},"
                     f"{grid.label_names[grid.labels[iy, ix]]}\n")


def grid_to_pgm(grid: BasinGrid, fh, header_lines=()) -> None:
    """Write the grid as an ASCII PGM raster (rows top = largest y).

    Attractor basins get evenly spaced gray levels; UNDECIDED is black
    and DIVERGED white, so undecided cells never blend into a basin.
    """
    k = len(grid.label_names) - 2
    gray = {}
    for i, name in enumerate(grid.label_names):
        if name == UNDECIDED:
            gray[i] = 0
        elif name == DIVERGED:
            gray[i] = 255
        else:
            gray[i] = int(round(255 * (i + 1) / (k + 1)))
    fh.write("P2\n")
    for line in header_lines:
        fh.write(f"# {line}\n")
    nx, ny = grid.resolution
    fh.write(f"{nx} {ny}\n255\n")
    for iy in range(ny - 1, -1, -1):
        fh.write(" ".join(str(gray[int(v)]) for v in grid.labels[iy]) + "\n")
