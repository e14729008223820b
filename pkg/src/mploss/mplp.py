"""Multiparametric LP: critical regions and piecewise-affine solution maps.

For ``min c^T x s.t. G x <= w + F theta`` over a box of parameters, every
nondegenerate optimum has an active set J whose square subsystem
``G_J x = w_J + F_J theta`` gives the optimizer as an affine function of theta.
Substituting that map into the inactive rows gives the polyhedron on which the
active set stays optimal. :func:`enumerate_regions` tiles the box with such
polyhedra by stepping across facets, with uniform sampling as a backstop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import lp_core
from .errors import (
    DegenerateAtPoint,
    ExplorationStalled,
    InfeasibleAtPoint,
    ParameterOutOfDomain,
    PointNotCovered,
    SingularActiveSystem,
)

MIN_RADIUS = 1e-9
CONTAIN_TOL = 1e-9
MAX_DIM = 3


@dataclass(frozen=True)
class ParametricLP:
    c: np.ndarray
    G: np.ndarray
    w: np.ndarray
    F: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        w = np.asarray(self.w, dtype=float).reshape(-1)
        F = np.asarray(self.F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        m, n = G.shape
        if c.shape != (n,) or w.shape != (m,) or F.shape[0] != m:
            raise ValueError("inconsistent ParametricLP shapes")
        if lower.shape != (F.shape[1],) or upper.shape != lower.shape:
            raise ValueError("domain bounds must match the parameter dimension")
        if not np.all(lower < upper):
            raise ValueError("domain requires lower < upper in every coordinate")
        if F.shape[1] > MAX_DIM:
            raise ValueError(f"parameter dimension above {MAX_DIM} is not supported")
        for name, val in (("c", c), ("G", G), ("w", w), ("F", F), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.F.shape[1]

    def at(self, theta) -> lp_core.DenseLP:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        return lp_core.DenseLP(self.c, self.G, self.w + self.F @ theta)

    def row_groups(self) -> list[tuple[int, ...]]:
        # structural pairing; independent of where theta is pinned
        return lp_core.pair_rows(self.G, np.hstack([self.w[:, None], self.F]))

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.dim
        A = np.vstack([np.eye(d), -np.eye(d)])
        b = np.r_[self.upper, -self.lower]
        return A, b


@dataclass(frozen=True)
class AffineMap:
    slope: np.ndarray
    intercept: np.ndarray

    def __call__(self, theta):
        return affine_eval(self, theta)


def affine_eval(amap: AffineMap, theta) -> np.ndarray:
    """Evaluate ``slope @ theta + intercept``; theta may be a batch of rows."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim <= 1:
        return amap.slope @ theta.reshape(-1) + amap.intercept
    return theta @ amap.slope.T + amap.intercept


@dataclass(frozen=True)
class CriticalRegion:
    id: int
    H: np.ndarray
    h: np.ndarray
    map: AffineMap
    active: tuple[int, ...]
    cost_slope: np.ndarray
    cost_intercept: float

    @property
    def cost_affine(self) -> tuple[np.ndarray, float]:
        return self.cost_slope, self.cost_intercept

    def cost(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta @ self.cost_slope + self.cost_intercept

    def contains(self, theta, tol: float = CONTAIN_TOL):
        """Closed membership test; vectorized over rows of ``theta``."""
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        if self.H.shape[0] == 0:
            return np.ones(theta.shape[0], dtype=bool)
        slack = self.h[None, :] - theta @ self.H.T
        return np.all(slack >= -tol * (1.0 + np.abs(self.h))[None, :], axis=1)

    def interval(self, lower, upper) -> tuple[float, float]:
        """Bounds of a scalar-parameter region clipped to ``[lower, upper]``."""
        if self.H.shape[1] != 1:
            raise ValueError("interval() needs a scalar parameter")
        lo, hi = float(np.ravel(lower)[0]), float(np.ravel(upper)[0])
        for a, b in zip(self.H[:, 0], self.h):
            if a > 0:
                hi = min(hi, b / a)
            elif a < 0:
                lo = max(lo, b / a)
        return float(lo) + 0.0, float(hi) + 0.0


@dataclass
class RegionPartition:
    regions: list[CriticalRegion]
    lower: np.ndarray
    upper: np.ndarray
    plp: ParametricLP = field(repr=False)

    def __len__(self):
        return len(self.regions)

    def locate_many(self, thetas) -> np.ndarray:
        """Region id per row, lowest id on shared boundaries, -1 if uncovered."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        out = np.full(thetas.shape[0], -1, dtype=int)
        for reg in reversed(self.regions):
            out[reg.contains(thetas)] = reg.id
        return out


def region_from_point(plp: ParametricLP, theta0, region_id: int = 0) -> CriticalRegion:
    """Critical region containing ``theta0`` and its affine solution map."""
    theta0 = np.asarray(theta0, dtype=float).reshape(-1)
    lp = plp.at(theta0)
    sol = lp_core.solve(lp)
    if not sol.optimal:
        raise InfeasibleAtPoint(theta0)
    groups = plp.row_groups()
    report = lp_core.check_nondegenerate(lp, sol, groups=groups)
    if report.degenerate:
        raise DegenerateAtPoint(theta0, report.describe())

    active = set(sol.active)
    reps = [g[0] for g in groups if all(r in active for r in g)]
    GJ = plp.G[reps]
    if GJ.shape[0] != GJ.shape[1] or np.linalg.cond(GJ) > 1e12:
        raise SingularActiveSystem(f"active system at theta={theta0.tolist()} has shape {GJ.shape}")
    slope = np.linalg.solve(GJ, plp.F[reps])
    intercept = np.linalg.solve(GJ, plp.w[reps])

    inactive = [j for j in range(plp.G.shape[0]) if j not in active]
    Gi = plp.G[inactive]
    H = Gi @ slope - plp.F[inactive]
    hv = plp.w[inactive] - Gi @ intercept
    norms = np.linalg.norm(H, axis=1)
    keep = norms > 1e-12 * (1.0 + np.abs(hv))
    H = H[keep] / norms[keep, None]
    hv = hv[keep] / norms[keep]

    return CriticalRegion(
        id=region_id,
        H=H,
        h=hv,
        map=AffineMap(slope, intercept),
        active=tuple(sorted(active)),
        cost_slope=plp.c @ slope,
        cost_intercept=float(plp.c @ intercept),
    )


def _with_box(plp: ParametricLP, reg: CriticalRegion):
    Ab, bb = plp.box()
    return np.vstack([reg.H, Ab]), np.r_[reg.h, bb]


def _facet_center(A, b, i, r_max):
    """Chebyshev center of facet i of ``{A theta <= b}`` within its hyperplane."""
    a = A[i]
    others = [j for j in range(A.shape[0]) if j != i]
    Ao = A[others]
    proj = Ao - np.outer(Ao @ a, a)
    pn = np.linalg.norm(proj, axis=1)
    d = A.shape[1]
    G = np.vstack([
        np.hstack([Ao, pn[:, None]]),
        np.r_[a, 0.0],
        np.r_[-a, 0.0],
        np.r_[np.zeros(d), 1.0],
        np.r_[np.zeros(d), -1.0],
    ])
    h = np.r_[b[others], b[i], -b[i], r_max, 1.0]
    sol = lp_core.solve(lp_core.DenseLP(np.r_[np.zeros(d), -1.0], G, h))
    if not sol.optimal:
        return None, -np.inf
    return sol.x_star[:d], float(sol.x_star[-1])


def _initial_seed(plp: ParametricLP) -> np.ndarray:
    # irrational offsets avoid the box center, where kinks like to sit
    fracs = np.array([0.6180339887, 0.7548776662, 0.8191725134])[: plp.dim]
    return plp.lower + fracs * (plp.upper - plp.lower)


def enumerate_regions(
    plp: ParametricLP,
    max_regions: int = 1000,
    n_backstop: int = 10_000,
    seed: int = 0,
) -> RegionPartition:
    """Tile the parameter box with critical regions.

    Regions are explored breadth-first: from each new region, a point is placed
    a small step beyond the center of every facet and seeded if no known region
    covers it. Once the frontier is exhausted, ``n_backstop`` uniform draws are
    checked and any uncovered draw restarts exploration. Ids follow discovery
    order.
    """
    lower, upper = plp.lower, plp.upper
    diag = float(np.linalg.norm(upper - lower))
    eps = 1e-6 * diag
    regions: list[CriticalRegion] = []
    seen_active = set()
    partition = RegionPartition(regions, lower, upper, plp)
    queue = deque([_initial_seed(plp)])

    def add_region(p) -> bool:
        reg = region_from_point(plp, p, region_id=len(regions))
        A, b = _with_box(plp, reg)
        radius, _ = lp_core.chebyshev_radius(A, b, diag)
        if radius < MIN_RADIUS:
            return False
        if reg.active in seen_active:
            raise ExplorationStalled(p, "rediscovered a known active set at an uncovered point")
        seen_active.add(reg.active)
        regions.append(reg)
        if len(regions) > max_regions:
            raise ExplorationStalled(p, f"more than {max_regions} regions")
        for i in range(reg.H.shape[0]):
            center, r = _facet_center(A, b, i, diag)
            if center is None or (plp.dim > 1 and r < MIN_RADIUS):
                continue
            step = center + eps * A[i]
            if np.all(step >= lower) and np.all(step <= upper):
                queue.append(step)
        return True

    rng = np.random.default_rng(seed)
    backstop = lower + rng.random((n_backstop, plp.dim)) * (upper - lower)
    while True:
        while queue:
            p = queue.popleft()
            if partition.locate_many(p[None, :])[0] < 0:
                add_region(p)
        uncovered = np.flatnonzero(partition.locate_many(backstop) < 0)
        if uncovered.size == 0:
            return partition
        witness = backstop[uncovered[0]]
        if not add_region(witness):
            raise ExplorationStalled(witness, "sampling backstop found a point no region covers")


def locate(partition: RegionPartition, theta) -> int:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    span = partition.upper - partition.lower
    if np.any(theta < partition.lower - 1e-9 * span) or np.any(theta > partition.upper + 1e-9 * span):
        raise ParameterOutOfDomain(f"theta={theta.tolist()} outside the domain")
    rid = int(partition.locate_many(theta[None, :])[0])
    if rid < 0:
        raise PointNotCovered(theta)
    return rid


@dataclass
class ValidationReport:
    n_samples: int
    failures: list[tuple[str, list[float], float]]
    max_map_error: float
    max_cost_error: float

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_partition(partition: RegionPartition, n_samples: int = 1000, seed: int = 0, tol: float = 1e-6) -> ValidationReport:
    """Check a partition against fresh LP solves at uniform random parameters."""
    plp = partition.plp
    rng = np.random.default_rng(seed)
    thetas = partition.lower + rng.random((n_samples, plp.dim)) * (partition.upper - partition.lower)
    ids = partition.locate_many(thetas)
    by_id = {r.id: r for r in partition.regions}
    failures = []
    max_map = max_cost = 0.0
    for theta, rid in zip(thetas, ids):
        if rid < 0:
            failures.append(("not_covered", theta.tolist(), float("nan")))
            continue
        sol = lp_core.solve(plp.at(theta))
        if not sol.optimal:
            failures.append((sol.status, theta.tolist(), float("nan")))
            continue
        reg = by_id[rid]
        err_x = float(np.max(np.abs(affine_eval(reg.map, theta) - sol.x_star)))
        err_c = abs(float(reg.cost(theta)) - sol.objective)
        max_map, max_cost = max(max_map, err_x), max(max_cost, err_c)
        if err_x > tol:
            failures.append(("map_mismatch", theta.tolist(), err_x))
        if err_c > tol:
            failures.append(("cost_mismatch", theta.tolist(), err_c))
    return ValidationReport(n_samples, failures, max_map, max_cost)
