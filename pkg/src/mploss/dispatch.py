"""Day-ahead and real-time dispatch LPs for a wind/SG/flexibility portfolio."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import lp_core
from .errors import InvalidSpec, ParameterOutOfDomain
from .mplp import ParametricLP

_DOMAIN_TOL = 1e-9


def _floats(v):
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class DispatchSpec:
    """Declarative portfolio description.

    Costs are in $/kWh and bounds in kW. ``flex_direction`` is +1 for resources
    that cover a deficit (up-regulation) and -1 for those that absorb a surplus.
    """

    sg_costs: tuple
    sg_bounds: tuple
    flex_costs: tuple
    flex_bounds: tuple
    flex_direction: tuple
    wind_capacity: float
    load_range: tuple

    def __post_init__(self):
        object.__setattr__(self, "sg_costs", _floats(self.sg_costs))
        object.__setattr__(self, "sg_bounds", tuple(_floats(b) for b in self.sg_bounds))
        object.__setattr__(self, "flex_costs", _floats(self.flex_costs))
        object.__setattr__(self, "flex_bounds", tuple(_floats(b) for b in self.flex_bounds))
        object.__setattr__(self, "flex_direction", tuple(int(d) for d in self.flex_direction))
        object.__setattr__(self, "wind_capacity", float(self.wind_capacity))
        object.__setattr__(self, "load_range", _floats(self.load_range))
        self.validate()

    def validate(self):
        n_sg, n_fx = len(self.sg_costs), len(self.flex_costs)
        if n_sg == 0 or len(self.sg_bounds) != n_sg:
            raise InvalidSpec("sg_costs and sg_bounds must be nonempty and of equal length")
        if n_fx == 0 or len(self.flex_bounds) != n_fx or len(self.flex_direction) != n_fx:
            raise InvalidSpec("flex_costs, flex_bounds and flex_direction must align")
        for lo, hi in self.sg_bounds + self.flex_bounds:
            if lo > hi or hi < 0:
                raise InvalidSpec(f"bad bound pair ({lo}, {hi})")
        if any(d not in (1, -1) for d in self.flex_direction):
            raise InvalidSpec("flex_direction entries must be +1 or -1")
        if any(c <= 0 for c in self.flex_costs):
            raise InvalidSpec("flexible-resource costs must be positive")
        C = self.wind_capacity
        l_min, l_max = self.load_range
        if C <= 0:
            raise InvalidSpec("wind_capacity must be positive")
        if l_min > l_max:
            raise InvalidSpec("load_range must satisfy l_min <= l_max")
        sg_lo = sum(b[0] for b in self.sg_bounds)
        sg_hi = sum(b[1] for b in self.sg_bounds)
        if sg_lo > l_min - C or sg_hi < l_max:
            raise InvalidSpec(
                f"SG range [{sg_lo}, {sg_hi}] cannot meet net load range [{l_min - C}, {l_max}]"
            )
        d = np.array(self.flex_direction)
        lo = np.array([b[0] for b in self.flex_bounds])
        hi = np.array([b[1] for b in self.flex_bounds])
        reach_hi = float(np.sum(np.where(d > 0, hi, -lo)))
        reach_lo = float(np.sum(np.where(d > 0, lo, -hi)))
        if reach_lo > -C or reach_hi < C:
            raise InvalidSpec(f"flexible range [{reach_lo}, {reach_hi}] does not cover [-{C}, {C}]")

    @property
    def n_sg(self) -> int:
        return len(self.sg_costs)

    @property
    def n_flex(self) -> int:
        return len(self.flex_costs)

    def to_dict(self) -> dict:
        return {k: (list(map(list, v)) if k.endswith("bounds") else (list(v) if isinstance(v, tuple) else v))
                for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "DispatchSpec":
        fields = ("sg_costs", "sg_bounds", "flex_costs", "flex_bounds", "flex_direction", "wind_capacity", "load_range")
        missing = [f for f in fields if f not in d]
        if missing:
            raise InvalidSpec(f"spec is missing fields {missing}")
        return cls(**{f: d[f] for f in fields})

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_capacity(self, capacity: float) -> "DispatchSpec":
        return replace(self, wind_capacity=capacity)


# Two SGs, two up-regulation tiers and one down-regulation resource. Sized so
# the deviation loss has three pieces at (l, y) = (50, 10).
CANONICAL = DispatchSpec(
    sg_costs=(10.0, 30.0),
    sg_bounds=((0.0, 30.0), (0.0, 40.0)),
    flex_costs=(40.0, 100.0, 5.0),
    flex_bounds=((0.0, 10.0), (0.0, 30.0), (0.0, 40.0)),
    flex_direction=(1, 1, -1),
    wind_capacity=28.0,
    load_range=(40.0, 60.0),
)


# Canonical portfolio with dearer up-regulation (100 / 200 $/kWh): a deficit
# costs more than a surplus once the day-ahead saving is netted out, so the
# cost-optimal forecast sits below the conditional mean.
DEFICIT_DEAR = replace(CANONICAL, flex_costs=(100.0, 200.0, 5.0))


def canonical_spec(capacity: float | None = None) -> DispatchSpec:
    return CANONICAL if capacity is None else CANONICAL.with_capacity(capacity)


def perturb_spec(spec: DispatchSpec, seed: int = 0, cost_scale: float = 1e-6, bound_scale: float = 1e-9) -> DispatchSpec:
    """Break ties by i.i.d. uniform jitter.

    Costs move by a relative ``±cost_scale`` (this resolves dual degeneracy such
    as equal SG prices); bounds move by an absolute ``±bound_scale``.
    """
    rng = np.random.default_rng(seed)

    def jitter_costs(cs):
        cs = np.asarray(cs)
        return cs * (1.0 + rng.uniform(-cost_scale, cost_scale, cs.shape))

    def jitter_bounds(bs):
        bs = np.asarray(bs)
        return bs + rng.uniform(-bound_scale, bound_scale, bs.shape)

    return replace(
        spec,
        sg_costs=jitter_costs(spec.sg_costs),
        sg_bounds=[tuple(b) for b in jitter_bounds(spec.sg_bounds)],
        flex_costs=jitter_costs(spec.flex_costs),
        flex_bounds=[tuple(b) for b in jitter_bounds(spec.flex_bounds)],
    )


def _bound_rows(bounds):
    bounds = np.asarray(bounds, dtype=float)
    k = bounds.shape[0]
    A = np.vstack([np.eye(k), -np.eye(k)])
    b = np.r_[bounds[:, 1], -bounds[:, 0]]
    return A, b


def _stack_blocks(A, b, row):
    G = np.vstack([A, row[None, :], -row[None, :]])
    w = np.r_[b, 0.0, 0.0]
    F = np.vstack([np.zeros((A.shape[0], 2)), np.eye(2)])
    return G, w, F


def day_ahead_blocks(spec: DispatchSpec):
    """(G_D, w_D, F_D) with the balance row pair last; F_D multiplies (l - yhat, yhat - l)."""
    A, b = _bound_rows(spec.sg_bounds)
    return _stack_blocks(A, b, np.ones(spec.n_sg))


def real_time_blocks(spec: DispatchSpec):
    """(G_R, w_R, F_R); F_R multiplies (yhat - y, y - yhat)."""
    A, b = _bound_rows(spec.flex_bounds)
    return _stack_blocks(A, b, np.asarray(spec.flex_direction, dtype=float))


def _check(name, value, lo, hi):
    tol = _DOMAIN_TOL * (1.0 + abs(lo) + abs(hi))
    if not (lo - tol <= value <= hi + tol):
        raise ParameterOutOfDomain(f"{name}={value} outside [{lo}, {hi}]")


def build_day_ahead(spec: DispatchSpec, yhat: float, l: float) -> lp_core.DenseLP:
    _check("yhat", yhat, 0.0, spec.wind_capacity)
    _check("l", l, *spec.load_range)
    G, w, F = day_ahead_blocks(spec)
    return lp_core.DenseLP(np.asarray(spec.sg_costs), G, w + F @ np.array([l - yhat, yhat - l]))


def build_real_time(spec: DispatchSpec, yhat: float, y: float) -> lp_core.DenseLP:
    _check("yhat", yhat, 0.0, spec.wind_capacity)
    _check("y", y, 0.0, spec.wind_capacity)
    G, w, F = real_time_blocks(spec)
    return lp_core.DenseLP(np.asarray(spec.flex_costs), G, w + F @ np.array([yhat - y, y - yhat]))


# The two parameter rows always move together, so the parametric forms are
# built over one scalar channel: F @ [1, -1]^T.
_CHANNEL = np.array([[1.0], [-1.0]])


def parametric_day_ahead(spec: DispatchSpec) -> ParametricLP:
    """Day-ahead LP parameterized by the net load n = l - yhat."""
    G, w, F = day_ahead_blocks(spec)
    l_min, l_max = spec.load_range
    return ParametricLP(np.asarray(spec.sg_costs), G, w, F @ _CHANNEL, [l_min - spec.wind_capacity], [l_max])


def parametric_real_time(spec: DispatchSpec) -> ParametricLP:
    """Real-time LP parameterized by the deviation delta = yhat - y."""
    G, w, F = real_time_blocks(spec)
    C = spec.wind_capacity
    return ParametricLP(np.asarray(spec.flex_costs), G, w, F @ _CHANNEL, [-C], [C])


def day_ahead_cost(spec: DispatchSpec, yhat: float, l: float) -> float:
    return lp_core.solve_strict(build_day_ahead(spec, yhat, l)).objective


def real_time_cost(spec: DispatchSpec, yhat: float, y: float) -> float:
    return lp_core.solve_strict(build_real_time(spec, yhat, y)).objective


def operation_cost(spec: DispatchSpec, yhat: float, l: float, y: float) -> float:
    """Two-stage cost from fresh LP solves; the ground truth for any derived loss."""
    return day_ahead_cost(spec, yhat, l) + real_time_cost(spec, yhat, y)
