"""The piecewise-linear value-oriented loss l(yhat, l, y).

The day-ahead cost depends on (yhat, l) only through the net load
n = l - yhat, and the real-time cost on (yhat, y) only through the deviation
delta = yhat - y. Each subproblem therefore partitions a scalar channel into
intervals with an affine cost, and the joint regions are the products of those
intervals, lifted back to (yhat, l, y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp_core
from .dispatch import DispatchSpec, parametric_day_ahead, parametric_real_time
from .errors import ParameterOutOfDomain, PointNotCovered
from .mplp import MIN_RADIUS, enumerate_regions

_TOL = 1e-9


@dataclass(frozen=True)
class ChannelRegion:
    """Interval [lo, hi] of a scalar channel with cost ``slope * t + intercept``."""

    lo: float
    hi: float
    slope: float
    intercept: float

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        return (t >= self.lo - _TOL * (1 + abs(self.lo))) & (t <= self.hi + _TOL * (1 + abs(self.hi)))


@dataclass(frozen=True)
class JointRegion:
    da_id: int
    rt_id: int
    beta_yhat: float
    beta_l: float
    beta_y: float
    beta_0: float

    def value(self, yhat, l, y):
        return self.beta_yhat * yhat + self.beta_l * l + self.beta_y * y + self.beta_0


@dataclass(frozen=True)
class PiecewiseLoss:
    da_regions: tuple[ChannelRegion, ...]
    rt_regions: tuple[ChannelRegion, ...]
    joint: tuple[JointRegion, ...]
    capacity: float
    load_range: tuple[float, float]
    spec_digest: str

    @property
    def regions(self) -> tuple[JointRegion, ...]:
        return self.joint

    @property
    def betas(self) -> np.ndarray:
        return np.array([[j.beta_yhat, j.beta_l, j.beta_y, j.beta_0] for j in self.joint])

    def constraints(self, k: int):
        """(A, b) with ``A @ (yhat, l, y) <= b`` describing joint region k, box excluded."""
        jr = self.joint[k]
        da, rt = self.da_regions[jr.da_id], self.rt_regions[jr.rt_id]
        A = np.array([
            [-1.0, 1.0, 0.0],   # l - yhat <= hi
            [1.0, -1.0, 0.0],   # l - yhat >= lo
            [1.0, 0.0, -1.0],   # yhat - y <= hi
            [-1.0, 0.0, 1.0],   # yhat - y >= lo
        ])
        return A, np.array([da.hi, -da.lo, rt.hi, -rt.lo])

    def domain_box(self):
        C = self.capacity
        l_min, l_max = self.load_range
        A = np.vstack([np.eye(3), -np.eye(3)])
        b = np.array([C, l_max, C, 0.0, -l_min, 0.0])
        return A, b

    def _check_domain(self, yhat, l, y):
        C = self.capacity
        l_min, l_max = self.load_range
        tc = _TOL * (1 + C)
        tl = _TOL * (1 + abs(l_min) + abs(l_max))
        if np.any(yhat < -tc) or np.any(yhat > C + tc):
            raise ParameterOutOfDomain(f"yhat outside [0, {C}]")
        if np.any(y < -tc) or np.any(y > C + tc):
            raise ParameterOutOfDomain(f"y outside [0, {C}]")
        if np.any(l < l_min - tl) or np.any(l > l_max + tl):
            raise ParameterOutOfDomain(f"l outside [{l_min}, {l_max}]")

    def locate_many(self, yhat, l, y) -> np.ndarray:
        """Joint region index per sample (lowest index on ties), -1 when uncovered."""
        yhat, l, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (yhat, l, y)))
        n_net = (l - yhat).ravel()
        dev = (yhat - y).ravel()
        da = np.stack([r.contains(n_net) for r in self.da_regions], axis=1)
        rt = np.stack([r.contains(dev) for r in self.rt_regions], axis=1)
        da_ids = np.array([j.da_id for j in self.joint])
        rt_ids = np.array([j.rt_id for j in self.joint])
        hit = da[:, da_ids] & rt[:, rt_ids]
        idx = np.argmax(hit, axis=1)
        idx[~hit.any(axis=1)] = -1
        return idx.reshape(yhat.shape)

    def _located(self, yhat, l, y):
        yhat, l, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (yhat, l, y)))
        self._check_domain(yhat, l, y)
        idx = self.locate_many(yhat, l, y)
        if np.any(idx < 0):
            bad = np.argwhere(idx.reshape(-1) < 0)[0, 0]
            raise PointNotCovered([yhat.ravel()[bad], l.ravel()[bad], y.ravel()[bad]])
        return yhat, l, y, idx

    def evaluate(self, yhat, l, y) -> np.ndarray:
        yhat, l, y, idx = self._located(yhat, l, y)
        B = self.betas[idx]
        return B[..., 0] * yhat + B[..., 1] * l + B[..., 2] * y + B[..., 3]

    def grad_yhat(self, yhat, l, y) -> np.ndarray:
        *_, idx = self._located(yhat, l, y)
        return self.betas[idx][..., 0]

    def to_dict(self) -> dict:
        def chan(rs):
            return [{"lo": r.lo, "hi": r.hi, "slope": r.slope, "intercept": r.intercept} for r in rs]

        return {
            "spec_digest": self.spec_digest,
            "capacity": self.capacity,
            "load_range": list(self.load_range),
            "da_regions": chan(self.da_regions),
            "rt_regions": chan(self.rt_regions),
            "joint": [
                {"da_id": j.da_id, "rt_id": j.rt_id, "beta_yhat": j.beta_yhat,
                 "beta_l": j.beta_l, "beta_y": j.beta_y, "beta_0": j.beta_0}
                for j in self.joint
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseLoss":
        def chan(rs):
            return tuple(ChannelRegion(float(r["lo"]), float(r["hi"]), float(r["slope"]), float(r["intercept"])) for r in rs)

        return cls(
            da_regions=chan(d["da_regions"]),
            rt_regions=chan(d["rt_regions"]),
            joint=tuple(
                JointRegion(int(j["da_id"]), int(j["rt_id"]), float(j["beta_yhat"]), float(j["beta_l"]),
                            float(j["beta_y"]), float(j["beta_0"]))
                for j in d["joint"]
            ),
            capacity=float(d["capacity"]),
            load_range=(float(d["load_range"][0]), float(d["load_range"][1])),
            spec_digest=str(d["spec_digest"]),
        )


def _channel_regions(partition) -> tuple[ChannelRegion, ...]:
    out = []
    for reg in partition.regions:
        lo, hi = reg.interval(partition.lower, partition.upper)
        slope, intercept = reg.cost_affine
        out.append(ChannelRegion(lo, hi, float(slope[0]), float(intercept)))
    return tuple(out)


def synthesize_loss(spec: DispatchSpec, seed: int = 0) -> PiecewiseLoss:
    """Derive the loss for ``spec`` by enumerating both subproblems' critical regions.

    Day-ahead cost ``a_D n + b_D`` contributes (-a_D, a_D, 0) to the
    (yhat, l, y) coefficients; real-time cost ``a_R delta + b_R`` contributes
    (a_R, 0, -a_R). Products whose lifted polyhedron has no interior inside the
    domain are dropped.
    """
    return derive(spec, seed)[0]


def derive(spec: DispatchSpec, seed: int = 0):
    """Like :func:`synthesize_loss` but also returns the (day-ahead, real-time) partitions."""
    da_part = enumerate_regions(parametric_day_ahead(spec), seed=seed)
    rt_part = enumerate_regions(parametric_real_time(spec), seed=seed)
    da = _channel_regions(da_part)
    rt = _channel_regions(rt_part)
    candidates = [
        JointRegion(i, k, -d.slope + r.slope, d.slope, -r.slope, d.intercept + r.intercept)
        for i, d in enumerate(da)
        for k, r in enumerate(rt)
    ]
    draft = PiecewiseLoss(da, rt, tuple(candidates), spec.wind_capacity, spec.load_range, spec.digest())
    Ab, bb = draft.domain_box()
    r_max = float(np.linalg.norm(bb[:3] + bb[3:]))
    kept = []
    for k, jr in enumerate(candidates):
        A, b = draft.constraints(k)
        radius, _ = lp_core.chebyshev_radius(np.vstack([A, Ab]), np.r_[b, bb], r_max)
        if radius >= MIN_RADIUS:
            kept.append(jr)
    pw = PiecewiseLoss(da, rt, tuple(kept), spec.wind_capacity, spec.load_range, spec.digest())
    return pw, da_part, rt_part


def loss_eval(pw: PiecewiseLoss, yhat: float, l: float, y: float) -> float:
    return float(pw.evaluate(yhat, l, y))


def loss_grad_yhat(pw: PiecewiseLoss, yhat: float, l: float, y: float) -> float:
    return float(pw.grad_yhat(yhat, l, y))


@dataclass(frozen=True)
class LossSlice:
    yhat: np.ndarray
    deviation: np.ndarray
    value: np.ndarray
    breakpoints: tuple[float, ...]
    segments: tuple[tuple[float, float, float], ...]


def loss_slice_1d(pw: PiecewiseLoss, l: float, y: float, n_points: int = 201) -> LossSlice:
    """Sample the loss along yhat in [0, C] with (l, y) fixed.

    ``segments`` holds (yhat_lo, yhat_hi, slope in yhat) for each affine piece;
    ``breakpoints`` are the deviations y - yhat where the slope changes.
    """
    C = pw.capacity
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    yhat = np.linspace(0.0, C, n_points)
    value = pw.evaluate(yhat, l, y)

    cuts = {0.0, C}
    for r in pw.da_regions:
        cuts.update((l - r.lo, l - r.hi))
    for r in pw.rt_regions:
        cuts.update((y + r.lo, y + r.hi))
    cuts = sorted(c for c in cuts if 0.0 <= c <= C)
    merged = [cuts[0]]
    for c in cuts[1:]:
        if c - merged[-1] > 1e-9 * (1 + C):
            merged.append(c)
    merged[-1] = C

    segments = []
    for a, b in zip(merged[:-1], merged[1:]):
        s = float(pw.grad_yhat(0.5 * (a + b), l, y))
        if segments and abs(segments[-1][2] - s) <= 1e-9 * (1 + abs(s)):
            segments[-1] = (segments[-1][0], b, s)
        else:
            segments.append((a, b, s))
    breakpoints = tuple(float(y - seg[1]) for seg in segments[:-1])
    return LossSlice(yhat, y - yhat, value, breakpoints, tuple(segments))
