"""MLP forecaster, three training modes and the RMSE / AMS metrics.

All modes share one loop: forward a batch, get dloss/dyhat per sample, backprop
through the network and take an Adam step. They differ only in where
dloss/dyhat comes from:

* ``quality``: 2 (yhat - y)
* ``value``: the yhat-slope of the derived piecewise loss in the sample's region
* ``diffopt``: both dispatch LPs solved fresh, slope read off the active set
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from . import dispatch, lp_core
from .data import FEATURES, Dataset
from .dispatch import DispatchSpec
from .errors import DegenerateAtPoint, DimensionMismatch, SpecMismatch
from .loss_synth import PiecewiseLoss


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 512
    epochs: int = 10
    hidden: tuple = (256, 256)
    seed: int = 0
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")

    @classmethod
    def desk(cls, **kw) -> "TrainConfig":
        """Shrunk network and batch for laptop-scale runs."""
        kw.setdefault("hidden", (64, 64))
        kw.setdefault("batch_size", 128)
        return cls(**kw)


@dataclass
class MlpModel:
    """ReLU MLP with a capacity-scaled logistic output, so yhat is always in [0, C].

    ``params`` is [W1, b1, W2, b2, ..., W_out, b_out]; inputs are z-scored with
    ``feat_mean`` / ``feat_std`` before the first layer.
    """

    params: list
    capacity: float
    feat_mean: np.ndarray
    feat_std: np.ndarray
    seed: int = 0

    @classmethod
    def init(cls, capacity, hidden=(256, 256), seed=0, n_features=len(FEATURES), feat_mean=None, feat_std=None):
        rng = np.random.default_rng(seed)
        sizes = [n_features, *hidden, 1]
        params = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
            params.append(np.zeros(fan_out))
        mean = np.zeros(n_features) if feat_mean is None else np.asarray(feat_mean, dtype=float)
        std = np.ones(n_features) if feat_std is None else np.asarray(feat_std, dtype=float)
        return cls(params, float(capacity), mean, std, seed)

    @classmethod
    def for_dataset(cls, dataset: Dataset, capacity, hidden=(256, 256), seed=0):
        """Initialize with normalization constants taken from ``dataset``."""
        std = dataset.features.std(axis=0)
        return cls.init(capacity, hidden, seed, dataset.features.shape[1], dataset.features.mean(axis=0),
                        np.where(std > 0, std, 1.0))

    @property
    def n_features(self) -> int:
        return self.params[0].shape[0]

    @property
    def hidden(self) -> tuple:
        return tuple(W.shape[1] for W in self.params[0:-2:2])

    def copy(self) -> "MlpModel":
        return replace(self, params=[p.copy() for p in self.params],
                       feat_mean=self.feat_mean.copy(), feat_std=self.feat_std.copy())

    def vector(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_vector(self, v):
        v = np.asarray(v, dtype=float)
        k = 0
        for p in self.params:
            p[...] = v[k : k + p.size].reshape(p.shape)
            k += p.size

    def _forward(self, s):
        s = np.atleast_2d(np.asarray(s, dtype=float))
        if s.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {s.shape[1]}")
        a = (s - self.feat_mean) / self.feat_std
        acts = [a]
        for W, b in zip(self.params[0:-2:2], self.params[1:-2:2]):
            a = np.maximum(a @ W + b, 0.0)
            acts.append(a)
        z = (a @ self.params[-2] + self.params[-1])[:, 0]
        sig = expit(z)
        return self.capacity * sig, (acts, sig)

    def predict(self, s) -> np.ndarray:
        return self._forward(s)[0]

    def backward(self, cache, dyhat) -> list:
        """Parameter gradients of ``sum(dyhat * yhat)``."""
        acts, sig = cache
        delta = (np.asarray(dyhat, dtype=float) * self.capacity * sig * (1.0 - sig))[:, None]
        grads = [None] * len(self.params)
        n_layers = len(self.params) // 2
        for k in reversed(range(n_layers)):
            W = self.params[2 * k]
            grads[2 * k] = acts[k].T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k:
                delta = (delta @ W.T) * (acts[k] > 0)
        return grads

    def to_dict(self) -> dict:
        return {
            "architecture": {"n_features": self.n_features, "hidden": list(self.hidden),
                             "activation": "relu", "output": "capacity*logistic"},
            "capacity": self.capacity,
            "seed": self.seed,
            "feat_mean": self.feat_mean.tolist(),
            "feat_std": self.feat_std.tolist(),
            "params": [p.tolist() for p in self.params],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        params = [np.asarray(p, dtype=float) for p in d["params"]]
        return cls(params, float(d["capacity"]), np.asarray(d["feat_mean"], dtype=float),
                   np.asarray(d["feat_std"], dtype=float), int(d.get("seed", 0)))


def mlp_forward(model: MlpModel, s):
    yhat = model.predict(s)
    return float(yhat[0]) if np.ndim(s) == 1 else yhat


class Adam:
    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.lr, (self.b1, self.b2), self.eps = lr, betas, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class Metrics:
    rmse: float
    ams: float | None = None
    wall_time: float = 0.0
    loss_trace: list = field(default_factory=list)


def _fit(model: MlpModel, dataset: Dataset, cfg: TrainConfig, loss_and_slope):
    """Shared minibatch loop. ``loss_and_slope(yhat, batch_idx)`` returns
    per-sample loss values and d loss / d yhat."""
    model = model.copy()
    opt = Adam(model.params, cfg.learning_rate, cfg.betas, cfg.eps)
    rng = np.random.default_rng(cfg.seed)
    n = len(dataset)
    trace = []
    t0 = time.perf_counter()
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            yhat, cache = model._forward(dataset.features[idx])
            loss, slope = loss_and_slope(yhat, idx)
            total += float(np.sum(loss))
            grads = model.backward(cache, slope / idx.size)
            opt.step(model.params, grads)
        trace.append(total / n)
    wall = time.perf_counter() - t0
    return model, Metrics(rmse=rmse(model, dataset), wall_time=wall, loss_trace=trace)


def train_quality(model: MlpModel, dataset: Dataset, cfg: TrainConfig):
    def mse(yhat, idx):
        err = yhat - dataset.y[idx]
        return err * err, 2.0 * err

    return _fit(model, dataset, cfg, mse)


def train_value(model: MlpModel, dataset: Dataset, pw: PiecewiseLoss, cfg: TrainConfig, spec: DispatchSpec | None = None):
    """Minimize the mean derived loss; the per-sample gradient is the region's yhat slope."""
    if spec is not None and spec.digest() != pw.spec_digest:
        raise SpecMismatch("loss was derived for a different dispatch spec")
    if abs(model.capacity - pw.capacity) > 1e-12 * (1 + pw.capacity):
        raise SpecMismatch(f"model capacity {model.capacity} != loss capacity {pw.capacity}")
    betas = pw.betas

    def value(yhat, idx):
        l, y = dataset.l[idx], dataset.y[idx]
        k = pw._located(yhat, l, y)[3]
        B = betas[k]
        return B[:, 0] * yhat + B[:, 1] * l + B[:, 2] * y + B[:, 3], B[:, 0]

    return _fit(model, dataset, cfg, value)


class _DispatchSlopes:
    """Fresh-LP cost and d cost / d yhat for one dispatch spec."""

    def __init__(self, spec: DispatchSpec):
        self.spec = spec
        G_D, w_D, F_D = dispatch.day_ahead_blocks(spec)
        G_R, w_R, F_R = dispatch.real_time_blocks(spec)
        fold = np.array([[1.0], [-1.0]])
        self.groups_da = lp_core.pair_rows(G_D, np.hstack([w_D[:, None], F_D @ fold]))
        self.groups_rt = lp_core.pair_rows(G_R, np.hstack([w_R[:, None], F_R @ fold]))
        # net load l - yhat falls as yhat rises; deviation yhat - y rises
        self.dh_da = F_D @ np.array([-1.0, 1.0])
        self.dh_rt = F_R @ np.array([1.0, -1.0])

    def __call__(self, yhat, l, y):
        total = slope = 0.0
        for lp, groups, dh in (
            (dispatch.build_day_ahead(self.spec, yhat, l), self.groups_da, self.dh_da),
            (dispatch.build_real_time(self.spec, yhat, y), self.groups_rt, self.dh_rt),
        ):
            sol = lp_core.solve_strict(lp)
            if lp_core.check_nondegenerate(lp, sol, groups=groups).degenerate:
                raise DegenerateAtPoint([yhat, l, y], "dispatch LP at this sample")
            total += sol.objective
            slope += lp_core.rhs_sensitivity(lp, sol, dh, groups)
        return total, slope


def diffopt_slopes(spec: DispatchSpec, yhat, l, y):
    """Per-sample (cost, d cost / d yhat) from fresh LP solves."""
    f = _DispatchSlopes(spec)
    out = np.array([f(a, b, c) for a, b, c in zip(np.atleast_1d(yhat), np.atleast_1d(l), np.atleast_1d(y))])
    return out[:, 0], out[:, 1]


def train_diffopt(model: MlpModel, dataset: Dataset, spec: DispatchSpec, cfg: TrainConfig):
    """Baseline that re-solves both dispatch LPs for every sample at every step."""
    f = _DispatchSlopes(spec)

    def fresh(yhat, idx):
        out = np.array([f(a, b, c) for a, b, c in zip(yhat, dataset.l[idx], dataset.y[idx])])
        return out[:, 0], out[:, 1]

    return _fit(model, dataset, cfg, fresh)


def rmse(model: MlpModel, dataset: Dataset) -> float:
    err = dataset.y - model.predict(dataset.features)
    return float(np.sqrt(np.mean(err * err)))


def ams(model: MlpModel, dataset: Dataset, spec: DispatchSpec) -> float:
    """Average two-stage operation cost, always from fresh LP solves."""
    yhat = model.predict(dataset.features)
    return float(np.mean([dispatch.operation_cost(spec, a, b, c) for a, b, c in zip(yhat, dataset.l, dataset.y)]))


def evaluate(model: MlpModel, dataset: Dataset, spec: DispatchSpec) -> Metrics:
    return Metrics(rmse=rmse(model, dataset), ams=ams(model, dataset, spec))
