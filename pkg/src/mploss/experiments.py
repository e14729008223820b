"""Capacity sweep and training-time comparison on synthetic data."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .data import generate_synthetic
from .dispatch import DEFICIT_DEAR, DispatchSpec
from .loss_synth import synthesize_loss
from .train_eval import MlpModel, TrainConfig, evaluate, train_diffopt, train_quality, train_value


@dataclass
class SweepRow:
    capacity: float
    rmse_value: float
    rmse_quality: float
    ams_value: float
    ams_quality: float

    @property
    def ams_gap(self) -> float:
        return self.ams_value - self.ams_quality


def capacity_sweep(
    capacities=(10.0, 20.0, 28.0),
    base_spec: DispatchSpec = DEFICIT_DEAR,
    n_train: int = 2000,
    n_test: int = 500,
    cfg: TrainConfig | None = None,
    data_seed: int = 1,
) -> list[SweepRow]:
    """Train quality- and value-oriented models per wind capacity and score them on a test split.

    The same feature draws are reused at every capacity; only the realized
    power scales with capacity.
    """
    cfg = cfg or TrainConfig.desk(epochs=100)
    rows = []
    for C in capacities:
        spec = base_spec.with_capacity(C)
        pw = synthesize_loss(spec)
        data = generate_synthetic(n_train + n_test, C, spec.load_range, seed=data_seed)
        train, test = data[:n_train], data[n_train:]
        init = MlpModel.for_dataset(train, C, cfg.hidden, seed=cfg.seed)
        mq, _ = train_quality(init, train, cfg)
        mv, _ = train_value(init, train, pw, cfg, spec)
        eq, ev = evaluate(mq, test, spec), evaluate(mv, test, spec)
        rows.append(SweepRow(C, ev.rmse, eq.rmse, ev.ams, eq.ams))
    return rows


def timing_comparison(spec: DispatchSpec = DEFICIT_DEAR, n_samples: int = 512, epochs: int = 1,
                      cfg: TrainConfig | None = None, data_seed: int = 2) -> dict:
    """Wall-clock seconds of each training mode on identical data, epochs and seed."""
    cfg = cfg or TrainConfig.desk(epochs=epochs)
    data = generate_synthetic(n_samples, spec.wind_capacity, spec.load_range, seed=data_seed)
    t0 = time.perf_counter()
    pw = synthesize_loss(spec)
    derive = time.perf_counter() - t0
    init = MlpModel.for_dataset(data, spec.wind_capacity, cfg.hidden, seed=cfg.seed)
    out = {"derive": derive}
    _, m = train_quality(init, data, cfg)
    out["quality"] = m.wall_time
    _, m = train_value(init, data, pw, cfg, spec)
    out["value"] = m.wall_time
    _, m = train_diffopt(init, data, spec, cfg)
    out["diffopt"] = m.wall_time
    return out
