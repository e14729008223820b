"""Wind/load samples: CSV ingestion, serialization and a seeded synthetic generator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import MalformedCsv, SchemaViolation

COLUMNS = ("timestamp", "ws10", "wd10", "ws100", "wd100", "load_kw", "wind_kw")
FEATURES = ("ws10", "wd10", "ws100", "wd100")


@dataclass(frozen=True)
class Sample:
    s: tuple
    y: float
    l: float
    timestamp: str


@dataclass
class Dataset:
    features: np.ndarray
    y: np.ndarray
    l: np.ndarray
    timestamps: list

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float)).reshape(-1, len(FEATURES))
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.l = np.asarray(self.l, dtype=float).reshape(-1)
        self.timestamps = list(self.timestamps)
        n = self.features.shape[0]
        if not (self.y.shape == (n,) and self.l.shape == (n,) and len(self.timestamps) == n):
            raise ValueError("dataset columns have different lengths")

    def __len__(self):
        return self.y.shape[0]

    def __getitem__(self, idx) -> "Dataset":
        idx = np.atleast_1d(np.arange(len(self))[idx])
        return Dataset(self.features[idx], self.y[idx], self.l[idx], [self.timestamps[i] for i in idx])

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        samples = list(samples)
        return cls(
            np.array([s.s for s in samples], dtype=float).reshape(-1, len(FEATURES)),
            [s.y for s in samples],
            [s.l for s in samples],
            [s.timestamp for s in samples],
        )

    def samples(self) -> list[Sample]:
        return [
            Sample(tuple(map(float, f)), float(y), float(l), t)
            for f, y, l, t in zip(self.features, self.y, self.l, self.timestamps)
        ]

    def check(self, capacity: float | None = None, load_range=None):
        """Raise SchemaViolation listing every sample outside the admissible box."""
        bad = []
        for i in range(len(self)):
            why = _row_problem(self.features[i], self.y[i], self.l[i], capacity, load_range)
            if why:
                bad.append(f"sample {i}: {why}")
        if bad:
            raise SchemaViolation("; ".join(bad[:20]) + (f" (+{len(bad) - 20} more)" if len(bad) > 20 else ""))


def _row_problem(feats, y, l, capacity, load_range) -> str:
    if not all(math.isfinite(v) for v in (*feats, y, l)):
        return "non-finite value"
    if y < 0 or (capacity is not None and y > capacity):
        return f"wind_kw={y} outside [0, {capacity if capacity is not None else 'inf'}]"
    if load_range is not None and not (load_range[0] <= l <= load_range[1]):
        return f"load_kw={l} outside [{load_range[0]}, {load_range[1]}]"
    return ""


def load_dataset(path, capacity: float | None = None, load_range=None) -> Dataset:
    """Read a dataset CSV, keeping file order.

    Raises MalformedCsv for a wrong header or unparsable cell and
    SchemaViolation (with line numbers) for rows outside the admissible box.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file, expected header {','.join(COLUMNS)}") from None
        header = [h.strip() for h in header]
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise MalformedCsv(f"{path}: header lacks columns {missing}")
        col = {c: header.index(c) for c in COLUMNS}
        feats, ys, ls, stamps, bad = [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedCsv(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                f = [float(row[col[c]]) for c in FEATURES]
                l = float(row[col["load_kw"]])
                y = float(row[col["wind_kw"]])
            except ValueError as exc:
                raise MalformedCsv(f"{path}:{lineno}: {exc}") from None
            why = _row_problem(f, y, l, capacity, load_range)
            if why:
                bad.append(f"line {lineno}: {why}")
                continue
            feats.append(f)
            ys.append(y)
            ls.append(l)
            stamps.append(row[col["timestamp"]].strip())
    if bad:
        raise SchemaViolation(f"{path}: " + "; ".join(bad))
    return Dataset(np.array(feats, dtype=float).reshape(-1, len(FEATURES)), ys, ls, stamps)


def save_dataset(ds: Dataset, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for f, l, y, t in zip(ds.features, ds.l, ds.y, ds.timestamps):
            w.writerow([t, *(repr(float(v)) for v in f), repr(float(l)), repr(float(y))])


def power_curve(ws):
    """Normalized turbine output: cubic ramp from 3 m/s to rated at 12 m/s, cut-out at 25 m/s."""
    ws = np.asarray(ws, dtype=float)
    ramp = np.clip((ws**3 - 27.0) / (12.0**3 - 27.0), 0.0, 1.0)
    return np.where(ws >= 25.0, 0.0, ramp)


def generate_synthetic(n: int, capacity: float, load_range, seed: int = 0, start: str = "2022-01-01T00:00") -> Dataset:
    """Hourly samples with NWP-like features and a noisy realized wind power.

    Realized power is ``capacity * power_curve(true hub speed)``, where the true
    speed deviates multiplicatively from the 100 m estimate, so the target is
    proportional to capacity and carries irreducible error.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    z = np.empty(n)
    z_prev = 0.0
    for i, e in enumerate(rng.normal(size=n)):
        z_prev = 0.95 * z_prev + np.sqrt(1 - 0.95**2) * e
        z[i] = z_prev
    ws100 = np.clip(8.0 * np.exp(0.45 * z), 0.0, 30.0)
    ws10 = ws100 * 0.1**0.14 * np.exp(0.05 * rng.normal(size=n))
    wd100 = (220.0 + 50.0 * np.sin(2 * np.pi * t / 168.0) + 25.0 * rng.normal(size=n)) % 360.0
    wd10 = (wd100 + 12.0 + 6.0 * rng.normal(size=n)) % 360.0

    true_ws = ws100 * np.exp(0.18 * rng.normal(size=n))
    wake = 1.0 - 0.08 * np.cos(np.deg2rad(wd100 - 270.0)) ** 2
    y = np.clip(capacity * power_curve(true_ws) * wake, 0.0, capacity)

    l_min, l_max = load_range
    hour = t % 24
    shape = 0.5 + 0.35 * np.sin(2 * np.pi * (hour - 8) / 24.0) + 0.08 * rng.normal(size=n)
    l = l_min + (l_max - l_min) * np.clip(shape, 0.0, 1.0)

    t0 = datetime.fromisoformat(start)
    stamps = [(t0 + timedelta(hours=int(k))).strftime("%Y-%m-%dT%H:%M") for k in t]
    return Dataset(np.column_stack([ws10, wd10, ws100, wd100]), y, l, stamps)
