"""Command-line entry point: ``mploss derive|train|evaluate|slice|gen-data``.

Every artifact goes under ``--out``. JSON is written with sorted keys and no
timestamps so reruns with the same config and seed are byte-identical
(training metrics carry ``wall_time`` and are the one exception).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import schemas
from .data import Dataset, generate_synthetic, load_dataset, save_dataset
from .dispatch import CANONICAL, DEFICIT_DEAR, DispatchSpec, perturb_spec
from .errors import ConfigError, MplossError, SpecMismatch
from .loss_synth import PiecewiseLoss, derive, loss_slice_1d
from .mplp import validate_partition
from .train_eval import MlpModel, TrainConfig, evaluate, train_diffopt, train_quality, train_value

NAMED_SPECS = {"canonical": CANONICAL, "deficit_dear": DEFICIT_DEAR}
MODES = ("value", "quality", "diffopt")
N_VALIDATE = 10_000


@dataclass
class RunConfig:
    spec: DispatchSpec
    train: TrainConfig = field(default_factory=TrainConfig.desk)
    train_path: Path | None = None
    test_path: Path | None = None
    loss_path: Path | None = None
    n_train: int = 2000
    n_test: int = 500
    data_seed: int = 0
    derive_seed: int = 0

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        schemas.check(doc, schemas.CONFIG, str(path))
        return cls.from_dict(doc, path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path = Path(".")) -> "RunConfig":
        def resolve(p, must_exist=True):
            if p is None:
                return None
            p = (base / p) if not Path(p).is_absolute() else Path(p)
            if must_exist and not p.is_file():
                raise ConfigError(f"referenced file {p} not found")
            return p

        spec = doc.get("spec", "canonical")
        if isinstance(spec, str):
            if spec in NAMED_SPECS:
                spec = NAMED_SPECS[spec]
            else:
                spec_path = resolve(spec)
                try:
                    spec = DispatchSpec.from_dict(json.loads(spec_path.read_text()))
                except (json.JSONDecodeError, TypeError) as exc:
                    raise ConfigError(f"{spec_path}: unreadable spec ({exc})") from None
        else:
            spec = DispatchSpec.from_dict(spec)
        data = doc.get("data", {})
        return cls(
            spec=spec,
            train=TrainConfig.desk(**doc.get("train", {})),
            train_path=resolve(data.get("train")),
            test_path=resolve(data.get("test")),
            loss_path=resolve(doc.get("loss")),
            n_train=data.get("n_train", 2000),
            n_test=data.get("n_test", 500),
            data_seed=data.get("seed", 0),
            derive_seed=doc.get("derive_seed", 0),
        )


def _write_json(path: Path, doc, schema=None, what=""):
    if schema is not None:
        schemas.check(doc, schema, what or path.name)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_loss(path) -> PiecewiseLoss:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read loss {path}: {exc}") from None
    schemas.check(doc, schemas.LOSS, str(path))
    return PiecewiseLoss.from_dict(doc)


def _loss_for(cfg: RunConfig) -> PiecewiseLoss:
    if cfg.loss_path is None:
        return derive(cfg.spec, cfg.derive_seed)[0]
    pw = read_loss(cfg.loss_path)
    if pw.spec_digest != cfg.spec.digest():
        raise SpecMismatch(f"loss {cfg.loss_path} was derived for spec {pw.spec_digest[:12]}, "
                           f"config spec is {cfg.spec.digest()[:12]}")
    return pw


def _dataset(cfg: RunConfig, which: str) -> Dataset:
    path = cfg.train_path if which == "train" else cfg.test_path
    if path is None:
        raise ConfigError(f"config has no data.{which} path (run gen-data first)")
    return load_dataset(path, cfg.spec.wind_capacity, cfg.spec.load_range)


def _report_dict(rep) -> dict:
    return {"n_samples": rep.n_samples, "failures": len(rep.failures),
            "max_map_error": rep.max_map_error, "max_cost_error": rep.max_cost_error, "ok": rep.ok}


def cmd_derive(cfg: RunConfig, out: Path, seed: int | None = None):
    seed = cfg.derive_seed if seed is None else seed
    pw, da_part, rt_part = derive(cfg.spec, seed)
    da_rep = validate_partition(da_part, N_VALIDATE, seed=seed)
    rt_rep = validate_partition(rt_part, N_VALIDATE, seed=seed + 1)
    loss = pw.to_dict()
    _write_json(out / "loss.json", loss, schemas.LOSS)
    report = {
        "K_D": len(pw.da_regions),
        "K_R": len(pw.rt_regions),
        "n_joint": len(pw.joint),
        "spec_digest": pw.spec_digest,
        "da_regions": loss["da_regions"],
        "rt_regions": loss["rt_regions"],
        "joint": loss["joint"],
        "validation": {"day_ahead": _report_dict(da_rep), "real_time": _report_dict(rt_rep)},
    }
    _write_json(out / "regions.json", report, schemas.REGION_REPORT)
    if not (da_rep.ok and rt_rep.ok):
        raise MplossError(f"derived partition failed validation: day-ahead {len(da_rep.failures)}, "
                          f"real-time {len(rt_rep.failures)} failures")
    return report


def cmd_train(cfg: RunConfig, out: Path, mode: str, seed: int | None = None):
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    tcfg = cfg.train if seed is None else TrainConfig(**{**cfg.train.__dict__, "seed": seed})
    train = _dataset(cfg, "train")
    test = _dataset(cfg, "test") if cfg.test_path is not None else train
    C = cfg.spec.wind_capacity
    init = MlpModel.for_dataset(train, C, tcfg.hidden, seed=tcfg.seed)
    if mode == "quality":
        model, m = train_quality(init, train, tcfg)
    elif mode == "value":
        model, m = train_value(init, train, _loss_for(cfg), tcfg, cfg.spec)
    else:
        model, m = train_diffopt(init, train, cfg.spec, tcfg)
    ev = evaluate(model, test, cfg.spec)
    _write_json(out / f"checkpoint_{mode}.json", model.to_dict(), schemas.CHECKPOINT)
    metrics = {
        "mode": mode, "seed": tcfg.seed, "epochs": tcfg.epochs,
        "rmse": ev.rmse, "ams": ev.ams, "wall_time": m.wall_time,
        "train_rmse": m.rmse, "loss_trace": m.loss_trace,
        "n_train": len(train), "n_test": len(test), "spec_digest": cfg.spec.digest(),
    }
    _write_json(out / f"metrics_{mode}.json", metrics, schemas.METRICS)
    return metrics


def cmd_evaluate(cfg: RunConfig, out: Path, checkpoint):
    checkpoint = Path(checkpoint)
    try:
        doc = json.loads(checkpoint.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read checkpoint {checkpoint}: {exc}") from None
    schemas.check(doc, schemas.CHECKPOINT, str(checkpoint))
    model = MlpModel.from_dict(doc)
    C = cfg.spec.wind_capacity
    if abs(model.capacity - C) > 1e-12 * (1 + C):
        raise SpecMismatch(f"checkpoint capacity {model.capacity} != spec wind_capacity {C}")
    test = _dataset(cfg, "test")
    ev = evaluate(model, test, cfg.spec)
    result = {"rmse": ev.rmse, "ams": ev.ams, "n_samples": len(test), "spec_digest": cfg.spec.digest()}
    _write_json(out / "evaluation.json", result, schemas.EVALUATION)
    return result


def cmd_slice(cfg: RunConfig, out: Path, l: float, y: float, n_points: int = 201):
    pw = _loss_for(cfg)
    sl = loss_slice_1d(pw, l, y, n_points)
    with (out / "slice.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["yhat", "deviation", "value"])
        for row in zip(sl.yhat, sl.deviation, sl.value):
            w.writerow([repr(float(v)) for v in row])
    doc = {
        "l": float(l), "y": float(y),
        "breakpoints": list(sl.breakpoints),
        "segments": [{"yhat_lo": a, "yhat_hi": b, "slope": s} for a, b, s in sl.segments],
    }
    _write_json(out / "slice_breakpoints.json", doc, schemas.SLICE)
    return doc


def cmd_gen_data(cfg: RunConfig, out: Path, seed: int | None = None):
    seed = cfg.data_seed if seed is None else seed
    spec = cfg.spec
    ds = generate_synthetic(cfg.n_train + cfg.n_test, spec.wind_capacity, spec.load_range, seed=seed)
    save_dataset(ds[: cfg.n_train], out / "train.csv")
    save_dataset(ds[cfg.n_train :], out / "test.csv")
    return {"train": str(out / "train.csv"), "test": str(out / "test.csv")}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mploss", description="Derive and train with a dispatch-cost forecasting loss.")
    p.add_argument("command", choices=["derive", "train", "evaluate", "slice", "gen-data"])
    p.add_argument("--config", help="JSON run config (default: canonical spec, desk-scale training)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed for this command")
    p.add_argument("--mode", choices=MODES, default="value")
    p.add_argument("--checkpoint", help="checkpoint JSON for evaluate")
    p.add_argument("--l", type=float, default=None, help="load for slice")
    p.add_argument("--y", type=float, default=None, help="realized wind for slice")
    p.add_argument("--n-points", type=int, default=201)
    p.add_argument("--epochs", type=int, default=None, help="overrides train.epochs")
    p.add_argument("--perturb-seed", type=int, default=None,
                   help="jitter spec costs/bounds with this seed to break degenerate ties")
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig(spec=CANONICAL)
    if args.perturb_seed is not None:
        cfg.spec = perturb_spec(cfg.spec, seed=args.perturb_seed)
    if args.epochs is not None:
        cfg.train = TrainConfig(**{**cfg.train.__dict__, "epochs": args.epochs})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "derive":
        return cmd_derive(cfg, out, args.seed)
    if args.command == "train":
        return cmd_train(cfg, out, args.mode, args.seed)
    if args.command == "evaluate":
        if not args.checkpoint:
            raise ConfigError("evaluate needs --checkpoint")
        return cmd_evaluate(cfg, out, args.checkpoint)
    if args.command == "slice":
        l_min, l_max = cfg.spec.load_range
        l = 0.5 * (l_min + l_max) if args.l is None else args.l
        y = 0.5 * cfg.spec.wind_capacity if args.y is None else args.y
        return cmd_slice(cfg, out, l, y, args.n_points)
    return cmd_gen_data(cfg, out, args.seed)


def main(argv=None) -> int:
    try:
        run(argv)
    except (MplossError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
