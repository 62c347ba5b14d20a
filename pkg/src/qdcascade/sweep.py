"""Declarative parameter sweeps with deterministic, resumable execution.

A sweep spec is a JSON document:

    {
      "base": { ... SystemConfig ... },
      "axes": [
        {"path": "cavity.hbar_g", "values": [100, 200]},
        {"path": "purcell.f_p", "linspace": [1, 50, 11]}
      ],
      "derived": [{"set": "cavity.hbar_kappa", "rule": "kappa_from_purcell"}],
      "metrics": {"compute_channels": ["XX"], "two_photon": false}
    }

Axis paths either resolve directly in SystemConfig or name one of the
sweep symbols consumed by derived rules:

    purcell.f_p         -> kappa_from_purcell / g_from_purcell
    cascade.rate_ratio  -> gamma_xx_from_ratio (total XX over X decay)

Points run in cartesian-product order of the axes (last axis fastest).
Execution order is free (a process pool is used for workers > 1) but every
output is committed in point order, so two runs of the same spec produce
byte-identical CSVs regardless of scheduling, and a resumed run finishes
with the same bytes as an uninterrupted one.  Wall-clock times go to the
run manifest, never into the CSV.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__ as code_version
from .config import SystemConfig, config_from_dict, config_to_dict, set_by_path, validate
from .errors import CorruptCheckpoint, InvalidField
from .metrics import MetricsOptions, PhotonMetrics, metrics_bundle
from .purcell import g_for_purcell, kappa_for_purcell

SYMBOL_PATHS = ("purcell.f_p", "cascade.rate_ratio")
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class SweepAxis:
    path: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class DerivedRule:
    set: str
    rule: str


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    axes: tuple[SweepAxis, ...] = ()
    derived: tuple[DerivedRule, ...] = ()
    metrics: MetricsOptions = field(default_factory=MetricsOptions)

    @property
    def n_points(self) -> int:
        n = 1
        for ax in self.axes:
            n *= len(ax.values)
        return n

    def point_values(self, index: int) -> dict[str, float]:
        shape = [len(ax.values) for ax in self.axes]
        out = {}
        rem = index
        for dim in range(len(shape) - 1, -1, -1):
            rem, k = divmod(rem, shape[dim])
            out[self.axes[dim].path] = self.axes[dim].values[k]
        return {ax.path: out[ax.path] for ax in self.axes}

    def config_at(self, index: int) -> SystemConfig:
        values = self.point_values(index)
        config = self.base
        symbols: dict[str, float] = {}
        for path, value in values.items():
            if path in SYMBOL_PATHS:
                symbols[path] = value
            else:
                config = set_by_path(config, path, value)
        for rule in self.derived:
            config = _apply_rule(config, rule, symbols)
        return config


def _apply_rule(config: SystemConfig, rule: DerivedRule, symbols: dict[str, float]) -> SystemConfig:
    el = config.electronic
    if rule.rule == "kappa_from_purcell":
        f_p = symbols["purcell.f_p"]
        return set_by_path(config, rule.set,
                           kappa_for_purcell(f_p, config.cavity.hbar_g, el.hbar_gamma_rad))
    if rule.rule == "g_from_purcell":
        f_p = symbols["purcell.f_p"]
        return set_by_path(config, rule.set,
                           g_for_purcell(f_p, config.cavity.hbar_kappa, el.hbar_gamma_rad))
    if rule.rule == "gamma_xx_from_ratio":
        ratio = symbols["cascade.rate_ratio"]
        return set_by_path(config, rule.set, ratio * el.hbar_gamma_rad / 2.0)
    raise InvalidField(f"derived.{rule.rule}", "unknown derived rule")


def spec_from_dict(doc: dict) -> SweepSpec:
    if "base" not in doc:
        raise InvalidField("base", "sweep spec needs a base configuration")
    base = config_from_dict(doc["base"])
    axes = []
    for i, ax in enumerate(doc.get("axes", [])):
        path = ax.get("path")
        if path is None:
            raise InvalidField(f"axes[{i}].path", "missing")
        if "values" in ax:
            values = tuple(float(v) for v in ax["values"])
        elif "linspace" in ax:
            lo, hi, n = ax["linspace"]
            values = tuple(float(v) for v in np.linspace(lo, hi, int(n)))
        else:
            raise InvalidField(f"axes[{i}]", "needs 'values' or 'linspace'")
        if path not in SYMBOL_PATHS:
            set_by_path(base, path, values[0])  # raises InvalidField on bad paths
        axes.append(SweepAxis(path=path, values=values))
    derived = tuple(DerivedRule(set=r["set"], rule=r["rule"]) for r in doc.get("derived", []))
    m = doc.get("metrics", {})
    metrics = MetricsOptions(
        channel_mode=m.get("channel_mode", "H"),
        compute_channels=tuple(m.get("compute_channels", ("X", "XX"))),
        two_photon=m.get("two_photon", True),
        fss_phase=m.get("fss_phase", True),
        swap_arms=m.get("swap_arms", False),
        pulse_in_tau=m.get("pulse_in_tau", True),
    )
    return SweepSpec(base=base, axes=tuple(axes), derived=derived, metrics=metrics)


def spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "base": config_to_dict(spec.base),
        "axes": [{"path": ax.path, "values": list(ax.values)} for ax in spec.axes],
        "derived": [{"set": r.set, "rule": r.rule} for r in spec.derived],
        "metrics": {
            "channel_mode": spec.metrics.channel_mode,
            "compute_channels": list(spec.metrics.compute_channels),
            "two_photon": spec.metrics.two_photon,
            "fss_phase": spec.metrics.fss_phase,
            "swap_arms": spec.metrics.swap_arms,
            "pulse_in_tau": spec.metrics.pulse_in_tau,
        },
    }


def spec_hash(spec: SweepSpec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class SweepRecord:
    index: int
    axes: dict[str, float]
    metrics_row: Optional[list[str]]      # PhotonMetrics.csv_row(), already formatted
    error: Optional[str]
    wall_time: float


@dataclass
class SweepResult:
    spec: SweepSpec
    spec_hash: str
    records: list[SweepRecord]

    @property
    def completion(self) -> np.ndarray:
        done = np.zeros(self.spec.n_points, dtype=bool)
        for r in self.records:
            done[r.index] = True
        return done

    def csv_header(self) -> list[str]:
        return (["index"] + [ax.path for ax in self.spec.axes]
                + list(PhotonMetrics.CSV_COLUMNS) + ["error"])

    def write_csv(self, path) -> None:
        records = sorted(self.records, key=lambda r: r.index)
        with open(path, "w") as fh:
            fh.write(",".join(self.csv_header()) + "\n")
            for r in records:
                axis_cols = [repr(float(v)) for v in r.axes.values()]
                if r.metrics_row is not None:
                    row = [str(r.index)] + axis_cols + r.metrics_row + [""]
                else:
                    empty = [""] * len(PhotonMetrics.CSV_COLUMNS)
                    row = [str(r.index)] + axis_cols + empty + [json.dumps(r.error)]
                fh.write(",".join(row) + "\n")

    def write_manifest(self, path, workers: int, total_wall: float) -> None:
        doc = {
            "spec_hash": self.spec_hash,
            "code_version": code_version,
            "n_points": self.spec.n_points,
            "workers": workers,
            "total_wall_time_s": total_wall,
            "wall_times_s": {r.index: r.wall_time for r in sorted(self.records, key=lambda r: r.index)},
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def _evaluate_point(spec_doc: dict, index: int) -> tuple[int, Optional[list[str]], Optional[str], float]:
    spec = spec_from_dict(spec_doc)
    start = time.perf_counter()
    try:
        config = spec.config_at(index)
        metrics = metrics_bundle(validate(config), spec.metrics)
        return index, metrics.csv_row(), None, time.perf_counter() - start
    except Exception as exc:  # per-point failures are recorded, not fatal
        return index, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start


def _checkpoint_header(spec: SweepSpec) -> dict:
    return {"version": CHECKPOINT_VERSION, "spec_hash": spec_hash(spec),
            "n_points": spec.n_points}


def load_checkpoint(path, spec: SweepSpec) -> list[SweepRecord]:
    """Records completed so far; raises CorruptCheckpoint on any mismatch."""
    records = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CorruptCheckpoint("empty checkpoint", record_index=-1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise CorruptCheckpoint("unreadable checkpoint header", record_index=-1)
    if header.get("spec_hash") != spec_hash(spec):
        raise CorruptCheckpoint("checkpoint spec hash does not match the sweep spec",
                                record_index=-1)
    seen = set()
    for ln, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            index = int(doc["index"])
            if not (0 <= index < spec.n_points) or index in seen:
                raise ValueError("bad index")
            rec = SweepRecord(index=index, axes=doc["axes"],
                              metrics_row=doc.get("metrics_row"),
                              error=doc.get("error"), wall_time=doc.get("wall_time", 0.0))
        except (KeyError, ValueError, json.JSONDecodeError):
            raise CorruptCheckpoint(f"unreadable checkpoint record {ln}", record_index=ln)
        seen.add(index)
        records.append(rec)
    return records


def run_sweep(spec: SweepSpec, out_dir=None, workers: int = 1,
              resume: bool = False, progress: bool = False) -> SweepResult:
    """Evaluate every point of the spec; checkpoint after each point.

    With out_dir set, writes checkpoint.jsonl, results.csv and
    manifest.json there.  resume=True reuses an existing checkpoint.
    """
    out_dir = Path(out_dir) if out_dir is not None else None
    ckpt_path = out_dir / "checkpoint.jsonl" if out_dir else None
    records: list[SweepRecord] = []
    if resume and ckpt_path is not None and ckpt_path.exists():
        records = load_checkpoint(ckpt_path, spec)
    done = {r.index for r in records}
    todo = [i for i in range(spec.n_points) if i not in done]

    start_total = time.perf_counter()
    ckpt_fh = None
    if ckpt_path is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        fresh = not (resume and ckpt_path.exists())
        ckpt_fh = open(ckpt_path, "w" if fresh else "a")
        if fresh:
            ckpt_fh.write(json.dumps(_checkpoint_header(spec), sort_keys=True) + "\n")
            ckpt_fh.flush()

    def commit(index, metrics_row, error, wall):
        rec = SweepRecord(index=index, axes=spec.point_values(index),
                          metrics_row=metrics_row, error=error, wall_time=wall)
        records.append(rec)
        if ckpt_fh is not None:
            doc = {"index": index, "axes": rec.axes, "wall_time": wall}
            if metrics_row is not None:
                doc["metrics_row"] = metrics_row
            if error is not None:
                doc["error"] = error
            ckpt_fh.write(json.dumps(doc, sort_keys=True) + "\n")
            ckpt_fh.flush()
        if progress:
            status = "ok" if error is None else f"ERROR {error}"
            print(f"[{len(records)}/{spec.n_points}] point {index}: {status}", flush=True)

    spec_doc = spec_to_dict(spec)
    try:
        if workers <= 1:
            for i in todo:
                commit(*_evaluate_point(spec_doc, i))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(_evaluate_point, spec_doc, i): i for i in todo}
                for fut in as_completed(futures):
                    commit(*fut.result())
    finally:
        if ckpt_fh is not None:
            ckpt_fh.close()

    result = SweepResult(spec=spec, spec_hash=spec_hash(spec), records=records)
    if out_dir is not None:
        result.write_csv(out_dir / "results.csv")
        result.write_manifest(out_dir / "manifest.json", workers,
                              time.perf_counter() - start_total)
    return result


def resume_sweep(out_dir, spec: SweepSpec, workers: int = 1, progress: bool = False) -> SweepResult:
    """Complete the missing points of a checkpointed sweep."""
    return run_sweep(spec, out_dir=out_dir, workers=workers, resume=True, progress=progress)
