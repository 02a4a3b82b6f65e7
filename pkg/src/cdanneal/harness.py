"""Experiment orchestration: seeded ensembles, enhancement metrics, reports.

The whole pipeline is a reproducibility instrument: every instance seed is a
pure function of (master seed, instance index), records are merged in task
order regardless of worker count, and emitted files embed the configuration
hash.  Timing capture is opt-in so that default runs are byte-identical
across invocations.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import __version__
from .errors import ParameterError, SingularGaugeError
from .gauge import Ansatz, assemble_hamiltonian
from .problem import (
    STATEVECTOR_CAP,
    generate_instance,
    ground_state,
    instance_seed,
)
from .schedule import Schedule
from .simulator import sample_shots, success_probability, trotter_evolve
from .spectrum import gap_curve, operator_norm

#: Baseline ratios with a smaller denominator than this are left out of the
#: enhancement mean (single instances would dominate it) but kept in the
#: enhanced-fraction count.
ZERO_BASELINE_FLOOR = 1e-12

#: Histogram binning for success-probability distributions.
HISTOGRAM_BINS = 50

_CSV_HEADER = (
    "instance_id,n,seed,degenerate,excluded,ansatz,P_s,wall_ms,"
    "entangling_count,delta_min"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Ensemble sweep parameters; round-trips losslessly through JSON."""

    master_seed: int = 20220301
    n_values: tuple[int, ...] = (4, 6, 8, 10, 12)
    instances_per_n: int = 200
    total_time: float = 1.0
    trotter_steps: int = 20
    ansatz: tuple[str, ...] = ("none", "local-y", "nc1")
    shots: int | None = None
    output_dir: str = "runs"
    jobs: int = 1
    compute_gaps: bool = False
    gap_samples: int = 201
    record_timings: bool = False

    def __post_init__(self):
        if self.instances_per_n < 1:
            raise ParameterError("instances_per_n must be >= 1")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ParameterError("n_values must be non-empty positive integers")
        if any(n > STATEVECTOR_CAP for n in self.n_values):
            raise ParameterError(
                f"n_values exceed the state-vector cap {STATEVECTOR_CAP}"
            )
        if self.trotter_steps < 1:
            raise ParameterError("trotter_steps must be >= 1")
        if self.total_time <= 0.0:
            raise ParameterError("total_time must be positive")
        if self.jobs < 1:
            raise ParameterError("jobs must be >= 1")
        if self.shots is not None and self.shots < 1:
            raise ParameterError("shots must be >= 1 when set")
        if self.gap_samples < 2:
            raise ParameterError("gap_samples must be >= 2")
        for tag in self.ansatz:
            Ansatz.parse(tag)

    def to_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["n_values"] = list(self.n_values)
        payload["ansatz"] = list(self.ansatz)
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ParameterError(f"unknown config fields {sorted(unknown)}")
        kwargs = dict(payload)
        if "n_values" in kwargs:
            kwargs["n_values"] = tuple(int(v) for v in kwargs["n_values"])
        if "ansatz" in kwargs:
            kwargs["ansatz"] = tuple(str(v) for v in kwargs["ansatz"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
        if not isinstance(payload, dict):
            raise ParameterError(f"{path}: expected a JSON object")
        return cls.from_dict(payload)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")


#: Fields that define the experimental protocol; execution details such as
#: worker count or output location do not change what gets measured, so they
#: stay out of the provenance hash.
_PROTOCOL_FIELDS = (
    "master_seed",
    "n_values",
    "instances_per_n",
    "total_time",
    "trotter_steps",
    "ansatz",
    "shots",
    "compute_gaps",
    "gap_samples",
)


def config_hash(cfg: ExperimentConfig) -> str:
    payload = {name: cfg.to_dict()[name] for name in _PROTOCOL_FIELDS}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    """Per-instance results across every configured ansatz."""

    instance_id: int
    n: int
    seed: int
    degenerate: bool
    excluded: bool
    ps: dict[str, float | None]
    wall_ms: dict[str, float]
    entangling: dict[str, int]
    delta_min: dict[str, float | None]


@dataclass
class EnsembleSummary:
    """Aggregated metrics per system size, plus histogram data."""

    baseline: str
    per_n: dict[int, dict]
    histogram_edges: tuple[float, ...]
    histograms: dict[int, dict[str, tuple[int, ...]]]


def _run_task(args: tuple[ExperimentConfig, int, int, int]) -> RunRecord:
    cfg, record_id, n, index = args
    seed = instance_seed(cfg.master_seed, index)
    inst = generate_instance(n, seed)
    truth = ground_state(inst)
    sched = Schedule(cfg.total_time, cfg.trotter_steps)
    ps: dict[str, float | None] = {}
    wall: dict[str, float] = {}
    entangling: dict[str, int] = {}
    delta: dict[str, float | None] = {}
    excluded = False
    for a_index, tag in enumerate(cfg.ansatz):
        ansatz = Ansatz.parse(tag)
        started = time.perf_counter()
        try:
            report = trotter_evolve(inst, sched, ansatz)
        except SingularGaugeError:
            excluded = True
            ps[tag] = None
            wall[tag] = 0.0
            entangling[tag] = 0
            continue
        elapsed = time.perf_counter() - started
        if cfg.shots is not None:
            counts = sample_shots(
                report.final_state, cfg.shots, instance_seed(seed, a_index)
            )
            ps[tag] = sum(counts.get(s, 0) for s in truth.states) / cfg.shots
        else:
            ps[tag] = success_probability(report.final_state, truth)
        wall[tag] = elapsed * 1e3 if cfg.record_timings else 0.0
        entangling[tag] = report.entangling_total
        if cfg.compute_gaps:
            delta[tag] = gap_curve(inst, sched, ansatz, cfg.gap_samples).delta_min
    return RunRecord(
        instance_id=record_id,
        n=n,
        seed=seed,
        degenerate=truth.degenerate,
        excluded=excluded,
        ps=ps,
        wall_ms=wall,
        entangling=entangling,
        delta_min=delta,
    )


def run_ensemble(
    cfg: ExperimentConfig,
    *,
    progress: Callable[[RunRecord], None] | None = None,
) -> list[RunRecord]:
    """Generate, solve, and evolve every configured instance.

    Deterministic for a fixed config regardless of ``jobs``: per-instance
    seeds depend only on (master seed, instance index) and records merge in
    task order.  Gauge singularities mark the record excluded instead of
    aborting the sweep.
    """
    tasks = []
    record_id = 0
    for n in cfg.n_values:
        for index in range(cfg.instances_per_n):
            tasks.append((cfg, record_id, n, index))
            record_id += 1
    records: list[RunRecord] = []
    if cfg.jobs == 1:
        for task in tasks:
            record = _run_task(task)
            if progress is not None:
                progress(record)
            records.append(record)
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for record in pool.map(_run_task, tasks, chunksize=4):
                if progress is not None:
                    progress(record)
                records.append(record)
    return records


def enhancement_metrics(
    records: Iterable[RunRecord], baseline: str = "none"
) -> EnsembleSummary:
    """Per-size averages, enhancement ratios, and success histograms.

    The enhanced fraction counts strict improvement over the baseline (ties
    do not count).  Ratio means skip records whose baseline probability is
    below ``ZERO_BASELINE_FLOOR``; those skips are tallied separately.
    Excluded records are omitted throughout.
    """
    records = [r for r in records]
    by_n: dict[int, list[RunRecord]] = {}
    for record in records:
        by_n.setdefault(record.n, []).append(record)

    edges = tuple(float(e) for e in np.linspace(0.0, 1.0, HISTOGRAM_BINS + 1))
    per_n: dict[int, dict] = {}
    histograms: dict[int, dict[str, tuple[int, ...]]] = {}
    for n in sorted(by_n):
        group = [r for r in by_n[n] if not r.excluded]
        tags = list(dict.fromkeys(tag for r in group for tag in r.ps))
        avg_ps = {}
        hist_n = {}
        for tag in tags:
            values = [r.ps[tag] for r in group if r.ps.get(tag) is not None]
            avg_ps[tag] = float(np.mean(values)) if values else None
            counts, _ = np.histogram(values, bins=np.asarray(edges))
            hist_n[tag] = tuple(int(c) for c in counts)
        p_enh_avg: dict[str, float | None] = {}
        r_enh: dict[str, float | None] = {}
        zero_baseline: dict[str, int] = {}
        gap_fraction: dict[str, float | None] = {}
        for tag in tags:
            if tag == baseline:
                continue
            paired = [
                (r.ps[tag], r.ps[baseline])
                for r in group
                if r.ps.get(tag) is not None and r.ps.get(baseline) is not None
            ]
            if paired:
                r_enh[tag] = sum(1 for cd, ad in paired if cd > ad) / len(paired)
                ratios = [cd / ad for cd, ad in paired if ad >= ZERO_BASELINE_FLOOR]
                zero_baseline[tag] = len(paired) - len(ratios)
                p_enh_avg[tag] = float(np.mean(ratios)) if ratios else None
            else:
                r_enh[tag] = None
                p_enh_avg[tag] = None
                zero_baseline[tag] = 0
            gap_pairs = [
                (r.delta_min[tag], r.delta_min[baseline])
                for r in group
                if r.delta_min.get(tag) is not None
                and r.delta_min.get(baseline) is not None
            ]
            gap_fraction[tag] = (
                sum(1 for cd, ad in gap_pairs if cd > ad) / len(gap_pairs)
                if gap_pairs
                else None
            )
        per_n[n] = {
            "records": len(by_n[n]),
            "excluded": sum(1 for r in by_n[n] if r.excluded),
            "avg_ps": avg_ps,
            "p_enh_avg": p_enh_avg,
            "r_enh": r_enh,
            "zero_baseline": zero_baseline,
            "gap_increase_fraction": gap_fraction,
        }
        histograms[n] = hist_n
    return EnsembleSummary(
        baseline=baseline,
        per_n=per_n,
        histogram_edges=edges,
        histograms=histograms,
    )


@dataclass(frozen=True)
class CostRow:
    """Cost accounting for one (system size, ansatz) combination."""

    n: int
    ansatz: str
    entangling_per_step: int
    entangling_total: int
    norm_cost: float | None
    count_only: bool


def cost_report(
    records: Iterable[RunRecord],
    cfg: ExperimentConfig,
    *,
    norm_samples: int = 5,
    norm_cap: int = STATEVECTOR_CAP,
) -> list[CostRow]:
    """Entangling-exponential counts and the schedule-peak norm cost.

    The norm cost is T * max_k ||H(t_k)|| averaged over up to ``norm_samples``
    regenerated instances; above ``norm_cap`` it is skipped and the row is
    marked count-only.
    """
    sched = Schedule(cfg.total_time, cfg.trotter_steps)
    grid = sched.grid()
    by_key: dict[tuple[int, str], list[RunRecord]] = {}
    for record in records:
        for tag in record.ps:
            by_key.setdefault((record.n, tag), []).append(record)
    rows = []
    for (n, tag), group in sorted(by_key.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        ansatz = Ansatz.parse(tag)
        totals = [r.entangling[tag] for r in group if not r.excluded]
        total = int(totals[0]) if totals else 0
        per_step = total // cfg.trotter_steps if total else 0
        if n > norm_cap:
            rows.append(CostRow(n, tag, per_step, total, None, True))
            continue
        costs = []
        for record in group[:norm_samples]:
            inst = generate_instance(n, record.seed)
            peak = max(
                operator_norm(assemble_hamiltonian(inst, p.lam, p.lam_dot, ansatz))
                for p in grid
            )
            costs.append(cfg.total_time * peak)
        norm_cost = float(np.mean(costs)) if costs else None
        rows.append(CostRow(n, tag, per_step, total, norm_cost, False))
    return rows


def _format_float(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def records_to_csv(records: Iterable[RunRecord], cfg_hash: str) -> str:
    lines = [f"# config_hash={cfg_hash}", _CSV_HEADER]
    for record in records:
        for tag in record.ps:
            lines.append(
                ",".join(
                    (
                        str(record.instance_id),
                        str(record.n),
                        str(record.seed),
                        "true" if record.degenerate else "false",
                        "true" if record.excluded else "false",
                        tag,
                        _format_float(record.ps.get(tag)),
                        _format_float(record.wall_ms.get(tag, 0.0)),
                        str(record.entangling.get(tag, 0)),
                        _format_float(record.delta_min.get(tag)),
                    )
                )
            )
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> tuple[list[RunRecord], str | None]:
    """Parse the records CSV back into RunRecord objects.

    Returns the records plus the embedded config hash, if any.
    """
    cfg_hash: str | None = None
    by_id: dict[int, RunRecord] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "config_hash=" in line:
                cfg_hash = line.split("config_hash=", 1)[1].strip()
            continue
        if not header_seen:
            if line != _CSV_HEADER:
                raise ParameterError(f"line {lineno}: unexpected header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise ParameterError(f"line {lineno}: expected 10 fields, got {len(parts)}")
        (
            rid,
            n,
            seed,
            degenerate,
            excluded,
            tag,
            ps,
            wall,
            entangling,
            delta,
        ) = parts
        record = by_id.get(int(rid))
        if record is None:
            record = RunRecord(
                instance_id=int(rid),
                n=int(n),
                seed=int(seed),
                degenerate=degenerate == "true",
                excluded=excluded == "true",
                ps={},
                wall_ms={},
                entangling={},
                delta_min={},
            )
            by_id[int(rid)] = record
        record.ps[tag] = float(ps) if ps else None
        record.wall_ms[tag] = float(wall) if wall else 0.0
        record.entangling[tag] = int(entangling)
        if delta:
            record.delta_min[tag] = float(delta)
    return [by_id[k] for k in sorted(by_id)], cfg_hash


def summary_to_dict(summary: EnsembleSummary, cfg_hash: str) -> dict:
    return {
        "config_hash": cfg_hash,
        "tool_version": __version__,
        "baseline": summary.baseline,
        "per_n": {str(n): data for n, data in summary.per_n.items()},
        "histogram_edges": list(summary.histogram_edges),
        "histograms": {
            str(n): {tag: list(counts) for tag, counts in hist.items()}
            for n, hist in summary.histograms.items()
        },
    }


def emit_report(
    summary: EnsembleSummary,
    records: list[RunRecord],
    cfg: ExperimentConfig,
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write records CSV, summary JSON, and plot-ready figure data files.

    Every emitted file embeds the config hash (CSV comment line or JSON
    field).  Returns the written paths keyed by artifact name.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_hash = config_hash(cfg)
    paths: dict[str, Path] = {}

    paths["records"] = out / "records.csv"
    paths["records"].write_text(records_to_csv(records, cfg_hash))

    paths["summary"] = out / "summary.json"
    paths["summary"].write_text(
        json.dumps(summary_to_dict(summary, cfg_hash), indent=1, sort_keys=True) + "\n"
    )

    header = f"# config_hash={cfg_hash}\n"

    lines = [header + "n,ansatz,avg_ps"]
    for n, data in sorted(summary.per_n.items()):
        for tag, value in data["avg_ps"].items():
            lines.append(f"{n},{tag},{_format_float(value)}")
    paths["fig_avg_ps_vs_n"] = out / "fig_avg_ps_vs_n.csv"
    paths["fig_avg_ps_vs_n"].write_text("\n".join(lines) + "\n")

    lines = [header + "n,ansatz,bin_lo,bin_hi,count"]
    edges = summary.histogram_edges
    for n, hist in sorted(summary.histograms.items()):
        for tag, counts in hist.items():
            for b, count in enumerate(counts):
                lines.append(f"{n},{tag},{edges[b]!r},{edges[b + 1]!r},{count}")
    paths["fig_ps_histogram"] = out / "fig_ps_histogram.csv"
    paths["fig_ps_histogram"].write_text("\n".join(lines) + "\n")

    lines = [header + "n,ansatz,p_enh_avg,r_enh"]
    for n, data in sorted(summary.per_n.items()):
        for tag in data["r_enh"]:
            lines.append(
                f"{n},{tag},{_format_float(data['p_enh_avg'][tag])},"
                f"{_format_float(data['r_enh'][tag])}"
            )
    paths["fig_enhancement_vs_n"] = out / "fig_enhancement_vs_n.csv"
    paths["fig_enhancement_vs_n"].write_text("\n".join(lines) + "\n")

    lines = [header + "n,instance_id,ansatz,delta_min"]
    for record in records:
        for tag, value in record.delta_min.items():
            if value is not None:
                lines.append(f"{record.n},{record.instance_id},{tag},{value!r}")
    paths["fig_min_gap"] = out / "fig_min_gap.csv"
    paths["fig_min_gap"].write_text("\n".join(lines) + "\n")

    return paths
