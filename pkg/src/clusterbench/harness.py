"""Run configuration, artifact persistence and the experiment pipeline.

A run is described by one declarative JSON config (grid cells, algorithm
selections, sweep settings, master seed). Commands read datasets from a
directory produced by `gen`, compute records and summaries, and write:

  records.jsonl    one scored run per line (no timing: bitwise reproducible)
  timings.jsonl    wall times in the same order (excluded from determinism)
  *.tsv            paper-style tables, '#'-prefixed metadata headers
  *.json           machine-readable summaries

Every artifact header carries the master seed and a hash of the config, so
any table can be traced to the exact run that produced it. Existing outputs
are never overwritten unless force is set.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import sweep as sweep_mod
from .clusterers import ALGORITHM_NAMES, param_descriptors, validate_assignments
from .dataio import load_dataset, write_dataset
from .datagen import Dataset, generate_corpus, tune_alpha
from .errors import (
    ClusterBenchError,
    DegenerateDataError,
    OutputExistsError,
    UnknownParameterError,
)
from .stats import kruskal_wallis
from .sweep import (
    INDEX_NAMES,
    OneDimTrace,
    ParamBounds,
    RunRecord,
    declared_bounds,
    derive_bounds,
)

DEFAULT_REALIZATIONS = 10
DEFAULT_N_DRAWS = 500


@dataclass(frozen=True)
class GridCell:
    num_classes: int
    num_features: int
    objects_per_class: int
    alpha: float | str = "auto"  # "auto" tunes against the probe clusterer


@dataclass
class RunConfig:
    """Declarative description of one benchmark run."""

    seed: int = 0
    workers: int = 1
    out: str = "results"
    data_dir: str | None = None
    cells: list[GridCell] = field(default_factory=list)
    realizations: int = DEFAULT_REALIZATIONS
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHM_NAMES))
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    vary_k: dict[str, Any] = field(default_factory=dict)
    sweep1d: dict[str, Any] = field(default_factory=dict)
    sweepnd: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        """Resolve every referenced name before any computation starts."""
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHM_NAMES:
                raise UnknownParameterError(
                    f"unknown algorithm {algorithm!r}; known: {', '.join(ALGORITHM_NAMES)}"
                )
        for algorithm, overrides in self.overrides.items():
            validate_assignments(algorithm, overrides)
        for section in (self.vary_k, self.sweep1d, self.sweepnd):
            for algorithm in section.get("algorithms", []):
                if algorithm not in ALGORITHM_NAMES:
                    raise UnknownParameterError(f"unknown algorithm {algorithm!r}")
        for algorithm, params in self.sweep1d.get("parameters", {}).items():
            known = {d.name for d in param_descriptors(algorithm)}
            for p in params:
                if p not in known:
                    raise UnknownParameterError(
                        f"{algorithm} has no parameter {p!r}; known: {', '.join(sorted(known))}"
                    )


def load_config(path: str | Path) -> RunConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    cells = [
        GridCell(
            num_classes=int(c["num_classes"]),
            num_features=int(c["num_features"]),
            objects_per_class=int(c["objects_per_class"]),
            alpha=c.get("alpha", "auto"),
        )
        for c in raw.get("corpus", {}).get("cells", [])
    ]
    cfg = RunConfig(
        seed=int(raw.get("seed", 0)),
        workers=int(raw.get("workers", 1)),
        out=raw.get("out", "results"),
        data_dir=raw.get("data_dir"),
        cells=cells,
        realizations=int(raw.get("corpus", {}).get("realizations", DEFAULT_REALIZATIONS)),
        algorithms=list(raw.get("algorithms", list(ALGORITHM_NAMES))),
        overrides=raw.get("overrides", {}),
        vary_k=raw.get("vary_k", {}),
        sweep1d=raw.get("sweep1d", {}),
        sweepnd=raw.get("sweepnd", {}),
        raw=raw,
    )
    cfg.validate()
    return cfg


def config_hash(cfg: RunConfig) -> str:
    canonical = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# artifact plumbing
# ---------------------------------------------------------------------------


def artifact_header(kind: str, cfg: RunConfig) -> str:
    return f"# clusterbench {kind} v1; seed={cfg.seed}; config={config_hash(cfg)}"


def _guard(paths: list[Path], force: bool) -> None:
    existing = [p for p in paths if p.exists()]
    if existing and not force:
        raise OutputExistsError(
            f"refusing to overwrite {existing[0]} (use --force to allow)"
        )


def _record_sort_key(r: RunRecord):
    return (
        r.mode,
        r.algorithm,
        r.parameter or "",
        -1 if r.draw_index is None else r.draw_index,
        "" if r.value is None else repr(r.value),
        r.dataset_id,
        r.k,
    )


def _record_payload(r: RunRecord) -> dict:
    return {
        "record_type": "run",
        "dataset_id": r.dataset_id,
        "algorithm": r.algorithm,
        "k": r.k,
        "assignments": r.assignments,
        "indices": r.indices,
        "seed": r.seed,
        "mode": r.mode,
        "draw_index": r.draw_index,
        "parameter": r.parameter,
        "value": r.value,
        "flags": list(r.flags),
    }


def write_records(records: list[RunRecord], out_dir: Path, cfg: RunConfig, force: bool) -> list[Path]:
    """Persist records (sorted, reproducible) and their timings (sidecar)."""
    records_path = out_dir / "records.jsonl"
    timings_path = out_dir / "timings.jsonl"
    _guard([records_path, timings_path], force)
    ordered = sorted(records, key=_record_sort_key)
    header = {"record_type": "header", "kind": "records",
              "seed": cfg.seed, "config": config_hash(cfg)}
    with records_path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for r in ordered:
            fh.write(json.dumps(_record_payload(r), sort_keys=True) + "\n")
    with timings_path.open("w", encoding="utf-8") as fh:
        for r in ordered:
            fh.write(json.dumps(
                {"dataset_id": r.dataset_id, "algorithm": r.algorithm,
                 "draw_index": r.draw_index, "wall_time": r.wall_time},
                sort_keys=True) + "\n")
    return [records_path, timings_path]


def read_records(path: str | Path) -> list[RunRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        payload = json.loads(line)
        if payload.get("record_type") != "run":
            continue
        records.append(RunRecord(
            dataset_id=payload["dataset_id"],
            algorithm=payload["algorithm"],
            k=payload["k"],
            assignments=payload["assignments"],
            indices=payload["indices"],
            seed=payload["seed"],
            mode=payload["mode"],
            draw_index=payload["draw_index"],
            parameter=payload["parameter"],
            value=payload["value"],
            flags=tuple(payload["flags"]),
        ))
    return records


def _write_table(path: Path, cfg: RunConfig, kind: str, columns: list[str],
                 rows: list[list], extra_header: list[str] | None = None) -> Path:
    lines = [artifact_header(kind, cfg)]
    lines.extend(extra_header or [])
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _pct(v: float) -> float:
    return round(100.0 * v, 6)


# ---------------------------------------------------------------------------
# corpus generation and loading
# ---------------------------------------------------------------------------


def resolve_alphas(cfg: RunConfig) -> list[tuple[int, int, int, float]]:
    """Concrete (C, F, Ne, alpha) grid; 'auto' cells are tuned per cell."""
    grid = []
    for cell in cfg.cells:
        if cell.alpha == "auto":
            alpha = tune_alpha(
                cell.num_classes, cell.num_features, cell.objects_per_class,
                base_seed=cfg.seed,
            )
        else:
            alpha = float(cell.alpha)
        grid.append((cell.num_classes, cell.num_features,
                     cell.objects_per_class, alpha))
    return grid


def cmd_gen(cfg: RunConfig, force: bool = False) -> list[Path]:
    """Generate the corpus and write one dataset file per realization."""
    if not cfg.cells:
        raise ClusterBenchError("config has no corpus cells")
    data_dir = Path(cfg.data_dir or (Path(cfg.out) / "datasets"))
    data_dir.mkdir(parents=True, exist_ok=True)
    grid = resolve_alphas(cfg)
    corpus = generate_corpus(grid, cfg.realizations, cfg.seed)
    paths = [data_dir / f"{ds.dataset_id}.tsv" for ds in corpus]
    _guard(paths + [data_dir / "manifest.json"], force)
    for ds, path in zip(corpus, paths):
        write_dataset(ds, path)
    manifest = {
        "kind": "gen-manifest",
        "seed": cfg.seed,
        "config": config_hash(cfg),
        "realizations": cfg.realizations,
        "cells": [
            {"num_classes": c, "num_features": f, "objects_per_class": ne,
             "alpha": alpha}
            for (c, f, ne, alpha) in grid
        ],
        "datasets": [p.name for p in paths],
    }
    manifest_path = data_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
    return paths + [manifest_path]


def load_corpus(data_dir: str | Path, family: str | None = None) -> list[Dataset]:
    """Load every dataset file in a directory, optionally one DB<C>C<F>F family."""
    data_dir = Path(data_dir)
    paths = sorted(data_dir.glob("*.tsv"))
    if not paths:
        raise ClusterBenchError(f"no dataset files found in {data_dir}")
    corpus = [load_dataset(p) for p in paths]
    if family is not None:
        corpus = [ds for ds in corpus if ds.spec.family == family]
        if not corpus:
            raise ClusterBenchError(f"no datasets of family {family} in {data_dir}")
    return corpus


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_run(cfg: RunConfig, data_dir: str | Path, force: bool = False) -> list[Path]:
    """Default-parameter evaluation: difference table plus grouped means."""
    corpus = load_corpus(data_dir)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, summary = sweep_mod.run_default(
        corpus, cfg.algorithms, master_seed=cfg.seed, workers=cfg.workers
    )
    written = write_records(records, out_dir, cfg, force)

    for index in INDEX_NAMES:
        path = out_dir / f"table_differences_{index}.tsv"
        _guard([path], force)
        columns = ["algorithm"] + list(summary.algorithms) + ["mean_pct"]
        rows = []
        for i, ai in enumerate(summary.algorithms):
            row: list[Any] = [ai]
            row.extend(_pct(v) if not np.isnan(v) else "NA"
                       for v in summary.differences[index][i])
            row.append(_pct(summary.overall[ai][index]) if ai in summary.overall else "NA")
            rows.append(row)
        written.append(_write_table(path, cfg, f"differences-{index}", columns, rows))

    for tag, grouping in (("features", summary.by_features),
                          ("objects", summary.by_objects)):
        path = out_dir / f"table_by_{tag}.tsv"
        _guard([path], force)
        columns = [tag, "algorithm"] + [f"{n}_pct" for n in INDEX_NAMES]
        rows = []
        for value in sorted(grouping):
            for algorithm in summary.algorithms:
                if algorithm in grouping[value]:
                    means = grouping[value][algorithm]
                    rows.append([value, algorithm] + [_pct(means[n]) for n in INDEX_NAMES])
        written.append(_write_table(path, cfg, f"grouped-by-{tag}", columns, rows))

    summary_path = out_dir / "summary_default.json"
    _guard([summary_path], force)
    payload = {
        "kind": "default-summary",
        "seed": cfg.seed,
        "config": config_hash(cfg),
        "algorithms": list(summary.algorithms),
        "overall": summary.overall,
        "by_features": {str(k): v for k, v in summary.by_features.items()},
        "by_objects": {str(k): v for k, v in summary.by_objects.items()},
        "failures": summary.failures,
    }
    summary_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                            encoding="utf-8")
    written.append(summary_path)
    return written


def cmd_vary_k(cfg: RunConfig, data_dir: str | Path, force: bool = False) -> list[Path]:
    """Accuracy curves over the expected cluster count."""
    section = cfg.vary_k
    if not section.get("k_values"):
        raise ClusterBenchError("config.vary_k.k_values is required")
    algorithms = section.get("algorithms", cfg.algorithms)
    corpus = load_corpus(data_dir, family=section.get("family"))
    true_c = corpus[0].spec.num_classes
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_records: list[RunRecord] = []
    rows = []
    for algorithm in algorithms:
        records, curves = sweep_mod.vary_k(
            corpus, algorithm, [int(k) for k in section["k_values"]],
            master_seed=cfg.seed, workers=cfg.workers,
        )
        all_records.extend(records)
        for k in sorted(curves):
            rows.append([algorithm, k, curves[k]["n"],
                         _pct(curves[k]["ari"]), _pct(curves[k]["jaccard"])])
    written = write_records(all_records, out_dir, cfg, force)
    path = out_dir / "table_vary_k.tsv"
    _guard([path], force)
    written.append(_write_table(
        path, cfg, "vary-k",
        ["algorithm", "k", "n_datasets", "ari_pct", "jaccard_pct"], rows,
        extra_header=[f"# true_num_classes={true_c}"],
    ))
    return written


def cmd_sweep1d(cfg: RunConfig, data_dir: str | Path, force: bool = False) -> list[Path]:
    """One-parameter sweeps; emits the gain table and bound-derivation traces."""
    section = cfg.sweep1d
    algorithms = section.get("algorithms", cfg.algorithms)
    chosen: dict[str, list[str]] = section.get("parameters", {})
    corpus = load_corpus(data_dir, family=section.get("family"))
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_records: list[RunRecord] = []
    rows = []
    traces: list[OneDimTrace] = []
    for algorithm in algorithms:
        names = chosen.get(algorithm) or [d.name for d in param_descriptors(algorithm)]
        for parameter in names:
            records, summary, trace = sweep_mod.one_dim_sweep(
                corpus, algorithm, parameter,
                master_seed=cfg.seed, workers=cfg.workers,
            )
            all_records.extend(records)
            traces.append(trace)
            rows.append([algorithm, parameter,
                         _pct(summary.mean_gain), _pct(summary.sd_gain),
                         _pct(summary.max_gain), _pct(summary.mean_best)])
    written = write_records(all_records, out_dir, cfg, force)

    path = out_dir / "table_sweep1d.tsv"
    _guard([path], force)
    written.append(_write_table(
        path, cfg, "sweep1d",
        ["algorithm", "parameter", "mean_gain_pct", "sd_gain_pct",
         "max_gain_pct", "mean_best_pct"], rows,
    ))
    traces_path = out_dir / "traces.jsonl"
    _guard([traces_path], force)
    with traces_path.open("w", encoding="utf-8") as fh:
        header = {"record_type": "header", "kind": "sweep1d-traces",
                  "seed": cfg.seed, "config": config_hash(cfg)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for t in traces:
            fh.write(json.dumps({
                "record_type": "trace", "algorithm": t.algorithm,
                "parameter": t.parameter, "kind": t.kind,
                "values": list(t.values), "gammas": list(t.gammas),
                "gamma_default": t.gamma_default, "default": t.default,
            }, sort_keys=True) + "\n")
    written.append(traces_path)
    return written


def read_traces(path: str | Path) -> list[OneDimTrace]:
    traces = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        payload = json.loads(line)
        if payload.get("record_type") != "trace":
            continue
        traces.append(OneDimTrace(
            algorithm=payload["algorithm"], parameter=payload["parameter"],
            kind=payload["kind"], values=tuple(payload["values"]),
            gammas=tuple(payload["gammas"]),
            gamma_default=payload["gamma_default"], default=payload["default"],
        ))
    return traces


def cmd_sweepnd(cfg: RunConfig, data_dir: str | Path, force: bool = False) -> list[Path]:
    """Random multi-dimensional sweeps plus histogram data files."""
    section = cfg.sweepnd
    algorithms = section.get("algorithms", cfg.algorithms)
    n_draws = int(section.get("n_draws", DEFAULT_N_DRAWS))
    corpus = load_corpus(data_dir, family=section.get("family"))
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    trace_map: dict[tuple[str, str], OneDimTrace] = {}
    if section.get("bounds", "declared") == "derived":
        traces_path = section.get("traces")
        if not traces_path:
            raise ClusterBenchError("sweepnd.bounds=derived needs sweepnd.traces")
        for t in read_traces(traces_path):
            trace_map[(t.algorithm, t.parameter)] = t

    all_records: list[RunRecord] = []
    rows = []
    written_hist = []
    for algorithm in algorithms:
        bounds = declared_bounds(algorithm, dataset=corpus[0])
        param_traces = [t for (a, _), t in trace_map.items() if a == algorithm]
        if param_traces:
            bounds.update(derive_bounds(param_traces))
        records, summary = sweep_mod.random_sweep(
            corpus, algorithm, bounds, n_draws=n_draws,
            master_seed=cfg.seed, workers=cfg.workers,
        )
        all_records.extend(records)
        rows.append([algorithm, round(summary.p_value, 6),
                     _pct(summary.mean_improvement), _pct(summary.sd_improvement),
                     _pct(summary.max_improvement), _pct(summary.mean_best),
                     _pct(summary.gamma_default), summary.n_draws, summary.n_crashed])
        hist_path = out_dir / f"histogram_{algorithm}.tsv"
        _guard([hist_path], force)
        hist = summary.histogram
        hist_rows = [
            [repr(hist.default + o * hist.bin_width),
             repr(hist.default + (o + 1) * hist.bin_width), c]
            for o, c in zip(hist.offsets, hist.counts)
        ]
        written_hist.append(_write_table(
            hist_path, cfg, f"histogram-{algorithm}",
            ["bin_low_exclusive", "bin_high_inclusive", "count"], hist_rows,
            extra_header=[f"# default_ari={hist.default!r}",
                          f"# bin_width={hist.bin_width!r}"],
        ))
    written = write_records(all_records, out_dir, cfg, force)
    path = out_dir / "table_sweepnd.tsv"
    _guard([path], force)
    written.append(_write_table(
        path, cfg, "sweepnd",
        ["algorithm", "p_value_pct", "mean_improvement_pct", "sd_improvement_pct",
         "max_improvement_pct", "mean_best_ari_pct", "default_ari_pct",
         "n_draws", "n_crashed"], rows,
    ))
    return written + written_hist


def cmd_report(cfg: RunConfig, data_dir: str | Path, force: bool = False) -> list[Path]:
    """Merge run records and test algorithm differences per feature count."""
    records_path = Path(data_dir) / "records.jsonl"
    if not records_path.exists():
        raise ClusterBenchError(f"no records.jsonl under {data_dir}")
    records = [r for r in read_records(records_path) if r.mode == "default"]
    if not records:
        raise ClusterBenchError("no default-mode records to report on")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # dataset family encodes the feature count: DB<C>C<F>F
    def features_of(dataset_id: str) -> int:
        family = dataset_id.split("_")[0]
        return int(family.split("C")[1].rstrip("F"))

    feature_values = sorted({features_of(r.dataset_id) for r in records})
    algorithms = sorted({r.algorithm for r in records})
    rows = []
    for f in feature_values:
        groups = []
        for algorithm in algorithms:
            vals = [r.indices["ari"] for r in records
                    if r.algorithm == algorithm and not r.crashed
                    and features_of(r.dataset_id) == f]
            if vals:
                groups.append(vals)
        if len(groups) < 2:
            rows.append([f, len(groups), "NA", "NA", "NA"])
            continue
        try:
            result = kruskal_wallis(groups)
            rows.append([f, len(groups), round(result.h_statistic, 6),
                         result.degrees_of_freedom, repr(result.p_value)])
        except DegenerateDataError:
            rows.append([f, len(groups), "NA", len(groups) - 1, "NA"])
    path = out_dir / "table_kruskal.tsv"
    _guard([path], force)
    written = [_write_table(
        path, cfg, "kruskal-wallis",
        ["num_features", "n_groups", "h_statistic", "df", "p_value"], rows,
    )]

    merged = {
        "kind": "report",
        "seed": cfg.seed,
        "config": config_hash(cfg),
        "algorithms": algorithms,
        "mean_ari": {
            algorithm: float(np.mean([
                r.indices["ari"] for r in records
                if r.algorithm == algorithm and not r.crashed
            ]))
            for algorithm in algorithms
        },
    }
    merged_path = out_dir / "report.json"
    _guard([merged_path], force)
    merged_path.write_text(json.dumps(merged, sort_keys=True, indent=2) + "\n",
                           encoding="utf-8")
    written.append(merged_path)
    return written
