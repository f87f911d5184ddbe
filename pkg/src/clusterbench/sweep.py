"""The three evaluation regimes: defaults, one-parameter sweeps, random sweeps.

Every clustering run becomes a RunRecord carrying all four validity indices.
Seeds derive from (master seed, mode, algorithm, dataset id) and are shared
across the values or draws of a sweep, so each comparison against the
default configuration is paired: a grid that only contains the default
value reproduces the default score bit for bit.

Summary statistics are split into pure functions (summarize_one_dim,
summarize_random) so they can be checked against hand-computed fixtures
independently of any clustering run.

Index values are kept as fractions throughout; only the report tables
convert to percentages.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .clusterers import (
    param_descriptors,
    resolve_descriptor,
    run_algorithm,
)
from .clusterers.base import CATEGORICAL, INTEGER_RANGE, ParamDescriptor
from .datagen import Dataset
from .errors import ClusterBenchError, UnknownParameterError
from .metrics import score_partition
from .seeds import derive_seed, rng_for

INDEX_NAMES = ("jaccard", "ari", "fm", "nmi")
HISTOGRAM_BIN_WIDTH = 0.02
DEFAULT_GRID_POINTS = 10


@dataclass(frozen=True)
class RunRecord:
    """One clustering run scored against ground truth."""

    dataset_id: str
    algorithm: str
    k: int
    assignments: dict[str, Any]
    indices: dict[str, float]
    seed: int
    mode: str
    draw_index: int | None = None
    parameter: str | None = None
    value: Any = None
    flags: tuple[str, ...] = ()
    wall_time: float = 0.0

    @property
    def crashed(self) -> bool:
        return any(f.startswith("crashed") for f in self.flags)


@dataclass(frozen=True)
class OneDimSummary:
    """Gain statistics of varying one parameter against the default config."""

    algorithm: str
    parameter: str
    mean_gain: float
    sd_gain: float
    max_gain: float
    mean_best: float


@dataclass(frozen=True)
class OneDimTrace:
    """The raw sweep curve backing an OneDimSummary; input to derive_bounds."""

    algorithm: str
    parameter: str
    kind: str
    values: tuple
    gammas: tuple[float, ...]
    gamma_default: float
    default: Any


@dataclass(frozen=True)
class ParamBounds:
    """Sampling range for one parameter in the random sweep."""

    name: str
    kind: str
    low: float | int | None = None
    high: float | int | None = None
    choices: tuple | None = None


@dataclass(frozen=True)
class Histogram:
    """Fixed-width score histogram with bins right-closed at the default.

    Bin i covers (default + offsets[i], default + offsets[i] + width], so a
    draw that exactly ties the default lands below the boundary and the mass
    at positive offsets equals the strictly-improving draw count.
    """

    bin_width: float
    default: float
    offsets: tuple[int, ...]
    counts: tuple[int, ...]

    @property
    def improving_count(self) -> int:
        return sum(c for o, c in zip(self.offsets, self.counts) if o >= 0)


@dataclass(frozen=True)
class RandomSweepSummary:
    """Improvement statistics of uniform random configurations vs defaults."""

    algorithm: str
    p_value: float
    mean_improvement: float
    sd_improvement: float
    max_improvement: float
    mean_best: float
    gamma_default: float
    n_draws: int
    n_crashed: int
    histogram: Histogram


@dataclass(frozen=True)
class DefaultRunSummary:
    """Per-algorithm means, grouped means and the pairwise difference matrix."""

    algorithms: tuple[str, ...]
    overall: dict[str, dict[str, float]]
    by_features: dict[int, dict[str, dict[str, float]]]
    by_objects: dict[int, dict[str, dict[str, float]]]
    differences: dict[str, list[list[float]]]
    failures: dict[str, int]


# ---------------------------------------------------------------------------
# task execution
# ---------------------------------------------------------------------------


def _execute_task(task: tuple) -> RunRecord:
    (dataset_id, features, labels, algorithm, k, assignments, seed, mode,
     draw_index, parameter, value) = task
    start = time.perf_counter()
    flags: tuple[str, ...] = ()
    try:
        result = run_algorithm(
            algorithm, features, k, assignments=assignments,
            rng=np.random.default_rng(seed),
        )
        indices = score_partition(labels, result.partition.assignments)
        flags = result.flags
    except (ClusterBenchError, ValueError, FloatingPointError) as exc:
        indices = {name: 0.0 for name in INDEX_NAMES}
        flags = (f"crashed:{type(exc).__name__}",)
    return RunRecord(
        dataset_id=dataset_id,
        algorithm=algorithm,
        k=k,
        assignments=dict(assignments),
        indices=indices,
        seed=seed,
        mode=mode,
        draw_index=draw_index,
        parameter=parameter,
        value=value,
        flags=flags,
        wall_time=time.perf_counter() - start,
    )


def _run_tasks(tasks: list[tuple], workers: int) -> list[RunRecord]:
    if workers <= 1 or len(tasks) <= 1:
        return [_execute_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute_task, tasks, chunksize=chunk))


def _task(ds: Dataset, algorithm: str, k: int, assignments: dict, seed: int,
          mode: str, draw_index=None, parameter=None, value=None) -> tuple:
    return (ds.dataset_id, ds.features, ds.labels, algorithm, k,
            assignments, seed, mode, draw_index, parameter, value)


# ---------------------------------------------------------------------------
# default-parameter evaluation
# ---------------------------------------------------------------------------


def run_default(
    datasets: Sequence[Dataset],
    algorithms: Sequence[str],
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[RunRecord], DefaultRunSummary]:
    """Run every algorithm once per dataset with default parameters.

    Crashed runs are kept in the record list (flagged) but excluded from all
    means; the failure count per algorithm is reported in the summary.
    """
    if not datasets:
        raise ClusterBenchError("corpus is empty")
    tasks = []
    for algorithm in algorithms:
        for ds in datasets:
            seed = derive_seed(master_seed, "default", algorithm, ds.dataset_id)
            tasks.append(_task(ds, algorithm, ds.spec.num_classes, {}, seed, "default"))
    records = _run_tasks(tasks, workers)
    return records, summarize_default(records, datasets, tuple(algorithms))


def summarize_default(
    records: Sequence[RunRecord],
    datasets: Sequence[Dataset],
    algorithms: tuple[str, ...],
) -> DefaultRunSummary:
    spec_by_id = {ds.dataset_id: ds.spec for ds in datasets}

    def group_means(keep) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for algorithm in algorithms:
            picked = [r for r in records
                      if r.algorithm == algorithm and not r.crashed and keep(r)]
            if picked:
                out[algorithm] = {
                    name: float(np.mean([r.indices[name] for r in picked]))
                    for name in INDEX_NAMES
                }
        return out

    overall = group_means(lambda r: True)
    features = sorted({s.num_features for s in spec_by_id.values()})
    objects = sorted({s.objects_per_class for s in spec_by_id.values()})
    by_features = {
        f: group_means(lambda r, f=f: spec_by_id[r.dataset_id].num_features == f)
        for f in features
    }
    by_objects = {
        ne: group_means(lambda r, ne=ne: spec_by_id[r.dataset_id].objects_per_class == ne)
        for ne in objects
    }
    differences = {}
    for name in INDEX_NAMES:
        matrix = []
        for ai in algorithms:
            row = []
            for aj in algorithms:
                if ai in overall and aj in overall:
                    row.append(overall[ai][name] - overall[aj][name])
                else:
                    row.append(math.nan)
            matrix.append(row)
        differences[name] = matrix
    failures = {
        algorithm: sum(1 for r in records if r.algorithm == algorithm and r.crashed)
        for algorithm in algorithms
    }
    return DefaultRunSummary(
        algorithms=tuple(algorithms),
        overall=overall,
        by_features=by_features,
        by_objects=by_objects,
        differences=differences,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# expected-cluster-count sweep
# ---------------------------------------------------------------------------


def vary_k(
    datasets: Sequence[Dataset],
    algorithm: str,
    k_values: Sequence[int],
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[RunRecord], dict[int, dict[str, float]]]:
    """Mean ARI and Jaccard curves over the expected cluster count.

    k values exceeding a dataset's size are skipped for that dataset and
    reported via the returned curves' counts.
    """
    if not k_values:
        raise ClusterBenchError("k_values must be non-empty")
    tasks = []
    for k in k_values:
        for ds in datasets:
            if k > ds.num_objects:
                continue
            seed = derive_seed(master_seed, "vary-k", algorithm, ds.dataset_id)
            tasks.append(_task(ds, algorithm, int(k), {}, seed, "vary-k"))
    records = _run_tasks(tasks, workers)
    curves: dict[int, dict[str, float]] = {}
    for k in k_values:
        picked = [r for r in records if r.k == k and not r.crashed]
        if picked:
            curves[int(k)] = {
                "ari": float(np.mean([r.indices["ari"] for r in picked])),
                "jaccard": float(np.mean([r.indices["jaccard"] for r in picked])),
                "n": len(picked),
            }
    return records, curves


# ---------------------------------------------------------------------------
# one-dimensional parameter sweep
# ---------------------------------------------------------------------------


def default_grid(descriptor: ParamDescriptor, points: int = DEFAULT_GRID_POINTS) -> tuple:
    """Scan grid for one parameter; always contains the default value.

    Categorical parameters scan every choice. Numeric grids take `points`
    values between the declared bounds, geometrically spaced for scale-like
    parameters and linearly otherwise.
    """
    if descriptor.kind == CATEGORICAL:
        return tuple(descriptor.choices)
    if descriptor.default is None or descriptor.low is None or descriptor.high is None:
        raise UnknownParameterError(
            f"{descriptor.name}: grid needs concrete default and bounds; "
            "resolve the descriptor against a dataset first"
        )
    if descriptor.log_scale and descriptor.low > 0:
        raw = np.geomspace(descriptor.low, descriptor.high, points)
    else:
        raw = np.linspace(descriptor.low, descriptor.high, points)
    values = list(raw) + [descriptor.default]
    if descriptor.kind == INTEGER_RANGE:
        values = [int(round(v)) for v in values]
    else:
        values = [float(v) for v in values]
    return tuple(sorted(set(values)))


def one_dim_sweep(
    datasets: Sequence[Dataset],
    algorithm: str,
    parameter: str,
    grid: Sequence | None = None,
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[RunRecord], OneDimSummary, OneDimTrace]:
    """Sweep one parameter over a grid, everything else at defaults."""
    descriptor = _find_descriptor(algorithm, parameter)
    if descriptor.data_dependent:
        first = datasets[0]
        descriptor = resolve_descriptor(
            descriptor, algorithm, first.features, first.spec.num_classes
        )
    if grid is None:
        grid = default_grid(descriptor)
    if not grid:
        raise ClusterBenchError("sweep grid is empty")

    tasks = []
    for ds in datasets:
        seed = derive_seed(master_seed, "sweep1d", algorithm, parameter, ds.dataset_id)
        tasks.append(_task(ds, algorithm, ds.spec.num_classes, {}, seed,
                           "sweep1d", parameter=parameter, value=None))
        for vi, value in enumerate(grid):
            tasks.append(_task(ds, algorithm, ds.spec.num_classes,
                               {parameter: value}, seed, "sweep1d",
                               draw_index=vi, parameter=parameter, value=value))
    records = _run_tasks(tasks, workers)

    default_scores = [r.indices["ari"] for r in records if r.value is None]
    gamma_default = float(np.mean(default_scores))
    gammas = []
    for value in grid:
        scores = [r.indices["ari"] for r in records if r.value == value and r.draw_index is not None]
        gammas.append(float(np.mean(scores)))
    best_per_dataset = []
    for ds in datasets:
        scores = [r.indices["ari"] for r in records
                  if r.dataset_id == ds.dataset_id and r.draw_index is not None]
        best_per_dataset.append(max(scores))

    summary = summarize_one_dim(algorithm, parameter, gammas, gamma_default, best_per_dataset)
    trace = OneDimTrace(
        algorithm=algorithm,
        parameter=parameter,
        kind=descriptor.kind,
        values=tuple(grid),
        gammas=tuple(gammas),
        gamma_default=gamma_default,
        default=descriptor.default,
    )
    return records, summary, trace


def summarize_one_dim(
    algorithm: str,
    parameter: str,
    gammas: Sequence[float],
    gamma_default: float,
    best_per_dataset: Sequence[float],
) -> OneDimSummary:
    """Mean, spread and maximum of the paired gains over a value grid.

    The spread uses the population form (divide by the grid cardinality),
    following the displayed definition rather than a sample-variance
    convention.
    """
    diffs = np.asarray(gammas, dtype=np.float64) - gamma_default
    return OneDimSummary(
        algorithm=algorithm,
        parameter=parameter,
        mean_gain=float(diffs.mean()),
        sd_gain=float(np.sqrt(((diffs - diffs.mean()) ** 2).mean())),
        max_gain=float(diffs.max()),
        mean_best=float(np.mean(best_per_dataset)),
    )


def _find_descriptor(algorithm: str, parameter: str) -> ParamDescriptor:
    for d in param_descriptors(algorithm):
        if d.name == parameter:
            return d
    raise UnknownParameterError(
        f"{algorithm} has no parameter {parameter!r}; "
        f"known: {', '.join(d.name for d in param_descriptors(algorithm))}"
    )


# ---------------------------------------------------------------------------
# bounds derivation and random multi-dimensional sweep
# ---------------------------------------------------------------------------


def derive_bounds(traces: Sequence[OneDimTrace], degradation: float = 0.15) -> dict[str, ParamBounds]:
    """Sampling bounds per parameter from one-dimensional sweep traces.

    Categorical parameters keep every choice. For numeric parameters the
    range expands outward from the default value and stops just before any
    grid point whose score falls more than `degradation` below the default
    configuration's score; a trace that stays flat (or keeps improving) to
    the scanned extremes yields the extremes themselves.
    """
    out: dict[str, ParamBounds] = {}
    for trace in traces:
        if trace.kind == CATEGORICAL:
            out[trace.parameter] = ParamBounds(
                name=trace.parameter, kind=trace.kind, choices=tuple(trace.values)
            )
            continue
        values = list(trace.values)
        gammas = list(trace.gammas)
        floor = trace.gamma_default - degradation
        default_idx = min(
            range(len(values)), key=lambda i: (abs(values[i] - trace.default), i)
        )
        low_idx = default_idx
        while low_idx > 0 and gammas[low_idx - 1] >= floor:
            low_idx -= 1
        high_idx = default_idx
        while high_idx < len(values) - 1 and gammas[high_idx + 1] >= floor:
            high_idx += 1
        out[trace.parameter] = ParamBounds(
            name=trace.parameter, kind=trace.kind,
            low=values[low_idx], high=values[high_idx],
        )
    return out


def declared_bounds(
    algorithm: str,
    dataset: Dataset | None = None,
) -> dict[str, ParamBounds]:
    """Bounds straight from the declared parameter space (no 1-d sweep).

    Data-dependent descriptors require a dataset to resolve against.
    """
    out: dict[str, ParamBounds] = {}
    for d in param_descriptors(algorithm):
        if d.data_dependent:
            if dataset is None:
                raise UnknownParameterError(
                    f"{algorithm}.{d.name} is data-dependent; a dataset is required"
                )
            d = resolve_descriptor(
                d, algorithm, dataset.features, dataset.spec.num_classes
            )
        if d.kind == CATEGORICAL:
            out[d.name] = ParamBounds(name=d.name, kind=d.kind, choices=d.choices)
        else:
            out[d.name] = ParamBounds(name=d.name, kind=d.kind, low=d.low, high=d.high)
    return out


def draw_configuration(
    algorithm: str, bounds: dict[str, ParamBounds], rng: np.random.Generator
) -> dict[str, Any]:
    """One uniform draw per parameter: integers, reals or choices."""
    assignments: dict[str, Any] = {}
    for d in param_descriptors(algorithm):
        b = bounds[d.name]
        if b.kind == CATEGORICAL:
            assignments[d.name] = b.choices[int(rng.integers(len(b.choices)))]
        elif b.kind == INTEGER_RANGE:
            assignments[d.name] = int(rng.integers(int(b.low), int(b.high) + 1))
        else:
            assignments[d.name] = float(rng.uniform(b.low, b.high))
    return assignments


def random_sweep(
    datasets: Sequence[Dataset],
    algorithm: str,
    bounds: dict[str, ParamBounds],
    n_draws: int = 500,
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[RunRecord], RandomSweepSummary]:
    """Evaluate n_draws uniform random configurations against the defaults.

    A run that raises scores 0 on all indices for its dataset and is flagged;
    the draw's mean still includes it.
    """
    missing = [d.name for d in param_descriptors(algorithm) if d.name not in bounds]
    if missing:
        raise UnknownParameterError(
            f"bounds missing for {algorithm} parameters: {', '.join(missing)}"
        )
    draw_rng = rng_for(master_seed, "sweepnd-draws", algorithm)
    configurations = [draw_configuration(algorithm, bounds, draw_rng) for _ in range(n_draws)]

    tasks = []
    for ds in datasets:
        seed = derive_seed(master_seed, "sweepnd", algorithm, ds.dataset_id)
        tasks.append(_task(ds, algorithm, ds.spec.num_classes, {}, seed, "sweepnd"))
        for di, assignments in enumerate(configurations):
            tasks.append(_task(ds, algorithm, ds.spec.num_classes, assignments,
                               seed, "sweepnd", draw_index=di))
    records = _run_tasks(tasks, workers)

    default_scores = [r.indices["ari"] for r in records if r.draw_index is None]
    gamma_default = float(np.mean(default_scores))
    draw_scores = []
    for di in range(n_draws):
        scores = [r.indices["ari"] for r in records if r.draw_index == di]
        draw_scores.append(float(np.mean(scores)))
    best_per_dataset = []
    for ds in datasets:
        scores = [r.indices["ari"] for r in records
                  if r.dataset_id == ds.dataset_id and r.draw_index is not None]
        best_per_dataset.append(max(scores))
    n_crashed = sum(1 for r in records if r.crashed)

    summary = summarize_random(
        algorithm, draw_scores, gamma_default, best_per_dataset, n_crashed
    )
    return records, summary


def summarize_random(
    algorithm: str,
    draw_scores: Sequence[float],
    gamma_default: float,
    best_per_dataset: Sequence[float],
    n_crashed: int = 0,
    bin_width: float = HISTOGRAM_BIN_WIDTH,
) -> RandomSweepSummary:
    """Improvement statistics over the strictly improving draws.

    p_value is the percentage of draws strictly above the default score;
    the improvement moments are conditional on improvement and zero when
    nothing improves.
    """
    scores = np.asarray(draw_scores, dtype=np.float64)
    improvements = scores[scores > gamma_default] - gamma_default
    if improvements.size:
        mean_r = float(improvements.mean())
        sd_r = float(np.sqrt(((improvements - improvements.mean()) ** 2).mean()))
        max_r = float(improvements.max())
    else:
        mean_r = sd_r = max_r = 0.0
    return RandomSweepSummary(
        algorithm=algorithm,
        p_value=100.0 * improvements.size / scores.size,
        mean_improvement=mean_r,
        sd_improvement=sd_r,
        max_improvement=max_r,
        mean_best=float(np.mean(best_per_dataset)) if len(best_per_dataset) else 0.0,
        gamma_default=gamma_default,
        n_draws=int(scores.size),
        n_crashed=n_crashed,
        histogram=build_histogram(scores, gamma_default, bin_width),
    )


def build_histogram(
    scores: np.ndarray, default: float, bin_width: float = HISTOGRAM_BIN_WIDTH
) -> Histogram:
    """Histogram with bins (default + i*w, default + (i+1)*w], i integer.

    The right-closed convention puts exact ties with the default below the
    zero boundary, so the mass at nonnegative offsets equals the number of
    strictly improving draws and the total count is always len(scores).
    """
    rel = np.asarray(scores, dtype=np.float64) - default
    idx = np.ceil(rel / bin_width).astype(np.int64) - 1
    lo, hi = int(idx.min()), int(idx.max())
    offsets = tuple(range(lo, hi + 1))
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    return Histogram(
        bin_width=bin_width,
        default=float(default),
        offsets=offsets,
        counts=tuple(int(c) for c in counts),
    )
