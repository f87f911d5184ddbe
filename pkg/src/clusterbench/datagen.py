"""Synthetic labeled dataset generation.

Each class draws its own random covariance structure R = G G^T (guaranteed
positive semi-definite), samples a zero-mean multivariate normal with that
covariance, shrinks the samples by the separation divisor alpha, and
translates them by a per-feature shift drawn uniformly from [-1, 1]. Larger
alpha means tighter classes relative to the fixed shift range, i.e. more
separation.

All randomness is keyed by derived seeds (see seeds.py): a dataset is a pure
function of its spec, and every class inside it has an independent stream,
so generation is reproducible under any parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidModelError, NotPSDError, TuningFailedError
from .linalg import psd_sqrt, symmetrize
from .seeds import derive_seed, rng_for

DEFAULT_MOMENT_MEAN = 1.0
DEFAULT_MOMENT_SD = 0.5

# The full benchmark grid: 27 cells, 10 realizations each -> 270 datasets.
PAPER_CELLS: tuple[tuple[int, int, int], ...] = tuple(
    (c, f, ne) for c in (2, 10, 50) for f in (2, 10, 50) for ne in (5, 50, 100)
)
PAPER_REALIZATIONS = 10


@dataclass(frozen=True)
class DatasetSpec:
    """Everything needed to regenerate one dataset bit-for-bit."""

    num_classes: int
    num_features: int
    objects_per_class: int
    alpha: float
    seed: int
    realization_index: int = 0

    def __post_init__(self):
        if self.num_classes < 1 or self.num_features < 1 or self.objects_per_class < 1:
            raise InvalidDimensionError(
                f"need C, F, Ne >= 1, got C={self.num_classes} "
                f"F={self.num_features} Ne={self.objects_per_class}"
            )
        if not self.alpha > 0:
            raise InvalidModelError(f"alpha must be positive, got {self.alpha}")

    @property
    def family(self) -> str:
        """Corpus family tag, e.g. DB10C2F for 10 classes and 2 features."""
        return f"DB{self.num_classes}C{self.num_features}F"

    @property
    def dataset_id(self) -> str:
        return f"{self.family}_Ne{self.objects_per_class}_r{self.realization_index:02d}"


@dataclass(frozen=True)
class ClassModel:
    """Covariance, per-feature shift and separation divisor for one class."""

    covariance: np.ndarray
    shift: np.ndarray
    alpha: float

    def __post_init__(self):
        cov = symmetrize(self.covariance)
        shift = np.asarray(self.shift, dtype=np.float64)
        if shift.ndim != 1 or shift.shape[0] != cov.shape[0]:
            raise InvalidModelError(
                f"shift length {shift.shape} does not match covariance dim {cov.shape[0]}"
            )
        if np.any(shift < -1.0) or np.any(shift > 1.0):
            raise InvalidModelError("shift coordinates must lie in [-1, 1]")
        if not self.alpha > 0:
            raise InvalidModelError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "shift", shift)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with ground-truth labels and the spec that produced it."""

    features: np.ndarray
    labels: np.ndarray
    spec: DatasetSpec

    def __post_init__(self):
        counts = np.bincount(self.labels, minlength=self.spec.num_classes)
        if counts.size != self.spec.num_classes or np.any(counts != self.spec.objects_per_class):
            raise InvalidModelError("labels must contain exactly Ne rows per class")

    @property
    def num_objects(self) -> int:
        return int(self.features.shape[0])

    @property
    def dataset_id(self) -> str:
        return self.spec.dataset_id


def generate_covariance(
    num_features: int,
    moment_mean: float = DEFAULT_MOMENT_MEAN,
    moment_sd: float = DEFAULT_MOMENT_SD,
    rng: np.random.Generator | None = None,
    factor_cols: int | None = None,
    g: np.ndarray | None = None,
) -> np.ndarray:
    """Random PSD covariance matrix R = G G^T.

    G is num_features x factor_cols (default square) with i.i.d. normal
    entries of mean moment_sd/m and standard deviation chosen so the
    expected diagonal of R equals moment_mean exactly. The entry mean keeps
    the expected covariances slightly positive (moment_sd**2 / m) while
    leaving the correlation structure heterogeneous from class to class;
    no single direction dominates at any dimension. Passing `g` bypasses
    the random draw (test hook).
    """
    if num_features < 1:
        raise InvalidDimensionError(f"need num_features >= 1, got {num_features}")
    if moment_sd < 0:
        raise InvalidModelError(f"moment_sd must be nonnegative, got {moment_sd}")
    if moment_mean <= 0:
        raise InvalidModelError(f"moment_mean must be positive, got {moment_mean}")
    if g is None:
        if rng is None:
            raise ValueError("rng is required unless g is given")
        m = factor_cols if factor_cols is not None else num_features
        entry_mean = moment_sd / m
        entry_var = moment_mean / m - entry_mean**2
        if entry_var <= 0:
            raise InvalidModelError(
                f"moments ({moment_mean}, {moment_sd}) infeasible for {m} factor columns"
            )
        g = rng.normal(entry_mean, np.sqrt(entry_var), size=(num_features, m))
    else:
        g = np.asarray(g, dtype=np.float64)
        if g.shape[0] != num_features:
            raise InvalidDimensionError(
                f"g has {g.shape[0]} rows, expected {num_features}"
            )
    return symmetrize(g @ g.T)


def generate_class(model: ClassModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample n objects from one class model.

    Rows are multivariate normal with the model covariance (via its PSD
    square root), divided by alpha, then translated by the shift vector.
    """
    if n < 1:
        raise InvalidDimensionError(f"need n >= 1, got {n}")
    try:
        root = psd_sqrt(model.covariance)
    except NotPSDError as exc:
        raise InvalidModelError(f"class covariance is not PSD: {exc}") from exc
    z = rng.standard_normal((n, model.covariance.shape[0]))
    return (z @ root.T) / model.alpha + model.shift


def _draw_class_model(spec: DatasetSpec, rng: np.random.Generator) -> ClassModel:
    cov = generate_covariance(spec.num_features, rng=rng)
    shift = rng.uniform(-1.0, 1.0, spec.num_features)
    return ClassModel(covariance=cov, shift=shift, alpha=spec.alpha)


def _class_rng(spec: DatasetSpec, class_index: int) -> np.random.Generator:
    return rng_for(spec.seed, "class", class_index)


def class_models_for(spec: DatasetSpec) -> list[ClassModel]:
    """The class models generate_dataset(spec) will use, without sampling rows."""
    return [_draw_class_model(spec, _class_rng(spec, ci)) for ci in range(spec.num_classes)]


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """Generate the dataset described by spec; pure in (spec) including seed."""
    blocks = []
    for ci in range(spec.num_classes):
        rng = _class_rng(spec, ci)
        model = _draw_class_model(spec, rng)
        blocks.append(generate_class(model, spec.objects_per_class, rng))
    features = np.vstack(blocks)
    labels = np.repeat(np.arange(spec.num_classes), spec.objects_per_class)
    return Dataset(features=features, labels=labels, spec=spec)


def generate_corpus(
    grid: list[tuple[int, int, int, float]],
    realizations: int,
    base_seed: int,
) -> list[Dataset]:
    """Generate realizations datasets for every (C, F, Ne, alpha) grid cell.

    Dataset seeds are derived from (base_seed, C, F, Ne, realization), so the
    corpus is reproducible cell by cell in any order.
    """
    if realizations < 1:
        raise InvalidDimensionError(f"need realizations >= 1, got {realizations}")
    corpus = []
    for c, f, ne, alpha in grid:
        for r in range(realizations):
            spec = DatasetSpec(
                num_classes=c,
                num_features=f,
                objects_per_class=ne,
                alpha=alpha,
                seed=derive_seed(base_seed, c, f, ne, r),
                realization_index=r,
            )
            corpus.append(generate_dataset(spec))
    return corpus


def _default_probe(features: np.ndarray, k: int, rng: np.random.Generator):
    from .clusterers.kmeans import kmeans

    return kmeans(features, k, rng=rng)


def tune_alpha(
    num_classes: int,
    num_features: int,
    objects_per_class: int,
    base_seed: int = 0,
    target_band: tuple[float, float] = (0.3, 0.7),
    max_iter: int = 24,
    pilot_realizations: int = 3,
    initial_alpha: float = 1.0,
    probe=None,
) -> float:
    """Find alpha putting the probe clusterer's mean ARI inside target_band.

    The probe (default: k-means with default parameters and k set to the true
    class count) is evaluated on a small pilot of realizations. Mean ARI is
    monotone increasing in alpha on average, so the search expands a bracket
    geometrically and then bisects in log space. Raises TuningFailedError
    (carrying the best alpha found) if the band is not reached within
    max_iter evaluations.
    """
    from .metrics import score_partition

    low, high = target_band
    if not (0.0 <= low < high <= 1.0):
        raise ValueError(f"need 0 <= low < high <= 1, got ({low}, {high})")
    probe = probe if probe is not None else _default_probe

    def pilot_score(alpha: float) -> float:
        scores = []
        for r in range(pilot_realizations):
            spec = DatasetSpec(
                num_classes=num_classes,
                num_features=num_features,
                objects_per_class=objects_per_class,
                alpha=alpha,
                seed=derive_seed(base_seed, "alpha-pilot", num_classes,
                                 num_features, objects_per_class, r),
                realization_index=r,
            )
            ds = generate_dataset(spec)
            rng = rng_for(base_seed, "alpha-probe", num_classes,
                          num_features, objects_per_class, r)
            result = probe(ds.features, num_classes, rng)
            scores.append(score_partition(ds.labels, result.partition.assignments)["ari"])
        return float(np.mean(scores))

    evals = 0
    best_alpha, best_gap = initial_alpha, float("inf")

    def check(alpha: float) -> tuple[bool, float]:
        nonlocal evals, best_alpha, best_gap
        evals += 1
        score = pilot_score(alpha)
        gap = max(low - score, score - high, 0.0)
        if gap < best_gap:
            best_alpha, best_gap = alpha, gap
        return low < score < high, score

    ok, score = check(initial_alpha)
    if ok:
        return initial_alpha

    # Expand a geometric bracket [brk_lo, brk_hi] with the band in between.
    brk_lo = brk_hi = initial_alpha
    if score <= low:
        while evals < max_iter:
            brk_hi *= 2.0
            ok, score = check(brk_hi)
            if ok:
                return brk_hi
            if score >= high:
                break
            brk_lo = brk_hi
    else:
        while evals < max_iter:
            brk_lo /= 2.0
            ok, score = check(brk_lo)
            if ok:
                return brk_lo
            if score <= low:
                break
            brk_hi = brk_lo
    while evals < max_iter:
        mid = float(np.sqrt(brk_lo * brk_hi))
        ok, score = check(mid)
        if ok:
            return mid
        if score <= low:
            brk_lo = mid
        else:
            brk_hi = mid
    raise TuningFailedError(
        f"no alpha reached ARI band ({low}, {high}) in {max_iter} evaluations; "
        f"best alpha {best_alpha:.4g}",
        best_alpha=best_alpha,
    )
