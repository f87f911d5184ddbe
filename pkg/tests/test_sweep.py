import numpy as np
import pytest

from clusterbench.clusterers.base import CATEGORICAL, INTEGER_RANGE, REAL_RANGE, ParamDescriptor
from clusterbench.errors import ClusterBenchError, UnknownParameterError
from clusterbench.sweep import (
    OneDimTrace,
    ParamBounds,
    _execute_task,
    build_histogram,
    declared_bounds,
    default_grid,
    derive_bounds,
    draw_configuration,
    one_dim_sweep,
    random_sweep,
    run_default,
    summarize_one_dim,
    summarize_random,
    vary_k,
)

from conftest import make_corpus


@pytest.fixture(scope="module")
def small_corpus():
    return make_corpus(3, 2, 20, 3, alpha=2.5, seed=1)


class TestSummarizeOneDim:
    def test_two_point_fixture(self):
        # gamma values {def, def + 0.1}: mean 0.05, max 0.1, sd 0.05
        s = summarize_one_dim("kmeans", "nstart", [0.4, 0.5], 0.4, [0.5])
        assert s.mean_gain == pytest.approx(0.05, abs=1e-12)
        assert s.max_gain == pytest.approx(0.1, abs=1e-12)
        assert s.sd_gain == pytest.approx(0.05, abs=1e-12)
        assert s.mean_best == pytest.approx(0.5, abs=1e-12)

    def test_default_only_grid_is_all_zero(self):
        s = summarize_one_dim("a", "p", [0.37], 0.37, [0.37])
        assert s.mean_gain == s.sd_gain == s.max_gain == 0.0


class TestSummarizeRandom:
    def test_three_draw_fixture(self):
        # draws {def-0.1, def+0.2, def+0.4}: p = 66.7%, <R> = 0.3, max R = 0.4
        s = summarize_random("em", [0.3, 0.6, 0.8], 0.4, [0.8])
        assert s.p_value == pytest.approx(200 / 3, abs=1e-9)
        assert s.mean_improvement == pytest.approx(0.3, abs=1e-12)
        assert s.max_improvement == pytest.approx(0.4, abs=1e-12)
        assert s.sd_improvement == pytest.approx(0.1, abs=1e-12)

    def test_no_improvement_reports_zeros(self):
        s = summarize_random("em", [0.4, 0.4, 0.3], 0.4, [0.4])
        assert s.p_value == 0.0
        assert s.mean_improvement == 0.0
        assert s.sd_improvement == 0.0
        assert s.max_improvement == 0.0

    def test_histogram_counts_conserved(self):
        scores = np.random.default_rng(0).uniform(0, 1, 137)
        s = summarize_random("em", scores, 0.5, [1.0])
        assert sum(s.histogram.counts) == 137

    def test_histogram_improving_mass_equals_strict_count(self):
        # ties sit exactly on a bin boundary: right-closed bins keep them out
        scores = [0.5, 0.5, 0.51, 0.7, 0.3, 0.5]
        hist = build_histogram(np.asarray(scores), 0.5)
        strict = sum(1 for v in scores if v > 0.5)
        assert hist.improving_count == strict == 2


class TestDefaultGrid:
    def test_categorical_grid_is_choices(self):
        d = ParamDescriptor("method", CATEGORICAL, "average",
                            choices=("average", "single"))
        assert default_grid(d) == ("average", "single")

    def test_numeric_grid_contains_default(self):
        d = ParamDescriptor("iter_max", INTEGER_RANGE, 10, low=1, high=100, log_scale=True)
        grid = default_grid(d)
        assert 10 in grid
        assert grid[0] == 1 and grid[-1] == 100
        assert list(grid) == sorted(set(grid))

    def test_real_grid(self):
        d = ParamDescriptor("tol", REAL_RANGE, 1e-8, low=1e-10, high=1e-2, log_scale=True)
        grid = default_grid(d)
        assert 1e-8 in grid
        assert all(isinstance(v, float) for v in grid)

    def test_unresolved_descriptor_rejected(self):
        d = ParamDescriptor("sampsize", INTEGER_RANGE, None)
        with pytest.raises(UnknownParameterError):
            default_grid(d)


class TestRunDefault:
    def test_single_run_mean_is_its_index(self, small_corpus):
        records, summary = run_default(small_corpus[:1], ["kmeans"], master_seed=3)
        assert len(records) == 1
        for name in ("jaccard", "ari", "fm", "nmi"):
            assert summary.overall["kmeans"][name] == records[0].indices[name]

    def test_difference_matrix_antisymmetric(self, small_corpus):
        _, summary = run_default(small_corpus, ["kmeans", "hierarchical", "clara"],
                                 master_seed=3)
        for name, matrix in summary.differences.items():
            m = np.asarray(matrix)
            assert np.allclose(m, -m.T, atol=1e-12)

    def test_grouped_means_present(self, small_corpus):
        _, summary = run_default(small_corpus, ["kmeans"], master_seed=3)
        assert 2 in summary.by_features
        assert 20 in summary.by_objects

    def test_empty_corpus_rejected(self):
        with pytest.raises(ClusterBenchError):
            run_default([], ["kmeans"])


class TestVaryK:
    def test_curves_and_skips(self, small_corpus):
        records, curves = vary_k(small_corpus, "kmeans", [2, 3, 1000], master_seed=3)
        assert set(curves) == {2, 3}  # k=1000 > N skipped entirely
        assert all(set(v) == {"ari", "jaccard", "n"} for v in curves.values())
        assert all(r.k in (2, 3) for r in records)

    def test_empty_k_values_rejected(self, small_corpus):
        with pytest.raises(ClusterBenchError):
            vary_k(small_corpus, "kmeans", [])


class TestOneDimSweep:
    def test_default_only_grid_zeroes(self, small_corpus):
        _, summary, trace = one_dim_sweep(small_corpus, "kmeans", "nstart",
                                          grid=[1], master_seed=3)
        assert summary.mean_gain == 0.0
        assert summary.sd_gain == 0.0
        assert summary.max_gain == 0.0
        assert trace.gammas[0] == trace.gamma_default

    def test_mean_best_at_least_default(self, small_corpus):
        _, summary, trace = one_dim_sweep(small_corpus, "kmeans", "nstart",
                                          master_seed=3)
        assert summary.mean_best >= trace.gamma_default - 1e-12

    def test_unknown_parameter(self, small_corpus):
        with pytest.raises(UnknownParameterError):
            one_dim_sweep(small_corpus, "kmeans", "bandwidth")

    def test_empty_grid_rejected(self, small_corpus):
        with pytest.raises(ClusterBenchError):
            one_dim_sweep(small_corpus, "kmeans", "nstart", grid=[])

    def test_categorical_sweep(self, small_corpus):
        _, summary, trace = one_dim_sweep(small_corpus, "hierarchical", "method",
                                          master_seed=3)
        assert len(trace.values) == 5
        assert summary.mean_best >= max(trace.gammas) - 1e-12


class TestDeriveBounds:
    @staticmethod
    def trace(values, gammas, gamma_default, default, kind=REAL_RANGE):
        return OneDimTrace("em", "tol", kind, tuple(values), tuple(gammas),
                           gamma_default, default)

    def test_flat_trace_keeps_extremes(self):
        t = self.trace([1, 2, 3, 4, 5], [0.5] * 5, 0.5, 3)
        b = derive_bounds([t])["tol"]
        assert (b.low, b.high) == (1, 5)

    def test_sharp_drop_stops_before(self):
        t = self.trace([1, 2, 3, 4, 5], [0.5, 0.5, 0.5, 0.3, 0.1], 0.5, 2)
        b = derive_bounds([t])["tol"]
        assert (b.low, b.high) == (1, 3)

    def test_degenerate_single_point(self):
        t = self.trace([3], [0.4], 0.4, 3)
        b = derive_bounds([t])["tol"]
        assert (b.low, b.high) == (3, 3)

    def test_drop_below_default_on_left(self):
        t = self.trace([1, 2, 3, 4], [0.1, 0.45, 0.5, 0.5], 0.5, 3)
        b = derive_bounds([t])["tol"]
        assert (b.low, b.high) == (2, 4)

    def test_categorical_keeps_all_choices(self):
        t = self.trace(["a", "b", "c"], [0.5, 0.1, 0.4], 0.5, "a", kind=CATEGORICAL)
        b = derive_bounds([t])["tol"]
        assert b.choices == ("a", "b", "c")


class TestRandomSweep:
    def test_collapsed_bounds_give_zero_pvalue(self, small_corpus):
        bounds = {
            "iter_max": ParamBounds("iter_max", INTEGER_RANGE, 10, 10),
            "nstart": ParamBounds("nstart", INTEGER_RANGE, 1, 1),
            "variant": ParamBounds("variant", CATEGORICAL, choices=("lloyd",)),
        }
        _, summary = random_sweep(small_corpus, "kmeans", bounds, n_draws=8,
                                  master_seed=3)
        assert summary.p_value == 0.0
        assert summary.mean_improvement == 0.0
        assert sum(summary.histogram.counts) == 8
        assert summary.histogram.improving_count == 0

    def test_declared_bounds_cover_all_parameters(self, small_corpus):
        for algorithm in ("kmeans", "hierarchical", "em"):
            bounds = declared_bounds(algorithm, dataset=small_corpus[0])
            _, summary = random_sweep(small_corpus[:1], algorithm, bounds,
                                      n_draws=4, master_seed=3)
            assert summary.n_draws == 4
            assert sum(summary.histogram.counts) == 4

    def test_missing_bounds_rejected(self, small_corpus):
        with pytest.raises(UnknownParameterError):
            random_sweep(small_corpus, "kmeans", {}, n_draws=2)

    def test_draw_configuration_respects_bounds(self):
        bounds = declared_bounds("em")
        rng = np.random.default_rng(0)
        for _ in range(50):
            assignments = draw_configuration("em", bounds, rng)
            assert assignments["model"] in bounds["model"].choices
            assert 10 <= assignments["max_iter"] <= 1000
            assert 1e-10 <= assignments["tol"] <= 1e-2

    def test_crashed_run_scores_zero_and_flags(self, small_corpus):
        ds = small_corpus[0]
        task = (ds.dataset_id, ds.features, ds.labels, "kmeans",
                ds.num_objects + 5, {}, 1, "sweepnd", 0, None, None)
        record = _execute_task(task)
        assert record.crashed
        assert all(v == 0.0 for v in record.indices.values())


class TestWorkerDeterminism:
    def test_records_identical_across_worker_counts(self, small_corpus):
        r1, _ = run_default(small_corpus, ["kmeans", "hierarchical"],
                            master_seed=3, workers=1)
        r2, _ = run_default(small_corpus, ["kmeans", "hierarchical"],
                            master_seed=3, workers=2)
        for a, b in zip(r1, r2):
            assert a.dataset_id == b.dataset_id
            assert a.indices == b.indices
            assert a.seed == b.seed
