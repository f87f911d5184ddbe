import json

import numpy as np
import pytest

from clusterbench.cli import main
from clusterbench.dataio import format_header, load_dataset, write_dataset
from clusterbench.datagen import DatasetSpec, generate_dataset
from clusterbench.errors import OutputExistsError, ParseError, UnknownParameterError
from clusterbench.harness import (
    GridCell,
    RunConfig,
    cmd_gen,
    cmd_report,
    cmd_run,
    cmd_sweep1d,
    cmd_sweepnd,
    cmd_vary_k,
    config_hash,
    load_config,
    load_corpus,
    read_records,
)


@pytest.fixture
def dataset():
    return generate_dataset(DatasetSpec(3, 2, 7, 1.8, seed=31))


class TestDatasetFiles:
    def test_header_format(self, dataset):
        header = format_header(dataset.spec)
        assert header.startswith("# clusterbench-dataset v1; C=3;F=2;Ne=7;alpha=")
        assert "seed=31" in header and "realization=0" in header

    def test_round_trip_bitwise(self, tmp_path, dataset):
        path = write_dataset(dataset, tmp_path / "ds.tsv")
        loaded = load_dataset(path)
        assert np.array_equal(loaded.features, dataset.features)
        assert np.array_equal(loaded.labels, dataset.labels)
        assert loaded.spec == dataset.spec

    def test_truncated_file_rejected(self, tmp_path, dataset):
        path = write_dataset(dataset, tmp_path / "ds.tsv")
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(ParseError):
            load_dataset(path)

    def test_label_out_of_range_rejected(self, tmp_path, dataset):
        path = write_dataset(dataset, tmp_path / "ds.tsv")
        lines = path.read_text().splitlines()
        cells = lines[1].split("\t")
        cells[-1] = "9"
        lines[1] = "\t".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            load_dataset(path)
        assert info.value.line == 2

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "ds.tsv"
        path.write_text("garbage\n1\t2\t0\n")
        with pytest.raises(ParseError) as info:
            load_dataset(path)
        assert info.value.line == 1

    def test_bad_value_names_line_and_column(self, tmp_path, dataset):
        path = write_dataset(dataset, tmp_path / "ds.tsv")
        lines = path.read_text().splitlines()
        cells = lines[3].split("\t")
        cells[1] = "oops"
        lines[3] = "\t".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            load_dataset(path)
        assert info.value.line == 4
        assert info.value.column == 2


def tiny_config(tmp_path, **extra) -> dict:
    cfg = {
        "seed": 5,
        "workers": 1,
        "out": str(tmp_path / "out"),
        "data_dir": str(tmp_path / "data"),
        "corpus": {
            "cells": [{"num_classes": 3, "num_features": 2,
                       "objects_per_class": 15, "alpha": 2.5}],
            "realizations": 3,
        },
        "algorithms": ["kmeans", "hierarchical"],
        "vary_k": {"algorithms": ["kmeans"], "k_values": [2, 3, 4]},
        "sweep1d": {"algorithms": ["kmeans"], "parameters": {"kmeans": ["nstart"]}},
        "sweepnd": {"algorithms": ["kmeans"], "n_draws": 6},
    }
    cfg.update(extra)
    return cfg


def write_config(tmp_path, cfg) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestRunConfig:
    def test_load_and_hash(self, tmp_path):
        path = write_config(tmp_path, tiny_config(tmp_path))
        cfg = load_config(path)
        assert cfg.seed == 5
        assert cfg.cells == [GridCell(3, 2, 15, 2.5)]
        assert len(config_hash(cfg)) == 12

    def test_unknown_algorithm_rejected_before_compute(self, tmp_path):
        bad = tiny_config(tmp_path, algorithms=["kmeans", "dbscan"])
        with pytest.raises(UnknownParameterError):
            load_config(write_config(tmp_path, bad))

    def test_unknown_parameter_rejected_before_compute(self, tmp_path):
        bad = tiny_config(tmp_path)
        bad["sweep1d"] = {"algorithms": ["kmeans"], "parameters": {"kmeans": ["bogus"]}}
        with pytest.raises(UnknownParameterError):
            load_config(write_config(tmp_path, bad))

    def test_unknown_override_rejected(self, tmp_path):
        bad = tiny_config(tmp_path, overrides={"kmeans": {"bandwidth": 2}})
        with pytest.raises(UnknownParameterError):
            load_config(write_config(tmp_path, bad))


class TestPipeline:
    def test_gen_writes_corpus(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        written = cmd_gen(cfg)
        names = [p.name for p in written]
        assert "manifest.json" in names
        assert sum(n.endswith(".tsv") for n in names) == 3
        corpus = load_corpus(cfg.data_dir)
        assert len(corpus) == 3

    def test_run_produces_tables_and_records(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        written = cmd_run(cfg, cfg.data_dir)
        names = {p.name for p in written}
        assert {"records.jsonl", "table_differences_ari.tsv",
                "table_by_features.tsv", "summary_default.json"} <= names
        records = read_records(tmp_path / "out" / "records.jsonl")
        assert len(records) == 6  # 2 algorithms x 3 datasets
        header = (tmp_path / "out" / "table_differences_ari.tsv").read_text().splitlines()[0]
        assert header.startswith("# clusterbench differences-ari v1; seed=5; config=")

    def test_run_on_empty_corpus_errors_without_outputs(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        (tmp_path / "data").mkdir()
        with pytest.raises(Exception):
            cmd_run(cfg, cfg.data_dir)
        assert not (tmp_path / "out" / "records.jsonl").exists()

    def test_overwrite_guard_and_force(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        cmd_run(cfg, cfg.data_dir)
        with pytest.raises(OutputExistsError):
            cmd_run(cfg, cfg.data_dir)
        cmd_run(cfg, cfg.data_dir, force=True)

    def test_vary_k_table(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        written = cmd_vary_k(cfg, cfg.data_dir)
        table = next(p for p in written if p.name == "table_vary_k.tsv")
        body = table.read_text().splitlines()
        assert "# true_num_classes=3" in body[1]
        assert len([l for l in body if l.startswith("kmeans")]) == 3

    def test_sweep1d_traces_readable(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        written = cmd_sweep1d(cfg, cfg.data_dir)
        traces = next(p for p in written if p.name == "traces.jsonl")
        from clusterbench.harness import read_traces

        loaded = read_traces(traces)
        assert len(loaded) == 1
        assert loaded[0].parameter == "nstart"

    def test_sweepnd_histogram_conserves_draws(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        written = cmd_sweepnd(cfg, cfg.data_dir)
        hist = next(p for p in written if p.name == "histogram_kmeans.tsv")
        counts = [int(line.split("\t")[2]) for line in hist.read_text().splitlines()
                  if line and not line.startswith("#") and not line.startswith("bin_")]
        assert sum(counts) == 6

    def test_sweepnd_derived_bounds(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        cmd_sweep1d(cfg, cfg.data_dir)
        derived = tiny_config(tmp_path)
        derived["sweepnd"] = {
            "algorithms": ["kmeans"], "n_draws": 5, "bounds": "derived",
            "traces": str(tmp_path / "out" / "traces.jsonl"),
        }
        derived["out"] = str(tmp_path / "out_nd")
        cfg2 = load_config(write_config(tmp_path, derived))
        written = cmd_sweepnd(cfg2, cfg.data_dir)
        assert any(p.name == "table_sweepnd.tsv" for p in written)

    def test_report_kruskal(self, tmp_path):
        cfg = load_config(write_config(tmp_path, tiny_config(tmp_path)))
        cmd_gen(cfg)
        cmd_run(cfg, cfg.data_dir)
        report_cfg = load_config(write_config(tmp_path, tiny_config(
            tmp_path, out=str(tmp_path / "report"))))
        written = cmd_report(report_cfg, tmp_path / "out")
        table = next(p for p in written if p.name == "table_kruskal.tsv")
        lines = [l for l in table.read_text().splitlines() if not l.startswith("#")]
        assert lines[0].split("\t") == ["num_features", "n_groups", "h_statistic", "df", "p_value"]
        assert len(lines) == 2


class TestCli:
    def test_full_cli_flow(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config(tmp_path))
        assert main(["gen", "--config", path]) == 0
        assert main(["run", "--config", path]) == 0
        assert main(["vary-k", "--config", path, "--out", str(tmp_path / "vk")]) == 0
        out = capsys.readouterr().out
        assert "table_vary_k.tsv" in out

    def test_cli_error_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config(tmp_path))
        assert main(["run", "--config", path]) == 2  # no datasets yet
        assert "error" in capsys.readouterr().err

    def test_cli_overwrite_refused(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config(tmp_path))
        main(["gen", "--config", path])
        assert main(["gen", "--config", path]) == 2
        assert main(["gen", "--config", path, "--force"]) == 0

    def test_cli_seed_override_changes_hashless_outputs(self, tmp_path):
        path = write_config(tmp_path, tiny_config(tmp_path))
        main(["gen", "--config", path])
        a = (tmp_path / "data" / "DB3C2F_Ne15_r00.tsv").read_bytes()
        main(["gen", "--config", path, "--seed", "99", "--force"])
        b = (tmp_path / "data" / "DB3C2F_Ne15_r00.tsv").read_bytes()
        assert a != b


class TestDeterminismAcrossWorkers:
    def test_summary_files_bitwise_identical(self, tmp_path):
        base = tiny_config(tmp_path)
        path = write_config(tmp_path, base)
        cfg = load_config(path)
        cmd_gen(cfg)

        outputs = {}
        for workers in (1, 2):
            out = tmp_path / f"w{workers}"
            cfg_w = load_config(path)
            cfg_w.workers = workers
            cfg_w.out = str(out)
            cmd_run(cfg_w, cfg.data_dir)
            cmd_sweepnd(cfg_w, cfg.data_dir, force=True)
            outputs[workers] = {
                p.name: p.read_bytes()
                for p in sorted(out.iterdir())
                if p.name != "timings.jsonl"
            }
        assert outputs[1].keys() == outputs[2].keys()
        for name in outputs[1]:
            assert outputs[1][name] == outputs[2][name], name
