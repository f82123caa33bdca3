"""Round-trip and validation tests for the binary and CSV file formats."""

import json

import numpy as np
import pytest

from sik import (
    ExperimentReport,
    FormatError,
    fit_ensemble,
    load_ensemble,
    read_dataset,
    read_dataset_csv,
    read_scores_csv,
    save_ensemble,
    write_dataset,
    write_dataset_csv,
    write_scores_csv,
)
from sik.evaluation import BenchRow
from sik.features import IkFeatureBatch, SikFeatureBatch, pack_bits
from sik.formats import (
    ensemble_from_bytes,
    ensemble_to_bytes,
    read_dataset_binary,
    write_bench_csv,
    write_dataset_binary,
    write_ik_features_csv,
    write_reports_csv,
    write_reports_jsonl,
    write_sik_features_csv,
)


def _ensemble(seed=0):
    data = np.random.default_rng(seed).standard_normal((40, 5))
    return fit_ensemble(data, psi=8, t=6, seed=seed)


class TestModelFormat:
    def test_round_trip_is_bit_exact(self, tmp_path):
        ens = _ensemble(3)
        path = tmp_path / "m.sikm"
        save_ensemble(ens, path)
        loaded = load_ensemble(path)
        assert np.array_equal(loaded.centers, ens.centers)
        assert np.array_equal(loaded.radii, ens.radii)
        assert loaded.seed == ens.seed
        assert ensemble_to_bytes(loaded) == ensemble_to_bytes(ens)

    def test_header_layout(self):
        ens = _ensemble(1)
        raw = ensemble_to_bytes(ens)
        assert raw[:4] == b"SIKM"
        assert int.from_bytes(raw[4:8], "little") == 1  # format version
        assert int.from_bytes(raw[8:16], "little") == ens.d
        assert int.from_bytes(raw[16:24], "little") == ens.psi
        assert int.from_bytes(raw[24:32], "little") == ens.t
        assert int.from_bytes(raw[32:40], "little") == ens.seed
        assert len(raw) == 40 + ens.t * (ens.psi * ens.d + ens.psi) * 8

    def test_bad_magic_rejected(self):
        raw = bytearray(ensemble_to_bytes(_ensemble()))
        raw[:4] = b"NOPE"
        with pytest.raises(FormatError, match="magic"):
            ensemble_from_bytes(bytes(raw))

    def test_truncation_rejected(self):
        raw = ensemble_to_bytes(_ensemble())
        with pytest.raises(FormatError):
            ensemble_from_bytes(raw[:-8])
        with pytest.raises(FormatError):
            ensemble_from_bytes(raw[:10])

    def test_unsupported_version_rejected(self):
        raw = bytearray(ensemble_to_bytes(_ensemble()))
        raw[4] = 99
        with pytest.raises(FormatError, match="version"):
            ensemble_from_bytes(bytes(raw))


class TestDatasetBinary:
    def test_round_trip_with_labels(self, tmp_path):
        rng = np.random.default_rng(4)
        values = rng.standard_normal((30, 7)).astype(np.float32).astype(np.float64)
        labels = (rng.random(30) < 0.2).astype(np.uint8)
        path = tmp_path / "d.sikd"
        write_dataset_binary(path, values, labels)
        ds = read_dataset_binary(path)
        assert np.array_equal(ds.values, values)
        assert np.array_equal(ds.labels, labels)

    def test_round_trip_without_labels(self, tmp_path):
        values = np.random.default_rng(5).standard_normal((10, 3)).astype(np.float32)
        path = tmp_path / "d.sikd"
        write_dataset_binary(path, values.astype(np.float64))
        ds = read_dataset_binary(path)
        assert ds.labels is None
        assert np.array_equal(ds.values, values.astype(np.float64))

    def test_header_layout(self, tmp_path):
        path = tmp_path / "d.sikd"
        write_dataset_binary(path, np.zeros((3, 2)))
        raw = path.read_bytes()
        assert raw[:4] == b"SIKD"
        assert int.from_bytes(raw[4:12], "little") == 3
        assert int.from_bytes(raw[12:20], "little") == 2
        assert len(raw) == 20 + 3 * 2 * 4

    def test_bad_length_rejected(self, tmp_path):
        path = tmp_path / "d.sikd"
        write_dataset_binary(path, np.zeros((3, 2)))
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(FormatError, match="length"):
            read_dataset_binary(path)


class TestDatasetCsv:
    def test_labeled_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        values = rng.standard_normal((12, 4))
        labels = (rng.random(12) < 0.3).astype(np.uint8)
        path = tmp_path / "d.csv"
        write_dataset_csv(path, values, labels)
        ds = read_dataset_csv(path)
        assert np.array_equal(ds.values, values)  # 17 digits round-trips float64
        assert np.array_equal(ds.labels, labels)

    def test_headerless_matrix(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.5,2.5\n3.5,4.5\n")
        ds = read_dataset_csv(path)
        assert ds.labels is None
        assert ds.values.tolist() == [[1.5, 2.5], [3.5, 4.5]]

    def test_header_without_label_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        ds = read_dataset_csv(path)
        assert ds.labels is None
        assert ds.values.tolist() == [[1.0, 2.0]]

    def test_bad_cell_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("f0,label\nx,1\n")
        with pytest.raises(FormatError):
            read_dataset_csv(path)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(FormatError):
            read_dataset_csv(path)

    def test_extension_dispatch(self, tmp_path):
        values = np.random.default_rng(7).standard_normal((5, 2)).astype(np.float32)
        for name in ("d.csv", "d.sikd"):
            path = tmp_path / name
            write_dataset(path, values.astype(np.float64))
            assert np.array_equal(read_dataset(path).values, values.astype(np.float64))


class TestScoresCsv:
    def test_seventeen_digit_round_trip(self, tmp_path):
        scores = np.random.default_rng(8).random(50)
        path = tmp_path / "s.csv"
        write_scores_csv(path, scores)
        back, labels = read_scores_csv(path)
        assert labels is None
        assert np.array_equal(back, scores)

    def test_labels_preserved(self, tmp_path):
        scores = np.array([0.25, 1.0, 0.0])
        labels = np.array([0, 1, 0], dtype=np.uint8)
        path = tmp_path / "s.csv"
        write_scores_csv(path, scores, labels)
        back, lab = read_scores_csv(path)
        assert np.array_equal(back, scores)
        assert np.array_equal(lab, labels)

    def test_header_contract(self, tmp_path):
        path = tmp_path / "s.csv"
        write_scores_csv(path, np.array([0.5]), np.array([1], dtype=np.uint8))
        lines = path.read_text().splitlines()
        assert lines[0] == "index,score,label"
        assert lines[1].startswith("0,0.5")


class TestFeatureCsv:
    def test_boundary_features(self, tmp_path):
        bits = np.array([[1, 0, 1], [0, 0, 0]], dtype=np.uint8)
        batch = SikFeatureBatch(pack_bits(bits), t=3)
        path = tmp_path / "f.csv"
        write_sik_features_csv(path, batch)
        assert path.read_text().splitlines() == ["1,0,1", "0,0,0"]

    def test_assignment_features_use_minus_one(self, tmp_path):
        a = np.array([[2, -1], [0, 1]], dtype=np.int32)
        batch = IkFeatureBatch(a, psi=3)
        path = tmp_path / "f.csv"
        write_ik_features_csv(path, batch)
        assert path.read_text().splitlines() == ["2,-1", "0,1"]


class TestReports:
    def _report(self, **kw):
        base = dict(
            method="sik", psi=32, t=200, seed=0, auroc=0.995,
            fit_seconds=0.5, score_seconds=0.25, feature_bytes=1000,
        )
        base.update(kw)
        return ExperimentReport(**base)

    def test_csv_fields(self, tmp_path):
        path = tmp_path / "r.csv"
        write_reports_csv(path, [self._report()])
        lines = path.read_text().splitlines()
        assert lines[0] == "method,psi,t,seed,auroc,fit_seconds,score_seconds,feature_bytes"
        assert lines[1].split(",")[0] == "sik"

    def test_csv_includes_ratio_when_present(self, tmp_path):
        path = tmp_path / "r.csv"
        write_reports_csv(path, [self._report(ratio=0.05)])
        lines = path.read_text().splitlines()
        assert lines[0].endswith(",ratio")
        assert float(lines[1].rsplit(",", 1)[1]) == 0.05

    def test_jsonl_records(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_reports_jsonl(path, [self._report(), self._report(seed=1)])
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(records) == 2
        assert records[0]["method"] == "sik"
        assert records[1]["seed"] == 1
        assert set(records[0]) == {
            "method", "psi", "t", "seed", "auroc",
            "fit_seconds", "score_seconds", "feature_bytes",
        }

    def test_bench_csv(self, tmp_path):
        row = BenchRow(
            size=1000, sik_fit_seconds=0.1, sik_score_seconds=0.2,
            idk_fit_seconds=0.7, idk_score_seconds=0.3,
            sik_feature_bytes=25_000, idk_feature_bytes=400_000,
        )
        path = tmp_path / "b.csv"
        write_bench_csv(path, [row])
        lines = path.read_text().splitlines()
        assert lines[0].startswith("size,sik_fit_seconds")
        assert lines[1].startswith("1000,0.1")
