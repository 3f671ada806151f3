"""LIBSVM parsing, synthetic generators, trace persistence."""

import io
import math

import numpy as np
import pytest

from marsadmm import (
    Dataset,
    IterationRecord,
    LibsvmParseError,
    TraceSchemaError,
    gen_classifier_data,
    gen_spca_data,
    parse_libsvm,
    read_trace,
    serialize_libsvm,
    write_trace,
)


class TestParseLibsvm:
    def test_basic_line(self):
        ds = parse_libsvm("-1 1:0.5 3:2\n")
        assert np.array_equal(ds.features, [[0.5, 0.0, 2.0]])
        assert np.array_equal(ds.labels, [-1.0])

    def test_label_mapping(self):
        ds = parse_libsvm("0 1:1\n1 1:1\n-1 1:1\n+1 1:1\n")
        assert np.array_equal(ds.labels, [-1.0, 1.0, -1.0, 1.0])

    def test_empty_lines_skipped(self):
        ds = parse_libsvm("\n-1 1:1\n\n  \n+1 2:3\n")
        assert ds.features.shape == (2, 2)

    def test_malformed_value_reports_line(self):
        with pytest.raises(LibsvmParseError, match="line 1"):
            parse_libsvm("1 2:a\n")

    def test_bad_label(self):
        with pytest.raises(LibsvmParseError, match="label"):
            parse_libsvm("3 1:1\n")

    def test_nonincreasing_index(self):
        with pytest.raises(LibsvmParseError, match="line 1"):
            parse_libsvm("1 2:1 2:3\n")
        with pytest.raises(LibsvmParseError):
            parse_libsvm("1 3:1 2:3\n")

    def test_index_starts_at_one(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm("1 0:1\n")

    def test_dimension_override(self):
        ds = parse_libsvm("1 2:5\n", n_features=4)
        assert ds.features.shape == (1, 4)
        with pytest.raises(LibsvmParseError):
            parse_libsvm("1 5:1\n", n_features=4)

    def test_nonfinite_rejected(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm("1 1:inf\n")

    def test_bytes_and_stream_inputs(self):
        text = "+1 1:2.5\n"
        a = parse_libsvm(text)
        b = parse_libsvm(text.encode())
        c = parse_libsvm(io.StringIO(text))
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.features, c.features)

    def test_roundtrip_with_serializer(self):
        rng = np.random.default_rng(0)
        feats = np.round(rng.standard_normal((5, 4)), 6)
        feats[rng.random((5, 4)) < 0.4] = 0.0
        labels = np.where(rng.standard_normal(5) > 0, 1.0, -1.0)
        text = serialize_libsvm(Dataset(features=feats, labels=labels, source={"kind": "test"}))
        back = parse_libsvm(text, n_features=4)
        assert np.array_equal(back.features, feats)
        assert np.array_equal(back.labels, labels)


class TestGenerators:
    def test_spca_columns_centered_unit(self):
        ds = gen_spca_data(10, 30, 0)
        assert ds.features.shape == (10, 30)
        assert np.all(np.abs(ds.features.mean(axis=0)) <= 1e-12)
        assert np.all(np.abs(np.linalg.norm(ds.features, axis=0) - 1.0) <= 1e-12)

    def test_spca_deterministic(self):
        assert np.array_equal(gen_spca_data(6, 9, 42).features, gen_spca_data(6, 9, 42).features)

    def test_spca_m_too_small(self):
        with pytest.raises(ValueError):
            gen_spca_data(5, 1, 0)

    def test_classifier_noiseless_labels(self):
        ds = gen_classifier_data(5, 200, 0.0, 7)
        truth = np.asarray(ds.source["ground_truth"], dtype=float)
        margins = ds.features @ truth
        assert np.array_equal(ds.labels, np.where(margins >= 0, 1.0, -1.0))

    def test_classifier_flip_rate_monotone_in_noise(self):
        flip = []
        for var in (0.01, 1.0, 5.0, 10.0):
            rates = []
            for seed in range(10):
                ds = gen_classifier_data(8, 2000, var, seed)
                truth = np.asarray(ds.source["ground_truth"], dtype=float)
                clean = np.where(ds.features @ truth >= 0, 1.0, -1.0)
                rates.append(np.mean(clean != ds.labels))
            flip.append(np.mean(rates))
        assert flip[0] < flip[1] < flip[2] < flip[3]

    def test_classifier_deterministic(self):
        a = gen_classifier_data(4, 50, 2.0, 3)
        b = gen_classifier_data(4, 50, 2.0, 3)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_feature_range(self):
        ds = gen_classifier_data(6, 500, 1.0, 11)
        assert ds.features.min() >= -1.0 and ds.features.max() <= 1.0


def _rand_record(rng, k, with_nan=False):
    return IterationRecord(
        iter=k,
        sfo_count=10 * k,
        diag_sfo=3 * k,
        wall_seconds=rng.random(),
        objective=math.nan if with_nan else rng.standard_normal(),
        r_feas=rng.random(),
        r_grad=math.nan if with_nan else rng.random(),
        r_subdiff=math.nan if with_nan else rng.random(),
        rho=rng.random() * 100,
        eta=rng.random(),
        beta=rng.random(),
        lambda_norm=rng.random(),
    )


class TestTraceIO:
    def test_roundtrip_exact(self):
        rng = np.random.default_rng(1)
        trace = [_rand_record(rng, k, with_nan=(k % 3 == 0)) for k in range(1, 20)]
        buf = io.StringIO()
        write_trace(trace, buf)
        buf.seek(0)
        back = read_trace(buf)
        assert len(back) == len(trace)
        for a, b in zip(trace, back):
            for name in vars(a):
                va, vb = getattr(a, name), getattr(b, name)
                if isinstance(va, float) and math.isnan(va):
                    assert math.isnan(vb)
                else:
                    assert va == vb  # 17 significant digits: bit-exact floats

    def test_empty_trace_header_only(self):
        buf = io.StringIO()
        write_trace([], buf)
        assert buf.getvalue().strip().count("\n") == 0
        buf.seek(0)
        assert read_trace(buf) == []

    def test_header_mismatch(self):
        with pytest.raises(TraceSchemaError):
            read_trace(io.StringIO("a,b,c\n1,2,3\n"))

    def test_row_width_mismatch(self):
        buf = io.StringIO()
        write_trace([_rand_record(np.random.default_rng(2), 1)], buf)
        broken = buf.getvalue().rstrip() + ",extra\n"
        lines = broken.splitlines()
        bad = lines[0] + "\n" + lines[1] + "\n"
        with pytest.raises(TraceSchemaError):
            read_trace(io.StringIO(bad))

    def test_iter_monotonicity_enforced(self):
        rng = np.random.default_rng(3)
        trace = [_rand_record(rng, 1), _rand_record(rng, 1)]
        buf = io.StringIO()
        write_trace(trace, buf)
        buf.seek(0)
        with pytest.raises(TraceSchemaError, match="strictly increasing"):
            read_trace(buf)

    def test_counter_monotonicity_enforced(self):
        rng = np.random.default_rng(4)
        a, b = _rand_record(rng, 1), _rand_record(rng, 2)
        b.sfo_count = a.sfo_count - 1
        buf = io.StringIO()
        write_trace([a, b], buf)
        buf.seek(0)
        with pytest.raises(TraceSchemaError, match="decrease"):
            read_trace(buf)

    def test_file_path_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        trace = [_rand_record(rng, k) for k in (1, 2, 5)]
        path = tmp_path / "t.csv"
        write_trace(trace, path)
        assert read_trace(path) == trace
