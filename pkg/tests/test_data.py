import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipe_linear.data import (
    RawDataset, SplitSpec, Standardizer, WindowSource, default_split, fit_standardizer, load_csv,
    split, window_starts, windows,
)
from dipe_linear.exceptions import DataError, DimensionError, IngestionError, ParameterError
from dipe_linear.model import ModelConfig
from helpers import write_csv
from oracles import two_pass_std


def test_load_with_date(tmp_path):
    path = write_csv(tmp_path / "a.csv", [[1, 2], [3, 4], [5, 6]], ["x", "y"])
    ds = load_csv(path)
    assert ds.values.shape == (3, 2) and ds.names == ["x", "y"]
    assert ds.timestamps == ["2020-01-01 0", "2020-01-01 1", "2020-01-01 2"]
    np.testing.assert_array_equal(ds.values, [[1, 2], [3, 4], [5, 6]])


def test_load_without_date(tmp_path):
    path = write_csv(tmp_path / "b.csv", [[1.5, 2], [3, -4e-3]], ["p", "q"], date=False)
    ds = load_csv(path)
    assert ds.timestamps is None and ds.names == ["p", "q"]
    np.testing.assert_array_equal(ds.values, [[1.5, 2], [3, -4e-3]])


def test_load_detects_unlabelled_date(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("when,a\n2020-01,1\n2020-02,2\n")
    ds = load_csv(str(p))
    assert ds.timestamps == ["2020-01", "2020-02"] and ds.names == ["a"]


def test_load_full_precision(tmp_path):
    vals = np.random.default_rng(0).normal(size=(5, 3))
    ds = load_csv(write_csv(tmp_path / "d.csv", vals))
    np.testing.assert_array_equal(ds.values, vals)


@pytest.mark.parametrize("body,match", [
    ("a,b\n1,2\n3\n", "row 3"),
    ("a,b\n1,2\n3,oops\n", "row 3, column 'b'"),
    ("a,b\n1,nan\n", "row 2, column 'b'"),
    ("a,b\n", "no data"),
    ("", "empty"),
])
def test_load_errors(tmp_path, body, match):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(IngestionError, match=match):
        load_csv(str(p))


def test_load_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        load_csv(str(tmp_path / "missing.csv"))


def test_split_example():
    cfg = ModelConfig(5, 3)
    ds = RawDataset(["a"], np.arange(100.0)[:, None])
    r = split(ds, SplitSpec(0.6, 0.2, 0.2), cfg)
    assert (r.train, r.val, r.test) == ((0, 60), (60, 80), (80, 100))


def test_split_by_rows():
    ds = RawDataset(["a"], np.arange(100.0)[:, None])
    r = split(ds, SplitSpec(rows=(50, 20, 20)), ModelConfig(5, 3))
    assert (r.train, r.val, r.test) == ((0, 50), (50, 70), (70, 90))
    with pytest.raises(DataError):
        SplitSpec(rows=(60, 30, 20)).boundaries(100)


def test_split_spec_validation():
    with pytest.raises(ParameterError):
        SplitSpec(0.5, 0.2, 0.2)
    with pytest.raises(ParameterError):
        SplitSpec(0.8, 0.0, 0.2)
    with pytest.raises(ParameterError):
        SplitSpec(rows=(1, 0, 1))


def test_default_split():
    assert default_split("/x/ETTh1.csv") == SplitSpec(0.6, 0.2, 0.2)
    assert default_split("ETTm2.csv") == SplitSpec(0.6, 0.2, 0.2)
    assert default_split("weather.csv") == SplitSpec(0.7, 0.1, 0.2)
    assert default_split("electricity.csv") == SplitSpec(0.7, 0.1, 0.2)


def test_ett_window_counts():
    # 12/4/4 months of hourly rows: val/test windows borrow their look-back
    cfg = ModelConfig(336, 96)
    ds = RawDataset(["a"], np.zeros((17420, 1)))
    spec = SplitSpec(rows=(12 * 30 * 24, 4 * 30 * 24, 4 * 30 * 24))
    r = split(ds, spec, cfg)
    counts = [len(window_starts(r[n], cfg)) for n in ("train", "val", "test")]
    assert counts == [8640 - 336 - 96 + 1, 2880 - 96 + 1, 2880 - 96 + 1]


def test_split_too_short():
    ds = RawDataset(["a"], np.zeros((10, 1)))
    with pytest.raises(DataError):
        split(ds, SplitSpec(), ModelConfig(8, 4))
    ds = RawDataset(["a"], np.zeros((40, 1)))
    with pytest.raises(DataError, match="val"):
        split(ds, SplitSpec(0.8, 0.05, 0.15), ModelConfig(8, 4))


def test_window_count_enumeration():
    cfg = ModelConfig(10, 5)
    a, b = 40, 70
    for borrow in (True, False):
        starts = window_starts((a, b), cfg, borrow)
        brute = [s for s in range(0, 200)
                 if s + 15 <= b and s + 10 >= a and (borrow or s >= a)]
        assert starts.tolist() == brute
    assert len(window_starts((a, b), cfg, True)) == 30 - 5 + 1
    assert len(window_starts((0, 100), cfg, False)) == 86


def test_no_target_leakage():
    cfg = ModelConfig(24, 12)
    ds = RawDataset(["a"], np.zeros((500, 1)))
    r = split(ds, SplitSpec(), cfg)
    for name in ("train", "val", "test"):
        a, b = r[name]
        for s in window_starts(r[name], cfg):
            assert a <= s + cfg.lookback and s + cfg.lookback + cfg.horizon <= b


def test_standardizer_examples(rng):
    ds = RawDataset(["a"], np.array([[1.0], [3.0]]))
    st_ = fit_standardizer(ds, (0, 2))
    assert st_.mean[0] == 2.0 and st_.std[0] == 1.0
    z = rng.normal(size=(5000, 1))
    z = (z - z.mean()) / z.std()
    s2 = fit_standardizer(RawDataset(["z"], z), (0, 5000))
    assert abs(s2.mean[0]) < 1e-12 and abs(s2.std[0] - 1) < 1e-12


def test_standardizer_two_pass(rng):
    vals = rng.normal(3.0, 7.0, size=(1000, 2))
    s = fit_standardizer(RawDataset(["a", "b"], vals), (0, 1000))
    for c in range(2):
        m, sd = two_pass_std(vals[:, c])
        assert abs(s.mean[c] - m) < 1e-12 and abs(s.std[c] - sd) < 1e-12


def test_standardizer_train_rows_only(rng):
    vals = rng.normal(size=(100, 1))
    vals[60:] += 100
    s = fit_standardizer(RawDataset(["a"], vals), (0, 60))
    assert abs(s.mean[0] - vals[:60].mean()) < 1e-12


def test_standardizer_constant_channel():
    vals = np.ones((10, 2))
    vals[:, 0] = np.arange(10)
    with pytest.raises(DataError, match="'b'"):
        fit_standardizer(RawDataset(["a", "b"], vals), (0, 10))
    with pytest.raises(DataError):
        fit_standardizer(RawDataset(["a", "b"], vals), (3, 3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_standardize_roundtrip(seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(rng.uniform(-50, 50), rng.uniform(0.1, 20), size=(30, 3))
    s = fit_standardizer(RawDataset(list("abc"), vals), (0, 20))
    back = s.inverse_transform(s.transform(vals))
    assert np.max(np.abs(back - vals)) <= 1e-12 * max(1.0, np.max(np.abs(vals)))


def make_source(rng, T=80, C=2, L=10, H=5):
    vals = rng.normal(size=(T, C))
    ds = RawDataset([f"c{i}" for i in range(C)], vals)
    cfg = ModelConfig(L, H, C)
    s = fit_standardizer(ds, (0, T))
    return ds, s, cfg, WindowSource(ds, s, cfg)


def test_window_contents(rng):
    ds, s, cfg, src = make_source(rng)
    batch = src.gather([0, 7])
    z = s.transform(ds.values)
    assert batch.inputs.shape == (2, 2, 10) and batch.targets.shape == (2, 2, 5)
    np.testing.assert_array_equal(batch.inputs[1], z[7:17].T)
    np.testing.assert_array_equal(batch.targets[1], z[17:22].T)


def test_batches_ordered_and_short_last(rng):
    _, _, _, src = make_source(rng)
    starts = np.arange(0, 23)
    got = list(src.batches(starts, 5))
    assert [len(b.starts) for b in got] == [5, 5, 5, 5, 3]
    np.testing.assert_array_equal(np.concatenate([b.starts for b in got]), starts)


@pytest.mark.parametrize("bs", [1, 4, 7, 64])
def test_epoch_completeness(rng, bs):
    _, _, _, src = make_source(rng)
    starts = np.arange(3, 40)
    seen = np.concatenate([b.starts for b in src.batches(starts, bs, shuffle=True, seed=[5, 2])])
    assert sorted(seen.tolist()) == starts.tolist()


def test_shuffle_seeded(rng):
    _, _, _, src = make_source(rng)
    starts = np.arange(50)
    a = [b.starts.tolist() for b in src.batches(starts, 8, shuffle=True, seed=3)]
    b = [b.starts.tolist() for b in src.batches(starts, 8, shuffle=True, seed=3)]
    c = [b.starts.tolist() for b in src.batches(starts, 8, shuffle=True, seed=4)]
    assert a == b and a != c


def test_windows_helper(rng):
    ds, s, cfg, _ = make_source(rng, T=100)
    batches = list(windows(ds, (0, 100), s, cfg, 32, borrow=False))
    assert sum(len(b.starts) for b in batches) == 86
    with pytest.raises(DataError):
        windows(ds, (0, 10), s, cfg, 32)


def test_source_channel_mismatch(rng):
    ds, s, _, _ = make_source(rng)
    with pytest.raises(DimensionError):
        WindowSource(ds, s, ModelConfig(10, 5, 3))


def test_batch_size_validation(rng):
    _, _, _, src = make_source(rng)
    with pytest.raises(ParameterError):
        list(src.batches(np.arange(5), 0))
