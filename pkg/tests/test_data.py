import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcamsim.bench.data import Dataset, builtin_path, load_builtin, load_csv, quantize, split
from mcamsim.errors import DatasetError, DomainError


@pytest.mark.parametrize("name,p,n,k", [("iris", 150, 4, 3), ("wine", 178, 13, 3), ("breast_cancer", 569, 30, 2)])
def test_builtin_shapes(name, p, n, k):
    ds = load_builtin(name)
    assert (ds.n_samples, ds.n_features, len(ds.classes)) == (p, n, k)


@pytest.mark.parametrize("name", ["iris", "wine", "breast_cancer"])
def test_builtin_matches_sklearn(name):
    sk = pytest.importorskip("sklearn.datasets")
    ref = getattr(sk, f"load_{name}")()
    ds = load_builtin(name)
    assert np.allclose(ds.features, ref.data, rtol=1e-12)
    assert np.array_equal(ds.labels, ref.target)


def test_builtin_env_override(tmp_path, monkeypatch):
    (tmp_path / "iris.csv").write_text("a,label\n1,0\n2,1\n")
    monkeypatch.setenv("MCAMSIM_DATA_DIR", str(tmp_path))
    assert load_builtin("iris").n_samples == 2
    with pytest.raises(DatasetError):
        builtin_path("mnist")


def test_wine_quality_semicolon(tmp_path, monkeypatch):
    (tmp_path / "winequality_red.csv").write_text('"fixed acidity";"alcohol";"quality"\n7.4;9.4;5\n7.8;9.8;6\n')
    monkeypatch.setenv("MCAMSIM_DATA_DIR", str(tmp_path))
    ds = load_builtin("wine_quality")
    assert ds.n_features == 2 and ds.labels.tolist() == [5, 6]


def test_load_csv_errors(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("")
    with pytest.raises(DatasetError, match="empty"):
        load_csv(f)
    f.write_text("a,b,label\n1,2,0\n3,oops,1\n")
    with pytest.raises(DatasetError, match=r"line 3, column 'b'"):
        load_csv(f)
    f.write_text("a,b,label\n1,2,\n")
    with pytest.raises(DatasetError, match="missing its label"):
        load_csv(f)
    f.write_text("a,b,label\n1,2\n")
    with pytest.raises(DatasetError, match="fields"):
        load_csv(f)
    f.write_text("a,b,cls\n1,2,0\n")
    with pytest.raises(DatasetError, match="label column"):
        load_csv(f)
    f.write_text("a,b,label\n")
    with pytest.raises(DatasetError, match="no data rows"):
        load_csv(f)
    f.write_text("a,b,label\n1,nan,0\n")
    with pytest.raises(DatasetError):
        load_csv(f)


def test_load_csv_label_index_and_strings(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("species,a,b\nsetosa,1,2\nother,3,4\n")
    ds = load_csv(f, label_column=0)
    assert ds.labels.tolist() == ["setosa", "other"] and ds.feature_names == ("a", "b")


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(DatasetError):
        Dataset(np.array([[np.nan]]), np.zeros(1))


def test_split_sizes_and_partition():
    ds = load_builtin("iris")
    tr, te = split(ds, 0.8, seed=3)
    assert (tr.n_samples, te.n_samples) == (120, 30)
    tr2, te2 = split(ds, 0.8, seed=3)
    assert np.array_equal(tr.features, tr2.features) and np.array_equal(te.labels, te2.labels)
    rows = {tuple(r) + (l,) for r, l in zip(ds.features, ds.labels)}
    got = [tuple(r) + (l,) for r, l in zip(np.vstack([tr.features, te.features]),
                                            np.concatenate([tr.labels, te.labels]))]
    assert len(got) == 150 and set(got) == rows
    with pytest.raises(DomainError):
        split(ds, 1.0)


def test_split_stratified():
    ds = load_builtin("iris")
    tr, te = split(ds, 0.8, seed=0, stratify=True)
    assert np.bincount(tr.labels).tolist() == [40, 40, 40]
    assert te.n_samples == 30


def test_quantize_examples():
    r = np.array([[0.0, 8.0]])
    assert quantize([4.0], r, 3).tolist() == [4]
    assert quantize([0.0], r, 3).tolist() == [0]
    assert quantize([8.0], r, 3).tolist() == [7]
    assert quantize([-5.0], r, 3).tolist() == [0]
    assert quantize([50.0], r, 3).tolist() == [7]
    with pytest.raises(DomainError):
        quantize([1.0], r, 0)


def test_quantize_test_value_below_training_min():
    ds = load_builtin("iris")
    tr, _ = split(ds, 0.8, 0)
    ranges = tr.feature_ranges()
    below = ranges[:, 0] - 1.0
    assert quantize(below, ranges, 3).tolist() == [0] * 4


def test_quantize_degenerate_range():
    r = np.array([[2.0, 2.0]])
    assert quantize([[1.0], [2.0], [3.0]], r, 2).ravel().tolist() == [0, 0, 3]


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-5, 5), st.floats(0.01, 10), st.integers(1, 6))
def test_quantize_monotone(x, y, lo, width, bits):
    r = np.array([[lo, lo + width]])
    a, b = sorted([x, y])
    qa, qb = quantize([a], r, bits)[0], quantize([b], r, bits)[0]
    assert qa <= qb and 0 <= qa < 2**bits
