import csv
import math
from importlib import resources

import numpy as np
import pytest

from mcamsim.bench.classify import MemorySearch, accuracy, cam_config, nn_classify, parse_backend
from mcamsim.bench.data import Dataset, load_builtin, quantize, split
from mcamsim.cell import build_lut
from mcamsim.device import VariationParams
from mcamsim.errors import DomainError

from . import _oracle


def test_parse_backend():
    assert parse_backend("mcam3").bits == 3
    assert parse_backend("mcam(2)").name == "mcam2"
    assert parse_backend("tcam_lsh").n_bits is None
    assert parse_backend("tcam_lsh256").n_bits == 256
    assert parse_backend("Euclidean").kind == "euclidean"
    with pytest.raises(DomainError, match="valid: mcam<B>, tcam_lsh, cosine, euclidean, linf"):
        parse_backend("l1")
    with pytest.raises(DomainError):
        parse_backend("mcam0")


def test_cam_config_high_bits():
    cfg = cam_config(6)
    assert cfg.num_states == 64
    assert cfg.device.vth_levels[0] == 560.0 and cfg.device.vth_levels[-1] == pytest.approx(1200.0)


def _unique_iris():
    ds = load_builtin("iris")
    _, idx = np.unique(ds.features, axis=0, return_index=True)  # drop duplicate samples
    return ds.subset(np.sort(idx))


@pytest.mark.parametrize("backend", ["cosine", "euclidean", "linf"])
def test_self_match_is_perfect(backend):
    d = _unique_iris()
    assert nn_classify(d, d, backend) == 100.0


@pytest.mark.parametrize("backend", ["mcam3", "mcam2", "tcam_lsh"])
def test_self_query_returns_first_identical_code(backend):
    d = _unique_iris()
    ms = MemorySearch(d.features, backend)
    if backend == "tcam_lsh":
        codes = ms.encoder.encode(ms._stored)
    else:
        codes = ms.query_states(d.features)
    first = {tuple(r): k for k, r in reversed(list(enumerate(codes.tolist())))}
    assert ms.nearest(d.features).tolist() == [first[tuple(r)] for r in codes.tolist()]


def _read_iris():
    rows = list(csv.reader(resources.files("mcamsim").joinpath("data/iris.csv").read_text().splitlines()))
    return [[float(v) for v in r[:-1]] for r in rows[1:]], [int(r[-1]) for r in rows[1:]]


def test_iris_euclidean_matches_scripted_oracle():
    x, y = _read_iris()
    perm = np.random.default_rng(0).permutation(len(x)).tolist()
    tr, te = perm[:120], perm[120:]
    lo = [min(x[i][j] for i in tr) for j in range(4)]
    hi = [max(x[i][j] for i in tr) for j in range(4)]

    def scale(v):
        return [(v[j] - lo[j]) / (hi[j] - lo[j]) for j in range(4)]

    correct = 0
    for q in te:
        best, best_d = None, math.inf
        for k in tr:
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(scale(x[q]), scale(x[k]))))
            if d < best_d:
                best, best_d = k, d
        correct += y[best] == y[q]
    expect = 100.0 * correct / len(te)
    train, test = split(load_builtin("iris"), 0.8, 0)
    assert nn_classify(train, test, "euclidean") == expect


def test_fine_mcam_matches_lut_sum_oracle():
    """B=6 MCAM winners equal a per-feature LUT-sum double loop over the same quantized words."""
    train, test = split(load_builtin("wine"), 0.8, 1)
    ms = MemorySearch(train.features, "mcam6")
    table = build_lut(cam_config(6)).table.tolist()
    rows = quantize(train.features, ms.ranges, 6).tolist()
    queries = quantize(test.features, ms.ranges, 6).tolist()
    got = ms.nearest(test.features).tolist()
    assert got == [_oracle.brute_force_winner(table, q, rows)[0] for q in queries]


def test_quantizer_fitted_on_training_only():
    train, test = split(load_builtin("iris"), 0.8, 0)
    ms = MemorySearch(train.features, "mcam3")
    assert np.array_equal(ms.ranges, train.feature_ranges())


def test_lsh_uses_feature_count_bits():
    train, _ = split(load_builtin("wine"), 0.8, 0)
    assert MemorySearch(train.features, "tcam_lsh").encoder.n_bits == 13
    assert MemorySearch(train.features, "tcam_lsh64").encoder.n_bits == 64


def test_variation_only_for_mcam():
    train, test = split(load_builtin("iris"), 0.8, 0)
    with pytest.raises(DomainError):
        nn_classify(train, test, "cosine", var=VariationParams(10.0))
    a = nn_classify(train, test, "mcam3", var=VariationParams(0.0), rng=np.random.default_rng(0))
    assert a == nn_classify(train, test, "mcam3")


def test_dimension_mismatch_and_accuracy():
    a = Dataset(np.zeros((3, 2)), np.zeros(3))
    b = Dataset(np.zeros((3, 3)), np.zeros(3))
    with pytest.raises(DomainError):
        nn_classify(a, b, "euclidean")
    assert accuracy([1, 2, 3, 4], [1, 2, 0, 4]) == 75.0
    with pytest.raises(DomainError):
        accuracy([], [])


def test_classification_reproducible():
    train, test = split(load_builtin("breast_cancer"), 0.8, 0)
    for b in ("mcam3", "tcam_lsh", "cosine"):
        assert nn_classify(train, test, b) == nn_classify(train, test, b)
