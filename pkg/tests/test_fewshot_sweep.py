import numpy as np
import pytest

from mcamsim.bench.data import load_builtin, split
from mcamsim.bench.classify import nn_classify
from mcamsim.bench.fewshot import (
    EpisodeSpec,
    SyntheticSpec,
    load_features,
    run_episode,
    sample_episodes,
    synthetic_features,
)
from mcamsim.bench.report import RunReport, config_hash
from mcamsim.bench.sweep import ClassifyWorkload, FewShotWorkload, trial_rng, variation_sweep
from mcamsim.errors import DatasetError, DomainError


def test_episode_spec_validation():
    with pytest.raises(DomainError):
        EpisodeSpec(n_way=1)
    with pytest.raises(DomainError):
        EpisodeSpec(k_shot=0)
    with pytest.raises(DomainError):
        EpisodeSpec(aggregation="mean")


def test_synthetic_deterministic():
    a, b = synthetic_features(), synthetic_features()
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert a[0].shape == (20, 64) and len(a) == 100


def test_episode_composition():
    pool = synthetic_features(SyntheticSpec(n_classes=10, per_class=8, feature_dim=4))
    spec = EpisodeSpec(3, 2, 4, 5, feature_dim=4)
    eps = sample_episodes(pool, spec, np.random.default_rng(0))
    assert len(eps) == 5
    for e in eps:
        assert e.support.shape == (6, 4) and e.queries.shape == (12, 4)
        assert np.bincount(e.support_labels).tolist() == [2, 2, 2]
        # support and queries are disjoint samples
        assert not any((e.support[:, None, :] == e.queries[None, :, :]).all(-1).ravel())
    proto = sample_episodes(pool, EpisodeSpec(3, 2, 4, 5, feature_dim=4, aggregation="prototype"),
                            np.random.default_rng(0))
    assert proto[0].support.shape == (3, 4)


def test_separable_clusters_are_perfect():
    pool = synthetic_features(SyntheticSpec(n_classes=10, per_class=10, feature_dim=64, spread=0.01))
    spec = EpisodeSpec(5, 1, 5, 20)
    for b in ("mcam3", "mcam2", "tcam_lsh", "cosine", "euclidean"):
        assert run_episode(pool, spec, b, 0) == 100.0


def test_insufficient_samples_names_class():
    pool = synthetic_features(SyntheticSpec(n_classes=6, per_class=10, feature_dim=64))
    pool[4] = pool[4][:3]
    with pytest.raises(DatasetError, match="class 4"):
        run_episode(pool, EpisodeSpec(5, 1, 5, 2), "mcam3")
    with pytest.raises(DatasetError, match="classes available"):
        run_episode(pool, EpisodeSpec(7, 1, 1, 2), "mcam3")


def test_feature_file(tmp_path):
    pool = synthetic_features(SyntheticSpec(n_classes=5, per_class=7, feature_dim=64))
    lines = ["class," + ",".join(f"f{k}" for k in range(64))]
    for c, x in pool.items():
        lines += [f"{c}," + ",".join(repr(float(v)) for v in row) for row in x]
    f = tmp_path / "feat.csv"
    f.write_text("\n".join(lines) + "\n")
    back = load_features(f, "class")
    assert sorted(back) == sorted(pool)
    assert all(np.array_equal(back[c], pool[c]) for c in pool)
    spec = EpisodeSpec(5, 1, 5, 10)
    assert run_episode(back, spec, "mcam3", 3) == run_episode(pool, spec, "mcam3", 3)
    f.write_text("class,a\n0,x\n")
    with pytest.raises(DatasetError):
        load_features(f, "class")


def test_same_episodes_for_every_backend():
    pool = synthetic_features()
    spec = EpisodeSpec(5, 1, 5, 10)
    a = sample_episodes(pool, spec, np.random.default_rng(9))
    b = sample_episodes(pool, spec, np.random.default_rng(9))
    assert all(np.array_equal(x.queries, y.queries) for x, y in zip(a, b))
    assert run_episode(pool, spec, "mcam3", 9) == run_episode(pool, spec, "mcam3", 9)


def _iris_workload():
    return ClassifyWorkload([split(load_builtin("iris"), 0.8, 0)])


def test_sweep_sigma_zero_is_nominal():
    w = _iris_workload()
    rows = variation_sweep(w, [0.0, 40.0], trials=3, seed=1)
    train, test = split(load_builtin("iris"), 0.8, 0)
    assert rows[0].mean == nn_classify(train, test, "mcam3") and rows[0].std == 0.0
    assert rows[1].nominal == rows[0].mean


def test_sweep_zero_sigma_through_sampler_matches_nominal():
    w = _iris_workload()
    from mcamsim.device import VariationParams

    assert w.accuracy(VariationParams(0.0), trial_rng(0, 0)) == w.accuracy()


def test_sweep_reproducible_and_validated():
    w = _iris_workload()
    a = variation_sweep(w, [20.0, 80.0], trials=4, seed=5)
    b = variation_sweep(w, [20.0, 80.0], trials=4, seed=5)
    assert a == b
    # common random numbers: a sigma's stats do not depend on which other sigmas are swept
    assert variation_sweep(w, [80.0], trials=4, seed=5)[0] == a[1]
    for bad in ([], [-1.0]):
        with pytest.raises(DomainError):
            variation_sweep(w, bad, trials=2)
    with pytest.raises(DomainError):
        variation_sweep(w, [1.0], trials=0)


def test_fewshot_workload_nominal_matches_run_episode():
    pool = synthetic_features()
    spec = EpisodeSpec(5, 1, 5, 20)
    w = FewShotWorkload(pool, spec, episode_seed=2)
    assert w.accuracy() == run_episode(pool, spec, "mcam3", 2)


def test_report_csv_and_summary(tmp_path):
    rep = RunReport("t", ("backend", "accuracy"), {"b": 1, "a": [1, 2]}, seed=3)
    rep.add("mcam3", 91.25)
    text = rep.to_csv(tmp_path / "r.csv")
    assert text.splitlines()[:3] == ["# t", f"# config_hash={rep.config_hash} seed=3", "backend,accuracy"]
    assert text.splitlines()[3] == "mcam3,91.2500"
    assert "mcam3" in rep.summary()
    with pytest.raises(DomainError):
        rep.add("x", 101.0)
    with pytest.raises(DomainError):
        rep.add("x")
    assert config_hash({"a": [1, 2], "b": 1}) == rep.config_hash
    assert config_hash({"a": [1, 2], "b": 2}) != rep.config_hash
