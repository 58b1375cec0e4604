import math

import numpy as np
import pytest

from nodebound.experiments import (
    classification_data,
    lip_gap_run,
    quartile_summary,
    spearman,
    sweep_lambda,
    sweep_width,
)
from nodebound.seeding import derive_seed
from nodebound.training import TrainConfig


def test_spearman_monotone_series():
    assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert spearman([1, 2, 3, 4], [9, 7, 5, 3]) == pytest.approx(-1.0)


def test_spearman_tie_handling():
    assert spearman([1, 2, 3], [1, 1, 2]) == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-9)


def test_spearman_constant_series_undefined():
    assert math.isnan(spearman([1, 2, 3], [5, 5, 5]))
    with pytest.raises(ValueError):
        spearman([1], [2])


def test_quartile_summary_linear_interpolation():
    s = quartile_summary([1.0, 2.0, 3.0, 4.0])
    assert s["min"] == 1.0 and s["max"] == 4.0
    assert s["median"] == pytest.approx(2.5)
    assert s["q1"] == pytest.approx(1.75)
    assert s["q3"] == pytest.approx(3.25)
    assert s["mean"] == pytest.approx(2.5)


def test_derive_seed_stable_and_distinct():
    a = derive_seed(7, "role-a", 0)
    assert a == derive_seed(7, "role-a", 0)
    assert a != derive_seed(7, "role-b", 0)
    assert a != derive_seed(7, "role-a", 1)
    assert 0 <= a < 2**63


def test_thread_count_env_cap(monkeypatch):
    from nodebound.experiments import THREADS_ENV, thread_count

    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    monkeypatch.setenv(THREADS_ENV, "")
    assert thread_count() >= 1


def tiny_width_config():
    return TrainConfig(epochs=2, lr=0.01, solver_steps=2)


def test_sweep_width_record_counts_and_determinism():
    res = sweep_width([4, 8], trials=2, base_config=tiny_width_config(), base_seed=0, threads=1)
    assert len(res.entries) == 4
    assert res.divergent == 0
    for entry in res.entries:
        assert len(entry.record.rows) == 2
        assert entry.record.hidden_units in (4, 8)
    res2 = sweep_width([4, 8], trials=2, base_config=tiny_width_config(), base_seed=0, threads=1)
    assert res.records_csv() == res2.records_csv()
    assert res.trials_csv() == res2.trials_csv()
    assert res.summary_csv() == res2.summary_csv()


def test_sweep_width_single_value_correlation_undefined():
    res = sweep_width([4], trials=1, base_config=tiny_width_config(), base_seed=0, threads=1)
    assert math.isnan(res.correlation)


def test_sweep_width_threaded_matches_sequential():
    seq = sweep_width([4, 6], trials=2, base_config=tiny_width_config(), base_seed=1, threads=1)
    par = sweep_width([4, 6], trials=2, base_config=tiny_width_config(), base_seed=1, threads=2)
    assert seq.records_csv() == par.records_csv()


def test_sweep_lambda_counts_and_pairing():
    base = TrainConfig(epochs=2, lr=0.01, solver_steps=2)
    res = sweep_lambda([0.0, 0.5], trials=3, base_config=base, base_seed=0, hidden=6, threads=1)
    assert len(res.entries) == 6
    assert set(res.summaries) == {0.0, 0.5}
    for lam in (0.0, 0.5):
        stats = res.summaries[lam]
        assert stats["min"] <= stats["q1"] <= stats["median"] <= stats["q3"] <= stats["max"]
    # pairing: identical data/init seeds mean lambda is the only difference
    by_key = {(e.sweep_value, e.trial): e.record.seed for e in res.entries}
    assert by_key[(0.0, 0)] == by_key[(0.5, 0)]


def test_sweep_lambda_zero_matches_unpenalized_training():
    base = TrainConfig(epochs=2, lr=0.01, solver_steps=2)
    res1 = sweep_lambda([0.0], trials=1, base_config=base, base_seed=3, hidden=5, threads=1)
    res2 = sweep_lambda([0.0], trials=1, base_config=base, base_seed=3, hidden=5, threads=1)
    assert res1.records_csv() == res2.records_csv()


def test_lip_gap_tiny_run():
    train_set, test_set = classification_data(train_n=60, test_n=40, seed=5)
    cfg = TrainConfig(epochs=3, lr=0.01, batch_size=16, loss_kind="cross_entropy", solver_steps=2)
    res = lip_gap_run(train_set, test_set, cfg, base_seed=5, state_dim=4, hidden=8)
    assert len(res.lipschitz) == 3
    assert len(res.error_gap) == 3
    assert len(res.record.rows) == 3
    assert not math.isnan(res.correlation) or len(set(res.lipschitz)) == 1
    csv = res.epochs_csv()
    assert csv.splitlines()[0] == "epoch,lipschitz,error_gap"
    assert len(csv.splitlines()) == 4


def test_lip_gap_requires_classification():
    from nodebound.datasets import gen_linear_dataset

    cfg = TrainConfig(epochs=1, loss_kind="cross_entropy")
    with pytest.raises(ValueError):
        lip_gap_run(gen_linear_dataset(10, 0), gen_linear_dataset(5, 1), cfg)


def test_classification_fallback_is_blobs():
    train_set, test_set = classification_data(train_n=30, test_n=20, seed=0)
    assert train_set.provenance == "synthetic_blobs"
    assert train_set.n == 30 and test_set.n == 20
    assert train_set.is_classification


def test_classification_idx_path(tmp_path):
    import struct

    pixels = np.zeros((10, 2, 2), dtype=np.uint8)
    labels = bytes([i % 2 for i in range(10)])
    ipath = tmp_path / "img.idx"
    lpath = tmp_path / "lab.idx"
    ipath.write_bytes(struct.pack(">iiii", 2051, 10, 2, 2) + pixels.tobytes())
    lpath.write_bytes(struct.pack(">ii", 2049, 10) + labels)
    train_set, test_set = classification_data(ipath, lpath, train_n=6, test_n=4, seed=0)
    assert train_set.provenance == "idx_image"
    assert train_set.n == 6 and test_set.n == 4
    with pytest.raises(ValueError):
        classification_data(ipath, lpath, train_n=8, test_n=4, seed=0)
