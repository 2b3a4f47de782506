import math

import numpy as np
import pytest

import remvc

CITY = {"L": 12, "K": 3, "F": 6, "H": 4, "trips": 3000, "seed": 7}
QUICK = {"max_epochs": 2, "model": {"poi_width": 4, "mob_width": 4, "hidden": [16]}}


@pytest.fixture(scope="module")
def city():
    return remvc.synth(CITY)


def test_synth_shapes(city):
    assert (city.regions, city.categories, city.hours) == (12, 6, 4)
    assert city.poi_counts.shape == (12, 6)
    assert len(city.labels) == 12
    assert city.validate() == []
    assert remvc.synth(CITY).to_json() == city.to_json()


def test_train_embed_evaluate(city, tmp_path):
    ckpt = remvc.train(city, QUICK)
    assert [e["epoch"] for e in remvc.history(ckpt)] == [1, 2]
    e = remvc.embed(ckpt, city)
    assert e.shape == (12, 8) and e.dtype == np.float64
    report = remvc.cluster(e, city.labels, k=3, seed=1)
    assert set(report["metrics"]) == {"NMI", "ARI", "F"}
    pop = remvc.popularity(e, np.array(city.popularity), folds=3)
    assert math.isfinite(pop["metrics"]["R2"])

    ckpt.save(str(tmp_path / "c.json"))
    again = remvc.load_checkpoint(str(tmp_path / "c.json"))
    assert np.array_equal(remvc.embed(again, city), e)
    assert remvc.train(city, QUICK).to_json() == ckpt.to_json()


def test_config_errors(city):
    with pytest.raises(remvc.ConfigError):
        remvc.train(city, {"use_poi": False, "use_mob": False})
    with pytest.raises(remvc.ConfigError):
        remvc.train(city, {"learning_rate": 0.1})
    with pytest.raises(remvc.ConfigError):
        remvc.synth({"L": 3, "K": 4})


def test_metrics():
    assert remvc.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0
    assert remvc.ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5
    assert remvc.f_measure([0, 1, 2], [5, 6, 7]) == 0.0
    labels = [0, 1, 2, 0, 1, 2]
    one_hot = np.eye(3)[labels]
    assert remvc.cluster(one_hot, labels, k=3)["metrics"]["NMI"] == 1.0
    assert remvc.info_nce([0.0] * 11, 1) == pytest.approx(math.log(11), abs=1e-12)


def test_lasso_recovers_least_squares():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 5))
    y = x @ np.array([1.0, -2.0, 0.5, 3.0, 0.0]) + 0.7 + 0.1 * rng.normal(size=50)
    w, b, trace = remvc.lasso_fit(x, y, 1e-10)
    ref, *_ = np.linalg.lstsq(np.c_[x, np.ones(50)], y, rcond=None)
    assert np.allclose(np.r_[w, b], ref, atol=1e-6)
    assert all(b2 <= a2 for a2, b2 in zip(trace, trace[1:]))


def test_gradcheck():
    rows = remvc.gradcheck(3)
    assert [name for name, _ in rows] == ["poi", "mob", "inter", "mse"]
    assert all(err <= 1e-4 for _, err in rows)


def test_ablation_rows(city):
    table = remvc.ablate(city, {**QUICK, "max_epochs": 1}, folds=3)
    assert set(table) == {"full", "no_poi", "no_mob", "no_iv", "mse", "sim", "es", "rs", "ca", "fuse_avg_max"}


def test_shape_errors(city):
    with pytest.raises(remvc.ShapeError):
        remvc.cluster(np.zeros(5), [0] * 5)
