from conftest import SMALL_CITY, write_json


def test_default_config(remvc, tmp_path):
    remvc.ok("synth", "--out", tmp_path / "city.json")
    for name in ("city.json", "city.labels.csv", "city.popularity.csv"):
        assert (tmp_path / name).stat().st_size > 0
    assert len((tmp_path / "city.labels.csv").read_text().splitlines()) == 81


def test_same_config_twice_is_byte_identical(remvc, tmp_path):
    cfg = write_json(tmp_path / "s.json", SMALL_CITY)
    remvc.ok("synth", "--config", cfg, "--out", tmp_path / "a.json")
    remvc.ok("synth", "--config", cfg, "--out", tmp_path / "b.json")
    for suffix in (".json", ".labels.csv", ".popularity.csv"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_more_clusters_than_regions(remvc, tmp_path):
    cfg = write_json(tmp_path / "s.json", {**SMALL_CITY, "K": 13})
    assert remvc("synth", "--config", cfg, "--out", tmp_path / "c.json").returncode == 2
    assert not (tmp_path / "c.json").exists()


def test_unknown_key(remvc, tmp_path):
    cfg = write_json(tmp_path / "s.json", {"region_count": 5})
    assert remvc("synth", "--config", cfg, "--out", tmp_path / "c.json").returncode == 2
