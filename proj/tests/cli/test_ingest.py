import json

from conftest import write_json


def square(x0, y0):
    return [[[x0, y0], [x0 + 1, y0], [x0 + 1, y0 + 1], [x0, y0 + 1], [x0, y0]]]


def toy_files(tmp_path):
    regions = {"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"name": "a"}, "geometry": {"type": "Polygon", "coordinates": square(0, 0)}},
        {"type": "Feature", "properties": {"name": "b"}, "geometry": {"type": "Polygon", "coordinates": square(1, 0)}},
    ]}
    write_json(tmp_path / "regions.geojson", regions)
    (tmp_path / "trips.csv").write_text(
        "pickup_datetime,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude\n"
        "2015-01-01 08:10:00,0.5,0.5,1.5,0.5\n"
        "2015-01-01 17:45:00,1.5,0.5,0.5,0.5\n"
        "2015-01-01 09:00:00,0.5,0.5,9.0,9.0\n")
    (tmp_path / "pois.csv").write_text("longitude,latitude,category\n0.2,0.2,food\n1.2,0.8,shop\n0.6,0.1,food\n")
    return ["--regions", tmp_path / "regions.geojson", "--trips", tmp_path / "trips.csv",
            "--pois", tmp_path / "pois.csv"]


def test_valid_toy_files(remvc, tmp_path):
    remvc.ok("ingest", *toy_files(tmp_path), "--out", tmp_path / "dataset.json")
    assert (tmp_path / "dataset.json").exists()
    report = json.loads((tmp_path / "dataset.report.json").read_text())
    assert report["accepted_trips"] == 2
    assert report["accepted_pois"] == 3


def test_unresolvable_endpoint_is_skipped(remvc, tmp_path):
    remvc.ok("ingest", *toy_files(tmp_path), "--out", tmp_path / "d.json", "--report", tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["skipped_trips"] == 1


def test_missing_regions_is_a_usage_error(remvc, tmp_path):
    args = toy_files(tmp_path)[2:]
    r = remvc("ingest", *args, "--out", tmp_path / "d.json")
    assert r.returncode == 2
    assert "--regions" in r.stderr
    assert not (tmp_path / "d.json").exists()


def test_bad_record_names_file(remvc, tmp_path):
    args = toy_files(tmp_path)
    (tmp_path / "pois.csv").write_text("longitude,latitude,category\nabc,0.2,food\n")
    r = remvc("ingest", *args, "--out", tmp_path / "d.json")
    assert r.returncode == 2
    assert "pois.csv" in r.stderr
