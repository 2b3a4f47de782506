import json
import os
import subprocess

import pytest


def pytest_addoption(parser):
    parser.addoption("--remvc", action="store", default=os.environ.get("REMVC_BIN", "remvc"),
                     help="path to the remvc executable")


class Runner:
    def __init__(self, exe, workdir):
        self.exe = exe
        self.workdir = workdir

    def __call__(self, *args, env=None):
        full_env = dict(os.environ)
        full_env.pop("REMVC_SEED", None)
        if env:
            full_env.update(env)
        return subprocess.run([self.exe, *map(str, args)], capture_output=True, text=True,
                              cwd=self.workdir, env=full_env, timeout=600)

    def ok(self, *args, **kw):
        r = self(*args, **kw)
        assert r.returncode == 0, r.stderr
        return r


@pytest.fixture
def remvc(request, tmp_path):
    return Runner(os.path.abspath(request.config.getoption("--remvc")), tmp_path)


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


SMALL_CITY = {"L": 12, "K": 3, "F": 6, "H": 4, "trips": 3000, "seed": 7}
QUICK_RUN = {"max_epochs": 5, "model": {"poi_width": 4, "mob_width": 4, "hidden": [16]}}


@pytest.fixture
def city(remvc, tmp_path):
    """Small synthetic dataset plus its labels and popularity CSVs."""
    cfg = write_json(tmp_path / "synth.json", SMALL_CITY)
    remvc.ok("synth", "--config", cfg, "--out", tmp_path / "city.json")
    return tmp_path / "city.json"


@pytest.fixture
def run_config(tmp_path):
    return write_json(tmp_path / "run.json", QUICK_RUN)
