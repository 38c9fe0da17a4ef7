import time

import numpy as np
import pytest

from cutrom.assembly import PhysicsParams, assemble_mass_matrix
from cutrom.config import Config
from cutrom.geometry import build_background_mesh
from cutrom.pipeline import (
    _training_snapshots,
    emit_report,
    run_offline,
    run_online_sweep,
)

DEFAULT_BOX = ((-1.2, 1.2), (-1.2, 1.2))


@pytest.fixture(scope="session")
def default_mesh():
    return build_background_mesh(DEFAULT_BOX, 0.125)


@pytest.fixture(scope="session")
def default_phys():
    return PhysicsParams()


@pytest.fixture(scope="session")
def patch_phys():
    return PhysicsParams(f_const=0.0, g_coeffs=(1.0, 2.0, 3.0, 0.0))


@pytest.fixture(scope="session")
def small_config():
    return Config(n_train=30, n_test=4, n_list=(2, 4, 6), seed=0).validate()


@pytest.fixture(scope="session")
def small_run(small_config):
    art = run_offline(small_config)
    report = run_online_sweep(art, small_config)
    return art, report


class DefaultRun:
    """Default-configuration pipeline products shared by the acceptance suite."""

    def __init__(self):
        self.config = Config().validate()
        t0 = time.perf_counter()
        self.artifacts = run_offline(self.config)
        self.report = run_online_sweep(self.artifacts, self.config)
        self.pipeline_seconds = time.perf_counter() - t0
        self._snapshots = None
        self._mass = None

    @property
    def mass(self):
        if self._mass is None:
            self._mass = assemble_mass_matrix(self.artifacts.mesh)
        return self._mass

    @property
    def snapshots(self):
        if self._snapshots is None:
            self._snapshots = _training_snapshots(self.artifacts, self.config)
        return self._snapshots

    def emit(self, dirpath):
        t0 = time.perf_counter()
        paths = emit_report(self.report, dirpath)
        self.pipeline_seconds += time.perf_counter() - t0
        return paths


@pytest.fixture(scope="session")
def default_run():
    return DefaultRun()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
