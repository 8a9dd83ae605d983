import shutil
from pathlib import Path

import pytest

from app.resonator import ArraySpec
from app.snail import FluxBias, SnailParams
from app.storage import Storage

FIXTURES = Path(__file__).parent / "fixtures"

REFERENCE_ALPHA = 0.18
REFERENCE_N = 3
REFERENCE_LJ = 80e-12
REFERENCE_M = 67
REFERENCE_C = 30e-15
OPERATING_FREQUENCY = 6.4e9


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def reference_cell() -> SnailParams:
    return SnailParams(alpha=REFERENCE_ALPHA, n_large=REFERENCE_N, l_josephson=REFERENCE_LJ)


@pytest.fixture
def reference_array(reference_cell) -> ArraySpec:
    return ArraySpec(cell=reference_cell, m_snails=REFERENCE_M, capacitance=REFERENCE_C)


@pytest.fixture
def zero_flux() -> FluxBias:
    return FluxBias(0.0)


@pytest.fixture
def reference_spec_path(tmp_path) -> Path:
    path = tmp_path / "reference_device.yaml"
    shutil.copy(FIXTURES / "reference_device.yaml", path)
    return path


@pytest.fixture
def reference_spec(reference_spec_path):
    return Storage.load_device_spec(reference_spec_path)


@pytest.fixture
def write_spec(tmp_path):
    """Write YAML text to a spec file and return its path"""

    def _write(text: str, name: str = "device.yaml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
