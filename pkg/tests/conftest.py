import pytest

from polariton.model import Phase, PhononMode
from utils.presets import load_material
from utils.rng_system import make_rng


@pytest.fixture(autouse=True)
def isolated_output(tmp_path, monkeypatch):
    """Keep logs and default outputs inside the test's temporary directory."""
    monkeypatch.setenv('HOPFIELD_LOG_FILE', str(tmp_path / 'hopfield.log'))
    monkeypatch.setenv('HOPFIELD_OUTPUT_DIR', str(tmp_path / 'output'))


@pytest.fixture
def material():
    return load_material('mapbi3')


@pytest.fixture
def tetragonal_modes(material):
    return material.modes_for(Phase.TETRAGONAL)


@pytest.fixture
def orthorhombic_modes(material):
    return material.modes_for(Phase.ORTHORHOMBIC)


@pytest.fixture
def single_mode():
    return (PhononMode('TO1', 1.0, 0.5),)


@pytest.fixture
def rng():
    return make_rng()
