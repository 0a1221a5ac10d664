import pytest

from src.models.systems import coupled_lorenz_preset, lorenz_preset, seir_preset


@pytest.fixture(autouse=True)
def setup_test_env(tmp_path, monkeypatch):
    """Send all run output to a per-test temporary directory"""
    monkeypatch.setenv('INVSTEER_OUT', str(tmp_path / 'runs'))
    monkeypatch.setenv('INVSTEER_LOG_LEVEL', 'WARNING')
    yield


@pytest.fixture
def output_root(tmp_path):
    """Root directory INVSTEER_OUT points at"""
    return tmp_path / 'runs'


@pytest.fixture(scope="session")
def lorenz():
    """Single Lorenz preset"""
    return lorenz_preset()


@pytest.fixture(scope="session")
def coupled_lorenz():
    """Coupled Lorenz preset with c = 5"""
    return coupled_lorenz_preset(c=5.0)


@pytest.fixture(scope="session")
def seir():
    """SEIR+V measles preset"""
    return seir_preset()
