import pytest

from mfclife import BOUNDARY_ENVVAR, PRESET_ENVVAR, RULE_ENVVAR, VOLT_WINDOW_ENVVAR


@pytest.fixture
def clean_environment(monkeypatch):
    """Environment defaults as shipped, regardless of the user's shell."""
    for name in (RULE_ENVVAR, BOUNDARY_ENVVAR, PRESET_ENVVAR, VOLT_WINDOW_ENVVAR):
        monkeypatch.delenv(name, raising=False)
