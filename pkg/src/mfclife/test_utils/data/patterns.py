import pytest


@pytest.fixture(scope="session")
def blinker_rle():
    return "x = 3, y = 1\n3o!"


@pytest.fixture(scope="session")
def block_rle():
    return "x = 2, y = 2\n2o$2o!"


@pytest.fixture(scope="session")
def glider_rle():
    return "#N Glider\n#C The smallest spaceship, moving one cell diagonally every 4 generations.\nx = 3, y = 3, rule = B3/S23\nbob$2bo$3o!"


@pytest.fixture(scope="session")
def highlife_replicator_rle():
    return "#N Replicator\nx = 5, y = 5, rule = B36/S23\n2b3o$bo2bo$o3bo$o2bo$3o!"


@pytest.fixture(scope="session")
def vertical_blinker_plaintext():
    return ".O.\n.O.\n.O."


@pytest.fixture(scope="session")
def block_plaintext():
    return "!Name: Block\n!\nOO\nOO\n"


@pytest.fixture(scope="session")
def gol_plan_config_text():
    return (
        "# Game of Life, half-weight self feedback\n"
        "[run]\n"
        "rule = B3/S23\n"
        "\n"
        "[plan]\n"
        "w_self = 0.5\n"
        "bands = 2.25:3.75\n"
    )
