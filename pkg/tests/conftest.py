import pathlib

import pytest

from privmine import builtin_schema

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def census_schema():
    return builtin_schema("census")


@pytest.fixture(scope="session")
def health_schema():
    return builtin_schema("health")


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
