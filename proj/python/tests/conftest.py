import os
import pathlib

import pytest

ROOT = pathlib.Path(os.environ.get("BIOCONV_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="session")
def root():
    return ROOT


@pytest.fixture(scope="session")
def configs(root):
    return root / "configs"
