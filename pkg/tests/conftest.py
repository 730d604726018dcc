import json
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))


@pytest.fixture(scope="session")
def frozen():
    """Reference values produced by ``oracles/derive.py`` and frozen to JSON."""
    return json.loads((HERE / "oracles" / "frozen.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def data_dir():
    return HERE / "data"
