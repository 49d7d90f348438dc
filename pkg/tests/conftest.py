import os
import sys

import pytest

SRC = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir, "src"))
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from modules.corpus import builtin  # noqa: E402


@pytest.fixture
def entry():
    """Look up a builtin corpus entry by name."""
    return builtin


@pytest.fixture
def write_json(tmp_path):
    import json

    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write
