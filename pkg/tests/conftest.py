import json
import sys
from pathlib import Path

import pytest

# Add scripts directory to path for imports
SCRIPTS_DIR = Path(__file__).resolve().parent.parent / "scripts"
sys.path.insert(0, str(SCRIPTS_DIR))

FIXTURES_DIR = SCRIPTS_DIR.parent / "templates" / "tropical"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def fixture_data():
    """Raw JSON of a bundled fixture, for tests that corrupt it."""

    def _load(name: str) -> dict:
        return json.loads((FIXTURES_DIR / f"{name}.json").read_text(encoding="utf-8"))

    return _load


@pytest.fixture
def manifest():
    from tropical.manifest import load_manifest

    cache = {}

    def _load(name: str):
        if name not in cache:
            cache[name] = load_manifest(FIXTURES_DIR / f"{name}.json")
        return cache[name]

    return _load
