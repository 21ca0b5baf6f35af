import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from expcurate.scenarios import build_demo_store
from expcurate.store import init_store


@pytest.fixture
def tmp_store(tmp_path):
    store = init_store(tmp_path / "store", durable=False)
    yield store
    store.close()


@pytest.fixture(scope="session")
def demo(tmp_path_factory):
    """Shared demo store; tests must not add accepted validations or model tags."""
    root = tmp_path_factory.mktemp("demo") / "store"
    store = init_store(root, durable=False)
    t0 = time.monotonic()
    handles = build_demo_store(store)
    build_seconds = time.monotonic() - t0
    yield store, handles, build_seconds
    store.close()
