import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # tests/oracles.py

from gtbench.targets import make_seed  # noqa: E402


@pytest.fixture
def chunk_seed() -> bytes:
    return make_seed("chunk-parser")


@pytest.fixture
def kv_seed() -> bytes:
    return make_seed("kv-parser")


@pytest.fixture
def seeds_dir(tmp_path, chunk_seed) -> Path:
    d = tmp_path / "seeds"
    d.mkdir()
    (d / "seed1.bin").write_bytes(chunk_seed)
    return d


@pytest.fixture
def kv_seeds_dir(tmp_path, kv_seed) -> Path:
    d = tmp_path / "kvseeds"
    d.mkdir()
    (d / "seed1.txt").write_bytes(kv_seed)
    return d


@pytest.fixture(scope="session")
def service_client():
    from gtbench.cli import local_client

    with local_client() as client:
        yield client
