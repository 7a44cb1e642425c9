from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def table_a1_path() -> Path:
    return REPO_ROOT / "data" / "table_a1.csv"
