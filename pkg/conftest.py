"""Shared fixtures; the repository root is the import root."""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from game_core import compile_tree  # noqa: E402
from games import build_game  # noqa: E402


@pytest.fixture(scope="session")
def kuhn():
    return build_game("kuhn")


@pytest.fixture(scope="session")
def kuhn_tree(kuhn):
    return compile_tree(kuhn)


@pytest.fixture(scope="session")
def leduc():
    return build_game("leduc")


@pytest.fixture(scope="session")
def leduc_tree(leduc):
    return compile_tree(leduc)


@pytest.fixture(autouse=True)
def _no_deterministic_env(monkeypatch):
    monkeypatch.delenv("ED_DETERMINISTIC", raising=False)
