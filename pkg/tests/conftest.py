"""Shared test fixtures."""

import pytest

from mstree.config.settings import Settings
from mstree.core.tree import MaryTree, build_from_permutation

# Inserted in this order into a 4-ary tree, these ranks give seven nodes:
# a root holding 11, 12, 16 with children in slots 1 and 3, one full node,
# three full leaves and three partial leaves.
FIGURE_ONE = [12, 16, 11, 9, 13, 7, 3, 5, 15, 1, 4, 14, 10, 8, 2, 6]


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep a user config file out of every test."""
    monkeypatch.setattr(Settings, "CONFIG_PATH", tmp_path / "missing.toml")
    for name in ("SEED", "TRIALS", "N", "WORKERS", "K", "P", "B", "OUTPUT_FORMAT"):
        monkeypatch.delenv(f"MSTREE_{name}", raising=False)


@pytest.fixture
def settings() -> Settings:
    """Default settings with no config file."""
    return Settings()


@pytest.fixture
def figure_one_tree() -> MaryTree:
    return build_from_permutation(4, FIGURE_ONE)
