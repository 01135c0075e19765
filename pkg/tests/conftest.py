import pytest

from app.combinatorics.trees import build_tree_bundle
from app.oracle.census import census_table


@pytest.fixture(scope="session")
def tree_bundle_50():
    """Tree bundle shared by the identity tests"""
    return build_tree_bundle(50)


@pytest.fixture(scope="session")
def census_k12():
    """Census rows for k = 1, 2 and n <= 6, keyed by (n, k)"""
    return {(row.n, row.k): row for row in census_table(6, [1, 2])}
