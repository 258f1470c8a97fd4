"""Shared tree suites used by the unit and acceptance tests."""

import networkx as nx
import numpy as np
import pytest

from majlab.treegen import random_even_size, random_odd_tree
from majlab.trees import RootedTree


def all_odd_degree_trees(n: int) -> list[RootedTree]:
    """Every unlabeled tree on n vertices whose degrees are all odd."""
    found = []
    for g in nx.nonisomorphic_trees(n):
        if all(d % 2 == 1 for _, d in g.degree()):
            found.append(RootedTree.from_edges(list(g.edges()), n=n))
    return found


@pytest.fixture(scope="session")
def exhaustive_suite() -> list[RootedTree]:
    """All odd-degree trees with 5 <= |V| <= 13 (only even sizes exist)."""
    trees: list[RootedTree] = []
    for n in range(5, 14):
        trees.extend(all_odd_degree_trees(n))
    return trees


@pytest.fixture(scope="session")
def random_suite() -> list[RootedTree]:
    """200 random odd-degree trees with 6 <= |V| <= 20."""
    rng = np.random.default_rng(20260815)
    return [
        random_odd_tree(random_even_size(6, 20, rng), rng) for _ in range(200)
    ]
