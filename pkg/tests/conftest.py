import pytest

from bnic import Dag, full_recompile

ASIA_NODES = ["A", "S", "T", "L", "B", "E", "X", "D"]
ASIA_ARCS = [
    ("A", "T"),
    ("S", "L"),
    ("S", "B"),
    ("T", "E"),
    ("L", "E"),
    ("E", "X"),
    ("E", "D"),
    ("B", "D"),
]


def build_asia() -> Dag:
    dag = Dag()
    for name in ASIA_NODES:
        dag.add_node(name)
    for p, c in ASIA_ARCS:
        dag.add_arc(dag.table.id(p), dag.table.id(c))
    return dag


def name_set(table, vertices) -> frozenset:
    return frozenset(table.name(v) for v in vertices)


def cluster_names(tree, table):
    """Multiset of cluster vertex sets, as frozensets of names."""
    from collections import Counter

    return Counter(name_set(table, tree.cluster(c)) for c in tree.cluster_ids())


def separator_names(tree, table):
    from collections import Counter

    return Counter(name_set(table, sep) for _, _, sep in tree.edges())


@pytest.fixture
def asia():
    return build_asia()


@pytest.fixture
def asia_model(asia):
    return full_recompile(asia)
