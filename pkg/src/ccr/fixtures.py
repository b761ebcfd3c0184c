"""Named graphs and models used as worked examples and test fixtures."""

from __future__ import annotations

from ccr.graph import Dag
from ccr.scm import BoolScm, LinearScm

PARTY_EDGES = [
    ("X", "A"), ("X", "B"), ("X", "C"), ("A", "C"), ("B", "C"),
    ("C", "D"),
    ("D", "E"), ("D", "F"), ("E", "F"), ("E", "Y"), ("F", "Y"),
]
PARTY_NODES = ["X", "A", "B", "C", "D", "E", "F", "Y"]
PARTY_NAMES = {
    "X": ("Xinyu", "she"), "A": ("Ara", "he"), "B": ("Becca", "she"),
    "C": ("Celine", "she"), "D": ("Daphne", "she"), "E": ("Emma", "she"),
    "F": ("Fox", "he"), "Y": ("Yasmin", "she"),
}
# candy counts of the factual/counterfactual prompt excerpt
PARTY_CANDIES = {"X": 4, "A": 6, "B": 5, "C": 10, "D": 1, "E": 1, "F": 4, "Y": 3}


def party_dag() -> Dag:
    """Eight-node party graph with blocks {X,A,B,C}, {C,D}, {D,E,F,Y}."""
    return Dag.from_edges(PARTY_EDGES, PARTY_NODES)


def party_scm(p: float = 0.7) -> BoolScm:
    return BoolScm.uniform(party_dag(), p)


def cactus_dag() -> Dag:
    """A..M graph built from four diamonds glued at D, G and J."""
    edges = []
    for s, a, b, t in (("A", "B", "C", "D"), ("D", "E", "F", "G"),
                       ("G", "H", "I", "J"), ("J", "K", "L", "M")):
        edges += [(s, a), (s, b), (a, t), (b, t)]
    return Dag.from_edges(edges, [chr(c) for c in range(ord("A"), ord("M") + 1)])


def chain_dag(n: int, prefix: str = "V") -> Dag:
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Dag.from_edges(list(zip(nodes[:-1], nodes[1:])), nodes)


LINEAR_EDGES = [
    ("X1", "X2"), ("X2", "X3"), ("X3", "X4"), ("X4", "Y"),
    ("X1", "X5"), ("X5", "X3"), ("X3", "X6"), ("X6", "Y"),
]
LINEAR_NODES = ["X1", "X2", "X5", "X3", "X4", "X6", "Y"]


def linear_dag(edge_x5x6: bool = False) -> Dag:
    edges = LINEAR_EDGES + ([("X5", "X6")] if edge_x5x6 else [])
    return Dag.from_edges(edges, LINEAR_NODES)


def linear_scm(edge_x5x6: bool = False, coefficient: float = 1.5) -> LinearScm:
    """Two diamonds X1..X3 and X3..Y; the optional X5->X6 edge bridges them."""
    return LinearScm.uniform(linear_dag(edge_x5x6), coefficient)
