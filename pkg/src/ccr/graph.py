"""Causal DAGs with a designated root and leaf, their biconnected-component
decomposition, and the commutative cut tree (CCT) built from the cutpoints.

Node identifiers are opaque strings. Every algorithm here breaks ties by the
order in which nodes were declared, so equal inputs give identical outputs.
"""

from __future__ import annotations

import heapq
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, NamedTuple, Sequence

from ccr.errors import AssumptionError, DomainError, GraphError

Edge = tuple[str, str]


@dataclass(frozen=True)
class Dag:
    """Directed acyclic causal graph.

    ``root`` and ``leaf`` default to the unique in-degree-0 / out-degree-0
    node when there is exactly one; otherwise they stay ``None`` and
    :func:`validate_assumptions` reports the violation.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str | None = None
    leaf: str | None = None
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)
    _order: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple((str(a), str(b)) for a, b in self.edges)
        if len(set(nodes)) != len(nodes):
            dup = sorted({n for n in nodes if nodes.count(n) > 1})
            raise GraphError(f"duplicate node ids: {dup}")
        known = set(nodes)
        seen = set()
        parents = {n: [] for n in nodes}
        children = {n: [] for n in nodes}
        for a, b in edges:
            if a not in known or b not in known:
                raise GraphError(f"edge {a}->{b} references an undeclared node")
            if a == b:
                raise GraphError(f"self-loop on {a}")
            if (a, b) in seen:
                raise GraphError(f"duplicate edge {a}->{b}")
            seen.add((a, b))
            parents[b].append(a)
            children[a].append(b)
        pos = {n: i for i, n in enumerate(nodes)}
        for n in nodes:
            parents[n].sort(key=pos.__getitem__)
            children[n].sort(key=pos.__getitem__)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_parents", {n: tuple(p) for n, p in parents.items()})
        object.__setattr__(self, "_children", {n: tuple(c) for n, c in children.items()})
        object.__setattr__(self, "_order", _stable_toposort(nodes, self._parents, self._children))

        sources = [n for n in nodes if not parents[n]]
        sinks = [n for n in nodes if not children[n]]
        for name, default in (("root", sources), ("leaf", sinks)):
            value = getattr(self, name)
            if value is None and len(default) == 1:
                object.__setattr__(self, name, default[0])
            elif value is not None and value not in known:
                raise GraphError(f"{name} {value!r} is not a declared node")

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Sequence[str] | None = None,
                   root: str | None = None, leaf: str | None = None) -> "Dag":
        edges = [tuple(e) for e in edges]
        if nodes is None:
            nodes = list(dict.fromkeys(itertools.chain.from_iterable(edges)))
        return cls(tuple(nodes), tuple(edges), root, leaf)

    def parents(self, node: str) -> tuple[str, ...]:
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        return self._children[node]

    def topological_order(self) -> tuple[str, ...]:
        return self._order

    def index(self, node: str) -> int:
        """Position of ``node`` in the topological order."""
        return self._order.index(node)

    def descendants(self, node: str) -> set[str]:
        return _reach(node, self._children)

    def ancestors(self, node: str) -> set[str]:
        return _reach(node, self._parents)

    def neighbors(self, node: str) -> tuple[str, ...]:
        pos = {n: i for i, n in enumerate(self.nodes)}
        return tuple(sorted(set(self._parents[node]) | set(self._children[node]),
                            key=pos.__getitem__))

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges],
                "root": self.root, "leaf": self.leaf}

    @classmethod
    def from_dict(cls, data: dict) -> "Dag":
        return cls(tuple(data["nodes"]), tuple(tuple(e) for e in data["edges"]),
                   data.get("root"), data.get("leaf"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Dag":
        return cls.from_dict(json.loads(text))


def _reach(start, adjacency):
    out = set()
    todo = list(adjacency[start])
    while todo:
        n = todo.pop()
        if n not in out:
            out.add(n)
            todo.extend(adjacency[n])
    return out


def _stable_toposort(nodes, parents, children):
    pos = {n: i for i, n in enumerate(nodes)}
    indeg = {n: len(parents[n]) for n in nodes}
    ready = [pos[n] for n in nodes if indeg[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = nodes[heapq.heappop(ready)]
        order.append(n)
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, pos[c])
    if len(order) != len(nodes):
        stuck = [n for n in nodes if indeg[n] > 0]
        raise GraphError(f"graph has a directed cycle through {stuck}")
    return tuple(order)


# ---------------------------------------------------------------------------
# Assumption checks


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    nodes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    # no latent confounders cannot be read off the graph; generated SCMs
    # satisfy it by construction
    assumed: tuple[str, ...] = ("A4",)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def __bool__(self):
        return bool(self.violations)

    def __str__(self):
        if self.ok:
            return "A1-A3 hold (A4 assumed)"
        return "; ".join(f"{v.code}: {v.message}" for v in self.violations)


def validate_assumptions(dag: Dag) -> ValidationReport:
    """Check single root (A1), single leaf (A2) and at least one cutpoint (A3).

    Acyclicity is enforced when the :class:`Dag` is built, so a cyclic
    graph never reaches this function.
    """
    violations = []
    sources = tuple(n for n in dag.nodes if not dag.parents(n))
    sinks = tuple(n for n in dag.nodes if not dag.children(n))
    if len(sources) != 1:
        violations.append(Violation("A1", f"expected one root, found {len(sources)}", sources))
    elif dag.root != sources[0]:
        violations.append(Violation("A1", f"declared root {dag.root} has parents", (dag.root,)))
    if len(sinks) != 1:
        violations.append(Violation("A2", f"expected one leaf, found {len(sinks)}", sinks))
    elif dag.leaf != sinks[0]:
        violations.append(Violation("A2", f"declared leaf {dag.leaf} has children", (dag.leaf,)))
    if not articulation_points(dag):
        violations.append(Violation("A3", "undirected skeleton has no cutpoint"))
    return ValidationReport(tuple(violations))


def _require_admissible(dag):
    report = validate_assumptions(dag)
    if not report.ok:
        raise AssumptionError(report)


# ---------------------------------------------------------------------------
# Biconnected components


def _skeleton_bccs(dag: Dag):
    """Hopcroft-Tarjan over the undirected skeleton.

    Returns (list of undirected edge lists, set of articulation points).
    Iterative so deep chains do not hit the recursion limit.
    """
    adj = {n: dag.neighbors(n) for n in dag.nodes}
    index, low = {}, {}
    comps, cut = [], set()
    counter = 0
    for start in dag.nodes:
        if start in index:
            continue
        index[start] = low[start] = counter
        counter += 1
        root_children = 0
        edge_stack = []
        stack = [(start, None, iter(adj[start]))]
        while stack:
            v, parent, it = stack[-1]
            descended = False
            for w in it:
                if w == parent:
                    continue
                if w not in index:
                    edge_stack.append((v, w))
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append((w, v, iter(adj[w])))
                    descended = True
                    break
                if index[w] < index[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            stack.pop()
            if parent is None:
                continue
            low[parent] = min(low[parent], low[v])
            if low[v] >= index[parent]:
                comp = []
                while True:
                    e = edge_stack.pop()
                    comp.append(e)
                    if e == (parent, v):
                        break
                comps.append(comp)
                if parent == start:
                    root_children += 1
                else:
                    cut.add(parent)
        if root_children > 1:
            cut.add(start)
    return comps, cut


def articulation_points(dag: Dag) -> tuple[str, ...]:
    """Cutpoints of the undirected skeleton, in topological order."""
    _, cut = _skeleton_bccs(dag)
    return tuple(n for n in dag.topological_order() if n in cut)


@dataclass(frozen=True)
class Component:
    edges: tuple[Edge, ...]
    nodes: tuple[str, ...]
    root: str
    leaf: str


@dataclass(frozen=True)
class BccDecomposition:
    components: tuple[Component, ...]
    cutpoints: tuple[str, ...]


def find_bccs(dag: Dag) -> BccDecomposition:
    """Partition the edges of an admissible DAG into biconnected components.

    Components are returned in causal order (the one containing the root
    first), each with its own in-degree-0 root and out-degree-0 leaf.
    """
    _require_admissible(dag)
    raw, cut = _skeleton_bccs(dag)
    directed = set(dag.edges)
    edge_pos = {e: i for i, e in enumerate(dag.edges)}
    topo = dag.topological_order()
    components = []
    for comp in raw:
        edges = sorted(((a, b) if (a, b) in directed else (b, a) for a, b in comp),
                       key=edge_pos.__getitem__)
        members = {n for e in edges for n in e}
        nodes = tuple(n for n in topo if n in members)
        has_in = {b for _, b in edges}
        has_out = {a for a, _ in edges}
        roots = [n for n in nodes if n not in has_in]
        leaves = [n for n in nodes if n not in has_out]
        if len(roots) != 1 or len(leaves) != 1:
            raise GraphError(f"component {nodes} lacks a unique root/leaf")
        components.append(Component(tuple(edges), nodes, roots[0], leaves[0]))
    components.sort(key=lambda c: topo.index(c.root))
    cutpoints = tuple(n for n in topo if n in cut)
    return BccDecomposition(tuple(components), cutpoints)


# ---------------------------------------------------------------------------
# Commutative cut tree


@dataclass(frozen=True)
class Cct:
    """Complete DAG over root, cutpoints (topologically ordered) and leaf."""

    chain: tuple[str, ...]

    def __post_init__(self):
        if len(self.chain) < 2 or len(set(self.chain)) != len(self.chain):
            raise DomainError(f"invalid CCT chain {self.chain}")

    @property
    def n(self) -> int:
        return len(self.chain)

    @property
    def root(self) -> str:
        return self.chain[0]

    @property
    def leaf(self) -> str:
        return self.chain[-1]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(itertools.combinations(self.chain, 2))

    def to_dict(self) -> dict:
        return {"chain": list(self.chain)}

    @classmethod
    def from_dict(cls, data: dict) -> "Cct":
        return cls(tuple(data["chain"]))


def build_cct(dag: Dag) -> Cct:
    bccs = find_bccs(dag)
    return Cct((dag.root, *bccs.cutpoints, dag.leaf))


def enumerate_paths(cct: Cct) -> list[tuple[str, ...]]:
    """All 2**(n-2) root-to-leaf paths, shortest first (the direct edge leads)."""
    inner = cct.chain[1:-1]
    paths = []
    for k in range(len(inner) + 1):
        for mid in itertools.combinations(inner, k):
            paths.append((cct.root, *mid, cct.leaf))
    return paths


def path_pairs(path: Sequence[str]) -> tuple[Edge, ...]:
    return tuple(zip(path[:-1], path[1:]))


@dataclass(frozen=True)
class QuantityPlan:
    global_pair: Edge
    locals: tuple[Edge, ...]
    compositions: tuple[tuple[Edge, ...], ...]

    @property
    def pairs(self) -> tuple[Edge, ...]:
        """Every CCT pair, global included, in chain order."""
        return tuple(_chain_sorted(list(self.locals) + [self.global_pair]))

    def to_dict(self) -> dict:
        return {"global": list(self.global_pair),
                "locals": [list(p) for p in self.locals],
                "compositions": [[list(p) for p in c] for c in self.compositions]}

    @classmethod
    def from_dict(cls, data: dict) -> "QuantityPlan":
        return cls(tuple(data["global"]), tuple(tuple(p) for p in data["locals"]),
                   tuple(tuple(tuple(p) for p in c) for c in data["compositions"]))


def _chain_sorted(pairs):
    nodes = {n for p in pairs for n in p}
    # in a complete chain DAG the out-degree strictly decreases along the chain
    outdeg = {n: sum(1 for a, _ in pairs if a == n) for n in nodes}
    chain = sorted(nodes, key=lambda n: -outdeg[n])
    pos = {n: i for i, n in enumerate(chain)}
    return sorted(pairs, key=lambda p: (pos[p[0]], pos[p[1]]))


def quantity_plan(cct: Cct) -> QuantityPlan:
    global_pair = (cct.root, cct.leaf)
    locals_ = tuple(p for p in cct.edges if p != global_pair)
    comps = tuple(path_pairs(p) for p in enumerate_paths(cct) if len(p) > 2)
    return QuantityPlan(global_pair, locals_, comps)


def cct_counts(n: int) -> tuple[int, int]:
    """(edges, root-to-leaf paths) for a CCT with ``n`` nodes."""
    return comb(n, 2), 2 ** (n - 2)


# ---------------------------------------------------------------------------
# Path statistics


class PathStats(NamedTuple):
    shortest_path_length: int
    mediator_count: int


def path_stats(dag: Dag, cause: str, effect: str) -> PathStats:
    """Shortest directed hop count and number of distinct mediators.

    A mediator is any node other than the endpoints that lies on some
    directed path from ``cause`` to ``effect``.
    """
    for n in (cause, effect):
        if n not in dag._parents:
            raise DomainError(f"unknown node {n!r}")
    dist = {cause: 0}
    queue = deque([cause])
    while queue:
        v = queue.popleft()
        for w in dag.children(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    if effect not in dist or cause == effect:
        raise DomainError(f"no directed path from {cause} to {effect}")
    mediators = dag.descendants(cause) & dag.ancestors(effect)
    return PathStats(dist[effect], len(mediators))
