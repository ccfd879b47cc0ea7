"""Active paths, d-separation, s-reachability and relevance graphs."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import networkx as nx

from .errors import NodeInEvidence, NotADecision, NotAPath
from .maid import CHANCE, DECISION, UTILITY, Maid

OWNER = "owner"
DESCENDANTS = "descendants"


# -- active paths and d-separation ---------------------------------------------

def is_active_path(maid: Maid, path: Sequence[str], evidence: Iterable[str]) -> bool:
    """Whether an undirected path is active given the evidence set.

    Every collider must be observed or have an observed descendant, and no
    other interior node may be observed.
    """
    path = list(path)
    if not path or len(set(path)) != len(path) or any(n not in maid for n in path):
        raise NotAPath(f"{path} is not a simple path of nodes in the diagram")
    for a, b in zip(path, path[1:]):
        if a not in maid.parents(b) and b not in maid.parents(a):
            raise NotAPath(f"{a} and {b} are not adjacent")
    evidence = set(evidence)
    for prev, node, nxt in zip(path, path[1:], path[2:]):
        collider = prev in maid.parents(node) and nxt in maid.parents(node)
        if collider:
            if node not in evidence and not (maid.descendants(node) & evidence):
                return False
        elif node in evidence:
            return False
    return True


def _reachable(parents: Mapping[str, Sequence[str]], children: Mapping[str, Sequence[str]],
               source: str, evidence: set[str]) -> set[str]:
    """Nodes joined to ``source`` by an active path (Bayes-ball traversal)."""
    observed_or_ancestor: set[str] = set()
    stack = list(evidence)
    while stack:
        n = stack.pop()
        if n not in observed_or_ancestor:
            observed_or_ancestor.add(n)
            stack.extend(parents[n])

    reached: set[str] = set()
    visited: set[tuple[str, bool]] = set()
    # The flag records whether the node was entered from a child (moving up).
    frontier = [(source, True)]
    while frontier:
        node, from_child = frontier.pop()
        if (node, from_child) in visited:
            continue
        visited.add((node, from_child))
        if node not in evidence:
            reached.add(node)
        if from_child:
            if node not in evidence:
                frontier.extend((p, True) for p in parents[node])
                frontier.extend((c, False) for c in children[node])
        else:
            if node not in evidence:
                frontier.extend((c, False) for c in children[node])
            if node in observed_or_ancestor:
                frontier.extend((p, True) for p in parents[node])
    reached.discard(source)
    return reached


def _adjacency(maid: Maid) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    parents = {n: list(maid.parents(n)) for n in maid.order}
    children = {n: list(maid.children(n)) for n in maid.order}
    return parents, children


def d_separated(maid: Maid, x: str, y: str, evidence: Iterable[str] = ()) -> bool:
    """True iff no active path joins ``x`` and ``y`` given ``evidence``."""
    evidence = set(evidence)
    if x in evidence or y in evidence:
        raise NodeInEvidence(f"{x if x in evidence else y} is in the evidence set")
    if x == y:
        raise NotAPath("d-separation needs two distinct nodes")
    parents, children = _adjacency(maid)
    return y not in _reachable(parents, children, x, evidence)


# -- s-reachability and relevance --------------------------------------------

def _relevant_utilities(maid: Maid, d: str, utility_scope: str) -> list[str]:
    owned = maid.utilities_of(maid[d].owners[0])
    if utility_scope == DESCENDANTS:
        desc = maid.descendants(d)
        return [u for u in owned if u in desc]
    if utility_scope != OWNER:
        raise ValueError(f"unknown utility scope {utility_scope!r}")
    return list(owned)


def s_reachable(maid: Maid, d: str, d_prime: str, *, utility_scope: str = OWNER) -> bool:
    """Whether decision ``d`` strategically relies on ``d_prime``.

    A fresh parent is attached to ``d_prime`` in a scratch copy of the graph;
    ``d_prime`` is s-reachable from ``d`` when that parent has an active path
    to one of the utilities of ``d``'s owner given ``d`` and its parents.
    A decision is never s-reachable from itself.
    """
    for n in (d, d_prime):
        if n not in maid or maid[n].kind != DECISION:
            raise NotADecision(f"{n!r} is not a decision node")
    if d == d_prime:
        return False
    parents, children = _adjacency(maid)
    hat = _fresh_id(maid, f"{d_prime}^")
    parents[hat] = []
    children[hat] = [d_prime]
    parents[d_prime] = parents[d_prime] + [hat]
    evidence = set(maid.parents(d)) | {d}
    reached = _reachable(parents, children, hat, evidence)
    return any(u in reached for u in _relevant_utilities(maid, d, utility_scope))


def _fresh_id(maid: Maid, base: str) -> str:
    name = base
    while name in maid:
        name += "^"
    return name


@dataclass(frozen=True)
class RelevanceGraph:
    """Edges ``(d_prime, d)`` meaning ``d`` relies on ``d_prime``."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    @property
    def is_cyclic(self) -> bool:
        return not nx.is_directed_acyclic_graph(self.to_networkx())


def relevance_graph(maid: Maid, *, utility_scope: str = OWNER) -> RelevanceGraph:
    decisions = maid.decisions
    edges = tuple(
        (dp, d)
        for dp in decisions
        for d in decisions
        if d != dp and s_reachable(maid, d, dp, utility_scope=utility_scope)
    )
    return RelevanceGraph(decisions, edges)


@dataclass(frozen=True)
class ComponentGraph:
    """Strongly connected components of a relevance graph, sources first.

    ``edges`` index into ``components``; an edge ``(i, j)`` means some
    decision in component ``j`` relies on one in component ``i``.
    """

    components: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[int, int], ...]

    def is_acyclic(self) -> bool:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.components)))
        g.add_edges_from(self.edges)
        return nx.is_directed_acyclic_graph(g)


def component_graph(rg: RelevanceGraph) -> ComponentGraph:
    g = rg.to_networkx()
    pos = {n: i for i, n in enumerate(rg.nodes)}
    cond = nx.condensation(g)
    members = {c: tuple(sorted(cond.nodes[c]["members"], key=pos.__getitem__)) for c in cond}
    order = list(nx.lexicographical_topological_sort(cond, key=lambda c: pos[members[c][0]]))
    index = {c: i for i, c in enumerate(order)}
    edges = tuple(sorted((index[a], index[b]) for a, b in cond.edges))
    result = ComponentGraph(tuple(members[c] for c in order), edges)
    assert result.is_acyclic()
    return result


@dataclass(frozen=True)
class SolvabilityReport:
    relevance: RelevanceGraph
    components: ComponentGraph
    cyclic: bool
    il_solvable: bool
    blocks: tuple[tuple[str, ...], ...]

    def to_text(self) -> str:
        lines = [
            f"il_solvable={'true' if self.il_solvable else 'false'}",
            f"cyclic={'true' if self.cyclic else 'false'}",
            f"decisions={','.join(self.relevance.nodes)}",
            "relevance_edges=" + ",".join(f"{a}->{b}" for a, b in self.relevance.edges),
            "components=" + ";".join(",".join(c) for c in self.components.components),
            "blocks=" + ";".join(",".join(b) for b in self.blocks),
        ]
        return "\n".join(lines) + "\n"


def classify_solvability(maid: Maid, *, utility_scope: str = OWNER) -> SolvabilityReport:
    rg = relevance_graph(maid, utility_scope=utility_scope)
    cg = component_graph(rg)
    cyclic = rg.is_cyclic
    blocks = tuple(c for c in cg.components if len(c) > 1)
    return SolvabilityReport(rg, cg, cyclic, not cyclic, blocks)


# -- DOT export -----------------------------------------------------------------

_SHAPES = {CHANCE: "ellipse", DECISION: "box", UTILITY: "diamond"}


def _q(name: str) -> str:
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: Maid | RelevanceGraph | ComponentGraph, name: str | None = None) -> str:
    """Graphviz text; information edges into decisions are dashed."""
    lines: list[str] = []
    if isinstance(graph, Maid):
        lines.append(f"digraph {_q(name or 'maid')} {{")
        for decl in graph:
            attrs = [f"shape={_SHAPES[decl.kind]}"]
            if decl.guidance:
                attrs.append("style=filled")
                attrs.append('fillcolor="lightgrey"')
            lines.append(f"  {_q(decl.id)} [{', '.join(attrs)}];")
        for p, c in graph.edges:
            style = " [style=dashed]" if graph[c].kind == DECISION else ""
            lines.append(f"  {_q(p)} -> {_q(c)}{style};")
    elif isinstance(graph, RelevanceGraph):
        lines.append(f"digraph {_q(name or 'relevance')} {{")
        for n in graph.nodes:
            lines.append(f"  {_q(n)} [shape=box];")
        for a, b in graph.edges:
            lines.append(f"  {_q(a)} -> {_q(b)};")
    elif isinstance(graph, ComponentGraph):
        lines.append(f"digraph {_q(name or 'components')} {{")
        labels = ["{" + ",".join(c) + "}" for c in graph.components]
        for lab in labels:
            lines.append(f"  {_q(lab)} [shape=box];")
        for i, j in graph.edges:
            lines.append(f"  {_q(labels[i])} -> {_q(labels[j])};")
    else:
        raise TypeError(f"cannot export {type(graph).__name__} to DOT")
    lines.append("}")
    return "\n".join(lines) + "\n"
