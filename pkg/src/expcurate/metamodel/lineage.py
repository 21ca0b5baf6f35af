"""Processing lineage: the DAG of releases, actions and artefacts.

Edges come only from Action inputs/outputs (input release -> action,
action -> output). Tags and annotations never create lineage edges, which
keeps the graph a pure processing DAG.
"""

from __future__ import annotations

from dataclasses import dataclass

from expcurate.errors import CycleDetected, UnknownNode


@dataclass(frozen=True)
class LineageGraph:
    nodes: frozenset
    edges: frozenset  # of (src, dst)

    def to_record(self):
        return {
            "nodes": sorted(self.nodes),
            "edges": sorted([list(e) for e in self.edges]),
        }


def build_lineage(releases, actions, artefacts) -> LineageGraph:
    """Assemble the lineage graph from catalog records; raises on cycles."""
    nodes = set()
    for rec in releases:
        nodes.add(rec.id)
    for rec in artefacts:
        nodes.add(rec.id)
    edges = set()
    for action in actions:
        nodes.add(action.id)
        for ref in action.inputs:
            edges.add((ref, action.id))
        for ref in action.outputs:
            edges.add((action.id, ref))
    for src, dst in edges:
        nodes.add(src)
        nodes.add(dst)
    cycle = _find_cycle(nodes, edges)
    if cycle:
        raise CycleDetected(cycle)
    return LineageGraph(nodes=frozenset(nodes), edges=frozenset(edges))


def _find_cycle(nodes, edges):
    adjacency = {}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    parent = {}
    for start in sorted(nodes):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(adjacency.get(start, []))))]
        color[start] = GREY
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if color[child] == GREY:
                    # unwind the grey path to present one concrete cycle
                    cycle = [child, node]
                    cur = node
                    while cur != child and cur in parent:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle
                if color[child] == WHITE:
                    color[child] = GREY
                    parent[child] = node
                    stack.append((child, iter(sorted(adjacency.get(child, [])))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def lineage_ancestors(graph: LineageGraph, node: str) -> set:
    """All nodes with a directed path to `node`."""
    if node not in graph.nodes:
        raise UnknownNode(node)
    reverse = {}
    for src, dst in graph.edges:
        reverse.setdefault(dst, []).append(src)
    seen = set()
    frontier = [node]
    while frontier:
        cur = frontier.pop()
        for pred in reverse.get(cur, []):
            if pred not in seen:
                seen.add(pred)
                frontier.append(pred)
    return seen
