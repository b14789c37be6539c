"""Predicate dependency graph with SCCs in topological order."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .ir import Aggregate, Atom, Negation, Program

_STRENGTH = {"positive": 0, "aggregated": 1, "negative": 2}


@dataclass(frozen=True)
class DepEdge:
    source: str  # body predicate
    target: str  # head predicate
    tag: str  # positive | aggregated | negative


@dataclass(frozen=True)
class PredicateDependencyGraph:
    vertices: tuple[str, ...]
    edges: tuple[DepEdge, ...]
    sccs: tuple[tuple[str, ...], ...]  # topological: dependencies first

    def scc_of(self, pred: str) -> int:
        for i, comp in enumerate(self.sccs):
            if pred in comp:
                return i
        raise KeyError(pred)

    def edge(self, source: str, target: str) -> DepEdge | None:
        return next((e for e in self.edges if e.source == source and e.target == target), None)

    def has_self_edge(self, pred: str) -> bool:
        return self.edge(pred, pred) is not None

    def successors(self, pred: str) -> list[str]:
        return [e.target for e in self.edges if e.source == pred]

    def predecessors(self, pred: str) -> list[str]:
        return [e.source for e in self.edges if e.target == pred]


def build_dependency_graph(prog: Program) -> PredicateDependencyGraph:
    vertices: list[str] = [d.name for d in prog.edb_decls] + [d.name for d in prog.idb_decls]
    seen = set(vertices)

    def add(name: str) -> None:
        if name not in seen:
            seen.add(name)
            vertices.append(name)

    tags: dict[tuple[str, str], str] = {}
    for rule in prog.rules:
        head = rule.head.pred
        add(head)
        for lit in rule.body:
            if isinstance(lit, Atom):
                pairs = [(lit.pred, "positive")]
            elif isinstance(lit, Negation):
                pairs = [(lit.atom.pred, "negative")]
            elif isinstance(lit, Aggregate):
                pairs = [(b.pred, "aggregated") for b in lit.body if isinstance(b, Atom)]
            else:
                continue
            for pred, tag in pairs:
                add(pred)
                key = (pred, head)
                if key not in tags or _STRENGTH[tag] > _STRENGTH[tags[key]]:
                    tags[key] = tag
    edges = tuple(DepEdge(s, t, tag) for (s, t), tag in tags.items())
    return PredicateDependencyGraph(tuple(vertices), edges, _topo_sccs(vertices, edges))


def _topo_sccs(vertices: list[str], edges: tuple[DepEdge, ...]) -> tuple[tuple[str, ...], ...]:
    index_of = {v: i for i, v in enumerate(vertices)}
    succ: dict[str, list[str]] = {v: [] for v in vertices}
    for e in edges:
        succ[e.source].append(e.target)

    # iterative Tarjan
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            for j in range(i, len(succ[v])):
                w = succ[v][j]
                if w not in index:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp, key=index_of.__getitem__))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    # deterministic topological order of the condensation: Kahn with a heap
    comp_of = {v: ci for ci, comp in enumerate(comps) for v in comp}
    indeg = [0] * len(comps)
    out: list[set[int]] = [set() for _ in comps]
    for e in edges:
        a, b = comp_of[e.source], comp_of[e.target]
        if a != b and b not in out[a]:
            out[a].add(b)
            indeg[b] += 1
    key = [index_of[c[0]] for c in comps]
    heap = [(key[ci], ci) for ci in range(len(comps)) if indeg[ci] == 0]
    heapq.heapify(heap)
    order: list[tuple[str, ...]] = []
    while heap:
        _, ci = heapq.heappop(heap)
        order.append(tuple(comps[ci]))
        for nb in sorted(out[ci]):
            indeg[nb] -= 1
            if indeg[nb] == 0:
                heapq.heappush(heap, (key[nb], nb))
    return tuple(order)
