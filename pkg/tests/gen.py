"""Random program/database generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from collections import deque

from raqlet.dlir.ir import (
    WILDCARD,
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Negation,
    PredicateDecl,
    Program,
    Rule,
    Var,
)
from raqlet.dlir.wellformed import check_program
from raqlet.diagnostics import has_errors
from raqlet.schema import DlSchema, EdbDecl, EdbOrigin

# Two node relations with disjoint id ranges plus one edge relation over all ids.
A_IDS = range(0, 8)
B_IDS = range(100, 108)

GEN_SCHEMA = DlSchema(
    (
        EdbDecl("A", (("id", "number"), ("p", "number")), EdbOrigin("node", "aType")),
        EdbDecl("B", (("id", "number"), ("p", "number")), EdbOrigin("node", "bType")),
        EdbDecl("E", (("id1", "number"), ("id2", "number")), EdbOrigin("edge", "eType")),
    )
)
EDB_DECLS = [PredicateDecl(e.name, e.columns, "EDB", e.origin) for e in GEN_SCHEMA.edbs]
VARS = ("x", "y", "z", "w")
OPS = ("=", "!=", "<", "<=", ">", ">=")


def random_database(rng: random.Random, max_tuples: int = 100) -> dict[str, set[tuple]]:
    ids = list(A_IDS) + list(B_IDS)
    budget = rng.randint(0, max_tuples)
    n_a = rng.randint(0, min(len(A_IDS), budget))
    n_b = rng.randint(0, min(len(B_IDS), budget - n_a))
    db = {
        "A": {(i, rng.randint(0, 4)) for i in rng.sample(list(A_IDS), n_a)},
        "B": {(i, rng.randint(0, 4)) for i in rng.sample(list(B_IDS), n_b)},
    }
    db["E"] = {(rng.choice(ids), rng.choice(ids)) for _ in range(budget - n_a - n_b)}
    return db


def _constant(rng: random.Random) -> Const:
    return Const(rng.choice([*A_IDS, *B_IDS, 0, 1, 2, 3]))


class _RuleBuilder:
    def __init__(self, rng: random.Random, arities: dict[str, int], head: str, level: int, idbs: list[str]):
        self.rng = rng
        self.arities = arities
        self.head = head
        self.lower = idbs[:level]  # usable under negation/aggregation
        self.usable = idbs[: level + 1]  # positive atoms may recurse into the head

    def atom(self, pred: str, allow_wildcard: bool = True) -> Atom:
        terms = []
        for _ in range(self.arities[pred]):
            roll = self.rng.random()
            if roll < 0.12:
                terms.append(_constant(self.rng))
            elif roll < 0.3 and allow_wildcard:
                terms.append(WILDCARD)
            else:
                terms.append(Var(self.rng.choice(VARS)))
        return Atom(pred, tuple(terms))

    def build(self) -> Rule | None:
        rng = self.rng
        preds = ["A", "B", "E", "E", *self.usable]
        body: list = [self.atom(rng.choice(preds)) for _ in range(rng.randint(1, 3))]
        bound = sorted({t.name for a in body for t in a.terms if isinstance(t, Var)})
        if not bound:
            return None
        recursive = any(a.pred == self.head for a in body)
        if rng.random() < 0.35:
            lhs = Var(rng.choice(bound))
            rhs = Var(rng.choice(bound)) if rng.random() < 0.4 else _constant(rng)
            body.append(Comparison(lhs, rng.choice(OPS), rhs))
        if rng.random() < 0.25:
            pred = rng.choice(["A", "B", "E", *self.lower])
            terms = tuple(Var(rng.choice(bound)) if rng.random() < 0.8 else _constant(rng) for _ in range(self.arities[pred]))
            body.append(Negation(Atom(pred, terms)))
        extra: list[str] = []
        if not recursive and rng.random() < 0.2:
            # arithmetic only outside recursion so every fixpoint is finite
            body.append(Arith(Var("v"), Var(rng.choice(bound)), rng.choice("+-*"), Const(rng.randint(0, 3))))
            extra.append("v")
        if not recursive and rng.random() < 0.2:
            pred = rng.choice(["A", "B", "E", *self.lower])
            key = rng.choice(bound)
            inner = [Var(key)] + [WILDCARD if rng.random() < 0.5 else Var("q")] * (self.arities[pred] - 1)
            func = rng.choice(["count", "sum", "min", "max"])
            target = None if func == "count" else next((t for t in inner[1:] if isinstance(t, Var)), Var(key))
            body.append(Aggregate(Var("g"), func, target, (Atom(pred, tuple(inner)),)))
            extra.append("g")
        pool = bound + extra
        k = self.arities[self.head]
        if len(pool) < k:
            return None
        head_vars = rng.sample(pool, k)
        return Rule(Atom(self.head, tuple(Var(v) for v in head_vars)), tuple(body))


def random_program(rng: random.Random) -> Program:
    """Stratified, well-formed program over A, B, E with at most 3 IDBs and 8 rules."""
    while True:
        n_idb = rng.randint(1, 3)
        idbs = [f"P{i}" for i in range(n_idb)]
        arities = {"A": 2, "B": 2, "E": 2, **{p: rng.randint(1, 2) for p in idbs}}
        rules: list[Rule] = []
        budget = rng.randint(n_idb, 8)
        for level, head in enumerate(idbs):
            # the first rule of each IDB is non-recursive: a base case
            builder = _RuleBuilder(rng, arities, head, level, idbs)
            for j in range(max(1, budget // n_idb)):
                if len(rules) >= 8:
                    break
                for _ in range(20):
                    r = builder.build()
                    if r is None:
                        continue
                    if j == 0 and any(a.pred == head for a in r.atoms()):
                        continue
                    rules.append(r)
                    break
        decls = EDB_DECLS + [
            PredicateDecl(p, tuple((f"c{i}", "number") for i in range(arities[p])), "IDB") for p in idbs
        ]
        outputs = (idbs[-1],) if rng.random() < 0.8 or n_idb == 1 else (idbs[-2], idbs[-1])
        prog = Program(tuple(decls), tuple(rules), outputs)
        if any(not prog.rules_for(p) for p in idbs):
            continue
        if not has_errors(check_program(prog)):
            return prog


def random_case(seed: int) -> tuple[Program, dict[str, set[tuple]]]:
    rng = random.Random(seed)
    return random_program(rng), random_database(rng)


# graph oracles -------------------------------------------------------------


def random_graph(rng: random.Random, max_nodes: int = 50) -> tuple[list[int], set[tuple[int, int]]]:
    n = rng.randint(1, max_nodes)
    nodes = list(range(1, n + 1))
    p = rng.uniform(0.0, 3.0 / n)
    edges = {(a, b) for a in nodes for b in nodes if rng.random() < p}
    if rng.random() < 0.5 and n > 1:
        # guarantee at least one cycle
        cyc = rng.sample(nodes, min(n, rng.randint(2, 5)))
        edges |= {(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))}
    return nodes, edges


def bfs_reachability(nodes, edges) -> set[tuple[int, int]]:
    """Pairs (s, t) joined by a path of one or more edges."""
    succ: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in edges:
        succ[a].append(b)
    out = set()
    for s in nodes:
        seen: set[int] = set()
        todo = deque(succ[s])
        while todo:
            v = todo.popleft()
            if v in seen:
                continue
            seen.add(v)
            todo.extend(succ[v])
        out |= {(s, t) for t in seen}
    return out


def walk_pairs(nodes, edges, lo: int, hi: int) -> set[tuple[int, int]]:
    """Pairs joined by an explicitly enumerated walk whose length lies in [lo, hi]."""
    succ: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in sorted(edges):
        succ[a].append(b)
    out = set()

    def extend(start: int, at: int, length: int) -> None:
        if lo <= length:
            out.add((start, at))
        if length == hi:
            return
        for nxt in succ[at]:
            extend(start, nxt, length + 1)

    for s in nodes:
        for nxt in succ[s]:
            extend(s, nxt, 1)
    return out


def brute_force_cycles(prog: Program) -> dict[str, set[str]]:
    """For each predicate the set of predicates on a common dependency cycle, by transitive closure."""
    names = {d.name for d in prog.decls} | {r.head.pred for r in prog.rules}
    step = {(a.pred, r.head.pred) for r in prog.rules for a in r.atoms()}
    reach = set(step)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, e) in itertools.product(list(reach), list(reach)):
            if b == c and (a, e) not in reach:
                reach.add((a, e))
                changed = True
    return {p: {q for q in names if (p, q) in reach and (q, p) in reach} for p in names}
