"""Base Inductive Miner (no noise filtering).

Cuts are tried in the order exclusive choice, sequence, parallel, loop on the
directly-follows graph of the current sublog; the flower model is the fall
through. Every trace of the input log fits the result perfectly.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import EmptyLogError
from ..event_log import EventLog
from ..petri_net import PetriNet
from .dfg import DirectlyFollowsGraph, dfg_of_sequences
from .process_tree import Operator, ProcessTree, flower, tree_to_petri_net

Seq = tuple[str, ...]


def discover_inductive(log: EventLog, model_id: str = "net") -> PetriNet:
    return tree_to_petri_net(inductive_tree(log), model_id)


def inductive_tree(log: EventLog) -> ProcessTree:
    if not log:
        raise EmptyLogError("cannot discover a model from an empty log")
    return _mine(set(log.sequences()))


def _mine(seqs: set[Seq]) -> ProcessTree:
    nonempty = {s for s in seqs if s}
    if not nonempty:
        return ProcessTree.tau()
    if len(nonempty) < len(seqs):
        return ProcessTree.node(Operator.XOR, ProcessTree.tau(), _mine(nonempty))
    alphabet = {a for s in nonempty for a in s}
    if len(alphabet) == 1 and all(len(s) == 1 for s in nonempty):
        return ProcessTree.leaf(next(iter(alphabet)))

    dfg = dfg_of_sequences(nonempty)
    cut = _xor_cut(dfg, alphabet)
    if cut:
        return ProcessTree.node(Operator.XOR, *(_mine(part) for part in _split_xor(nonempty, cut)))
    cut = _sequence_cut(dfg, alphabet)
    if cut:
        return ProcessTree.node(Operator.SEQ, *(_mine(part) for part in _split_project(nonempty, cut)))
    cut = _parallel_cut(dfg, alphabet)
    if cut:
        return ProcessTree.node(Operator.AND, *(_mine(part) for part in _split_project(nonempty, cut)))
    cut = _loop_cut(dfg, alphabet)
    if cut:
        do, redo = _split_loop(nonempty, cut[0])
        return ProcessTree.node(Operator.LOOP, _mine(do), _mine(redo))
    return flower(alphabet)


# --- graph helpers -----------------------------------------------------------

def _components(nodes: Iterable[str], linked) -> list[set[str]]:
    """Connected components of an undirected graph given by ``linked(a, b)``;
    sorted by smallest member."""
    nodes = sorted(nodes)
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if linked(a, b):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, set[str]] = {}
    for n in nodes:
        groups.setdefault(find(n), set()).add(n)
    return sorted(groups.values(), key=min)


def _reachability(dfg: DirectlyFollowsGraph, alphabet: set[str]) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {a: set() for a in alphabet}
    for a, b in dfg.edge_counts:
        succ[a].add(b)
    reach = {}
    for a in alphabet:
        seen, stack = set(), list(succ[a])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(succ[x])
        reach[a] = seen
    return reach


# --- cut detection -----------------------------------------------------------

def _xor_cut(dfg, alphabet) -> list[set[str]] | None:
    edges = dfg.edge_counts
    parts = _components(alphabet, lambda a, b: (a, b) in edges or (b, a) in edges)
    return parts if len(parts) > 1 else None


def _sequence_cut(dfg, alphabet) -> list[set[str]] | None:
    reach = _reachability(dfg, alphabet)
    groups = _components(alphabet, lambda a, b: b in reach[a] and a in reach[b])

    # merge groups that are (transitively) mutually reachable or incomparable
    # until the group order is a strict chain
    while len(groups) > 1:
        closure = _group_closure(groups, reach)
        n = len(groups)
        pair = next(
            ((i, j) for i in range(n) for j in range(i + 1, n) if closure[i][j] == closure[j][i]),
            None,
        )
        if pair is None:
            break
        i, j = pair
        groups[i] = groups[i] | groups[j]
        del groups[j]
    if len(groups) < 2:
        return None
    closure = _group_closure(groups, reach)
    order = sorted(range(len(groups)), key=lambda i: -sum(closure[i]))
    return [groups[i] for i in order]


def _group_closure(groups: list[set[str]], reach: dict[str, set[str]]) -> list[list[bool]]:
    n = len(groups)
    rel = [[i != j and any(reach[a] & groups[j] for a in groups[i]) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if rel[i][k]:
                for j in range(n):
                    if rel[k][j] and i != j:
                        rel[i][j] = True
    return rel


def _parallel_cut(dfg, alphabet) -> list[set[str]] | None:
    edges = dfg.edge_counts
    parts = _components(alphabet, lambda a, b: not ((a, b) in edges and (b, a) in edges))
    starts, ends = set(dfg.start_counts), set(dfg.end_counts)
    good = [p for p in parts if p & starts and p & ends]
    bad = [p for p in parts if not (p & starts and p & ends)]
    if not good:
        return None
    if bad:
        good[0] = good[0].union(*bad)
    return sorted(good, key=min) if len(good) > 1 else None


def _loop_cut(dfg, alphabet) -> list[set[str]] | None:
    edges = dfg.edge_counts
    starts, ends = set(dfg.start_counts), set(dfg.end_counts)
    do = starts | ends
    rest = alphabet - do
    if not rest:
        return None
    redo: set[str] = set()
    for comp in _components(rest, lambda a, b: (a, b) in edges or (b, a) in edges):
        ok = True
        for (x, y) in edges:
            if x in do and y in comp and x not in ends:
                ok = False
            if x in comp and y in do and y not in starts:
                ok = False
        for c in comp:
            from_ends = {e for e in ends if (e, c) in edges}
            if from_ends and from_ends != ends:
                ok = False
            to_starts = {s for s in starts if (c, s) in edges}
            if to_starts and to_starts != starts:
                ok = False
        if ok:
            redo |= comp
        else:
            do |= comp
    if not redo:
        return None
    return [do, redo]


# --- log splitting -----------------------------------------------------------

def _split_xor(seqs: set[Seq], parts: Sequence[set[str]]) -> list[set[Seq]]:
    out: list[set[Seq]] = [set() for _ in parts]
    for s in seqs:
        for i, p in enumerate(parts):
            if s[0] in p:
                out[i].add(s)
                break
    return out


def _split_project(seqs: set[Seq], parts: Sequence[set[str]]) -> list[set[Seq]]:
    return [{tuple(a for a in s if a in p) for s in seqs} for p in parts]


def _split_loop(seqs: set[Seq], do: set[str]) -> tuple[set[Seq], set[Seq]]:
    do_log: set[Seq] = set()
    redo_log: set[Seq] = set()
    for s in seqs:
        run = [s[0]]
        in_do = s[0] in do
        for a in s[1:]:
            if (a in do) == in_do:
                run.append(a)
            else:
                (do_log if in_do else redo_log).add(tuple(run))
                run, in_do = [a], a in do
        (do_log if in_do else redo_log).add(tuple(run))
    return do_log, redo_log
