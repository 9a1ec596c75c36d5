"""Heuristics Miner: dependency graph with AND/XOR typed splits and joins,
compiled to a Petri net through silent routing transitions."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import DataError, EmptyLogError
from ..event_log import EventLog, extract_variants
from ..petri_net import PetriNet, Transition, min_model_cost
from .dfg import DirectlyFollowsGraph, build_dfg

START = "\x00start"
END = "\x00end"

# states explored when checking that a typed net can complete
_REACHABILITY_BUDGET = 50_000


@dataclass(frozen=True)
class HeuristicsParams:
    dependency_threshold: float = 0.9
    and_threshold: float = 0.65
    min_edge_count: int = 1


def dependency(dfg: DirectlyFollowsGraph, a: str, b: str) -> float:
    if a == b:
        n = dfg.count(a, a)
        return n / (n + 1)
    ab, ba = dfg.count(a, b), dfg.count(b, a)
    return (ab - ba) / (ab + ba + 1)


def _follows(dfg: DirectlyFollowsGraph, a: str, b: str) -> int:
    """Directly-follows count with the artificial start/end nodes folded in."""
    if a == START:
        return dfg.start_counts.get(b, 0)
    if b == END:
        return dfg.end_counts.get(a, 0)
    if a == END or b == START:
        return 0
    return dfg.count(a, b)


def and_split_measure(dfg: DirectlyFollowsGraph, a: str, b: str, c: str) -> float:
    return (_follows(dfg, b, c) + _follows(dfg, c, b)) / (_follows(dfg, a, b) + _follows(dfg, a, c) + 1)


def and_join_measure(dfg: DirectlyFollowsGraph, d: str, b: str, c: str) -> float:
    return (_follows(dfg, b, c) + _follows(dfg, c, b)) / (_follows(dfg, b, d) + _follows(dfg, c, d) + 1)


def dependency_arcs(dfg: DirectlyFollowsGraph, params: HeuristicsParams = HeuristicsParams(), rescue: bool = True) -> set[tuple[str, str]]:
    """Arcs between activities passing the thresholds; with ``rescue`` each
    non-start activity also keeps its best incoming and each non-end activity
    its best outgoing arc."""
    arcs = {
        (a, b)
        for (a, b), n in dfg.edge_counts.items()
        if n >= params.min_edge_count and dependency(dfg, a, b) >= params.dependency_threshold
    }
    if rescue:
        for x in sorted(dfg.nodes):
            if x not in dfg.start_counts:
                cands = [a for a in sorted(dfg.predecessors(x)) if a != x]
                if cands:
                    arcs.add((max(cands, key=lambda a: dependency(dfg, a, x)), x))
            if x not in dfg.end_counts:
                cands = [b for b in sorted(dfg.successors(x)) if b != x]
                if cands:
                    arcs.add((x, max(cands, key=lambda b: dependency(dfg, x, b))))
    return arcs


def _connect(arcs: set[tuple[str, str]], log: EventLog, dfg: DirectlyFollowsGraph) -> set[tuple[str, str]]:
    """Add start/end arcs, then patch in the path of the most frequent variant
    through any activity not on a start-to-end path."""
    arcs = set(arcs) | {(START, s) for s in dfg.start_counts} | {(e, END) for e in dfg.end_counts}
    variants = extract_variants(log)
    while True:
        succ, pred = {}, {}
        for a, b in arcs:
            succ.setdefault(a, set()).add(b)
            pred.setdefault(b, set()).add(a)
        fwd, bwd = _closure(START, succ), _closure(END, pred)
        stray = sorted(n for n in dfg.nodes if n not in fwd or n not in bwd)
        if not stray:
            return arcs
        seq = next(v.sequence for v in variants if stray[0] in v.sequence)
        path = (START,) + seq + (END,)
        arcs |= set(zip(path, path[1:]))


def _closure(root: str, edges: dict) -> set[str]:
    seen, stack = {root}, [root]
    while stack:
        for n in edges.get(stack.pop(), ()):
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return seen


def _groups(node: str, others: list[str], measure, threshold: float) -> list[list[str]]:
    """Partition split/join partners: two partners share a group (AND) when
    their AND measure reaches ``threshold``; groups are XOR alternatives.
    Self loops always stay in their own group."""
    parent = {o: o for o in others}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i, b in enumerate(others):
        for c in others[i + 1:]:
            if node in (b, c):
                continue
            if measure(node, b, c) >= threshold:
                rb, rc = find(b), find(c)
                if rb != rc:
                    parent[max(rb, rc)] = min(rb, rc)
    groups: dict[str, list[str]] = {}
    for o in others:
        groups.setdefault(find(o), []).append(o)
    return sorted(groups.values())


def _compile(arcs: set[tuple[str, str]], dfg: DirectlyFollowsGraph, params: HeuristicsParams, typed: bool, model_id: str) -> PetriNet:
    nodes = sorted({a for arc in arcs for a in arc})
    names = {n: f"t{i}" for i, n in enumerate(nodes)}
    transitions = [Transition(names[n], None if n in (START, END) else n) for n in nodes]
    places = ["source", "sink"]
    flow = [("source", names[START]), (names[END], "sink")]
    edge_place = {}
    for i, arc in enumerate(sorted(arcs)):
        edge_place[arc] = f"p{i}"
        places.append(f"p{i}")
    n_route = 0

    def route(label):
        nonlocal n_route
        n_route += 1
        tid = f"r{n_route}"
        transitions.append(Transition(tid, label))
        return tid

    threshold = params.and_threshold if typed else float("inf")
    for n in nodes:
        outs = sorted(b for (a, b) in arcs if a == n)
        if outs:
            groups = _groups(n, outs, lambda a, b, c: and_split_measure(dfg, a, b, c), threshold)
            if len(groups) == 1:
                flow += [(names[n], edge_place[(n, b)]) for b in groups[0]]
            else:
                hub = f"{names[n]}_out"
                places.append(hub)
                flow.append((names[n], hub))
                for g in groups:
                    r = route(None)
                    flow.append((hub, r))
                    flow += [(r, edge_place[(n, b)]) for b in g]
        ins = sorted(a for (a, b) in arcs if b == n)
        if ins:
            groups = _groups(n, ins, lambda d, b, c: and_join_measure(dfg, d, b, c), threshold)
            if len(groups) == 1:
                flow += [(edge_place[(a, n)], names[n]) for a in groups[0]]
            else:
                hub = f"{names[n]}_in"
                places.append(hub)
                flow.append((hub, names[n]))
                for g in groups:
                    r = route(None)
                    flow.append((r, hub))
                    flow += [(edge_place[(a, n)], r) for a in g]
    return PetriNet(places, transitions, flow, {"source": 1}, {"sink": 1}, model_id)


def discover_heuristics(log: EventLog, params: HeuristicsParams = HeuristicsParams(), model_id: str = "net") -> PetriNet:
    """If the AND-typed net cannot reach its final marking, bindings fall back to XOR."""
    if not log:
        raise EmptyLogError("cannot discover a model from an empty log")
    dfg = build_dfg(log)
    arcs = _connect(dependency_arcs(dfg, params), log, dfg)
    net = _compile(arcs, dfg, params, typed=True, model_id=model_id)
    try:
        min_model_cost(net, max_states=_REACHABILITY_BUDGET)
        return net
    except DataError:
        return _compile(arcs, dfg, params, typed=False, model_id=model_id)
