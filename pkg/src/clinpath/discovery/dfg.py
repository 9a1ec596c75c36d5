from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..errors import EmptyLogError
from ..event_log import EventLog


@dataclass
class DirectlyFollowsGraph:
    nodes: frozenset[str]
    edge_counts: Counter = field(default_factory=Counter)
    start_counts: Counter = field(default_factory=Counter)
    end_counts: Counter = field(default_factory=Counter)

    def successors(self, a: str) -> set[str]:
        return {b for (x, b) in self.edge_counts if x == a}

    def predecessors(self, b: str) -> set[str]:
        return {a for (a, y) in self.edge_counts if y == b}

    def count(self, a: str, b: str) -> int:
        return self.edge_counts.get((a, b), 0)


def dfg_of_sequences(sequences) -> DirectlyFollowsGraph:
    edges: Counter = Counter()
    starts: Counter = Counter()
    ends: Counter = Counter()
    nodes = set()
    for seq in sequences:
        if not seq:
            continue
        nodes.update(seq)
        starts[seq[0]] += 1
        ends[seq[-1]] += 1
        for a, b in zip(seq, seq[1:]):
            edges[(a, b)] += 1
    return DirectlyFollowsGraph(frozenset(nodes), edges, starts, ends)


def build_dfg(log: EventLog) -> DirectlyFollowsGraph:
    if not log:
        raise EmptyLogError("cannot build a DFG from an empty log")
    return dfg_of_sequences(log.sequences())
