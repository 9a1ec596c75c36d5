"""Synthetic multi-disease benchmark with controllable concept drift.

Each disease gets a random block-structured process tree over its own
activities; a fraction of the labels is borrowed from the first disease so
the pathways overlap. The last disease plays the anomalous (positive) role.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field

from ..discovery.process_tree import Operator, ProcessTree, play_out
from ..errors import InvalidSpecError
from ..event_log import EventLog, Trace

_OPS = (Operator.SEQ, Operator.XOR, Operator.AND, Operator.LOOP)


@dataclass(frozen=True)
class GeneratorSpec:
    n_diseases: int = 5
    activities_per_disease: tuple[int, int] = (6, 10)
    tree_depth: tuple[int, int] = (2, 4)
    # weights for SEQ, XOR, AND, LOOP
    operator_weights: tuple[float, float, float, float] = (0.45, 0.3, 0.1, 0.15)
    traces_per_disease: int = 80
    label_overlap_fraction: float = 0.3
    seed: int = 0
    max_redo: int = 3

    def validate(self) -> None:
        lo, hi = self.activities_per_disease
        dlo, dhi = self.tree_depth
        if self.n_diseases < 2:
            raise InvalidSpecError("need at least two diseases")
        if not 1 <= lo <= hi:
            raise InvalidSpecError("activities_per_disease must be a range with lower bound >= 1")
        if not 0 <= dlo <= dhi:
            raise InvalidSpecError("tree_depth must be a non-negative range")
        if len(self.operator_weights) != 4 or any(w < 0 for w in self.operator_weights) or sum(self.operator_weights) <= 0:
            raise InvalidSpecError("operator weights must be 4 non-negative numbers with positive sum")
        if self.traces_per_disease < 1:
            raise InvalidSpecError("traces_per_disease must be >= 1")
        if not 0.0 <= self.label_overlap_fraction <= 1.0:
            raise InvalidSpecError("label_overlap_fraction must lie in [0, 1]")
        if self.max_redo < 0:
            raise InvalidSpecError("max_redo must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Benchmark:
    logs: list[EventLog]  # one per disease; the last is the positive one
    trees: list[ProcessTree] = field(default_factory=list)

    @property
    def negatives(self) -> list[EventLog]:
        return self.logs[:-1]

    @property
    def positive(self) -> EventLog:
        return self.logs[-1]


def _split_points(rng: random.Random, items: list[str], parts: int) -> list[list[str]]:
    cuts = sorted(rng.sample(range(1, len(items)), parts - 1))
    bounds = [0, *cuts, len(items)]
    return [items[a:b] for a, b in zip(bounds, bounds[1:])]


def random_tree(activities: list[str], depth: int, rng: random.Random, weights) -> ProcessTree:
    if len(activities) == 1:
        return ProcessTree.leaf(activities[0])
    if depth <= 0:
        return ProcessTree.node(Operator.SEQ, *map(ProcessTree.leaf, activities))
    op = rng.choices(_OPS, weights=weights)[0]
    n_parts = 2 if op is Operator.LOOP else rng.randint(2, min(3, len(activities)))
    parts = _split_points(rng, activities, n_parts)
    return ProcessTree.node(op, *(random_tree(p, depth - 1, rng, weights) for p in parts))


def generate_benchmark(spec: GeneratorSpec = GeneratorSpec()) -> Benchmark:
    spec.validate()
    rng = random.Random(spec.seed)
    first: list[str] = []
    logs, trees = [], []
    for d in range(spec.n_diseases):
        n_acts = rng.randint(*spec.activities_per_disease)
        if d == 0:
            acts = [f"D0_a{j}" for j in range(n_acts)]
            first = list(acts)
        else:
            n_shared = min(round(spec.label_overlap_fraction * n_acts), len(first))
            acts = rng.sample(first, n_shared) + [f"D{d}_a{j}" for j in range(n_acts - n_shared)]
            rng.shuffle(acts)
        tree = random_tree(acts, rng.randint(*spec.tree_depth), rng, spec.operator_weights)
        traces = []
        while len(traces) < spec.traces_per_disease:
            seq = play_out(tree, rng, spec.max_redo)
            if seq:
                traces.append(Trace(f"D{d}_c{len(traces)}", tuple(seq)))
        logs.append(EventLog(tuple(traces)))
        trees.append(tree)
    return Benchmark(logs, trees)
