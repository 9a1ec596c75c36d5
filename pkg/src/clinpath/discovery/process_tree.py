"""Process trees, their block-wise translation to Petri nets, and random play-out."""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from ..petri_net import PetriNet, Transition


class Operator(enum.Enum):
    SEQ = "->"
    XOR = "X"
    AND = "+"
    LOOP = "*"


@dataclass(frozen=True)
class ProcessTree:
    """Leaf when ``operator`` is None (``label`` None = silent leaf)."""

    operator: Operator | None = None
    children: tuple["ProcessTree", ...] = ()
    label: str | None = None

    def __post_init__(self):
        if self.operator is None:
            if self.children:
                raise ValueError("leaves have no children")
        elif self.operator is Operator.LOOP:
            if len(self.children) != 2:
                raise ValueError("LOOP needs exactly two children (do, redo)")
        elif len(self.children) < 2:
            raise ValueError(f"{self.operator.name} needs at least two children")

    @classmethod
    def leaf(cls, label: str | None) -> "ProcessTree":
        return cls(label=label)

    @classmethod
    def tau(cls) -> "ProcessTree":
        return cls()

    @classmethod
    def node(cls, operator: Operator, *children: "ProcessTree") -> "ProcessTree":
        return cls(operator, tuple(children))

    @property
    def is_leaf(self) -> bool:
        return self.operator is None

    def activities(self) -> set[str]:
        if self.is_leaf:
            return set() if self.label is None else {self.label}
        return set().union(*(c.activities() for c in self.children))

    def __str__(self) -> str:
        if self.is_leaf:
            return "tau" if self.label is None else repr(self.label)
        return f"{self.operator.value}({', '.join(map(str, self.children))})"


def flower(activities) -> ProcessTree:
    """Model accepting every sequence over ``activities``, the empty one included."""
    acts = sorted(activities)
    body = ProcessTree.leaf(acts[0]) if len(acts) == 1 else ProcessTree.node(Operator.XOR, *map(ProcessTree.leaf, acts))
    return ProcessTree.node(Operator.LOOP, ProcessTree.tau(), body)


class _Builder:
    def __init__(self):
        self.places: list[str] = []
        self.transitions: list[Transition] = []
        self.arcs: list[tuple[str, str]] = []
        self._n = 0

    def place(self) -> str:
        pid = f"p{len(self.places)}"
        self.places.append(pid)
        return pid

    def transition(self, label: str | None) -> str:
        tid = f"t{len(self.transitions)}"
        self.transitions.append(Transition(tid, label))
        return tid

    def between(self, src: str, label: str | None, dst: str) -> str:
        tid = self.transition(label)
        self.arcs += [(src, tid), (tid, dst)]
        return tid

    def compile(self, tree: ProcessTree, src: str, dst: str) -> None:
        op = tree.operator
        if op is None:
            self.between(src, tree.label, dst)
        elif op is Operator.SEQ:
            cur = src
            for i, child in enumerate(tree.children):
                nxt = dst if i == len(tree.children) - 1 else self.place()
                self.compile(child, cur, nxt)
                cur = nxt
        elif op is Operator.XOR:
            # safe to share boundary places: no block ever produces into its own src
            for child in tree.children:
                self.compile(child, src, dst)
        elif op is Operator.AND:
            split = self.transition(None)
            join = self.transition(None)
            self.arcs += [(src, split), (join, dst)]
            for child in tree.children:
                a, b = self.place(), self.place()
                self.arcs += [(split, a), (b, join)]
                self.compile(child, a, b)
        elif op is Operator.LOOP:
            do, redo = tree.children
            p_in, p_out = self.place(), self.place()
            self.between(src, None, p_in)
            self.compile(do, p_in, p_out)
            self.compile(redo, p_out, p_in)
            self.between(p_out, None, dst)
        else:  # pragma: no cover
            raise ValueError(op)


def tree_to_petri_net(tree: ProcessTree, model_id: str = "net") -> PetriNet:
    """Block-wise translation; every operator block sits between its own
    entry and exit place, AND/LOOP routing uses silent transitions."""
    b = _Builder()
    source, sink = b.place(), b.place()
    b.compile(tree, source, sink)
    return PetriNet(b.places, b.transitions, b.arcs, {source: 1}, {sink: 1}, model_id)


def play_out(tree: ProcessTree, rng: random.Random, max_redo: int = 3) -> list[str]:
    """Sample one trace. XOR picks a child uniformly, AND interleaves children
    uniformly at random, LOOP runs the redo part 0..max_redo times."""
    op = tree.operator
    if op is None:
        return [] if tree.label is None else [tree.label]
    if op is Operator.SEQ:
        return [a for c in tree.children for a in play_out(c, rng, max_redo)]
    if op is Operator.XOR:
        return play_out(rng.choice(tree.children), rng, max_redo)
    if op is Operator.LOOP:
        do, redo = tree.children
        out = play_out(do, rng, max_redo)
        for _ in range(rng.randint(0, max_redo)):
            out += play_out(redo, rng, max_redo) + play_out(do, rng, max_redo)
        return out
    parts = [play_out(c, rng, max_redo) for c in tree.children]
    out = []
    while any(parts):
        idx = rng.choice([i for i, p in enumerate(parts) if p])
        out.append(parts[idx].pop(0))
    return out
