"""Labeled Petri nets with unit arc weights: firing rule, cheapest complete run,
PNML and Graphviz DOT serialization."""
from __future__ import annotations

import heapq
import io
import math
import xml.etree.ElementTree as ET
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from itertools import count
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

import numpy as np
from scipy.optimize import linprog

from .costs import DEFAULT_COSTS, MoveCostSchedule
from .errors import (
    DataError,
    FinalMarkingUnreachableError,
    MalformedPnmlError,
    MissingMarkingError,
    NotEnabledError,
    StateBudgetExceededError,
    UnknownPlaceError,
)

DEFAULT_STATE_BUDGET = 2_000_000
PNML_TOOL = "clinpath"
_INVISIBLE = "$invisible$"


@dataclass(frozen=True, order=True)
class Transition:
    id: str
    label: str | None = None  # None marks a silent transition

    @property
    def silent(self) -> bool:
        return self.label is None


class Marking(Mapping):
    """Immutable token distribution; places with zero tokens are omitted."""

    __slots__ = ("_tokens", "_hash")

    def __init__(self, tokens: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = tokens.items() if isinstance(tokens, Mapping) else tokens
        clean = {}
        for place, n in items:
            if n < 0:
                raise ValueError(f"negative token count on {place!r}")
            if n:
                clean[place] = int(n)
        self._tokens = dict(sorted(clean.items()))
        self._hash = None

    def __getitem__(self, place: str) -> int:
        return self._tokens[place]

    def get(self, place, default=0):
        return self._tokens.get(place, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._tokens.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Marking):
            return self._tokens == other._tokens
        if isinstance(other, Mapping):
            return self._tokens == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __repr__(self) -> str:
        return f"Marking({self._tokens!r})"


class PetriNet:
    """A labeled Petri net with initial and final marking.

    Nodes are identified by string ids; places and transitions share one id
    namespace. Arcs are ``(source, target)`` pairs between a place and a
    transition. Instances are treated as immutable once built.
    """

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[Transition],
        arcs: Iterable[tuple[str, str]],
        initial_marking: Mapping[str, int],
        final_marking: Mapping[str, int],
        model_id: str = "net",
    ):
        self.model_id = model_id
        self.places: tuple[str, ...] = tuple(sorted(set(places)))
        trans = sorted(set(transitions))
        self.transitions: dict[str, Transition] = {t.id: t for t in trans}
        self.arcs: frozenset[tuple[str, str]] = frozenset(arcs)
        self.initial_marking = Marking(initial_marking)
        self.final_marking = Marking(final_marking)
        self._validate(len(trans))

    def _validate(self, n_transitions: int) -> None:
        places = set(self.places)
        if len(self.transitions) != n_transitions:
            raise DataError("duplicate transition ids")
        if places & self.transitions.keys():
            raise DataError("place and transition ids overlap")
        if not self.transitions:
            raise DataError("a net needs at least one transition")
        for src, dst in self.arcs:
            if not ((src in places and dst in self.transitions) or (src in self.transitions and dst in places)):
                raise DataError(f"arc {src!r}->{dst!r} does not join a place and a transition")
        for name, marking in (("initial", self.initial_marking), ("final", self.final_marking)):
            if not marking:
                raise DataError(f"{name} marking is empty")
            unknown = set(marking) - places
            if unknown:
                raise UnknownPlaceError(f"{name} marking references unknown places {sorted(unknown)}")
        succ: dict[str, list[str]] = {}
        pred: dict[str, list[str]] = {}
        for src, dst in self.arcs:
            succ.setdefault(src, []).append(dst)
            pred.setdefault(dst, []).append(src)
        forward = _reach(self.initial_marking, succ)
        backward = _reach(self.final_marking, pred)
        stray = (places | self.transitions.keys()) - (forward & backward)
        if stray:
            raise DataError(f"nodes not on any initial-to-final path: {sorted(stray)[:5]}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self.model_id == other.model_id
            and self.places == other.places
            and self.transitions == other.transitions
            and self.arcs == other.arcs
            and self.initial_marking == other.initial_marking
            and self.final_marking == other.final_marking
        )

    def __hash__(self) -> int:
        return hash((self.model_id, self.places, self.arcs))

    def __repr__(self) -> str:
        return f"PetriNet({self.model_id!r}, {len(self.places)} places, {len(self.transitions)} transitions, {len(self.arcs)} arcs)"

    def with_id(self, model_id: str) -> "PetriNet":
        return PetriNet(self.places, self.transitions.values(), self.arcs, self.initial_marking, self.final_marking, model_id)

    def preset(self, tid: str) -> tuple[str, ...]:
        return self._flow[0][tid]

    def postset(self, tid: str) -> tuple[str, ...]:
        return self._flow[1][tid]

    @cached_property
    def _flow(self) -> tuple[dict[str, tuple[str, ...]], dict[str, tuple[str, ...]]]:
        pre = {t: [] for t in self.transitions}
        post = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if src in pre:
                post[src].append(dst)
            else:
                pre[dst].append(src)
        return ({t: tuple(sorted(v)) for t, v in pre.items()}, {t: tuple(sorted(v)) for t, v in post.items()})

    @property
    def visible_labels(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions.values() if t.label is not None)

    @cached_property
    def compiled(self) -> "CompiledNet":
        return CompiledNet(self)

    def min_model_cost(self, cost: MoveCostSchedule = DEFAULT_COSTS, max_states: int = DEFAULT_STATE_BUDGET) -> float:
        return min_model_cost(self, cost, max_states)


def _reach(start: Iterable[str], edges: Mapping[str, list[str]]) -> set[str]:
    seen = set(start)
    stack = list(seen)
    while stack:
        for nxt in edges.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


class CompiledNet:
    """Index-based view of a net used by the search routines.

    Markings are tuples of token counts indexed by ``place_index``.
    ``moves`` lists ``(transition_id, label, pre, post)`` with place indices,
    ordered by transition id.
    """

    def __init__(self, net: PetriNet):
        self.place_index = {p: i for i, p in enumerate(net.places)}
        self.n_places = len(net.places)
        self.moves = []
        self.by_label: dict[str | None, list[int]] = {}
        for k, (tid, t) in enumerate(sorted(net.transitions.items())):
            pre = tuple(self.place_index[p] for p in net.preset(tid))
            post = tuple(self.place_index[p] for p in net.postset(tid))
            self.moves.append((tid, t.label, pre, post))
            self.by_label.setdefault(t.label, []).append(k)
        self.initial = self.encode(net.initial_marking)
        self.final = self.encode(net.final_marking)
        self.future_labels = self._future_labels()
        self._label_distance: dict = {}

    def _distance_to(self, targets: Iterable[int]) -> list[float]:
        """Per place, the fewest transitions a token there must pass through
        before reaching a place in ``targets`` (ignoring other tokens)."""
        into: list[list[int]] = [[] for _ in range(self.n_places)]
        for _, _, pre, post in self.moves:
            for j in post:
                into[j].extend(pre)
        dist = [math.inf] * self.n_places
        queue = deque()
        for i in targets:
            dist[i] = 0
            queue.append(i)
        while queue:
            j = queue.popleft()
            for i in into[j]:
                if dist[i] == math.inf:
                    dist[i] = dist[j] + 1
                    queue.append(i)
        return dist

    @cached_property
    def distance_to_final(self) -> list[float]:
        return self._distance_to(i for i, k in enumerate(self.final) if k)

    def distance_to_label(self, label: str) -> list[float]:
        """Per place, distance to an input place of a transition labelled ``label``."""
        dist = self._label_distance.get(label)
        if dist is None:
            dist = self._distance_to({i for k in self.by_label.get(label, ()) for i in self.moves[k][2]})
            self._label_distance[label] = dist
        return dist

    def _future_labels(self) -> list[frozenset]:
        """Per place, the visible labels of transitions reachable from it in
        the net graph (token counts ignored)."""
        out_moves: list[list[int]] = [[] for _ in range(self.n_places)]
        for k, (_, _, pre, _) in enumerate(self.moves):
            for i in pre:
                out_moves[i].append(k)
        result = []
        for start in range(self.n_places):
            seen, stack, labels = {start}, [start], set()
            while stack:
                for k in out_moves[stack.pop()]:
                    _, label, _, post = self.moves[k]
                    if label is not None:
                        labels.add(label)
                    for j in post:
                        if j not in seen:
                            seen.add(j)
                            stack.append(j)
            result.append(frozenset(labels))
        return result

    def encode(self, marking: Mapping[str, int]) -> tuple[int, ...]:
        vec = [0] * self.n_places
        for p, n in marking.items():
            try:
                vec[self.place_index[p]] = n
            except KeyError:
                raise UnknownPlaceError(f"unknown place {p!r}") from None
        return tuple(vec)

    @staticmethod
    def enabled(marking: tuple[int, ...], pre: tuple[int, ...]) -> bool:
        for i in pre:
            if marking[i] < 1:
                return False
        return True

    @staticmethod
    def fire(marking: tuple[int, ...], pre: tuple[int, ...], post: tuple[int, ...]) -> tuple[int, ...]:
        vec = list(marking)
        for i in pre:
            vec[i] -= 1
        for i in post:
            vec[i] += 1
        return tuple(vec)


def enabled_transitions(net: PetriNet, marking: Mapping[str, int]) -> set[str]:
    vec = net.compiled.encode(marking)
    return {tid for tid, _, pre, _ in net.compiled.moves if CompiledNet.enabled(vec, pre)}


def fire(net: PetriNet, marking: Mapping[str, int], tid: str) -> Marking:
    cn = net.compiled
    vec = cn.encode(marking)
    if tid not in net.transitions:
        raise NotEnabledError(f"unknown transition {tid!r}")
    pre = tuple(cn.place_index[p] for p in net.preset(tid))
    if not CompiledNet.enabled(vec, pre):
        raise NotEnabledError(f"transition {tid!r} is not enabled")
    post = tuple(cn.place_index[p] for p in net.postset(tid))
    out = CompiledNet.fire(vec, pre, post)
    return Marking((net.places[i], n) for i, n in enumerate(out))


def min_model_cost(net: PetriNet, cost: MoveCostSchedule = DEFAULT_COSTS, max_states: int = DEFAULT_STATE_BUDGET) -> float:
    """Cheapest run from initial to final marking; visible transitions cost
    ``cost.model_move_visible``, silent ones nothing. Memoized per net."""
    memo = net.__dict__.setdefault("_min_cost_memo", {})
    key = (cost.model_move_visible, max_states)
    if key not in memo:
        memo[key] = _dijkstra_model_cost(net.compiled, cost.model_move_visible, max_states)
    return memo[key]


class _MarkingEquationBound:
    """Lower bound on the remaining model cost from the LP relaxation of the
    marking equation ``m + C x = m_final, x >= 0``. An infeasible system
    proves the final marking unreachable from ``m``."""

    def __init__(self, cn: CompiledNet, visible_cost: float):
        self.c = np.array([0.0 if label is None else visible_cost for _, label, _, _ in cn.moves])
        self.incidence = np.zeros((cn.n_places, len(cn.moves)))
        for k, (_, _, pre, post) in enumerate(cn.moves):
            for i in pre:
                self.incidence[i, k] -= 1
            for i in post:
                self.incidence[i, k] += 1
        self.final = np.array(cn.final, dtype=float)
        self.unit = visible_cost
        self.memo: dict = {}

    def __call__(self, m: tuple[int, ...]) -> float | None:
        val = self.memo.get(m, False)
        if val is not False:
            return val
        res = linprog(self.c, A_eq=self.incidence, b_eq=self.final - np.array(m, dtype=float), bounds=(0, None), method="highs")
        if res.status == 2:
            val = None
        elif res.status == 0:
            # run costs are multiples of the unit, so round the bound up
            val = self.unit * math.ceil(res.fun / self.unit - 1e-6) if self.unit > 0 else 0.0
        else:
            val = 0.0
        self.memo[m] = val
        return val


_PLAIN_SEARCH_STATES = 20_000


def _dijkstra_model_cost(cn: CompiledNet, visible_cost: float, max_states: int) -> float:
    """Plain uniform-cost search first; nets with wide concurrency exhaust its
    small budget and are searched again with the marking-equation bound."""
    bound = _MarkingEquationBound(cn, visible_cost)
    if bound(cn.initial) is None:
        raise FinalMarkingUnreachableError("final marking is not reachable from the initial marking")
    try:
        return _search_model_cost(cn, visible_cost, min(max_states, _PLAIN_SEARCH_STATES), None)
    except StateBudgetExceededError:
        if max_states <= _PLAIN_SEARCH_STATES:
            raise
    return _search_model_cost(cn, visible_cost, max_states, bound)


def _search_model_cost(cn: CompiledNet, visible_cost: float, max_states: int, bound: _MarkingEquationBound | None) -> float:
    """A* over markings; with ``bound`` the marking-equation estimate is
    evaluated lazily: a state is queued with its parent's estimate and
    re-queued once when its own is higher. Equal estimates prefer markings
    whose tokens are graph-closest to the final places, then the most
    recently generated."""
    to_final = cn.distance_to_final
    tie = count()
    heap = [(0.0, 0.0, 0, 0, False, cn.initial)]
    best = {cn.initial: 0.0}
    closed = set()
    while heap:
        f, g, _, _, bounded, m = heapq.heappop(heap)
        if m in closed:
            continue
        if not bounded and bound is not None:
            h = bound(m)
            if h is None:
                closed.add(m)
                continue
            if g + h > f:
                heapq.heappush(heap, (g + h, g, _guide(m, to_final), -next(tie), True, m))
                continue
        if m == cn.final:
            return g
        closed.add(m)
        if len(closed) > max_states:
            raise StateBudgetExceededError(max_states)
        for _, label, pre, post in cn.moves:
            if CompiledNet.enabled(m, pre):
                nm = CompiledNet.fire(m, pre, post)
                ng = g + (0.0 if label is None else visible_cost)
                if nm in closed or best.get(nm, math.inf) <= ng:
                    continue
                best[nm] = ng
                heapq.heappush(heap, (max(ng, f), ng, _guide(nm, to_final), -next(tie), False, nm))
    raise FinalMarkingUnreachableError("final marking is not reachable from the initial marking")


def _guide(m: tuple[int, ...], distance: list[float]) -> float:
    return sum(k * distance[i] for i, k in enumerate(m) if k)


# --- serialization -----------------------------------------------------------

def _text(parent: ET.Element, tag: str, value: str) -> ET.Element:
    el = ET.SubElement(parent, tag)
    ET.SubElement(el, "text").text = value
    return el


def to_pnml(net: PetriNet) -> bytes:
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", id=net.model_id, type="http://www.pnml.org/version-2009/grammar/pnmlcoremodel")
    _text(net_el, "name", net.model_id)
    page = ET.SubElement(net_el, "page", id="page0")
    for p in net.places:
        p_el = ET.SubElement(page, "place", id=p)
        _text(p_el, "name", p)
        if net.initial_marking.get(p):
            _text(p_el, "initialMarking", str(net.initial_marking[p]))
    for tid, t in sorted(net.transitions.items()):
        t_el = ET.SubElement(page, "transition", id=tid)
        _text(t_el, "name", t.label if t.label is not None else tid)
        if t.silent:
            ET.SubElement(t_el, "toolspecific", tool="ProM", version="6.4", activity=_INVISIBLE)
    for i, (src, dst) in enumerate(sorted(net.arcs)):
        ET.SubElement(page, "arc", id=f"arc{i}", source=src, target=dst)
    tool = ET.SubElement(net_el, "toolspecific", tool=PNML_TOOL, version="1")
    final = ET.SubElement(tool, "finalMarking")
    for p, n in net.final_marking.items():
        pl = ET.SubElement(final, "place", idref=p)
        ET.SubElement(pl, "text").text = str(n)
    ET.indent(root)
    buf = io.BytesIO()
    ET.ElementTree(root).write(buf, encoding="utf-8", xml_declaration=True)
    return buf.getvalue() + b"\n"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(net: PetriNet) -> bytes:
    """Graphviz rendering: places are circles, transitions boxes, silent
    transitions small filled black boxes."""
    lines = [f"digraph {_q(net.model_id)} {{", "  rankdir=LR;", '  node [fontname="Helvetica"];']
    for p in net.places:
        tokens = net.initial_marking.get(p)
        attrs = ["shape=circle", f"label={_q(str(tokens) if tokens else '')}", "width=0.35", "fixedsize=true"]
        if net.final_marking.get(p):
            attrs.append("peripheries=2")
        lines.append(f"  {_q(p)} [{', '.join(attrs)}];")
    for tid, t in sorted(net.transitions.items()):
        if t.silent:
            lines.append(f'  {_q(tid)} [shape=box, style=filled, fillcolor=black, label="", width=0.15, height=0.4];')
        else:
            lines.append(f"  {_q(tid)} [shape=box, label={_q(t.label)}];")
    for src, dst in sorted(net.arcs):
        lines.append(f"  {_q(src)} -> {_q(dst)};")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize(net: PetriNet, fmt: str = "pnml") -> bytes:
    fmt = fmt.lower()
    if fmt == "pnml":
        return to_pnml(net)
    if fmt == "dot":
        return to_dot(net)
    raise ValueError(f"unknown format {fmt!r}")


def _strip(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(el: ET.Element, tag: str) -> ET.Element | None:
    for c in el:
        if _strip(c.tag) == tag:
            return c
    return None


def _child_text(el: ET.Element, tag: str) -> str | None:
    c = _child(el, tag)
    if c is None:
        return None
    t = _child(c, "text")
    return None if t is None or t.text is None else t.text.strip()


def _read_final(net_el: ET.Element) -> dict[str, int] | None:
    for el in net_el:
        tag = _strip(el.tag)
        block = None
        if tag == "toolspecific" and el.get("tool") == PNML_TOOL:
            block = _child(el, "finalMarking")
        elif tag == "finalmarkings":  # pm4py's layout
            block = _child(el, "marking")
        if block is not None:
            out = {}
            for pl in block:
                t = _child(pl, "text")
                out[pl.get("idref")] = int(t.text) if t is not None and t.text else 1
            return out
    return None


def parse_pnml(source: Union[bytes, str, Path, IO[bytes]]) -> PetriNet:
    try:
        if isinstance(source, bytes):
            root = ET.fromstring(source)
        else:
            root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise MalformedPnmlError(f"malformed PNML: {exc.msg}") from None
    nets = [el for el in root.iter() if _strip(el.tag) == "net"]
    if len(nets) != 1:
        raise MalformedPnmlError(f"expected exactly one net element, found {len(nets)}")
    net_el = nets[0]
    places, transitions, arcs, initial = [], [], [], {}
    for el in net_el.iter():
        tag = _strip(el.tag)
        if tag == "place":
            pid = el.get("id")
            if pid is None:
                continue  # idref entries inside marking blocks
            places.append(pid)
            tokens = _child_text(el, "initialMarking")
            if tokens:
                initial[pid] = int(tokens)
        elif tag == "transition":
            tid = el.get("id")
            if tid is None:
                raise MalformedPnmlError("transition without id")
            silent = any(_strip(c.tag) == "toolspecific" and c.get("activity") == _INVISIBLE for c in el)
            transitions.append(Transition(tid, None if silent else (_child_text(el, "name") or tid)))
        elif tag == "arc":
            src, dst = el.get("source"), el.get("target")
            if src is None or dst is None:
                raise MalformedPnmlError("arc without source or target")
            arcs.append((src, dst))
    if not initial:
        raise MissingMarkingError("no initial marking")
    final = _read_final(net_el)
    if not final:
        raise MissingMarkingError("no final marking annotation")
    try:
        return PetriNet(places, transitions, arcs, initial, final, net_el.get("id") or "net")
    except DataError as exc:
        raise MalformedPnmlError(str(exc)) from exc
