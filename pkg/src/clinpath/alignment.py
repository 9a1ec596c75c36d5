"""Optimal alignments, fitness, per-activity diagnoses and best-model selection."""
from __future__ import annotations

import csv
import heapq
import math
from collections import Counter
from dataclasses import dataclass
from itertools import count
from typing import IO, Iterable, Sequence

from .costs import DEFAULT_COSTS, MoveCostSchedule
from .errors import (
    AlignmentFailedError,
    DataError,
    EmptyKnowledgeBaseError,
    EmptyLogError,
    FinalMarkingUnreachableError,
    StateBudgetExceededError,
    UnknownActivityError,
)
from .event_log import EventLog, Trace
from .petri_net import DEFAULT_STATE_BUDGET, CompiledNet, PetriNet, min_model_cost


@dataclass(frozen=True)
class Move:
    """One alignment step. ``log`` is the trace activity (None = gap),
    ``transition`` the fired transition id (None = gap) and ``label`` its label."""

    log: str | None
    transition: str | None = None
    label: str | None = None

    @property
    def kind(self) -> str:
        if self.transition is None:
            return "log"
        if self.log is not None:
            return "sync"
        return "silent" if self.label is None else "model"


@dataclass(frozen=True)
class Alignment:
    moves: tuple[Move, ...]
    cost: float
    fitness: float
    trace_ref: str
    model_ref: str
    explored_states: int = 0

    @property
    def is_perfect(self) -> bool:
        return self.cost == 0


def align(
    trace: Trace | Sequence[str],
    net: PetriNet,
    cost: MoveCostSchedule = DEFAULT_COSTS,
    max_states: int = DEFAULT_STATE_BUDGET,
) -> Alignment:
    """Cost-optimal alignment by A* search over (trace position, marking).

    The heuristic charges a log move for every remaining event whose label no
    marked place can still reach in the net graph. Firing never enlarges that
    reachable set, so the heuristic is consistent and closed states are final.

    Successors are generated synchronous first, then silent, visible model and
    log moves. Among entries of equal estimate the one further along the trace
    is expanded first, then the one whose tokens are graph-closest to the next
    event's transitions (or to the final places once the trace is consumed),
    then by the kind of the move that produced it in the order above, then the
    most recently generated one. Any tie order keeps the
    search optimal; this one is deterministic and reaches fitting completions
    quickly.
    """
    if isinstance(trace, Trace):
        acts, ref = trace.activities, trace.case_id
    else:
        acts, ref = tuple(trace), "trace"
    cn: CompiledNet = net.compiled
    worst_model = min_model_cost(net, cost, max_states)
    n = len(acts)
    moves = cn.moves
    silent = cn.by_label.get(None, [])
    visible = [k for k, m in enumerate(moves) if m[1] is not None]
    enabled, fire = CompiledNet.enabled, CompiledNet.fire
    log_c, model_c = cost.log_move, cost.model_move_visible

    future = cn.future_labels
    suffix = [Counter(acts[i:]) for i in range(n + 1)]
    h_memo: dict = {}

    def h(pos, m):
        support = tuple(i for i, k in enumerate(m) if k)
        key = (pos, support)
        val = h_memo.get(key)
        if val is None:
            reach = frozenset().union(*(future[i] for i in support))
            val = log_c * sum(c for a, c in suffix[pos].items() if a not in reach)
            h_memo[key] = val
        return val

    def guide(pos, m):
        if pos < n:
            dist = cn.distance_to_label(acts[pos])
            return min((dist[i] for i, k in enumerate(m) if k), default=math.inf)
        dist = cn.distance_to_final
        return sum(k * dist[i] for i, k in enumerate(m) if k)

    start = (0, cn.initial)
    best = {start: 0.0}
    parent: dict = {start: None}
    tie = count()
    heap = [(h(0, cn.initial), 0.0, 0, 0, 0, 0, start)]
    closed = set()
    while heap:
        _, g, _, _, _, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        pos, m = state
        if pos == n and m == cn.final:
            path = _unwind(parent, state)
            denom = log_c * n + worst_model
            fitness = max(0.0, 1.0 - g / denom) if denom > 0 else 1.0
            return Alignment(tuple(path), g, fitness, ref, net.model_id, len(closed))
        closed.add(state)
        if len(closed) > max_states:
            raise StateBudgetExceededError(max_states)

        succ = []
        if pos < n:
            for k in cn.by_label.get(acts[pos], ()):
                tid, label, pre, post = moves[k]
                if enabled(m, pre):
                    succ.append((g, 0, (pos + 1, fire(m, pre, post)), Move(acts[pos], tid, label)))
        for k in silent:
            tid, _, pre, post = moves[k]
            if enabled(m, pre):
                succ.append((g, 1, (pos, fire(m, pre, post)), Move(None, tid, None)))
        for k in visible:
            tid, label, pre, post = moves[k]
            if enabled(m, pre):
                succ.append((g + model_c, 2, (pos, fire(m, pre, post)), Move(None, tid, label)))
        if pos < n:
            succ.append((g + log_c, 3, (pos + 1, m), Move(acts[pos])))
        for ng, rank, nstate, move in succ:
            if nstate in closed:
                continue
            old = best.get(nstate)
            if old is None or ng < old:
                best[nstate] = ng
                parent[nstate] = (state, move)
                heapq.heappush(heap, (ng + h(*nstate), ng, -nstate[0], guide(*nstate), rank, -next(tie), nstate))
    raise FinalMarkingUnreachableError("no complete alignment exists")


def _unwind(parent: dict, state) -> list[Move]:
    path = []
    while parent[state] is not None:
        state, move = parent[state]
        path.append(move)
    path.reverse()
    return path


@dataclass(frozen=True)
class DiagnosisRow:
    counts: dict[str, int]
    fitness: float
    trace_ref: str
    model_ref: str

    def vector(self, column_alphabet: Sequence[str]) -> list[int]:
        return [self.counts.get(a, 0) for a in column_alphabet]


def diagnosis_row(alignment: Alignment, column_alphabet: Sequence[str]) -> DiagnosisRow:
    """Mismatches per activity: log moves plus visible model moves carrying that label."""
    counts = dict.fromkeys(column_alphabet, 0)
    for mv in alignment.moves:
        kind = mv.kind
        if kind == "log":
            act = mv.log
        elif kind == "model":
            act = mv.label
        else:
            continue
        if act not in counts:
            raise UnknownActivityError(act)
        counts[act] += 1
    return DiagnosisRow(counts, alignment.fitness, alignment.trace_ref, alignment.model_ref)


@dataclass(frozen=True)
class DiagnosisMatrix:
    rows: tuple[DiagnosisRow, ...]
    column_alphabet: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def vectors(self) -> list[list[int]]:
        return [r.vector(self.column_alphabet) for r in self.rows]

    @property
    def fitness(self) -> list[float]:
        return [r.fitness for r in self.rows]

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["trace", *self.column_alphabet, "fitness", "model_ref"])
        for r in self.rows:
            writer.writerow([r.trace_ref, *r.vector(self.column_alphabet), repr(r.fitness), r.model_ref])


def compute_diagnoses(
    log: EventLog,
    models: Iterable[PetriNet],
    cost: MoveCostSchedule = DEFAULT_COSTS,
    max_states: int = DEFAULT_STATE_BUDGET,
) -> DiagnosisMatrix:
    """For every trace keep the diagnosis of the model with strictly greatest
    fitness; the earlier model wins ties. Alignments are cached per variant."""
    nets = list(models)
    if not nets:
        raise EmptyKnowledgeBaseError()
    if not log:
        raise EmptyLogError("cannot diagnose an empty log")
    alphabet = set(log.alphabet)
    for net in nets:
        alphabet |= net.visible_labels
    columns = tuple(sorted(alphabet))

    cache: dict[tuple[tuple[str, ...], int], Alignment] = {}
    rows = []
    for trace in log:
        best_fitness = float("-inf")
        best_row = None
        for idx, net in enumerate(nets):
            key = (trace.activities, idx)
            if key not in cache:
                try:
                    cache[key] = align(trace.activities, net, cost, max_states)
                except DataError as exc:
                    raise AlignmentFailedError(trace.case_id, net.model_id, exc) from exc
            al = cache[key]
            if al.fitness > best_fitness:
                best_fitness = al.fitness
                best_row = diagnosis_row(al, columns)
        rows.append(DiagnosisRow(best_row.counts, best_row.fitness, trace.case_id, best_row.model_ref))
    return DiagnosisMatrix(tuple(rows), columns)
