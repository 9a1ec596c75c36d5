"""Net builders, random instance generators and independent oracles shared by the tests.

The oracles deliberately avoid the package's search code: they work on plain
dict markings and enumerate instead of using priority queues.
"""
from __future__ import annotations

import itertools
import random
from collections import Counter

import numpy as np

from clinpath.discovery.process_tree import Operator, ProcessTree, tree_to_petri_net
from clinpath.errors import DataError
from clinpath.event_log import EventLog
from clinpath.petri_net import PetriNet, Transition, min_model_cost


def chain(*labels: str | None, model_id: str = "net") -> PetriNet:
    """p0 -> t0 -> p1 -> t1 -> ... ; None labels are silent."""
    places = [f"p{i}" for i in range(len(labels) + 1)]
    transitions = [Transition(f"t{i}", lab) for i, lab in enumerate(labels)]
    arcs = []
    for i in range(len(labels)):
        arcs += [(f"p{i}", f"t{i}"), (f"t{i}", f"p{i + 1}")]
    return PetriNet(places, transitions, arcs, {"p0": 1}, {places[-1]: 1}, model_id)


def xor_net(*branches: tuple[str, ...]) -> PetriNet:
    children = []
    for br in branches:
        leaves = [ProcessTree.leaf(a) for a in br]
        children.append(leaves[0] if len(leaves) == 1 else ProcessTree.node(Operator.SEQ, *leaves))
    return tree_to_petri_net(ProcessTree.node(Operator.XOR, *children))


def log_of(*seqs, repeat: int = 1) -> EventLog:
    return EventLog.from_sequences([tuple(s) for s in seqs for _ in range(repeat)])


# --- random instances --------------------------------------------------------

LABELS = "abcd"


def random_tree(rng: random.Random, labels: list[str], max_leaves: int) -> ProcessTree:
    n = rng.randint(1, max_leaves)
    leaves = [ProcessTree.leaf(rng.choice(labels)) if rng.random() > 0.1 else ProcessTree.tau() for _ in range(n)]

    def build(items):
        if len(items) == 1:
            return items[0]
        op = rng.choice(list(Operator))
        if op is Operator.LOOP:
            k = rng.randint(1, len(items) - 1)
            return ProcessTree.node(op, build(items[:k]), build(items[k:]))
        k = rng.randint(1, len(items) - 1)
        return ProcessTree.node(op, build(items[:k]), build(items[k:]))

    return build(leaves)


def random_free_net(rng: random.Random, max_transitions: int = 8) -> PetriNet | None:
    """Arbitrary small net; None when it fails validation or cannot complete.
    Silent transitions never increase the token count."""
    n_places = rng.randint(2, 5)
    n_trans = rng.randint(1, max_transitions)
    places = [f"p{i}" for i in range(n_places)]
    transitions, arcs = [], []
    for i in range(n_trans):
        silent = rng.random() < 0.2
        pre = rng.sample(places, rng.randint(1, 2))
        post = rng.sample(places, rng.randint(1, len(pre) if silent else 2))
        transitions.append(Transition(f"t{i}", None if silent else rng.choice(LABELS)))
        arcs += [(p, f"t{i}") for p in pre] + [(f"t{i}", p) for p in post]
    try:
        net = PetriNet(places, transitions, arcs, {"p0": 1}, {places[-1]: 1})
        min_model_cost(net, max_states=5_000)
    except DataError:
        return None
    return net


def random_net(rng: random.Random, max_transitions: int = 8) -> PetriNet:
    while True:
        if rng.random() < 0.5:
            net = tree_to_petri_net(random_tree(rng, list(LABELS), 5))
            if len(net.transitions) <= max_transitions:
                return net
        else:
            net = random_free_net(rng, max_transitions)
            if net is not None:
                return net


def random_trace(rng: random.Random, max_len: int = 6, labels: str = LABELS + "x") -> tuple[str, ...]:
    return tuple(rng.choice(labels) for _ in range(rng.randint(1, max_len)))


def random_log(rng: random.Random, max_activities: int = 15, max_traces: int = 200, max_len: int = 8) -> EventLog:
    alphabet = [f"a{i}" for i in range(rng.randint(1, max_activities))]
    n = rng.randint(1, max_traces)
    if rng.random() < 0.5:
        # unstructured noise
        seqs = [tuple(rng.choice(alphabet) for _ in range(rng.randint(1, max_len))) for _ in range(n)]
    else:
        # few variants with repetitions
        base = [tuple(rng.choice(alphabet) for _ in range(rng.randint(1, max_len))) for _ in range(rng.randint(1, 6))]
        seqs = [rng.choice(base) for _ in range(n)]
    return EventLog.from_sequences(seqs)


def random_points(rng: random.Random, max_n: int = 100):
    n = rng.randint(1, max_n)
    dims = rng.randint(2, 10)
    centres = [[rng.randint(0, 12) for _ in range(dims)] for _ in range(rng.randint(1, 4))]
    pts = []
    for _ in range(n):
        c = rng.choice(centres)
        pts.append([x + rng.randint(-1, 1) for x in c] if rng.random() < 0.85 else [rng.randint(0, 12) for _ in range(dims)])
    arr = np.array(pts, dtype=float)
    d = np.sqrt(((arr[:, None] - arr[None]) ** 2).sum(-1))
    eps = float(rng.choice(d.ravel())) if rng.random() < 0.5 else rng.uniform(0.5, 6.0)
    return arr, max(eps, 0.5), rng.randint(1, 6)


# --- oracles -----------------------------------------------------------------

def _fire(net: PetriNet, marking: Counter, tid: str) -> Counter | None:
    for p in net.preset(tid):
        if marking[p] < 1:
            return None
    out = Counter(marking)
    for p in net.preset(tid):
        out[p] -= 1
    for p in net.postset(tid):
        out[p] += 1
    return +out


def brute_force_alignment_cost(trace, net: PetriNet, max_cost: int = 30) -> int:
    """Exhaustive optimal alignment cost (unit costs).

    For a growing cap B, enumerates every reachable (position, marking, cost)
    triple with cost <= B; the first cap at which a complete state shows up
    gives the minimum. Silent moves never add tokens in the test nets, so each
    enumeration is finite."""
    trace = tuple(trace)
    final = frozenset(Counter(dict(net.final_marking)).items())
    start = Counter(dict(net.initial_marking))
    tids = sorted(net.transitions)
    for cap in range(max_cost + 1):
        seen = set()
        stack = [(0, start, 0)]
        best = None
        while stack:
            pos, m, c = stack.pop()
            key = (pos, frozenset(m.items()), c)
            if key in seen:
                continue
            seen.add(key)
            if pos == len(trace) and key[1] == final:
                best = c if best is None else min(best, c)
            if pos < len(trace) and c + 1 <= cap:
                stack.append((pos + 1, m, c + 1))
            for t in tids:
                nm = _fire(net, m, t)
                if nm is None:
                    continue
                label = net.transitions[t].label
                if label is None:
                    stack.append((pos, nm, c))
                    continue
                if pos < len(trace) and trace[pos] == label:
                    stack.append((pos + 1, nm, c))
                if c + 1 <= cap:
                    stack.append((pos, nm, c + 1))
        if best is not None:
            return best
    raise AssertionError("no alignment within max_cost")


def check_alignment_projections(alignment, trace, net: PetriNet) -> None:
    """Log-side projection equals the trace; model side is a complete run."""
    assert all(mv.log is not None or mv.transition is not None for mv in alignment.moves)
    assert tuple(mv.log for mv in alignment.moves if mv.log is not None) == tuple(trace)
    m = Counter(dict(net.initial_marking))
    for mv in alignment.moves:
        if mv.transition is not None:
            m = _fire(net, m, mv.transition)
            assert m is not None, f"{mv.transition} not enabled"
            assert mv.label == net.transitions[mv.transition].label
            if mv.log is not None:
                assert mv.log == mv.label
    assert m == Counter(dict(net.final_marking))


def brute_force_dbscan(points, eps: float, min_pts: int) -> list[int]:
    """Density reachability via transitive closure of the core adjacency matrix.
    Border points join the reachable cluster with the smallest core index;
    clusters are numbered by their smallest core index."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    dist = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    adj = dist <= eps
    core = adj.sum(1) >= min_pts
    reach = adj & core[:, None] & core[None, :]
    reach = reach | np.eye(n, dtype=bool)
    for k in range(n):  # Warshall
        reach = reach | (reach[:, [k]] & reach[[k], :])
    labels = [-1] * n
    roots = []
    for i in range(n):
        if core[i]:
            root = int(np.flatnonzero(reach[i] & core)[0])
            if root not in roots:
                roots.append(root)
            labels[i] = roots.index(root)
    for i in range(n):
        if not core[i]:
            near = [labels[j] for j in range(n) if core[j] and adj[i, j]]
            if near:
                labels[i] = min(near)
    return labels


def pairwise_auc(pos, neg) -> float:
    wins = 0.0
    for p, q in itertools.product(pos, neg):
        wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (len(pos) * len(neg))
