import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clinpath.alignment import align
from clinpath.discovery import discover
from clinpath.discovery.dfg import build_dfg
from clinpath.discovery.heuristics import (
    HeuristicsParams,
    and_split_measure,
    dependency,
    dependency_arcs,
    discover_heuristics,
)
from clinpath.discovery.inductive import discover_inductive, inductive_tree
from clinpath.discovery.process_tree import Operator, ProcessTree, flower, play_out, tree_to_petri_net
from clinpath.errors import EmptyLogError
from clinpath.event_log import EventLog
from clinpath.petri_net import min_model_cost

from helpers import log_of, random_log, random_tree


def fits(net, seqs):
    return all(align(s, net).cost == 0 for s in seqs)


# --- DFG ---------------------------------------------------------------------

def test_dfg_counts():
    d = build_dfg(log_of("ab", repeat=2))
    assert d.edge_counts == {("a", "b"): 2}
    assert d.start_counts == {"a": 2}
    assert d.end_counts == {"b": 2}


def test_dfg_single_event():
    d = build_dfg(log_of("a"))
    assert d.edge_counts == {}
    assert d.start_counts == d.end_counts == {"a": 1}


def test_dfg_both_directions():
    d = build_dfg(log_of("ab", "ba"))
    assert d.edge_counts == {("a", "b"): 1, ("b", "a"): 1}


def test_dfg_empty():
    with pytest.raises(EmptyLogError):
        build_dfg(EventLog())


@given(st.lists(st.lists(st.sampled_from("abc"), min_size=1, max_size=5), min_size=1, max_size=20))
def test_dfg_edge_total(seqs):
    d = build_dfg(EventLog.from_sequences(seqs))
    assert sum(d.edge_counts.values()) == sum(len(s) - 1 for s in seqs)
    assert sum(d.start_counts.values()) == sum(d.end_counts.values()) == len(seqs)


# --- process trees -----------------------------------------------------------

def test_tree_arity_checked():
    with pytest.raises(ValueError):
        ProcessTree.node(Operator.SEQ, ProcessTree.leaf("a"))
    with pytest.raises(ValueError):
        ProcessTree.node(Operator.LOOP, *map(ProcessTree.leaf, "abc"))


def test_flower_accepts_anything():
    net = tree_to_petri_net(flower({"a", "b"}))
    assert fits(net, [("a",), ("b", "a", "b"), ("a", "a", "a", "b")])
    assert min_model_cost(net) == 0


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_compiled_tree_replays_its_play_outs(seed):
    rng = random.Random(seed)
    tree = random_tree(rng, list("abcd"), 6)
    net = tree_to_petri_net(tree)
    for _ in range(5):
        assert align(play_out(tree, rng), net).cost == 0


# --- inductive miner ---------------------------------------------------------

def test_im_sequence_then_choice():
    log = log_of("ab", "ac")
    assert inductive_tree(log) == ProcessTree.node(
        Operator.SEQ, ProcessTree.leaf("a"), ProcessTree.node(Operator.XOR, ProcessTree.leaf("b"), ProcessTree.leaf("c"))
    )
    assert fits(discover_inductive(log), log.sequences())


def test_im_single_activity():
    net = discover_inductive(log_of("a", repeat=5))
    assert len(net.transitions) == 1
    assert len(net.places) == 2
    (t,) = net.transitions.values()
    assert t.label == "a"
    assert net.preset(t.id) == tuple(net.initial_marking)
    assert net.postset(t.id) == tuple(net.final_marking)


def test_im_flower_fallback():
    log = log_of("ab", "ba", "aba")
    tree = inductive_tree(log)

    def has_flower(t):
        if t.operator is Operator.LOOP and t.children[0] == ProcessTree.tau():
            return True
        return any(has_flower(c) for c in t.children)

    assert has_flower(tree)
    assert fits(discover_inductive(log), log.sequences())


def test_im_loop_cut():
    log = log_of("ab", "abcab", "abcabcab")
    tree = inductive_tree(log)
    assert tree.operator is Operator.LOOP
    assert fits(discover_inductive(log), log.sequences())


def test_im_parallel_cut():
    log = log_of("abc", "acb", "bac", "bca", "cab", "cba")
    assert inductive_tree(log).operator is Operator.AND


def test_im_empty():
    with pytest.raises(EmptyLogError):
        discover_inductive(EventLog())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_im_perfect_fitness(seed):
    log = random_log(random.Random(seed), max_activities=8, max_traces=30)
    net = discover_inductive(log)
    assert fits(net, set(log.sequences()))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_im_deterministic(seed):
    log = random_log(random.Random(seed), max_activities=6, max_traces=20)
    assert discover_inductive(log) == discover_inductive(EventLog(tuple(reversed(log.traces))))


# --- heuristics miner --------------------------------------------------------

def test_hm_dependency_below_threshold():
    d = build_dfg(log_of("ab", repeat=5))
    assert dependency(d, "a", "b") == pytest.approx(5 / 6)
    assert ("a", "b") not in dependency_arcs(d, rescue=False)
    assert ("a", "b") in dependency_arcs(d, rescue=True)


def test_hm_dependency_at_threshold():
    log = log_of("ab", repeat=9)
    d = build_dfg(log)
    assert dependency(d, "a", "b") == pytest.approx(0.9)
    assert ("a", "b") in dependency_arcs(d, rescue=False)
    assert fits(discover_heuristics(log), [("a", "b")])


def test_hm_and_split():
    log = log_of("abcd", "acbd", repeat=10)
    d = build_dfg(log)
    assert and_split_measure(d, "a", "b", "c") == pytest.approx(20 / 21)
    net = discover_heuristics(log)
    assert fits(net, [tuple("abcd"), tuple("acbd")])
    # parallel branches need an AND-split: a single run cannot skip b or c
    assert align(tuple("abd"), net).cost > 0


def test_hm_self_loop():
    log = log_of("abbc", "abc", "abbbc", repeat=3)
    assert fits(discover_heuristics(log), log.sequences())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_hm_monotone_in_threshold(seed, t1, t2):
    lo, hi = sorted((t1, t2))
    d = build_dfg(random_log(random.Random(seed), max_activities=6, max_traces=30))
    strict = dependency_arcs(d, HeuristicsParams(dependency_threshold=hi), rescue=False)
    loose = dependency_arcs(d, HeuristicsParams(dependency_threshold=lo), rescue=False)
    assert strict <= loose


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["im", "hm"]))
def test_final_marking_reachable(seed, miner):
    log = random_log(random.Random(seed), max_activities=8, max_traces=40)
    net = discover(log, miner)
    assert min_model_cost(net) >= 0
    assert net.visible_labels <= log.alphabet


def test_discover_rejects_unknown_miner():
    with pytest.raises(ValueError):
        discover(log_of("a"), "ilp")


def test_hm_replays_frequent_variant():
    log = log_of("abc", repeat=8) + log_of("axc", repeat=2)
    net = discover_heuristics(log)
    assert align(tuple("abc"), net).cost == 0
    assert Counter(log.sequences())[tuple("abc")] == 8
