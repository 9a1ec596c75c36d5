import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clinpath.clustering import (
    NOISE,
    ClusterLabels,
    dbscan,
    default_eps,
    optics,
    optics_ordering,
    split_into_sublogs,
)
from clinpath.errors import EmptyPointSetError, LengthMismatchError

from helpers import brute_force_dbscan, log_of, random_points


# --- dbscan ------------------------------------------------------------------

def test_dbscan_line_example():
    labels = dbscan([0, 1, 2, 10], eps=1.5, min_pts=2)
    assert labels.labels == (0, 0, 0, NOISE)
    assert labels.labels == tuple(brute_force_dbscan([0, 1, 2, 10], 1.5, 2))


def test_dbscan_identical_points():
    labels = dbscan([[3, 3]] * 6, eps=0.1, min_pts=1)
    assert labels.gamma == 1


def test_dbscan_tiny_eps_all_noise():
    labels = dbscan([[0, 0], [1, 0], [0, 1]], eps=1e-9, min_pts=2)
    assert labels.gamma == 0
    assert set(labels.labels) == {NOISE}


def test_dbscan_input_checks():
    with pytest.raises(EmptyPointSetError):
        dbscan([], eps=1.0)
    with pytest.raises(ValueError):
        dbscan([[0.0]], eps=0.0)


def test_border_point_goes_to_earliest_cluster():
    # 2.4 is a border point of both the left and the right group
    pts = [0, 0.3, 0.6, 1.0, 2.4, 3.8, 4.1, 4.4, 4.7]
    expected = (0, 0, 0, 0, 0, 1, 1, 1, 1)
    assert dbscan(pts, eps=1.5, min_pts=4).labels == expected
    assert tuple(brute_force_dbscan(pts, 1.5, 4)) == expected
    assert dbscan(pts[::-1], eps=1.5, min_pts=4).labels == expected


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_dbscan_matches_brute_force(seed):
    pts, eps, min_pts = random_points(random.Random(seed))
    assert dbscan(pts, eps, min_pts).labels == tuple(brute_force_dbscan(pts, eps, min_pts))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_dbscan_permutation(seed):
    rng = random.Random(seed)
    pts, eps, min_pts = random_points(rng, 60)
    perm = list(range(len(pts)))
    rng.shuffle(perm)
    a = dbscan(pts, eps, min_pts).labels
    b = dbscan(pts[perm], eps, min_pts).labels
    b_orig = [0] * len(pts)
    for new, old in enumerate(perm):
        b_orig[old] = b[new]
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    core = (d <= eps).sum(1) >= min_pts

    def core_partition(labels):
        groups = {}
        for i, lab in enumerate(labels):
            if core[i]:
                groups.setdefault(lab, set()).add(i)
        return {frozenset(g) for g in groups.values()}

    assert core_partition(a) == core_partition(b_orig)
    assert {i for i, x in enumerate(a) if x == NOISE} == {i for i, x in enumerate(b_orig) if x == NOISE}
    # a border point may only switch between clusters it touches
    for i in range(len(pts)):
        if not core[i] and a[i] != NOISE:
            touching = {a[j] for j in range(len(pts)) if core[j] and d[i, j] <= eps}
            assert a[i] in touching


# --- optics ------------------------------------------------------------------

def test_optics_line_example():
    assert optics([0, 1, 2, 10], min_pts=2, eps_extract=1.5) == dbscan([0, 1, 2, 10], 1.5, 2)


def test_optics_single_point():
    assert optics([[1.0, 2.0]], min_pts=1, eps_extract=1.0).labels == (0,)


def test_optics_two_pairs():
    pts = [[0, 0], [0, 1], [10, 0], [10, 1]]
    labels = optics(pts, min_pts=2, eps_extract=5.0)
    assert labels.gamma == 2
    assert labels.partition() == {frozenset({0, 1}), frozenset({2, 3})}


def test_optics_ordering_reachability():
    res = optics_ordering([0, 1, 2, 10], min_pts=2)
    assert list(res.ordering) == [0, 1, 2, 3]
    assert res.core_distance[0] == 1.0
    assert res.reachability[3] == 8.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_optics_extraction_equals_dbscan(seed):
    pts, eps, min_pts = random_points(random.Random(seed))
    assert optics(pts, min_pts, eps).partition() == dbscan(pts, eps, min_pts).partition()


def test_default_eps():
    assert default_eps([[0, 0], [0, 0], [0, 0]]) == 0.5
    # pairwise distances 1, 2, 3 -> median 2
    assert default_eps([0, 1, 3]) == 1.0


# --- sublogs -----------------------------------------------------------------

def test_split_two_clusters():
    log = log_of("a", "b", "c")
    subs = split_into_sublogs(log, ClusterLabels((0, 0, 1)))
    assert [s.sequences() for s in subs] == [[("a",), ("b",)], [("c",)]]


def test_split_all_noise():
    log = log_of("a", "b")
    subs = split_into_sublogs(log, [NOISE, NOISE])
    assert len(subs) == 1 and subs[0] == log


def test_split_single_cluster():
    log = log_of("a", "b")
    assert split_into_sublogs(log, [0, 0]) == [log]


def test_split_length_mismatch():
    with pytest.raises(LengthMismatchError):
        split_into_sublogs(log_of("a"), [0, 0])


@given(st.lists(st.integers(-1, 3), min_size=1, max_size=30))
def test_split_partitions(labels):
    # relabel so the labels used are 0..gamma-1
    used = sorted({x for x in labels if x >= 0})
    labels = [used.index(x) if x >= 0 else NOISE for x in labels]
    log = log_of(*[f"t{i}" for i in range(len(labels))])
    subs = split_into_sublogs(log, labels)
    ids = [t.case_id for s in subs for t in s]
    assert sorted(ids) == sorted(t.case_id for t in log)
    assert len(ids) == len(set(ids))
