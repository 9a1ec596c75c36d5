"""Density-based clustering of diagnosis vectors (DBSCAN, OPTICS) and the
split of a log into per-cluster sublogs.

Both clusterers use the same rule for border points reachable from several
clusters: the point joins the cluster whose lowest-index core point is
smallest. That is what index-ordered DBSCAN expansion produces, and applying
it to the OPTICS extraction makes the two agree exactly at equal radius.
Clusters are numbered by their lowest-index core point.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyPointSetError, LengthMismatchError
from .event_log import EventLog

NOISE = -1


@dataclass(frozen=True)
class ClusterLabels:
    labels: tuple[int, ...]

    @property
    def gamma(self) -> int:
        return len({lab for lab in self.labels if lab >= 0})

    def __len__(self) -> int:
        return len(self.labels)

    def partition(self) -> set[frozenset[int]]:
        """Clusters as sets of point indices (noise excluded)."""
        groups: dict[int, set[int]] = {}
        for i, lab in enumerate(self.labels):
            if lab >= 0:
                groups.setdefault(lab, set()).add(i)
        return {frozenset(g) for g in groups.values()}


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0 or len(arr) == 0:
        raise EmptyPointSetError("cannot cluster an empty point set")
    if arr.ndim == 1:
        arr = arr[:, None]
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def euclidean(arr: np.ndarray) -> np.ndarray:
    diff = arr[:, None, :] - arr[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


Metric = Callable[[np.ndarray], np.ndarray]


def default_eps(points, metric: Metric = euclidean) -> float:
    """Half the median pairwise distance, floored at 0.5 so that distinct
    integer count vectors are never neighbours by default."""
    arr = _as_points(points)
    if len(arr) < 2:
        return 0.5
    d = metric(arr)
    med = float(np.median(d[np.triu_indices(len(arr), k=1)]))
    return max(0.5 * med, 0.5)


def _finish(n: int, core: np.ndarray, core_label: dict[int, int], neigh: np.ndarray) -> ClusterLabels:
    """Renumber clusters by lowest core index and attach border points."""
    order = sorted(set(core_label.values()), key=lambda c: min(i for i, v in core_label.items() if v == c))
    rename = {old: new for new, old in enumerate(order)}
    labels = [NOISE] * n
    for i, c in core_label.items():
        labels[i] = rename[c]
    for i in range(n):
        if core[i]:
            continue
        cands = [labels[j] for j in np.flatnonzero(neigh[i] & core)]
        if cands:
            labels[i] = min(cands)
    return ClusterLabels(tuple(labels))


def dbscan(points, eps: float, min_pts: int = 5, metric: Metric = euclidean) -> ClusterLabels:
    """Core point: at least ``min_pts`` points (itself included) within ``eps``."""
    if eps <= 0 or min_pts < 1:
        raise ValueError("eps must be > 0 and min_pts >= 1")
    arr = _as_points(points)
    n = len(arr)
    neigh = metric(arr) <= eps
    core = neigh.sum(axis=1) >= min_pts
    core_label: dict[int, int] = {}
    cluster = 0
    for i in range(n):
        if not core[i] or i in core_label:
            continue
        core_label[i] = cluster
        stack = [i]
        while stack:
            p = stack.pop()
            for q in np.flatnonzero(neigh[p] & core):
                if q not in core_label:
                    core_label[int(q)] = cluster
                    stack.append(int(q))
        cluster += 1
    return _finish(n, core, core_label, neigh)


@dataclass(frozen=True)
class OpticsResult:
    ordering: tuple[int, ...]
    reachability: tuple[float, ...]  # indexed by point, inf when undefined
    core_distance: tuple[float, ...]


def optics_ordering(points, min_pts: int = 5, metric: Metric = euclidean) -> OpticsResult:
    """Cluster ordering with unbounded generating radius."""
    arr = _as_points(points)
    n = len(arr)
    d = metric(arr)
    k = min(min_pts, n)
    # distance to the min_pts-th nearest point, itself counted
    core_dist = np.sort(d, axis=1)[:, k - 1] if min_pts <= n else np.full(n, np.inf)
    reach = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    ordering = []
    for start in range(n):
        if done[start]:
            continue
        seeds = [(np.inf, start)]
        while seeds:
            r, p = heapq.heappop(seeds)
            if done[p] or r > reach[p] and np.isfinite(reach[p]):
                continue
            done[p] = True
            ordering.append(p)
            if not np.isfinite(core_dist[p]):
                continue
            new_r = np.maximum(core_dist[p], d[p])
            for q in np.flatnonzero(~done & (new_r < reach)):
                reach[q] = new_r[q]
                heapq.heappush(seeds, (float(new_r[q]), int(q)))
    return OpticsResult(tuple(ordering), tuple(float(x) for x in reach), tuple(float(x) for x in core_dist))


def optics(points, min_pts: int = 5, eps_extract: float | None = None, metric: Metric = euclidean) -> ClusterLabels:
    """OPTICS ordering, then DBSCAN-equivalent extraction at ``eps_extract``:
    scanning the ordering, a point whose reachability exceeds the radius opens
    a new cluster if it is core at that radius, otherwise it is noise."""
    arr = _as_points(points)
    if eps_extract is None:
        eps_extract = default_eps(arr, metric)
    if eps_extract <= 0 or min_pts < 1:
        raise ValueError("eps_extract must be > 0 and min_pts >= 1")
    res = optics_ordering(arr, min_pts, metric)
    n = len(arr)
    core = np.array([c <= eps_extract for c in res.core_distance])
    core_label: dict[int, int] = {}
    current = -1
    # non-core points are attached afterwards by the shared border rule
    for p in res.ordering:
        if res.reachability[p] > eps_extract:
            if core[p]:
                current += 1
                core_label[p] = current
        elif core[p]:
            core_label[p] = current
    neigh = metric(arr) <= eps_extract
    return _finish(n, core, core_label, neigh)


def split_into_sublogs(log: EventLog, labels: ClusterLabels | Sequence[int]) -> list[EventLog]:
    """One sublog per cluster 0..gamma-1, then a residual sublog of noise traces if any."""
    labs = labels.labels if isinstance(labels, ClusterLabels) else tuple(labels)
    if len(labs) != len(log):
        raise LengthMismatchError(f"{len(labs)} labels for {len(log)} traces")
    gamma = len({lab for lab in labs if lab >= 0})
    buckets: list[list] = [[] for _ in range(gamma)]
    noise = []
    for trace, lab in zip(log, labs):
        if lab >= 0:
            buckets[lab].append(trace)
        else:
            noise.append(trace)
    out = [EventLog(tuple(b)) for b in buckets]
    if noise:
        out.append(EventLog(tuple(noise)))
    return out
