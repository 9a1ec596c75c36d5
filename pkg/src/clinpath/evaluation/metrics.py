from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import rankdata

from ..errors import SingleClassError
from ..petri_net import PetriNet

POSITIVE = "POSITIVE"
NEGATIVE = "NEGATIVE"


@dataclass(frozen=True)
class LabeledScore:
    trace_ref: str
    anomaly_score: float  # 1 - best fitness over the knowledge base
    label: str

    def __post_init__(self):
        if not 0.0 <= self.anomaly_score <= 1.0:
            raise ValueError(f"anomaly score {self.anomaly_score} outside [0, 1]")
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"unknown label {self.label!r}")


def mean_arc_degree(net: PetriNet) -> float:
    return 2.0 * len(net.arcs) / (len(net.places) + len(net.transitions))


def simplicity_from_degree(mean_degree: float) -> float:
    return 1.0 / (1.0 + max(0.0, mean_degree - 2.0))


def arc_degree_simplicity(net: PetriNet) -> float:
    """1 when nodes average two arcs, decaying towards 0 as the average grows."""
    return simplicity_from_degree(mean_arc_degree(net))


def auc(scores: Iterable[LabeledScore]) -> float:
    """Mann-Whitney estimate: P(positive outranks negative), ties counted half.

    Computed from midranks, so it is O(n log n)."""
    scores = list(scores)
    pos = [s.anomaly_score for s in scores if s.label == POSITIVE]
    neg = [s.anomaly_score for s in scores if s.label == NEGATIVE]
    if not pos or not neg:
        raise SingleClassError("AUC needs at least one positive and one negative score")
    ranks = rankdata(np.array(pos + neg, dtype=float))
    n_pos, n_neg = len(pos), len(neg)
    u = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
