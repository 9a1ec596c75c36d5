from __future__ import annotations

from ..event_log import EventLog
from ..petri_net import PetriNet
from .dfg import DirectlyFollowsGraph, build_dfg
from .heuristics import HeuristicsParams, discover_heuristics
from .inductive import discover_inductive, inductive_tree
from .process_tree import Operator, ProcessTree, flower, play_out, tree_to_petri_net

MINERS = ("im", "hm")


def discover(log: EventLog, miner: str = "im", heuristics: HeuristicsParams | None = None, model_id: str = "net") -> PetriNet:
    """Dispatch to the configured miner (``"im"`` or ``"hm"``)."""
    miner = miner.lower()
    if miner == "im":
        return discover_inductive(log, model_id=model_id)
    if miner == "hm":
        return discover_heuristics(log, heuristics or HeuristicsParams(), model_id=model_id)
    raise ValueError(f"unknown miner {miner!r}")


__all__ = [
    "MINERS",
    "DirectlyFollowsGraph",
    "HeuristicsParams",
    "Operator",
    "ProcessTree",
    "build_dfg",
    "discover",
    "discover_heuristics",
    "discover_inductive",
    "flower",
    "inductive_tree",
    "play_out",
    "tree_to_petri_net",
]
