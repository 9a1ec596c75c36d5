"""Model knowledge base and the online adaptation loop, plus the
single-model cumulative baseline."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

from .alignment import DiagnosisMatrix, compute_diagnoses
from .clustering import ClusterLabels, dbscan, default_eps, optics, split_into_sublogs
from .costs import MoveCostSchedule
from .discovery import HeuristicsParams, discover
from .errors import EmptyKnowledgeBaseError, EmptyLogError
from .event_log import EventLog, filter_top_k_variants
from .petri_net import DEFAULT_STATE_BUDGET, PetriNet, parse_pnml, to_pnml

logger = logging.getLogger(__name__)

BASELINE_TRAINING = "BASELINE_TRAINING"
CLUSTER = "CLUSTER"
RESIDUAL = "RESIDUAL"
MANIFEST = "manifest.json"


@dataclass(frozen=True)
class Provenance:
    iteration_added: int
    source: str
    trace_count: int
    cluster_id: int | None = None


@dataclass
class KnowledgeBase:
    """Insertion-ordered models; entries are only ever appended."""

    models: list[PetriNet] = field(default_factory=list)
    provenance: list[Provenance] = field(default_factory=list)

    def add(self, net: PetriNet, provenance: Provenance) -> PetriNet:
        net = net.with_id(f"m{len(self.models):03d}")
        self.models.append(net)
        self.provenance.append(provenance)
        return net

    def __iter__(self) -> Iterator[PetriNet]:
        return iter(self.models)

    def __len__(self) -> int:
        return len(self.models)

    @property
    def model_ids(self) -> list[str]:
        return [m.model_id for m in self.models]

    def snapshot(self) -> "KnowledgeBase":
        return KnowledgeBase(list(self.models), list(self.provenance))

    def manifest(self) -> dict:
        return {
            "models": [
                {"model_id": m.model_id, "file": f"{m.model_id}.pnml", **asdict(p)}
                for m, p in zip(self.models, self.provenance)
            ]
        }

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for m in self.models:
            (directory / f"{m.model_id}.pnml").write_bytes(to_pnml(m))
        (directory / MANIFEST).write_text(json.dumps(self.manifest(), indent=2) + "\n")

    @classmethod
    def load(cls, directory: str | Path) -> "KnowledgeBase":
        directory = Path(directory)
        manifest = directory / MANIFEST
        if not manifest.is_file():
            raise EmptyKnowledgeBaseError()
        entries = json.loads(manifest.read_text())["models"]
        if not entries:
            raise EmptyKnowledgeBaseError()
        kb = cls()
        for e in entries:
            net = parse_pnml(directory / e["file"]).with_id(e["model_id"])
            kb.models.append(net)
            kb.provenance.append(
                Provenance(e.get("iteration_added", 0), e.get("source", BASELINE_TRAINING), e.get("trace_count", 0), e.get("cluster_id"))
            )
        return kb


@dataclass(frozen=True)
class ClustererConfig:
    method: str = "dbscan"  # or "optics"
    eps: float | None = None  # None: half the median pairwise distance
    min_pts: int = 5

    def fit(self, points) -> ClusterLabels:
        eps = self.eps if self.eps is not None else default_eps(points)
        if self.method == "dbscan":
            return dbscan(points, eps, self.min_pts)
        if self.method == "optics":
            return optics(points, self.min_pts, eps)
        raise ValueError(f"unknown clusterer {self.method!r}")


@dataclass(frozen=True)
class AdaptationConfig:
    fitness_threshold: float = 0.9
    top_k: int = 20
    miner: str = "im"
    heuristics: HeuristicsParams = HeuristicsParams()
    clusterer: ClustererConfig = ClustererConfig()
    min_sublog_size: int = 3
    cost: MoveCostSchedule = MoveCostSchedule()
    seed: int = 0
    max_states: int = DEFAULT_STATE_BUDGET

    def __post_init__(self):
        if not 0.0 <= self.fitness_threshold <= 1.0:
            raise ValueError("fitness_threshold must lie in [0, 1]")
        if self.top_k < 1 or self.min_sublog_size < 1:
            raise ValueError("top_k and min_sublog_size must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdaptationOutcome:
    iteration: int
    conformant_traces: list[str]
    nonconformant_traces: list[str]
    filtered_out_traces: list[str]
    new_models: list[str]
    diagnoses: DiagnosisMatrix
    cluster_labels: list[int]
    sublog_sizes: list[int]
    wall_time: float  # seconds

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "conformant_traces": self.conformant_traces,
            "nonconformant_traces": self.nonconformant_traces,
            "filtered_out_traces": self.filtered_out_traces,
            "new_models": self.new_models,
            "cluster_labels": self.cluster_labels,
            "sublog_sizes": self.sublog_sizes,
            "wall_time_ms": self.wall_time * 1000.0,
            "diagnoses": {
                "column_alphabet": list(self.diagnoses.column_alphabet),
                "rows": [
                    {"trace": r.trace_ref, "counts": r.vector(self.diagnoses.column_alphabet), "fitness": r.fitness, "model_ref": r.model_ref}
                    for r in self.diagnoses.rows
                ],
            },
        }


def train_phase(historical: EventLog, config: AdaptationConfig = AdaptationConfig()) -> KnowledgeBase:
    if not historical:
        raise EmptyLogError("no historical traces to train on")
    filtered = filter_top_k_variants(historical, config.top_k)
    kb = KnowledgeBase()
    kb.add(discover(filtered, config.miner, config.heuristics), Provenance(0, BASELINE_TRAINING, len(filtered)))
    return kb


def adapt_iteration(kb: KnowledgeBase, batch: EventLog, config: AdaptationConfig = AdaptationConfig(), iteration: int = 1) -> AdaptationOutcome:
    """Diagnose ``batch`` against ``kb``; cluster the non-conformant traces and
    append one model per sufficiently large sublog."""
    if not len(kb):
        raise EmptyKnowledgeBaseError()
    if not batch:
        raise EmptyLogError("empty batch")
    t0 = time.perf_counter()
    filtered = filter_top_k_variants(batch, config.top_k)
    kept = {id(t) for t in filtered}
    dropped = [t.case_id for t in batch if id(t) not in kept]
    diagnoses = compute_diagnoses(filtered, kb.snapshot(), config.cost, config.max_states)

    th = config.fitness_threshold
    conf_idx = [i for i, r in enumerate(diagnoses.rows) if r.fitness >= th]
    non_idx = [i for i, r in enumerate(diagnoses.rows) if r.fitness < th]
    new_models: list[str] = []
    labels: list[int] = []
    sizes: list[int] = []
    if non_idx:
        vectors = [diagnoses.rows[i].vector(diagnoses.column_alphabet) for i in non_idx]
        clusters = config.clusterer.fit(vectors)
        labels = list(clusters.labels)
        non_log = EventLog(tuple(filtered.traces[i] for i in non_idx))
        sublogs = split_into_sublogs(non_log, clusters)
        for cid, sub in enumerate(sublogs):
            sizes.append(len(sub))
            residual = cid >= clusters.gamma
            if len(sub) < config.min_sublog_size:
                logger.info("iteration %d: sublog %d has %d traces, below min_sublog_size", iteration, cid, len(sub))
                continue
            net = discover(sub, config.miner, config.heuristics)
            prov = Provenance(iteration, RESIDUAL if residual else CLUSTER, len(sub), None if residual else cid)
            new_models.append(kb.add(net, prov).model_id)
    wall = time.perf_counter() - t0
    return AdaptationOutcome(
        iteration,
        [filtered.traces[i].case_id for i in conf_idx],
        [filtered.traces[i].case_id for i in non_idx],
        dropped,
        new_models,
        diagnoses,
        labels,
        sizes,
        wall,
    )


def baseline_iteration(cumulative: EventLog, batch: EventLog, config: AdaptationConfig = AdaptationConfig()) -> tuple[EventLog, PetriNet]:
    """Join ``batch`` into the cumulative log and rediscover one model from it."""
    if not batch:
        raise EmptyLogError("empty batch")
    joined = cumulative + batch
    net = discover(filter_top_k_variants(joined, config.top_k), config.miner, config.heuristics, model_id="baseline")
    return joined, net
