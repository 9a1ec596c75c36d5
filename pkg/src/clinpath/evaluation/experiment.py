"""Iterative evaluation protocol: train on the first disease, feed each
further negative disease as one online batch, test on held-out negatives
plus the whole positive log."""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import fmean

from ..adaptation import AdaptationConfig, adapt_iteration, baseline_iteration, train_phase
from ..alignment import compute_diagnoses
from ..errors import DataError, InvalidSpecError
from ..event_log import EventLog, filter_top_k_variants, split_log
from ..petri_net import PetriNet
from .generator import Benchmark, GeneratorSpec, generate_benchmark
from .metrics import NEGATIVE, POSITIVE, LabeledScore, arc_degree_simplicity, auc

logger = logging.getLogger(__name__)

ADAPTIVE = "adaptive"
BASELINE = "baseline"
MODES = (ADAPTIVE, BASELINE)

REPORT_COLUMNS = ["repeat", "iteration", "mode", "miner", "clusterer", "auc", "mean_simplicity", "model_count", "mean_fitness_neg"]
TIMING_COLUMNS = ["repeat", "iteration", "mode", "miner", "clusterer", "wall_time_ms"]


@dataclass
class IterationReport:
    repeat: int
    iteration: int
    mode: str
    miner: str
    clusterer: str
    auc: float
    mean_simplicity: float
    model_count: int
    mean_fitness_neg: float
    wall_time: float  # seconds spent processing the online batch
    per_model_simplicity: list[float] = field(default_factory=list)
    provenance: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def row(self) -> list:
        return [self.repeat, self.iteration, self.mode, self.miner, self.clusterer, repr(self.auc), repr(self.mean_simplicity), self.model_count, repr(self.mean_fitness_neg)]


class Reports(list):
    """``IterationReport`` list; ``partial`` is set when a run was aborted."""

    partial: bool = False
    error: str | None = None


def _score(models: list[PetriNet], negatives: EventLog, positives: EventLog, config: AdaptationConfig) -> tuple[float, float]:
    test = negatives + positives
    diag = compute_diagnoses(test, models, config.cost, config.max_states)
    n_neg = len(negatives)
    scores = [
        LabeledScore(r.trace_ref, min(1.0, max(0.0, 1.0 - r.fitness)), NEGATIVE if i < n_neg else POSITIVE)
        for i, r in enumerate(diag.rows)
    ]
    return auc(scores), fmean(r.fitness for r in diag.rows[:n_neg])


def run_experiment(
    spec: GeneratorSpec,
    config: AdaptationConfig,
    mode: str = ADAPTIVE,
    repeats: int = 1,
    benchmark: Benchmark | None = None,
) -> Reports:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    bench = benchmark or generate_benchmark(spec)
    negatives, positive = bench.negatives, bench.positive
    if len(negatives) < 2:
        raise InvalidSpecError("the protocol needs at least two negative diseases")
    clusterer = config.clusterer.method if mode == ADAPTIVE else "none"
    reports = Reports()
    for rep in range(repeats):
        split_seed = config.seed * 1_000_003 + rep
        splits = [split_log(lg, 0.75, seed=split_seed * 101 + i) for i, lg in enumerate(negatives)]
        try:
            kb = train_phase(splits[0][0], config)
            cumulative = splits[0][0]
            held_out = splits[0][1]
            for it in range(1, len(negatives)):
                batch, test = splits[it]
                held_out = held_out + test
                t0 = time.perf_counter()
                if mode == ADAPTIVE:
                    adapt_iteration(kb, batch, config, iteration=it)
                    models = list(kb)
                    provenance = [asdict(p) | {"model_id": m.model_id} for m, p in zip(kb.models, kb.provenance)]
                else:
                    cumulative, net = baseline_iteration(cumulative, batch, config)
                    models = [net]
                    provenance = [{"model_id": net.model_id, "iteration_added": it, "source": "BASELINE_CUMULATIVE", "trace_count": len(filter_top_k_variants(cumulative, config.top_k))}]
                wall = time.perf_counter() - t0
                auc_value, fit_neg = _score(models, held_out, positive, config)
                simp = [arc_degree_simplicity(m) for m in models]
                reports.append(
                    IterationReport(
                        rep, it, mode, config.miner, clusterer, auc_value, fmean(simp), len(models), fit_neg, wall,
                        simp, provenance, config.to_dict(),
                    )
                )
                logger.info("repeat %d iteration %d %s: auc=%.4f models=%d", rep, it, mode, auc_value, len(models))
        except DataError as exc:
            logger.error("repeat %d aborted: %s", rep, exc)
            reports.partial = True
            reports.error = str(exc)
            break
    return reports


def write_reports(reports: list[IterationReport], out_dir: str | Path, spec: GeneratorSpec | None = None, partial: bool = False) -> dict[str, Path]:
    """``report.csv`` holds only seed-determined metrics; measured wall times
    go to ``timing.csv`` and the JSON report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.csv", "timing": out / "timing.csv", "json": out / "report.json"}
    with open(paths["report"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(r.row())
    with open(paths["timing"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for r in reports:
            w.writerow([r.repeat, r.iteration, r.mode, r.miner, r.clusterer, f"{r.wall_time * 1000.0:.3f}"])
    payload = {
        "partial": partial,
        "generator": spec.to_dict() if spec else None,
        "reports": [
            {k: v for k, v in asdict(r).items() if k != "wall_time"} | {"wall_time_ms": r.wall_time * 1000.0}
            for r in reports
        ],
    }
    paths["json"].write_text(json.dumps(payload, indent=2) + "\n")
    return paths
