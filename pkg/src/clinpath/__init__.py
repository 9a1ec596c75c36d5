"""Adaptive discovery of clinical-pathway process models.

Phase 1 mines a reference Petri net from historical traces; phase 2 aligns
online batches against the model knowledge base, clusters the per-activity
diagnoses of non-conformant traces and mines one new model per cluster.
"""
from .adaptation import AdaptationConfig, AdaptationOutcome, ClustererConfig, KnowledgeBase, adapt_iteration, baseline_iteration, train_phase
from .alignment import Alignment, DiagnosisMatrix, DiagnosisRow, align, compute_diagnoses, diagnosis_row
from .clustering import ClusterLabels, dbscan, optics, split_into_sublogs
from .costs import MoveCostSchedule
from .event_log import CsvMapping, EventLog, Trace, extract_variants, filter_top_k_variants, parse_csv, parse_xes, split_log
from .petri_net import Marking, PetriNet, Transition, enabled_transitions, fire, min_model_cost, parse_pnml, serialize

__version__ = "0.1.0"
