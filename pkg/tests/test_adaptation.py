import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clinpath.adaptation import (
    BASELINE_TRAINING,
    CLUSTER,
    RESIDUAL,
    AdaptationConfig,
    ClustererConfig,
    KnowledgeBase,
    Provenance,
    adapt_iteration,
    baseline_iteration,
    train_phase,
)
from clinpath.alignment import align
from clinpath.discovery import discover
from clinpath.errors import EmptyKnowledgeBaseError, EmptyLogError
from clinpath.event_log import EventLog, filter_top_k_variants
from clinpath.petri_net import min_model_cost

from helpers import log_of

TRAIN = log_of("abc", "acb", "abc", "abcd", "abc", "acb", "abcd", "abc", "abc", "acb")


def two_patterns():
    return log_of("axbc", repeat=5) + log_of("abyc", repeat=5)


def test_train_im():
    kb = train_phase(TRAIN)
    assert len(kb) == 1
    assert kb.provenance[0].source == BASELINE_TRAINING
    assert kb.provenance[0].trace_count == 10
    assert all(align(t, kb.models[0]).fitness == 1.0 for t in TRAIN)


def test_train_hm():
    kb = train_phase(TRAIN, AdaptationConfig(miner="hm"))
    assert len(kb) == 1
    assert min_model_cost(kb.models[0]) >= 0


def test_train_empty():
    with pytest.raises(EmptyLogError):
        train_phase(EventLog())


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptationConfig(fitness_threshold=1.5)
    with pytest.raises(ValueError):
        ClustererConfig(method="kmeans").fit([[0.0]])


def test_fully_fitting_batch():
    kb = train_phase(TRAIN)
    out = adapt_iteration(kb, log_of("abc", "acb", "abcd"), AdaptationConfig())
    assert out.new_models == [] and out.nonconformant_traces == []
    assert len(out.conformant_traces) == 3
    assert out.cluster_labels == []
    assert len(kb) == 1


def test_two_patterns_then_stable():
    kb = train_phase(TRAIN)
    batch = two_patterns()
    first = adapt_iteration(kb, batch, AdaptationConfig(), iteration=1)
    assert len(first.new_models) == 2
    assert sorted(set(first.cluster_labels)) == [0, 1]
    assert [p.source for p in kb.provenance] == [BASELINE_TRAINING, CLUSTER, CLUSTER]
    assert len(first.nonconformant_traces) == 10
    second = adapt_iteration(kb, batch, AdaptationConfig(), iteration=2)
    assert second.new_models == []
    assert len(second.conformant_traces) == len(batch)


def test_size_gate():
    kb = train_phase(TRAIN)
    out = adapt_iteration(kb, log_of("axbc", "axbc", "abc"), AdaptationConfig(min_sublog_size=3))
    assert out.new_models == []
    assert len(out.nonconformant_traces) == 2
    assert out.sublog_sizes == [2]
    assert len(kb) == 1


def test_noise_goes_to_residual_model():
    kb = train_phase(TRAIN)
    cfg = AdaptationConfig(clusterer=ClustererConfig(eps=0.1, min_pts=5))
    out = adapt_iteration(kb, log_of("axbc", "abyc", "abcz", "wabc"), cfg)
    assert out.cluster_labels == [-1] * 4
    assert [p.source for p in kb.provenance] == [BASELINE_TRAINING, RESIDUAL]
    assert out.new_models == ["m001"]


def test_optics_clusterer():
    kb = train_phase(TRAIN)
    out = adapt_iteration(kb, two_patterns(), AdaptationConfig(clusterer=ClustererConfig(method="optics")))
    assert len(out.new_models) == 2


def test_adapt_rejects_empty():
    with pytest.raises(EmptyKnowledgeBaseError):
        adapt_iteration(KnowledgeBase(), log_of("a"))
    with pytest.raises(EmptyLogError):
        adapt_iteration(train_phase(TRAIN), EventLog())


def test_batch_is_filtered():
    kb = train_phase(TRAIN)
    out = adapt_iteration(kb, log_of("abc", "abc", "acb"), AdaptationConfig(top_k=1))
    assert len(out.filtered_out_traces) == 1
    assert len(out.conformant_traces) == 2


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_gate_and_self_stabilization(seed):
    rng = random.Random(seed)
    alphabet = "abcdefxy"
    base = [tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 6))) for _ in range(6)]
    train = EventLog.from_sequences([rng.choice(base[:3]) for _ in range(20)])
    batch = EventLog.from_sequences([rng.choice(base) for _ in range(30)], prefix="b")
    kb = train_phase(train)
    cfg = AdaptationConfig()
    out = adapt_iteration(kb, batch, cfg)
    fit = dict(zip((r.trace_ref for r in out.diagnoses.rows), out.diagnoses.fitness))
    assert all(fit[c] >= cfg.fitness_threshold for c in out.conformant_traces)
    assert all(fit[c] < cfg.fitness_threshold for c in out.nonconformant_traces)
    if out.nonconformant_traces and all(s >= cfg.min_sublog_size for s in out.sublog_sizes):
        non = EventLog(tuple(t for t in batch if t.case_id in set(out.nonconformant_traces)))
        again = adapt_iteration(kb, non, cfg)
        assert again.new_models == []


def test_kb_only_grows():
    kb = train_phase(TRAIN)
    before = list(kb.models)
    adapt_iteration(kb, two_patterns())
    assert kb.models[: len(before)] == before


# --- baseline ----------------------------------------------------------------

def test_baseline_from_empty_cumulative():
    batch = log_of("abc", "acb")
    joined, net = baseline_iteration(EventLog(), batch)
    assert joined == batch
    assert net == discover(batch, model_id="baseline")


def test_baseline_deterministic():
    batch = log_of("abc", "axc")
    _, n1 = baseline_iteration(TRAIN, batch)
    _, n2 = baseline_iteration(TRAIN, batch)
    assert n1 == n2


def test_baseline_top_k():
    # 25 variants, each with its own activity; the first 20 occur twice
    seqs = [("s", f"u{i:02d}") for i in range(25)]
    log = EventLog.from_sequences([s for i, s in enumerate(seqs) for _ in range(1 + (i < 20))])
    joined, net = baseline_iteration(EventLog(), log)
    assert net == discover(filter_top_k_variants(joined, 20), model_id="baseline")
    assert net.visible_labels == {"s"} | {f"u{i:02d}" for i in range(20)}


# --- persistence -------------------------------------------------------------

def test_kb_save_load(tmp_path):
    kb = train_phase(TRAIN)
    adapt_iteration(kb, two_patterns())
    kb.save(tmp_path / "kb")
    manifest = json.loads((tmp_path / "kb" / "manifest.json").read_text())
    assert [e["model_id"] for e in manifest["models"]] == kb.model_ids
    loaded = KnowledgeBase.load(tmp_path / "kb")
    assert loaded.models == kb.models
    assert loaded.provenance == kb.provenance


def test_kb_load_empty(tmp_path):
    with pytest.raises(EmptyKnowledgeBaseError):
        KnowledgeBase.load(tmp_path)


def test_kb_ids_unique():
    kb = KnowledgeBase()
    net = discover(log_of("a"))
    ids = [kb.add(net, Provenance(0, BASELINE_TRAINING, 1)).model_id for _ in range(3)]
    assert ids == ["m000", "m001", "m002"]
