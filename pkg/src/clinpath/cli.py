"""Command line: ``clinpath {discover,check,adapt,generate,evaluate}``.

Exit status 0 on success, 1 on usage errors, 2 on data errors. Errors go to
stderr prefixed with ``error:``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .adaptation import MANIFEST, AdaptationConfig, ClustererConfig, KnowledgeBase, adapt_iteration, train_phase
from .alignment import compute_diagnoses
from .costs import MoveCostSchedule
from .discovery import MINERS, HeuristicsParams
from .errors import DataError
from .event_log import CsvMapping, read_log, write_csv, write_xes
from .evaluation import MODES, GeneratorSpec, arc_degree_simplicity, generate_benchmark, run_experiment, write_reports
from .petri_net import to_dot, to_pnml

logger = logging.getLogger("clinpath")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


_DEFAULTS = AdaptationConfig()
_GEN = GeneratorSpec()
_HM = HeuristicsParams()


def _log_args(p):
    g = p.add_argument_group("event log")
    g.add_argument("--input", required=True, type=Path, help="event log (.csv or .xes)")
    g.add_argument("--case-col", default="case_id", help="CSV case id column (default: %(default)s)")
    g.add_argument("--activity-col", default="activity", help="CSV activity column (default: %(default)s)")
    g.add_argument("--timestamp-col", default="timestamp", help="CSV timestamp column (default: %(default)s)")
    g.add_argument("--timestamp-format", default=None, help="strptime format (default: ISO 8601)")
    g.add_argument("--delimiter", default=",", help="CSV delimiter (default: %(default)r)")


def _config_args(p, clustering=True):
    g = p.add_argument_group("adaptation")
    g.add_argument("--miner", choices=MINERS, default=_DEFAULTS.miner, help="discovery algorithm (default: %(default)s)")
    g.add_argument("--top-k", type=int, default=_DEFAULTS.top_k, help="variants kept by the frequency filter (default: %(default)s)")
    g.add_argument("--dependency-threshold", type=float, default=_HM.dependency_threshold, help="HM dependency threshold (default: %(default)s)")
    g.add_argument("--and-threshold", type=float, default=_HM.and_threshold, help="HM AND threshold (default: %(default)s)")
    g.add_argument("--min-edge-count", type=int, default=_HM.min_edge_count, help="HM minimum edge count (default: %(default)s)")
    g.add_argument("--log-move-cost", type=float, default=_DEFAULTS.cost.log_move, help="alignment log move cost (default: %(default)s)")
    g.add_argument("--model-move-cost", type=float, default=_DEFAULTS.cost.model_move_visible, help="alignment visible model move cost (default: %(default)s)")
    g.add_argument("--max-states", type=int, default=_DEFAULTS.max_states, help="alignment state budget (default: %(default)s)")
    if clustering:
        g.add_argument("--threshold", type=float, default=_DEFAULTS.fitness_threshold, help="fitness threshold for conformance (default: %(default)s)")
        g.add_argument("--clusterer", choices=("dbscan", "optics"), default=_DEFAULTS.clusterer.method, help="clustering algorithm (default: %(default)s)")
        g.add_argument("--eps", type=float, default=None, help="clustering radius (default: half the median pairwise distance)")
        g.add_argument("--min-pts", type=int, default=_DEFAULTS.clusterer.min_pts, help="clustering density (default: %(default)s)")
        g.add_argument("--min-sublog-size", type=int, default=_DEFAULTS.min_sublog_size, help="smallest sublog that yields a model (default: %(default)s)")


def _generator_args(p):
    g = p.add_argument_group("synthetic benchmark")
    g.add_argument("--n-diseases", type=int, default=_GEN.n_diseases, help="diseases, the last one positive (default: %(default)s)")
    g.add_argument("--activities", type=int, nargs=2, default=list(_GEN.activities_per_disease), metavar=("MIN", "MAX"), help="activities per disease (default: %(default)s)")
    g.add_argument("--depth", type=int, nargs=2, default=list(_GEN.tree_depth), metavar=("MIN", "MAX"), help="process tree depth (default: %(default)s)")
    g.add_argument("--operator-weights", type=float, nargs=4, default=list(_GEN.operator_weights), metavar=("SEQ", "XOR", "AND", "LOOP"), help="operator weights (default: %(default)s)")
    g.add_argument("--traces-per-disease", type=int, default=_GEN.traces_per_disease, help="traces per disease (default: %(default)s)")
    g.add_argument("--overlap", type=float, default=_GEN.label_overlap_fraction, help="fraction of labels shared with disease 0 (default: %(default)s)")
    g.add_argument("--max-redo", type=int, default=_GEN.max_redo, help="loop repetitions cap during play-out (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="logging level (default: %(default)s)")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default: %(default)s)")
    parser = _Parser(prog="clinpath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("discover", parents=[common], help="mine a model from a log (writes net.pnml, net.dot, manifest.json)")
    _log_args(p)
    _config_args(p, clustering=False)
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("check", parents=[common], help="diagnose a log against a knowledge base")
    _log_args(p)
    _config_args(p, clustering=False)
    p.add_argument("--kb", required=True, type=Path, help="knowledge base directory")
    p.add_argument("--out", type=Path, default=None, help="diagnoses CSV (default: stdout)")

    p = sub.add_parser("adapt", parents=[common], help="run one adaptation iteration")
    _log_args(p)
    _config_args(p)
    p.add_argument("--kb", required=True, type=Path, help="input knowledge base directory (left untouched)")
    p.add_argument("--out", required=True, type=Path, help="directory for the updated knowledge base")
    p.add_argument("--outcome", type=Path, default=None, help="outcome JSON (default: <out>/outcome.json)")
    p.add_argument("--iteration", type=int, default=1, help="iteration number recorded in provenance (default: %(default)s)")

    p = sub.add_parser("generate", parents=[common], help="write a synthetic multi-disease benchmark")
    _generator_args(p)
    p.add_argument("--format", choices=("csv", "xes"), default="csv", help="log file format (default: %(default)s)")
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("evaluate", parents=[common], help="run the iterative evaluation protocol")
    _generator_args(p)
    _config_args(p)
    p.add_argument("--mode", choices=(*MODES, "both"), default="both", help="adaptation mode (default: %(default)s)")
    p.add_argument("--repeats", type=int, default=3, help="repetitions with different splits (default: %(default)s)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    return parser


def _mapping(args) -> CsvMapping:
    return CsvMapping(args.case_col, args.activity_col, args.timestamp_col, args.timestamp_format, args.delimiter)


def _config(args) -> AdaptationConfig:
    clusterer = ClustererConfig(getattr(args, "clusterer", "dbscan"), getattr(args, "eps", None), getattr(args, "min_pts", 5))
    return AdaptationConfig(
        fitness_threshold=getattr(args, "threshold", _DEFAULTS.fitness_threshold),
        top_k=args.top_k,
        miner=args.miner,
        heuristics=HeuristicsParams(args.dependency_threshold, args.and_threshold, args.min_edge_count),
        clusterer=clusterer,
        min_sublog_size=getattr(args, "min_sublog_size", _DEFAULTS.min_sublog_size),
        cost=MoveCostSchedule(args.log_move_cost, args.model_move_cost),
        seed=args.seed,
        max_states=args.max_states,
    )


def _spec(args) -> GeneratorSpec:
    return GeneratorSpec(
        n_diseases=args.n_diseases,
        activities_per_disease=tuple(args.activities),
        tree_depth=tuple(args.depth),
        operator_weights=tuple(args.operator_weights),
        traces_per_disease=args.traces_per_disease,
        label_overlap_fraction=args.overlap,
        seed=args.seed,
        max_redo=args.max_redo,
    )


def _require_file(path: Path) -> None:
    if not path.is_file():
        raise UsageError(f"no such file: {path}")


def cmd_discover(args) -> None:
    _require_file(args.input)
    log = read_log(args.input, _mapping(args))
    kb = train_phase(log, _config(args))
    net = kb.models[0]
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "net.pnml").write_bytes(to_pnml(net))
    (args.out / "net.dot").write_bytes(to_dot(net))
    manifest = kb.manifest()
    manifest["models"][0]["file"] = "net.pnml"
    (args.out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{net.model_id}: {len(net.places)} places, {len(net.transitions)} transitions, simplicity {arc_degree_simplicity(net):.4f}")


def cmd_check(args) -> None:
    _require_file(args.input)
    if not args.kb.is_dir():
        raise UsageError(f"no such directory: {args.kb}")
    kb = KnowledgeBase.load(args.kb)
    config = _config(args)
    log = read_log(args.input, _mapping(args))
    matrix = compute_diagnoses(log, kb, config.cost, config.max_states)
    if args.out is None:
        matrix.write_csv(sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            matrix.write_csv(fh)


def cmd_adapt(args) -> None:
    _require_file(args.input)
    if not args.kb.is_dir():
        raise UsageError(f"no such directory: {args.kb}")
    if args.out.resolve() == args.kb.resolve():
        raise UsageError("--out must differ from --kb; the input knowledge base is never modified")
    kb = KnowledgeBase.load(args.kb)
    log = read_log(args.input, _mapping(args))
    outcome = adapt_iteration(kb, log, _config(args), iteration=args.iteration)
    kb.save(args.out)
    outcome_path = args.outcome or args.out / "outcome.json"
    outcome_path.write_text(json.dumps(outcome.to_dict(), indent=2) + "\n")
    print(
        f"conformant {len(outcome.conformant_traces)}, non-conformant {len(outcome.nonconformant_traces)}, "
        f"new models {len(outcome.new_models)}, knowledge base size {len(kb)}"
    )


def cmd_generate(args) -> None:
    spec = _spec(args)
    bench = generate_benchmark(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, log in enumerate(bench.logs):
        name = f"disease_{i:02d}.{args.format}"
        if args.format == "csv":
            with open(args.out / name, "w", newline="", encoding="utf-8") as fh:
                write_csv(log, fh)
        else:
            with open(args.out / name, "wb") as fh:
                write_xes(log, fh)
        files.append({"file": name, "role": "positive" if i == len(bench.logs) - 1 else "negative", "traces": len(log), "tree": str(bench.trees[i])})
    (args.out / "benchmark.json").write_text(json.dumps({"spec": spec.to_dict(), "logs": files}, indent=2) + "\n")


def cmd_evaluate(args) -> None:
    spec = _spec(args)
    config = _config(args)
    bench = generate_benchmark(spec)
    modes = MODES if args.mode == "both" else (args.mode,)
    reports, partial = [], False
    for mode in modes:
        result = run_experiment(spec, config, mode, args.repeats, benchmark=bench)
        reports.extend(result)
        partial = partial or result.partial
    write_reports(reports, args.out, spec, partial=partial)
    if not args.no_figures:
        from .evaluation.plots import render_figures

        render_figures(reports, args.out)
    for r in reports:
        print(f"{r.mode:8s} repeat {r.repeat} iteration {r.iteration}: auc {r.auc:.4f} simplicity {r.mean_simplicity:.4f} models {r.model_count}")
    if partial:
        raise DataError("experiment aborted; partial report written")


COMMANDS = {"discover": cmd_discover, "check": cmd_check, "adapt": cmd_adapt, "generate": cmd_generate, "evaluate": cmd_evaluate}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
