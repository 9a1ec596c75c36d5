from .experiment import ADAPTIVE, BASELINE, MODES, IterationReport, Reports, run_experiment, write_reports
from .generator import Benchmark, GeneratorSpec, generate_benchmark, random_tree
from .metrics import NEGATIVE, POSITIVE, LabeledScore, arc_degree_simplicity, auc, mean_arc_degree, simplicity_from_degree

__all__ = [
    "ADAPTIVE",
    "BASELINE",
    "MODES",
    "NEGATIVE",
    "POSITIVE",
    "Benchmark",
    "GeneratorSpec",
    "IterationReport",
    "LabeledScore",
    "Reports",
    "arc_degree_simplicity",
    "auc",
    "generate_benchmark",
    "mean_arc_degree",
    "random_tree",
    "run_experiment",
    "simplicity_from_degree",
    "write_reports",
]
