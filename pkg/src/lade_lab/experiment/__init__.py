"""Experiment orchestration: config files, artifacts, stages and the manager."""

from lade_lab.experiment.config import config_hash, dump_config, load_config, sub_seed
from lade_lab.experiment.manager import ExperimentManager, inference_probs, method_name, select_by_validation
from lade_lab.experiment.stages import ExperimentLayout, StageTracker
from lade_lab.experiment.storage import ResultStore

__all__ = [
    "ExperimentLayout",
    "ExperimentManager",
    "ResultStore",
    "StageTracker",
    "config_hash",
    "dump_config",
    "inference_probs",
    "load_config",
    "method_name",
    "select_by_validation",
    "sub_seed",
]
