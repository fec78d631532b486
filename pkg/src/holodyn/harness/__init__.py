"""Configuration, orchestration, seeding and persistence of experiments."""

from .config import ExperimentConfig, from_dict, load, loads
from .runner import ResultRecord, derive_seed, emit_report, run_experiment, sweep

__all__ = [
    "ExperimentConfig",
    "ResultRecord",
    "derive_seed",
    "emit_report",
    "from_dict",
    "load",
    "loads",
    "run_experiment",
    "sweep",
]
