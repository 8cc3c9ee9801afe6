"""Monte-Carlo experiment harness and CLI."""

from .config import ExperimentConfig, load_config, parse_config_text
from .experiment import RiskReport, RiskRow, compare_supervised, run_experiment, summarize
from .report import emit, read_risk_csv

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "RiskReport",
    "RiskRow",
    "run_experiment",
    "compare_supervised",
    "summarize",
    "emit",
    "read_risk_csv",
]
