"""Config-driven experiment harness: CLI, persistence, and plots."""

from .config import CHECK_NAMES, ConfigError, ExperimentConfig
from .runner import (
    bound_payload,
    build_optimizer,
    build_problem,
    build_schedule,
    cmd_bound,
    cmd_certify,
    cmd_run,
    cmd_sweep,
    resolve_noise,
)

__all__ = [
    "CHECK_NAMES",
    "ConfigError",
    "ExperimentConfig",
    "bound_payload",
    "build_optimizer",
    "build_problem",
    "build_schedule",
    "cmd_bound",
    "cmd_certify",
    "cmd_run",
    "cmd_sweep",
    "resolve_noise",
]
