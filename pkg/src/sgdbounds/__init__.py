"""Dissipativity certificates, step-size schedules, and uniform-boundedness
checks for stochastic gradient methods.

Layout:

* :mod:`sgdbounds.problems`   — model problems with closed-form certificates,
* :mod:`sgdbounds.certify`    — certificate verification on shell samples,
* :mod:`sgdbounds.schedules`  — the seven step-size families and their audits,
* :mod:`sgdbounds.bounds`     — closed-form uniform-boundedness levels,
* :mod:`sgdbounds.optimize`   — SGD / momentum simulation and statistics,
* :mod:`sgdbounds.backend`    — numpy / numba kernel selection.
"""

from .backend import BACKEND_ENV, active_backend, have_numba
from .bounds import (
    BoundReport,
    appendixD_constant_bound,
    appendixD_constant_report,
    appendixD_decaying_bound,
    appendixD_decaying_report,
    momentum_cap_branches,
    momentum_caps,
    momentum_r2,
    theorem1_bound,
    theorem5_bound,
)
from .certify import (
    CertReport,
    DissipativityCert,
    GrowthCert,
    NoiseCert,
    ShellSamplingPlan,
    convert_generalized,
    convert_origin_form,
    default_plan,
    estimate_noise,
    noise_envelope_check,
    verify_dissipativity,
    verify_growth,
)
from .optimize import (
    CapViolation,
    EnsembleSummary,
    LyapunovTestResult,
    OptimizerConfig,
    Trajectory,
    audit_for_run,
    boundedness_proxy,
    lyapunov_W,
    lyapunov_decrease_test,
    momentum_step,
    run_ensemble,
    run_trajectory,
    sgd_step,
    trajectory_to_csv,
)
from .problems import Problem, build_suite, finite_diff_gradient
from .schedules import (
    ScheduleAudit,
    ScheduleSpec,
    audit_schedule,
    momentum_cap_value,
    step_array,
    step_at,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_ENV",
    "BoundReport",
    "CapViolation",
    "CertReport",
    "DissipativityCert",
    "EnsembleSummary",
    "GrowthCert",
    "LyapunovTestResult",
    "NoiseCert",
    "OptimizerConfig",
    "Problem",
    "ScheduleAudit",
    "ScheduleSpec",
    "ShellSamplingPlan",
    "Trajectory",
    "active_backend",
    "appendixD_constant_bound",
    "appendixD_constant_report",
    "appendixD_decaying_bound",
    "appendixD_decaying_report",
    "audit_for_run",
    "audit_schedule",
    "boundedness_proxy",
    "build_suite",
    "convert_generalized",
    "convert_origin_form",
    "default_plan",
    "estimate_noise",
    "finite_diff_gradient",
    "have_numba",
    "lyapunov_W",
    "lyapunov_decrease_test",
    "momentum_cap_branches",
    "momentum_cap_value",
    "momentum_caps",
    "momentum_r2",
    "momentum_step",
    "noise_envelope_check",
    "run_ensemble",
    "run_trajectory",
    "sgd_step",
    "step_array",
    "step_at",
    "theorem1_bound",
    "theorem5_bound",
    "trajectory_to_csv",
    "verify_dissipativity",
    "verify_growth",
    "__version__",
]
