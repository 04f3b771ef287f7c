"""Trajectory simulation: SGD and momentum-SGD under any schedule.

Records, per iterate k in [1, T+1]:

* ``dist2[k]``   squared distance to the optimum (mirror-aware),
* ``fgap[k]``    objective gap f(x_k) - f*,
* ``stepsize[k]`` the schedule value (NaN at k = T+1; no step is taken there),
* ``dxn2[k]``    squared displacement ||x_k - x_{k-1}||^2,
* ``xt2[k]``     squared distance of the momentum-corrected point
                 (x_k - beta x_{k-1})/(1 - beta) to the optimum,
* ``W[k]``       the Lyapunov value (momentum runs, k >= 2).

Conventions: iterates are 1-indexed with x_0 = x_1 and v_1 = 0; plain SGD is
the momentum recursion with beta = 0 bit-for-bit.  Each trajectory draws its
randomness from a stream derived from (master seed, seed index), generated
up-front so every backend consumes identical bits.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import DIVERGENCE_GUARD, KERNEL_KINDS, ORACLE_CODES, simulate_numpy
from ._seeds import child_stream
from .backend import active_backend
from .problems import Problem
from .schedules import ConditionRow, ScheduleAudit, ScheduleSpec, audit_schedule, step_array, step_at
from . import bounds as _bounds

__all__ = [
    "METHODS",
    "ORACLES",
    "CapViolation",
    "OptimizerConfig",
    "Trajectory",
    "EnsembleSummary",
    "LyapunovTestResult",
    "sgd_step",
    "momentum_step",
    "audit_for_run",
    "run_trajectory",
    "run_ensemble",
    "lyapunov_W",
    "lyapunov_decrease_test",
    "boundedness_proxy",
    "trajectory_to_csv",
]

METHODS = ("SGD", "Momentum")
ORACLES = ("minibatch", "additive", "full")

F_TOL = 1e-9  # tolerance on fgap >= 0 for a numerically resolved optimum


class CapViolation(RuntimeError):
    """Raised when a run would start with steps above the audited cap."""


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OptimizerConfig:
    """Method, oracle, and run-shape parameters for one experiment.

    ``oracle`` selects the gradient estimate: ``minibatch`` (uniform rows
    with replacement, ``batch_size`` per step), ``additive`` (full gradient
    plus isotropic Gaussian noise of total variance ``sigma2``), or ``full``
    (deterministic).  ``noise_rho`` is the multiplicative noise coefficient
    assumed by the step-cap audit.  ``override_cap`` lets a run proceed when
    the audit fails; the override is recorded on the trajectory.
    """

    method: str
    batch_size: int
    horizon: int
    seed: int
    x1: np.ndarray
    beta: float | None = None
    oracle: str = "minibatch"
    sigma2: float = 0.0
    noise_rho: float = 0.0
    override_cap: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "Momentum":
            if self.beta is None or not (0.0 < self.beta < 1.0):
                raise ValueError("Momentum needs beta in (0, 1)")
        elif self.beta is not None:
            raise ValueError("beta applies to the Momentum method only")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        x1 = np.array(self.x1, dtype=np.float64, copy=True).reshape(-1)
        if x1.size == 0 or not np.all(np.isfinite(x1)):
            raise ValueError("x1 must be a non-empty finite vector")
        object.__setattr__(self, "x1", x1)
        if self.oracle not in ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}")
        if not (self.sigma2 >= 0.0):
            raise ValueError("sigma2 must be non-negative")
        if self.oracle != "additive" and self.sigma2 != 0.0:
            raise ValueError("sigma2 is the additive-oracle variance")
        if not (self.noise_rho >= 0.0):
            raise ValueError("noise_rho must be non-negative")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One simulated run; arrays have length T+2, index 0 unused (NaN).

    Valid entries span k in [1, T+1] (or up to ``diverged_at`` for diverged
    runs; later entries are NaN).  ``sup_dist2`` is the running maximum of
    ``dist2``.  ``W`` is None for SGD runs.
    """

    method: str
    beta: float | None
    horizon: int
    seed: int
    seed_index: int
    backend: str
    generalized: bool
    dist2: np.ndarray
    fgap: np.ndarray
    stepsize: np.ndarray
    dxn2: np.ndarray
    xt2: np.ndarray
    W: np.ndarray | None
    sup_dist2: np.ndarray
    x_final: np.ndarray
    diverged: bool
    diverged_at: int | None
    audit: ScheduleAudit
    cap_overridden: bool


@dataclass(frozen=True, eq=False)
class EnsembleSummary:
    """Seed-averaged statistics with normal-approximation 95% CIs.

    ``sup_mean_dist2`` is the supremum over k of the seed-mean squared
    distance (the Monte-Carlo analogue of the bounded-expectation claims);
    ``mean_sup_dist2`` is the seed-mean of the pathwise suprema (a strictly
    larger diagnostic).  Arrays have length T+2 with index 0 NaN.
    """

    method: str
    backend: str
    horizon: int
    seeds: tuple[int, ...]
    mean_dist2: np.ndarray
    ci95_dist2: np.ndarray
    mean_fgap: np.ndarray
    ci95_fgap: np.ndarray
    mean_W: np.ndarray | None
    ci95_W: np.ndarray | None
    sup_mean_dist2: float
    mean_sup_dist2: float
    per_seed_sup_dist2: tuple[float, ...]
    diverged: bool
    diverged_seeds: tuple[int, ...]
    trajectories: tuple[Trajectory, ...] | None

    @property
    def n_seeds(self) -> int:
        return len(self.seeds)

    def to_dict(self) -> dict:
        def ser(arr: np.ndarray | None):
            if arr is None:
                return None
            return [
                float(v) if math.isfinite(v) else None for v in arr[1:].tolist()
            ]

        return {
            "method": self.method,
            "backend": self.backend,
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "n_seeds": self.n_seeds,
            "k": list(range(1, self.horizon + 2)),
            "mean_dist2": ser(self.mean_dist2),
            "ci95_dist2": ser(self.ci95_dist2),
            "mean_fgap": ser(self.mean_fgap),
            "ci95_fgap": ser(self.ci95_fgap),
            "mean_W": ser(self.mean_W),
            "ci95_W": ser(self.ci95_W),
            "sup_mean_dist2": self.sup_mean_dist2,
            "mean_sup_dist2": self.mean_sup_dist2,
            "per_seed_sup_dist2": list(self.per_seed_sup_dist2),
            "diverged": self.diverged,
            "diverged_seeds": list(self.diverged_seeds),
        }


# ---------------------------------------------------------------------------
# single-step operations
# ---------------------------------------------------------------------------


def sgd_step(x: np.ndarray, eta: float, g: np.ndarray) -> np.ndarray:
    """One plain step x' = x - eta * g."""
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite gradient: trajectory aborted")
    return x - eta * g


def momentum_step(
    x: np.ndarray, v: np.ndarray, eta: float, beta: float, g: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One momentum step: v' = beta v + (1-beta) g; x' = x - eta v'."""
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite gradient: trajectory aborted")
    v_new = beta * v + (1.0 - beta) * g
    return x - eta * v_new, v_new


# ---------------------------------------------------------------------------
# audit gate
# ---------------------------------------------------------------------------

_GENERALIZED_REGIMES = {
    "Constant": "generalized_const",
    "Polynomial": "generalized_decaying_poly",
    "Exponential": "generalized_decaying_exp",
}


def audit_for_run(
    problem: Problem, spec: ScheduleSpec, config: OptimizerConfig
) -> ScheduleAudit:
    """Step-cap audit matching the problem's certificate regime.

    Quadratic-tail certificates (p = 2) use the schedule audit (plain or
    momentum cap plus the per-family side conditions).  Sub-quadratic
    certificates: SGD needs only bounded steps (cap = inf); momentum has a
    printed cap for Constant / Polynomial / Exponential schedules only —
    other families carry a failing condition row, so they require an
    explicit override to run.
    """
    cert = problem.cert
    beta = config.beta if config.method == "Momentum" else None
    if cert.p == 2.0:
        return audit_schedule(spec, cert.theta1, config.noise_rho, problem.L, beta)
    max_step = step_at(spec, 1)
    if beta is None:
        return ScheduleAudit(
            family=spec.family,
            cap_value=math.inf,
            max_step=max_step,
            cap_satisfied=True,
            theorem_conditions=(),
            beta=None,
        )
    regime = _GENERALIZED_REGIMES.get(spec.family)
    if regime is None:
        row = ConditionRow(
            "generalized_momentum_cap_available", required=1.0, actual=0.0, satisfied=False
        )
        return ScheduleAudit(
            family=spec.family,
            cap_value=math.inf,
            max_step=max_step,
            cap_satisfied=True,
            theorem_conditions=(row,),
            beta=beta,
        )
    cap = _bounds.momentum_caps(cert.theta1, config.noise_rho, problem.L, beta, regime)
    return ScheduleAudit(
        family=spec.family,
        cap_value=cap,
        max_step=max_step,
        cap_satisfied=max_step <= cap,
        theorem_conditions=(),
        beta=beta,
    )


def _gate(problem: Problem, spec: ScheduleSpec, config: OptimizerConfig):
    audit = audit_for_run(problem, spec, config)
    overridden = not audit.passed_for(config.method)
    if overridden and not config.override_cap:
        raise CapViolation(
            f"{spec.family} schedule fails the {config.method} audit "
            f"(cap {audit.cap_value:g}, max step {audit.max_step:g}, "
            f"side conditions ok: {audit.conditions_satisfied}); "
            "set override_cap=True to run it anyway"
        )
    return audit, overridden


# ---------------------------------------------------------------------------
# simulation dispatch
# ---------------------------------------------------------------------------


def _draws_for_seed(problem: Problem, config: OptimizerConfig, seed_index: int):
    """Pre-generate the run's random inputs from its derived child stream."""
    T = config.horizon
    rng = child_stream(config.seed, seed_index)
    idx = None
    noise = None
    if config.oracle == "minibatch":
        idx = rng.integers(
            0, problem.n_samples, size=(T + 1, config.batch_size), dtype=np.int64
        )
    elif config.oracle == "additive":
        scale = math.sqrt(config.sigma2 / problem.dim)
        noise = rng.standard_normal((T + 1, problem.dim)) * scale
    return idx, noise


def _simulate_generic(problem, etas_full, beta, x1, idx, noise, oracle, guard):
    """Reference per-seed loop using the problem's own oracle methods."""
    d = x1.shape[0]
    T = etas_full.shape[0] - 2
    dist2 = np.full(T + 2, np.nan)
    fgap = np.full(T + 2, np.nan)
    dxn2 = np.full(T + 2, np.nan)
    xt2 = np.full(T + 2, np.nan)
    xs = problem.x_star
    x = x1.copy()
    xprev = x1.copy()
    v = np.zeros(d)
    diverged_at = -1
    with np.errstate(all="ignore"):
        for k in range(1, T + 2):
            D = x - xs
            d2 = float(np.einsum("i,i->", D, D))
            sign = 1.0
            if problem.mirror_center:
                Dm = x + xs
                d2m = float(np.einsum("i,i->", Dm, Dm))
                if d2m < d2:
                    d2 = d2m
                    sign = -1.0
            f = problem.full_objective(x) - problem.f_star
            if beta > 0.0:
                xt = (x - beta * xprev) / (1.0 - beta)
            else:
                xt = x
            Dt = xt - sign * xs
            x2 = float(np.einsum("i,i->", Dt, Dt))
            Dx = x - xprev
            dx2 = float(np.einsum("i,i->", Dx, Dx))
            dist2[k] = d2
            fgap[k] = f
            xt2[k] = x2
            dxn2[k] = dx2
            if not (math.isfinite(d2) and d2 <= guard):
                diverged_at = k
                break
            if k == T + 1:
                break
            if oracle == "minibatch":
                g = problem.minibatch_gradient(x, idx[k])
            else:
                g = problem.full_gradient(x)
                if oracle == "additive":
                    g = g + noise[k]
            v = beta * v + (1.0 - beta) * g
            xprev = x
            x = x - etas_full[k] * v
    return dist2, fgap, dxn2, xt2, diverged_at, x


def _simulate_many(problem, spec, config, indices):
    """Run one trajectory per seed index; returns (results, backend_name).

    Each result is (dist2, fgap, dxn2, xt2, diverged_at, x_final).
    """
    etas_full = np.append(step_array(spec), np.nan)
    beta = config.beta if config.method == "Momentum" else 0.0
    draws = [_draws_for_seed(problem, config, i) for i in indices]
    guard = DIVERGENCE_GUARD

    if problem.kind_id not in KERNEL_KINDS:
        results = [
            _simulate_generic(
                problem, etas_full, beta, config.x1, idx, noise, config.oracle, guard
            )
            for idx, noise in draws
        ]
        return results, "generic"

    backend = active_backend()
    if backend == "numpy":
        S = len(indices)
        X0 = np.tile(config.x1, (S, 1))
        idx = noise = None
        if config.oracle == "minibatch":
            idx = np.stack([dr[0] for dr in draws])
        elif config.oracle == "additive":
            noise = np.stack([dr[1] for dr in draws])
        dist2, fgap, dxn2, xt2, div_at, X = simulate_numpy(
            problem, etas_full, beta, X0, idx, noise, config.oracle, guard
        )
        results = [
            (dist2[s], fgap[s], dxn2[s], xt2[s], int(div_at[s]), X[s])
            for s in range(S)
        ]
        return results, "numpy"

    from . import _kernels_numba as NK

    A = np.ascontiguousarray(problem.A, dtype=np.float64)
    b = np.ascontiguousarray(problem.b, dtype=np.float64)
    xs = np.ascontiguousarray(problem.x_star, dtype=np.float64)
    lam = float(problem.params.get("lam", 0.0))
    nu = float(problem.params.get("nu", 0.0))
    oracle_code = ORACLE_CODES[config.oracle]
    dummy_idx = np.zeros((1, 1), dtype=np.int64)
    dummy_noise = np.zeros((1, 1), dtype=np.float64)

    def one(dr):
        idx, noise = dr
        return NK.simulate_seed(
            problem.kind_id,
            A,
            b,
            lam,
            nu,
            float(problem.grad_scale),
            xs,
            float(problem.f_star),
            bool(problem.mirror_center),
            config.x1,
            etas_full,
            float(beta),
            idx if idx is not None else dummy_idx,
            noise if noise is not None else dummy_noise,
            oracle_code,
            guard,
        )

    if len(draws) == 1:
        results = [one(draws[0])]
    else:
        # Warm the compile cache on the main thread, then fan out (nogil).
        first = one(draws[0])
        workers = min(len(draws) - 1, os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rest = list(ex.map(one, draws[1:]))
        results = [first] + rest
    results = [
        (d2, f, dx, xt, int(div), xfin) for d2, f, dx, xt, div, xfin in results
    ]
    return results, "numba"


# ---------------------------------------------------------------------------
# Lyapunov assembly
# ---------------------------------------------------------------------------


def _lyapunov_coeffs(spec: ScheduleSpec, beta: float, generalized: bool):
    """Coefficients (c, u) of the momentum Lyapunov value.

    W[j] = xt2[j] + c[j] * dist2[j] + dxn2[j] + u[j-1] * fgap[j-1], j >= 2,
    with gamma = beta((1-beta) + (1-beta)^-1) and tau_k the consecutive-step
    ratio (tau_1 := 1; ratios above 1, which occur at stage restarts, are
    treated as 1 — the per-stage constant-schedule form):

        u[k] = 2 gamma tau_k eta_k          (quadratic-tail certificates)
        c[j] = 0

    and for sub-quadratic (generalized) certificates with decaying steps:

        c[k+1] = (1 - tau_k)/(tau_k (1 - beta))
        u[k]   = 2 gamma tau_k eta_k + 2 beta (1-beta) tau_k eta_k c[k+1].
    """
    T = spec.horizon
    etas = step_array(spec)
    gamma = beta * ((1.0 - beta) + 1.0 / (1.0 - beta))
    c = np.zeros(T + 2)
    u = np.full(T + 1, np.nan)
    for k in range(1, T + 1):
        tau = 1.0 if k < 2 else min(etas[k] / etas[k - 1], 1.0)
        cj = 0.0
        if generalized and tau < 1.0:
            cj = (1.0 - tau) / (tau * (1.0 - beta))
        uk = 2.0 * gamma * tau * etas[k]
        if generalized:
            uk = uk + 2.0 * beta * (1.0 - beta) * tau * etas[k] * cj
        u[k] = uk
        c[k + 1] = cj
    return c, u


def _assemble_W(spec, beta, generalized, dist2, fgap, dxn2, xt2):
    c, u = _lyapunov_coeffs(spec, beta, generalized)
    T = spec.horizon
    W = np.full(T + 2, np.nan)
    ks = slice(2, T + 2)
    W[ks] = xt2[ks] + c[ks] * dist2[ks] + dxn2[ks] + u[1 : T + 1] * fgap[1 : T + 1]
    return W


def lyapunov_W(traj: Trajectory, k: int, beta: float, spec: ScheduleSpec) -> float:
    """Recompute the Lyapunov value at iterate k from the recorded series.

    Defined for momentum trajectories and k >= 2; equals ``traj.W[k]``.
    """
    if traj.method != "Momentum":
        raise ValueError("the Lyapunov value is defined for momentum runs only")
    if not (2 <= k <= traj.horizon + 1):
        raise ValueError(f"k must lie in [2, {traj.horizon + 1}]")
    c, u = _lyapunov_coeffs(spec, beta, traj.generalized)
    return float(
        traj.xt2[k] + c[k] * traj.dist2[k] + traj.dxn2[k] + u[k - 1] * traj.fgap[k - 1]
    )


# ---------------------------------------------------------------------------
# run entry points
# ---------------------------------------------------------------------------


def _check_run_inputs(problem: Problem, spec: ScheduleSpec, config: OptimizerConfig):
    if config.horizon != spec.horizon:
        raise ValueError(
            f"config horizon {config.horizon} != schedule horizon {spec.horizon}"
        )
    if config.x1.shape[0] != problem.dim:
        raise ValueError(
            f"x1 has dimension {config.x1.shape[0]}, problem needs {problem.dim}"
        )


def _build_trajectory(
    problem, spec, config, seed_index, audit, overridden, result, backend
) -> Trajectory:
    dist2, fgap, dxn2, xt2, div_at, x_final = result
    stepsize = np.append(step_array(spec), np.nan)
    generalized = problem.cert.p < 2.0
    W = None
    if config.method == "Momentum":
        W = _assemble_W(spec, config.beta, generalized, dist2, fgap, dxn2, xt2)
    with np.errstate(invalid="ignore"):
        sup = np.fmax.accumulate(dist2)
    diverged = div_at >= 0
    return Trajectory(
        method=config.method,
        beta=config.beta,
        horizon=spec.horizon,
        seed=config.seed,
        seed_index=seed_index,
        backend=backend,
        generalized=generalized,
        dist2=dist2,
        fgap=fgap,
        stepsize=stepsize,
        dxn2=dxn2,
        xt2=xt2,
        W=W,
        sup_dist2=sup,
        x_final=np.asarray(x_final, dtype=np.float64),
        diverged=diverged,
        diverged_at=int(div_at) if diverged else None,
        audit=audit,
        cap_overridden=overridden,
    )


def run_trajectory(
    problem: Problem,
    spec: ScheduleSpec,
    config: OptimizerConfig,
    seed_index: int = 0,
) -> Trajectory:
    """Simulate one trajectory; deterministic given (config, seed_index).

    Raises :class:`CapViolation` when the schedule fails the step-size audit
    and ``config.override_cap`` is False.
    """
    _check_run_inputs(problem, spec, config)
    audit, overridden = _gate(problem, spec, config)
    results, backend = _simulate_many(problem, spec, config, [int(seed_index)])
    return _build_trajectory(
        problem, spec, config, int(seed_index), audit, overridden, results[0], backend
    )


def _ci95(stack: np.ndarray) -> np.ndarray:
    S = stack.shape[0]
    with np.errstate(invalid="ignore"):
        return 1.96 * np.std(stack, axis=0, ddof=1) / math.sqrt(S)


def run_ensemble(
    problem: Problem,
    spec: ScheduleSpec,
    config: OptimizerConfig,
    seeds,
    keep_trajectories: bool = False,
) -> EnsembleSummary:
    """Simulate one trajectory per seed index and average them.

    Results are merged in ascending seed order regardless of the input order
    or execution interleaving, so the summary is deterministic.  Requires at
    least two seeds (duplicates allowed; a duplicated seed contributes an
    identical trajectory and zero CI width).
    """
    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ValueError("run_ensemble needs at least 2 seeds")
    order = sorted(seeds)
    _check_run_inputs(problem, spec, config)
    audit, overridden = _gate(problem, spec, config)
    results, backend = _simulate_many(problem, spec, config, order)
    trajs = tuple(
        _build_trajectory(problem, spec, config, i, audit, overridden, res, backend)
        for i, res in zip(order, results)
    )

    D = np.stack([t.dist2 for t in trajs])
    F = np.stack([t.fgap for t in trajs])
    mean_d = np.mean(D, axis=0)
    mean_f = np.mean(F, axis=0)
    mean_W = ci_W = None
    if config.method == "Momentum":
        Wst = np.stack([t.W for t in trajs])
        mean_W = np.mean(Wst, axis=0)
        ci_W = _ci95(Wst)

    valid = mean_d[1:]
    finite = valid[np.isfinite(valid)]
    sup_mean = float(np.max(finite)) if finite.size else math.nan
    per_seed_sup = tuple(
        float(t.sup_dist2[t.diverged_at if t.diverged else -1]) for t in trajs
    )
    mean_sup = float(np.mean(per_seed_sup)) if per_seed_sup else math.nan

    diverged_seeds = tuple(t.seed_index for t in trajs if t.diverged)
    return EnsembleSummary(
        method=config.method,
        backend=backend,
        horizon=spec.horizon,
        seeds=tuple(order),
        mean_dist2=mean_d,
        ci95_dist2=_ci95(D),
        mean_fgap=mean_f,
        ci95_fgap=_ci95(F),
        mean_W=mean_W,
        ci95_W=ci_W,
        sup_mean_dist2=sup_mean,
        mean_sup_dist2=mean_sup,
        per_seed_sup_dist2=per_seed_sup,
        diverged=bool(diverged_seeds),
        diverged_seeds=diverged_seeds,
        trajectories=trajs if keep_trajectories else None,
    )


# ---------------------------------------------------------------------------
# statistical checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovTestResult:
    """One-sided test of mean Lyapunov decrease on the conditioned index set."""

    z: float
    passed: bool
    vacuous: bool
    n_conditioned: int
    n_seeds: int
    mean_delta: float
    threshold: float = -1.6449


def lyapunov_decrease_test(ensemble: EnsembleSummary, r2: float) -> LyapunovTestResult:
    """Test E[W_{k+1}] < E[W_k] on {k >= 2 : mean dist2[k] >= r2}.

    Uses per-seed means of the W increments over the conditioned set; the
    one-sided z statistic must fall below -1.6449 (95%).  An empty
    conditioned set is a vacuous pass (flagged).
    """
    if ensemble.mean_W is None:
        raise ValueError("the Lyapunov test needs a momentum ensemble")
    if ensemble.trajectories is None:
        raise ValueError("run the ensemble with keep_trajectories=True")
    T = ensemble.horizon
    md, mW = ensemble.mean_dist2, ensemble.mean_W
    ks = [
        k
        for k in range(2, T + 1)
        if md[k] >= r2 and math.isfinite(mW[k]) and math.isfinite(mW[k + 1])
    ]
    S = ensemble.n_seeds
    if not ks:
        return LyapunovTestResult(
            z=math.nan, passed=True, vacuous=True, n_conditioned=0, n_seeds=S,
            mean_delta=math.nan,
        )
    ks = np.asarray(ks)
    per_seed = np.array(
        [float(np.mean(t.W[ks + 1] - t.W[ks])) for t in ensemble.trajectories]
    )
    m = float(np.mean(per_seed))
    s = float(np.std(per_seed, ddof=1))
    if s == 0.0:
        z = -math.inf if m < 0 else (math.inf if m > 0 else 0.0)
    else:
        z = m / (s / math.sqrt(S))
    return LyapunovTestResult(
        z=z,
        passed=z < -1.6449,
        vacuous=False,
        n_conditioned=int(ks.size),
        n_seeds=S,
        mean_delta=m,
    )


def boundedness_proxy(
    ensemble: EnsembleSummary,
    burn_in: int = 100,
    factor: float = 10.0,
    series: str = "dist2",
) -> tuple[bool, float, float]:
    """Check sup_k (seed-mean series) <= factor * (early running max).

    ``series`` is ``"dist2"`` or ``"fgap"``.  Returns (ok, overall_sup,
    early_sup) where early_sup is the maximum of the seed-mean values over
    k <= burn_in.  A qualitative uniform-boundedness proxy for regimes
    without a closed-form level.
    """
    if series == "dist2":
        md = ensemble.mean_dist2
    elif series == "fgap":
        md = ensemble.mean_fgap
    else:
        raise ValueError("series must be 'dist2' or 'fgap'")
    hi = min(burn_in, ensemble.horizon + 1)
    early = md[1 : hi + 1]
    early = early[np.isfinite(early)]
    valid = md[1:]
    valid = valid[np.isfinite(valid)]
    if early.size == 0 or valid.size == 0:
        return False, math.nan, math.nan
    early_sup = float(np.max(early))
    overall = float(np.max(valid))
    return bool(overall <= factor * early_sup), overall, early_sup


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _fmt_cell(v: float) -> str:
    return repr(float(v)) if math.isfinite(v) else ""


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV text with header k,stepsize,dist2,fgap,W (NaN cells empty)."""
    lines = ["k,stepsize,dist2,fgap,W"]
    for k in range(1, traj.horizon + 2):
        w = traj.W[k] if traj.W is not None else math.nan
        lines.append(
            ",".join(
                (
                    str(k),
                    _fmt_cell(traj.stepsize[k]),
                    _fmt_cell(traj.dist2[k]),
                    _fmt_cell(traj.fgap[k]),
                    _fmt_cell(w),
                )
            )
        )
    return "\n".join(lines) + "\n"
