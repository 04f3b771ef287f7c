"""Experiment orchestration: build, run, check, persist.

Artifact layout for ``cmd_run`` (all byte-reproducible)::

    <out>/seed_<index>.csv    one trajectory per seed index
    <out>/ensemble.json       config echo + seed-averaged statistics + checks
    <out>/bound.json          the applicable closed-form level / hypothesis table
    <out>/plot.svg            mean dist2 vs k with the level as a dashed rule
    <out>/failures.json       written only when a check or the config fails

Exit codes: 0 all enabled checks pass; 1 check failure; 2 config error
(including step-cap violations without override and unsupported regime
combinations).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os

import numpy as np

from .. import bounds as B
from .. import certify as C
from .. import problems as P
from ..optimize import (
    CapViolation,
    EnsembleSummary,
    OptimizerConfig,
    boundedness_proxy,
    lyapunov_decrease_test,
    run_ensemble,
    trajectory_to_csv,
)
from ..schedules import ScheduleSpec, step_at
from .config import ConfigError, ExperimentConfig
from .svgplot import line_chart

__all__ = [
    "build_problem",
    "build_schedule",
    "build_optimizer",
    "resolve_noise",
    "bound_payload",
    "cmd_run",
    "cmd_certify",
    "cmd_bound",
    "cmd_sweep",
]


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

_CSV_MODELS = {
    "least_squares": lambda A, b, p: P.least_squares(A, b),
    "phase_retrieval": lambda A, b, p: P.phase_retrieval(A, b),
    "heavy_tail_mle": lambda A, b, p: P.heavy_tail_mle(A, b, p.get("lam", 1.0)),
    "blake_zisserman": lambda A, b, p: P.blake_zisserman(
        A, b, p.get("lam", 1.0), p.get("nu", 1.0)
    ),
    "l2_logistic": lambda A, b, p: P.l2_regularized_bounded_grad(
        P.logistic_base(A, b), p.get("lam", 0.1)
    ),
    "logistic_l1": lambda A, b, p: P.logistic_l1(A, b, p.get("lam", 1.0)),
    "two_layer_nn_relu": lambda A, b, p: P.two_layer_nn(
        A, b, int(p.get("width", 8)), p.get("lam", 1.0), "relu"
    ),
    "two_layer_nn_sigmoid": lambda A, b, p: P.two_layer_nn(
        A, b, int(p.get("width", 8)), p.get("lam", 1.0), "sigmoid"
    ),
}

_CLASSIFICATION = ("l2_logistic", "logistic_l1", "two_layer_nn_relu", "two_layer_nn_sigmoid")


def _load_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise ConfigError(f"could not parse dataset {path}: {e}") from None
    if data.shape[1] < 2:
        raise ConfigError("dataset needs at least one feature column plus the label")
    return data[:, :-1], data[:, -1]


def _generate(gen: dict) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian features, unit planted signal, additive label noise.

    Classification models get sign labels with flip probability ``noise``
    (clamped to [0, 0.5]); regression and magnitude models get Gaussian
    label noise of standard deviation ``noise``.
    """
    from .._seeds import child_stream

    rng = child_stream(int(gen["seed"]), 97)
    n, d = int(gen["n"]), int(gen["d"])
    A = rng.standard_normal((n, d)) / math.sqrt(d)
    plant = rng.standard_normal(d)
    plant /= float(np.linalg.norm(plant))
    clean = A @ plant
    noise = float(gen["noise"])
    model = gen["model"]
    if model in _CLASSIFICATION:
        b = np.where(clean >= 0.0, 1.0, -1.0)
        flip_p = min(noise, 0.5)
        flips = rng.random(n) < flip_p
        b = np.where(flips, -b, b)
    else:
        b = clean + noise * rng.standard_normal(n)
        if model == "phase_retrieval":
            b = np.abs(b)
    return A, b


def build_problem(problem_cfg: dict) -> P.Problem:
    params = dict(problem_cfg.get("params", {}))
    try:
        if "name" in problem_cfg:
            return P.SUITE_BUILDERS[problem_cfg["name"]](**params)
        if "csv" in problem_cfg:
            A, b = _load_csv(problem_cfg["csv"])
            return _CSV_MODELS[problem_cfg["model"]](A, b, params)
        A, b = _generate(problem_cfg["generator"])
        return _CSV_MODELS[problem_cfg["generator"]["model"]](A, b, params)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"could not build problem: {e}") from None


def build_schedule(schedule_cfg: dict) -> ScheduleSpec:
    kw = dict(schedule_cfg)
    if "stage_lengths" in kw:
        kw["stage_lengths"] = tuple(int(v) for v in kw["stage_lengths"])
    try:
        return ScheduleSpec(**kw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid schedule: {e}") from None


def resolve_noise(cfg: ExperimentConfig, problem: P.Problem) -> C.NoiseCert:
    """Noise envelope assumed by audits and bound formulas.

    Additive oracle: exact (rho = 0, sigma2 as configured).  Full batch:
    zero.  Minibatch: the configured fixed envelope, or a fitted one when
    ``noise.mode`` is ``estimate``.
    """
    opt, nz = cfg.optimizer, cfg.noise
    if opt["oracle"] == "additive":
        return C.NoiseCert(0.0, float(opt["sigma2"]))
    if opt["oracle"] == "full" or opt["batch_size"] >= problem.n_samples:
        return C.NoiseCert(0.0, 0.0, flags=("full_batch",))
    if nz["mode"] == "estimate":
        return C.estimate_noise(
            problem, opt["batch_size"], probe_points=nz["probes"], reps=nz["reps"]
        )
    return C.NoiseCert(float(nz["rho"]), float(nz["sigma2"]))


def build_optimizer(
    cfg: ExperimentConfig, problem: P.Problem, spec: ScheduleSpec, rho: float
) -> OptimizerConfig:
    opt = cfg.optimizer
    x1 = opt["x1"]
    if isinstance(x1, list):
        vec = np.asarray(x1, dtype=np.float64)
        if vec.shape != (problem.dim,):
            raise ConfigError(
                f"x1 has {vec.size} entries, problem dimension is {problem.dim}"
            )
    else:
        vec = np.full(problem.dim, float(x1))
    try:
        return OptimizerConfig(
            method=opt["method"],
            batch_size=int(opt["batch_size"]),
            horizon=int(spec.horizon),
            seed=int(opt["master_seed"]),
            x1=vec,
            beta=opt["beta"],
            oracle=opt["oracle"],
            sigma2=float(opt["sigma2"]),
            noise_rho=float(rho),
            override_cap=bool(opt["override_cap"]),
        )
    except ValueError as e:
        raise ConfigError(f"invalid optimizer config: {e}") from None


# ---------------------------------------------------------------------------
# bound payload
# ---------------------------------------------------------------------------

_MOMENTUM_GENERALIZED = {
    "Constant": "generalized_const",
    "Polynomial": "generalized_decaying_poly",
    "Exponential": "generalized_decaying_exp",
}

_APPD_DECAYING = ("Polynomial", "StepDecay", "Bandwidth")


def _dist2_init(problem: P.Problem, ocfg: OptimizerConfig) -> float:
    return float(problem.dist2_many(ocfg.x1[None, :])[0])


def bound_payload(
    cfg: ExperimentConfig,
    problem: P.Problem,
    spec: ScheduleSpec,
    ocfg: OptimizerConfig,
    noise: C.NoiseCert,
) -> dict:
    """The closed-form level applicable to this run, as a JSON-ready dict.

    SGD with a quadratic-tail certificate reports the constant-cap level;
    sub-quadratic SGD reports the bounded-step level (with its companion
    max form in the details); momentum reports the invariant-level radius
    r2 and the cap branches (no closed-form distance bound is exposed for
    momentum).  ``appendixD`` reports the transient + stationary decay
    level.  Raises ConfigError for unsupported combinations.
    """
    formula = cfg.bound["formula"]
    slack = float(cfg.bound.get("slack", 0.0))
    cert = problem.cert
    d2i = _dist2_init(problem, ocfg)
    if formula == "auto":
        if ocfg.method == "Momentum":
            formula = "momentum"
        elif cert.p == 2.0:
            formula = "theorem1"
        else:
            formula = "theorem5"

    try:
        if formula == "theorem1":
            report = B.theorem1_bound(cert, noise, problem.L, d2i)
            payload = report.to_dict()
            payload["check_statistic"] = "sup_mean_dist2"
        elif formula == "theorem5":
            if problem.growth is None:
                raise ConfigError(
                    f"problem {problem.name} carries no gradient-growth certificate"
                )
            report = B.theorem5_bound(
                cert, problem.growth, noise, step_at(spec, 1), d2i
            )
            payload = report.to_dict()
            payload["check_statistic"] = "sup_mean_dist2"
        elif formula == "appendixD":
            if ocfg.method != "SGD":
                raise ConfigError("the decay levels cover plain SGD only")
            if spec.family == "Constant":
                report = B.appendixD_constant_report(
                    cert.theta1,
                    cert.theta2,
                    noise.sigma2,
                    spec.eta1,
                    spec.horizon,
                    d2i,
                    rho=noise.rho,
                    L=problem.L,
                )
            elif spec.family in _APPD_DECAYING:
                report = B.appendixD_decaying_report(
                    cert.theta1, cert.theta2, noise.sigma2, spec, d2i,
                    rho=noise.rho, L=problem.L,
                )
            else:
                raise ConfigError(
                    f"no decay level for the {spec.family} family"
                )
            payload = report.to_dict()
            payload["check_statistic"] = "final_mean_dist2"
        elif formula == "momentum":
            if ocfg.method != "Momentum":
                raise ConfigError("the momentum levels need method Momentum")
            beta = float(ocfg.beta)
            eta_ref = step_at(spec, 1)
            if cert.p == 2.0:
                regime = "constant" if spec.family == "Constant" else "decaying"
                r2 = B.momentum_r2(cert, noise, beta, eta_ref, regime)
            else:
                regime = _MOMENTUM_GENERALIZED.get(spec.family)
                if regime is None:
                    raise ConfigError(
                        f"no printed momentum level for the {spec.family} family "
                        "with a sub-quadratic certificate"
                    )
                alpha = spec.exp_alpha if regime == "generalized_decaying_exp" else None
                r2 = B.momentum_r2(
                    cert, noise, beta, eta_ref, regime,
                    growth=problem.growth, alpha=alpha,
                )
            branches = B.momentum_cap_branches(
                cert.theta1, noise.rho, problem.L, beta, regime
            )
            payload = {
                "formula_id": "momentum_r2",
                "regime": regime,
                "beta": beta,
                "eta_ref": eta_ref,
                "r2": r2,
                "cap_branches": branches,
                "check_statistic": None,
            }
        else:  # pragma: no cover - formulas are validated at parse time
            raise ConfigError(f"unknown bound formula {formula!r}")
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"unsupported regime for {formula}: {e}") from None

    payload["dist2_init"] = d2i
    payload["slack"] = slack
    return payload


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def _evaluate_checks(
    cfg: ExperimentConfig, ens: EnsembleSummary, payload: dict
) -> list[dict]:
    out: list[dict] = []
    for name in cfg.checks:
        if name == "no_divergence":
            out.append(
                {
                    "name": name,
                    "passed": not ens.diverged,
                    "details": {"diverged_seeds": list(ens.diverged_seeds)},
                }
            )
        elif name == "bound":
            if "bound" not in payload:
                raise ConfigError(
                    "the bound check needs a closed-form level; this regime "
                    "reports only r2 (use the proxy/lyapunov checks)"
                )
            level = float(payload["bound"])
            details: dict = {"bound": level}
            if payload.get("check_statistic") == "final_mean_dist2":
                stat = float(ens.mean_dist2[ens.horizon + 1])
                details["statistic"] = "final_mean_dist2"
            else:
                stat = float(ens.sup_mean_dist2)
                details["statistic"] = "sup_mean_dist2"
            effective = level
            companion = payload.get("details", {}).get("companion_max_bound")
            if (
                payload.get("formula_id") == "Thm5"
                and companion is not None
                and level < payload["dist2_init"]
            ):
                effective = float(companion)
                details["rule"] = "companion_max"
            effective *= 1.0 + float(payload.get("slack", 0.0))
            details["effective_level"] = effective
            details["observed"] = stat
            out.append({"name": name, "passed": bool(stat <= effective), "details": details})
        elif name == "proxy":
            ok_d, sup_d, early_d = boundedness_proxy(ens, series="dist2")
            ok_f, sup_f, early_f = boundedness_proxy(ens, series="fgap")
            out.append(
                {
                    "name": name,
                    "passed": bool(ok_d and ok_f),
                    "details": {
                        "dist2": {"ok": ok_d, "sup": sup_d, "early_sup": early_d},
                        "fgap": {"ok": ok_f, "sup": sup_f, "early_sup": early_f},
                    },
                }
            )
        elif name == "lyapunov":
            r2 = payload.get("r2")
            if r2 is None:
                r2 = payload.get("details", {}).get("r2")
            if r2 is None:
                raise ConfigError("the lyapunov check needs a regime with an r2 level")
            res = lyapunov_decrease_test(ens, float(r2))
            out.append(
                {
                    "name": name,
                    "passed": bool(res.passed),
                    "details": {
                        "z": None if math.isnan(res.z) else res.z,
                        "r2": float(r2),
                        "n_conditioned": res.n_conditioned,
                        "vacuous": res.vacuous,
                        "mean_delta": None
                        if math.isnan(res.mean_delta)
                        else res.mean_delta,
                    },
                }
            )
    return out


# ---------------------------------------------------------------------------
# persistence helpers
# ---------------------------------------------------------------------------


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _sanitize(obj):
    """Replace non-finite floats with None for strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.floating):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit_config_error(cfg: ExperimentConfig | None, err: Exception) -> None:
    kind = "cap_violation" if isinstance(err, CapViolation) else "config"
    doc = {"error": kind, "message": str(err)}
    print(_json_text(doc), end="")
    if cfg is not None:
        try:
            _write_text(os.path.join(cfg.out_dir, "failures.json"), _json_text(doc))
        except OSError:
            pass


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _execute_run(cfg: ExperimentConfig):
    problem = build_problem(cfg.problem)
    spec = build_schedule(cfg.schedule)
    noise = resolve_noise(cfg, problem)
    ocfg = build_optimizer(cfg, problem, spec, noise.rho)
    payload = bound_payload(cfg, problem, spec, ocfg, noise)
    ens = run_ensemble(problem, spec, ocfg, cfg.seed_indices, keep_trajectories=True)
    checks = _evaluate_checks(cfg, ens, payload)
    return problem, spec, ens, payload, checks


def _write_run_artifacts(cfg, problem, spec, ens, payload, checks) -> None:
    out = cfg.out_dir
    for traj in ens.trajectories:
        _write_text(
            os.path.join(out, f"seed_{traj.seed_index:04d}.csv"),
            trajectory_to_csv(traj),
        )
    doc = {
        "config": cfg.to_dict(),
        "problem": {
            "name": problem.name,
            "dim": problem.dim,
            "n_samples": problem.n_samples,
            "theta1": problem.cert.theta1,
            "theta2": problem.cert.theta2,
            "R": problem.cert.R,
            "p": problem.cert.p,
            "L": problem.L,
        },
        "summary": ens.to_dict(),
        "checks": checks,
        "audit": {
            "cap_value": ens.trajectories[0].audit.cap_value,
            "max_step": ens.trajectories[0].audit.max_step,
            "cap_satisfied": ens.trajectories[0].audit.cap_satisfied,
            "cap_overridden": ens.trajectories[0].cap_overridden,
            "conditions": [
                {
                    "name": row.name,
                    "required": row.required,
                    "actual": row.actual,
                    "satisfied": row.satisfied,
                }
                for row in ens.trajectories[0].audit.theorem_conditions
            ],
        },
    }
    _write_text(os.path.join(out, "ensemble.json"), _json_text(_sanitize(doc)))
    _write_text(os.path.join(out, "bound.json"), _json_text(_sanitize(payload)))

    level = payload.get("bound", payload.get("r2"))
    label = payload.get("formula_id", "level")
    ks = np.arange(1, spec.horizon + 2)
    svg = line_chart(
        ks,
        [("mean dist2", ens.mean_dist2[1:])],
        hline=(f"{label} = {float(level):.6g}", float(level))
        if level is not None and math.isfinite(float(level))
        else None,
        title=f"{problem.name} / {spec.family} / {ens.method}",
        ylabel="squared distance to optimum",
    )
    _write_text(os.path.join(out, "plot.svg"), svg)

    failed = [c for c in checks if not c["passed"]]
    fail_path = os.path.join(out, "failures.json")
    if failed:
        _write_text(fail_path, _json_text(_sanitize({"failures": failed})))
    elif os.path.exists(fail_path):
        # a previous invocation into this directory failed; the record must
        # not outlive the run it describes
        os.remove(fail_path)


def cmd_run(cfg: ExperimentConfig) -> int:
    """Run the configured ensemble, write artifacts, evaluate checks."""
    try:
        problem, spec, ens, payload, checks = _execute_run(cfg)
    except (ConfigError, CapViolation) as e:
        _emit_config_error(cfg, e)
        return 2
    _write_run_artifacts(cfg, problem, spec, ens, payload, checks)
    for c in checks:
        print(f"check {c['name']}: {'pass' if c['passed'] else 'FAIL'}")
    return 0 if all(c["passed"] for c in checks) else 1


def cmd_certify(cfg: ExperimentConfig) -> int:
    """Verify the problem's certificates empirically; exit 1 on any failure."""
    try:
        problem = build_problem(cfg.problem)
        cc = cfg.certify
        cert = problem.cert
        if cc["theta1"] is not None:
            cert = dataclasses.replace(cert, theta1=float(cc["theta1"]))
        if cc["theta2"] is not None:
            cert = dataclasses.replace(cert, theta2=float(cc["theta2"]))
        plan = C.default_plan(cert, rng_seed=cc["rng_seed"])
        plan = dataclasses.replace(
            plan, n_shells=cc["shells"], samples_per_shell=cc["samples"]
        )
    except (ConfigError, ValueError) as e:
        _emit_config_error(None, e if isinstance(e, ConfigError) else ConfigError(str(e)))
        return 2

    reports = {"dissipativity": C.verify_dissipativity(problem, cert, plan)}
    if problem.growth is not None:
        reports["growth"] = C.verify_growth(problem, problem.growth, plan)
    noise_est = None
    opt = cfg.optimizer
    if opt["oracle"] == "minibatch" and opt["batch_size"] < problem.n_samples:
        noise_est = C.estimate_noise(
            problem, opt["batch_size"],
            probe_points=cfg.noise["probes"], reps=cfg.noise["reps"],
        )
        reports["noise"] = C.noise_envelope_check(
            problem, noise_est, opt["batch_size"]
        )

    doc = {
        "problem": problem.name,
        "certificate": {
            "theta1": cert.theta1,
            "theta2": cert.theta2,
            "R": cert.R,
            "p": cert.p,
            "center": cert.center,
        },
        "reports": {k: r.to_dict() for k, r in reports.items()},
        "noise_estimate": None
        if noise_est is None
        else {
            "rho": noise_est.rho,
            "sigma2": noise_est.sigma2,
            "flags": list(noise_est.flags),
        },
        "passed": all(r.passed for r in reports.values()),
    }
    _write_text(os.path.join(cfg.out_dir, "cert.json"), _json_text(_sanitize(doc)))
    for k, r in reports.items():
        print(f"cert {k}: {'pass' if r.passed else 'FAIL'} "
              f"(worst slack {r.worst_violation:.3e})")
    return 0 if doc["passed"] else 1


def cmd_bound(cfg: ExperimentConfig) -> int:
    """Print the hypothesis table and level values; write bound.json."""
    try:
        problem = build_problem(cfg.problem)
        spec = build_schedule(cfg.schedule)
        noise = resolve_noise(cfg, problem)
        ocfg = build_optimizer(cfg, problem, spec, noise.rho)
        payload = bound_payload(cfg, problem, spec, ocfg, noise)
    except (ConfigError, CapViolation) as e:
        _emit_config_error(None, e)
        return 2
    _write_text(os.path.join(cfg.out_dir, "bound.json"), _json_text(_sanitize(payload)))

    print(f"formula: {payload.get('formula_id')}")
    for key in ("r2", "bound", "cap", "dist2_init"):
        if key in payload and payload[key] is not None:
            print(f"  {key}: {payload[key]:.12g}")
    hyps = payload.get("hypotheses")
    if hyps:
        print("  hypotheses:")
        for name, ok in hyps:
            print(f"    {'ok  ' if ok else 'FAIL'} {name}")
    details = payload.get("details") or {}
    if details:
        print("  details:")
        for k in sorted(details):
            print(f"    {k}: {details[k]}")
    branches = payload.get("cap_branches")
    if branches:
        print("  cap branches:")
        for k in sorted(branches):
            print(f"    {k}: {branches[k]:.12g}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, axis: str, values) -> int:
    """Repeat cmd_run per value of one numeric config leaf; write sweep.csv."""
    try:
        cfg.numeric_leaf(axis)
        values = [float(v) for v in values]
        if not values:
            raise ConfigError("sweep needs at least one value")
    except (ConfigError, ValueError) as e:
        _emit_config_error(None, e if isinstance(e, ConfigError) else ConfigError(str(e)))
        return 2

    base_out = cfg.out_dir
    rows: list[dict] = []
    all_ok = True
    for j, v in enumerate(values):
        sub = cfg.with_leaf(axis, v).with_updates(
            outputs=os.path.join(base_out, f"sweep_{j:03d}")
        )
        try:
            problem, spec, ens, payload, checks = _execute_run(sub)
        except (ConfigError, CapViolation) as e:
            print(f"sweep {axis}={v:g}: error: {e}")
            rows.append(
                {
                    "value": v,
                    "sup_mean_dist2": math.nan,
                    "mean_sup_dist2": math.nan,
                    "bound": math.nan,
                    "audit_ok": False,
                    "pass": False,
                }
            )
            all_ok = False
            continue
        _write_run_artifacts(sub, problem, spec, ens, payload, checks)
        level = payload.get("bound", payload.get("r2", math.nan))
        ok = all(c["passed"] for c in checks)
        audit_ok = not ens.trajectories[0].cap_overridden
        rows.append(
            {
                "value": v,
                "sup_mean_dist2": ens.sup_mean_dist2,
                "mean_sup_dist2": ens.mean_sup_dist2,
                "bound": float(level) if level is not None else math.nan,
                "audit_ok": audit_ok,
                "pass": ok,
            }
        )
        all_ok = all_ok and ok
        print(
            f"sweep {axis}={v:g}: sup_mean_dist2={ens.sup_mean_dist2:.6g} "
            f"bound={rows[-1]['bound']:.6g} audit_ok={audit_ok} pass={ok}"
        )

    def cell(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v) if math.isfinite(v) else ""
        return str(v)

    header = "value,sup_mean_dist2,mean_sup_dist2,bound,audit_ok,pass"
    lines = [header] + [
        ",".join(
            cell(r[k])
            for k in ("value", "sup_mean_dist2", "mean_sup_dist2", "bound", "audit_ok", "pass")
        )
        for r in rows
    ]
    _write_text(os.path.join(base_out, "sweep.csv"), "\n".join(lines) + "\n")
    return 0 if all_ok else 1
