"""Closed-form uniform-boundedness levels, step caps, and decay envelopes.

Every public function here evaluates a printed formula exactly — no fitting,
no simulation.  The outputs fall into three groups:

* ``theorem1_bound`` / ``theorem5_bound``: uniform bounds on the expected
  squared distance to the optimum for SGD under quadratic-tail (p = 2) and
  sub-quadratic-tail (p < 2) dissipativity certificates.
* ``momentum_caps`` / ``momentum_cap_branches`` / ``momentum_r2``: step-size
  ceilings and attraction-radius levels for the momentum method, keyed by
  schedule regime.
* ``appendixD_constant_bound`` / ``appendixD_decaying_bound`` (and their
  ``*_report`` wrappers): explicit decay-plus-stationary envelopes available
  when the dissipativity inequality holds globally (R = 0).

``BoundReport`` is the JSON-ready carrier: the headline numbers plus a
hypothesis table and a dictionary of per-branch intermediates so callers can
see which branch of a max/min governed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .certify import DissipativityCert, GrowthCert, NoiseCert
from .schedules import ScheduleSpec, momentum_cap_value, step_at

__all__ = [
    "FORMULA_IDS",
    "CAP_REGIMES",
    "BoundReport",
    "theorem1_bound",
    "theorem5_bound",
    "momentum_caps",
    "momentum_cap_branches",
    "momentum_r2",
    "appendixD_constant_bound",
    "appendixD_constant_report",
    "appendixD_decaying_bound",
    "appendixD_decaying_report",
]

FORMULA_IDS = (
    "Thm1",
    "Thm5",
    "AppD_Const",
    "AppD_PolyLt1",
    "AppD_PolyEq1",
    "AppD_StepDecay",
)

CAP_REGIMES = (
    "constant",
    "decaying",
    "generalized_const",
    "generalized_decaying_poly",
    "generalized_decaying_exp",
)


@dataclass(frozen=True)
class BoundReport:
    """One evaluated closed-form bound plus its hypothesis table.

    ``r2`` is the squared attraction radius for the uniform bounds and the
    stationary (noise-floor) term for the decay envelopes.  ``bound`` is the
    headline value.  ``cap`` is the step-size ceiling attached to the formula
    (``inf`` when the formula constrains only boundedness of the steps).
    ``details`` records every branch of the internal max/min so the governing
    branch is visible; ``notes`` carries non-numeric caveats.
    """

    formula_id: str
    r2: float
    bound: float
    cap: float
    hypotheses: tuple[tuple[str, bool], ...]
    details: dict[str, float] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.formula_id not in FORMULA_IDS:
            raise ValueError(f"unknown formula_id {self.formula_id!r}")
        if not (self.r2 >= 0.0):
            raise ValueError("r2 must be non-negative")
        if not (self.bound >= 0.0):
            raise ValueError("bound must be non-negative")
        if not (self.cap > 0.0):
            raise ValueError("cap must be positive")

    @property
    def hypotheses_satisfied(self) -> bool:
        return all(ok for _, ok in self.hypotheses)

    def to_dict(self) -> dict:
        return {
            "formula_id": self.formula_id,
            "r2": self.r2,
            "bound": self.bound,
            "cap": self.cap,
            "hypotheses": [[name, bool(ok)] for name, ok in self.hypotheses],
            "details": dict(self.details),
            "notes": list(self.notes),
        }


def _require_nonneg(**values: float) -> None:
    for name, value in values.items():
        if not (value >= 0.0):
            raise ValueError(f"{name} must be non-negative, got {value!r}")


def _require_pos(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0.0):
            raise ValueError(f"{name} must be positive, got {value!r}")


# ---------------------------------------------------------------------------
# Uniform bounds for SGD
# ---------------------------------------------------------------------------


def theorem1_bound(
    cert: DissipativityCert,
    noise: NoiseCert,
    L: float,
    dist2_init: float,
) -> BoundReport:
    """Uniform bound on E||x_k - x*||^2 for SGD under a p = 2 certificate.

    Valid for every schedule whose steps stay within the returned ``cap``
    theta1 / ((1 + rho) L^2).  The squared attraction radius is

        r^2 = max{ R^2,  2 theta2/theta1 + sigma^2/((1+rho) L^2) }

    and the bound is the larger of the initial squared distance and the
    noise-ball level 2 (sigma^2 + L^2 r^2) theta1^2/((1+rho)^2 L^4) + 2 r^2.
    """
    if cert.p != 2.0:
        raise ValueError("theorem1_bound needs a quadratic-tail certificate (p=2)")
    _require_pos(theta1=cert.theta1, L=L)
    _require_nonneg(dist2_init=dist2_init)
    th1, th2, R = cert.theta1, cert.theta2, cert.R
    rho, s2 = noise.rho, noise.sigma2

    denom = (1.0 + rho) * L * L
    cap = th1 / denom
    r2_tail = R * R
    r2_noise = 2.0 * th2 / th1 + s2 / denom
    r2 = max(r2_tail, r2_noise)
    ball = 2.0 * (s2 + L * L * r2) * cap * cap + 2.0 * r2
    bound = max(dist2_init, ball)
    return BoundReport(
        formula_id="Thm1",
        r2=r2,
        bound=bound,
        cap=cap,
        hypotheses=(("tail_exponent_quadratic", cert.p == 2.0),),
        details={
            "r2_radius_branch": r2_tail,
            "r2_noise_branch": r2_noise,
            "bound_init_branch": dist2_init,
            "bound_ball_branch": ball,
        },
    )


def theorem5_bound(
    cert: DissipativityCert,
    growth: GrowthCert,
    noise: NoiseCert,
    eta_max: float,
    dist2_init: float,
) -> BoundReport:
    """Uniform bound for SGD under a sub-quadratic tail (0 < p < 2).

    Requires a gradient-growth certificate with tau <= p/2; any bounded
    schedule with steps <= ``eta_max`` qualifies (no curvature cap, hence
    ``cap = inf``).  The squared radius is the largest of three branches::

        R^2
        (8 eta_max (rho+1) theta3 / theta1)^(1/(p - 2 tau))   [p > 2 tau only]
        (2 theta2/theta1 + (sigma^2 + (rho+1) theta3) eta_max/theta1)^(2/p)

    and the headline value is, as printed,

        min{ dist2_init,
             2 (1 + eta_max^2 (rho+1) theta3) r^2
               + 2 eta_max^2 (sigma^2 + (rho+1) theta3) }.

    ``details`` additionally carries the no-8 variant of the middle branch
    (the derivation's own radius) and the conservative ``companion_max_bound``
    = max of the same two quantities; the companion is an extension, not the
    printed combinator.
    """
    p, tau = cert.p, growth.tau
    if p <= 0.0:
        raise ValueError("theorem5_bound needs a positive tail exponent p")
    if p >= 2.0:
        raise ValueError("theorem5_bound needs p < 2; use theorem1_bound at p = 2")
    if tau > p / 2.0:
        raise ValueError(
            f"gradient growth tau={tau!r} exceeds p/2={p / 2.0!r}; hypotheses fail"
        )
    _require_pos(theta1=cert.theta1, theta3=growth.theta3)
    _require_nonneg(eta_max=eta_max, dist2_init=dist2_init)
    th1, th2, R = cert.theta1, cert.theta2, cert.R
    rho, s2 = noise.rho, noise.sigma2
    th3 = growth.theta3

    strict = p > 2.0 * tau
    r2_radius = R * R
    r2_noise = (2.0 * th2 / th1 + (s2 + (rho + 1.0) * th3) * eta_max / th1) ** (2.0 / p)
    details: dict[str, float] = {
        "r2_radius_branch": r2_radius,
        "r2_noise_branch": r2_noise,
    }
    notes: list[str] = []
    if strict:
        exp_mid = 1.0 / (p - 2.0 * tau)
        r2_step = (8.0 * eta_max * (rho + 1.0) * th3 / th1) ** exp_mid
        r2_step_no8 = (eta_max * (rho + 1.0) * th3 / th1) ** exp_mid
        details["r2_step_branch"] = r2_step
        details["r2_step_branch_no8_variant"] = r2_step_no8
        r2 = max(r2_radius, r2_step, r2_noise)
    else:
        notes.append("middle radius branch skipped: exponent singular at p == 2*tau")
        r2 = max(r2_radius, r2_noise)

    ball = 2.0 * (1.0 + eta_max**2 * (rho + 1.0) * th3) * r2 + 2.0 * eta_max**2 * (
        s2 + (rho + 1.0) * th3
    )
    bound = min(dist2_init, ball)
    details["bound_init_branch"] = dist2_init
    details["bound_ball_branch"] = ball
    details["companion_max_bound"] = max(dist2_init, ball)
    notes.append("companion_max_bound is a conservative extension of the printed min")
    return BoundReport(
        formula_id="Thm5",
        r2=r2,
        bound=bound,
        cap=math.inf,
        hypotheses=(
            ("tail_exponent_below_two", p < 2.0),
            ("growth_tau_at_most_half_p", tau <= p / 2.0),
            ("tail_exponent_exceeds_twice_tau", strict),
        ),
        details=details,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Momentum step caps and attraction radii
# ---------------------------------------------------------------------------


def _curvature_cap(L: float, beta: float) -> float:
    return (1.0 - beta * beta) / (beta * L * ((1.0 - beta) + 1.0 / (1.0 - beta)))


def momentum_cap_branches(
    theta1: float, rho: float, L: float, beta: float, regime: str
) -> dict[str, float]:
    """Every analytic branch feeding the cap for ``regime``, plus the cap.

    For the quadratic-tail regimes the dictionary carries both the stated
    dissipativity branch (with its factor 2) and the derivation's variant
    without it; the cap uses the stricter stated value.
    """
    if regime not in CAP_REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    _require_pos(L=L)
    omb = 1.0 - beta
    if regime in ("constant", "decaying"):
        _require_pos(theta1=theta1)
        _require_nonneg(rho=rho)
        curvature = _curvature_cap(L, beta)
        stated = theta1 / (2.0 * (omb * omb + 1.0) * (rho + 1.0) * L * L)
        variant = theta1 / ((omb * omb + 1.0) * (rho + 1.0) * L * L)
        return {
            "curvature": curvature,
            "dissipativity": stated,
            "dissipativity_no2_variant": variant,
            "cap": min(curvature, stated),
        }
    if regime == "generalized_const":
        cap = (1.0 - beta * beta) / (beta * L * (omb + 1.0 / omb))
    elif regime == "generalized_decaying_poly":
        # Exactly half the generalized constant cap.
        cap = (1.0 - beta * beta) / (beta * L * (omb + 1.0 / omb)) / 2.0
    else:  # generalized_decaying_exp
        cap = (1.0 - beta * beta) / (beta * L * (omb + 2.0 / omb))
    return {"curvature": cap, "cap": cap}


def momentum_caps(
    theta1: float, rho: float, L: float, beta: float, regime: str
) -> float:
    """Step-size ceiling for a momentum run in the given schedule regime.

    Regimes: ``constant`` and ``decaying`` (quadratic tail; min of the
    curvature and dissipativity branches, identical expressions), and the
    sub-quadratic ``generalized_const`` / ``generalized_decaying_poly`` /
    ``generalized_decaying_exp`` (curvature-only ceilings; ``theta1`` and
    ``rho`` are ignored there).
    """
    return momentum_cap_branches(theta1, rho, L, beta, regime)["cap"]


def momentum_r2(
    cert: DissipativityCert,
    noise: NoiseCert,
    beta: float,
    eta_ref: float,
    regime: str,
    growth: GrowthCert | None = None,
    alpha: float | None = None,
) -> float:
    """Squared attraction radius for the momentum decrease inequality.

    ``eta_ref`` is the schedule's reference step: the constant value for the
    constant regimes, the largest step for decaying ones.  ``alpha`` is the
    per-step decay base, required only by ``generalized_decaying_exp``.
    The conditional Lyapunov-decrease test conditions on mean squared
    distance exceeding this value.
    """
    if regime not in CAP_REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    _require_pos(theta1=cert.theta1)
    _require_nonneg(eta_ref=eta_ref)
    th1, th2, R = cert.theta1, cert.theta2, cert.R
    rho, s2 = noise.rho, noise.sigma2
    omb2p1 = (1.0 - beta) ** 2 + 1.0

    if regime in ("constant", "decaying"):
        if cert.p != 2.0:
            raise ValueError(f"regime {regime!r} needs a quadratic-tail cert (p=2)")
        if regime == "constant":
            level = 2.0 * th2 / th1 + 2.0 * eta_ref * omb2p1 * s2 / th1
        else:
            level = 2.0 * th2 / th1 + omb2p1 * s2 * eta_ref / th1
        return max(R * R, level)

    if growth is None:
        raise ValueError(f"regime {regime!r} needs a gradient-growth certificate")
    p, tau, th3 = cert.p, growth.tau, growth.theta3
    if not (0.0 < p < 2.0):
        raise ValueError("generalized regimes need a tail exponent 0 < p < 2")
    if p <= 2.0 * tau:
        raise ValueError("generalized regimes need p > 2*tau")

    if regime == "generalized_const":
        mid = (eta_ref * (1.0 + (1.0 - beta) ** 2) * (rho + 1.0) * th3 / th1) ** (
            1.0 / (p - 2.0 * tau)
        )
        # As printed, the noise level enters without the step or 1/theta1
        # scalings of the other regimes.
        last = (2.0 * th2 / th1 + omb2p1 * (s2 + eta_ref * (rho + 1.0) * th3)) ** (
            2.0 / p
        )
        return max(R * R, mid, last)

    mid = (eta_ref * omb2p1 * (rho + 1.0) * th3 / th1) ** (2.0 / (p - 2.0 * tau))
    if regime == "generalized_decaying_poly":
        last = (
            4.0 * th2 / th1
            + eta_ref * (2.0 - beta) ** 2 * ((rho + 1.0) * th3 + s2) / th1
        ) ** (2.0 / p)
        return max(R * R, mid, last)

    # generalized_decaying_exp
    if alpha is None or not (alpha > 1.0):
        raise ValueError("generalized_decaying_exp needs the decay base alpha > 1")
    last = (
        2.0 * th2 / (alpha * th1)
        + eta_ref * ((1.0 - beta) ** 2 + 1.0 / alpha) * ((rho + 1.0) * th3 + s2) / th1
    ) ** (2.0 / p)
    return max(R * R, mid, last)


# ---------------------------------------------------------------------------
# Explicit decay envelopes (global dissipativity, R = 0)
# ---------------------------------------------------------------------------


def appendixD_constant_bound(
    theta1: float,
    theta2: float,
    sigma2: float,
    eta: float,
    T: int,
    dist2_init: float,
) -> float:
    """Decay envelope for constant-step SGD under global dissipativity:

        (1 - eta theta1)^T * dist2_init + (theta2 + eta sigma^2) / theta1.

    Requires eta * theta1 < 1 so the geometric factor contracts.
    """
    _require_pos(theta1=theta1, eta=eta)
    _require_nonneg(theta2=theta2, sigma2=sigma2, dist2_init=dist2_init)
    if not (isinstance(T, int) and T >= 0):
        raise ValueError("T must be a non-negative integer")
    if eta * theta1 >= 1.0:
        raise ValueError("eta * theta1 must be below 1 for the geometric envelope")
    transient = (1.0 - eta * theta1) ** T * dist2_init
    stationary = (theta2 + eta * sigma2) / theta1
    return transient + stationary


def appendixD_constant_report(
    theta1: float,
    theta2: float,
    sigma2: float,
    eta: float,
    T: int,
    dist2_init: float,
    rho: float | None = None,
    L: float | None = None,
) -> BoundReport:
    """``appendixD_constant_bound`` wrapped with the hypothesis table.

    Supplying ``rho`` and ``L`` additionally records whether ``eta`` respects
    the curvature step cap theta1/((1+rho) L^2) the envelope assumes.
    """
    bound = appendixD_constant_bound(theta1, theta2, sigma2, eta, T, dist2_init)
    stationary = (theta2 + eta * sigma2) / theta1
    transient = (1.0 - eta * theta1) ** T * dist2_init
    hyps: list[tuple[str, bool]] = [("eta_theta1_below_one", eta * theta1 < 1.0)]
    cap = math.inf
    if rho is not None and L is not None:
        _require_pos(L=L)
        _require_nonneg(rho=rho)
        cap = theta1 / ((1.0 + rho) * L * L)
        hyps.append(("eta_within_step_cap", eta <= cap))
    return BoundReport(
        formula_id="AppD_Const",
        r2=stationary,
        bound=bound,
        cap=cap,
        hypotheses=tuple(hyps),
        details={"transient_term": transient, "stationary_term": stationary},
    )


def appendixD_decaying_report(
    theta1: float,
    theta2: float,
    sigma2: float,
    spec: ScheduleSpec,
    dist2_init: float,
    rho: float | None = None,
    L: float | None = None,
) -> BoundReport:
    """Decay envelope for time-dependent steps under global dissipativity.

    Accepted schedules and their displays:

    * ``Polynomial`` with exponent r in (0, 1):
      exp(-theta1 eta1 ((T+1)^(1-r) - 1)/(1-r)) * dist2_init
        + (theta2 + eta1 sigma^2) 2^r / theta1
    * ``Polynomial`` with r = 1:
      dist2_init/(T+1)^(theta1 eta1) + 2 (theta2 + eta1 sigma^2)/theta1
    * ``StepDecay`` (band with m = M = eta1) and ``Bandwidth`` with the
      constant inner mode (m = eta_min, M = eta_max), both needing uniform
      stage lengths S over N stages:
      exp(-theta1 m S) * dist2_init + (theta2 + M sigma^2) M/(1 - exp(-m theta1)).

    The stage-banded display drops a factor 1/(1 - exp(-m theta1 S alpha^(1-N)))
    that only matters for short horizons; ``details`` reports it and the
    corrected value (``unsimplified_factor`` / ``unsimplified_bound``).
    """
    _require_pos(theta1=theta1)
    _require_nonneg(theta2=theta2, sigma2=sigma2, dist2_init=dist2_init)
    fam = spec.family
    details: dict[str, float]
    notes: tuple[str, ...] = ()

    if fam == "Polynomial":
        r, eta1, T = spec.r_exponent, spec.eta1, spec.horizon
        if r == 1.0:
            formula_id = "AppD_PolyEq1"
            transient = dist2_init / (T + 1.0) ** (theta1 * eta1)
            stationary = 2.0 * (theta2 + eta1 * sigma2) / theta1
        else:
            formula_id = "AppD_PolyLt1"
            decay = theta1 * eta1 * ((T + 1.0) ** (1.0 - r) - 1.0) / (1.0 - r)
            transient = math.exp(-decay) * dist2_init
            stationary = (theta2 + eta1 * sigma2) * 2.0**r / theta1
        bound = transient + stationary
        details = {"transient_term": transient, "stationary_term": stationary}
    elif fam in ("StepDecay", "Bandwidth"):
        if fam == "StepDecay":
            m = M = spec.eta1
        else:
            if spec.inner_mode != "constant":
                raise ValueError(
                    "the stage-banded envelope needs the constant inner mode"
                )
            m, M = spec.eta_min, spec.eta_max
        lengths = spec.stage_lengths
        if len(set(lengths)) != 1:
            raise ValueError("the stage-banded envelope needs uniform stage lengths")
        S, N, alpha = lengths[0], len(lengths), spec.alpha
        formula_id = "AppD_StepDecay"
        transient = math.exp(-theta1 * m * S) * dist2_init
        stationary = (theta2 + M * sigma2) * M / (1.0 - math.exp(-m * theta1))
        bound = transient + stationary
        tail = math.exp(-m * theta1 * S * alpha ** (1.0 - N))
        factor = 1.0 / (1.0 - tail) if tail < 1.0 else math.inf
        details = {
            "transient_term": transient,
            "stationary_term": stationary,
            "band_lo_m": m,
            "band_hi_M": M,
            "stage_length_S": float(S),
            "n_stages_N": float(N),
            "unsimplified_factor": factor,
            "unsimplified_bound": transient + stationary * factor,
        }
        notes = ("stationary term uses the simplified large-horizon display",)
    else:
        raise ValueError(f"unsupported schedule family {fam!r} for the decay envelope")

    hyps: list[tuple[str, bool]] = []
    cap = math.inf
    if rho is not None and L is not None:
        _require_pos(L=L)
        _require_nonneg(rho=rho)
        cap = theta1 / ((1.0 + rho) * L * L)
        hyps.append(("max_step_within_step_cap", step_at(spec, 1) <= cap))
    return BoundReport(
        formula_id=formula_id,
        r2=stationary,
        bound=bound,
        cap=cap,
        hypotheses=tuple(hyps),
        details=details,
        notes=notes,
    )


def appendixD_decaying_bound(
    theta1: float,
    theta2: float,
    sigma2: float,
    spec: ScheduleSpec,
    dist2_init: float,
) -> float:
    """Headline value of :func:`appendixD_decaying_report`."""
    return appendixD_decaying_report(theta1, theta2, sigma2, spec, dist2_init).bound
