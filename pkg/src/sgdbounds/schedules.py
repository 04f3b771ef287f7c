"""Step-size schedules with audit conditions for capped stochastic gradient runs.

Seven families over a fixed horizon ``T`` (steps are 1-indexed, ``k = 1..T``):

* ``Constant``      eta_k = eta1.
* ``Polynomial``    eta_k = eta1 / k**r with r in (0, 1].
* ``Linear``        eta_k = A - B*k anchored so eta_1 = eta_max and
                    eta_T = eta_min exactly; computed in the algebraically
                    identical lerp form ((T-k)*eta_max + (k-1)*eta_min)/(T-1)
                    so both endpoints land within a couple of ulps.
* ``Cosine``        eta_k = A + B*cos((k-1)*pi/(T-1)) with
                    A = (eta_min+eta_max)/2, B = (eta_max-eta_min)/2; the
                    phase grid is chosen so that both endpoints are exact,
                    and the value is computed in the equivalent half-angle
                    form eta_min + (eta_max-eta_min)*cos(phase/2)**2 to avoid
                    endpoint cancellation.
* ``Exponential``   eta_k = eta1 / alpha**(k-1) with alpha = (T/nu)**(1/T),
                    nu in [1, T); by construction alpha**T = T/nu.
* ``StepDecay``     eta_k = eta1 / alpha**(t-1) where t is the stage index;
                    defaults: alpha = 2, N = ceil(log2(T)/2) stages of length
                    ceil(T/N) (last stage truncated).
* ``Bandwidth``     stage-t envelope [eta_min/alpha**(t-1), eta_max/alpha**(t-1)]
                    with an inner schedule (constant / polynomial / linear /
                    cosine / exponential) restarted each stage and anchored to
                    the stage envelope; the envelope ratio s = eta_max/eta_min
                    must not exceed ``s_max`` (default 10).

``audit_schedule`` evaluates the step cap and the per-family side conditions
required by the momentum convergence analysis; ``product_monotonicity``
tabulates the sign-critical differences eta_k*tau_k - eta_{k-1}*tau_{k-1}
(tau_k = eta_k/eta_{k-1}) on the ranges where they are provably negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FAMILIES = (
    "Constant",
    "Polynomial",
    "Linear",
    "Cosine",
    "Exponential",
    "StepDecay",
    "Bandwidth",
)

INNER_MODES = ("constant", "polynomial", "linear", "cosine", "exponential")


def _default_stage_lengths(horizon: int) -> tuple[int, ...]:
    """Default decay stages: N = ceil(log2(T)/2) stages of ceil(T/N)."""
    n_stages = max(1, math.ceil(math.log2(max(horizon, 2)) / 2.0))
    length = math.ceil(horizon / n_stages)
    lengths: list[int] = []
    remaining = horizon
    while remaining > 0:
        lengths.append(min(length, remaining))
        remaining -= lengths[-1]
    return tuple(lengths)


@dataclass(frozen=True)
class ScheduleSpec:
    """Validated description of one step-size schedule.

    Only the fields relevant to ``family`` may be set; the constructor
    rejects inconsistent combinations.
    """

    family: str
    horizon: int
    eta1: float | None = None
    r_exponent: float | None = None
    eta_max: float | None = None
    eta_min: float | None = None
    nu: float | None = None
    alpha: float | None = None
    stage_lengths: tuple[int, ...] | None = None
    inner_mode: str | None = None
    s_max: float = 10.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown schedule family {self.family!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        T = self.horizon

        def need(name: str) -> float:
            value = getattr(self, name)
            if value is None:
                raise ValueError(f"{self.family} schedule requires {name}")
            return float(value)

        if self.family == "Constant":
            if need("eta1") <= 0:
                raise ValueError("eta1 must be positive")
        elif self.family == "Polynomial":
            if need("eta1") <= 0:
                raise ValueError("eta1 must be positive")
            r = need("r_exponent")
            if not (0.0 < r <= 1.0):
                raise ValueError("r_exponent must lie in (0, 1]")
        elif self.family in ("Linear", "Cosine"):
            lo, hi = need("eta_min"), need("eta_max")
            if not (0.0 < lo <= hi):
                raise ValueError("need 0 < eta_min <= eta_max")
            if T < 2:
                raise ValueError(f"{self.family} schedule needs horizon >= 2")
        elif self.family == "Exponential":
            if need("eta1") <= 0:
                raise ValueError("eta1 must be positive")
            nu = need("nu")
            if not (1.0 <= nu < T):
                raise ValueError("nu must lie in [1, horizon)")
        elif self.family == "StepDecay":
            if need("eta1") <= 0:
                raise ValueError("eta1 must be positive")
            if self.alpha is None:
                object.__setattr__(self, "alpha", 2.0)
            elif self.alpha <= 1.0:
                raise ValueError("alpha must exceed 1")
            if self.stage_lengths is None:
                object.__setattr__(self, "stage_lengths", _default_stage_lengths(T))
        elif self.family == "Bandwidth":
            lo, hi = need("eta_min"), need("eta_max")
            if not (0.0 < lo <= hi):
                raise ValueError("need 0 < eta_min <= eta_max")
            ratio = hi / lo
            if ratio > self.s_max * (1.0 + 1e-12):
                raise ValueError(
                    f"bandwidth ratio {ratio:g} exceeds s_max={self.s_max:g}"
                )
            if self.alpha is None:
                object.__setattr__(self, "alpha", 2.0)
            elif self.alpha <= 1.0:
                raise ValueError("alpha must exceed 1")
            if self.inner_mode is None:
                object.__setattr__(self, "inner_mode", "constant")
            if self.inner_mode not in INNER_MODES:
                raise ValueError(f"unknown inner_mode {self.inner_mode!r}")
            if self.stage_lengths is None:
                raise ValueError("Bandwidth schedule requires stage_lengths")

        if self.stage_lengths is not None:
            if self.family not in ("StepDecay", "Bandwidth"):
                raise ValueError(f"{self.family} does not take stage_lengths")
            lengths = tuple(int(s) for s in self.stage_lengths)
            if any(s < 1 for s in lengths):
                raise ValueError("stage lengths must be positive")
            if sum(lengths) != T:
                raise ValueError("stage lengths must sum to the horizon")
            object.__setattr__(self, "stage_lengths", lengths)

    # -- derived quantities -------------------------------------------------

    @property
    def exp_alpha(self) -> float:
        """Decay base of the Exponential family: (T/nu)**(1/T)."""
        if self.family != "Exponential":
            raise ValueError("exp_alpha is defined for Exponential schedules")
        return (self.horizon / self.nu) ** (1.0 / self.horizon)

    def stage_of(self, k: int) -> tuple[int, int, int]:
        """Stage index t (1-based), position j within stage, stage length."""
        if self.stage_lengths is None:
            raise ValueError("schedule has no stages")
        offset = 0
        for t, length in enumerate(self.stage_lengths, start=1):
            if k <= offset + length:
                return t, k - offset, length
            offset += length
        raise ValueError(f"step index {k} beyond horizon {self.horizon}")


def _lerp(j: int, length: int, hi: float, lo: float) -> float:
    """Linear interpolation hitting hi at j=1 and lo at j=length exactly."""
    if length == 1:
        return hi
    return ((length - j) * hi + (j - 1) * lo) / (length - 1)


def _cosine(j: int, length: int, hi: float, lo: float) -> float:
    # Half-angle form of (lo+hi)/2 + (hi-lo)/2 * cos((j-1)*pi/(length-1)):
    # identical algebraically, but free of the cancellation that would lose
    # the low endpoint when hi >> lo.
    if length == 1:
        return hi
    half_phase = (j - 1) * math.pi / (2.0 * (length - 1))
    c = math.cos(half_phase)
    return lo + (hi - lo) * (c * c)


def step_at(spec: ScheduleSpec, k: int) -> float:
    """Step size eta_k for 1 <= k <= horizon (raises outside that range)."""
    if not isinstance(k, (int, np.integer)):
        raise TypeError("step index must be an integer")
    k = int(k)
    if not (1 <= k <= spec.horizon):
        raise IndexError(f"step index {k} outside [1, {spec.horizon}]")
    fam = spec.family
    if fam == "Constant":
        return spec.eta1
    if fam == "Polynomial":
        return spec.eta1 / k ** spec.r_exponent
    if fam == "Linear":
        return _lerp(k, spec.horizon, spec.eta_max, spec.eta_min)
    if fam == "Cosine":
        return _cosine(k, spec.horizon, spec.eta_max, spec.eta_min)
    if fam == "Exponential":
        return spec.eta1 / spec.exp_alpha ** (k - 1)
    if fam == "StepDecay":
        t, _, _ = spec.stage_of(k)
        return spec.eta1 / spec.alpha ** (t - 1)
    # Bandwidth
    t, j, length = spec.stage_of(k)
    decay = spec.alpha ** (t - 1)
    hi = spec.eta_max / decay
    lo = spec.eta_min / decay
    mode = spec.inner_mode
    if mode == "constant" or length == 1:
        value = hi
    elif mode == "linear":
        value = _lerp(j, length, hi, lo)
    elif mode == "cosine":
        value = _cosine(j, length, hi, lo)
    elif mode == "exponential":
        value = hi * (lo / hi) ** ((j - 1) / (length - 1))
    else:  # polynomial, anchored so j=length lands on the lower envelope
        r = math.log(hi / lo) / math.log(length) if hi > lo else 0.0
        value = hi / j**r
    # 2-ulp formula dips must not leave the stage band.
    return min(max(value, lo), hi)


def step_array(spec: ScheduleSpec) -> np.ndarray:
    """Array ``e`` of length horizon+1 with ``e[k] = step_at(spec, k)``.

    Index 0 is NaN; values are produced by the scalar ``step_at`` so the two
    agree bitwise.
    """
    out = np.empty(spec.horizon + 1, dtype=np.float64)
    out[0] = np.nan
    for k in range(1, spec.horizon + 1):
        out[k] = step_at(spec, k)
    return out


def tau_ratio(spec: ScheduleSpec, k: int) -> float:
    """Consecutive step ratio tau_k = eta_k / eta_{k-1}, defined for k >= 2."""
    if k < 2:
        raise ValueError("tau_ratio is defined for k >= 2")
    return step_at(spec, k) / step_at(spec, k - 1)


@dataclass(frozen=True)
class ConditionRow:
    """One audited side condition: ``actual`` measured against ``required``."""

    name: str
    required: float
    actual: float
    satisfied: bool


@dataclass(frozen=True)
class ScheduleAudit:
    """Step-cap status plus per-family side conditions for momentum runs."""

    family: str
    cap_value: float
    max_step: float
    cap_satisfied: bool
    theorem_conditions: tuple[ConditionRow, ...]
    beta: float | None

    @property
    def conditions_satisfied(self) -> bool:
        return all(row.satisfied for row in self.theorem_conditions)

    def passed_for(self, method: str) -> bool:
        """Gate for a run: plain SGD needs the cap only; momentum runs also
        need every family side condition."""
        if method == "SGD":
            return self.cap_satisfied
        return self.cap_satisfied and self.conditions_satisfied


def momentum_cap_value(theta1: float, rho: float, L: float, beta: float) -> float:
    """Step cap for momentum runs: the smaller of the two analytic branches."""
    if beta <= 0.0:
        curvature = math.inf
    else:
        curvature = (1.0 - beta**2) / (beta * L * (1.0 - beta + 1.0 / (1.0 - beta)))
    tail = theta1 / (2.0 * ((1.0 - beta) ** 2 + 1.0) * (rho + 1.0) * L**2)
    return min(curvature, tail)


def audit_schedule(
    spec: ScheduleSpec,
    theta1: float,
    rho: float,
    L: float,
    beta: float | None = None,
) -> ScheduleAudit:
    """Audit a schedule against the step cap and the family side conditions.

    With ``beta`` absent the cap is the plain-SGD value theta1/((rho+1)*L**2);
    with ``beta`` supplied it is the momentum cap (minimum of the curvature
    and dissipativity branches).  Family side conditions are always reported;
    they gate only momentum runs (see ``ScheduleAudit.passed_for``).
    """
    if theta1 <= 0 or L <= 0:
        raise ValueError("theta1 and L must be positive")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if beta is not None and not (0.0 <= beta < 1.0):
        raise ValueError("beta must lie in [0, 1)")

    if beta is None:
        cap = theta1 / ((rho + 1.0) * L**2)
    else:
        cap = momentum_cap_value(theta1, rho, L, beta)

    max_step = step_at(spec, 1)
    cap_ok = max_step <= cap

    T = spec.horizon
    rows: list[ConditionRow] = []
    if spec.family == "Polynomial":
        req = 2.0 / theta1
        rows.append(ConditionRow("polynomial_eta1_lower", req, spec.eta1, spec.eta1 >= req))
    elif spec.family == "Linear":
        c = spec.eta_min * math.sqrt(T)
        req = math.sqrt(2.0 * spec.eta_max**2 / theta1)
        rows.append(ConditionRow("linear_c_main", req, c, c >= req))
        req_proof = math.sqrt(2.0 * spec.eta_max / theta1)
        rows.append(
            ConditionRow("linear_c_proof_variant", req_proof, c, c >= req_proof)
        )
    elif spec.family == "Cosine":
        c = spec.eta_min * math.sqrt(T)
        req = math.sqrt(spec.eta_max**2 * math.pi**2 / (2.0 * theta1))
        rows.append(ConditionRow("cosine_c_main", req, c, c >= req))
        req_final = spec.eta_max * math.pi**2 / (4.0 * T**1.5)
        rows.append(ConditionRow("cosine_c_final_iterate", req_final, c, c >= req_final))
    elif spec.family == "Exponential":
        req = 2.0 * math.log(T / spec.nu) / (theta1 * spec.nu)
        rows.append(ConditionRow("exponential_eta1_lower", req, spec.eta1, spec.eta1 >= req))
    elif spec.family == "Bandwidth":
        ratio = spec.eta_max / spec.eta_min
        rows.append(
            ConditionRow("bandwidth_ratio_within_s_max", spec.s_max, ratio, ratio <= spec.s_max * (1.0 + 1e-12))
        )

    return ScheduleAudit(
        family=spec.family,
        cap_value=cap,
        max_step=max_step,
        cap_satisfied=cap_ok,
        theorem_conditions=tuple(rows),
        beta=beta,
    )


_MONOTONE_RANGES = {
    "Polynomial": lambda T: (3, T - 1),
    "Cosine": lambda T: (3, T - 1),
    "Linear": lambda T: (3, T),
    "Exponential": lambda T: (3, T),
}


def product_monotonicity(spec: ScheduleSpec) -> list[tuple[int, float]]:
    """Differences eta_k*tau_k - eta_{k-1}*tau_{k-1} on the family's pinned range.

    Returns [(k, diff)] for k in the range where the difference is provably
    negative (Polynomial and Cosine exclude the final index, where the sign
    flips); families without a claim return an empty list.
    """
    fam = spec.family
    if fam not in _MONOTONE_RANGES:
        return []
    lo, hi = _MONOTONE_RANGES[fam](spec.horizon)
    out: list[tuple[int, float]] = []
    if hi < lo:
        return out
    eta_prev2 = step_at(spec, lo - 2)
    eta_prev = step_at(spec, lo - 1)
    for k in range(lo, hi + 1):
        eta = step_at(spec, k)
        diff = eta * (eta / eta_prev) - eta_prev * (eta_prev / eta_prev2)
        out.append((k, diff))
        eta_prev2, eta_prev = eta_prev, eta
    return out
