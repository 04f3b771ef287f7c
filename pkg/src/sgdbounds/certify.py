"""Certificates and their empirical verification by shell sampling.

A dissipativity certificate asserts, for all x with ||x - c|| >= R (c is the
optimum or the origin, per ``center``):

    <grad f(x), x - c>  >=  theta1 * ||x - c||**p  -  theta2

A growth certificate asserts ||grad f(x)||**2 <= theta3 * (1 + ||x - x*||**(2*tau)),
and a noise certificate asserts that the stochastic gradient oracle satisfies
E||g - grad f||**2 <= rho * ||grad f||**2 + sigma2 at every point.

Verification samples points on geometric shells around the relevant center and
reports the worst slack; ``estimate_noise`` fits a noise certificate from
sampled minibatch variances and inflates it so the fitted envelope dominates
every probe by construction.  ``convert_origin_form`` and
``convert_generalized`` rewrite origin-centered certificates into
optimum-centered ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._seeds import stream

DEFAULT_SLACK_TOL = 1e-9


@dataclass(frozen=True)
class DissipativityCert:
    """Quadratic-or-slower tail-growth certificate for <grad f, x - c>."""

    theta1: float
    theta2: float
    R: float
    p: float = 2.0
    center: str = "optimum"
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.theta1 < 0 or self.theta2 < 0 or self.R < 0:
            raise ValueError("theta1, theta2, R must be non-negative")
        if not (0.0 <= self.p <= 2.0):
            raise ValueError("p must lie in [0, 2]")
        if self.center not in ("optimum", "origin"):
            raise ValueError("center must be 'optimum' or 'origin'")


@dataclass(frozen=True)
class GrowthCert:
    """Gradient-norm growth certificate ||grad f||^2 <= theta3(1 + D^(2 tau))."""

    theta3: float
    tau: float

    def __post_init__(self) -> None:
        if self.theta3 <= 0:
            raise ValueError("theta3 must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")


@dataclass(frozen=True)
class NoiseCert:
    """Oracle noise envelope E||g - grad f||^2 <= rho ||grad f||^2 + sigma2."""

    rho: float
    sigma2: float
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.rho < 0 or self.sigma2 < 0:
            raise ValueError("rho and sigma2 must be non-negative")


@dataclass(frozen=True)
class ShellSamplingPlan:
    """Geometric shells of sampled directions used to probe a certificate."""

    r_lo: float
    r_hi: float
    n_shells: int = 40
    samples_per_shell: int = 256
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.r_lo <= 0:
            raise ValueError("r_lo must be positive")
        if self.r_hi < 10.0 * self.r_lo:
            raise ValueError("r_hi must be at least 10 * r_lo")
        if self.n_shells < 1 or self.samples_per_shell < 1:
            raise ValueError("shell counts must be positive")

    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_lo, self.r_hi, self.n_shells)


def default_plan(cert: DissipativityCert | None = None, rng_seed: int = 0) -> ShellSamplingPlan:
    """Default plan: radii in [max(R, 0.01), 100] (widened if R is large)."""
    r_lo = max(cert.R if cert is not None else 0.0, 0.01)
    r_hi = max(100.0, 10.0 * r_lo)
    return ShellSamplingPlan(r_lo=r_lo, r_hi=r_hi, rng_seed=rng_seed)


@dataclass(frozen=True)
class CertReport:
    """Outcome of one empirical certificate check."""

    kind: str
    passed: bool
    worst_violation: float  # minimum slack over all samples (negative = violated)
    worst_point: np.ndarray
    shells_checked: int
    samples_per_shell: int
    tolerance: float
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": bool(self.passed),
            "worst_violation": float(self.worst_violation),
            "worst_point": [float(v) for v in np.asarray(self.worst_point).ravel()],
            "shells_checked": int(self.shells_checked),
            "samples_per_shell": int(self.samples_per_shell),
            "tolerance": float(self.tolerance),
            "notes": list(self.notes),
        }


def _power(d2: np.ndarray, p: float) -> np.ndarray:
    """||delta||**p from squared distances, exact for the common exponents."""
    if p == 2.0:
        return d2
    if p == 1.0:
        return np.sqrt(d2)
    if p == 0.0:
        return np.ones_like(d2)
    return d2 ** (p / 2.0)


def _shell_points(center: np.ndarray, plan: ShellSamplingPlan) -> np.ndarray:
    rng = stream(plan.rng_seed)
    d = center.shape[0]
    dirs = rng.standard_normal((plan.n_shells, plan.samples_per_shell, d))
    norms = np.sqrt(np.einsum("sij,sij->si", dirs, dirs))
    dirs /= norms[:, :, None]
    pts = center[None, None, :] + plan.radii()[:, None, None] * dirs
    return pts.reshape(-1, d)


def verify_dissipativity(
    problem,
    cert: DissipativityCert,
    plan: ShellSamplingPlan | None = None,
    tol: float = DEFAULT_SLACK_TOL,
) -> CertReport:
    """Sample shells around the certificate's center and check its inequality.

    ``worst_violation`` is the minimum slack
    ``<g, delta> - theta1 ||delta||^p + theta2`` over all sampled points;
    the check passes when it is >= -tol.
    """
    if plan is None:
        plan = default_plan(cert)
    if plan.r_lo < max(cert.R, 1e-3) * (1.0 - 1e-12):
        raise ValueError("plan radii must start at or above max(cert.R, 1e-3)")
    center = (
        np.zeros(problem.dim) if cert.center == "origin" else np.asarray(problem.x_star, dtype=np.float64)
    )
    pts = _shell_points(center, plan)
    grads = problem.gradient_many(pts)
    delta = pts - center[None, :]
    d2 = np.einsum("ij,ij->i", delta, delta)
    inner = np.einsum("ij,ij->i", grads, delta)
    slack = inner - cert.theta1 * _power(d2, cert.p) + cert.theta2
    i = int(np.argmin(slack))
    worst = float(slack[i])
    return CertReport(
        kind="dissipativity",
        passed=worst >= -tol,
        worst_violation=worst,
        worst_point=pts[i].copy(),
        shells_checked=plan.n_shells,
        samples_per_shell=plan.samples_per_shell,
        tolerance=tol,
    )


def verify_growth(
    problem,
    growth: GrowthCert,
    plan: ShellSamplingPlan | None = None,
    tol: float = DEFAULT_SLACK_TOL,
) -> CertReport:
    """Check ||grad f||^2 <= theta3 (1 + ||x - x*||^(2 tau)) on sampled shells."""
    if plan is None:
        plan = default_plan()
    center = np.asarray(problem.x_star, dtype=np.float64)
    pts = _shell_points(center, plan)
    grads = problem.gradient_many(pts)
    delta = pts - center[None, :]
    d2 = np.einsum("ij,ij->i", delta, delta)
    g2 = np.einsum("ij,ij->i", grads, grads)
    slack = growth.theta3 * (1.0 + _power(d2, 2.0 * growth.tau)) - g2
    i = int(np.argmin(slack))
    worst = float(slack[i])
    return CertReport(
        kind="growth",
        passed=worst >= -tol,
        worst_violation=worst,
        worst_point=pts[i].copy(),
        shells_checked=plan.n_shells,
        samples_per_shell=plan.samples_per_shell,
        tolerance=tol,
    )


def estimate_noise(
    problem,
    batch_size: int,
    probe_points: int | np.ndarray = 64,
    reps: int = 200,
    rng_seed: int = 0,
) -> NoiseCert:
    """Fit a noise certificate from sampled minibatch-gradient variances.

    At each probe point the sample variance E||g - grad f||^2 is measured over
    ``reps`` minibatch draws and regressed against ||grad f||^2.  The fitted
    slope/intercept are then inflated by max(1, 99th-percentile residual
    ratio, max residual ratio), which makes the returned envelope dominate
    every probe by construction.  A negative fitted slope is clamped to
    rho = 0 (flagged) and the intercept refit.  Batches at least as large as
    the dataset are treated as the deterministic full-batch oracle: (0, 0).
    """
    if reps < 100:
        raise ValueError("reps must be at least 100 for a stable variance fit")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    n = problem.n_samples
    if batch_size >= n:
        return NoiseCert(0.0, 0.0, flags=("full_batch",))

    rng = stream(rng_seed)
    if isinstance(probe_points, (int, np.integer)):
        n_probes = int(probe_points)
        if n_probes < 1:
            raise ValueError("need at least one probe point")
        radii = 10.0 ** rng.uniform(-1.0, 1.0, size=n_probes)
        dirs = rng.standard_normal((n_probes, problem.dim))
        dirs /= np.sqrt(np.einsum("ij,ij->i", dirs, dirs))[:, None]
        probes = np.asarray(problem.x_star, dtype=np.float64)[None, :] + radii[:, None] * dirs
    else:
        probes = np.asarray(probe_points, dtype=np.float64)
        if probes.ndim == 1:
            probes = probes[None, :]

    g2 = np.empty(len(probes))
    var = np.empty(len(probes))
    for i, x in enumerate(probes):
        gfull = problem.full_gradient(x)
        g2[i] = float(gfull @ gfull)
        acc = 0.0
        for _ in range(reps):
            idx = rng.integers(0, n, size=batch_size)
            diff = problem.minibatch_gradient(x, idx) - gfull
            acc += float(diff @ diff)
        var[i] = acc / reps

    flags: list[str] = []
    if np.max(var) == 0.0:
        return NoiseCert(0.0, 0.0, flags=("zero_variance",))

    design = np.stack([g2, np.ones_like(g2)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, var, rcond=None)
    if slope < 0.0:
        slope = 0.0
        intercept = float(np.mean(var))
        flags.append("negative_slope_clamped")
    if intercept < 0.0:
        intercept = 0.0
        flags.append("negative_intercept_clamped")
    if slope == 0.0 and intercept == 0.0:
        intercept = float(np.mean(var))
        flags.append("degenerate_fit_reset")

    pred = slope * g2 + intercept
    ratios = np.divide(var, pred, out=np.ones_like(var), where=pred > 0)
    factor = max(1.0, float(np.percentile(ratios, 99)), float(np.max(ratios)))
    return NoiseCert(float(slope * factor), float(intercept * factor), flags=tuple(flags))


def noise_envelope_check(
    problem,
    cert: NoiseCert,
    batch_size: int,
    n_points: int = 50,
    reps: int = 200,
    rng_seed: int = 1,
    confidence_z: float = 2.326,
) -> CertReport:
    """Check the fitted noise envelope at fresh points (one-sided, 99% level).

    At each point the envelope must exceed the sampled variance minus
    ``confidence_z`` standard errors; ``worst_violation`` is the minimum of
    that slack.
    """
    rng = stream(rng_seed)
    n = problem.n_samples
    radii = 10.0 ** rng.uniform(-1.0, 1.0, size=n_points)
    dirs = rng.standard_normal((n_points, problem.dim))
    dirs /= np.sqrt(np.einsum("ij,ij->i", dirs, dirs))[:, None]
    pts = np.asarray(problem.x_star, dtype=np.float64)[None, :] + radii[:, None] * dirs

    worst = math.inf
    worst_pt = pts[0]
    for x in pts:
        gfull = problem.full_gradient(x)
        samples = np.empty(reps)
        for r in range(reps):
            idx = rng.integers(0, n, size=batch_size)
            diff = problem.minibatch_gradient(x, idx) - gfull
            samples[r] = float(diff @ diff)
        mean = float(np.mean(samples))
        se = float(np.std(samples, ddof=1)) / math.sqrt(reps)
        envelope = cert.rho * float(gfull @ gfull) + cert.sigma2
        slack = envelope - (mean - confidence_z * se)
        if slack < worst:
            worst = slack
            worst_pt = x
    return CertReport(
        kind="noise",
        passed=worst >= 0.0,
        worst_violation=worst,
        worst_point=np.asarray(worst_pt).copy(),
        shells_checked=n_points,
        samples_per_shell=reps,
        tolerance=0.0,
    )


# ---------------------------------------------------------------------------
# certificate conversions


def convert_origin_form(
    theta1p: float, theta2p: float, L: float, x_star_norm: float
) -> DissipativityCert:
    """Rewrite an origin-centered quadratic certificate around the optimum.

    Input: <grad f(x), x> >= theta1p ||x||^2 - theta2p together with
    ||grad f(x)|| <= L ||x - x*||.  Output constants:
    theta1 = theta1p / 2,
    theta2 = (theta1p + 2L + L^2/(2 theta1p)) ||x*||^2 + theta2p.
    """
    if theta1p <= 0:
        raise ValueError("theta1p must be positive")
    if L <= 0:
        raise ValueError("L must be positive")
    if x_star_norm < 0:
        raise ValueError("x_star_norm must be non-negative")
    theta1 = theta1p / 2.0
    theta2 = (theta1p + 2.0 * L + L**2 / (2.0 * theta1p)) * x_star_norm**2 + theta2p
    return DissipativityCert(theta1=theta1, theta2=theta2, R=0.0, p=2.0, center="optimum")


def convert_generalized(
    theta1p: float,
    theta2p: float,
    theta3: float,
    tau: float,
    p: float,
    x_star_norm: float,
) -> DissipativityCert:
    """Rewrite an origin-centered sub-quadratic (p < 2) certificate around x*.

    Input: <grad f(x), x> >= theta1p ||x||^p - theta2p together with the
    growth bound ||grad f(x)||^2 <= theta3 (1 + ||x - x*||^(2 tau)), tau < p.
    Output: theta1 = theta1p / 2**(p+1), R = max(2 ||x*||, 1), and

        theta2 = theta2p + ||x*||^alpha2 / (s^alpha2 * alpha2),
        alpha2 = p / (p - tau),
        s = (theta1p * p / (tau * 2**(p+1)))**(tau/p) / sqrt(2 theta3),

    with the tau -> 0 limit theta2 = theta2p + sqrt(2 theta3) ||x*||.
    Certificates with tau in (p/2, p) are valid but flagged: they fall outside
    the hypotheses of the sub-quadratic uniform-bound formulas.
    """
    if not (0.0 < p < 2.0):
        raise ValueError("p must lie in (0, 2)")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if tau >= p:
        raise ValueError("conversion requires tau < p")
    if theta1p <= 0 or theta3 <= 0:
        raise ValueError("theta1p and theta3 must be positive")
    if x_star_norm < 0:
        raise ValueError("x_star_norm must be non-negative")

    theta1 = theta1p / 2.0 ** (p + 1.0)
    if tau == 0.0:
        theta2 = theta2p + math.sqrt(2.0 * theta3) * x_star_norm
    else:
        alpha2 = p / (p - tau)
        s = (theta1p * p / (tau * 2.0 ** (p + 1.0))) ** (tau / p) / math.sqrt(2.0 * theta3)
        theta2 = theta2p + x_star_norm**alpha2 / (s**alpha2 * alpha2)
    R = max(2.0 * x_star_norm, 1.0)
    flags: tuple[str, ...] = ()
    if tau > p / 2.0:
        flags = ("tau_exceeds_half_p_outside_uniform_bound_hypotheses",)
    return DissipativityCert(theta1=theta1, theta2=theta2, R=R, p=p, center="optimum", flags=flags)
