"""Model problems with minibatch gradient oracles and attached certificates.

Each problem is a finite-sum objective over feature rows ``A`` (n x q) and
targets ``b`` (n,), plus an optional regularizer.  All problems expose:

* ``full_objective`` / ``full_gradient`` — deterministic, vectorized;
* ``minibatch_gradient(x, idx)`` — mean of the per-sample gradients over the
  given index batch (sampled uniformly with replacement by callers) plus the
  full regularizer gradient; unbiased for ``full_gradient``;
* an optimum ``x_star`` with value ``f_star`` (closed form or numerically
  resolved) and a dissipativity certificate centered per ``cert.center``.

At nondifferentiable kinks the minimum-norm subgradient element is chosen:
0 for |.| and ReLU at the kink, sign(0) = 0 for the l1 term.

Implemented objectives (``kind_id``):

0. least squares             f(x) = 1/2 ||P x - b||^2
1. phase retrieval           f(x) = 1/(2n) sum (|<a_i,x>| - b_i)^2
2. heavy-tail regression MLE f(x) = 1/(2n) sum log(1+(b_i-<a_i,x>)^2) + lam/2 ||x||^2
3. Blake-Zisserman MLE       f(x) = -1/(2n) sum log(nu+exp(-(b_i-<a_i,x>)^2)) + lam/2 ||x||^2
4. l2-regularized logistic   f(x) = 1/n sum log(1+exp(-b_i <a_i,x>)) + lam ||x||^2
5. l1-regularized logistic   f(x) = 1/n sum log(1+exp(-b_i <a_i,x>)) + lam ||x||_1
6. two-layer net, ReLU       f(X) = 1/n sum log(1+exp(-b_j u_j(X))) + lam/2 ||X||^2
7. two-layer net, sigmoid    (same with sigmoid inner activation)

For the two-layer networks the feature rows are bias-augmented (a -> [a, 1]),
the parameter vector X = [vec(X1), X2] stacks the m x (d+1) hidden weights and
the m output weights, and u_j = X2 . sigma(X1 @ a_j).

Synthetic instances (``synth_*``) pair every drawn row (a, b) with its mirror
(a, -b).  This makes the data term even, so the regularized objectives have
the exact optimum 0 (the paired per-sample gradients cancel in floating point)
and the logistic-family optimum value is exactly log(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._seeds import child_stream
from .certify import DissipativityCert, GrowthCert

KIND_LEAST_SQUARES = 0
KIND_PHASE_RETRIEVAL = 1
KIND_HEAVY_TAIL = 2
KIND_BLAKE_ZISSERMAN = 3
KIND_L2_LOGISTIC = 4
KIND_L1_LOGISTIC = 5
KIND_NN_RELU = 6
KIND_NN_SIGMOID = 7

KIND_NAMES = (
    "least_squares",
    "phase_retrieval",
    "heavy_tail_mle",
    "blake_zisserman",
    "l2_logistic",
    "logistic_l1",
    "two_layer_nn_relu",
    "two_layer_nn_sigmoid",
)


class KinkProximityError(ValueError):
    """Raised when a finite-difference stencil would straddle a kink."""


def _sigmoid(z: np.ndarray) -> np.ndarray:
    """1/(1+exp(-z)) computed without overflow."""
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError("feature matrix must be 2-d and non-empty")
    return A


def _as_vector(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.shape[0] != n:
        raise ValueError("label vector length must match the number of rows")
    return b


def _check_labels(b: np.ndarray) -> np.ndarray:
    """Accept {-1,+1} or {0,1} labels; return the {-1,+1} encoding."""
    vals = set(np.unique(b).tolist())
    if vals <= {-1.0, 1.0}:
        return b
    if vals <= {0.0, 1.0}:
        return 2.0 * b - 1.0
    raise ValueError("labels must be in {-1,+1} (or {0,1}, converted on ingestion)")


def _full_rank_spectrum(A: np.ndarray, what: str) -> np.ndarray:
    evs = np.linalg.eigvalsh(A.T @ A)
    if evs[0] <= evs[-1] * 1e-12 or evs[0] <= 0.0:
        raise ValueError(f"{what} must have full column rank")
    return evs


@dataclass(frozen=True, eq=False)
class Problem:
    """Immutable finite-sum problem with oracle, optimum, and certificates.

    ``A``/``b``/``x_star`` are owned by the instance and must not be mutated.
    ``grad_scale`` multiplies the minibatch mean of per-sample data gradients
    (n for the sum-form least squares, 1 for mean-form objectives).
    ``L_kind`` is "smooth" when ``L`` is a gradient-Lipschitz constant and
    "linear_growth" when it is a coarse constant with ||grad f(x)|| <=
    L (1 + ||x||).  ``mirror_center`` marks sign-symmetric problems whose
    distances are measured to the nearer of {x_star, -x_star}.
    """

    name: str
    kind_id: int
    dim: int
    A: np.ndarray
    b: np.ndarray
    params: dict
    grad_scale: float
    x_star: np.ndarray
    f_star: float
    L: float
    L_kind: str
    cert: DissipativityCert
    growth: GrowthCert | None = None
    grad_bound: float | None = None
    mirror_center: bool = False
    opt_grad_norm: float = 0.0

    @property
    def n_samples(self) -> int:
        return self.A.shape[0]

    # -- distances ---------------------------------------------------------

    def dist2(self, x: np.ndarray) -> float:
        return float(self.dist2_many(np.asarray(x, dtype=np.float64)[None, :])[0])

    def dist2_many(self, X: np.ndarray) -> np.ndarray:
        D = X - self.x_star[None, :]
        d2 = np.einsum("ij,ij->i", D, D)
        if self.mirror_center:
            Dm = X + self.x_star[None, :]
            d2 = np.minimum(d2, np.einsum("ij,ij->i", Dm, Dm))
        return d2

    # -- objective / gradient ----------------------------------------------

    def full_objective(self, x: np.ndarray) -> float:
        return float(self.objective_many(np.asarray(x, dtype=np.float64)[None, :])[0])

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradient_many(np.asarray(x, dtype=np.float64)[None, :])[0]

    def objective_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return _objective_many(self, X, self.A, self.b)

    def gradient_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return _gradient_many(self, X, self.A, self.b, with_reg=True)

    def minibatch_gradient(self, x: np.ndarray, batch_indices) -> np.ndarray:
        idx = np.asarray(batch_indices, dtype=np.int64).ravel()
        if idx.size < 1:
            raise ValueError("batch must contain at least one index")
        x = np.asarray(x, dtype=np.float64)
        return _gradient_many(self, x[None, :], self.A[idx], self.b[idx], with_reg=True)[0]

    # -- kinks ---------------------------------------------------------------

    def kink_margin(self, x: np.ndarray) -> float:
        """Distance (in per-coordinate perturbation units) to the nearest kink.

        Returns inf for everywhere-smooth objectives.  A central-difference
        stencil with step h is safe when h is well below this margin.
        """
        x = np.asarray(x, dtype=np.float64)
        k = self.kind_id
        if k in (KIND_LEAST_SQUARES, KIND_HEAVY_TAIL, KIND_BLAKE_ZISSERMAN, KIND_L2_LOGISTIC, KIND_NN_SIGMOID):
            return math.inf
        if k == KIND_PHASE_RETRIEVAL:
            u = self.A @ x
            return float(np.min(np.abs(u)) / max(np.max(np.abs(self.A)), 1e-30))
        if k == KIND_L1_LOGISTIC:
            return float(np.min(np.abs(x)))
        # ReLU net: kinks where a hidden pre-activation crosses 0
        width = int(self.params["width"])
        q = self.A.shape[1]
        X1 = x[: width * q].reshape(width, q)
        Z = self.A @ X1.T
        return float(np.min(np.abs(Z)) / max(np.max(np.abs(self.A)), 1e-30))


# ---------------------------------------------------------------------------
# vectorized objective / gradient dispatch


def _nn_unpack(problem: Problem, X: np.ndarray):
    width = int(problem.params["width"])
    q = problem.A.shape[1]
    m = X.shape[0]
    X1 = X[:, : width * q].reshape(m, width, q)
    X2 = X[:, width * q :]
    return X1, X2, width, q


def _nn_forward(problem: Problem, X: np.ndarray, A: np.ndarray):
    X1, X2, _, _ = _nn_unpack(problem, X)
    Z = np.einsum("mwq,nq->mnw", X1, A)
    if problem.kind_id == KIND_NN_RELU:
        H = np.maximum(Z, 0.0)
        Hp = (Z > 0.0).astype(np.float64)
    else:
        H = _sigmoid(Z)
        Hp = H * (1.0 - H)
    U = np.einsum("mnw,mw->mn", H, X2)
    return X1, X2, Z, H, Hp, U


def _objective_many(problem: Problem, X: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = problem.kind_id
    lam = problem.params.get("lam", 0.0)
    if k in (KIND_NN_RELU, KIND_NN_SIGMOID):
        _, _, _, _, _, U = _nn_forward(problem, X, A)
        loss = np.mean(np.logaddexp(0.0, -b[None, :] * U), axis=1)
        return loss + 0.5 * lam * np.einsum("ij,ij->i", X, X)

    U = np.einsum("md,nd->mn", X, A)
    if k == KIND_LEAST_SQUARES:
        Rm = U - b[None, :]
        return 0.5 * np.einsum("mn,mn->m", Rm, Rm)
    if k == KIND_PHASE_RETRIEVAL:
        Rm = np.abs(U) - b[None, :]
        return np.einsum("mn,mn->m", Rm, Rm) / (2.0 * A.shape[0])
    if k == KIND_HEAVY_TAIL:
        Rm = b[None, :] - U
        return 0.5 * np.mean(np.log1p(Rm * Rm), axis=1) + 0.5 * lam * np.einsum("ij,ij->i", X, X)
    if k == KIND_BLAKE_ZISSERMAN:
        nu = problem.params["nu"]
        Rm = b[None, :] - U
        return -0.5 * np.mean(np.log(nu + np.exp(-(Rm * Rm))), axis=1) + 0.5 * lam * np.einsum(
            "ij,ij->i", X, X
        )
    if k == KIND_L2_LOGISTIC:
        loss = np.mean(np.logaddexp(0.0, -b[None, :] * U), axis=1)
        return loss + lam * np.einsum("ij,ij->i", X, X)
    if k == KIND_L1_LOGISTIC:
        loss = np.mean(np.logaddexp(0.0, -b[None, :] * U), axis=1)
        return loss + lam * np.sum(np.abs(X), axis=1)
    raise ValueError(f"unknown kind_id {k}")


def _psi(problem: Problem, U: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-sample scalar d(loss_i)/d(u_i) for the linear-model objectives."""
    k = problem.kind_id
    if k == KIND_LEAST_SQUARES:
        return U - b[None, :]
    if k == KIND_PHASE_RETRIEVAL:
        return U - b[None, :] * np.sign(U)
    if k == KIND_HEAVY_TAIL:
        Rm = b[None, :] - U
        return -Rm / (1.0 + Rm * Rm)
    if k == KIND_BLAKE_ZISSERMAN:
        nu = problem.params["nu"]
        Rm = b[None, :] - U
        E = np.exp(-(Rm * Rm))
        return -Rm * E / (nu + E)
    if k in (KIND_L2_LOGISTIC, KIND_L1_LOGISTIC):
        return -b[None, :] * _sigmoid(-b[None, :] * U)
    raise ValueError(f"unknown kind_id {k}")


def _gradient_many(
    problem: Problem, X: np.ndarray, A: np.ndarray, b: np.ndarray, with_reg: bool
) -> np.ndarray:
    k = problem.kind_id
    lam = problem.params.get("lam", 0.0)
    n = A.shape[0]

    if k in (KIND_NN_RELU, KIND_NN_SIGMOID):
        X1, X2, _, H, Hp, U = _nn_forward(problem, X, A)
        S = -b[None, :] * _sigmoid(-b[None, :] * U)  # (m, n)
        g2 = np.einsum("mn,mnw->mw", S, H) / n
        W = S[:, :, None] * Hp * X2[:, None, :]  # (m, n, w)
        g1 = np.einsum("mnw,nq->mwq", W, A) / n
        grad = np.concatenate([g1.reshape(X.shape[0], -1), g2], axis=1)
        if with_reg:
            grad = grad + lam * X
        return grad

    U = np.einsum("md,nd->mn", X, A)
    psi = _psi(problem, U, b)
    # single rounding: grad_scale/n is exactly 1.0 for the sum-form full batch
    grad = np.einsum("mn,nd->md", psi, A) * (problem.grad_scale / n)
    if with_reg:
        if k in (KIND_HEAVY_TAIL, KIND_BLAKE_ZISSERMAN):
            grad = grad + lam * X
        elif k == KIND_L2_LOGISTIC:
            grad = grad + 2.0 * lam * X
        elif k == KIND_L1_LOGISTIC:
            grad = grad + lam * np.sign(X)
    return grad


# ---------------------------------------------------------------------------
# finite differences and smooth-point sampling


def finite_diff_gradient(problem: Problem, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, refusing stencils that straddle a kink."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    margin = problem.kink_margin(x)
    if margin <= 4.0 * h:
        raise KinkProximityError(
            f"kink margin {margin:.3e} is within 4h of the stencil (h={h:.1e})"
        )
    d = problem.dim
    steps = h * np.eye(d)
    F = problem.objective_many(np.concatenate([x[None, :] + steps, x[None, :] - steps]))
    return (F[:d] - F[d:]) / (2.0 * h)


def sample_smooth_point(
    problem: Problem,
    rng: np.random.Generator,
    scale: float = 1.0,
    min_grad_norm: float = 1e-2,
    min_kink_margin: float = 1e-3,
    max_tries: int = 1000,
) -> np.ndarray:
    """Draw a point that is far from kinks and has a non-negligible gradient."""
    for _ in range(max_tries):
        x = problem.x_star + scale * rng.standard_normal(problem.dim)
        if problem.kink_margin(x) <= min_kink_margin:
            continue
        g = problem.full_gradient(x)
        if float(np.sqrt(g @ g)) >= min_grad_norm:
            return x
    raise RuntimeError("could not sample a smooth point with the requested margins")


# ---------------------------------------------------------------------------
# optimum resolution


def resolve_optimum(
    problem: Problem,
    x0: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iters: int = 1_000_000,
) -> tuple[np.ndarray, float]:
    """Full-batch descent to a stationary point; returns (x, residual_norm).

    Smooth problems use gradient descent with Armijo backtracking.  The
    l1-regularized logistic problem uses proximal gradient steps on the smooth
    part (soft-thresholding the l1 term); its residual is the proximal-map
    displacement divided by the step, which vanishes exactly at optima.
    Raises RuntimeError instead of returning a silent approximation when the
    budget is exhausted.
    """
    x = np.zeros(problem.dim) if x0 is None else np.asarray(x0, dtype=np.float64).copy()

    if problem.kind_id == KIND_L1_LOGISTIC:
        lam = problem.params["lam"]
        evs = np.linalg.eigvalsh(problem.A.T @ problem.A)
        step = 1.0 / max(evs[-1] / (4.0 * problem.n_samples), 1e-12)
        for _ in range(max_iters):
            g_smooth = _gradient_many(problem, x[None, :], problem.A, problem.b, with_reg=False)[0]
            z = x - step * g_smooth
            x_next = np.sign(z) * np.maximum(np.abs(z) - step * lam, 0.0)
            residual = float(np.linalg.norm(x - x_next)) / step
            x = x_next
            if residual <= tol:
                return x, residual
        raise RuntimeError("proximal descent did not reach the requested tolerance")

    f = problem.full_objective(x)
    step = 1.0 / max(problem.L, 1e-12)
    for _ in range(max_iters):
        g = problem.full_gradient(x)
        gnorm = float(np.sqrt(g @ g))
        if gnorm <= tol:
            return x, gnorm
        eta = step
        for _ in range(60):
            x_try = x - eta * g
            f_try = problem.full_objective(x_try)
            if f_try <= f - 0.5 * eta * gnorm * gnorm:
                break
            eta *= 0.5
        else:
            # No Armijo progress at machine scale: treat as stagnation at a kink.
            return x, gnorm
        x, f = x_try, f_try
    raise RuntimeError("gradient descent did not reach the requested tolerance")


# ---------------------------------------------------------------------------
# constructors


def least_squares(P, b) -> Problem:
    """Sum-form least squares with cert theta1 = lambda_min(P^T P)."""
    P = _as_matrix(P)
    b = _as_vector(b, P.shape[0])
    evs = _full_rank_spectrum(P, "P")
    x_star = np.linalg.solve(P.T @ P, P.T @ b)
    r = P @ x_star - b
    grad_norm = float(np.linalg.norm(P.T @ r))
    cert = DissipativityCert(theta1=float(evs[0]), theta2=0.0, R=0.0, p=2.0)
    return Problem(
        name="least_squares",
        kind_id=KIND_LEAST_SQUARES,
        dim=P.shape[1],
        A=P,
        b=b,
        params={},
        grad_scale=float(P.shape[0]),
        x_star=x_star,
        f_star=float(0.5 * r @ r),
        L=float(evs[-1]),
        L_kind="smooth",
        cert=cert,
        opt_grad_norm=grad_norm,
    )


def phase_retrieval(A, b, planted: np.ndarray | None = None) -> Problem:
    """Magnitude-measurement fit; cert centered at the origin.

    The gradient satisfies ||grad f(x)|| <= (lambda_max(A^T A)/n) * D(x)
    exactly, where D is the distance to the nearer of {x*, -x*}: componentwise
    |u_i - b_i sign(u_i)| <= |u_i - <a_i, x_plant>| when b = |A x_plant|.
    """
    A = _as_matrix(A)
    b = _as_vector(b, A.shape[0])
    if np.any(b < 0):
        raise ValueError("phase retrieval magnitudes must be non-negative")
    evs = _full_rank_spectrum(A, "A")
    n = A.shape[0]
    cert = DissipativityCert(
        theta1=float(evs[0] / (2.0 * n)),
        theta2=float(b @ b / (2.0 * n)),
        R=0.0,
        p=2.0,
        center="origin",
    )
    prob = Problem(
        name="phase_retrieval",
        kind_id=KIND_PHASE_RETRIEVAL,
        dim=A.shape[1],
        A=A,
        b=b,
        params={},
        grad_scale=1.0,
        x_star=np.zeros(A.shape[1]),
        f_star=0.0,
        L=float(evs[-1] / n),
        L_kind="linear_growth",
        cert=cert,
        mirror_center=True,
    )
    x0 = planted if planted is not None else np.zeros(A.shape[1])
    x_star, res = resolve_optimum(prob, x0=np.asarray(x0, dtype=np.float64), tol=1e-6)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def heavy_tail_mle(A, b, lam: float) -> Problem:
    """Regularized MLE for heavy-tailed linear regression; cert (lam, mean|b|)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    A = _as_matrix(A)
    b = _as_vector(b, A.shape[0])
    n = A.shape[0]
    cert = DissipativityCert(theta1=float(lam), theta2=float(np.mean(np.abs(b))), R=0.0, p=2.0)
    L = float(lam + np.einsum("ij,ij->", A, A) / n)  # |phi''| <= 1 for phi = log(1+r^2)/2
    prob = Problem(
        name="heavy_tail_mle",
        kind_id=KIND_HEAVY_TAIL,
        dim=A.shape[1],
        A=A,
        b=b,
        params={"lam": float(lam)},
        grad_scale=1.0,
        x_star=np.zeros(A.shape[1]),
        f_star=0.0,
        L=L,
        L_kind="smooth",
        cert=cert,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def _bz_curvature_envelope(nu: float) -> float:
    """max_r |phi''(r)| for phi(r) = -log(nu+exp(-r^2))/2, on a dense grid."""
    r = np.linspace(0.0, 30.0, 300_001)
    E = np.exp(-(r * r))
    num = E * ((1.0 - 2.0 * r * r) * nu + E)
    den = (nu + E) ** 2
    return float(np.max(np.abs(num / den))) * 1.02


def blake_zisserman(A, b, lam: float, nu: float) -> Problem:
    """Blake-Zisserman MLE; cert (lam, mean|b| / (2 sqrt(nu(nu+1))))."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if nu <= 0:
        raise ValueError("nu must be positive")
    A = _as_matrix(A)
    b = _as_vector(b, A.shape[0])
    n = A.shape[0]
    theta2 = float(np.mean(np.abs(b)) / (2.0 * math.sqrt(nu * (nu + 1.0))))
    cert = DissipativityCert(theta1=float(lam), theta2=theta2, R=0.0, p=2.0)
    L = float(lam + _bz_curvature_envelope(nu) * np.einsum("ij,ij->", A, A) / n)
    prob = Problem(
        name="blake_zisserman",
        kind_id=KIND_BLAKE_ZISSERMAN,
        dim=A.shape[1],
        A=A,
        b=b,
        params={"lam": float(lam), "nu": float(nu)},
        grad_scale=1.0,
        x_star=np.zeros(A.shape[1]),
        f_star=0.0,
        L=L,
        L_kind="smooth",
        cert=cert,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def logistic_base(A, b) -> Problem:
    """Unregularized logistic loss; carries the gradient bound G = max ||a_i||.

    Its trivial certificate (theta1 = 0, theta2 = 0) just restates convexity;
    the problem exists to be wrapped by ``l2_regularized_bounded_grad``.  With
    separable data the infimum may not be attained, so the optimum is resolved
    with a bounded budget and may carry a loose residual.
    """
    A = _as_matrix(A)
    b = _check_labels(_as_vector(b, A.shape[0]))
    n = A.shape[0]
    G = float(np.max(np.sqrt(np.einsum("ij,ij->i", A, A))))
    evs = np.linalg.eigvalsh(A.T @ A)
    prob = Problem(
        name="logistic_base",
        kind_id=KIND_L2_LOGISTIC,
        dim=A.shape[1],
        A=A,
        b=b,
        params={"lam": 0.0},
        grad_scale=1.0,
        x_star=np.zeros(A.shape[1]),
        f_star=math.log(2.0),
        L=float(max(evs[-1] / (4.0 * n), 1e-12)),
        L_kind="smooth",
        cert=DissipativityCert(theta1=0.0, theta2=0.0, R=0.0, p=2.0),
        grad_bound=G,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6, max_iters=50_000)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def l2_regularized_bounded_grad(base: Problem, lam: float) -> Problem:
    """Add lam ||x||^2 to a bounded-gradient base; cert (lam/2, G/(2 lam))."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if base.grad_bound is None:
        raise ValueError("base problem must carry a gradient-norm bound G")
    if base.kind_id != KIND_L2_LOGISTIC:
        raise ValueError("only logistic bases are supported")
    G = base.grad_bound
    cert = DissipativityCert(theta1=float(lam / 2.0), theta2=float(G / (2.0 * lam)), R=0.0, p=2.0)
    prob = replace(
        base,
        name="l2_logistic",
        params={"lam": float(lam)},
        L=float(base.L + 2.0 * lam),
        cert=cert,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def logistic_l1(A, b, lam: float) -> Problem:
    """l1-regularized logistic regression; sub-quadratic cert (lam, 1/2, p=1).

    The attached growth certificate theta3 = (2/n)(sum ||a_i||^2 + lam^2 d),
    tau = 0 bounds the squared (sub)gradient norm by a constant.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    A = _as_matrix(A)
    b = _check_labels(_as_vector(b, A.shape[0]))
    n, d = A.shape
    cert = DissipativityCert(theta1=float(lam), theta2=0.5, R=0.0, p=1.0)
    theta3 = float(2.0 / n * (np.einsum("ij,ij->", A, A) + lam * lam * d))
    growth = GrowthCert(theta3=theta3, tau=0.0)
    L = float(np.mean(np.sqrt(np.einsum("ij,ij->i", A, A))) + lam * math.sqrt(d))
    prob = Problem(
        name="logistic_l1",
        kind_id=KIND_L1_LOGISTIC,
        dim=d,
        A=A,
        b=b,
        params={"lam": float(lam)},
        grad_scale=1.0,
        x_star=np.zeros(d),
        f_star=math.log(2.0),
        L=L,
        L_kind="linear_growth",
        cert=cert,
        growth=growth,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


def two_layer_nn(A, b, width: int, lam: float, activation: str = "relu") -> Problem:
    """Two-layer binary classifier over flattened weights X = [vec(X1), X2].

    Feature rows are bias-augmented internally (a -> [a, 1]).  Origin-centered
    certificates: ReLU inner activation gives (lam, 2); sigmoid gives
    (lam/2, 1 + width/(2 lam)).
    """
    if width < 1:
        raise ValueError("width must be at least 1")
    if lam <= 0:
        raise ValueError("lam must be positive")
    if activation not in ("relu", "sigmoid"):
        raise ValueError("activation must be 'relu' or 'sigmoid'")
    A = _as_matrix(A)
    b = _check_labels(_as_vector(b, A.shape[0]))
    Aaug = np.concatenate([A, np.ones((A.shape[0], 1))], axis=1)
    q = Aaug.shape[1]
    dim = width * q + width
    if activation == "relu":
        kind = KIND_NN_RELU
        cert = DissipativityCert(theta1=float(lam), theta2=2.0, R=0.0, p=2.0, center="origin")
    else:
        kind = KIND_NN_SIGMOID
        cert = DissipativityCert(
            theta1=float(lam / 2.0),
            theta2=float(1.0 + width / (2.0 * lam)),
            R=0.0,
            p=2.0,
            center="origin",
        )
    max_row = float(np.max(np.sqrt(np.einsum("ij,ij->i", Aaug, Aaug))))
    L = float(lam + math.sqrt(2.0) * max_row + (math.sqrt(width) if activation == "sigmoid" else 0.0))
    prob = Problem(
        name=f"two_layer_nn_{activation}",
        kind_id=kind,
        dim=dim,
        A=Aaug,
        b=b,
        params={"lam": float(lam), "width": int(width)},
        grad_scale=1.0,
        x_star=np.zeros(dim),
        f_star=math.log(2.0),
        L=L,
        L_kind="linear_growth",
        cert=cert,
    )
    x_star, res = resolve_optimum(prob, tol=1e-6, max_iters=50_000)
    return replace(prob, x_star=x_star, f_star=prob.full_objective(x_star), opt_grad_norm=res)


# ---------------------------------------------------------------------------
# synthetic instances (label-symmetrized so the resolved optimum is exact)


def _paired(rng: np.random.Generator, n: int, d: int, unit_rows: bool, labels: str):
    """Draw n/2 rows and mirror them with negated labels; n must be even."""
    if n % 2 != 0:
        raise ValueError("n must be even for a label-symmetrized instance")
    half = n // 2
    Ah = rng.standard_normal((half, d))
    if unit_rows:
        Ah /= np.sqrt(np.einsum("ij,ij->i", Ah, Ah))[:, None]
    bh = np.ones(half) if labels == "binary" else rng.standard_normal(half)
    A = np.concatenate([Ah, Ah], axis=0)
    b = np.concatenate([bh, -bh])
    return A, b


def synth_least_squares(n: int = 20, d: int = 5, seed: int = 0) -> Problem:
    rng = child_stream(seed, 0)
    P = rng.standard_normal((n, d)) / math.sqrt(d)
    b = rng.standard_normal(n)
    return least_squares(P, b)


def synth_phase_retrieval(n: int = 50, d: int = 10, seed: int = 0) -> Problem:
    rng = child_stream(seed, 1)
    A = rng.standard_normal((n, d))
    x_plant = rng.standard_normal(d)
    x_plant /= float(np.linalg.norm(x_plant))
    b = np.abs(A @ x_plant)
    return phase_retrieval(A, b, planted=x_plant)


def synth_heavy_tail(n: int = 100, d: int = 10, lam: float = 1.0, seed: int = 0) -> Problem:
    rng = child_stream(seed, 2)
    A, b = _paired(rng, n, d, unit_rows=True, labels="gaussian")
    return heavy_tail_mle(A, b, lam)


def synth_blake_zisserman(
    n: int = 100, d: int = 10, lam: float = 1.0, nu: float = 1.0, seed: int = 0
) -> Problem:
    rng = child_stream(seed, 3)
    A, b = _paired(rng, n, d, unit_rows=True, labels="gaussian")
    return blake_zisserman(A, b, lam, nu)


def synth_l2_logistic(n: int = 30, d: int = 5, lam: float = 0.1, seed: int = 0) -> Problem:
    rng = child_stream(seed, 4)
    A, b = _paired(rng, n, d, unit_rows=True, labels="binary")
    return l2_regularized_bounded_grad(logistic_base(A, b), lam)


def synth_logistic_l1(n: int = 100, d: int = 20, lam: float = 1.0, seed: int = 0) -> Problem:
    rng = child_stream(seed, 5)
    A, b = _paired(rng, n, d, unit_rows=False, labels="binary")
    return logistic_l1(A, b, lam)


def synth_two_layer_nn(
    n: int = 20,
    d: int = 5,
    width: int = 8,
    lam: float = 1.0,
    activation: str = "relu",
    seed: int = 0,
) -> Problem:
    rng = child_stream(seed, 6)
    A, b = _paired(rng, n, d, unit_rows=False, labels="binary")
    return two_layer_nn(A / math.sqrt(d), b, width, lam, activation)


SUITE_BUILDERS = {
    "least_squares": synth_least_squares,
    "phase_retrieval": synth_phase_retrieval,
    "heavy_tail_mle": synth_heavy_tail,
    "blake_zisserman": synth_blake_zisserman,
    "l2_logistic": synth_l2_logistic,
    "logistic_l1": synth_logistic_l1,
    "two_layer_nn_relu": lambda **kw: synth_two_layer_nn(activation="relu", **kw),
    "two_layer_nn_sigmoid": lambda **kw: synth_two_layer_nn(activation="sigmoid", **kw),
}


def build_suite(seed: int = 0) -> dict[str, Problem]:
    """The eight stock synthetic instances at their default sizes."""
    return {name: builder(seed=seed) for name, builder in SUITE_BUILDERS.items()}
