"""Numpy simulation kernel, vectorized across seeds.

Simulates SGD / momentum-SGD for the vector (non-network) problem kinds,
recording per-iterate scalar series.  All reductions are ``einsum`` over the
trailing axis (per-lane, fixed accumulation order), so a batched run is
bitwise identical lane-by-lane to a single-seed run, and every run is bitwise
reproducible.

The per-seed random inputs (minibatch row indices, additive noise) are
pre-generated by the caller; this module never touches an RNG.
"""

from __future__ import annotations

import numpy as np

from . import problems as P

__all__ = ["KERNEL_KINDS", "ORACLE_CODES", "DIVERGENCE_GUARD", "simulate_numpy"]

# Vector kinds with a dedicated kernel; the network kinds use the generic path.
KERNEL_KINDS = (
    P.KIND_LEAST_SQUARES,
    P.KIND_PHASE_RETRIEVAL,
    P.KIND_HEAVY_TAIL,
    P.KIND_BLAKE_ZISSERMAN,
    P.KIND_L2_LOGISTIC,
    P.KIND_L1_LOGISTIC,
)

ORACLE_CODES = {"minibatch": 0, "additive": 1, "full": 2}

DIVERGENCE_GUARD = 1e12


def _psi_rows(kind: int, U: np.ndarray, B: np.ndarray, nu: float) -> np.ndarray:
    """Per-sample d(loss)/d(u) on gathered rows; U and B are (S, b)."""
    if kind == P.KIND_LEAST_SQUARES:
        return U - B
    if kind == P.KIND_PHASE_RETRIEVAL:
        return U - B * np.sign(U)
    if kind == P.KIND_HEAVY_TAIL:
        R = B - U
        return -R / (1.0 + R * R)
    if kind == P.KIND_BLAKE_ZISSERMAN:
        R = B - U
        E = np.exp(-(R * R))
        return -R * E / (nu + E)
    # logistic kinds
    return -B * P._sigmoid(-B * U)


def _add_reg(kind: int, X: np.ndarray, lam: float, G: np.ndarray) -> np.ndarray:
    if kind in (P.KIND_HEAVY_TAIL, P.KIND_BLAKE_ZISSERMAN):
        return G + lam * X
    if kind == P.KIND_L2_LOGISTIC:
        return G + 2.0 * lam * X
    if kind == P.KIND_L1_LOGISTIC:
        return G + lam * np.sign(X)
    return G


def _minibatch_grad(
    problem: P.Problem, X: np.ndarray, rows: np.ndarray
) -> np.ndarray:
    """Gradient estimate from per-seed row indices: X (S, d), rows (S, b)."""
    Ab = problem.A[rows]  # (S, b, d)
    Bb = problem.b[rows]  # (S, b)
    U = np.einsum("sbd,sd->sb", Ab, X)
    psi = _psi_rows(problem.kind_id, U, Bb, problem.params.get("nu", 0.0))
    G = np.einsum("sb,sbd->sd", psi, Ab) * (problem.grad_scale / rows.shape[1])
    return _add_reg(problem.kind_id, X, problem.params.get("lam", 0.0), G)


def simulate_numpy(
    problem: P.Problem,
    etas_full: np.ndarray,
    beta: float,
    X0: np.ndarray,
    idx: np.ndarray | None,
    noise: np.ndarray | None,
    oracle: str,
    guard: float = DIVERGENCE_GUARD,
):
    """Run S trajectories in lockstep for T steps.

    ``etas_full`` has length T+2 with entries 1..T holding the step sizes
    (index 0 and T+1 are NaN).  ``X0`` is (S, d); ``idx`` is (S, T+1, b) row
    indices for the minibatch oracle; ``noise`` is (S, T+1, d) pre-scaled
    additive perturbations.  ``beta`` = 0 gives plain SGD bit-for-bit.

    Returns ``(dist2, fgap, dxn2, xt2, diverged_at, X)`` where the four stat
    arrays are (S, T+2) with column 0 NaN and columns past a lane's
    divergence point NaN; ``diverged_at`` is (S,) with -1 for clean lanes;
    ``X`` is the final iterate per lane (frozen at divergence).
    """
    S, d = X0.shape
    T = etas_full.shape[0] - 2
    kind = problem.kind_id
    xs = problem.x_star
    mirror = problem.mirror_center

    dist2 = np.full((S, T + 2), np.nan)
    fgap = np.full((S, T + 2), np.nan)
    dxn2 = np.full((S, T + 2), np.nan)
    xt2 = np.full((S, T + 2), np.nan)
    diverged_at = np.full(S, -1, dtype=np.int64)

    X = X0.astype(np.float64, copy=True)
    Xprev = X.copy()
    V = np.zeros_like(X)
    alive = np.ones(S, dtype=bool)

    with np.errstate(all="ignore"):
        for k in range(1, T + 2):
            D = X - xs[None, :]
            d2 = np.einsum("sd,sd->s", D, D)
            if mirror:
                Dm = X + xs[None, :]
                d2m = np.einsum("sd,sd->s", Dm, Dm)
                sign = np.where(d2m < d2, -1.0, 1.0)
                d2 = np.minimum(d2, d2m)
            else:
                sign = None
            f = P._objective_many(problem, X, problem.A, problem.b) - problem.f_star
            if beta > 0.0:
                Xt = (X - beta * Xprev) / (1.0 - beta)
            else:
                Xt = X
            Dt = Xt - xs[None, :] if sign is None else Xt - sign[:, None] * xs[None, :]
            x2 = np.einsum("sd,sd->s", Dt, Dt)
            Dx = X - Xprev
            dx2 = np.einsum("sd,sd->s", Dx, Dx)

            rec = alive
            dist2[rec, k] = d2[rec]
            fgap[rec, k] = f[rec]
            xt2[rec, k] = x2[rec]
            dxn2[rec, k] = dx2[rec]

            newly_dead = alive & ~(np.isfinite(d2) & (d2 <= guard))
            if newly_dead.any():
                diverged_at[newly_dead] = k
                alive = alive & ~newly_dead
            if k == T + 1 or not alive.any():
                break

            if oracle == "minibatch":
                G = _minibatch_grad(problem, X, idx[:, k, :])
            else:
                G = P._gradient_many(problem, X, problem.A, problem.b, with_reg=True)
                if oracle == "additive":
                    G = G + noise[:, k, :]

            V = beta * V + (1.0 - beta) * G
            Xn = X - etas_full[k] * V
            if not alive.all():
                Xn = np.where(alive[:, None], Xn, X)
            Xprev = X
            X = Xn

    return dist2, fgap, dxn2, xt2, diverged_at, X
