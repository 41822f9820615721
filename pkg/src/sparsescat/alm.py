"""Dual augmented Lagrangian solver with semismooth Newton inner iterations.

The dualized problem is min p*(z) + h*(y) subject to vb^T y + z = 0.
Each outer iteration drives the multiplier lam and penalty sigma; the
inner problem is reduced (via Moreau's identity) to the nonlinear
measurement-space equation

    F(y) = y + u_b - vb @ prox_p(-lam - sigma * vb^T y, sigma) = 0,

whose generalized Jacobian I + sigma/(1+sigma*alpha0) * vb X vb^T is
symmetric with eigenvalues >= 1, so every Newton step is a dense
Cholesky solve of dimension 2M (the measurement dimension, typically far
smaller than the source dimension 2N).  The source is recovered in
closed form from the converged dual variable.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .prox import (
    RegParams,
    dual_objective,
    h_star,
    p_star,
    primal_objective,
    prox_p,
    soft_threshold,
)


@dataclass
class AlmOptions:
    """Outer/inner loop parameters.

    Defaults: sigma0 = 1 with sixfold growth capped at sigma_max, Armijo
    parameters beta = 0.3 and c = 1e-4.  The inner tolerance schedule is
    eps_k = eps0/(k+1)^2 (summable) combined with the relative criterion
    delta'_k = delta_prime0/(k+1); see `solve_alm`.
    """

    sigma0: float = 1.0
    sigma_growth: float = 6.0
    sigma_max: float = 1e8
    beta: float = 0.3
    armijo_c: float = 1e-4
    eps0: float = 1e-2
    delta_prime0: float = 1.0
    max_outer: int = 12
    max_inner: int = 50
    max_backtracks: int = 30
    lam_tol: float = 1e-7
    gap_tol: float = 1e-8

    def __post_init__(self):
        if self.sigma_growth < 1:
            raise ValueError("penalty growth factor must be >= 1")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.armijo_c <= 0:
            raise ValueError("armijo constant must be positive")


@dataclass
class AlmState:
    """Iterates of the outer loop."""

    y: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    sigma: float
    outer_iter: int = 0
    inner_iters: int = 0


@dataclass
class AlmResult:
    mu: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    z: np.ndarray
    converged: bool
    stop_reason: str
    outer_iters: int
    inner_iters: int
    gap: float
    records: list = field(repr=False)
    lam_history: list = field(repr=False)


def residual_F(y, lam, sigma, vb, u_b, reg, vt_y=None):
    """Nonlinear measurement-space residual F(y)."""
    if vt_y is None:
        vt_y = vb.T @ y
    return y + u_b - vb @ prox_p(-lam - sigma * vt_y, sigma, reg)


def newton_matrix(y, lam, sigma, vb, reg, vt_y=None):
    """Generalized Jacobian I + sigma/(1+sigma*alpha0) * vb X vb^T.

    X is diagonal with unit entries exactly where |lam + sigma*vb^T y|
    exceeds sigma*alpha (ties count as inactive, keeping the matrix
    minimal); the result is symmetric positive definite with eigenvalues
    bounded below by 1.
    """
    if vt_y is None:
        vt_y = vb.T @ y
    active = np.abs(lam + sigma * vt_y) > sigma * reg.alpha
    m2 = vb.shape[0]
    nmat = np.eye(m2)
    if np.any(active):
        va = vb[:, active]
        nmat += (sigma / (1.0 + sigma * reg.alpha0)) * (va @ va.T)
    return nmat


def newton_step(y, lam, sigma, vb, u_b, reg, residual=None):
    """Solve N(y) d = -F(y) by Cholesky factorization."""
    vt_y = vb.T @ y
    if residual is None:
        residual = residual_F(y, lam, sigma, vb, u_b, reg, vt_y=vt_y)
    nmat = newton_matrix(y, lam, sigma, vb, reg, vt_y=vt_y)
    try:
        factor = cho_factor(nmat, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - signals NaN contamination
        raise RuntimeError("Newton matrix factorization failed") from exc
    return cho_solve(factor, -residual)


def lagrangian_value(y, lam, sigma, vb, u_b, reg, vt_y=None):
    """Augmented Lagrangian L_sigma(y, z; lam) with z eliminated via the Moreau split."""
    if vt_y is None:
        vt_y = vb.T @ y
    x = -sigma * vt_y - lam
    z = (x - prox_p(x, sigma, reg)) / sigma
    feas = vt_y + z
    return p_star(z, reg) + h_star(y, u_b) + float(lam @ feas) + 0.5 * sigma * float(feas @ feas)


def armijo_search(y, d, lam, sigma, vb, u_b, reg, beta=0.3, c=1e-4, max_backtracks=30):
    """Backtracking line search on the reduced augmented Lagrangian.

    Returns (step, accepted): the first step beta^t whose objective drops
    by at least c * beta^t * ||d||^2.  When no such t <= max_backtracks
    exists the smallest trial step is returned with accepted=False; the
    caller may still take it (descent holds for small steps in exact
    arithmetic, failures signal rounding noise near convergence).
    """
    dd = float(d @ d)
    if dd == 0.0:
        raise ValueError("line search requires a nonzero direction")
    base = lagrangian_value(y, lam, sigma, vb, u_b, reg)
    step = 1.0
    for _ in range(max_backtracks + 1):
        trial = lagrangian_value(y + step * d, lam, sigma, vb, u_b, reg)
        if trial <= base - c * step * dd:
            return step, True
        step *= beta
    return step / beta, False


def recover_z(y, lam, sigma, vb, reg):
    """Auxiliary variable z = M(y) from the Moreau complement of the prox."""
    x = -sigma * (vb.T @ y) - lam
    return (x - prox_p(x, sigma, reg)) / sigma


def update_multiplier(state, vb, reg, options):
    """Multiplier step lam += sigma*(vb^T y + z) and capped penalty growth."""
    state.z = recover_z(state.y, state.lam, state.sigma, vb, reg)
    state.lam = state.lam + state.sigma * (vb.T @ state.y + state.z)
    state.sigma = min(options.sigma_growth * state.sigma, options.sigma_max)
    state.outer_iter += 1
    return state


def recover_mu(y, vb, reg):
    """Primal source from the dual variable: soft-threshold of -vb^T y / alpha0."""
    if reg.alpha0 <= 0:
        raise ValueError("primal recovery needs alpha0 > 0")
    return soft_threshold(-(vb.T @ y) / reg.alpha0, reg.alpha / reg.alpha0)


def solve_alm(vb, u_b, reg, options=None, y0=None, lam0=None):
    """Run the full outer/inner iteration and recover the primal source.

    Inner Newton iterations terminate when ||F(y)|| <= eps_k/sqrt(sigma_k)
    (surrogate for the summable-accuracy criterion, valid because the
    reduced objective is 1-strongly convex) and additionally
    ||F(y)|| <= (delta'_k/sigma_k)*||sigma_k(vb^T y + z)|| (surrogate for
    the relative criterion), or at machine-precision residuals.  Outer
    iterations stop on a small relative multiplier change or a small
    primal-dual gap.
    """
    vb = np.asarray(vb, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    options = options or AlmOptions()
    m2, n2 = vb.shape
    y = np.zeros(m2) if y0 is None else np.asarray(y0, dtype=float).copy()
    lam = np.zeros(n2) if lam0 is None else np.asarray(lam0, dtype=float).copy()
    sigma = options.sigma0
    floor = 1e-13 * (1.0 + np.linalg.norm(u_b))

    records = []
    lam_history = [lam.copy()]
    inner_total = 0
    converged = False
    stop_reason = "max_outer"
    gap = np.inf
    z = np.zeros(n2)

    for k in range(options.max_outer):
        tol_a = options.eps0 / (k + 1) ** 2 / np.sqrt(sigma)
        delta_k = options.delta_prime0 / (k + 1)
        inner_stop = "max_inner"
        norm_f = tol_b2 = np.inf
        for l in range(options.max_inner + 1):
            vt_y = vb.T @ y
            resid = residual_F(y, lam, sigma, vb, u_b, reg, vt_y=vt_y)
            norm_f = np.linalg.norm(resid)
            x = -sigma * vt_y - lam
            z = (x - prox_p(x, sigma, reg)) / sigma
            lam_step = sigma * np.linalg.norm(vt_y + z)
            tol_b2 = delta_k / sigma * lam_step
            if norm_f <= floor:
                inner_stop = "floor"
                break
            if norm_f <= tol_a and norm_f <= tol_b2:
                inner_stop = "tolerance"
                break
            if l == options.max_inner:
                break
            d = newton_step(y, lam, sigma, vb, u_b, reg, residual=resid)
            step, accepted = armijo_search(
                y, d, lam, sigma, vb, u_b, reg,
                beta=options.beta, c=options.armijo_c, max_backtracks=options.max_backtracks,
            )
            if not accepted:
                warnings.warn("line search exhausted; taking smallest trial step", RuntimeWarning)
            y = y + step * d
            inner_total += 1
            records.append({
                "solver": "alm", "kind": "inner", "outer": k, "inner": l,
                "residual": float(norm_f), "objective": lagrangian_value(y, lam, sigma, vb, u_b, reg),
                "step": float(step), "sigma": float(sigma),
            })
        z = recover_z(y, lam, sigma, vb, reg)
        feas = vb.T @ y + z
        lam_new = lam + sigma * feas
        if reg.alpha0 > 0:
            mu = recover_mu(y, vb, reg)
            primal = primal_objective(mu, vb, u_b, reg)
            gap = primal + dual_objective(y, vb, u_b, reg)
        else:
            mu = -lam_new
            primal = primal_objective(mu, vb, u_b, reg)
            gap = np.inf
        lam_change = np.linalg.norm(lam_new - lam) / max(1.0, np.linalg.norm(lam))
        records.append({
            "solver": "alm", "kind": "outer", "outer": k,
            "sigma": float(sigma), "gap": float(gap),
            "feasibility": float(np.linalg.norm(feas)),
            "lambda_change": float(lam_change),
            "primal": float(primal),
            "mu_plus_lambda": float(np.linalg.norm(mu + lam_new)),
            "inner_stop": inner_stop,
            "final_residual": float(norm_f),
            "tol_a": float(tol_a),
            "tol_b2": float(tol_b2),
            "floor": float(floor),
        })
        lam = lam_new
        lam_history.append(lam.copy())
        sigma = min(options.sigma_growth * sigma, options.sigma_max)
        if lam_change <= options.lam_tol:
            converged, stop_reason = True, "multiplier_change"
            break
        if gap <= options.gap_tol * (1.0 + abs(primal)):
            converged, stop_reason = True, "duality_gap"
            break

    mu = recover_mu(y, vb, reg) if reg.alpha0 > 0 else -lam
    return AlmResult(
        mu=mu, y=y, lam=lam, z=z, converged=converged, stop_reason=stop_reason,
        outer_iters=len(lam_history) - 1, inner_iters=inner_total, gap=gap,
        records=records, lam_history=lam_history,
    )
