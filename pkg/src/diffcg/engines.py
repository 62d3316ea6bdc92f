"""Per-node adaptive estimators: CG, modified CG, and LMS/RLS baselines.

Every update is a pure function NodeState -> NodeState. State arrays may
carry a leading node axis, in which case all stacked nodes advance in
lockstep with bit-identical results to separate single-node updates; the
arrays are never mutated in place.

Sign convention: the conventional-CG weight update is w + alpha*p (the
descent step for the quadratic cost with residual g = b - R w); the
modified CG follows the same convention, since its residual recursion
g <- lam*g - alpha*R*p is consistent only with w moving by +alpha*p. A
minus sign there makes the recursion ascend the cost and diverge.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .numerics import corr_update, cross_update, matvec, vdot
from .penalties import PenaltyParams

__all__ = [
    "Engine",
    "EngineParams",
    "NodeState",
    "CgResult",
    "BREAKDOWN_FLOOR",
    "init_state",
    "stack_states",
    "unstack_states",
    "cg_inner_solve",
    "cg_time_update",
    "mcg_time_update",
    "lms_update",
    "rls_update",
    "engine_step",
]

# Curvature p^H R p at or below this skips the MCG line-search step.
BREAKDOWN_FLOOR = 1e-12


class Engine(str, Enum):
    CG = "cg"
    MCG = "mcg"
    LMS = "lms"
    RLS = "rls"


@dataclass(frozen=True)
class EngineParams:
    """Shared engine knobs.

    forgetting: exponential decay of the correlation statistics.
    step_scale: modified-CG line-search scale; its stability bound is
        forgetting - 0.5 <= step_scale <= forgetting.
    max_cg_iters / cg_tol: inner-loop budget and relative residual stop.
    diag_load: initial correlation R = diag_load * I, keeps the first
        solves positive definite.
    lms_step: LMS gradient step size.
    """

    forgetting: float = 0.98
    step_scale: float = 0.6
    max_cg_iters: int = 5
    cg_tol: float = 1e-6
    diag_load: float = 0.01
    lms_step: float = 0.05
    penalty: PenaltyParams = field(default_factory=PenaltyParams)

    def __post_init__(self):
        if not 0.0 < self.forgetting <= 1.0:
            raise ValueError(f"forgetting must lie in (0, 1], got {self.forgetting:g}")
        lo, hi = self.forgetting - 0.5, self.forgetting
        if not lo <= self.step_scale <= hi:
            raise ValueError(
                f"step_scale must lie in [{lo:g}, {hi:g}] "
                f"(forgetting - 0.5 to forgetting), got {self.step_scale:g}"
            )
        if self.max_cg_iters < 1:
            raise ValueError(f"max_cg_iters must be >= 1, got {self.max_cg_iters}")
        if self.cg_tol <= 0.0:
            raise ValueError(f"cg_tol must be > 0, got {self.cg_tol:g}")
        if self.diag_load <= 0.0:
            raise ValueError(f"diag_load must be > 0, got {self.diag_load:g}")
        if self.lms_step <= 0.0:
            raise ValueError(f"lms_step must be > 0, got {self.lms_step:g}")


@dataclass
class NodeState:
    """Adaptive state of one node, or of N stacked nodes (leading axis).

    corr/cross are the exponentially weighted statistics R and b;
    weights is the current estimate; residual/direction are the modified
    CG recursion carries; combined stores the latest exchanged estimate;
    inv_corr is the RLS inverse-correlation matrix; skipped flags nodes
    whose last update hit a curvature breakdown.
    """

    corr: np.ndarray
    cross: np.ndarray
    weights: np.ndarray
    residual: np.ndarray
    direction: np.ndarray
    combined: np.ndarray
    inv_corr: np.ndarray
    skipped: np.ndarray


def init_state(dim: int, diag_load: float, nodes: int | None = None) -> NodeState:
    """Fresh state: zero vectors, R = diag_load*I, P = I/diag_load."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if diag_load <= 0.0:
        raise ValueError(f"diag_load must be > 0, got {diag_load:g}")
    lead = () if nodes is None else (int(nodes),)
    eye = np.eye(dim, dtype=np.complex128)
    zeros = np.zeros(lead + (dim,), dtype=np.complex128)
    return NodeState(
        corr=np.broadcast_to(diag_load * eye, lead + (dim, dim)).copy(),
        cross=zeros.copy(),
        weights=zeros.copy(),
        residual=zeros.copy(),
        direction=zeros.copy(),
        combined=zeros.copy(),
        inv_corr=np.broadcast_to(eye / diag_load, lead + (dim, dim)).copy(),
        skipped=np.zeros(lead, dtype=bool),
    )


def stack_states(states: list[NodeState]) -> NodeState:
    """Stack single-node states along a new leading node axis."""
    return NodeState(*(np.stack(parts) for parts in zip(*(
        (s.corr, s.cross, s.weights, s.residual, s.direction, s.combined, s.inv_corr, s.skipped)
        for s in states
    ))))


def unstack_states(state: NodeState) -> list[NodeState]:
    """Split a stacked state into per-node single states."""
    n = state.weights.shape[0]
    return [
        NodeState(
            corr=state.corr[k].copy(),
            cross=state.cross[k].copy(),
            weights=state.weights[k].copy(),
            residual=state.residual[k].copy(),
            direction=state.direction[k].copy(),
            combined=state.combined[k].copy(),
            inv_corr=state.inv_corr[k].copy(),
            skipped=np.array(state.skipped[k]),
        )
        for k in range(n)
    ]


class CgResult(NamedTuple):
    weights: np.ndarray
    iterations: np.ndarray
    breakdown: np.ndarray


def cg_inner_solve(
    corr,
    cross,
    start,
    max_iters: int = 5,
    tol: float = 1e-6,
    callback: Callable | None = None,
) -> CgResult:
    """Conjugate-gradient solve of R w = b from a warm start.

    Runs at most max_iters iterations, stopping early once the residual
    norm falls to tol * ||b||. Batched systems advance under a mask, so
    systems that stop early keep their iterates bit-exactly while others
    continue. Non-positive curvature p^H R p terminates that system with
    its breakdown flag set. callback(w, g, p), when given, is invoked
    after every iteration with the current iterates.
    """
    corr = np.asarray(corr, dtype=np.complex128)
    cross = np.asarray(cross, dtype=np.complex128)
    w = np.array(start, dtype=np.complex128, copy=True)
    if w.shape != cross.shape:
        raise ValueError(f"start shape {w.shape} must match cross shape {cross.shape}")
    g = cross - matvec(corr, w)
    p = g.copy()
    gg = np.real(vdot(g, g))
    limit = (float(tol) ** 2) * np.real(vdot(cross, cross))
    active = gg > limit
    iterations = np.zeros(gg.shape, dtype=np.int64)
    breakdown = np.zeros(gg.shape, dtype=bool)
    for _ in range(int(max_iters)):
        if not np.any(active):
            break
        rp = matvec(corr, p)
        curvature = np.real(vdot(p, rp))
        bad = active & (curvature <= 0.0)
        breakdown |= bad
        step = active & ~bad
        alpha = np.where(step, gg / np.where(curvature > 0.0, curvature, 1.0), 0.0)
        w_next = w + alpha[..., None] * p
        g_next = g - alpha[..., None] * rp
        gg_next = np.real(vdot(g_next, g_next))
        beta = np.where(step, gg_next / np.where(gg > 0.0, gg, 1.0), 0.0)
        p_next = g_next + beta[..., None] * p
        mask = step[..., None]
        w = np.where(mask, w_next, w)
        g = np.where(mask, g_next, g)
        p = np.where(mask, p_next, p)
        gg = np.where(step, gg_next, gg)
        iterations = iterations + step
        active = step & (gg > limit)
        if callback is not None:
            callback(w, g, p)
    return CgResult(w, iterations, breakdown)


def cg_time_update(state: NodeState, x, d, params: EngineParams, start=None) -> NodeState:
    """Statistics update followed by a budgeted CG re-solve.

    The solve starts from `start` when given (the combined estimate
    under combine-then-adapt) and from the current weights otherwise.
    """
    corr = corr_update(state.corr, x, params.forgetting)
    cross = cross_update(state.cross, d, x, params.forgetting)
    begin = state.weights if start is None else start
    res = cg_inner_solve(corr, cross, begin, params.max_cg_iters, params.cg_tol)
    return replace(state, corr=corr, cross=cross, weights=res.weights, skipped=res.breakdown)


def mcg_time_update(state: NodeState, x, d, params: EngineParams, start=None) -> NodeState:
    """Single bounded CG-style update per sample.

    Line search alpha = step_scale * (p^H g) / (p^H R p) along the kept
    direction; residual by recursion lam*g - alpha*R*p + x*conj(e) with
    the a-priori error e taken at the previous weights; Polak-Ribiere
    beta clamped at zero. Curvature at or below BREAKDOWN_FLOOR skips
    the line-search step (alpha = 0) and flags the node.
    """
    corr = corr_update(state.corr, x, params.forgetting)
    cross = cross_update(state.cross, d, x, params.forgetting)
    begin = state.weights if start is None else start
    p = state.direction
    g_prev = state.residual
    rp = matvec(corr, p)
    curvature = np.real(vdot(p, rp))
    ok = curvature > BREAKDOWN_FLOOR
    alpha = np.where(ok, params.step_scale * vdot(p, g_prev)
                     / np.where(ok, curvature, 1.0), 0.0)
    w = begin + alpha[..., None] * p
    x = np.asarray(x, dtype=np.complex128)
    err = np.asarray(d, dtype=np.complex128) - vdot(state.weights, x)
    g = params.forgetting * g_prev - alpha[..., None] * rp + x * np.conj(err)[..., None]
    gg_prev = np.real(vdot(g_prev, g_prev))
    has_prev = gg_prev > BREAKDOWN_FLOOR
    beta = np.where(
        has_prev,
        np.real(vdot(g - g_prev, g)) / np.where(has_prev, gg_prev, 1.0),
        0.0,
    )
    beta = np.maximum(beta, 0.0)
    direction = g + beta[..., None] * p
    return replace(
        state, corr=corr, cross=cross, weights=w, residual=g, direction=direction, skipped=~ok
    )


def lms_update(state: NodeState, x, d, params: EngineParams, start=None) -> NodeState:
    """Stochastic-gradient step w + mu * x * conj(d - w^H x); R, b untouched."""
    begin = state.weights if start is None else start
    x = np.asarray(x, dtype=np.complex128)
    err = np.asarray(d, dtype=np.complex128) - vdot(begin, x)
    w = begin + params.lms_step * x * np.conj(err)[..., None]
    return replace(state, weights=w)


def rls_update(state: NodeState, x, d, params: EngineParams, start=None) -> NodeState:
    """Exponentially weighted RLS with inverse-correlation recursion.

    Gain k = P x / (lam + x^H P x), weights move by k * conj(e), and
    P <- (P - k (P x)^H) / lam, re-symmetrized exactly each step.
    """
    begin = state.weights if start is None else start
    x = np.asarray(x, dtype=np.complex128)
    lam = params.forgetting
    px = matvec(state.inv_corr, x)
    denom = lam + np.real(vdot(x, px))
    gain = px / denom[..., None]
    err = np.asarray(d, dtype=np.complex128) - vdot(begin, x)
    w = begin + gain * np.conj(err)[..., None]
    inv = (state.inv_corr - gain[..., :, None] * np.conj(px)[..., None, :]) / lam
    inv = 0.5 * (inv + np.conj(np.swapaxes(inv, -1, -2)))
    return replace(state, weights=w, inv_corr=inv)


_UPDATES = {
    Engine.CG: cg_time_update,
    Engine.MCG: mcg_time_update,
    Engine.LMS: lms_update,
    Engine.RLS: rls_update,
}


def engine_step(engine: Engine, state: NodeState, x, d, params: EngineParams,
                start=None) -> NodeState:
    """Run one adaptation step of the selected engine."""
    return _UPDATES[Engine(engine)](state, x, d, params, start)
