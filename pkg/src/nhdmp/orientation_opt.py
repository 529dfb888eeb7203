"""Per-step angular-velocity optimization that drives the constraint force
to zero while staying close to the unconstrained orientation.

The per-step loss is

    L(w) = ||f_con(w)||_2 + ||R_nominal - R_new(w)||_F

with R_new(w) = exp_map(w, dt) @ R_prev and f_con evaluated at R_new(w)
with angular velocity w. Both terms are norms, so the surface is kinked
at their zeros; minimization uses BFGS with central-difference gradients
and a backtracking line search, which follows kinks reliably once within
their basin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSpec, blade_constraint_force
from .rotations import exp_map

# restart the search from a constraint-aligned candidate when the warm-start
# run leaves this much residual force (see _aligned_restart)
_ESCAPE_FCON = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    grad_eps: float = 1e-6
    tol_grad: float = 1e-8
    max_iters: int = 100
    warm_start: bool = True
    force_weight: float = 1.0
    rotation_weight: float = 1.0

    def __post_init__(self):
        if self.grad_eps <= 0 or self.tol_grad <= 0 or self.max_iters < 1:
            raise ValueError("grad_eps and tol_grad must be positive, max_iters >= 1")


@dataclass(frozen=True)
class OptStepResult:
    w_opt: np.ndarray
    R_opt: np.ndarray
    loss: float
    f_con_norm: float
    iterations: int
    converged: bool
    grad_norm: float


def loss(spec: ConstraintSpec, R_nominal, R_prev, w, p_dot, p_ddot_unc,
         dt: float, force_weight: float = 1.0,
         rotation_weight: float = 1.0) -> float:
    """Constraint-force norm plus Frobenius distance to the nominal
    orientation, both evaluated at the orientation w would produce."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    R_new = exp_map(w, dt) @ np.asarray(R_prev, dtype=float)
    f = blade_constraint_force(spec, R_new, w, p_dot, p_ddot_unc)
    return (force_weight * float(np.linalg.norm(f))
            + rotation_weight * float(np.linalg.norm(np.asarray(R_nominal) - R_new)))


def loss_gradient(spec: ConstraintSpec, R_nominal, R_prev, w, p_dot,
                  p_ddot_unc, dt: float, grad_eps: float = 1e-6,
                  force_weight: float = 1.0,
                  rotation_weight: float = 1.0) -> np.ndarray:
    """Central-difference gradient of the per-step loss in w."""
    w = np.asarray(w, dtype=float)
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = grad_eps
        g[i] = (loss(spec, R_nominal, R_prev, w + e, p_dot, p_ddot_unc, dt,
                     force_weight, rotation_weight)
                - loss(spec, R_nominal, R_prev, w - e, p_dot, p_ddot_unc, dt,
                       force_weight, rotation_weight)) / (2.0 * grad_eps)
    return g


def _minimize_bfgs(fun, x0, grad_eps, tol_grad, max_iters):
    """BFGS with central-difference gradients and Armijo backtracking.

    Stops on gradient norm <= tol_grad, on a line search that cannot
    improve, on per-iteration progress below the numerical floor, or on
    max_iters. Returns (x, f, iterations, grad_norm).
    """
    def grad(x):
        g = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = grad_eps
            g[i] = (fun(x + e) - fun(x - e)) / (2.0 * grad_eps)
        return g

    x = np.array(x0, dtype=float)
    fx = fun(x)
    g = grad(x)
    H = np.eye(3)
    iters = 0
    while float(np.linalg.norm(g)) > tol_grad and iters < max_iters:
        d = -(H @ g)
        slope = float(g @ d)
        if slope >= 0.0:   # H lost positive definiteness; steepest descent
            H = np.eye(3)
            d = -g
            slope = -float(g @ g)
        t = 1.0
        xn = None
        fn = fx
        while t > 1e-14:
            cand = x + t * d
            fc = fun(cand)
            if fc <= fx + 1e-4 * t * slope:
                xn, fn = cand, fc
                break
            t *= 0.5
        if xn is None:
            break          # numerically stationary along every scale of d
        gn = grad(xn)
        sk = xn - x
        yk = gn - g
        sy = float(sk @ yk)
        if sy > 1e-12 * float(np.linalg.norm(sk)) * float(np.linalg.norm(yk)):
            rho = 1.0 / sy
            V = np.eye(3) - rho * np.outer(sk, yk)
            H = V @ H @ V.T + rho * np.outer(sk, sk)
        progress = fx - fn
        x, fx, g = xn, fn, gn
        iters += 1
        if progress < 1e-13 * (1.0 + abs(fx)):
            break
    return x, fx, iters, float(np.linalg.norm(g))


def _restart_candidates(spec, R_prev, p_dot, p_ddot_unc, dt):
    """Starting points on (or near) the zero-force manifold.

    The warm start can sit in a basin the descent cannot leave: at rollout
    start (velocity near zero, lateral axis parallel to the acceleration)
    the rotation-distance cone dominates the vanishing force gradient and
    walls the warm start in. Two analytic candidates cover the regimes:

    * the minimum-norm solution of the force balance linearized in w,
      w = -(c.a) * u / |u|^2 with u = c x (v + dt a), valid while the
      velocity gives the balance leverage;
    * the one-step rotation that turns the lateral axis perpendicular to
      the acceleration, for the rest state where no finite w has leverage.
    """
    a = np.asarray(p_ddot_unc, dtype=float)
    v = np.asarray(p_dot, dtype=float)
    c0 = np.asarray(R_prev, dtype=float) @ spec.body_axis
    candidates = []

    u = np.cross(c0, v + dt * a)
    uu = float(u @ u)
    ca = float(c0 @ a)
    if uu > 1e-12:
        candidates.append(-ca * u / uu)

    na = float(np.linalg.norm(a))
    if na > 1e-12:
        ahat = a / na
        ct = c0 - float(c0 @ ahat) * ahat
        nct = float(np.linalg.norm(ct))
        if nct < 1e-9:
            e = np.zeros(3)
            e[int(np.argmin(np.abs(ahat)))] = 1.0
            ct = e - float(e @ ahat) * ahat
            nct = float(np.linalg.norm(ct))
        chat = ct / nct
        axis = np.cross(c0, chat)
        sa = float(np.linalg.norm(axis))
        if sa > 1e-12:
            angle = float(np.arctan2(sa, float(c0 @ chat)))
            candidates.append(axis / sa * (angle / dt))
    return candidates


def optimize_step(spec: ConstraintSpec, cfg: OptimizerConfig, R_nominal,
                  R_prev, w_warm, p_dot, p_ddot_unc, dt: float) -> OptStepResult:
    """Minimize the per-step loss over w, warm-started from the nominal
    orientation dynamics.

    Deterministic for fixed inputs and config. The result is flagged not
    converged only when the iteration budget runs out with the gradient
    still above tol_grad; stalls at numerical precision count as
    converged.
    """
    R_prev = np.asarray(R_prev, dtype=float)

    def fun(w):
        return loss(spec, R_nominal, R_prev, w, p_dot, p_ddot_unc, dt,
                    cfg.force_weight, cfg.rotation_weight)

    def fcon_norm(w):
        R_new = exp_map(w, dt) @ R_prev
        return float(np.linalg.norm(
            blade_constraint_force(spec, R_new, w, p_dot, p_ddot_unc)))

    w0 = np.asarray(w_warm, dtype=float) if cfg.warm_start else np.zeros(3)
    x, fx, iters, gnorm = _minimize_bfgs(fun, w0, cfg.grad_eps, cfg.tol_grad,
                                         cfg.max_iters)
    if fcon_norm(x) > _ESCAPE_FCON:
        for w_cand in _restart_candidates(spec, R_prev, p_dot, p_ddot_unc, dt):
            x2, fx2, iters2, gnorm2 = _minimize_bfgs(
                fun, w_cand, cfg.grad_eps, cfg.tol_grad, cfg.max_iters)
            if fx2 < fx:
                x, fx, iters, gnorm = x2, fx2, iters2, gnorm2
    converged = gnorm <= cfg.tol_grad or iters < cfg.max_iters
    return OptStepResult(w_opt=x, R_opt=exp_map(x, dt) @ R_prev, loss=fx,
                         f_con_norm=fcon_norm(x), iterations=iters,
                         converged=converged, grad_norm=gnorm)
