"""Maximization over the unit sphere via hyperspherical angles.

A p-vector with ||b|| = 1 is parameterized by p-1 angles. The map used
here is the standard spherical chart with the component order reversed,
so that for p = 2 it reduces to b = (sin t, cos t). Optimization runs
unconstrained in angle space: several random starts each get a few
Newton-type warmup steps, the best is polished to convergence.
"""

from dataclasses import dataclass

import numpy as np

from ._newton import maximize
from .errors import DomainError, EvaluationError, OptimizationFailedError


@dataclass(frozen=True)
class Angles:
    """Angle vector of length p-1."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.ascontiguousarray(self.theta, dtype=np.float64))
        if theta.ndim != 1 or not np.isfinite(theta).all():
            raise DomainError("angles must be a finite 1-D vector")
        object.__setattr__(self, "theta", theta)

    def canonical(self):
        """Equivalent angles wrapped into (-pi, pi] componentwise."""
        t = np.remainder(self.theta + np.pi, 2.0 * np.pi) - np.pi
        t[t == -np.pi] = np.pi
        return Angles(t)


def polar_to_rect(theta):
    """Unit p-vector for p-1 angles; p=2 gives (sin t, cos t)."""
    if isinstance(theta, Angles):
        theta = theta.theta
    theta = np.atleast_1d(np.ascontiguousarray(theta, dtype=np.float64))
    m = len(theta)
    b = np.empty(m + 1)
    run = 1.0
    for k in range(m):
        b[k] = run * np.cos(theta[k])
        run *= np.sin(theta[k])
    b[m] = run
    return b[::-1].copy()


def polar_jacobian(theta):
    """(p, p-1) Jacobian of polar_to_rect at theta."""
    if isinstance(theta, Angles):
        theta = theta.theta
    theta = np.atleast_1d(np.ascontiguousarray(theta, dtype=np.float64))
    m = len(theta)
    c = np.cos(theta)
    s = np.sin(theta)
    prefix = np.empty(m + 1)
    prefix[0] = 1.0
    for k in range(m):
        prefix[k + 1] = prefix[k] * s[k]
    J = np.zeros((m + 1, m))
    for j in range(m):
        J[j, j] = -prefix[j] * s[j]
        run = prefix[j] * c[j]
        for k in range(j + 1, m + 1):
            J[k, j] = run * (c[k] if k < m else 1.0)
            if k < m:
                run *= s[k]
    return J[::-1, :].copy()


@dataclass(frozen=True)
class MultistartConfig:
    """Multistart Newton protocol: starts, warmup length, convergence."""

    n_starts: int = 6
    warmup_steps: int = 3
    angle_low: float = -3.142
    angle_high: float = 3.142
    max_iters: int = 100
    grad_tol: float = 1e-6

    def __post_init__(self):
        if self.n_starts < 1:
            raise DomainError("n_starts must be >= 1")
        if self.warmup_steps < 0:
            raise DomainError("warmup_steps must be >= 0")
        if not self.angle_low < self.angle_high:
            raise DomainError("angle_low must be < angle_high")


def _fd_theta_grad(objective, theta, f0, step=1e-6):
    g = np.empty(len(theta))
    for j in range(len(theta)):
        hj = step * max(1.0, abs(theta[j]))
        e = np.zeros(len(theta))
        e[j] = hj
        g[j] = (objective(polar_to_rect(theta + e)) - objective(polar_to_rect(theta - e))) / (
            2.0 * hj
        )
    return g


def multistart_maximize(objective, p, cfg, rng, gradient=None, value_and_gradient=None):
    """Maximize objective(beta) over the unit sphere in R^p.

    ``value_and_gradient`` (or ``gradient``) supplies the ambient-space
    analytic gradient; angle-space derivatives follow by the chain rule,
    with the Hessian taken by finite differences on the angle gradient.
    Without either, the angle gradient itself is finite-differenced.

    Draws cfg.n_starts angle vectors uniformly, runs cfg.warmup_steps
    Newton-type steps from each, keeps the start with the greatest
    objective, and polishes it to convergence. Starts whose objective
    does not evaluate finite are discarded; if all fail, raises
    OptimizationFailedError.
    """
    if p < 2:
        raise DomainError(f"sphere optimization needs p >= 2, got p={p}")

    if value_and_gradient is not None:

        def theta_vag(theta):
            beta = polar_to_rect(theta)
            f, gb = value_and_gradient(beta)
            return f, polar_jacobian(theta).T @ gb

    elif gradient is not None:

        def theta_vag(theta):
            beta = polar_to_rect(theta)
            return objective(beta), polar_jacobian(theta).T @ gradient(beta)

    else:

        def theta_vag(theta):
            f0 = objective(polar_to_rect(theta))
            return f0, _fd_theta_grad(objective, theta, f0)

    starts = rng.uniform(cfg.angle_low, cfg.angle_high, size=(cfg.n_starts, p - 1))
    warm = []
    failures = []
    for idx in range(cfg.n_starts):
        try:
            res = maximize(
                theta_vag, starts[idx], grad_tol=cfg.grad_tol, max_iters=cfg.warmup_steps
            )
        except EvaluationError as exc:
            failures.append(f"start {idx}: {exc}")
            continue
        warm.append(res)
    if not warm:
        raise OptimizationFailedError(
            "objective evaluation failed at every start: " + "; ".join(failures)
        )

    best = max(range(len(warm)), key=lambda i: warm[i].value)
    final = maximize(
        theta_vag, warm[best].x, grad_tol=cfg.grad_tol, max_iters=cfg.max_iters
    )
    angles = Angles(final.x).canonical()
    beta = polar_to_rect(angles)
    return angles, beta, float(objective(beta))
