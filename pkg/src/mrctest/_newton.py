"""Safeguarded Newton-type maximizer shared by the sphere optimizer and
the comparator likelihood fits.

The caller supplies a fused value-and-gradient callable. The Hessian is
always taken by central finite differences on that gradient. When the
Hessian is not negative definite (or the Newton step fails to improve),
the step falls back to gradient ascent with backtracking halving.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError

_MAX_HALVINGS = 30


@dataclass
class NewtonResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    iterations: int
    converged: bool

    @property
    def grad_norm(self):
        return float(np.linalg.norm(self.grad))


def fd_value_and_grad(f, step=1e-6):
    """Wrap a scalar function into (value, central-FD gradient)."""

    def vag(x):
        f0 = f(x)
        g = np.empty(len(x))
        for j in range(len(x)):
            hj = step * max(1.0, abs(x[j]))
            e = np.zeros(len(x))
            e[j] = hj
            g[j] = (f(x + e) - f(x - e)) / (2.0 * hj)
        return f0, g

    return vag


def _fd_hessian(vag, x, step):
    k = len(x)
    H = np.empty((k, k))
    for j in range(k):
        hj = step * max(1.0, abs(x[j]))
        e = np.zeros(k)
        e[j] = hj
        _, gp = vag(x + e)
        _, gm = vag(x - e)
        H[:, j] = (gp - gm) / (2.0 * hj)
    return 0.5 * (H + H.T)


def _try_direction(vag, x, f0, direction):
    """Backtracking halving along direction; returns accepted point or None."""
    if not np.isfinite(direction).all():
        return None
    for t in range(_MAX_HALVINGS + 1):
        cand = x + direction * (0.5**t)
        try:
            fc, gc = vag(cand)
        except FloatingPointError:
            continue
        if np.isfinite(fc) and np.isfinite(gc).all() and fc > f0:
            return cand, fc, gc
    return None


def maximize(vag, x0, *, grad_tol=1e-6, max_iters=100, hess_step=1e-4):
    """Maximize via Newton steps with gradient-ascent fallback.

    Raises EvaluationError if the starting point does not evaluate to a
    finite value; afterwards, candidate failures only reject the step.
    """
    x = np.ascontiguousarray(x0, dtype=np.float64).copy()
    f0, g = vag(x)
    if not (np.isfinite(f0) and np.isfinite(g).all()):
        raise EvaluationError(f"objective not finite at starting point {x0!r}")

    it = 0
    while it < max_iters:
        gnorm = float(np.linalg.norm(g))
        if gnorm < grad_tol:
            return NewtonResult(x, float(f0), g, it, True)
        it += 1

        H = _fd_hessian(vag, x, hess_step)
        accepted = None
        if np.isfinite(H).all():
            try:
                np.linalg.cholesky(-H)  # require negative definite Hessian
                direction = np.linalg.solve(H, -g)
                accepted = _try_direction(vag, x, f0, direction)
            except np.linalg.LinAlgError:
                accepted = None
        if accepted is None:
            # flat or indefinite curvature: plain ascent step
            accepted = _try_direction(vag, x, f0, g / max(1.0, gnorm))
        if accepted is None:
            return NewtonResult(x, float(f0), g, it, gnorm < grad_tol)
        x, f0, g = accepted

    return NewtonResult(x, float(f0), g, it, float(np.linalg.norm(g)) < grad_tol)
