"""Pairwise rank-correlation objective and its smoothed surrogate.

For coefficient vector b on the unit sphere, the exact objective is

    S(b) = (1/(n(n-1))) * sum over ordered observation pairs (a, c) of
           zeta[subj(a)] * zeta[subj(c)] * I(y_a > y_c) * I(x_a'b > x_c'b)

and the smoothed surrogate replaces the second indicator with the
standard normal CDF of (x_a'b - x_c'b)/h. Outcome ties contribute
nothing, so only pairs with y_a > y_c are ever enumerated; within-
subject pairs are included. The subject-level weights zeta default to
ones and carry the perturbation resampling.

The context precomputes the strict-outcome pair list once. When the
covariate rows take few distinct values, pairs are collapsed onto the
K distinct rows and every evaluation costs O(K^2) instead of O(#pairs);
the per-weights pair totals are cached on the evaluator.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConstraintError, DegenerateDataError, DomainError

_UNIT_NORM_TOL = 1e-8
_PAIR_BLOCK = 1024


@dataclass(frozen=True)
class PerturbationWeights:
    """Positive subject-level weights, one per subject (ones = unweighted)."""

    zeta: np.ndarray

    def __post_init__(self):
        zeta = np.ascontiguousarray(self.zeta, dtype=np.float64)
        if zeta.ndim != 1:
            raise DomainError("perturbation weights must be a 1-D vector")
        if not (np.isfinite(zeta).all() and (zeta > 0).all()):
            raise DomainError("perturbation weights must be finite and > 0")
        object.__setattr__(self, "zeta", zeta)


class ObjectiveContext:
    """Immutable precomputed state for objective evaluation.

    Attributes y, X, subj (subject integers 1..n), n and N mirror the
    raw data; everything else is derived and private.
    """

    def __init__(self, y, X, subj, n=None):
        y = np.ascontiguousarray(y, dtype=np.float64)
        X = np.ascontiguousarray(X, dtype=np.float64)
        subj = np.ascontiguousarray(subj, dtype=np.int32)
        N = len(y)
        if X.ndim != 2 or X.shape[0] != N or len(subj) != N:
            raise DomainError("y, X rows and subj must have equal length")
        if n is None:
            n = int(subj.max()) if N else 0
        if N and (subj.min() < 1 or subj.max() > n):
            raise DomainError("subject codes must lie in 1..n")
        self.y = y
        self.X = X
        self.subj = subj
        self.n = int(n)
        self.N = int(N)

        ia, ib = self._strict_pairs(y)
        self._ia = ia
        self._ib = ib
        self._sa = (subj[ia] - 1).astype(np.int32)
        self._sb = (subj[ib] - 1).astype(np.int32)
        self.num_pairs = len(ia)

        uX, ginv = (np.empty((0, X.shape[1])), np.empty(0, dtype=np.int64))
        if N:
            uX, ginv = np.unique(X, axis=0, return_inverse=True)
        K = len(uX)
        self.grouped = bool(K * K < self.num_pairs)
        if self.grouped:
            self._Xg = np.ascontiguousarray(uX)
            self._K = K
            self._gi = np.ascontiguousarray(ginv[ia], dtype=np.int32)
            self._gj = np.ascontiguousarray(ginv[ib], dtype=np.int32)
            self._dX = None
        else:
            self._dX = np.ascontiguousarray(X[ia] - X[ib])

        for arr in (self.y, self.X, self.subj):
            arr.flags.writeable = False

    @staticmethod
    def _strict_pairs(y):
        """Ordered pairs (a, b) with y[a] > y[b], blockwise to bound memory."""
        N = len(y)
        ia_parts, ib_parts = [], []
        for start in range(0, N, _PAIR_BLOCK):
            block = y[start : start + _PAIR_BLOCK]
            loc, j = np.nonzero(block[:, None] > y[None, :])
            ia_parts.append((loc + start).astype(np.int32))
            ib_parts.append(j.astype(np.int32))
        if not ia_parts:
            return np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32)
        return np.concatenate(ia_parts), np.concatenate(ib_parts)

    @classmethod
    def from_dataset(cls, dataset):
        return cls(dataset.y, dataset.X, dataset.subject_codes(), n=dataset.n)

    @property
    def p(self):
        return self.X.shape[1]


def _check_beta(beta, p):
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    if beta.shape != (p,):
        raise ConstraintError(f"beta must have shape ({p},), got {beta.shape}")
    nrm = float(np.linalg.norm(beta))
    if abs(nrm - 1.0) > _UNIT_NORM_TOL:
        raise ConstraintError(f"beta must have unit norm, got ||beta||={nrm!r}")
    return beta


class SmoothedObjective:
    """Objective evaluator bound to a context and one weight vector.

    Binding caches the per-pair (or per-group) weight totals, so
    repeated evaluations during optimization only pay for the CDF sums.
    """

    def __init__(self, ctx, weights=None):
        if ctx.n < 2:
            raise DegenerateDataError("objective needs at least two subjects")
        self.ctx = ctx
        if weights is None:
            zeta = np.ones(ctx.n)
        else:
            zeta = weights.zeta
            if len(zeta) != ctx.n:
                raise DomainError(
                    f"weights must have one entry per subject ({ctx.n}), got {len(zeta)}"
                )
        self._norm = float(ctx.n) * float(ctx.n - 1)
        wz = zeta[ctx._sa] * zeta[ctx._sb]
        if ctx.grouped:
            self._W = _kernels.kernel("weight_matrix")(ctx._gi, ctx._gj, wz, ctx._K)
            self._wz = None
        else:
            self._W = None
            self._wz = wz

    def exact(self, beta):
        beta = _check_beta(beta, self.ctx.p)
        if self.ctx.grouped:
            v = self.ctx._Xg @ beta
            raw = _kernels.kernel("grouped_exact")(self._W, v)
        else:
            d = self.ctx._dX @ beta if self.ctx.num_pairs else np.empty(0)
            raw = _kernels.kernel("pair_exact")(d, self._wz)
        return raw / self._norm

    def value(self, beta, h):
        beta = _check_beta(beta, self.ctx.p)
        _check_h(h)
        if self.ctx.grouped:
            v = self.ctx._Xg @ beta
            raw = _kernels.kernel("grouped_smoothed")(self._W, v, h)
        else:
            d = self.ctx._dX @ beta if self.ctx.num_pairs else np.empty(0)
            raw = _kernels.kernel("pair_smoothed")(d, self._wz, h)
        return raw / self._norm

    def value_and_gradient(self, beta, h):
        beta = _check_beta(beta, self.ctx.p)
        _check_h(h)
        if self.ctx.grouped:
            v = self.ctx._Xg @ beta
            raw, g = _kernels.kernel("grouped_smoothed_grad")(self._W, v, self.ctx._Xg, h)
        elif self.ctx.num_pairs:
            d = self.ctx._dX @ beta
            raw, g = _kernels.kernel("pair_smoothed_grad")(d, self._wz, self.ctx._dX, h)
        else:
            raw, g = 0.0, np.zeros(self.ctx.p)
        return raw / self._norm, g / self._norm

    def gradient(self, beta, h):
        return self.value_and_gradient(beta, h)[1]


def _check_h(h):
    if not (np.isfinite(h) and h > 0):
        raise DomainError(f"bandwidth h must be positive, got {h!r}")


def exact_objective(ctx, beta, weights=None):
    """Exact step-function objective S(beta)."""
    return SmoothedObjective(ctx, weights).exact(beta)


def smoothed_objective(ctx, beta, h, weights=None):
    """Normal-CDF smoothed objective with bandwidth h."""
    return SmoothedObjective(ctx, weights).value(beta, h)


def smoothed_gradient(ctx, beta, h, weights=None):
    """Ambient-coordinate gradient of the smoothed objective."""
    return SmoothedObjective(ctx, weights).gradient(beta, h)
