"""Hot kernels for the pairwise rank objective.

Two interchangeable backends compute identical quantities:

* ``numba`` (default): serial @njit loops, compiled once and cached.
* ``numpy``: vectorized fallback, selected with ``MRCTEST_BACKEND=numpy``.

Both share the same tail cutoff (|u| > 8 treated as a saturated normal
CDF) and accumulate in a fixed order, so each backend is bit-reproducible
run to run. Keep the two implementations of every kernel in sync.

Kernels exist for two data layouts:

* pair layout: one entry per ordered observation pair (a, b) with
  y_a > y_b, carrying the index difference and covariate-row difference;
* grouped layout: observations collapsed onto K distinct covariate rows,
  with a K-by-K matrix of pairwise weight totals. Evaluation cost drops
  from O(#pairs) to O(K^2), which is what makes resampling affordable
  when covariates are discrete (binary treatment, small time grids).
"""

import math
import os

import numpy as np
from scipy.special import ndtr

_TAIL = 8.0
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _pair_exact_np(d, w):
    return float(w[d > 0.0].sum())


def _pair_smoothed_np(d, w, h):
    u = d / h
    s = float(w[u > _TAIL].sum())
    mid = (u >= -_TAIL) & (u <= _TAIL)
    if mid.any():
        s += float((w[mid] * ndtr(u[mid])).sum())
    return s


def _pair_smoothed_grad_np(d, w, dX, h):
    u = d / h
    s = float(w[u > _TAIL].sum())
    g = np.zeros(dX.shape[1])
    mid = (u >= -_TAIL) & (u <= _TAIL)
    if mid.any():
        um = u[mid]
        wm = w[mid]
        s += float((wm * ndtr(um)).sum())
        c = wm * (np.exp(-0.5 * um * um) * _INV_SQRT2PI / h)
        g = dX[mid].T @ c
    return s, g


def _weight_matrix_np(gi, gj, wz, K):
    flat = np.bincount(gi.astype(np.int64) * K + gj, weights=wz, minlength=K * K)
    return flat.reshape(K, K)


def _grouped_exact_np(W, v):
    dv = v[:, None] - v[None, :]
    return float(W[dv > 0.0].sum())


def _grouped_smoothed_np(W, v, h):
    u = (v[:, None] - v[None, :]) / h
    s = float(W[u > _TAIL].sum())
    mid = (u >= -_TAIL) & (u <= _TAIL)
    if mid.any():
        s += float((W[mid] * ndtr(u[mid])).sum())
    return s


def _grouped_smoothed_grad_np(W, v, Xg, h):
    u = (v[:, None] - v[None, :]) / h
    s = float(W[u > _TAIL].sum())
    mid = (u >= -_TAIL) & (u <= _TAIL)
    C = np.zeros_like(W)
    if mid.any():
        s += float((W[mid] * ndtr(u[mid])).sum())
        C[mid] = W[mid] * (np.exp(-0.5 * u[mid] ** 2) * _INV_SQRT2PI / h)
    g = Xg.T @ (C.sum(axis=1) - C.sum(axis=0))
    return s, g


# ---------------------------------------------------------------------------
# numba backend: plain-Python cores, jitted at import
# ---------------------------------------------------------------------------


def _pair_exact_core(d, w):
    s = 0.0
    for m in range(d.shape[0]):
        if d[m] > 0.0:
            s += w[m]
    return s


def _pair_smoothed_core(d, w, h):
    inv_h = 1.0 / h
    s = 0.0
    for m in range(d.shape[0]):
        u = d[m] * inv_h
        if u > _TAIL:
            s += w[m]
        elif u >= -_TAIL:
            s += w[m] * 0.5 * math.erfc(-u * _INV_SQRT2)
    return s


def _pair_smoothed_grad_core(d, w, dX, h):
    inv_h = 1.0 / h
    p = dX.shape[1]
    s = 0.0
    g = np.zeros(p)
    for m in range(d.shape[0]):
        u = d[m] * inv_h
        if u > _TAIL:
            s += w[m]
        elif u >= -_TAIL:
            s += w[m] * 0.5 * math.erfc(-u * _INV_SQRT2)
            c = w[m] * math.exp(-0.5 * u * u) * _INV_SQRT2PI * inv_h
            for k in range(p):
                g[k] += c * dX[m, k]
    return s, g


def _weight_matrix_core(gi, gj, wz, K):
    W = np.zeros((K, K))
    for m in range(gi.shape[0]):
        W[gi[m], gj[m]] += wz[m]
    return W


def _grouped_exact_core(W, v):
    K = W.shape[0]
    s = 0.0
    for a in range(K):
        for b in range(K):
            if v[a] > v[b]:
                s += W[a, b]
    return s


def _grouped_smoothed_core(W, v, h):
    K = W.shape[0]
    inv_h = 1.0 / h
    s = 0.0
    for a in range(K):
        for b in range(K):
            wab = W[a, b]
            if wab != 0.0:
                u = (v[a] - v[b]) * inv_h
                if u > _TAIL:
                    s += wab
                elif u >= -_TAIL:
                    s += wab * 0.5 * math.erfc(-u * _INV_SQRT2)
    return s


def _grouped_smoothed_grad_core(W, v, Xg, h):
    K = W.shape[0]
    p = Xg.shape[1]
    inv_h = 1.0 / h
    s = 0.0
    g = np.zeros(p)
    for a in range(K):
        for b in range(K):
            wab = W[a, b]
            if wab != 0.0:
                u = (v[a] - v[b]) * inv_h
                if u > _TAIL:
                    s += wab
                elif u >= -_TAIL:
                    s += wab * 0.5 * math.erfc(-u * _INV_SQRT2)
                    c = wab * math.exp(-0.5 * u * u) * _INV_SQRT2PI * inv_h
                    for k in range(p):
                        g[k] += c * (Xg[a, k] - Xg[b, k])
    return s, g


try:
    from numba import njit

    _pair_exact_nb = njit(cache=True)(_pair_exact_core)
    _pair_smoothed_nb = njit(cache=True)(_pair_smoothed_core)
    _pair_smoothed_grad_nb = njit(cache=True)(_pair_smoothed_grad_core)
    _weight_matrix_nb = njit(cache=True)(_weight_matrix_core)
    _grouped_exact_nb = njit(cache=True)(_grouped_exact_core)
    _grouped_smoothed_nb = njit(cache=True)(_grouped_smoothed_core)
    _grouped_smoothed_grad_nb = njit(cache=True)(_grouped_smoothed_grad_core)
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False


_BACKENDS = {
    "numpy": {
        "pair_exact": _pair_exact_np,
        "pair_smoothed": _pair_smoothed_np,
        "pair_smoothed_grad": _pair_smoothed_grad_np,
        "weight_matrix": _weight_matrix_np,
        "grouped_exact": _grouped_exact_np,
        "grouped_smoothed": _grouped_smoothed_np,
        "grouped_smoothed_grad": _grouped_smoothed_grad_np,
    }
}
if _HAVE_NUMBA:
    _BACKENDS["numba"] = {
        "pair_exact": _pair_exact_nb,
        "pair_smoothed": _pair_smoothed_nb,
        "pair_smoothed_grad": _pair_smoothed_grad_nb,
        "weight_matrix": _weight_matrix_nb,
        "grouped_exact": _grouped_exact_nb,
        "grouped_smoothed": _grouped_smoothed_nb,
        "grouped_smoothed_grad": _grouped_smoothed_grad_nb,
    }

_active = None


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    """Backend name in effect (env var MRCTEST_BACKEND, default numba)."""
    global _active
    if _active is None:
        name = os.environ.get("MRCTEST_BACKEND", "").strip().lower()
        if not name:
            name = "numba" if _HAVE_NUMBA else "numpy"
        if name not in _BACKENDS:
            raise ValueError(
                f"unknown MRCTEST_BACKEND {name!r}; choose from {available_backends()}"
            )
        _active = name
    return _active


def set_backend(name):
    """Force a backend (tests and benchmarks); returns the previous name."""
    global _active
    if name is not None and name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {available_backends()}")
    prev = _active
    _active = name
    return prev


def kernel(name):
    return _BACKENDS[active_backend()][name]
