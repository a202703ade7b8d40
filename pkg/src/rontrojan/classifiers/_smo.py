"""Pairwise coordinate ascent (SMO) on the kernelized soft-margin SVM dual.

    maximize   W(a) = sum(a) - 1/2 * sum_ij a_i a_j y_i y_j K_ij
    subject to 0 <= a_i <= C_i,  sum_i a_i y_i = 0

The working pair is the maximal-violating index ``i`` plus the partner ``j``
with the largest second-order gain. Iteration stops once the gap between the
most violating up/low multipliers is below ``eps``.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional, the loop also runs as Python
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_TAU = 1e-12
_HISTORY_CAP = 1_000_000


@njit(cache=True)
def _smo_loop(K, y, C, alpha, G, eps, max_iter, history):
    n = y.shape[0]
    track = history.shape[0] > 0
    it = 0
    gap = np.inf
    while it < max_iter:
        # i: argmax over I_up of -y_t G_t
        gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C[t] and -G[t] > gmax:
                    gmax = -G[t]
                    i = t
            else:
                if alpha[t] > 0 and G[t] > gmax:
                    gmax = G[t]
                    i = t
        # j: second-order choice over I_low
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        for t in range(n):
            if y[t] > 0:
                if alpha[t] > 0:
                    if G[t] > gmax2:
                        gmax2 = G[t]
                    if i >= 0:
                        grad_diff = gmax + G[t]
                        if grad_diff > 0:
                            quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                            if quad <= 0:
                                quad = _TAU
                            obj = -(grad_diff * grad_diff) / quad
                            if obj < obj_min:
                                obj_min = obj
                                j = t
            else:
                if alpha[t] < C[t]:
                    if -G[t] > gmax2:
                        gmax2 = -G[t]
                    if i >= 0:
                        grad_diff = gmax - G[t]
                        if grad_diff > 0:
                            quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                            if quad <= 0:
                                quad = _TAU
                            obj = -(grad_diff * grad_diff) / quad
                            if obj < obj_min:
                                obj_min = obj
                                j = t
        gap = gmax + gmax2
        if gap < eps or i < 0 or j < 0:
            break

        old_ai = alpha[i]
        old_aj = alpha[j]
        Ci = C[i]
        Cj = C[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > Ci - Cj:
                if alpha[i] > Ci:
                    alpha[i] = Ci
                    alpha[j] = Ci - diff
            else:
                if alpha[j] > Cj:
                    alpha[j] = Cj
                    alpha[i] = Cj + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > Ci:
                if alpha[i] > Ci:
                    alpha[i] = Ci
                    alpha[j] = total - Ci
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > Cj:
                if alpha[j] > Cj:
                    alpha[j] = Cj
                    alpha[i] = total - Cj
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

        dai = alpha[i] - old_ai
        daj = alpha[j] - old_aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[i, t] * dai + y[j] * K[j, t] * daj)
        if track and it < history.shape[0]:
            w = 0.0
            for t in range(n):
                w += alpha[t] * (1.0 - G[t])
            history[it] = 0.5 * w
        it += 1
    return it, gap


def _bias(y, C, alpha, G):
    """Offset b of f(x) = sum a_i y_i k(x_i, x) + b."""
    v = -y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return float(np.mean(v[free]))
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    hi = np.max(v[up]) if np.any(up) else np.inf
    lo = np.min(v[low]) if np.any(low) else -np.inf
    if math.isinf(hi):
        return float(lo)
    if math.isinf(lo):
        return float(hi)
    return float(0.5 * (hi + lo))


def dual_objective(K, y, alpha) -> float:
    ya = y * alpha
    return float(np.sum(alpha) - 0.5 * ya @ K @ ya)


def smo_solve(K, y, C, eps=1e-3, max_iter=None, track_objective=False):
    """Solve the dual for a precomputed kernel matrix.

    Returns ``(alpha, b, n_iter, gap, history)``; ``gap`` is the final
    maximal KKT violation and ``history`` the dual objective after each
    pair update (empty unless ``track_objective``; capped at the first
    million updates).
    """
    K = np.ascontiguousarray(K, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    C = np.ascontiguousarray(C, dtype=float)
    n = y.shape[0]
    if max_iter is None:
        max_iter = 10_000 * max(n, 1)
    alpha = np.zeros(n)
    G = -np.ones(n)
    history = np.zeros(min(max_iter, _HISTORY_CAP) if track_objective else 0)
    n_iter, gap = _smo_loop(K, y, C, alpha, G, float(eps), int(max_iter), history)
    b = _bias(y, C, alpha, G)
    return alpha, b, int(n_iter), float(gap), history[:n_iter]
