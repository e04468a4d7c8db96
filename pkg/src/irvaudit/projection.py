"""Projection onto the probability simplex, in Euclidean and weighted norms.

The weighted projection minimises (q - y)' A (q - y) over the simplex for a
symmetric positive-definite A.  The active-set solve below terminates at the
exact KKT point for the small systems used here (tens of coordinates); a
projected-gradient fallback guards against active-set cycling.
"""

from __future__ import annotations

import numpy as np

__all__ = ["project_simplex", "project_simplex_metric", "kkt_residual"]


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of v onto {q >= 0, sum q = 1} (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def kkt_residual(q: np.ndarray, y: np.ndarray, A: np.ndarray) -> float:
    """Max violation of the simplex-QP optimality conditions at q."""
    grad = 2.0 * (A @ (q - y))
    lam = grad.min()  # stationarity forces grad = lam on the support
    feas = max(abs(q.sum() - 1.0), max(0.0, -q.min()))
    comp = np.abs(q * (grad - lam)).max()
    scale = max(1.0, np.abs(grad).max())
    return max(feas, comp / scale)


def _solve_on_support(support: np.ndarray, A: np.ndarray, Ay: np.ndarray):
    S = np.flatnonzero(support)
    ns = len(S)
    K = np.empty((ns + 1, ns + 1))
    K[:ns, :ns] = 2.0 * A[np.ix_(S, S)]
    K[:ns, ns] = -1.0
    K[ns, :ns] = 1.0
    K[ns, ns] = 0.0
    rhs = np.concatenate([2.0 * Ay[S], [1.0]])
    sol = np.linalg.solve(K, rhs)
    return S, sol[:ns], sol[ns]


def project_simplex_metric(y: np.ndarray, A: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """argmin over the simplex of (q - y)' A (q - y), A symmetric PD.

    Active-set iteration: solve the equality-constrained problem on the
    current support, drop the most negative coordinate while infeasible,
    then add the coordinate with the most negative reduced gradient until
    dual feasible.
    """
    y = np.asarray(y, dtype=float)
    r = len(y)
    if r == 1:
        return np.ones(1)
    Ay = A @ y
    support = np.ones(r, dtype=bool)
    for _ in range(8 * r * r + 32):
        S, qS, lam = _solve_on_support(support, A, Ay)
        if qS.min() < -1e-13:
            support[S[np.argmin(qS)]] = False
            continue
        q = np.zeros(r)
        q[S] = np.maximum(qS, 0.0)
        off = np.flatnonzero(~support)
        if off.size == 0:
            return q
        mu = 2.0 * (A[off] @ q - Ay[off]) - lam
        scale = max(1.0, float(np.abs(Ay).max()))
        if mu.min() >= -tol * scale:
            return q
        support[off[np.argmin(mu)]] = True
    return _projected_gradient(y, A, Ay, tol)


def _projected_gradient(y, A, Ay, tol):
    # strongly convex (A >= I), so this converges linearly; used only if the
    # active-set loop cycles, which the iteration cap makes survivable
    L = 2.0 * float(np.linalg.eigvalsh(A)[-1])
    q = project_simplex(y)
    for _ in range(500_000):
        q_next = project_simplex(q - (2.0 * (A @ q) - 2.0 * Ay) / L)
        if kkt_residual(q_next, y, A) <= tol:
            return q_next
        q = q_next
    raise RuntimeError("simplex projection failed to reach tolerance")
