"""Shared fixtures and independent reference implementations.

The oracles here are deliberately naive (explicit loops, finite differences)
so they share no code path with the vectorized package.
"""

import numpy as np
import pytest


def ref_f(kind, k, s):
    return k if kind == "constant" else s ** k


def ref_V(X, edges, kind, k):
    """Potential by a per-edge loop using the elementary antiderivative."""
    total = 0.0
    for i, j in edges:
        s = 1.0 - float(np.dot(X[i], X[j]))
        total += k * s if kind == "constant" else s ** (k + 1) / (k + 1)
    return total


def ref_rhs(X, edges, kind, k):
    """Agent-by-agent closed loop P_i sum_j f(s_ij) x_j."""
    out = np.zeros_like(X)
    for i in range(len(X)):
        u = np.zeros(X.shape[1])
        for a, b in edges:
            if i in (a, b):
                j = b if a == i else a
                u += ref_f(kind, k, 1.0 - float(np.dot(X[i], X[j]))) * X[j]
        out[i] = u - np.dot(u, X[i]) * X[i]
    return out


def fd_gradient(fun, X, h=1e-6):
    """Central-difference ambient gradient of a scalar function of X."""
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (fun(X + E) - fun(X - E)) / (2 * h)
    return G


def fd_jacobian(fun, X, h=1e-6):
    """Central-difference Jacobian of an array-valued map, shape (X.size, X.size)."""
    n = X.size
    J = np.zeros((n, n))
    for k in range(n):
        E = np.zeros(n)
        E[k] = h
        E = E.reshape(X.shape)
        J[:, k] = ((fun(X + E) - fun(X - E)) / (2 * h)).ravel()
    return J


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
