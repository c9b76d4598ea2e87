"""Potential V = sum over edges of the integral of f from 0 to s_ij, and its rate."""

from dataclasses import dataclass

import numpy as np

from .gains import resolve_edge_gains
from .protocols import edge_s, so3_s, sphere_input


@dataclass
class EnergyValue:
    V: float
    per_edge: dict

    def __float__(self):
        return self.V


def potential(cfg, graph, gains, space="sphere"):
    """Potential of a single configuration.

    space="so3" uses s_ij = 3 - <R_i, R_j> and the factor 1/2 of the
    rotation-group potential.
    """
    cfg = np.asarray(cfg, dtype=float)
    if space == "sphere":
        s = edge_s(cfg, graph)
        scale = 1.0
    elif space == "so3":
        s = so3_s(cfg, graph)
        scale = 0.5
    else:
        raise ValueError(f"unknown space {space!r}")
    per_edge = {}
    for e, g, se in zip(graph.edges, resolve_edge_gains(graph, gains), s):
        per_edge[e] = scale * g.integral(se)
    return EnergyValue(V=float(sum(per_edge.values())), per_edge=per_edge)


def potential_batch(X, graph, gains):
    """V for a stack of sphere configurations (..., N, n+1); built-in gains only."""
    s = edge_s(np.asarray(X, dtype=float), graph)
    per_edge = resolve_edge_gains(graph, gains)
    out = np.zeros(s.shape[:-1])
    for k, g in enumerate(per_edge):
        if g.antiderivative is None:
            out += np.vectorize(g.integral)(s[..., k])
        else:
            out += g.antiderivative(s[..., k])
    return out


def euclidean_gradient(X, graph, gains):
    """Gradient of the ambient extension: -sum_j f_ij(s_ij) x_j per agent."""
    return -sphere_input(X, graph, gains)


def energy_rate(X, graph, gains):
    """dV/dt along the closed loop: -sum_i (|u_i|^2 - <u_i, x_i>^2) <= 0."""
    X = np.asarray(X, dtype=float)
    U = sphere_input(X, graph, gains)
    ux = np.sum(U * X, axis=-1)
    return -np.sum(np.sum(U * U, axis=-1) - ux * ux, axis=-1)
