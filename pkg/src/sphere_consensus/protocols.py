"""Consensus feedback laws and closed-loop right-hand sides.

Every function takes stacked states: sphere configurations have shape
(..., N, n+1) and rotation configurations (..., N, 3, 3), so a whole Monte
Carlo ensemble can be pushed through one call. All quantities are in the
world frame.
"""

from dataclasses import dataclass

import numpy as np

from .gains import edge_gain_values
from .geometry import antisymmetrize, skew


@dataclass(frozen=True)
class CircleProtocol:
    """Reshaped circle consensus protocol; only needs an upper bound on N."""

    n_bound: int

    def __post_init__(self):
        if self.n_bound < 2:
            raise ValueError("n_bound must be >= 2")

    def __call__(self, theta):
        return circle_reshape(theta, self.n_bound)


def edge_s(X, graph):
    """Chordal half-squares s_ij = |x_i - x_j|^2 / 2 per edge, shape (..., E)."""
    I, J = graph.edge_index()
    d = X[..., I, :] - X[..., J, :]
    return 0.5 * np.sum(d * d, axis=-1)


def _weights(graph, values, batch_shape):
    I, J = graph.edge_index()
    W = np.zeros(batch_shape + (graph.num_nodes, graph.num_nodes))
    W[..., I, J] = values
    W[..., J, I] = values
    return W


def gain_matrix(X, graph, gains):
    """Symmetric matrix W with W_ij = f_ij(s_ij) on edges and zero elsewhere."""
    X = np.asarray(X, dtype=float)
    f, _ = edge_gain_values(graph, gains, edge_s(X, graph))
    return _weights(graph, f, X.shape[:-2])


def sphere_input(X, graph, gains):
    """u_i = sum_j f_ij(s_ij) x_j."""
    X = np.asarray(X, dtype=float)
    return gain_matrix(X, graph, gains) @ X


def sphere_rhs(X, graph, gains):
    """x_i' = P_i u_i = u_i - <u_i, x_i> x_i."""
    X = np.asarray(X, dtype=float)
    U = sphere_input(X, graph, gains)
    return U - np.sum(U * X, axis=-1, keepdims=True) * X


def so3_s(R, graph):
    """s_ij = 3 - <R_i, R_j> = |R_i - R_j|_F^2 / 2 per edge."""
    I, J = graph.edge_index()
    d = R[..., I, :, :] - R[..., J, :, :]
    return 0.5 * np.sum(d * d, axis=(-1, -2))


def _incidence(graph):
    I, J = graph.edge_index()
    inc = np.zeros((graph.num_edges, graph.num_nodes))
    inc[np.arange(graph.num_edges), I] = 1.0
    inc[np.arange(graph.num_edges), J] = -1.0
    return inc


def so3_naive_input(R, graph, gains, frame="world"):
    """Gradient protocol on SO(3) for R_i' = Omega_i R_i.

    frame="body" returns sum_j f_ij (R_i^T R_j - R_j^T R_i), the body-frame
    velocity built from relative rotations; frame="world" returns the same
    velocity expressed for left multiplication, R_i (.) R_i^T, which equals
    sum_j f_ij (R_j R_i^T - R_i R_j^T).
    """
    R = np.asarray(R, dtype=float)
    I, J = graph.edge_index()
    f, _ = edge_gain_values(graph, gains, so3_s(R, graph))
    A = R[..., J, :, :] @ np.swapaxes(R[..., I, :, :], -1, -2)
    K = f[..., None, None] * (A - np.swapaxes(A, -1, -2))
    omega = np.einsum("en,...exy->...nxy", _incidence(graph), K)
    if frame == "body":
        omega = np.swapaxes(R, -1, -2) @ omega @ R
    elif frame != "world":
        raise ValueError(f"unknown frame {frame!r}")
    return antisymmetrize(omega)


def circle_reshape(theta, n_bound):
    """Piecewise-linear circle protocol with breakpoints at +-pi/N.

    Identity on [-pi/N, pi/N]; linear back down to zero at +-pi outside.
    """
    theta = np.asarray(theta, dtype=float)
    N = float(n_bound)
    lo = -(np.pi + theta) / (N - 1.0)
    hi = (np.pi - theta) / (N - 1.0)
    out = np.where(theta < -np.pi / N, lo, np.where(theta > np.pi / N, hi, theta))
    return out if out.ndim else float(out)


def relative_arc(R_i, R_j):
    """Signed angle from y_i to y_j measured in the (y_i, z_i) plane.

    Returns the arc and a mask of degenerate pairs (y_j parallel to x_i) where
    the angle is undefined.
    """
    yi, zi, yj = R_i[..., :, 1], R_i[..., :, 2], R_j[..., :, 1]
    a = np.sum(yi * yj, axis=-1)
    b = np.sum(zi * yj, axis=-1)
    r2 = a * a + b * b
    degenerate = r2 < 1e-24
    r = np.sqrt(np.where(degenerate, 1.0, r2))
    sgn = np.where(b >= 0.0, 1.0, -1.0)
    return np.arccos(np.clip(a / r, -1.0, 1.0)) * sgn, degenerate


def circle_gains(R, graph, circle):
    """Ordered-pair lifted gains g_ij; returns (g_ij, g_ji) per edge."""
    I, J = graph.edge_index()
    Ri, Rj = R[..., I, :, :], R[..., J, :, :]
    th_ij, deg_ij = relative_arc(Ri, Rj)
    th_ji, deg_ji = relative_arc(Rj, Ri)
    g_ij = np.where(deg_ij, 0.0, circle_reshape(th_ij, circle.n_bound))
    g_ji = np.where(deg_ji, 0.0, circle_reshape(th_ji, circle.n_bound))
    return g_ij, g_ji


def so3_composite_input(R, graph, gains, circle):
    """Omega_i = S(x_i x u_i + sum_j g_ij x_i) with x the first columns of R.

    u_i is the sphere protocol evaluated on the first columns; g_ij lifts the
    circle protocol to the remaining two columns.
    """
    R = np.asarray(R, dtype=float)
    X = R[..., :, 0]
    U = sphere_input(X, graph, gains)
    g_ij, g_ji = circle_gains(R, graph, circle)
    inc = np.abs(_incidence(graph))
    I, _ = graph.edge_index()
    tail = np.zeros_like(inc)
    tail[np.arange(graph.num_edges), I] = 1.0
    gsum = g_ij @ tail + g_ji @ (inc - tail)
    w = np.cross(X, U) + gsum[..., None] * X
    return skew(w)


def sphere_rhs_from_rotation_input(R, omega):
    """First-column dynamics x_i' = Omega_i x_i."""
    return (omega @ R)[..., :, 0]
