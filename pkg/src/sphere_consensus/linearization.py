"""Linearization of the sphere consensus flow and equilibrium classification.

H is the negative Riemannian Hessian of V in ambient block form,

    H_ii = -<u_i, x_i> P_i - sum_j f'_ij P_i X_j P_i
    H_ij =  P_i (f_ij I - f'_ij x_j x_i^T) P_j        for {i, j} in E,

where the first term of H_ii is the curvature (Weingarten) correction that
turns the projected Euclidean Hessian into the intrinsic one.
"""

from dataclasses import dataclass, field

import numpy as np

from .gains import edge_gain_values
from .protocols import edge_s, sphere_input, sphere_rhs


class EigenSolverError(RuntimeError):
    pass


class CertificateError(RuntimeError):
    """The trace certificate and the spectrum contradict each other."""


def assemble_hessian(X, graph, gains):
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    U = sphere_input(X, graph, gains)
    f, fp = edge_gain_values(graph, gains, edge_s(X, graph))
    P = np.eye(d)[None] - X[:, :, None] * X[:, None, :]
    H = np.zeros((N * d, N * d))

    def block(i, j):
        return slice(i * d, (i + 1) * d), slice(j * d, (j + 1) * d)

    for i in range(N):
        H[block(i, i)] = -np.dot(U[i], X[i]) * P[i]
    for (i, j), fe, fpe in zip(graph.edges, f, fp):
        for a, b in ((i, j), (j, i)):
            pxb = P[a] @ X[b]
            H[block(a, a)] -= fpe * np.outer(pxb, pxb)
            H[block(a, b)] = P[a] @ (fe * np.eye(d) - fpe * np.outer(X[b], X[a])) @ P[b]
    return H


def blocks(H, N):
    d = H.shape[0] // N
    return H.reshape(N, d, N, d).transpose(0, 2, 1, 3)


def reduced_G(X, graph, gains, H=None):
    """G = sum_i (H_ii + sum_{j in N_i} H_ij), symmetric; returns (G, trace)."""
    X = np.asarray(X, dtype=float)
    N = X.shape[0]
    H = assemble_hessian(X, graph, gains) if H is None else H
    B = blocks(H, N)
    G = sum(B[i, i] for i in range(N))
    for i, j in graph.edges:
        G = G + B[i, j] + B[j, i]
    G = 0.5 * (G + G.T)
    return G, float(np.trace(G))


def trace_G_closed_form(X, graph, gains):
    """sum_i sum_{j in N_i} f (n - 2 + s) s - f' (2 - s) s^2, each edge counted from both ends."""
    X = np.asarray(X, dtype=float)
    n = X.shape[1] - 1
    s = edge_s(X, graph)
    f, fp = edge_gain_values(graph, gains, s)
    return float(2.0 * np.sum(f * (n - 2.0 + s) * s - fp * (2.0 - s) * s * s))


def symmetric_spectrum(M, vectors=False, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order; with `vectors=True` the
    matching orthonormal eigenvectors are the columns of the second output.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.linalg.norm(A), 1e-300)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(A[offdiag] ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = 100.0 * abs(apq)
                if apq == 0.0:
                    continue
                if sweep > 3 and abs(A[p, p]) + g == abs(A[p, p]) and abs(A[q, q]) + g == abs(A[q, q]):
                    # below the resolution of both diagonal entries
                    A[p, q] = A[q, p] = 0.0
                    continue
                h = A[q, q] - A[p, p]
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise EigenSolverError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(w)
    if vectors:
        return w[order], V[:, order]
    return w[order]


def tangent_basis(X):
    """Orthonormal basis of the tangent space of (S^n)^N at X, shape (N(n+1), Nn).

    Restricting H to this basis removes the N radial directions, which H maps
    to zero by construction.
    """
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    B = np.zeros((N * d, N * (d - 1)))
    for i, x in enumerate(X):
        # complete x to an orthonormal basis; the trailing columns span x^perp
        q, _ = np.linalg.qr(np.column_stack([x, np.eye(d)]))
        B[i * d:(i + 1) * d, i * (d - 1):(i + 1) * (d - 1)] = q[:, 1:d]
    return B


def tangent_spectrum(X, graph, gains, H=None, vectors=False):
    X = np.asarray(X, dtype=float)
    H = assemble_hessian(X, graph, gains) if H is None else H
    B = tangent_basis(X)
    Ht = B.T @ H @ B
    if vectors:
        w, V = symmetric_spectrum(Ht, vectors=True)
        return w, B @ V
    return symmetric_spectrum(Ht)


def in_consensus(X, graph, tol=1e-9):
    s = edge_s(np.asarray(X, dtype=float), graph)
    return bool(np.all(s < tol)) if s.size else True


def equilibrium_residual(X, graph, gains):
    return float(np.max(np.linalg.norm(sphere_rhs(X, graph, gains), axis=-1)))


@dataclass
class LinearizationReport:
    H: np.ndarray
    G: np.ndarray
    trace_G: float
    trace_G_closed_form: float
    spectrum: np.ndarray
    tangent_spectrum: np.ndarray
    max_eig: float
    verdict: str
    residual: float
    zero_eigs: int
    notes: list = field(default_factory=list)

    def to_dict(self, include_matrices=False):
        out = {
            "verdict": self.verdict,
            "residual": self.residual,
            "trace_G": self.trace_G,
            "trace_G_closed_form": self.trace_G_closed_form,
            "max_eig": self.max_eig,
            "zero_eigs": self.zero_eigs,
            "spectrum": [float(v) for v in self.spectrum],
            "tangent_spectrum": [float(v) for v in self.tangent_spectrum],
            "notes": list(self.notes),
        }
        if include_matrices:
            out["H"] = self.H.tolist()
            out["G"] = self.G.tolist()
        return out


def classify_equilibrium(X, graph, gains, residual_tol=1e-8, rel_tol=1e-8):
    """Assemble H and G at X and decide stability.

    exponentially-unstable: the tangent-restricted H has an eigenvalue above
    rel_tol * |H|. consensus-stable: X is a consensus and the restricted
    spectrum is nonpositive with exactly n zero eigenvalues. Anything else,
    including a configuration that is not an equilibrium, is indeterminate.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[1] - 1
    H = assemble_hessian(X, graph, gains)
    G, trG = reduced_G(X, graph, gains, H)
    trG_cf = trace_G_closed_form(X, graph, gains)
    full = symmetric_spectrum(H)
    tang = tangent_spectrum(X, graph, gains, H)
    res = equilibrium_residual(X, graph, gains)
    thresh = rel_tol * max(np.linalg.norm(H), 1e-300)
    max_eig = float(tang[-1]) if tang.size else 0.0
    zeros = int(np.sum(np.abs(tang) <= thresh))
    notes = []
    if trG > thresh and not full[-1] > 0:
        raise CertificateError(f"trace G = {trG:.3e} > 0 but max eigenvalue of H is {full[-1]:.3e}")
    if res >= residual_tol:
        verdict = "indeterminate"
        notes.append(f"not an equilibrium: residual {res:.3e} >= {residual_tol:.1e}")
    elif max_eig > thresh:
        verdict = "exponentially-unstable"
    elif in_consensus(X, graph) and zeros == n and graph.is_connected():
        verdict = "consensus-stable"
    else:
        verdict = "indeterminate"
        notes.append(f"{zeros} zero eigenvalues on the tangent space, no positive one")
    return LinearizationReport(H=H, G=G, trace_G=trG, trace_G_closed_form=trG_cf, spectrum=full,
                               tangent_spectrum=tang, max_eig=max_eig, verdict=verdict,
                               residual=res, zero_eigs=zeros, notes=notes)
