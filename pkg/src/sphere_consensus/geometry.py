"""Manifold primitives for the n-sphere and SO(3).

Points, tangent vectors and rotations are plain numpy arrays. The checker
functions below enforce the invariants where a caller hands data in from
outside (configs, CLI input); the hot paths in the protocol and simulation
modules work on stacked arrays directly.
"""

import numpy as np

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10
ROTATION_TOL = 1e-10


def unit_vector(coords, tol=UNIT_TOL):
    """Return `coords` as a float array, raising if it is not unit norm."""
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"expected a vector in R^(n+1), n >= 1, got shape {x.shape}")
    err = abs(np.linalg.norm(x) - 1.0)
    if err > tol:
        raise ValueError(f"not a unit vector: | |x| - 1 | = {err:.3e}")
    return x


def normalize(v, axis=-1):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=axis, keepdims=True)


def is_tangent(x, v, tol=TANGENT_TOL):
    return abs(float(np.dot(x, v))) <= tol


def project(x, v):
    """Orthogonal projection of `v` onto the tangent space at `x`.

    Works on stacks: `x` and `v` of shape (..., n+1).
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.sum(v * x, axis=-1, keepdims=True) * x


def projector(x):
    """The matrix I - x x^T."""
    x = np.asarray(x, dtype=float)
    return np.eye(x.shape[-1]) - np.multiply.outer(x, x)


def retract(x, v):
    """Metric-projection retraction (x + v) / |x + v|, stack-aware."""
    return normalize(np.asarray(x, dtype=float) + v)


def geodesic_and_chordal(x, y):
    """Geodesic angle and chordal half-square s = 1 - <x, y> between unit vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("points live on spheres of different dimension")
    c = float(np.clip(np.dot(x, y), -1.0, 1.0))
    s = 0.5 * float(np.sum((x - y) ** 2))
    return float(np.arccos(c)), min(max(s, 0.0), 2.0)


def skew(w):
    """3x3 matrix S(w) with S(w) y = w x y. Accepts stacks of shape (..., 3)."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def unskew(omega, tol=ROTATION_TOL):
    """Inverse of `skew`; rejects matrices that are not antisymmetric."""
    omega = np.asarray(omega, dtype=float)
    asym = np.max(np.abs(omega + np.swapaxes(omega, -1, -2)), initial=0.0)
    if asym > tol:
        raise ValueError(f"matrix is not antisymmetric (|A + A^T|_max = {asym:.3e})")
    return np.stack([omega[..., 2, 1], omega[..., 0, 2], omega[..., 1, 0]], axis=-1)


def antisymmetrize(a):
    return 0.5 * (a - np.swapaxes(a, -1, -2))


def is_rotation(r, tol=ROTATION_TOL):
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    orth = np.linalg.norm(r.T @ r - np.eye(3))
    return orth <= tol and abs(np.linalg.det(r) - 1.0) <= tol


def rotation(entries, tol=ROTATION_TOL):
    r = np.asarray(entries, dtype=float)
    if not is_rotation(r, tol):
        raise ValueError("matrix is not in SO(3)")
    return r


def expm_skew(omega):
    """exp(Omega) for antisymmetric 3x3 Omega (Rodrigues), stack-aware."""
    omega = np.asarray(omega, dtype=float)
    w = np.stack([omega[..., 2, 1], omega[..., 0, 2], omega[..., 1, 0]], axis=-1)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    small = theta < 1e-6
    t = np.where(small, 1.0, theta)
    # series branch keeps the coefficients accurate near theta = 0
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(t) / t)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(t)) / t**2)
    return np.eye(3) + a * omega + b * (omega @ omega)


def rot_axis(axis, angle):
    """Rotation by `angle` about the unit vector `axis`."""
    return expm_skew(skew(normalize(axis) * angle))


def quaternion_to_rotation(q):
    """Homogeneous quaternion-to-matrix map for q = (w, x, y, z); q and -q agree."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    n2 = w * w + x * x + y * y + z * z
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = w * w + x * x - y * y - z * z
    out[..., 0, 1] = 2 * (x * y - w * z)
    out[..., 0, 2] = 2 * (x * z + w * y)
    out[..., 1, 0] = 2 * (x * y + w * z)
    out[..., 1, 1] = w * w - x * x + y * y - z * z
    out[..., 1, 2] = 2 * (y * z - w * x)
    out[..., 2, 0] = 2 * (x * z - w * y)
    out[..., 2, 1] = 2 * (y * z + w * x)
    out[..., 2, 2] = w * w - x * x - y * y + z * z
    return out / n2[..., None, None]


def sample_unit_sphere(n, rng, size=None):
    """Uniform sample(s) on S^n via normalized standard Gaussians.

    `size` adds leading dimensions: size=(T, N) gives shape (T, N, n+1).
    """
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    shape = (n + 1,) if size is None else tuple(np.atleast_1d(size)) + (n + 1,)
    return normalize(rng.standard_normal(shape))


def sample_uniform_rotation(rng, size=None):
    """Haar-uniform rotation(s): a uniform unit quaternion mapped to SO(3)."""
    q = sample_unit_sphere(3, rng, size)
    return quaternion_to_rotation(q)


def platonic_vertices(kind):
    """Unit-norm vertex sets of the five platonic solids."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    if kind == "tetrahedron":
        v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    elif kind == "octahedron":
        v = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)
    elif kind == "cube":
        v = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)], dtype=float)
    elif kind == "icosahedron":
        v = []
        for a in (1, -1):
            for b in (phi, -phi):
                v += [[0, a, b], [a, b, 0], [b, 0, a]]
        v = np.array(v, dtype=float)
    elif kind == "dodecahedron":
        v = [[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)]
        for a in (1, -1):
            for b in (1, -1):
                v += [[0, a / phi, b * phi], [a / phi, b * phi, 0], [b * phi, 0, a / phi]]
        v = np.array(v, dtype=float)
    else:
        raise ValueError(f"unknown platonic solid {kind!r}")
    return normalize(v)
