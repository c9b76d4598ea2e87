"""Edge gain functions f(s) on s in [0, 2] and their admissibility checks.

A protocol gain must satisfy, for every s in (0, 2],

    (i)   f(s) > 0
    (iii) (n - 2 + s) s f(s) - (2 - s) s^2 f'(s) > 0

Symmetry f_ij = f_ji is structural: gains are looked up by unordered edge.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

GRID_DELTA = 1e-8


class GainCheckError(RuntimeError):
    """Grid checker and closed-form criterion disagree."""


@dataclass(frozen=True)
class GainFunction:
    f: Callable
    f_prime: Callable
    kind: str
    param: Optional[float] = None
    antiderivative: Optional[Callable] = field(default=None, compare=False)

    @property
    def name(self):
        if self.kind == "custom":
            return "custom"
        p = self.param
        return f"{self.kind}:{int(p) if float(p).is_integer() else p}"

    def values(self, s):
        """Vectorized (f, f') without range checks; used inside the flows."""
        s = np.asarray(s, dtype=float)
        return (np.broadcast_to(self.f(s), s.shape).astype(float),
                np.broadcast_to(self.f_prime(s), s.shape).astype(float))

    def integral(self, s):
        """Integral of f from 0 to s."""
        if self.antiderivative is not None:
            return float(self.antiderivative(float(s)))
        return adaptive_simpson(self.f, 0.0, float(s), tol=1e-12)

    def max_value(self):
        grid = np.linspace(0.0, 2.0, 401)
        return float(np.max(np.abs(self.values(grid)[0])))

    def to_dict(self):
        if self.kind == "custom":
            return {"custom": True}
        return {self.kind: self.param}


def constant(k):
    k = float(k)
    return GainFunction(
        f=lambda s: np.full_like(np.asarray(s, dtype=float), k),
        f_prime=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        kind="constant",
        param=k,
        antiderivative=lambda s: k * s,
    )


def power(k):
    """f(s) = s^k for integer k >= 0."""
    if int(k) != k or k < 0:
        raise ValueError("power gain exponent must be a non-negative integer")
    k = int(k)

    def fp(s):
        s = np.asarray(s, dtype=float)
        if k == 0:
            return np.zeros_like(s)
        if k == 1:
            return np.ones_like(s)
        return k * s ** (k - 1)

    return GainFunction(
        f=lambda s: np.asarray(s, dtype=float) ** k,
        f_prime=fp,
        kind="power",
        param=k,
        antiderivative=lambda s: s ** (k + 1) / (k + 1),
    )


def custom(f, f_prime, rng=None, n_points=100, rtol=1e-5):
    """Register a user gain; `f_prime` is validated against central differences of `f`."""
    rng = np.random.default_rng(0) if rng is None else rng
    s = rng.uniform(1e-3, 2.0 - 1e-3, n_points)
    h = 1e-6
    fd = (np.asarray(f(s + h), dtype=float) - np.asarray(f(s - h), dtype=float)) / (2 * h)
    given = np.asarray(f_prime(s), dtype=float)
    scale = np.maximum(np.abs(given), 1e-8 * max(1.0, float(np.max(np.abs(f(s))))))
    rel = np.abs(fd - given) / scale
    if np.any(rel > rtol):
        k = int(np.argmax(rel))
        raise ValueError(f"f_prime disagrees with finite differences at s={s[k]:.6g} "
                         f"(relative error {rel[k]:.2e})")
    return GainFunction(f=f, f_prime=f_prime, kind="custom")


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=50):
    """Adaptive Simpson quadrature of a scalar function on [a, b]."""
    def g(x):
        return float(np.asarray(f(np.asarray(x, dtype=float))))

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = g(a), g(b), g(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def evaluate(g, s):
    """(f(s), f'(s)) at a single chordal half-square s in [0, 2]."""
    s = float(s)
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"s = {s} outside [0, 2]")
    f, fp = g.values(s)
    return float(f), float(fp)


def condition_iii_expression(g, n, s):
    f, fp = g.values(s)
    return (n - 2.0 + s) * s * f - (2.0 - s) * s * s * fp


def check_grid(grid_points):
    half = max(grid_points // 2, 50)
    grid = np.union1d(np.geomspace(GRID_DELTA, 2.0, half), np.linspace(GRID_DELTA, 2.0, half))
    return grid


def closed_form_condition_iii(g, n):
    """Exact verdict for the built-in families, None for custom gains."""
    if g.kind == "constant":
        return g.param > 0 and n >= 2
    if g.kind == "power":
        return g.param <= n / 2.0 - 1.0
    return None


@dataclass
class GainCheck:
    gain: str
    dim: int
    condition_i: bool
    condition_iii: bool
    witness: Optional[float] = None
    first_violation: Optional[float] = None
    min_value: Optional[float] = None
    closed_form: Optional[bool] = None
    notes: list = field(default_factory=list)

    @property
    def admissible(self):
        return self.condition_i and self.condition_iii

    def to_dict(self):
        return {
            "gain": self.gain,
            "dim": self.dim,
            "verdict": "pass" if self.admissible else "fail",
            "condition_i": self.condition_i,
            "condition_iii": self.condition_iii,
            "witness": self.witness,
            "first_violation": self.first_violation,
            "min_value": self.min_value,
            "closed_form": self.closed_form,
            "notes": self.notes,
        }


def check_condition_i(g, grid_points=1000):
    s = check_grid(grid_points)
    f, _ = g.values(s)
    return bool(np.all(f > 0))


def check_condition_iii(g, n, grid_points=1000):
    """Check condition (iii) on a geometric-plus-uniform grid over (1e-8, 2].

    On failure the witness is the grid point with the most negative value of
    the expression; the first (smallest) violating grid point is reported too.
    """
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    if grid_points < 100:
        raise ValueError("need at least 100 grid points")
    s = check_grid(grid_points)
    expr = condition_iii_expression(g, n, s)
    bad = ~(expr > 0)
    ok = not bool(np.any(bad))
    out = GainCheck(gain=g.name, dim=n, condition_i=check_condition_i(g, grid_points),
                    condition_iii=ok, min_value=float(np.min(expr)))
    if not ok:
        out.first_violation = float(s[np.argmax(bad)])
        out.witness = float(s[np.argmin(expr)])
    exact = closed_form_condition_iii(g, n)
    out.closed_form = exact
    if exact is not None and exact != ok:
        raise GainCheckError(f"grid check ({ok}) and closed form ({exact}) disagree for {g.name}, n={n}")
    if g.kind == "custom":
        out.notes.append("real analyticity of custom gains is assumed, not verified")
    return out


def is_admissible(g, n, grid_points=1000):
    return check_condition_iii(g, n, grid_points).admissible


def parse_gain(spec):
    """Parse 'constant:5' / 'power:1' strings or {'constant': 5} / {'power': 1} objects."""
    if isinstance(spec, GainFunction):
        return spec
    if isinstance(spec, str):
        kind, _, val = spec.partition(":")
        if not val:
            raise ValueError(f"gain spec {spec!r} should look like 'constant:5' or 'power:1'")
        spec = {kind: float(val)}
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"gain must be an object with one key, got {spec!r}")
    (kind, val), = spec.items()
    if kind == "constant":
        if not float(val) > 0:
            raise ValueError("constant gain must be positive")
        return constant(val)
    if kind == "power":
        return power(val)
    raise ValueError(f"unknown gain kind {kind!r}")


def resolve_edge_gains(graph, gains):
    """Map a shared gain or a {label: gain} dict onto the graph's edge list."""
    if isinstance(gains, GainFunction):
        return [gains] * graph.num_edges
    out = []
    for e in graph.edges:
        label = graph.gain_label(e)
        if label not in gains:
            raise KeyError(f"no gain registered for label {label!r} (edge {e})")
        out.append(gains[label])
    return out


def edge_gain_values(graph, gains, s):
    """f and f' evaluated per edge; `s` has the edge axis last."""
    per_edge = resolve_edge_gains(graph, gains)
    s = np.asarray(s, dtype=float)
    if len(set(map(id, per_edge))) <= 1:
        if not per_edge:
            return np.zeros_like(s), np.zeros_like(s)
        return per_edge[0].values(s)
    f = np.empty_like(s)
    fp = np.empty_like(s)
    for k, g in enumerate(per_edge):
        f[..., k], fp[..., k] = g.values(s[..., k])
    return f, fp
