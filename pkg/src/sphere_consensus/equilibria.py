"""Named equilibrium configurations and the per-agent categorization."""

import numpy as np

from .geometry import normalize, platonic_vertices
from .linearization import equilibrium_residual
from .protocols import sphere_input
from .topology import named_graph

SOLID_GRAPHS = {
    "tetrahedron": "tetrahedral",
    "octahedron": "octahedral",
    "cube": "cube",
    "icosahedron": "icosahedral",
    "dodecahedron": "dodecahedral",
}

KINDS = ("consensus", "great_circle_cycle", *SOLID_GRAPHS)

ALIGNED = "aligned"
ANTI_ALIGNED = "anti-aligned"
NULL_INPUT = "null-input"


class NotAnEquilibrium(ValueError):
    def __init__(self, residual):
        super().__init__(f"configuration is not an equilibrium (residual {residual:.3e})")
        self.residual = residual


def _embed(V, dim):
    V = np.asarray(V, dtype=float)
    if dim + 1 < V.shape[1]:
        raise ValueError(f"configuration needs at least S^{V.shape[1] - 1}")
    out = np.zeros((V.shape[0], dim + 1))
    out[:, :V.shape[1]] = V
    return out


def great_circle(n_agents, dim=2):
    """Agents at angles 2 pi k / N on the equator of the first two coordinates."""
    ang = 2.0 * np.pi * np.arange(n_agents) / n_agents
    return _embed(np.column_stack([np.cos(ang), np.sin(ang)]), dim)


def construct(kind, n_agents=None, dim=2, c=None, graph=None):
    """Return (configuration, graph) for a named equilibrium.

    Platonic kinds fix N and the graph; `dim` embeds the configuration in a
    higher-dimensional sphere by zero padding.
    """
    if kind in SOLID_GRAPHS:
        if n_agents is not None and n_agents != len(platonic_vertices(kind)):
            raise ValueError(f"{kind} has {len(platonic_vertices(kind))} agents")
        return _embed(platonic_vertices(kind), dim), named_graph(SOLID_GRAPHS[kind])
    if kind == "great_circle_cycle":
        if n_agents is None or n_agents < 3:
            raise ValueError("great_circle_cycle needs n_agents >= 3")
        if dim < 1:
            raise ValueError("dim must be >= 1")
        return great_circle(n_agents, dim), named_graph("cycle", n_agents)
    if kind == "consensus":
        if graph is None:
            if n_agents is None:
                raise ValueError("consensus needs a graph or n_agents")
            graph = named_graph("complete", n_agents)
        x = np.eye(dim + 1)[0] if c is None else normalize(np.asarray(c, dtype=float))
        return np.tile(x, (graph.num_nodes, 1)), graph
    raise ValueError(f"unknown equilibrium kind {kind!r}")


def categorize(X, graph, gains, residual_tol=1e-8, threshold=1e-10):
    """Label each agent aligned / anti-aligned / null-input by its input u_i."""
    res = equilibrium_residual(X, graph, gains)
    if res >= residual_tol:
        raise NotAnEquilibrium(res)
    U = sphere_input(X, graph, gains)
    out = []
    for x, u in zip(np.asarray(X, dtype=float), U):
        if np.linalg.norm(u) <= threshold:
            out.append(NULL_INPUT)
        elif np.dot(u, x) > 0:
            out.append(ALIGNED)
        else:
            out.append(ANTI_ALIGNED)
    return out
