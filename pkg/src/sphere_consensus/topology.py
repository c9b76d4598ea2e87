"""Undirected simple graphs and the named topologies used in the experiments."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import platonic_vertices

DEFAULT_GAIN = "default"

_PLATONIC = {
    "tetrahedral": ("tetrahedron", 4),
    "octahedral": ("octahedron", 6),
    "cube": ("cube", 8),
    "icosahedral": ("icosahedron", 12),
    "dodecahedral": ("dodecahedron", 20),
}

GRAPH_KINDS = ("cycle", "complete", "path", "barbell", *_PLATONIC)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 0..num_nodes-1.

    Edges are stored as sorted pairs, so a per-edge gain label keyed on an
    edge is automatically shared by both endpoints.
    """

    num_nodes: int
    edges: tuple
    edge_gain: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("graph needs at least one node")
        canon = []
        for e in self.edges:
            i, j = (int(k) for k in e)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.num_nodes and 0 <= j < self.num_nodes):
                raise ValueError(f"edge {(i, j)} out of range for {self.num_nodes} nodes")
            canon.append((min(i, j), max(i, j)))
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        labels = {}
        for e, lab in dict(self.edge_gain).items():
            key = (min(e), max(e))
            if key not in canon:
                raise ValueError(f"gain label for non-edge {e}")
            labels[key] = lab
        object.__setattr__(self, "edge_gain", labels)

    @property
    def num_edges(self):
        return len(self.edges)

    def gain_label(self, edge):
        return self.edge_gain.get((min(edge), max(edge)), DEFAULT_GAIN)

    def neighbors(self, i):
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def degrees(self):
        deg = np.zeros(self.num_nodes, dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self):
        A = np.zeros((self.num_nodes, self.num_nodes))
        for a, b in self.edges:
            A[a, b] = A[b, a] = 1.0
        return A

    def laplacian(self, weights=None):
        """Weighted Laplacian; `weights` is a per-edge sequence aligned with `edges`."""
        w = np.ones(self.num_edges) if weights is None else np.asarray(weights, dtype=float)
        L = np.zeros((self.num_nodes, self.num_nodes))
        for (a, b), wk in zip(self.edges, w):
            L[a, b] -= wk
            L[b, a] -= wk
            L[a, a] += wk
            L[b, b] += wk
        return L

    def edge_index(self):
        """Endpoint index arrays (I, J) aligned with `edges`."""
        if not self.edges:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        e = np.array(self.edges, dtype=int)
        return e[:, 0], e[:, 1]

    def is_connected(self):
        return is_connected(self)

    def to_dict(self):
        return {"n_nodes": self.num_nodes, "edges": [list(e) for e in self.edges]}


def is_connected(g):
    seen = {0}
    queue = deque([0])
    adj = {i: [] for i in range(g.num_nodes)}
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.num_nodes


def cycle(n):
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def barbell(n=6):
    """Two complete clusters of n/2 nodes joined by one bridge edge."""
    if n < 4 or n % 2:
        raise ValueError("barbell needs an even node count >= 4")
    h = n // 2
    edges = [(i, j) for i in range(h) for j in range(i + 1, h)]
    edges += [(h + i, h + j) for i in range(h) for j in range(i + 1, h)]
    edges.append((h - 1, h))
    return Graph(n, edges)


def platonic_graph(kind):
    """Edge graph of a platonic solid: vertices joined to their nearest neighbours."""
    solid, _ = _PLATONIC[kind]
    v = platonic_vertices(solid)
    d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    dmin = d.min()
    n = len(v)
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if d[i, j] < dmin * (1 + 1e-9)])


def named_graph(kind, n=None):
    """Build one of the standard topologies.

    Platonic kinds fix the node count; passing a different `n` is an error.
    """
    if kind in _PLATONIC:
        expected = _PLATONIC[kind][1]
        if n is not None and n != expected:
            raise ValueError(f"{kind} graph has {expected} nodes, got n={n}")
        return platonic_graph(kind)
    if n is None:
        raise ValueError(f"graph kind {kind!r} needs a node count")
    if kind == "cycle":
        return cycle(n)
    if kind == "complete":
        return complete(n)
    if kind in ("path", "tree"):
        return path(n)
    if kind == "barbell":
        return barbell(n)
    raise ValueError(f"unknown graph kind {kind!r}")


def random_connected_graph(n, rng, p=0.5):
    """Random spanning tree plus independent extra edges with probability p."""
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(0, k)])))) for k in range(1, n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    return Graph(n, sorted(edges))


def graph_from_config(cfg):
    """Parse `{"kind": "cycle", "n": 6}` or `{"edges": [[0, 1]], "n_nodes": 2}`."""
    if not isinstance(cfg, dict):
        raise ValueError("graph config must be an object")
    if "kind" in cfg:
        return named_graph(cfg["kind"], cfg.get("n"))
    if "edges" in cfg:
        n = cfg.get("n_nodes")
        if n is None:
            n = 1 + max((max(e) for e in cfg["edges"]), default=0)
        labels = {tuple(e["edge"]): e["gain"] for e in cfg.get("edge_gains", [])}
        return Graph(int(n), [tuple(e) for e in cfg["edges"]], labels)
    raise ValueError("graph config needs 'kind' or 'edges'")
