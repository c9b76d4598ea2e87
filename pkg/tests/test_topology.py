import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_consensus import topology as top


def test_edges_are_canonical():
    g = top.Graph(3, [(2, 0), (1, 2)])
    assert g.edges == ((0, 2), (1, 2))
    assert g.neighbors(2) == [0, 1]


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)]])
def test_invalid_graphs_rejected(edges):
    with pytest.raises(ValueError):
        top.Graph(3, edges)


def test_gain_labels_shared_by_both_ends():
    g = top.Graph(3, [(0, 1), (1, 2)], {(1, 0): "strong"})
    assert g.gain_label((0, 1)) == g.gain_label((1, 0)) == "strong"
    assert g.gain_label((2, 1)) == top.DEFAULT_GAIN
    with pytest.raises(ValueError):
        top.Graph(3, [(0, 1)], {(0, 2): "x"})


@pytest.mark.parametrize("kind,n,edges,degree", [
    ("cycle", 6, 6, 2), ("complete", 6, 15, 5), ("path", 5, 4, None),
    ("tetrahedral", None, 6, 3), ("octahedral", None, 12, 4), ("cube", None, 12, 3),
    ("icosahedral", None, 30, 5), ("dodecahedral", None, 30, 3),
])
def test_named_graphs(kind, n, edges, degree):
    g = top.named_graph(kind, n)
    assert g.num_edges == edges
    assert g.is_connected()
    if degree is not None:
        assert set(g.degrees()) == {degree}


def test_barbell_shape():
    g = top.barbell(6)
    assert g.num_edges == 7
    assert sorted(g.degrees()) == [2, 2, 2, 2, 3, 3]


def test_platonic_node_count_enforced():
    with pytest.raises(ValueError):
        top.named_graph("cube", 6)


def test_disconnected_detected():
    assert not top.Graph(4, [(0, 1), (2, 3)]).is_connected()


@given(st.integers(2, 12), st.integers(0, 10_000), st.floats(0, 1))
def test_random_graphs_connected_with_valid_laplacian(n, seed, p):
    g = top.random_connected_graph(n, np.random.default_rng(seed), p)
    assert g.is_connected()
    w = np.random.default_rng(seed).uniform(0.1, 2.0, g.num_edges)
    L = g.laplacian(w)
    assert np.allclose(L, L.T)
    assert np.allclose(L.sum(axis=1), 0.0)
    # connected => the kernel of L is exactly the constants
    assert np.sum(np.linalg.eigvalsh(L) < 1e-9) == 1


def test_graph_from_config():
    assert top.graph_from_config({"kind": "cycle", "n": 4}) == top.cycle(4)
    g = top.graph_from_config({"edges": [[0, 1], [1, 2]],
                               "edge_gains": [{"edge": [1, 2], "gain": "weak"}]})
    assert g.num_nodes == 3 and g.gain_label((1, 2)) == "weak"
    with pytest.raises(ValueError):
        top.graph_from_config({"n": 3})
