import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fd_gradient, ref_V
from sphere_consensus import energy as en
from sphere_consensus.gains import constant, custom, power
from sphere_consensus.geometry import sample_unit_sphere
from sphere_consensus.protocols import sphere_rhs
from sphere_consensus.topology import cycle, random_connected_graph

seeds = st.integers(0, 2**32 - 1)


@given(seeds, st.sampled_from([("constant", 3.0), ("power", 2)]))
def test_potential_matches_oracle(seed, gain):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(5, rng)
    X = sample_unit_sphere(2, rng, 5)
    kind, k = gain
    gf = constant(k) if kind == "constant" else power(k)
    assert en.potential(X, g, gf).V == pytest.approx(ref_V(X, g.edges, kind, k), abs=1e-12)
    assert en.potential_batch(X[None], g, gf)[0] == pytest.approx(ref_V(X, g.edges, kind, k), abs=1e-12)


def test_potential_per_edge_and_custom_quadrature():
    X = sample_unit_sphere(2, np.random.default_rng(0), 4)
    g = cycle(4)
    gf = custom(lambda s: 1.0 + s, lambda s: np.ones_like(s))
    val = en.potential(X, g, gf)
    s = [1 - X[i] @ X[j] for i, j in g.edges]
    assert val.V == pytest.approx(sum(si + si * si / 2 for si in s), abs=1e-10)
    assert set(val.per_edge) == set(g.edges)
    assert float(val) == val.V


@given(seeds)
def test_flow_is_negative_projected_gradient(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(5, rng)
    X = sample_unit_sphere(2, rng, 5)
    grad = fd_gradient(lambda Y: ref_V(Y, g.edges, "power", 1), X)
    proj = grad - np.sum(grad * X, axis=1, keepdims=True) * X
    F = sphere_rhs(X, g, power(1))
    assert np.allclose(F, -proj, atol=1e-7)
    assert np.allclose(en.euclidean_gradient(X, g, power(1)), grad, atol=1e-7)


@given(seeds)
def test_energy_rate_nonpositive_and_matches_derivative(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(5, rng)
    X = sample_unit_sphere(3, rng, 5)
    gf = constant(2.0)
    rate = en.energy_rate(X, g, gf)
    assert rate <= 1e-15
    h = 1e-6
    F = sphere_rhs(X, g, gf)
    fd = (en.potential(X + h * F, g, gf).V - en.potential(X - h * F, g, gf).V) / (2 * h)
    assert rate == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_unknown_space():
    with pytest.raises(ValueError):
        en.potential(np.eye(3), cycle(3), constant(1), space="torus")
