import numpy as np
import pytest

from sphere_consensus import experiments as ex
from sphere_consensus.equilibria import construct
from sphere_consensus.gains import constant
from sphere_consensus.protocols import edge_s
from sphere_consensus.simulation import CONSENSUS, EQUILIBRIUM
from sphere_consensus.topology import cycle


@pytest.mark.parametrize("kw", [{"space": "torus"}, {"protocol": "alg3"}, {"trials": 0},
                                {"space": "so3", "protocol": "alg2"}, {"dim": 0}])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        ex.BatchSpec(**kw)


def test_disconnected_batch_rejected():
    with pytest.raises(ValueError):
        ex.run_batch(ex.BatchSpec(graph={"edges": [[0, 1], [2, 3]]}, trials=2))


def test_trial_seeds_are_prefix_stable():
    a = ex.trial_seeds(7, 10)
    b = ex.trial_seeds(7, 20)
    x = [np.random.default_rng(s).random() for s in a]
    y = [np.random.default_rng(s).random() for s in b[:10]]
    assert x == y


def test_batch_counts_and_determinism():
    spec = ex.BatchSpec(dim=2, trials=40, seed=3)
    a, b = ex.run_batch(spec), ex.run_batch(spec)
    assert sum(a.counts.values()) == 40
    assert a.outcomes == b.outcomes and a.counts == b.counts
    assert a.counts["failure"] == 0
    d = a.to_dict()
    assert d["spec"]["trials"] == 40 and "wall_time" in d


def test_jobs_do_not_change_outcomes(monkeypatch):
    monkeypatch.setattr(ex, "CHUNK", 15)
    spec = ex.BatchSpec(dim=1, trials=45, seed=5)
    serial = ex.run_batch(spec, jobs=1)
    parallel = ex.run_batch(spec, jobs=2)
    assert serial.outcomes == parallel.outcomes


def test_circle_failures_are_genuine_equilibria():
    batch = ex.run_batch(ex.BatchSpec(dim=1, trials=60, seed=0))
    assert batch.counts["failure"] > 0
    assert len(batch.failures) == batch.counts["failure"]
    for f in batch.failures:
        assert f["classifier_residual"] < 1e-8
        # splay-type states: not certified unstable on the circle
        assert f["max_eig"] <= 1e-8
        assert min(f["edge_s"]) > 1e-3


def test_rotation_batch_smoke():
    spec = ex.BatchSpec(space="so3", protocol="alg3", trials=10, seed=1)
    batch = ex.run_batch(spec)
    assert sum(batch.counts.values()) == 10


def test_perturbation_directions_are_tangent():
    X, _ = construct("great_circle_cycle", n_agents=6)
    for v in ex.great_circle_directions(X).values():
        assert np.allclose(np.sum(v * X, axis=1), 0.0)


def test_perturbation_study_dichotomy():
    X, g = construct("great_circle_cycle", n_agents=6)
    dirs = ex.great_circle_directions(X)
    up, recoil, spin = ex.perturbation_study(X, g, constant(1), [dirs["common_normal"],
                                                                  dirs["alternating_normal"],
                                                                  dirs["rotation"]])
    assert up.outcome == CONSENSUS
    assert recoil.outcome == EQUILIBRIUM and np.abs(recoil.final_state[:, 2]).max() < 1e-6
    assert spin.outcome == EQUILIBRIUM
    assert np.allclose(edge_s(spin.final_state, g), 0.5, atol=1e-8)


def brute_maximin_three():
    """Maximize min edge s over three points on a great circle plus tilts, by grid search."""
    best = 0.0
    a = np.linspace(0, 2 * np.pi, 361)
    for t1 in a:
        for t2 in a[::2]:
            P = np.array([[1, 0], [np.cos(t1), np.sin(t1)], [np.cos(t2), np.sin(t2)]])
            s = [1 - P[i] @ P[j] for i, j in ((0, 1), (1, 2), (0, 2))]
            best = max(best, min(s))
    return best


def test_maximin_values():
    assert ex.cycle_maximin_s(3) == pytest.approx(brute_maximin_three(), abs=1e-3)
    assert ex.cycle_maximin_s(4) == ex.cycle_maximin_s(6) == 2.0
    assert ex.cycle_maximin_s(5) == pytest.approx(1 + np.cos(np.pi / 5))


@pytest.mark.parametrize("N", [3, 5])
def test_backward_batch_reaches_maximin(N):
    ens = ex.backward_batch(cycle(N), constant(1), range(8))
    s = edge_s(ens.final_states, cycle(N))
    assert np.abs(s - ex.cycle_maximin_s(N)).max() < 1e-3


def test_backward_flow_single():
    X0 = np.random.default_rng(0).normal(size=(4, 3))
    X0 /= np.linalg.norm(X0, axis=1, keepdims=True)
    res = ex.backward_flow(X0, cycle(4), constant(1))
    assert np.allclose(edge_s(res.final_state, cycle(4)), 2.0, atol=1e-6)
