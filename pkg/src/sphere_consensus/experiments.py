"""Monte Carlo batches, perturbation studies and the backward-flow experiment."""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .gains import parse_gain
from .geometry import retract, sample_uniform_rotation, sample_unit_sphere
from .linearization import classify_equilibrium
from .protocols import CircleProtocol, edge_s, so3_s
from .simulation import (CONSENSUS, EQUILIBRIUM, NAN, TIMEOUT, SimulationOptions,
                         integrate_so3_ensemble, integrate_sphere, integrate_sphere_ensemble)
from .topology import graph_from_config

CHUNK = 250
PROTOCOLS = {"sphere": ("alg1", "alg2"), "so3": ("alg3", "alg4")}


@dataclass
class BatchSpec:
    """What to run: `space` is "sphere" (with `dim`) or "so3"."""

    space: str = "sphere"
    dim: int = 2
    protocol: str = "alg2"
    graph: dict = field(default_factory=lambda: {"kind": "cycle", "n": 6})
    gain: dict = field(default_factory=lambda: {"constant": 5.0})
    trials: int = 1000
    seed: int = 0
    n_bound: Optional[int] = None
    dt: Optional[float] = None
    t_max: float = 2000.0
    consensus_tol: float = 1e-9
    equilibrium_tol: float = 1e-10

    def __post_init__(self):
        if self.space not in PROTOCOLS:
            raise ValueError(f"space must be 'sphere' or 'so3', got {self.space!r}")
        if self.protocol not in PROTOCOLS[self.space]:
            raise ValueError(f"protocol {self.protocol!r} does not run on {self.space}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.space == "sphere" and self.dim < 1:
            raise ValueError("dim must be >= 1")

    def options(self):
        return SimulationOptions(dt=self.dt, t_max=self.t_max, consensus_tol=self.consensus_tol,
                                 equilibrium_tol=self.equilibrium_tol)


@dataclass
class TrialBatch:
    spec: BatchSpec
    outcomes: list
    counts: dict
    failure_fraction: float
    wall_time: float
    failures: list
    inconclusive: bool

    def to_dict(self):
        return {
            "spec": asdict(self.spec),
            "counts": self.counts,
            "failure_fraction": self.failure_fraction,
            "inconclusive": self.inconclusive,
            "wall_time": self.wall_time,
            "failures": self.failures,
        }


def trial_seeds(seed, trials):
    """Independent per-trial streams split off the batch seed."""
    return np.random.SeedSequence(seed).spawn(trials)


def initial_state(spec, seq, n_nodes):
    rng = np.random.default_rng(seq)
    if spec.space == "sphere":
        return sample_unit_sphere(spec.dim, rng, n_nodes)
    return sample_uniform_rotation(rng, n_nodes)


def _run_chunk(args):
    spec, lo, hi = args
    graph = graph_from_config(spec.graph)
    gain = parse_gain(spec.gain)
    seqs = trial_seeds(spec.seed, spec.trials)[lo:hi]
    S0 = np.stack([initial_state(spec, s, graph.num_nodes) for s in seqs])
    opts = spec.options()
    if spec.space == "sphere":
        ens = integrate_sphere_ensemble(S0, graph, gain, opts)
    else:
        protocol = "naive" if spec.protocol == "alg3" else "composite"
        circle = CircleProtocol(spec.n_bound or graph.num_nodes)
        ens = integrate_so3_ensemble(S0, graph, gain, protocol, circle, opts)
    return lo, ens.outcomes, ens.final_states, ens.residuals, ens.times


def _digest(spec, graph, gain, k, state, residual, t):
    if spec.space == "sphere":
        s = edge_s(state, graph)
    else:
        s = so3_s(state, graph)
    out = {
        "trial": k,
        "time": float(t),
        "residual": float(residual),
        "edge_s": sorted(round(float(v), 9) for v in s),
    }
    if spec.space == "sphere":
        rep = classify_equilibrium(state, graph, gain)
        out["verdict"] = rep.verdict
        out["max_eig"] = rep.max_eig
        out["classifier_residual"] = rep.residual
    return out


def run_batch(spec, jobs=1):
    """Run `spec.trials` seeded trials and tally the outcomes.

    Trials are integrated in fixed-size chunks, so the per-trial outcomes do
    not depend on `jobs`.
    """
    graph = graph_from_config(spec.graph)
    if not graph.is_connected():
        raise ValueError("graph must be connected")
    gain = parse_gain(spec.gain)
    start = time.perf_counter()
    chunks = [(spec, lo, min(lo + CHUNK, spec.trials)) for lo in range(0, spec.trials, CHUNK)]
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    outcomes = [None] * spec.trials
    failures = []
    for lo, outs, finals, residuals, times in sorted(parts, key=lambda p: p[0]):
        for k, o in enumerate(outs):
            outcomes[lo + k] = o
            if o == EQUILIBRIUM:
                failures.append(_digest(spec, graph, gain, lo + k, finals[k], residuals[k], times[k]))
    counts = {
        "consensus": outcomes.count(CONSENSUS),
        "failure": outcomes.count(EQUILIBRIUM),
        "timeout": outcomes.count(TIMEOUT),
        "nan": outcomes.count(NAN),
    }
    if counts["nan"]:
        raise RuntimeError(f"{counts['nan']} trials produced non-finite states; reduce dt")
    return TrialBatch(
        spec=spec,
        outcomes=outcomes,
        counts=counts,
        failure_fraction=counts["failure"] / spec.trials,
        wall_time=time.perf_counter() - start,
        failures=failures,
        inconclusive=counts["timeout"] > 0.01 * spec.trials,
    )


def great_circle_directions(X):
    """Tangent directions at a great-circle equilibrium in the first two coordinates.

    common_normal lifts every agent toward the pole, alternating_normal lifts
    and drops neighbours in turn, rotation slides the formation along the
    circle.
    """
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    normal = np.zeros(d)
    normal[2] = 1.0
    signs = (-1.0) ** np.arange(N)
    rot = np.zeros_like(X)
    rot[:, 0], rot[:, 1] = -X[:, 1], X[:, 0]
    return {
        "common_normal": np.tile(normal, (N, 1)),
        "alternating_normal": signs[:, None] * normal,
        "rotation": rot,
    }


def perturbation_study(X, graph, gains, directions, magnitude=1e-3, opts=None):
    """One simulation per direction, started from retract(X, magnitude * direction)."""
    return [integrate_sphere(retract(X, magnitude * np.asarray(v, dtype=float)), graph, gains, opts)
            for v in directions]


def cycle_maximin_s(n_agents):
    """Largest achievable minimum edge s on a cycle: 2 for even N, 1 + cos(pi/N) for odd N."""
    if n_agents % 2 == 0:
        return 2.0
    return 1.0 + np.cos(np.pi / n_agents)


def _reversed(opts):
    opts = opts or SimulationOptions()
    return SimulationOptions(**{**opts.__dict__, "backward": True})


def backward_flow(X0, graph, gains, opts=None):
    """Integrate the time-reversed flow (V increases) from X0."""
    return integrate_sphere(X0, graph, gains, _reversed(opts))


def backward_batch(graph, gains, seeds, dim=2, opts=None):
    """Reversed flow from one uniform initial condition per seed; returns the ensemble result."""
    X0 = np.stack([sample_unit_sphere(dim, np.random.default_rng(s), graph.num_nodes) for s in seeds])
    return integrate_sphere_ensemble(X0, graph, gains, _reversed(opts))
