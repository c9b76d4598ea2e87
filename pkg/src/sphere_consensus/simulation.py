"""Fixed-step geometric integration of the closed-loop flows.

Spheres: classical RK4 in ambient coordinates, then per-agent
renormalization. Rotations: Lie-Euler steps R <- exp(dt Omega) R with the
Rodrigues formula, which keeps every iterate in SO(3).

Both integrators run a whole ensemble of initial conditions at once (leading
trial axis) and retire trials as they hit a stopping criterion.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .energy import potential_batch
from .gains import resolve_edge_gains
from .geometry import expm_skew
from .protocols import (CircleProtocol, edge_s, so3_composite_input, so3_naive_input, so3_s,
                        sphere_rhs)

CONSENSUS = "consensus"
EQUILIBRIUM = "non-consensus-equilibrium"
TIMEOUT = "timeout"
NAN = "nan-abort"

_CODES = {0: CONSENSUS, 1: EQUILIBRIUM, 2: TIMEOUT, 3: NAN, -1: "running"}


class NumericalError(RuntimeError):
    """State became non-finite; usually dt is too large."""


@dataclass
class SimulationOptions:
    dt: Optional[float] = None
    t_max: float = 2000.0
    consensus_tol: float = 1e-9
    equilibrium_tol: float = 1e-10
    record_every: int = 50
    record: bool = False
    backward: bool = False

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= 0:
            raise ValueError("t_max must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class SimulationResult:
    outcome: str
    final_state: np.ndarray
    elapsed_model_time: float
    terminal_residual: float
    steps: int
    V_final: Optional[float] = None
    max_energy_increase: float = 0.0
    max_norm_drift: float = 0.0
    trajectory: list = field(default_factory=list)

    def summary(self):
        return {
            "outcome": self.outcome,
            "elapsed": self.elapsed_model_time,
            "terminal_residual": self.terminal_residual,
            "V_final": self.V_final,
            "steps": self.steps,
            "max_energy_increase": self.max_energy_increase,
            "max_norm_drift": self.max_norm_drift,
        }


def max_gain(graph, gains):
    per_edge = resolve_edge_gains(graph, gains)
    return max((g.max_value() for g in per_edge), default=1.0)


def default_dt(graph, gains, space="sphere", protocol="naive"):
    m = max_gain(graph, gains)
    if space == "sphere":
        return 0.01 / m
    if protocol == "composite":
        m = max(m, 1.0)
    return 0.005 / m


@dataclass
class EnsembleResult:
    codes: np.ndarray
    final_states: np.ndarray
    times: np.ndarray
    residuals: np.ndarray
    steps: np.ndarray
    max_energy_increase: np.ndarray
    max_norm_drift: np.ndarray

    @property
    def outcomes(self):
        return [_CODES[int(c)] for c in self.codes]


def _rise(V, V_new, sign):
    # per-step energy increase along the flow direction, relative to max(1, V)
    return sign * (V_new - V) / np.maximum(1.0, np.abs(V))


class _Ensemble:
    """Bookkeeping shared by the sphere and rotation integrators."""

    def __init__(self, S0):
        self.T = S0.shape[0]
        self.codes = np.full(self.T, -1)
        self.final = S0.copy()
        self.times = np.zeros(self.T)
        self.residuals = np.full(self.T, np.nan)
        self.steps = np.zeros(self.T, dtype=int)
        self.energy_up = np.zeros(self.T)
        self.drift = np.zeros(self.T)
        self.idx = np.arange(self.T)

    def retire(self, bad, done_c, done_e, timeout, S, t, step, res):
        """Retire finished trials; returns the mask of trials still running, or None."""
        code = np.full(len(S), -1)
        code[timeout] = 2
        code[done_e] = 1
        code[done_c] = 0
        code[bad] = 3
        mask = code >= 0
        if not np.any(mask):
            return None
        ids = self.idx[mask]
        self.codes[ids] = code[mask]
        self.final[ids] = S[mask]
        self.times[ids] = t
        self.steps[ids] = step
        self.residuals[ids] = res[mask]
        keep = ~mask
        self.idx = self.idx[keep]
        return keep

    def result(self):
        return EnsembleResult(self.codes, self.final, self.times, self.residuals, self.steps,
                              self.energy_up, self.drift)


def integrate_sphere_ensemble(X0, graph, gains, opts=None, recorder=None):
    """Integrate a stack of sphere configurations X0 of shape (T, N, n+1)."""
    opts = opts or SimulationOptions()
    X = np.array(X0, dtype=float)
    dt = opts.dt or default_dt(graph, gains, "sphere")
    sign = -1.0 if opts.backward else 1.0
    ens = _Ensemble(X)

    def rhs(Y):
        return sign * sphere_rhs(Y, graph, gains)

    V = potential_batch(X, graph, gains)
    t, step = 0.0, 0
    while ens.idx.size:
        k1 = rhs(X)
        res = np.max(np.linalg.norm(k1, axis=-1), axis=-1)
        smax = np.max(edge_s(X, graph), axis=-1) if graph.num_edges else np.zeros(len(X))
        bad = ~np.all(np.isfinite(X), axis=(-1, -2))
        done_c = smax < opts.consensus_tol
        done_e = res < opts.equilibrium_tol
        timeout = np.full(len(X), t > opts.t_max)
        if recorder is not None:
            recorder(t, step, X, V)
        keep = ens.retire(bad, done_c, done_e, timeout, X, t, step, res)
        if keep is not None:
            X, V, k1 = X[keep], V[keep], k1[keep]
        if not ens.idx.size:
            break
        k2 = rhs(X + 0.5 * dt * k1)
        k3 = rhs(X + 0.5 * dt * k2)
        k4 = rhs(X + dt * k3)
        X = X + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        X /= np.linalg.norm(X, axis=-1, keepdims=True)
        ens.drift[ens.idx] = np.maximum(ens.drift[ens.idx],
                                        np.max(np.abs(np.linalg.norm(X, axis=-1) - 1.0), axis=-1))
        V_new = potential_batch(X, graph, gains)
        ens.energy_up[ens.idx] = np.maximum(ens.energy_up[ens.idx], _rise(V, V_new, sign))
        V = V_new
        t += dt
        step += 1
    return ens.result()


def _so3_input(R, graph, gains, protocol, circle):
    if protocol == "naive":
        return so3_naive_input(R, graph, gains)
    if protocol == "composite":
        if circle is None:
            raise ValueError("composite protocol needs a CircleProtocol")
        return so3_composite_input(R, graph, gains, circle)
    raise ValueError(f"unknown SO(3) protocol {protocol!r}")


def so3_potential_batch(R, graph, gains):
    s = so3_s(R, graph)
    out = np.zeros(s.shape[:-1])
    for k, g in enumerate(resolve_edge_gains(graph, gains)):
        out += 0.5 * (g.antiderivative(s[..., k]) if g.antiderivative is not None
                      else np.vectorize(g.integral)(s[..., k]))
    return out


def integrate_so3_ensemble(R0, graph, gains, protocol="naive", circle=None, opts=None, recorder=None):
    """Integrate a stack of rotation configurations R0 of shape (T, N, 3, 3)."""
    opts = opts or SimulationOptions()
    R = np.array(R0, dtype=float)
    dt = opts.dt or default_dt(graph, gains, "so3", protocol)
    sign = -1.0 if opts.backward else 1.0
    ens = _Ensemble(R)
    track_energy = protocol == "naive"
    V = so3_potential_batch(R, graph, gains) if track_energy else np.zeros(len(R))
    eye = np.eye(3)
    t, step = 0.0, 0
    while ens.idx.size:
        omega = sign * _so3_input(R, graph, gains, protocol, circle)
        res = np.max(np.linalg.norm(omega, axis=(-1, -2)), axis=-1)
        smax = np.max(so3_s(R, graph), axis=-1) if graph.num_edges else np.zeros(len(R))
        bad = ~np.all(np.isfinite(R), axis=(-1, -2, -3))
        done_c = smax < opts.consensus_tol
        done_e = res < opts.equilibrium_tol
        timeout = np.full(len(R), t > opts.t_max)
        if recorder is not None:
            recorder(t, step, R, V)
        keep = ens.retire(bad, done_c, done_e, timeout, R, t, step, res)
        if keep is not None:
            R, V, omega = R[keep], V[keep], omega[keep]
        if not ens.idx.size:
            break
        R = expm_skew(dt * omega) @ R
        orth = np.linalg.norm(np.swapaxes(R, -1, -2) @ R - eye, axis=(-1, -2))
        ens.drift[ens.idx] = np.maximum(ens.drift[ens.idx], np.max(orth, axis=-1))
        if track_energy:
            V_new = so3_potential_batch(R, graph, gains)
            ens.energy_up[ens.idx] = np.maximum(ens.energy_up[ens.idx], _rise(V, V_new, sign))
            V = V_new
        t += dt
        step += 1
    return ens.result()


class _Recorder:
    def __init__(self, every):
        self.every = every
        self.rows = []

    def __call__(self, t, step, S, V):
        if step % self.every == 0 and len(S):
            self.rows.append((t, S[0].copy(), float(V[0])))


def _single(ens, recorder, V_final):
    outcome = _CODES[int(ens.codes[0])]
    final = ens.final_states[0]
    if outcome == NAN:
        raise NumericalError(f"non-finite state after {ens.steps[0]} steps; reduce dt")
    traj = recorder.rows if recorder is not None else []
    if recorder is not None and (not traj or traj[-1][0] != ens.times[0]):
        traj.append((float(ens.times[0]), final.copy(), V_final))
    return SimulationResult(outcome=outcome, final_state=final, elapsed_model_time=float(ens.times[0]),
                            terminal_residual=float(ens.residuals[0]), steps=int(ens.steps[0]),
                            V_final=V_final, max_energy_increase=float(ens.max_energy_increase[0]),
                            max_norm_drift=float(ens.max_norm_drift[0]), trajectory=traj)


def integrate_sphere(X0, graph, gains, opts=None):
    """One run of the sphere flow from X0 of shape (N, n+1)."""
    opts = opts or SimulationOptions()
    if not graph.is_connected():
        raise ValueError("graph must be connected")
    rec = _Recorder(opts.record_every) if opts.record else None
    ens = integrate_sphere_ensemble(np.asarray(X0, dtype=float)[None], graph, gains, opts, rec)
    V = float(potential_batch(ens.final_states[0], graph, gains))
    return _single(ens, rec, V)


def integrate_so3(R0, graph, gains, protocol="naive", circle=None, opts=None):
    """One run of the rotation flow from R0 of shape (N, 3, 3)."""
    opts = opts or SimulationOptions()
    if not graph.is_connected():
        raise ValueError("graph must be connected")
    if protocol == "composite" and circle is None:
        circle = CircleProtocol(graph.num_nodes)
    rec = _Recorder(opts.record_every) if opts.record else None
    ens = integrate_so3_ensemble(np.asarray(R0, dtype=float)[None], graph, gains, protocol, circle,
                                 opts, rec)
    V = float(so3_potential_batch(ens.final_states[0], graph, gains))
    return _single(ens, rec, V)


def trajectory_header(state):
    if state.ndim == 3:
        return ["t", "agent"] + [f"r{a}{b}" for a in range(3) for b in range(3)]
    return ["t", "agent"] + [f"c{k}" for k in range(state.shape[-1])]


def write_trajectory_csv(result, path, summary_path=None):
    """Write `t, agent, c0..c{n}` (or `r00..r22`) rows plus a JSON sidecar summary."""
    rows = result.trajectory or [(result.elapsed_model_time, result.final_state, result.V_final)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_header(rows[0][1]))
        for t, state, _ in rows:
            for i, s in enumerate(state):
                w.writerow([repr(float(t)), i] + [repr(float(v)) for v in np.ravel(s)])
    summary_path = summary_path or str(path) + ".json"
    with open(summary_path, "w") as fh:
        json.dump(result.summary(), fh, indent=2)
    return summary_path
