"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import equilibria as eqm
from .experiments import BatchSpec, run_batch
from .gains import GainCheckError, check_condition_iii, parse_gain
from .geometry import retract, sample_uniform_rotation, sample_unit_sphere
from .linearization import CertificateError, EigenSolverError, classify_equilibrium
from .protocols import CircleProtocol
from .simulation import NumericalError, SimulationOptions, integrate_so3, integrate_sphere, write_trajectory_csv
from .topology import graph_from_config

OPTION_FIELDS = ("dt", "t_max", "consensus_tol", "equilibrium_tol", "record_every")
SO3_PROTOCOLS = {"alg3": "naive", "alg4": "composite"}


class ConfigError(ValueError):
    def __init__(self, field, msg):
        super().__init__(f"config field '{field}': {msg}")
        self.field = field


def _field(cfg, name, parse, default=None, required=False):
    if name not in cfg:
        if required:
            raise ConfigError(name, "missing")
        return default
    try:
        return parse(cfg[name])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(name, str(exc)) from None


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"malformed JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("--config", "top level must be an object")
    return cfg


def _gains(spec):
    """A single gain spec, or a {label: spec} map for labelled edges."""
    if isinstance(spec, dict) and spec and not ({"constant", "power"} & spec.keys()):
        return {label: parse_gain(v) for label, v in spec.items()}
    return parse_gain(spec)


def _check_admissible(gains, dim, allow):
    per = gains.values() if isinstance(gains, dict) else [gains]
    for g in per:
        rep = check_condition_iii(g, dim)
        if not rep.admissible and not allow:
            raise ConfigError("gain", f"{g.name} violates the gain condition on S^{dim} "
                                      f"(witness s = {rep.witness}); pass --allow-inadmissible to run anyway")


def _space(cfg):
    space = _field(cfg, "space", str, "sphere")
    if space not in ("sphere", "so3"):
        raise ConfigError("space", f"expected 'sphere' or 'so3', got {space!r}")
    return space


def _options(cfg, **extra):
    kw = {k: cfg[k] for k in OPTION_FIELDS if k in cfg}
    try:
        return SimulationOptions(**kw, **extra)
    except (TypeError, ValueError) as exc:
        raise ConfigError("options", str(exc)) from None


def _initial(cfg, space, dim, graph):
    init = cfg.get("initial", {"random": 0})
    N = graph.num_nodes
    if isinstance(init, dict) and "random" in init:
        rng = np.random.default_rng(init["random"])
        if space == "sphere":
            return sample_unit_sphere(dim, rng, N)
        return sample_uniform_rotation(rng, N)
    if isinstance(init, dict) and "equilibrium" in init:
        if space != "sphere":
            raise ConfigError("initial", "named equilibria live on spheres")
        X, _ = eqm.construct(init["equilibrium"], n_agents=N, dim=dim, graph=graph)
        if "perturbation" in init:
            V = np.asarray(init["perturbation"], dtype=float)
            if V.shape != X.shape:
                raise ConfigError("initial.perturbation", f"shape {V.shape} != {X.shape}")
            X = retract(X, V)
        return X
    try:
        S = np.asarray(init, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("initial", "expected {'random': seed}, {'equilibrium': kind} or an array") from None
    want = (N, dim + 1) if space == "sphere" else (N, 3, 3)
    if S.shape != want:
        raise ConfigError("initial", f"shape {S.shape}, expected {want}")
    if space == "sphere":
        if np.max(np.abs(np.linalg.norm(S, axis=-1) - 1.0)) > 1e-9:
            raise ConfigError("initial", "rows must be unit vectors")
    elif np.max(np.abs(S @ S.transpose(0, 2, 1) - np.eye(3))) > 1e-9 or np.min(np.linalg.det(S)) < 0:
        raise ConfigError("initial", "entries must be rotation matrices")
    return S


def _common(cfg, allow):
    space = _space(cfg)
    dim = _field(cfg, "dim", int, 2)
    graph = _field(cfg, "graph", graph_from_config, required=True)
    gains = _field(cfg, "gain", _gains, required=True)
    if space == "sphere":
        if dim < 1:
            raise ConfigError("dim", "must be >= 1")
        _check_admissible(gains, dim, allow)
    return space, dim, graph, gains


def cmd_simulate(args):
    cfg = load_config(args.config)
    space, dim, graph, gains = _common(cfg, args.allow_inadmissible)
    X0 = _initial(cfg, space, dim, graph)
    opts = _options(cfg, record=bool(args.traj), backward=bool(cfg.get("backward", False)))
    if space == "sphere":
        res = integrate_sphere(X0, graph, gains, opts)
    else:
        protocol = _field(cfg, "protocol", str, "alg3")
        if protocol not in SO3_PROTOCOLS:
            raise ConfigError("protocol", f"expected one of {sorted(SO3_PROTOCOLS)}")
        circle = CircleProtocol(_field(cfg, "n_bound", int, graph.num_nodes))
        res = integrate_so3(X0, graph, gains, SO3_PROTOCOLS[protocol], circle, opts)
    if args.traj:
        write_trajectory_csv(res, args.traj)
    out = res.summary()
    out["final_state"] = res.final_state.tolist()
    return out


def _report(X, graph, gains):
    rep = classify_equilibrium(X, graph, gains)
    out = rep.to_dict()
    try:
        out["categories"] = eqm.categorize(X, graph, gains)
    except eqm.NotAnEquilibrium:
        out["categories"] = None
    return out


def cmd_spectrum(args):
    cfg = load_config(args.config)
    cfg.setdefault("initial", cfg.get("state", {"equilibrium": "great_circle_cycle"}))
    space, dim, graph, gains = _common(cfg, args.allow_inadmissible)
    if space != "sphere":
        raise ConfigError("space", "spectra are computed on spheres only")
    X = _initial(cfg, space, dim, graph)
    out = _report(X, graph, gains)
    out["configuration"] = X.tolist()
    return out


def cmd_gains_check(args):
    try:
        g = parse_gain(args.gain)
    except ValueError as exc:
        raise ConfigError("--gain", str(exc)) from None
    if args.dim < 1:
        raise ConfigError("--dim", "must be >= 1")
    return check_condition_iii(g, args.dim).to_dict()


def cmd_montecarlo(args):
    cfg = load_config(args.config)
    space, dim, graph, gains = _common(cfg, args.allow_inadmissible)
    if isinstance(gains, dict):
        raise ConfigError("gain", "batches take a single gain spec")
    fields = {k: cfg[k] for k in ("protocol", "n_bound", *OPTION_FIELDS[:-1]) if k in cfg}
    fields.setdefault("protocol", "alg2" if space == "sphere" else "alg3")
    try:
        spec = BatchSpec(space=space, dim=dim, graph=cfg["graph"], gain=gains.to_dict(),
                         trials=args.trials, seed=args.seed, **fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError("protocol", str(exc)) from None
    return run_batch(spec, jobs=args.jobs).to_dict()


def cmd_equilibria(args):
    try:
        X, graph = eqm.construct(args.kind, n_agents=args.n, dim=args.dim)
        g = parse_gain(args.gain)
    except ValueError as exc:
        raise ConfigError("--kind", str(exc)) from None
    out = _report(X, graph, g)
    out["kind"] = args.kind
    out["graph"] = graph.to_dict()
    out["configuration"] = X.tolist()
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are configuration errors
        self.print_usage(sys.stderr)
        print(json.dumps({"error": message, "field": "argv"}), file=sys.stderr)
        sys.exit(1)


def build_parser():
    p = _Parser(prog="sphere-consensus",
                                description="Consensus flows on spheres and SO(3): simulation and stability tools.")
    p.add_argument("--allow-inadmissible", action="store_true",
                   help="run sphere flows even if the gain fails the admissibility check")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate one run and print a summary")
    s.add_argument("--config", required=True)
    s.add_argument("--traj", help="write the trajectory as CSV here (plus a .json summary)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="linearize and classify a configuration")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("gains-check", help="check a gain against the admissibility condition")
    s.add_argument("--gain", required=True, help="e.g. constant:1 or power:2")
    s.add_argument("--dim", type=int, required=True, help="sphere dimension n")
    s.set_defaults(func=cmd_gains_check)

    s = sub.add_parser("montecarlo", help="seeded batch of random initial conditions")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("equilibria", help="emit a named equilibrium and its report")
    s.add_argument("--kind", required=True, choices=eqm.KINDS)
    s.add_argument("--n", type=int, help="number of agents (great_circle_cycle, consensus)")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--gain", default="constant:1")
    s.set_defaults(func=cmd_equilibria)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "field": exc.field}), file=sys.stderr)
        return 1
    except (NumericalError, EigenSolverError, CertificateError, GainCheckError, RuntimeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
