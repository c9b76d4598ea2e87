import contextlib
import io
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from sphere_consensus.cli import main

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"
COMMANDS = json.loads((GOLDEN / "commands.json").read_text())

NUM = {"type": "number"}
GAINS_CHECK_SCHEMA = {
    "type": "object",
    "required": ["gain", "dim", "verdict", "condition_i", "condition_iii", "witness"],
    "properties": {"verdict": {"enum": ["pass", "fail"]}, "dim": {"type": "integer"},
                   "witness": {"type": ["number", "null"]}},
}
REPORT_SCHEMA = {
    "type": "object",
    "required": ["verdict", "residual", "trace_G", "trace_G_closed_form", "max_eig", "spectrum",
                 "tangent_spectrum", "configuration"],
    "properties": {"verdict": {"enum": ["exponentially-unstable", "consensus-stable", "indeterminate"]},
                   "spectrum": {"type": "array", "items": NUM}},
}
SIM_SCHEMA = {
    "type": "object",
    "required": ["outcome", "elapsed", "terminal_residual", "V_final", "steps", "final_state"],
    "properties": {"outcome": {"enum": ["consensus", "non-consensus-equilibrium", "timeout"]}},
}
BATCH_SCHEMA = {
    "type": "object",
    "required": ["spec", "counts", "failure_fraction", "inconclusive", "wall_time", "failures"],
    "properties": {"counts": {"type": "object", "required": ["consensus", "failure", "timeout", "nan"]}},
}
SCHEMAS = {"gains-check": GAINS_CHECK_SCHEMA, "equilibria": REPORT_SCHEMA, "spectrum": REPORT_SCHEMA,
           "simulate": SIM_SCHEMA, "montecarlo": BATCH_SCHEMA}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


def close(a, b, path="$"):
    if isinstance(a, dict):
        assert a.keys() == b.keys(), path
        for k in a:
            close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for k, (x, y) in enumerate(zip(a, b)):
            close(x, y, f"{path}[{k}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-9), path
    else:
        assert a == b, path


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_golden_outputs(name, monkeypatch):
    monkeypatch.chdir(ROOT)
    code, out, _ = run(COMMANDS[name])
    assert code == 0
    got = json.loads(out)
    jsonschema.validate(got, SCHEMAS[COMMANDS[name][0]])
    got.pop("wall_time", None)
    close(got, json.loads((GOLDEN / f"{name}.json").read_text()))


def test_gains_check_witness():
    code, out, _ = run(["gains-check", "--gain", "constant:1", "--dim", "1"])
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "fail"
    assert d["witness"] == pytest.approx(0.5, abs=0.01)


def test_octahedron_report():
    d = json.loads(run(["equilibria", "--kind", "octahedron"])[1])
    assert d["residual"] == 0.0 and d["verdict"] == "exponentially-unstable"


def write(tmp_path, cfg):
    p = tmp_path / "cfg.json"
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


BASE = {"graph": {"kind": "cycle", "n": 4}, "gain": "constant:1"}


@pytest.mark.parametrize("cfg,field", [
    ("{not json", "--config"),
    ({"gain": "constant:1"}, "graph"),
    ({**BASE, "gain": "exp:2"}, "gain"),
    ({**BASE, "graph": {"kind": "cycle", "n": 2}}, "graph"),
    ({**BASE, "space": "torus"}, "space"),
    ({**BASE, "dim": 1}, "gain"),
    ({**BASE, "initial": [[1, 0, 0]]}, "initial"),
    ({**BASE, "initial": [[2, 0, 0]] * 4}, "initial"),
    ({**BASE, "dt": -1}, "options"),
])
def test_config_errors_exit_1_with_field(tmp_path, cfg, field):
    code, _, err = run(["simulate", "--config", write(tmp_path, cfg)])
    assert code == 1
    assert json.loads(err)["field"] == field


def test_allow_inadmissible(tmp_path):
    path = write(tmp_path, {**BASE, "dim": 1, "initial": {"random": 1}})
    code, out, _ = run(["--allow-inadmissible", "simulate", "--config", path])
    assert code == 0 and json.loads(out)["outcome"] in ("consensus", "non-consensus-equilibrium")


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_failure_exit_2(tmp_path):
    state = np.tile([1.0, 0.0, 0.0], (4, 1))
    state[1] = [0.0, 1.0, 0.0]
    path = write(tmp_path, {**BASE, "initial": state.tolist(), "dt": 1e300})
    code, _, err = run(["simulate", "--config", path])
    assert code == 2 and "error" in json.loads(err)


def test_bad_flags_exit_1():
    assert run(["gains-check", "--gain", "constant:1"])[0] == 1
    assert run(["equilibria", "--kind", "torus"])[0] == 1
    assert run(["gains-check", "--gain", "constant", "--dim", "2"])[0] == 1


def test_simulate_writes_trajectory(tmp_path):
    traj = tmp_path / "t.csv"
    code, out, _ = run(["simulate", "--config", str(ROOT / "configs" / "simulate_s2.json"), "--traj", str(traj)])
    assert code == 0
    assert traj.read_text().splitlines()[0] == "t,agent,c0,c1,c2"
    assert json.loads((tmp_path / "t.csv.json").read_text())["outcome"] == json.loads(out)["outcome"]


def test_rotation_simulate(tmp_path):
    code, out, _ = run(["simulate", "--config", str(ROOT / "configs" / "so3_alg4_cycle6.json")])
    assert code == 0 and json.loads(out)["outcome"] == "consensus"


def test_spectrum_on_supplied_state(tmp_path):
    X = np.tile([0.0, 0.0, 1.0], (4, 1))
    code, out, _ = run(["spectrum", "--config", write(tmp_path, {**BASE, "initial": X.tolist()})])
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "consensus-stable" and d["zero_eigs"] == 2


def test_montecarlo_requires_admissible(tmp_path):
    code, _, _ = run(["montecarlo", "--config", str(ROOT / "configs" / "s1_cycle6.json"), "--trials", "5"])
    assert code == 1
    code, out, _ = run(["--allow-inadmissible", "montecarlo", "--config",
                        str(ROOT / "configs" / "s1_cycle6.json"), "--trials", "5", "--jobs", "1"])
    assert code == 0 and sum(json.loads(out)["counts"].values()) == 5
