"""Regenerate the committed CLI golden outputs under tests/golden/.

Run from the repository root after an intentional change to an output format.
"""

import contextlib
import io
import json
import os
from pathlib import Path

from sphere_consensus.cli import main

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"


def run(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    if code != 0:
        raise SystemExit(f"{argv} exited with {code}")
    return json.loads(buf.getvalue())


if __name__ == "__main__":
    os.chdir(ROOT)
    commands = json.loads((GOLDEN / "commands.json").read_text())
    for name, argv in commands.items():
        out = run(argv)
        out.pop("wall_time", None)
        (GOLDEN / f"{name}.json").write_text(json.dumps(out, indent=2) + "\n")
        print("wrote", name)
