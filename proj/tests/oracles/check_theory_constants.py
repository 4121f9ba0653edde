"""Runs verify-theory on the given config and compares its constants with the straight-line oracle."""
import json
import os
import subprocess
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from theory_constants import compute  # noqa: E402

cli, config = sys.argv[1], sys.argv[2]
with tempfile.TemporaryDirectory() as out:
    subprocess.run([cli, "verify-theory", "--config", config, "--out", out], check=True, stdout=subprocess.DEVNULL)
    with open(os.path.join(out, "report.json")) as f:
        got = json.load(f)["suites"]["constants"]

worst = 0.0
for name, want in compute().items():
    rel = abs(got[name] - float(want)) / float(want)
    worst = max(worst, rel)
    print(f"{name}: cli {got[name]!r} oracle {float(want)!r} rel {rel:.3e}")
sys.exit(0 if worst <= 1e-12 else 1)
