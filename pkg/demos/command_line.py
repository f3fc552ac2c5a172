"""Driving the library through the ``dressed`` command.

Each call below is equivalent to running ``dressed ...`` in a shell.  CSV
goes to stdout; the audit log of conventions is written next to a CSV file
or, for JSON, embedded under ``meta``.
"""

import io
import json
import tempfile
from pathlib import Path

from dressed.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


code, out, _ = run("potential", "--r-min", "0.01", "--r-max", "50", "--points", "6")
print("$ dressed potential --r-min 0.01 --r-max 50 --points 6")
print(out)

code, out, _ = run("delta", "--speed", "0.05", "--format", "json")
doc = json.loads(out)
print("$ dressed delta --speed 0.05 --format json   (diagnostics)")
print(json.dumps(doc["meta"]["diagnostics"], indent=2))

with tempfile.TemporaryDirectory() as tmp:
    target = Path(tmp) / "cloud.csv"
    run("cloud", "--t", "0.5,1", "--k0", "0.01,0,0", "--q-max", "4", "--n-theta", "12", "--n-phi", "16",
        "--output", str(target))
    print("$ dressed cloud ... --output cloud.csv")
    print(target.read_text())
    meta = json.loads(Path(str(target) + ".meta.json").read_text())
    print("audit ids:", [rec["id"] for rec in meta["meta"]["audit"]])

print("\nexit status for an unknown flag:", run("selfenergy", "--nope")[0])
