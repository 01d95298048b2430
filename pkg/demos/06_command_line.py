"""The command-line workflow, driven from Python.

Equivalent shell commands:

    rfresp synth scenario.json --trace t.json --gt gt.csv --intervals motion.csv
    rfresp estimate t.json --motion mavbd --out est.csv
    rfresp eval est.csv gt.csv --out report.json
"""

import json
import tempfile
from pathlib import Path

from rfresp.cli import cli_main

work = Path(tempfile.mkdtemp())
scenario = {"technology": "sub", "duration": 600.0, "rate_schedule": [[0.0, 0.28]],
            "motion_bursts": [[200.0, 6.0, 20.0], [450.0, 4.0, 20.0]], "seed": 5}
(work / "scenario.json").write_text(json.dumps(scenario))


def run(*argv):
    print(f"$ rfresp {' '.join(map(str, argv))}")
    print(f"  -> exit {cli_main([str(a) for a in argv])}")


run("synth", work / "scenario.json", "--trace", work / "t.json", "--gt", work / "gt.csv",
    "--intervals", work / "motion.csv")
print((work / "t.json").read_text())
print("first data rows:", (work / "t.csv").read_text().splitlines()[:3])

for motion in ("none", "mavbd"):
    run("estimate", work / "t.json", "--motion", motion, "--out", work / f"est_{motion}.csv")
    run("eval", work / f"est_{motion}.csv", work / "gt.csv", "--out", work / f"report_{motion}.json")

run("compare", work / "report_mavbd.json", work / "report_none.json", "--alternative", "less")
run("estimate", work / "missing.json", "--out", work / "x.csv")  # exit 3, missing file
print("outputs in", work)
