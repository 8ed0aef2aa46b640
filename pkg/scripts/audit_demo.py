#!/usr/bin/env python3
"""Run the job-auditing demo and write its relationship report.

Transforms demo/jobs.audit into the Logs aspect, weaves it over the job
classes, prints the audit lines the run produces, and writes
relationships.json mapping every generated advice back to its case line
in the .audit source.

Usage: python3 scripts/audit_demo.py [--seed N] [--out relationships.json]
"""

import argparse
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from miniweave import interp, pipeline  # noqa: E402

DEMO = os.path.join(ROOT, "demo")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="relationships.json")
    args = ap.parse_args()

    options = pipeline.CompileOptions(
        dsals_path=os.path.join(DEMO, "dsals.txt"),
        gen_dir=os.path.join(ROOT, "gen"),
        relationships_path=args.out,
    )
    art = pipeline.compile(
        [os.path.join(DEMO, "jobs.ml0"), os.path.join(DEMO, "jobs.audit")], options
    )
    res = interp.run(art.unit, seed=args.seed)
    print(f"run: {res.status} ({res.steps} steps)")
    print("audit lines:")
    for line in res.audit_lines:
        print(f"  {line}")
    n = len(art.relationships["advises"])
    print(f"\nwrote {args.out}: {n} advises records")
    for record in art.relationships["advises"][:4]:
        print(f"  {record['advice']} advises {record['shadow']} at {record['at']}")
    if n > 4:
        print(f"  ... and {n - 4} more")
    return 0


if __name__ == "__main__":
    sys.exit(main())
