#!/usr/bin/env python3
"""
Run the acceptance criteria and save a machine-readable record.

Prints one PASS/FAIL line per criterion and writes a JSON list with the
measured quantities, runtimes and budgets.  Exit status is 1 if any
criterion fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from attractor_lab.acceptance import CRITERIA, run_all


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    return str(v)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--only", type=int, nargs="*", choices=sorted(CRITERIA))
    ap.add_argument("--json", type=Path, default=Path("acceptance.json"))
    args = ap.parse_args(argv)

    results = run_all(args.only, echo=print)
    record = [
        {
            "number": r.number,
            "title": r.title,
            "passed": r.passed,
            "seconds": round(r.seconds, 3),
            "budget": r.budget,
            "detail": {k: _clean(v) for k, v in r.detail.items()},
        }
        for r in results
    ]
    args.json.write_text(json.dumps(record, indent=2) + "\n")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed; record in {args.json}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
