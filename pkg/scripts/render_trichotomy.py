#!/usr/bin/env python3
"""
Render the three arithmetic classes side by side.

For golden (Herman), std-tower-BnotH (Brjuno, not Herman) and tower-nonbrjuno
(non-Brjuno) this writes CSV, PPM, SVG and a JSON sidecar per rotation number,
plus summary.json with the verdict, topology label and hair statistics.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from attractor_lab import RotationNumber
from attractor_lab.geometry import attractor_geometry, classify_topology, export, prepare

GENERATORS = ("golden", "std-tower-BnotH", "tower-nonbrjuno")


def render_one(name: str, out: Path, depth: int, K: int, M: int, size: int) -> dict:
    t0 = time.perf_counter()
    gi = prepare(RotationNumber.from_generator(name), depth, M)
    geom = attractor_geometry(gi, depth, K, M)
    report = classify_topology(geom, gi.verdict)
    for fmt in ("csv", "ppm", "svg", "json"):
        export(geom, fmt, out / f"{name}.{fmt}", size, size)
    return {
        "alpha": name,
        "class": gi.verdict.klass,
        "label": report.label,
        "hair_fraction": report.hair_fraction,
        "touch_fraction": report.touch_fraction,
        "gap_threshold": report.gap_threshold,
        "r_alpha": geom.r_alpha,
        "depth_reached": geom.depth,
        "seconds": round(time.perf_counter() - t0, 2),
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("trichotomy"))
    ap.add_argument("--depth", type=int, default=25)
    ap.add_argument("--K", type=int, default=4096)
    ap.add_argument("--M", type=int, default=4096)
    ap.add_argument("--size", type=int, default=1024, help="raster width and height")
    ap.add_argument("--only", choices=GENERATORS, action="append")
    args = ap.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    rows = [render_one(n, args.out, args.depth, args.K, args.M, args.size) for n in (args.only or GENERATORS)]
    for row in rows:
        print(f"{row['alpha']:>16}  {row['class']:<16} {row['label']:<30} hair={row['hair_fraction']:.4f}")
    (args.out / "summary.json").write_text(json.dumps(rows, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
