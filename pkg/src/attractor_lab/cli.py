"""Command-line front end.

Usage examples::

    attractor-lab expand --alpha-surd "-1,1,5,2" --depth 10
    attractor-lab classify --alpha-gen std-tower-BnotH
    attractor-lab render --alpha-gen golden --out golden --K 4096
    attractor-lab selftest

Exit codes: 0 success, 1 validation failure, 2 budget exhaustion, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import mpmath

from .arithmetic import (
    DEFAULT_BITS,
    RotationNumber,
    expand_nearest_integer,
    expand_standard,
    index_map_c,
)
from .brjuno_herman import brjuno_partial, brjuno_standard_partial, classify
from .errors import AttractorLabError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64
SCHEMA_VERSION = "1.0"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    alpha_surd: str | None = None
    alpha_dec: str | None = None
    alpha_gen: str | None = None
    prec_bits: int = DEFAULT_BITS
    depth: int = 25
    K: int = 4096
    M: int = 4096
    tol: float = 1e-6
    out: str | None = None
    width: int = 1024
    height: int = 1024
    invariant_t: float | None = None
    steps: int = 1000
    start: str | None = None
    samples: int = 64
    terms: int | None = None
    only: list[int] = field(default_factory=list)
    threads: int | None = None

    def validate(self) -> None:
        specs = [s for s in (self.alpha_surd, self.alpha_dec, self.alpha_gen) if s is not None]
        if self.command != "selftest" and len(specs) != 1:
            raise UsageError("give exactly one of --alpha-surd, --alpha-dec, --alpha-gen")
        for name in ("prec_bits", "depth", "K", "M", "width", "height", "steps", "samples"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.terms is not None and self.terms <= 0:
            raise UsageError("--terms must be positive")
        if self.invariant_t is not None and not 0 < self.invariant_t <= 1:
            raise UsageError("--invariant-t must lie in (0, 1]")
        if self.threads is not None and self.threads <= 0:
            raise UsageError("--threads must be positive")

    def rotation_number(self) -> RotationNumber:
        if self.alpha_surd is not None:
            try:
                p, q, d, r = (int(v) for v in self.alpha_surd.split(","))
            except ValueError as exc:
                raise UsageError(f"--alpha-surd wants four integers p,q,d,r: {self.alpha_surd!r}") from exc
            return RotationNumber.from_surd(p, q, d, r)
        if self.alpha_dec is not None:
            return RotationNumber.from_decimal(self.alpha_dec, self.prec_bits)
        name, *params = self.alpha_gen.split(",")
        if params:
            raise UsageError(f"generator {name!r} takes no parameters")
        return RotationNumber.from_generator(name)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _num(x: Any) -> Any:
    """JSON-friendly rendering of ints, floats and mpf (huge digits as strings)."""
    if isinstance(x, int):
        return x if abs(x) < 2**53 else str(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 20)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _emit(cfg: RunConfig, payload: dict[str, Any], kind: str) -> None:
    payload = {"schema": f"attractor_lab/{kind}", "schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_expand(cfg: RunConfig) -> int:
    alpha = cfg.rotation_number()
    nie = expand_nearest_integer(alpha, cfg.depth, bits=cfg.prec_bits)
    levels = []
    for n in range(nie.levels):
        eps_next = nie.eps[n] if n < len(nie.eps) else None
        levels.append(
            {"n": n, "a": _num(nie.a[n]), "eps_next": eps_next, "alpha": _num(nie.alphas[n]), "beta": _num(nie.betas[n])}
        )
    digits = [f"{_num(nie.a[n])},{nie.eps[n]}" for n in range(min(len(nie.a), len(nie.eps)))]
    _emit(
        cfg,
        {
            "alpha_desc": nie.alpha_desc,
            "a_minus1": nie.a_minus1,
            "eps0": nie.eps0,
            "certified_depth": nie.certified_depth,
            "exhausted": nie.exhausted,
            "digits": digits,
            "levels": levels,
        },
        "expand",
    )
    return EXIT_OK


def cmd_brjuno(cfg: RunConfig) -> int:
    alpha = cfg.rotation_number()
    N = cfg.terms or cfg.depth
    nie = expand_nearest_integer(alpha, N + 1, bits=cfg.prec_bits)
    mod = brjuno_partial(nie, min(N, nie.levels) if nie.tail is None else N)
    c_map = [index_map_c(nie, n) for n in range(-1, min(N, nie.certified_depth + 1))]
    std_payload: dict[str, Any] | None = None
    try:
        se = expand_standard(alpha, c_map[-1] + 2, bits=cfg.prec_bits)
        std = brjuno_standard_partial(se, min(c_map[-1] + 1, se.certified_depth + 1))
        std_payload = {
            "terms": [_num(t) for t in std.terms],
            "partial_sums": [_num(s) for s in std.partial_sums],
            "value": _num(std.value),
        }
    except AttractorLabError as exc:
        std_payload = {"error": str(exc)}
    _emit(
        cfg,
        {
            "alpha_desc": nie.alpha_desc,
            "modified": {
                "terms": [_num(t) for t in mod.terms],
                "partial_sums": [_num(s) for s in mod.partial_sums],
                "value": _num(mod.value),
                "tail_error": mod.tail_error,
                "divergence_score": mod.divergence_score,
            },
            "standard": std_payload,
            "c_map": c_map,
        },
        "brjuno",
    )
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    verdict = classify(cfg.rotation_number(), depth=cfg.depth, bits=cfg.prec_bits)
    _emit(cfg, {"alpha_desc": cfg.rotation_number().desc, **verdict.to_json()}, "classify")
    return EXIT_OK


def cmd_render(cfg: RunConfig) -> int:
    from .geometry import attractor_geometry, export, invariant_geometry, prepare

    gi = prepare(cfg.rotation_number(), cfg.depth, cfg.M, cfg.prec_bits)
    if cfg.invariant_t is None:
        geom = attractor_geometry(gi, cfg.depth, cfg.K, cfg.M)
    else:
        geom = invariant_geometry(gi, cfg.invariant_t, cfg.depth, cfg.K, cfg.M)
    stem = cfg.out or "attractor"
    written = [
        export(geom, "csv", f"{stem}.csv"),
        export(geom, "ppm", f"{stem}.ppm", cfg.width, cfg.height),
        export(geom, "svg", f"{stem}.svg", cfg.width),
    ]
    meta = {"schema": "attractor_lab/render", "schema_version": SCHEMA_VERSION, **geom.metadata()}
    if cfg.invariant_t is not None:
        meta["t"] = cfg.invariant_t
    meta = {k: _num(v) for k, v in meta.items()}
    Path(f"{stem}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(Path(f"{stem}.json"))
    for p in written:
        print(p)
    return EXIT_OK


def _parse_start(text: str | None):
    from .dynamics import ModelPoint, plus_one

    if text is None:
        return plus_one()
    try:
        theta, rho = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--start wants theta,rho: {text!r}") from exc
    return ModelPoint(theta % (2 * math.pi), rho)


def cmd_orbit(cfg: RunConfig) -> int:
    from .dynamics import T

    nie = expand_nearest_integer(cfg.rotation_number(), cfg.depth + 2, bits=cfg.prec_bits)
    z = _parse_start(cfg.start)
    z0 = z.z
    lines = ["n,theta,rho"]
    best = math.inf
    marks = {10**k for k in range(1, 10)} | {cfg.steps}
    gaps = []
    lines.append(f"0,{z.theta:.17g},{z.rho:.17g}")
    for n in range(1, cfg.steps + 1):
        z = T(z, nie, cfg.depth)
        best = min(best, abs(z.z - z0))
        lines.append(f"{n},{z.theta:.17g},{z.rho:.17g}")
        if n in marks:
            gaps.append((n, best))
    lines += [f"# recurrence_gap,{n},{g:.17g}" for n, g in gaps]
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_renorm_verify(cfg: RunConfig) -> int:
    from .renorm import RenormContext, verify_renormalization

    ctx = RenormContext.build(cfg.rotation_number(), cfg.depth + 2, cfg.prec_bits)
    rep = verify_renormalization(ctx, cfg.samples, cfg.depth, M=cfg.M)
    payload = rep.to_json()
    payload["max_dev"] = _num(payload["max_dev"])
    payload["mean_dev"] = _num(payload["mean_dev"])
    _emit(cfg, payload, "renorm")
    return EXIT_OK if not rep.failures else EXIT_FAIL


def cmd_selftest(cfg: RunConfig) -> int:
    from .acceptance import run_all

    results = run_all(cfg.only or None, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "expand": cmd_expand,
    "brjuno": cmd_brjuno,
    "classify": cmd_classify,
    "render": cmd_render,
    "orbit": cmd_orbit,
    "renorm-verify": cmd_renorm_verify,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="attractor-lab", description="Model attractors of irrationally indifferent fixed points.")
    parser.add_argument("--threads", type=int, help="worker threads (sets ATTRACTOR_LAB_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "selftest":
            g = p.add_mutually_exclusive_group()
            g.add_argument("--alpha-surd", help='quadratic surd "p,q,d,r" = (p + q sqrt d)/r')
            g.add_argument("--alpha-dec", help="decimal literal (use with --prec-bits)")
            g.add_argument("--alpha-gen", help="golden, sqrt2, tower-nonbrjuno or std-tower-BnotH")
            p.add_argument("--prec-bits", type=int, default=DEFAULT_BITS)
            p.add_argument("--depth", type=int, default=25)
            p.add_argument("--out", help="output file (or file stem for render)")
        if name in ("render", "renorm-verify"):
            p.add_argument("--M", type=int, default=4096, help="grid samples per unit")
        if name == "render":
            p.add_argument("--K", type=int, default=4096, help="angular resolution")
            p.add_argument("--width", type=int, default=1024)
            p.add_argument("--height", type=int, default=1024)
            p.add_argument("--invariant-t", type=float)
        if name == "brjuno":
            p.add_argument("--terms", type=int)
        if name == "orbit":
            p.add_argument("--steps", type=int, default=1000)
            p.add_argument("--start", help="theta,rho of the start point (default +1)")
        if name == "renorm-verify":
            p.add_argument("--samples", type=int, default=64)
        if name == "selftest":
            p.add_argument("--only", type=lambda s: [int(v) for v in s.split(",")], default=[])
    return parser


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--alpha-surd -1,1,5,2`` into ``--alpha-surd=-1,1,5,2`` so argparse keeps the sign."""
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg in ("--alpha-surd", "--alpha-dec", "--start"):
            nxt = next(it, None)
            out.append(arg if nxt is None else f"{arg}={nxt}")
        else:
            out.append(arg)
    return out


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(_glue_values(argv))
    values = {k: v for k, v in vars(ns).items() if v is not None}
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.threads:
        os.environ["ATTRACTOR_LAB_THREADS"] = str(cfg.threads)
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AttractorLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
