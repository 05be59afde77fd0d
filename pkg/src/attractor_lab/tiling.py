"""Height functions of the nested tower sets.

A level-n set is stored as the graph of a 1-periodic height function sampled at
x_k = k/M, k = 0..M-1.  One refinement step pushes a level-(n+1) profile through
the signed map of level n+1 and reads off the level-n profile.

Parent sample x_k is the image of the child point x' = X_k/alpha_{n+1}, where
X_k = x_k if eps_{n+1} = -1 and X_k = (-x_k mod 1) otherwise.  The child height is
read at frac(x') by periodic linear interpolation.  frac(x') is computed exactly
from a 100-bit fixed-point value of frac(1/(M alpha)).  When alpha_{n+1} is too
small for that at working precision, the phases are replaced by a golden-ratio
low-discrepancy sequence.

All depths come out of one sweep: the chain started at level n + j with the
initial profile and refined j times is b_n^j.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .arithmetic import NearestIntegerExpansion
from .brjuno_herman import brjuno_at_level
from .coords import Y_inverse_on_vertical, im_core
from .errors import BudgetExceeded, DomainError, NonConvergence

FLOOR = "floor_b"
CEILING = "ceiling_p"
SHIFTED = "shifted_floor"

PHASE_BITS = 100
GOLDEN_STEP = (math.sqrt(5.0) - 1.0) / 2.0


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ATTRACTOR_LAB_THREADS", "1")))
    except ValueError:
        return 1


def column_map(fn: Callable[[slice], np.ndarray], M: int, out_shape: tuple[int, ...]) -> np.ndarray:
    """Evaluate ``fn`` on contiguous column blocks, assembling by index."""
    threads = worker_count()
    if threads == 1 or M < 2048:
        return fn(slice(0, M))
    bounds = np.linspace(0, M, threads + 1).astype(int)
    blocks = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    out = np.empty(out_shape)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for sl, res in zip(blocks, pool.map(fn, blocks)):
            out[..., sl] = res
    return out


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightProfile:
    level: int
    kind: str
    depth: int
    M: int
    samples: np.ndarray
    converged: bool = False
    sup_diff_history: tuple[float, ...] = ()
    alpha_desc: str = ""
    y0: float = 0.0
    by_depth: np.ndarray | None = field(default=None, repr=False, compare=False)
    approximate_phase_levels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.samples.shape != (self.M,):
            raise DomainError(f"expected {self.M} samples, got shape {self.samples.shape}")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    @property
    def sup(self) -> float:
        return float(np.max(self.samples))

    def __call__(self, x) -> np.ndarray:
        """Periodic linear interpolation at arbitrary x."""
        return interp_periodic(self.samples[None, :], np.mod(np.asarray(x, dtype=float), 1.0))[0]

    def at_depth(self, j: int) -> np.ndarray:
        if self.by_depth is None:
            raise DomainError("profile was built without per-depth rows")
        return self.by_depth[j]

    def to_csv(self) -> str:
        head = f"# {self.level},{self.depth},{self.M},{self.kind},{self.alpha_desc}\n"
        rows = "".join(f"{x!r},{v:.17g}\n" for x, v in zip(self.grid.tolist(), self.samples.tolist()))
        return head + rows

    @classmethod
    def from_csv(cls, text: str) -> "HeightProfile":
        lines = text.strip().splitlines()
        level, depth, M, kind, desc = lines[0][2:].split(",", 4)
        vals = np.array([float(line.split(",")[1]) for line in lines[1:]])
        return cls(int(level), kind, int(depth), int(M), vals, alpha_desc=desc)


def interp_periodic(rows: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Linear interpolation of 1-periodic rows sampled at k/M, at phases in [0, 1)."""
    M = rows.shape[-1]
    pos = phase * M
    i0 = np.floor(pos).astype(np.int64)
    w = pos - i0
    i0 %= M
    i1 = (i0 + 1) % M
    return rows[..., i0] * (1.0 - w) + rows[..., i1] * w


def initial_floor(n: int, M: int) -> HeightProfile:
    return HeightProfile(n, FLOOR, 0, M, np.full(M, -1.0))


def initial_ceiling(n: int, brjuno_value: float, M: int) -> HeightProfile:
    return HeightProfile(n, CEILING, 0, M, np.full(M, (float(brjuno_value) + 5.0 * math.pi) / (2.0 * math.pi)))


# ---------------------------------------------------------------------------
# one level of the map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelMap:
    """Data for pushing a level-`level` profile to level `level - 1`."""

    level: int
    logr: float
    X: np.ndarray
    phase: np.ndarray
    exact_phase: bool


def _phases(alpha: mpf, k: np.ndarray, M: int, bits: int) -> tuple[np.ndarray, bool]:
    with mpmath.workprec(64):
        need = float(-mpmath.log(alpha, 2)) + PHASE_BITS + math.log2(M) + 24
    if need > bits:
        return np.mod(k * GOLDEN_STEP, 1.0), False
    with mpmath.workprec(bits):
        c = 1 / (M * alpha)
        frac = c - mpmath.floor(c)
        C = int(mpmath.floor(frac * mpmath.ldexp(1, PHASE_BITS)))
    mask = (1 << PHASE_BITS) - 1
    ph = np.array([((int(kk) * C) & mask) for kk in k.tolist()], dtype=object)
    return np.array([math.ldexp(int(p), -PHASE_BITS) for p in ph], dtype=float), True


_LEVEL_CACHE: dict[tuple[int, int, int], LevelMap] = {}


def level_map(nie: NearestIntegerExpansion, level: int, M: int) -> LevelMap:
    if level < 0 or level > nie.certified_depth:
        raise BudgetExceeded(f"the level-{level} map needs alpha_{level}")
    key = (id(nie), level, M)
    hit = _LEVEL_CACHE.get(key)
    if hit is not None:
        return hit
    k = np.arange(M)
    kk = k if nie.epsilon(level) < 0 else (M - k) % M
    X = kk / M
    phase, exact = _phases(nie.alpha(level), kk, M, nie.bits)
    lm = LevelMap(level, -nie.log_inv_alpha(level), X, phase, exact)
    if len(_LEVEL_CACHE) > 512:
        _LEVEL_CACHE.clear()
    _LEVEL_CACHE[key] = lm
    return lm


def push(rows: np.ndarray, lm: LevelMap) -> np.ndarray:
    """Apply one refinement to every row of a (chains, M) stack."""
    M = rows.shape[-1]

    def block(sl: slice) -> np.ndarray:
        child = interp_periodic(rows, lm.phase[sl])
        return im_core(lm.logr, lm.X[sl][None, :], child)

    return column_map(block, M, rows.shape)


def refine_step(child: HeightProfile, nie: NearestIntegerExpansion) -> HeightProfile:
    """Level-(n+1) profile to level-n profile."""
    lm = level_map(nie, child.level, child.M)
    vals = push(child.samples[None, :], lm)[0]
    approx = child.approximate_phase_levels + (() if lm.exact_phase else (child.level,))
    return replace(
        child,
        level=child.level - 1,
        depth=child.depth + 1,
        samples=vals,
        by_depth=None,
        approximate_phase_levels=approx,
    )


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


def shifted_seed(y0: float, nie: NearestIntegerExpansion, depth: int) -> list[float]:
    """[y_{-1}, y_0, ..., y_{depth-1}] with y_{n+1} = Im of the preimage of i y_n."""
    if y0 < 0:
        raise DomainError("y0 must be >= 0")
    ys = [float(y0)]
    for n in range(depth):
        if n > nie.certified_depth:
            raise BudgetExceeded(f"seed y_{n} needs alpha_{n}")
        y = ys[-1]
        if not math.isfinite(y):
            ys.append(math.inf)
            continue
        if y == 0.0:
            ys.append(0.0)
            continue
        try:
            ys.append(Y_inverse_on_vertical(0.0, 0.0, y, logr=-nie.log_inv_alpha(n)))
        except NonConvergence:
            raise
    return ys


def _initial_value(kind: str, nie: NearestIntegerExpansion, level: int, y_seeds, brjuno_terms: int) -> float:
    if kind == FLOOR:
        return -1.0
    if kind == SHIFTED:
        return y_seeds[level + 1] - 1.0
    if kind == CEILING:
        m = level + 1
        terms = brjuno_terms if nie.tail is not None else min(brjuno_terms, nie.levels - m)
        if terms < 1:
            return math.inf
        b, _ = brjuno_at_level(nie, m, terms)
        v = float((b + 5 * mpmath.pi) / (2 * mpmath.pi))
        return v
    raise DomainError(f"unknown profile kind {kind!r}")


def limit_profile(
    kind: str,
    n: int,
    nie: NearestIntegerExpansion,
    tol: float = 1e-6,
    max_depth: int = 25,
    M: int = 4096,
    y0: float = 0.0,
    brjuno_terms: int = 60,
    clamp: bool = True,
    keep_rows: bool = True,
) -> HeightProfile:
    """Depth-j approximations of b_n, p_n or the shifted floor, for j = 0..max_depth.

    Chains start at level n + j.  Levels whose initial value is not a finite double
    (or whose map needs data past the certified depth) are skipped; with
    ``clamp=False`` that raises BudgetExceeded instead.
    """
    if n < -1:
        raise DomainError("level must be >= -1")
    top = n + max_depth
    if top > nie.certified_depth:
        if not clamp:
            raise BudgetExceeded(f"depth {max_depth} at level {n} needs alpha_{top}")
        top = nie.certified_depth
    seeds = shifted_seed(y0, nie, top + 1) if kind == SHIFTED else None

    starts = []
    for level in range(top, n - 1, -1):
        v = _initial_value(kind, nie, level, seeds, brjuno_terms)
        if math.isfinite(v):
            starts.append((level, v))
    if not starts:
        raise BudgetExceeded(f"no finite initial {kind} profile between levels {n} and {top}")
    deepest = starts[0][0]
    if not clamp and deepest < n + max_depth:
        raise BudgetExceeded(f"{kind} initial value is not finite at level {n + max_depth}")
    init = {lv: v for lv, v in starts}

    rows = np.empty((0, M))
    approx: list[int] = []
    for level in range(deepest, n - 1, -1):
        if level in init:
            rows = np.vstack([rows, np.full((1, M), init[level])])
        if level > n:
            lm = level_map(nie, level, M)
            if not lm.exact_phase:
                approx.append(level)
            rows = push(rows, lm)
    # rows are ordered by decreasing start level: row 0 has depth deepest - n
    by_depth = rows[::-1].copy()
    depth = by_depth.shape[0] - 1
    diffs = tuple(float(np.max(np.abs(by_depth[j] - by_depth[j - 1]))) for j in range(1, depth + 1))
    converged = bool(diffs) and diffs[-1] < tol
    return HeightProfile(
        level=n,
        kind=kind,
        depth=depth,
        M=M,
        samples=by_depth[-1].copy(),
        converged=converged,
        sup_diff_history=diffs,
        alpha_desc=nie.alpha_desc,
        y0=y0,
        by_depth=by_depth if keep_rows else None,
        approximate_phase_levels=tuple(approx),
    )


def shifted_floor_limit(
    y0: float, nie: NearestIntegerExpansion, tol: float = 1e-6, max_depth: int = 25, M: int = 4096, n: int = -1, **kw
) -> HeightProfile:
    return limit_profile(SHIFTED, n, nie, tol=tol, max_depth=max_depth, M=M, y0=y0, **kw)


def floor_ladder(nie: NearestIntegerExpansion, bottom: int, top: int, M: int) -> dict[int, HeightProfile]:
    """One chain from level ``top``: the floor b_l^{top-l} at every level l in [bottom, top]."""
    top = min(top, nie.certified_depth)
    row = np.full((1, M), -1.0)
    out: dict[int, HeightProfile] = {}
    for level in range(top, bottom - 1, -1):
        out[level] = HeightProfile(level, FLOOR, top - level, M, row[0].copy(), alpha_desc=nie.alpha_desc)
        if level > bottom:
            row = push(row, level_map(nie, level, M))
    return out


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def liminf_violations(profile: HeightProfile, window: int = 8, slack: float | None = None) -> int:
    """Grid points where some side has no sample within ``window`` cells at or below b(x) + slack.

    The default slack is ``window`` times the median adjacent jump, the
    distance a locally Lipschitz profile can move over the window.
    """
    s = profile.samples
    if slack is None:
        slack = window * float(np.median(np.abs(np.diff(np.append(s, s[0])))))
    right = np.min(np.stack([np.roll(s, -i) for i in range(1, window + 1)]), axis=0)
    left = np.min(np.stack([np.roll(s, i) for i in range(1, window + 1)]), axis=0)
    return int(np.sum((right > s + slack) | (left > s + slack)))


def sup_bound_residuals(profile: HeightProfile, nie: NearestIntegerExpansion) -> list[float]:
    """|2 pi max b_{-1}^j - sum_{i<j} beta_{i-1} log(1/alpha_i)| for j = 1..depth."""
    if profile.level != -1 or profile.by_depth is None:
        raise DomainError("need a level -1 profile with per-depth rows")
    out = []
    acc = 0.0
    for j in range(1, profile.depth + 1):
        t, _ = nie.weighted_log(j - 1)
        acc += float(t)
        out.append(abs(2 * math.pi * float(np.max(profile.by_depth[j])) - acc))
    return out


def max_adjacent_jump(profile: HeightProfile) -> float:
    s = profile.samples
    return float(np.max(np.abs(np.diff(np.append(s, s[0])))))
