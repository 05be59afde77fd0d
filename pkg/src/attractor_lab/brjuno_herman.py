"""Brjuno sums, the h_r maps, Herman witnesses and the finite-depth verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import mpmath
from mpmath import mpf

from .arithmetic import (
    NearestIntegerExpansion,
    RotationNumber,
    StandardExpansion,
    expand_nearest_integer,
)
from .errors import DepthExceeded, DomainError

HERMAN = "Herman"
BRJUNO_NOT_HERMAN = "BrjunoNotHerman"
NON_BRJUNO = "NonBrjuno"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class BrjunoPartial:
    variant: str  # "modified" | "standard"
    terms: tuple[mpf, ...]
    partial_sums: tuple[mpf, ...]
    depth: int
    divergence_score: float
    tail_error: float = 0.0

    @property
    def value(self) -> mpf:
        return self.partial_sums[-1] if self.partial_sums else mpf(0)


def _score(sums: list[mpf], window: int = 10) -> float:
    if len(sums) < 2:
        return 0.0
    w = min(window, len(sums) - 1)
    return float((sums[-1] - sums[-1 - w]) / w)


def _accumulate(terms: list[mpf], bits: int) -> list[mpf]:
    out, acc = [], mpf(0)
    with mpmath.workprec(bits):
        for t in terms:
            acc = acc + t
            out.append(acc)
    return out


def brjuno_partial(nie: NearestIntegerExpansion, N: int) -> BrjunoPartial:
    """Sum of the first N terms beta_{n-1} log(1/alpha_n), n = 0 .. N-1.

    Levels past a generator's numeric horizon come from its tail model; the
    summed error bounds are reported as ``tail_error``.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    if N > nie.levels and nie.tail is None:
        raise DepthExceeded(f"{N} terms need levels beyond certified depth {nie.certified_depth}")
    terms, err = [], 0.0
    for n in range(N):
        t, e = nie.weighted_log(n)
        terms.append(t)
        err += e
    sums = _accumulate(terms, nie.bits)
    return BrjunoPartial("modified", tuple(terms), tuple(sums), N, _score(sums), err)


def brjuno_standard_partial(se: StandardExpansion, N: int) -> BrjunoPartial:
    """Sum of the first N terms beta~_n log(1/alpha~_{n+1}), n = -1 .. N-2."""
    if N < 0:
        raise DomainError("N must be >= 0")
    if N - 1 > se.certified_depth:
        raise DepthExceeded(f"{N} standard terms need at_{N - 1}")
    terms = []
    with mpmath.workprec(se.bits):
        for n in range(-1, N - 1):
            terms.append(se.beta(n) * -mpmath.log(se.alpha(n + 1)))
    sums = _accumulate(terms, se.bits)
    return BrjunoPartial("standard", tuple(terms), tuple(sums), N, _score(sums))


def brjuno_at_level(nie: NearestIntegerExpansion, m: int, N: int) -> tuple[mpf, float]:
    """B(alpha_m) from N terms of the tail of the sum, with its error bound.

    Uses B(alpha_m) = (1/beta_{m-1}) sum_{n >= m} beta_{n-1} log(1/alpha_n).
    """
    if m > nie.certified_depth + 1 and nie.tail is None:
        raise DepthExceeded(f"B(alpha_{m}) needs levels beyond {nie.certified_depth}")
    total, err = mpf(0), 0.0
    with mpmath.workprec(nie.bits):
        for n in range(m, m + N):
            if n >= nie.levels and nie.tail is None:
                raise DepthExceeded(f"B(alpha_{m}) with {N} terms needs level {n}")
            t, e = nie.weighted_log(n)
            total += t
            err += e
        scale = nie.beta(m - 1)
        return total / scale, float(mpf(err) / scale) if err else 0.0


# ---------------------------------------------------------------------------
# h_r
# ---------------------------------------------------------------------------


def h(r, y):
    """h_r(y): e^y up to y = log(1/r), then the tangent line (y - log(1/r) + 1)/r."""
    if isinstance(r, mpf) or isinstance(y, mpf):
        r, y = mpf(r), mpf(y)
        if not (0 < r < 1):
            raise DomainError(f"r = {r} is outside (0, 1)")
        L = -mpmath.log(r)
        return mpmath.exp(y) if y <= L else (y - L + 1) / r
    if not (0.0 < r < 1.0):
        raise DomainError(f"r = {r} is outside (0, 1)")
    L = -math.log(r)
    return math.exp(y) if y <= L else (y - L + 1.0) / r


def h_inv(r, y):
    """Inverse of h_r on (0, inf)."""
    if isinstance(r, mpf) or isinstance(y, mpf):
        r, y = mpf(r), mpf(y)
        if not (0 < r < 1):
            raise DomainError(f"r = {r} is outside (0, 1)")
        if y <= 0:
            raise DomainError("h_r^{-1} needs y > 0")
        return mpmath.log(y) if y <= 1 / r else r * y + mpmath.log(r) * -1 - 1
    if not (0.0 < r < 1.0):
        raise DomainError(f"r = {r} is outside (0, 1)")
    if y <= 0.0:
        raise DomainError("h_r^{-1} needs y > 0")
    return math.log(y) if y <= 1.0 / r else r * y - math.log(r) - 1.0


# ---------------------------------------------------------------------------
# Herman witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessResult:
    n: int
    m_max: int
    m: int | None
    tower_values: tuple[mpf, ...]
    brjuno_values: tuple[mpf, ...]

    @property
    def found(self) -> bool:
        return self.m is not None

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m_max": self.m_max,
            "m": self.m,
            "found": self.found,
            "tower": [mpmath.nstr(v, 12) for v in self.tower_values],
            "brjuno": [mpmath.nstr(v, 12) for v in self.brjuno_values],
        }


def herman_witness_search(
    nie: NearestIntegerExpansion, n: int, m_max: int, brjuno_depth: int
) -> WitnessResult:
    """Smallest m in [n, m_max] with h_{alpha_{m-1}} o ... o h_{alpha_n}(0) >= B(alpha_m).

    The composition is the identity for m = n.  B(alpha_m) is truncated to
    ``brjuno_depth`` terms.
    """
    if m_max > nie.certified_depth:
        raise DepthExceeded(f"m_max = {m_max} exceeds certified depth {nie.certified_depth}")
    if n < 0 or n > m_max:
        raise DomainError(f"need 0 <= n <= m_max, got n = {n}")
    towers, bvals = [], []
    y = mpf(0)
    with mpmath.workprec(nie.bits):
        for m in range(n, m_max + 1):
            if m > n:
                y = h(nie.alpha(m - 1), y)
            b, _ = brjuno_at_level(nie, m, brjuno_depth)
            towers.append(y)
            bvals.append(b)
            if y >= b:
                return WitnessResult(n, m_max, m, tuple(towers), tuple(bvals))
    return WitnessResult(n, m_max, None, tuple(towers), tuple(bvals))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    divergence_sum: float = 50.0
    divergence_share: float = 0.25
    stable_window: int = 10
    stable_tol: float = 1e-9
    brjuno_terms: int = 80


@dataclass(frozen=True)
class ArithmeticVerdict:
    klass: str
    depth: int
    probes: tuple[int, ...]
    witnesses: tuple[WitnessResult, ...]
    brjuno: BrjunoPartial
    thresholds: Thresholds
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict[str, Any]:
        return {
            "class": self.klass,
            "depth": self.depth,
            "probes": list(self.probes),
            "witnesses": [w.to_json() for w in self.witnesses],
            "brjuno": {
                "terms": len(self.brjuno.terms),
                "partial": mpmath.nstr(self.brjuno.value, 15),
                "tail_error": self.brjuno.tail_error,
                "divergence_score": self.brjuno.divergence_score,
            },
            "thresholds": self.thresholds.__dict__,
            "reasons": list(self.reasons),
        }


def probe_ladder(d: int) -> tuple[int, ...]:
    return tuple(sorted({0, d // 4, d // 2, (3 * d) // 4}))


def classify(
    alpha: RotationNumber | NearestIntegerExpansion,
    depth: int = 25,
    cap: int | None = None,
    thresholds: Thresholds | None = None,
    bits: int = 256,
) -> ArithmeticVerdict:
    """Finite-depth verdict: Herman, BrjunoNotHerman, NonBrjuno or Undetermined.

    Order of tests: every ladder probe has a witness (Herman); the partial sum
    is large and still growing linearly (NonBrjuno); the tail has stabilised
    (BrjunoNotHerman); otherwise Undetermined.
    """
    th = thresholds or Thresholds()
    if isinstance(alpha, NearestIntegerExpansion):
        nie = alpha
    else:
        nie = expand_nearest_integer(alpha, depth + th.brjuno_terms + 1, bits=bits)
    d = min(depth, nie.certified_depth)
    m_cap = min(cap if cap is not None else nie.certified_depth, nie.certified_depth)
    usable = nie.levels if nie.tail is None else th.brjuno_terms
    n_terms = min(th.brjuno_terms, usable)
    bp = brjuno_partial(nie, n_terms)
    probes = probe_ladder(d)
    reasons: list[str] = []

    witnesses = []
    for n in probes:
        if n > m_cap:
            break
        room = nie.levels - n if nie.tail is None else th.brjuno_terms
        witnesses.append(herman_witness_search(nie, n, m_cap, max(1, min(th.brjuno_terms, room))))
    all_found = len(witnesses) == len(probes) and all(w.found for w in witnesses)

    total = bp.value
    quarter = max(1, n_terms // 4)
    share = float((total - bp.partial_sums[-1 - quarter]) / total) if n_terms > quarter else 0.0
    w = min(th.stable_window, n_terms - 1)
    tail_inc = float(total - bp.partial_sums[-1 - w]) + bp.tail_error if w > 0 else math.inf

    if all_found:
        klass = HERMAN
        reasons.append(f"witness found for every probe n in {list(probes)}")
    elif float(total) > th.divergence_sum and share > th.divergence_share:
        klass = NON_BRJUNO
        reasons.append(f"partial sum {float(total):.4g} > {th.divergence_sum}; last quarter share {share:.3f}")
    elif tail_inc < th.stable_tol:
        klass = BRJUNO_NOT_HERMAN
        missing = [wr.n for wr in witnesses if not wr.found]
        reasons.append(f"tail increment {tail_inc:.3g} < {th.stable_tol}; no witness up to m = {m_cap} for n in {missing}")
    else:
        klass = UNDETERMINED
        reasons.append("no rule applied")
    return ArithmeticVerdict(klass, d, probes, tuple(witnesses), bp, th, tuple(reasons))
