"""Sector renormalisation of the model map and its numerical check against the -1/alpha map.

Two lift conventions meet here.  ``ModelPoint.lift`` is v with z = conj(e^{2 pi i v});
the renormalised map acts on zeta = e^{2 pi i w}, so w = -conj(v) up to an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import mpmath
import numpy as np
from mpmath import mpf

from .arithmetic import NearestIntegerExpansion, RotationNumber, expand_nearest_integer
from .coords import HalfPlanePoint
from .dynamics import Lift, ModelPoint, T, at_nie_precision, backward, compose_up
from .errors import DomainError, NotInSector, OutsideDomain
from .tiling import FLOOR, HeightProfile, limit_profile

SECTOR_BAND = mpf(2) ** -40
MAX_RETURN = 10_000


# ---------------------------------------------------------------------------
# lift conventions
# ---------------------------------------------------------------------------


def zeta_lift(z: ModelPoint) -> Lift:
    """w with Re in [0, 1) and e^{2 pi i w} = z."""
    v = z.to_lift()
    return Lift(mpmath.frac(-v.x), v.y)


def from_zeta_lift(w: Lift) -> ModelPoint:
    return ModelPoint.from_lift(Lift(-w.x, w.y))


def conjugate(z: ModelPoint) -> ModelPoint:
    """s(z) = conj(z)."""
    if z.is_origin:
        return z
    v = z.to_lift()
    return ModelPoint.from_lift(Lift(-v.x, v.y))


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RenormContext:
    """Expansions needed to renormalise the map of ``alpha`` (normalised into (-1/2, 1/2)).

    ``positive`` expands |alpha|; ``sign`` is -1 when the conjugated branch applies;
    ``target`` expands -1/alpha.
    """

    alpha: RotationNumber
    normalised: RotationNumber
    sign: int
    positive: NearestIntegerExpansion
    target: NearestIntegerExpansion

    @classmethod
    def build(cls, alpha: RotationNumber, depth: int = 25, bits: int = 256) -> "RenormContext":
        nie = expand_nearest_integer(alpha, depth + 2, bits=bits)
        normalised = alpha.plus(-nie.a_minus1)
        sign = nie.eps0
        positive = nie if sign > 0 else expand_nearest_integer(normalised.negated(), depth + 2, bits=bits)
        target = expand_nearest_integer(normalised.neg_reciprocal(), depth + 1, bits=bits)
        return cls(alpha, normalised, sign, positive, target)

    @property
    def r(self) -> mpf:
        return self.positive.alpha(0)


def gauss_shift_holds(ctx: RenormContext, levels: int | None = None) -> bool:
    """The expansion of -1/alpha is the expansion of alpha shifted by one level.

    From 1/alpha_0 = a_0 + eps_1 alpha_1: -1/alpha has eps'_0 = -sign * eps_1.
    """
    p, t = ctx.positive, ctx.target
    n = min(p.certified_depth - 1, t.certified_depth) if levels is None else levels
    if t.eps0 != -ctx.sign * p.epsilon(1):
        return False
    for i in range(n):
        if t.a[i] != p.a[i + 1] or t.eps[i] != p.eps[i + 1]:
            return False
        if abs(t.alpha(i) - p.alpha(i + 1)) > mpf(2) ** (-min(p.bits, t.bits) // 2):
            return False
    return True


# ---------------------------------------------------------------------------
# psi, phi, return time
# ---------------------------------------------------------------------------


def _check_positive(nie: NearestIntegerExpansion) -> None:
    if nie.a_minus1 != 0 or nie.eps0 != 1:
        raise DomainError("psi and phi need alpha in (0, 1/2)")


def psi(nie: NearestIntegerExpansion, w: HalfPlanePoint | Lift | complex) -> ModelPoint:
    """conj(e^{2 pi i Y_0(w)}) for alpha in (0, 1/2); arg = 2 pi alpha Re w."""
    _check_positive(nie)
    if isinstance(w, HalfPlanePoint):
        w = Lift(mpf(w.x), w.y)
    elif not isinstance(w, Lift):
        w = Lift(mpf(complex(w).real), complex(w).imag)
    if w.y < -1.0:
        raise DomainError(f"Im w = {w.y} is below -1")
    return ModelPoint.from_lift(compose_up(nie, w, 0))


@at_nie_precision
def in_sector(z: ModelPoint, nie: NearestIntegerExpansion) -> bool:
    """arg z in [0, 2 pi alpha), with a 2^-40 band below 0 counted as inside."""
    if z.is_origin:
        return False
    f = mpmath.frac(z.to_lift().x)
    return bool(f < SECTOR_BAND or f > 1 - nie.alpha(0))


@at_nie_precision
def phi(nie: NearestIntegerExpansion, z: ModelPoint) -> Lift:
    """Inverse of psi on the sector: Re in [0, 1), Im by vertical inversion."""
    _check_positive(nie)
    if not in_sector(z, nie):
        raise NotInSector(f"arg {z.theta} is outside [0, 2 pi alpha)")
    v = z.to_lift()
    f = mpmath.frac(v.x)
    u = mpf(0) if f < SECTOR_BAND else f - 1
    return backward(nie, 0, Lift(u, v.y))


def return_time(
    nie: NearestIntegerExpansion, z: ModelPoint, depth_cap: int = 25
) -> tuple[int, ModelPoint]:
    """Smallest k >= 2 with T^k z in the sector, and T^k z."""
    if not in_sector(z, nie):
        raise NotInSector(f"arg {z.theta} is outside the sector")
    cur = T(z, nie, depth_cap)
    for k in range(2, MAX_RETURN):
        cur = T(cur, nie, depth_cap)
        if in_sector(cur, nie):
            return k, cur
    raise DomainError("no return to the sector")


# ---------------------------------------------------------------------------
# renormalised map
# ---------------------------------------------------------------------------


def _renormalize_positive(nie: NearestIntegerExpansion, zeta: ModelPoint, depth_cap: int) -> tuple[ModelPoint, int]:
    w = zeta_lift(zeta)
    k, back = return_time(nie, psi(nie, w), depth_cap)
    return from_zeta_lift(phi(nie, back)), k


def renormalize(ctx: RenormContext, zeta: ModelPoint, depth_cap: int = 25) -> tuple[ModelPoint, int]:
    """E_alpha(zeta) and the return time used; E_alpha(0) = 0.

    For negative alpha the conjugated branch s o E_{-alpha} o s applies.
    """
    if zeta.is_origin:
        return ModelPoint.origin(), 0
    if ctx.sign > 0:
        return _renormalize_positive(ctx.positive, zeta, depth_cap)
    out, k = _renormalize_positive(ctx.positive, conjugate(zeta), depth_cap)
    return conjugate(out), k


# ---------------------------------------------------------------------------
# samples and verification
# ---------------------------------------------------------------------------


def boundary_samples(ctx: RenormContext, count: int, M: int = 4096, depth: int = 25) -> list[ModelPoint]:
    """Equidistributed angles on the boundary of the -1/alpha set."""
    floor = limit_profile(FLOOR, -1, ctx.target, max_depth=depth, M=M, keep_rows=False)
    xs = [mpf(k) / count for k in range(count)]
    return [ModelPoint.from_lift(Lift(x, float(floor(float(x))))) for x in xs]


@at_nie_precision
def deep_sample(nie: NearestIntegerExpansion, level: int, height: float = 5.0) -> ModelPoint:
    """A point whose trajectory stays outside K down to ``level``.

    Start at Re = 1/alpha_level - 1/2 and climb with l_i = a_i + (3 eps_{i+1} - 1)/2.
    """
    if level > nie.certified_depth:
        raise DomainError(f"level {level} exceeds certified depth {nie.certified_depth}")
    w = Lift(1 / nie.alpha(level) - mpf(1) / 2, height)
    for i in range(level - 1, -1, -1):
        v = compose_up(nie, w, i + 1, i + 1)
        shift = (nie.epsilon(i + 1) + 1) // 2
        l = int(nie.a[i]) + (3 * nie.epsilon(i + 1) - 1) // 2
        w = Lift(v.x - shift + l, v.y)
    return ModelPoint.from_lift(compose_up(nie, w, 0))


@dataclass
class RenormReport:
    alpha_desc: str
    depth: int
    samples: int
    max_dev: float
    mean_dev: float
    failures: list[dict[str, float]] = field(default_factory=list)
    return_times: list[int] = field(default_factory=list)
    deviations: list[float] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "alpha_desc": self.alpha_desc,
            "depth": self.depth,
            "samples": self.samples,
            "max_dev": self.max_dev,
            "mean_dev": self.mean_dev,
            "failures": self.failures,
        }


def deviation(ctx: RenormContext, zeta: ModelPoint, depth_cap: int) -> tuple[float, int]:
    e, k = renormalize(ctx, zeta, depth_cap)
    t = T(zeta, ctx.target, depth_cap)
    return abs(e.z - t.z), k


def verify_renormalization(
    alpha: RotationNumber | RenormContext,
    sample_count: int = 64,
    depth: int = 25,
    tol: float | None = None,
    M: int = 4096,
    extra: list[ModelPoint] | None = None,
) -> RenormReport:
    """Compare E_alpha with the -1/alpha map on boundary samples (plus ``extra``)."""
    ctx = alpha if isinstance(alpha, RenormContext) else RenormContext.build(alpha, depth + 2)
    tol = 10 * 0.9**depth if tol is None else tol
    points = boundary_samples(ctx, sample_count, M, depth) + list(extra or [])
    devs, ks, failures = [], [], []
    for z in points:
        try:
            d, k = deviation(ctx, z, depth)
        except (OutsideDomain, NotInSector, DomainError):
            d, k = math.inf, 0
        devs.append(d)
        ks.append(k)
        if not d <= tol:
            failures.append({"theta": z.theta, "rho": z.rho, "dev": d if math.isfinite(d) else None})
    finite = [d for d in devs if math.isfinite(d)]
    return RenormReport(
        alpha_desc=ctx.alpha.desc,
        depth=depth,
        samples=len(points),
        max_dev=max(devs) if devs else 0.0,
        mean_dev=float(np.mean(finite)) if finite else math.nan,
        failures=failures,
        return_times=ks,
        deviations=devs,
    )


def domain_identity_gap(ctx: RenormContext, M: int = 4096, depth: int = 25) -> float:
    """Sup distance between the projected level-0 floor of alpha and the -1/alpha floor.

    Both profiles are computed independently; the -1/alpha side is read at -x (or x on
    the conjugated branch) to account for e^{2 pi i w} versus conj(e^{2 pi i w}).
    """
    b0 = limit_profile(FLOOR, 0, ctx.positive, max_depth=depth, M=M, keep_rows=False)
    bt = limit_profile(FLOOR, -1, ctx.target, max_depth=depth, M=M, keep_rows=False)
    x = np.arange(M) / M
    other = bt.samples if ctx.sign < 0 else bt(np.mod(-x, 1.0))
    return float(np.max(np.abs(b0.samples - other)))
