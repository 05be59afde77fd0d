"""The model map: trajectories, the lift, the projected map, orbits.

Real parts of lifted points are carried as mpf because each descent divides by
alpha_{i+1}; imaginary parts are doubles, handled by the log-domain kernel.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .arithmetic import NearestIntegerExpansion, RotationNumber
from .coords import im_core, inverse_closed_form
from .errors import DomainError, NoPreimage, OutsideAttractor, OutsideDomain
from .tiling import HeightProfile

TWO_PI = 2.0 * math.pi
ENTERED_K = "EnteredK"
DEPTH_CAPPED = "DepthCapped"


@dataclass(frozen=True)
class Lift:
    """A point x + i y of the tower with an exact-ish real part."""

    x: mpf
    y: float

    @property
    def complex(self) -> complex:
        return complex(float(self.x), self.y)


@dataclass(frozen=True)
class Trajectory:
    """Rungs (w_i, l_i) for i = -1 .. m; ``ls[i+1]`` is l_i.  The last rung has no l."""

    points: tuple[Lift, ...]
    ls: tuple[int, ...]
    terminal: str
    level: int

    @property
    def depth(self) -> int:
        return len(self.points) - 2


@dataclass(frozen=True)
class ModelPoint:
    theta: float
    rho: float
    lift: Lift | None = None

    @classmethod
    def origin(cls) -> "ModelPoint":
        return cls(0.0, 0.0, None)

    @property
    def is_origin(self) -> bool:
        return self.rho == 0.0

    @property
    def z(self) -> complex:
        return cmath.rect(self.rho, self.theta)

    @classmethod
    def from_lift(cls, w: Lift) -> "ModelPoint":
        with mpmath.workprec(mpmath.mp.prec):
            x = w.x - mpmath.floor(w.x)
        theta = float((-TWO_PI * float(x)) % TWO_PI)
        return cls(theta, math.exp(-TWO_PI * w.y), Lift(x, w.y))

    def to_lift(self) -> Lift:
        if self.is_origin:
            raise DomainError("the origin has no lift")
        if self.lift is not None:
            return self.lift
        x = mpf(-self.theta / TWO_PI) % 1
        return Lift(x, -math.log(self.rho) / TWO_PI)


# ---------------------------------------------------------------------------
# single maps
# ---------------------------------------------------------------------------


def at_nie_precision(fn):
    """Run ``fn(…, nie, …)`` with the mpmath context at the expansion's precision."""

    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        nie = kwargs.get("nie")
        if nie is None:
            nie = next(a for a in args if isinstance(a, NearestIntegerExpansion))
        with mpmath.workprec(nie.bits):
            return fn(*args, **kwargs)

    return wrapped


def _frac(x: mpf) -> mpf:
    return x - mpmath.floor(x)


def _snap(w: Lift, bits: int) -> Lift:
    """Round Re w to an integer when it is within working resolution of one.

    Otherwise ceil(tiny) = 1 leaves 1 - tiny, which rounds to 1 and has no preimage.
    """
    k = mpmath.nint(w.x)
    if w.x != k and abs(w.x - k) <= mpmath.ldexp(max(abs(w.x), 1), 8 - bits):
        return Lift(k, w.y)
    return w


@at_nie_precision
def forward(nie: NearestIntegerExpansion, n: int, w: Lift) -> Lift:
    """The signed map of level n on a lift."""
    a = nie.alpha(n)
    X = a * w.x
    im = float(im_core(-nie.log_inv_alpha(n), float(_frac(X)), w.y))
    return Lift(-nie.epsilon(n) * X, im)


@at_nie_precision
def backward(nie: NearestIntegerExpansion, n: int, v: Lift) -> Lift:
    """Preimage of v under the signed map of level n, with Re in [0, 1/alpha_n)."""
    X = -nie.epsilon(n) * v.x
    if X < 0 or X >= 1:
        raise DomainError("backward step expects -eps_n Re v in [0, 1)")
    y = inverse_closed_form(-nie.log_inv_alpha(n), float(X), v.y)
    return Lift(X / nie.alpha(n), y)


# ---------------------------------------------------------------------------
# trajectories and the lift
# ---------------------------------------------------------------------------


def _check_floor(w: Lift, floor: HeightProfile | None, tol: float) -> None:
    if floor is None:
        return
    b = float(floor(float(_frac(w.x))))
    if w.y < b - tol:
        raise OutsideDomain(f"Im w = {w.y} is below the floor value {b}")


@at_nie_precision
def trajectory(
    w: Lift | complex,
    nie: NearestIntegerExpansion,
    depth_cap: int,
    floors: dict[int, HeightProfile] | None = None,
    tol: float = 1e-9,
) -> Trajectory:
    """Descend until the first w_n with Re w_n <= 1/alpha_n - 1, or to level depth_cap."""
    if not isinstance(w, Lift):
        w = Lift(mpf(complex(w).real), complex(w).imag)
    if w.y < -1.0 - tol:
        raise OutsideDomain(f"Im w = {w.y} < -1")
    if depth_cap > nie.certified_depth:
        raise DomainError(f"depth_cap {depth_cap} exceeds certified depth {nie.certified_depth}")
    x = w.x
    if x < 0 or x > 1:
        x = _frac(x)
    cur = Lift(x, max(w.y, -1.0))
    if floors:
        _check_floor(cur, floors.get(-1), tol)
    points, ls = [cur], []
    level = -1
    while True:
        eps = nie.epsilon(level + 1)
        cur = _snap(cur, nie.bits)
        l = int(mpmath.floor(cur.x)) if eps < 0 else int(mpmath.ceil(cur.x))
        try:
            nxt = backward(nie, level + 1, Lift(cur.x - l, cur.y))
        except NoPreimage as exc:
            raise OutsideDomain(str(exc)) from exc
        ls.append(l)
        points.append(nxt)
        level += 1
        cur = nxt
        if floors:
            _check_floor(cur, floors.get(level), tol)
        if cur.x <= 1 / nie.alpha(level) - 1:
            return Trajectory(tuple(points), tuple(ls), ENTERED_K, level)
        if level >= depth_cap:
            return Trajectory(tuple(points), tuple(ls), DEPTH_CAPPED, level)


@at_nie_precision
def compose_up(nie: NearestIntegerExpansion, start: Lift, top: int, bottom: int = 0) -> Lift:
    """Apply (signed map_i + (eps_i + 1)/2) for i = top down to bottom."""
    v = start
    for i in range(top, bottom - 1, -1):
        v = forward(nie, i, v)
        v = Lift(v.x + (nie.epsilon(i) + 1) // 2, v.y)
    return v


@at_nie_precision
def rung_residuals(traj: Trajectory, nie: NearestIntegerExpansion) -> list[float]:
    """|signed map_{i+1}(w_{i+1}) + l_i - w_i| along the ladder."""
    out = []
    for i in range(len(traj.ls)):
        v = forward(nie, i, traj.points[i + 1])
        w = traj.points[i]
        out.append(abs(complex(float(v.x + traj.ls[i] - w.x), v.y - w.y)))
    return out


def truncation_bound(depth_cap: int) -> float:
    return 30.0 * 0.9**depth_cap


@at_nie_precision
def T_lift(
    w: Lift | complex,
    nie: NearestIntegerExpansion,
    depth_cap: int = 25,
    floors: dict[int, HeightProfile] | None = None,
    tol: float = 1e-9,
) -> Lift:
    """The lift of the model map, with Re reduced to [0, 1).

    A capped trajectory uses the truncated limit, whose error is at most
    30 * 0.9**depth_cap.
    """
    traj = trajectory(w, nie, depth_cap, floors, tol)
    n = traj.level
    wn = traj.points[-1]
    shift = 1 if traj.terminal == ENTERED_K else 1 - 1 / nie.alpha(n)
    v = compose_up(nie, Lift(wn.x + shift, wn.y), n)
    return Lift(_frac(v.x), v.y)


@at_nie_precision
def T(
    z: ModelPoint,
    nie: NearestIntegerExpansion,
    depth_cap: int = 25,
    floor: HeightProfile | None = None,
    tol: float = 1e-6,
) -> ModelPoint:
    """The model map on the plane; fixes the origin."""
    if z.is_origin:
        return ModelPoint.origin()
    w = z.to_lift()
    if floor is not None:
        b = float(floor(float(_frac(w.x))))
        if w.y < b - tol:
            raise OutsideAttractor(f"point at angle {z.theta} lies outside the set")
    return ModelPoint.from_lift(T_lift(w, nie, depth_cap))


def orbit(z: ModelPoint, N: int, nie: NearestIntegerExpansion, depth_cap: int = 25) -> list[ModelPoint]:
    """[z, T z, ..., T^N z]."""
    out = [z]
    for _ in range(N):
        z = T(z, nie, depth_cap)
        out.append(z)
    return out


def plus_one() -> ModelPoint:
    return ModelPoint(0.0, 1.0, Lift(mpf(1), 0.0))


def recurrence_gap(z: ModelPoint, N: int, nie: NearestIntegerExpansion, depth_cap: int = 25) -> float:
    """min_{1 <= n <= N} |T^n z - z|."""
    return recurrence_profile(z, [N], nie, depth_cap)[0]


def recurrence_profile(
    z: ModelPoint, Ns: Sequence[int], nie: NearestIntegerExpansion, depth_cap: int = 25
) -> list[float]:
    """Recurrence gaps for every N in ``Ns`` from a single orbit."""
    if z.is_origin:
        return [0.0 for _ in Ns]
    z0 = z.z
    best, out = math.inf, []
    targets = sorted(set(Ns))
    cur = z
    found: dict[int, float] = {}
    for n in range(1, targets[-1] + 1):
        cur = T(cur, nie, depth_cap)
        best = min(best, abs(cur.z - z0))
        if n in targets:
            found[n] = best
    return [found[N] for N in Ns]


def orbit_size_check(alpha: float | mpf, k: int) -> tuple[float, float, float]:
    """(|T^k(+1)|, lower, upper) from the closed form; bounds 1/(8(1+m)) and 24 pi/(1+m)."""
    r = abs(mpf(alpha))
    if not (0 < r < mpf(1) / 2):
        raise DomainError("need 0 < |alpha| < 1/2")
    if k < 0 or k >= 1 / r:
        raise DomainError("need 0 <= k < 1/|alpha|")
    with mpmath.workprec(128):
        pi = mpmath.pi
        e3 = mpmath.exp(-3 * pi * r)
        num = e3 - mpmath.expj(pi * r)
        den = e3 - mpmath.expj(-pi * r) * mpmath.expj(-2 * pi * r * k)
        value = float(abs(num / den))
        m = float(min(mpf(k), 1 / r - k))
    return value, 1.0 / (8.0 * (1.0 + m)), 24.0 * math.pi / (1.0 + m)


def boundary_point(floor: HeightProfile, x: float) -> ModelPoint:
    """The point of the set boundary above Re w = x, from a level -1 floor."""
    return ModelPoint.from_lift(Lift(mpf(x), float(floor(x))))
