"""Polar geometry of the invariant sets: radii from height profiles, topology labels,
Hausdorff distances and CSV / PPM / SVG export.

A lift w projects to conj(e^{2 pi i w}), so the angle is -2 pi Re w and the radius
e^{-2 pi Im w}.  Floors give outer radii, ceilings inner radii.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .arithmetic import NearestIntegerExpansion, RotationNumber, expand_nearest_integer
from .brjuno_herman import (
    BRJUNO_NOT_HERMAN,
    HERMAN,
    NON_BRJUNO,
    UNDETERMINED,
    ArithmeticVerdict,
    Thresholds,
    classify,
)
from .errors import DomainError, ResolutionMismatch
from .tiling import CEILING, FLOOR, HeightProfile, limit_profile, shifted_floor_limit, worker_count

TWO_PI = 2.0 * math.pi
HAIR_FLOOR = 1e-6

TOPOLOGY = {
    HERMAN: "Jordan curve",
    BRJUNO_NOT_HERMAN: "one-sided hairy Jordan curve",
    NON_BRJUNO: "Cantor bouquet",
    UNDETERMINED: "unlabeled",
}


@dataclass
class AttractorGeometry:
    """Radial segments [r_inner, r_outer] at angles theta_k = -2 pi k / K (mod 2 pi).

    ``r_inner`` is 0 when no ceiling is available (non-Brjuno truncation) and NaN
    at angles where a shifted floor rises above the ceiling.
    """

    alpha_desc: str
    K: int
    theta: np.ndarray
    r_outer: np.ndarray
    r_inner: np.ndarray
    depth: int
    M: int = 0
    class_hint: str = UNDETERMINED
    r_alpha: float = 0.0
    sup_b: float = math.nan
    partial_brjuno: float = math.nan
    gap_threshold: float = HAIR_FLOOR
    t: float = 1.0

    def __post_init__(self) -> None:
        for name in ("theta", "r_outer", "r_inner"):
            arr = getattr(self, name)
            if arr.shape != (self.K,):
                raise DomainError(f"{name} has shape {arr.shape}, expected ({self.K},)")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.K) / self.K

    def metadata(self) -> dict[str, Any]:
        return {
            "alpha_desc": self.alpha_desc,
            "depth": self.depth,
            "K": self.K,
            "M": self.M,
            "class": self.class_hint,
            "r_alpha": self.r_alpha,
            "sup_b": self.sup_b,
            "partial_brjuno": self.partial_brjuno,
        }

    # CSV ------------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("theta,r_inner,r_outer\n")
        for th, ri, ro in zip(self.theta.tolist(), self.r_inner.tolist(), self.r_outer.tolist()):
            buf.write(f"{th:.17g},{ri:.17g},{ro:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, **meta: Any) -> "AttractorGeometry":
        lines = text.strip().splitlines()
        if lines[0] != "theta,r_inner,r_outer":
            raise DomainError("missing theta,r_inner,r_outer header")
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        meta.setdefault("alpha_desc", "")
        meta.setdefault("depth", 0)
        return cls(K=len(data), theta=data[:, 0], r_inner=data[:, 1], r_outer=data[:, 2], **meta)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _angles(K: int) -> np.ndarray:
    return np.mod(-TWO_PI * np.arange(K) / K, TWO_PI)


def _radius(heights: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(-TWO_PI * heights)


def gap_threshold(floor: HeightProfile, ceiling: HeightProfile | None) -> float:
    """Height gap below which floor and ceiling count as touching.

    The last sup-difference of each profile bounds how far it may still move.
    """
    if ceiling is None:
        return HAIR_FLOOR
    tail = [h[-1] for h in (floor.sup_diff_history, ceiling.sup_diff_history) if h]
    return max(HAIR_FLOOR, 2.0 * sum(tail))


def geometry_from_profiles(
    floor: HeightProfile,
    ceiling: HeightProfile | None,
    K: int,
    class_hint: str = UNDETERMINED,
    partial_brjuno: float = math.nan,
    alpha_desc: str | None = None,
    t: float = 1.0,
) -> AttractorGeometry:
    x = np.arange(K) / K
    b = floor(x)
    r_outer = _radius(b)
    if ceiling is None:
        r_inner = np.zeros(K)
        r_alpha = 0.0
    else:
        p = ceiling(x)
        r_inner = np.where(b > p, np.nan, _radius(p))
        r_alpha = float(_radius(np.array([float(ceiling(0.0))]))[0])
    return AttractorGeometry(
        alpha_desc=floor.alpha_desc if alpha_desc is None else alpha_desc,
        K=K,
        theta=_angles(K),
        r_outer=r_outer,
        r_inner=r_inner,
        depth=floor.depth,
        M=floor.M,
        class_hint=class_hint,
        r_alpha=r_alpha,
        sup_b=floor.sup,
        partial_brjuno=partial_brjuno,
        gap_threshold=gap_threshold(floor, ceiling),
        t=t,
    )


@dataclass
class GeometryInputs:
    """Expansion, verdict and the level -1 profiles behind a geometry."""

    nie: NearestIntegerExpansion
    verdict: ArithmeticVerdict
    floor: HeightProfile
    ceiling: HeightProfile | None
    depth: int
    M: int
    extras: dict[str, Any] = field(default_factory=dict)


def prepare(alpha: RotationNumber | NearestIntegerExpansion, depth: int = 25, M: int = 4096, bits: int = 256) -> GeometryInputs:
    """Expand, classify and compute b_{-1} (and p_{-1} unless non-Brjuno)."""
    th = Thresholds()
    if isinstance(alpha, NearestIntegerExpansion):
        nie = alpha
    else:
        nie = expand_nearest_integer(alpha, depth + th.brjuno_terms + 1, bits=bits)
    verdict = classify(nie, depth=depth, thresholds=th)
    floor = limit_profile(FLOOR, -1, nie, max_depth=depth, M=M)
    ceiling = None
    if verdict.klass != NON_BRJUNO:
        ceiling = limit_profile(CEILING, -1, nie, max_depth=depth, M=M)
    return GeometryInputs(nie, verdict, floor, ceiling, depth, M)


def attractor_geometry(
    alpha: RotationNumber | NearestIntegerExpansion | GeometryInputs,
    depth: int = 25,
    K: int = 4096,
    M: int = 4096,
) -> AttractorGeometry:
    """Geometry of the attractor: outer radii from b_{-1}, inner radii from p_{-1}."""
    gi = alpha if isinstance(alpha, GeometryInputs) else prepare(alpha, depth, M)
    return geometry_from_profiles(
        gi.floor, gi.ceiling, K, gi.verdict.klass, float(gi.verdict.brjuno.value), gi.nie.alpha_desc
    )


def invariant_geometry(
    alpha: RotationNumber | NearestIntegerExpansion | GeometryInputs,
    t: float,
    depth: int = 25,
    K: int = 4096,
    M: int = 4096,
) -> AttractorGeometry:
    """The member of the invariant family through the point t on the positive axis.

    Outer radii come from the floor shifted to y = log(1/t)/(2 pi).
    """
    gi = alpha if isinstance(alpha, GeometryInputs) else prepare(alpha, depth, M)
    base = attractor_geometry(gi, depth, K, M)
    if not (base.r_alpha <= t <= 1.0) or t <= 0.0:
        raise DomainError(f"t = {t} is outside [r_alpha, 1] = [{base.r_alpha}, 1]")
    if t == 1.0:
        return base
    y0 = math.log(1.0 / t) / TWO_PI
    key = ("shifted", y0)
    if key not in gi.extras:
        gi.extras[key] = shifted_floor_limit(y0, gi.nie, max_depth=depth, M=M)
    geom = geometry_from_profiles(
        gi.extras[key], gi.ceiling, K, gi.verdict.klass, float(gi.verdict.brjuno.value), gi.nie.alpha_desc, t
    )
    geom.r_alpha = base.r_alpha
    return geom


def invariant_family(
    gi: GeometryInputs, ts, K: int = 4096
) -> list[AttractorGeometry]:
    """Members of the invariant family for every t in ``ts``, all at one common depth.

    Seeds overflow at shallower levels for smaller t, so each member is read at the
    depth of the shallowest one; otherwise the members would not be comparable.
    """
    base = attractor_geometry(gi, gi.depth, K, gi.M)
    profiles = []
    for t in ts:
        t = float(t)
        if not (base.r_alpha <= t <= 1.0) or t <= 0.0:
            raise DomainError(f"t = {t} is outside [r_alpha, 1] = [{base.r_alpha}, 1]")
        if t == 1.0:
            profiles.append(gi.floor)
            continue
        y0 = math.log(1.0 / t) / TWO_PI
        key = ("shifted", y0)
        if key not in gi.extras:
            gi.extras[key] = shifted_floor_limit(y0, gi.nie, max_depth=gi.depth, M=gi.M)
        profiles.append(gi.extras[key])
    common = min(p.depth for p in profiles)
    out = []
    for t, prof in zip(ts, profiles):
        prof = replace(prof, samples=prof.at_depth(common).copy(), depth=common)
        geom = geometry_from_profiles(
            prof, gi.ceiling, K, gi.verdict.klass, float(gi.verdict.brjuno.value), gi.nie.alpha_desc, float(t)
        )
        geom.r_alpha = base.r_alpha
        out.append(geom)
    return out


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopologyReport:
    label: str
    verdict: str
    hair_fraction: float
    touch_fraction: float
    gap_threshold: float
    max_gap: float

    def to_json(self) -> dict[str, Any]:
        return dict(self.__dict__)


def hair_statistics(geom: AttractorGeometry) -> tuple[float, float, float]:
    """(hair fraction, touch fraction, max height gap) over angles with a finite inner radius.

    A hair is an angle where the height gap between ceiling and floor exceeds the
    geometry's gap threshold.
    """
    ok = np.isfinite(geom.r_inner) & (geom.r_inner > 0)
    if not np.any(ok):
        return 1.0, 0.0, math.inf
    gap = (np.log(geom.r_outer[ok]) - np.log(geom.r_inner[ok])) / TWO_PI
    hair = float(np.mean(gap > geom.gap_threshold))
    return hair, 1.0 - hair, float(np.max(gap))


def classify_topology(geom: AttractorGeometry, verdict: ArithmeticVerdict | str) -> TopologyReport:
    klass = verdict if isinstance(verdict, str) else verdict.klass
    hair, touch, max_gap = hair_statistics(geom)
    return TopologyReport(TOPOLOGY.get(klass, "unlabeled"), klass, hair, touch, geom.gap_threshold, max_gap)


# ---------------------------------------------------------------------------
# distances and symmetry
# ---------------------------------------------------------------------------


def point_cloud(geom: AttractorGeometry) -> np.ndarray:
    """Cartesian samples of every radial segment, spaced like the angular grid."""
    step = TWO_PI * float(np.nanmax(geom.r_outer)) / geom.K
    pts = []
    for th, ri, ro in zip(geom.theta, geom.r_inner, geom.r_outer):
        if not (np.isfinite(ri) and np.isfinite(ro)):
            continue
        n = max(1, int(math.ceil((ro - ri) / step)) + 1)
        r = np.linspace(ri, ro, n)
        pts.append(np.column_stack([r * math.cos(th), r * math.sin(th)]))
    return np.vstack(pts)


def hausdorff_distance(a: AttractorGeometry, b: AttractorGeometry) -> float:
    if a.K != b.K:
        raise ResolutionMismatch(f"K = {a.K} versus K = {b.K}")
    pa, pb = point_cloud(a), point_cloud(b)
    return max(directed_hausdorff(pa, pb, seed=0)[0], directed_hausdorff(pb, pa, seed=0)[0])


def mirror_mismatch(a: AttractorGeometry, b: AttractorGeometry, cells: int = 2) -> float:
    """Largest radius mismatch between b and the mirror image of a, allowing a shift of ``cells``."""
    if a.K != b.K:
        raise ResolutionMismatch(f"K = {a.K} versus K = {b.K}")
    mirrored = np.roll(a.r_outer[::-1], 1)
    best = np.full(a.K, np.inf)
    for s in range(-cells, cells + 1):
        best = np.minimum(best, np.abs(np.roll(mirrored, s) - b.r_outer))
    return float(np.max(best))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _lookup(geom: AttractorGeometry, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest angular sample for each polar angle."""
    k = np.rint(np.mod(-theta / TWO_PI, 1.0) * geom.K).astype(np.int64) % geom.K
    return geom.r_inner[k], geom.r_outer[k]


def raster(geom: AttractorGeometry, width: int = 1024, height: int = 1024, filled: bool = True, supersample: int = 2) -> np.ndarray:
    """Boolean image (True = set) by midpoint sampling with ``supersample``^2 points per pixel.

    ``filled`` paints the whole maximal invariant set r <= r_outer; otherwise only the
    attractor segments.  A pixel is set when at least half of its samples are.
    """
    extent = 1.05 * float(np.nanmax(geom.r_outer))
    s = supersample
    W, H = width * s, height * s

    def rows(lo: int, hi: int) -> np.ndarray:
        ys = extent - (np.arange(lo, hi) + 0.5) * (2.0 * extent / H)
        xs = -extent + (np.arange(W) + 0.5) * (2.0 * extent / W)
        X, Y = np.meshgrid(xs, ys)
        r = np.hypot(X, Y)
        ri, ro = _lookup(geom, np.arctan2(Y, X))
        inside = r <= ro
        if not filled:
            inside &= np.nan_to_num(ri, nan=np.inf) <= r
        return inside

    threads = worker_count()
    bounds = np.linspace(0, height, threads + 1).astype(int) * s
    parts = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        fine = np.vstack(list(pool.map(lambda ab: rows(*ab), parts)))
    counts = fine.reshape(height, s, width, s).sum(axis=(1, 3))
    return counts * 2 >= s * s


def pixel_of(geom: AttractorGeometry, point: complex, width: int = 1024, height: int = 1024) -> tuple[int, int]:
    extent = 1.05 * float(np.nanmax(geom.r_outer))
    col = int((point.real + extent) / (2.0 * extent) * width)
    row = int((extent - point.imag) / (2.0 * extent) * height)
    return row, col


def to_ppm(image: np.ndarray) -> bytes:
    h, w = image.shape
    pix = np.where(image, 0, 255).astype(np.uint8)
    return f"P6\n{w} {h}\n255\n".encode() + np.repeat(pix[:, :, None], 3, axis=2).tobytes()


def to_svg(geom: AttractorGeometry, size: int = 1024) -> str:
    extent = 1.05 * float(np.nanmax(geom.r_outer))
    scale = size / (2.0 * extent)

    def xy(r: float, th: float) -> str:
        return f"{(r * math.cos(th) + extent) * scale:.3f},{(extent - r * math.sin(th)) * scale:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for th, ri, ro in zip(geom.theta.tolist(), geom.r_inner.tolist(), geom.r_outer.tolist()):
        inner = ro if not math.isfinite(ri) else ri
        out.append(f'<polyline class="segment" points="{xy(inner, th)} {xy(ro, th)}" stroke="black" fill="none" stroke-width="0.5"/>')
    order = np.argsort(geom.theta)
    ring = " ".join(xy(geom.r_outer[k], geom.theta[k]) for k in order)
    out.append(f'<polyline class="outer" points="{ring} {xy(geom.r_outer[order[0]], geom.theta[order[0]])}" stroke="black" fill="none" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export(geom: AttractorGeometry, fmt: str, path: str | Path, width: int = 1024, height: int = 1024, filled: bool = True) -> Path:
    """Write ``geom`` as csv, ppm or svg; returns the path written."""
    path = Path(path)
    if fmt == "csv":
        path.write_text(geom.to_csv())
    elif fmt == "ppm":
        path.write_bytes(to_ppm(raster(geom, width, height, filled)))
    elif fmt == "svg":
        path.write_text(to_svg(geom, width))
    elif fmt == "json":
        path.write_text(json.dumps(geom.metadata(), indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path
