"""The fourteen acceptance checks, shared by ``selftest`` and the test suite.

Each check returns a CriterionResult; ``passed`` includes the runtime budget.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import mpmath
import numpy as np
from mpmath import mpf

from .arithmetic import RotationNumber, expand_nearest_integer, expand_standard, index_map_c
from .brjuno_herman import (
    BRJUNO_NOT_HERMAN,
    HERMAN,
    NON_BRJUNO,
    brjuno_partial,
    brjuno_standard_partial,
    h_inv,
)
from .coords import Y_mp, im_core
from .dynamics import T, orbit_size_check, plus_one, recurrence_profile
from .geometry import (
    TOPOLOGY,
    attractor_geometry,
    classify_topology,
    hausdorff_distance,
    invariant_family,
    mirror_mismatch,
    pixel_of,
    prepare,
    raster,
)
from .renorm import RenormContext, deep_sample, deviation, gauss_shift_holds, verify_renormalization
from .tiling import FLOOR, limit_profile, sup_bound_residuals

SEED = 20240611
ROUNDING_FLOOR = 1e-13


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    detail: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extras = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{tag}] {self.number:2d} {self.title} ({self.seconds:.2f}s / {self.budget:g}s) {extras}"


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _timed(number: int, title: str, budget: float, body: Callable[[], tuple[bool, dict[str, Any]]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = body()
    dt = time.perf_counter() - t0
    return CriterionResult(number, title, bool(ok) and dt <= budget, dt, budget, detail)


def random_surds(count: int, seed: int = SEED) -> list[RotationNumber]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        d = rng.randint(2, 60)
        if math.isqrt(d) ** 2 == d:
            continue
        out.append(RotationNumber.from_surd(rng.randint(-20, 20), rng.randint(1, 5), d, rng.randint(1, 20)))
    return out


def golden() -> RotationNumber:
    return RotationNumber.from_generator("golden")


def sqrt2() -> RotationNumber:
    return RotationNumber.from_generator("sqrt2")


# ---------------------------------------------------------------------------
# 1-5: the change of coordinates
# ---------------------------------------------------------------------------


def criterion_1(n: int = 10_000) -> CriterionResult:
    def body():
        rng = np.random.default_rng(SEED)
        r = 0.5 * (1.0 - rng.random(n))
        x1 = rng.uniform(-1e6, 1e6, n)
        y1 = rng.uniform(-1.0, 1e6, n)
        # half the partners are nearby at log-uniform distances, half anywhere in the box
        near = rng.random(n) < 0.5
        scale = 10.0 ** rng.uniform(-6, 6, n)
        ang = rng.uniform(0, 2 * np.pi, n)
        x2 = np.where(near, x1 + scale * np.cos(ang), rng.uniform(-1e6, 1e6, n))
        y2 = np.where(near, np.maximum(-1.0, y1 + scale * np.sin(ang)), rng.uniform(-1.0, 1e6, n))
        logr = np.log(r)
        X1, X2 = r * x1, r * x2
        lhs = np.hypot(X1 - X2, im_core(logr, X1, y1) - im_core(logr, X2, y2))
        rhs = 0.9 * np.hypot(x1 - x2, y1 - y2) + 1e-12
        worst = float(np.max(lhs / np.hypot(x1 - x2, y1 - y2)))
        return bool(np.all(lhs <= rhs)), {"violations": int(np.sum(lhs > rhs)), "max_ratio": worst}

    return _timed(1, "contraction of Y_r", 1.0, body)


def criterion_2(points: int = 1000, bits: int = 256) -> CriterionResult:
    def body():
        rng = random.Random(SEED)
        worst = mpf(0)
        with mpmath.workprec(bits):
            for i in range(points):
                r = mpf(rng.uniform(1e-6, 0.5))
                if i % 2 == 0:
                    w = mpmath.mpc(rng.uniform(-50, 50), rng.uniform(-1, 50))
                    lhs = Y_mp(r, w + 1 / r, bits)
                    rhs = Y_mp(r, w, bits) + 1
                else:
                    t = mpf(rng.uniform(-1, 50))
                    lhs = Y_mp(r, mpmath.mpc(1 / r - 1, t), bits)
                    rhs = Y_mp(r, mpmath.mpc(0, t), bits) + 1 - r
                res = abs(lhs - rhs) / max(abs(rhs), mpf(1))
                worst = max(worst, res)
        return worst <= mpf("1e-25"), {"max_rel_residual": float(worst)}

    return _timed(2, "functional relations", 1.0, body)


def criterion_3() -> CriterionResult:
    def body():
        worst = 0.0
        for k in range(1, 21):
            r = 2.0**-k
            ys = np.logspace(0, 6, 20)
            lhs = 2 * np.pi * im_core(math.log(r), 0.0, ys / (2 * np.pi))
            rhs = np.array([h_inv(r, float(y)) for y in ys])
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst <= math.pi, {"max_gap": worst, "bound": math.pi}

    return _timed(3, "h-comparison", 1.0, body)


def criterion_4() -> CriterionResult:
    def body():
        rs = np.logspace(-30, math.log10(0.5), 100, base=10)
        ys = np.concatenate([[0.0], np.logspace(-4, 6, 99)])
        lo_gap, hi_gap = math.inf, math.inf
        for r in rs:
            logr = math.log(r)
            X = 0.5 - 0.5 * r  # r * (1/(2r) - 1/2)
            v = 2 * np.pi * im_core(logr, X, ys)
            base = 2 * np.pi * r * ys - logr
            lo_gap = min(lo_gap, float(np.min(v - (base - 4))))
            hi_gap = min(hi_gap, float(np.min(base + 2 - v)))
        return lo_gap >= 0 and hi_gap >= 0, {"lower_margin": lo_gap, "upper_margin": hi_gap}

    return _timed(4, "horizontal bounds", 1.0, body)


def criterion_5(n: int = 1000) -> CriterionResult:
    def body():
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for _ in range(n):
            r1 = 0.5 + 0.5 * rng.random()
            r1 = min(max(r1, 0.5 + 1e-12), 1 - 1e-12)
            r2 = 1 / r1 - 1
            y = math.e**2 * 10 ** rng.uniform(0, 8)
            worst = max(worst, abs(h_inv(r1 * r2, y) - h_inv(r1, h_inv(r2, y))))
        return worst <= 1 + math.exp(-1), {"max_gap": worst, "bound": 1 + math.exp(-1)}

    return _timed(5, "block comparison", 1.0, body)


# ---------------------------------------------------------------------------
# 6-7: Brjuno sums
# ---------------------------------------------------------------------------


def criterion_6(N: int = 40) -> CriterionResult:
    def body():
        worst, rows = 0.0, {}
        for alpha in [golden(), sqrt2()] + random_surds(10):
            nie = expand_nearest_integer(alpha, N + 1)
            cN = index_map_c(nie, N - 1)
            se = expand_standard(alpha, cN + 2)
            diff = abs(float(brjuno_partial(nie, N).value - brjuno_standard_partial(se, cN + 1).value))
            rows[alpha.desc] = diff
            worst = max(worst, diff)
        return worst <= 30.0, {"max_diff": worst, "alphas": len(rows)}

    return _timed(6, "Brjuno cross-bound", 5.0, body)


def criterion_7(depth: int = 25, M: int = 4096) -> CriterionResult:
    depths = (5, 10, 15, 20, 25)
    bound = 8 + 2 * math.pi + 0.5

    def body():
        worst, per = 0.0, {}
        alphas = [golden(), sqrt2(), random_surds(1)[0]]
        for alpha in alphas:
            nie = expand_nearest_integer(alpha, depth + 2)
            prof = limit_profile(FLOOR, -1, nie, max_depth=depth, M=M)
            res = sup_bound_residuals(prof, nie)
            vals = [res[j - 1] for j in depths if j <= prof.depth]
            per[alpha.desc] = max(vals)
            worst = max(worst, max(vals))
        return worst <= bound, {"max_residual": worst, "bound": bound}

    return _timed(7, "sup versus Brjuno", 60.0 * 3, body)


# ---------------------------------------------------------------------------
# 8-9: dynamics and renormalisation
# ---------------------------------------------------------------------------


def alpha_near_inverse(N: int) -> RotationNumber:
    """1/(N + g) with g = (sqrt5 - 1)/2."""
    return RotationNumber.from_surd(2 * N - 1, 1, 5, 2).neg_reciprocal().negated()


def criterion_8() -> CriterionResult:
    def body():
        bad, total, cross = 0, 0, 0.0
        for N in (10, 100, 1000):
            rn = alpha_near_inverse(N)
            a = rn.value(128)
            kmax = int(mpmath.floor(1 / a))
            for k in range(kmax + 1):
                if k >= 1 / a:
                    continue
                v, lo, hi = orbit_size_check(a, k)
                total += 1
                bad += not (lo <= v <= hi)
            if N == 10:
                nie = expand_nearest_integer(rn, 27)
                z = plus_one()
                for k in range(1, kmax + 1):
                    z = T(z, nie, 25)
                    cross = max(cross, abs(z.rho - orbit_size_check(a, k)[0]))
        return bad == 0 and cross < 1e-9, {"checked": total, "violations": bad, "orbit_vs_closed_form": cross}

    return _timed(8, "orbit-size bounds", 5.0, body)


def criterion_9(samples: int = 64, depth: int = 25) -> CriterionResult:
    tol = 10 * 0.9**depth

    def body():
        detail: dict[str, Any] = {"tol": tol}
        ok = True
        witnesses = 0
        for name, alpha in (("golden", golden()), ("sqrt2", sqrt2())):
            ctx = RenormContext.build(alpha, 45)
            deep = deep_sample(ctx.target, 40)
            rep = verify_renormalization(ctx, samples, depth, tol, extra=[deep])
            k_ok = all(k in (2, 3) for k in rep.return_times)
            d20, _ = deviation(ctx, deep, 20)
            d30, _ = deviation(ctx, deep, 30)
            shrink = d30 < d20
            witnesses += shrink and d20 > ROUNDING_FLOOR
            # at the rounding floor there is no truncation error left to shrink
            shrink_ok = shrink or d20 <= ROUNDING_FLOOR
            ok &= rep.max_dev <= tol and not rep.failures and k_ok and gauss_shift_holds(ctx) and shrink_ok
            detail[f"{name}_max_dev"] = rep.max_dev
            detail[f"{name}_dev20"] = d20
            detail[f"{name}_dev30"] = d30
        detail["shrink_witnesses"] = witnesses
        return ok and witnesses >= 1, detail

    return _timed(9, "renormalisation commutation", 120.0, body)


# ---------------------------------------------------------------------------
# 10-14: geometry
# ---------------------------------------------------------------------------


def criterion_10(depth: int = 25, K: int = 4096, M: int = 4096) -> CriterionResult:
    def body():
        g = attractor_geometry(golden(), depth, K, M)
        g1 = attractor_geometry(golden().plus(1), depth, K, M)
        gm = attractor_geometry(golden().negated(), depth, K, M)
        same = g.to_csv().encode() == g1.to_csv().encode()
        mism = mirror_mismatch(g, gm, cells=2)
        return same and mism <= 1e-12, {"period_identical": same, "mirror_mismatch": mism}

    return _timed(10, "symmetries", 30.0, body)


def criterion_11(depth: int = 25, K: int = 4096, M: int = 4096) -> CriterionResult:
    def body():
        detail: dict[str, Any] = {}
        expected = {"golden": HERMAN, "std-tower-BnotH": BRJUNO_NOT_HERMAN, "tower-nonbrjuno": NON_BRJUNO}
        reports = {}
        for name, klass in expected.items():
            gi = prepare(RotationNumber.from_generator(name), depth, M)
            geom = attractor_geometry(gi, depth, K, M)
            rep = classify_topology(geom, gi.verdict)
            reports[name] = (gi, rep)
            detail[f"{name}_class"] = gi.verdict.klass
        g_rep = reports["golden"][1]
        s_rep = reports["std-tower-BnotH"][1]
        t_gi, t_rep = reports["tower-nonbrjuno"]
        partial = float(t_gi.verdict.brjuno.value)
        labels = all(
            reports[n][1].label == TOPOLOGY[k] and reports[n][0].verdict.klass == k for n, k in expected.items()
        )
        detail.update(
            golden_hair=g_rep.hair_fraction,
            std_hair=s_rep.hair_fraction,
            std_touch=s_rep.touch_fraction,
            std_gap_threshold=s_rep.gap_threshold,
            std_max_gap=s_rep.max_gap,
            tower_partial=partial,
        )
        ok = (
            labels
            and g_rep.hair_fraction < 0.01
            and 0.05 < s_rep.hair_fraction < 0.95
            and 0.05 < s_rep.touch_fraction < 0.95
            and partial > 50
        )
        return ok, detail

    return _timed(11, "trichotomy rendering", 180.0, body)


def criterion_12(depth: int = 25, K: int = 1024, M: int = 4096) -> CriterionResult:
    def body():
        gi = prepare(RotationNumber.from_generator("std-tower-BnotH"), depth, M)
        base = attractor_geometry(gi, depth, K, M)
        ts = np.linspace(base.r_alpha, 1.0, 8)
        fam = invariant_family(gi, ts, K)
        nest = max(float(np.max(fam[i].r_outer - fam[i + 1].r_outer)) for i in range(7))
        # the seed point t sits on the boundary of its own member, outside smaller ones
        excl = min(float(ts[j] - fam[i].r_outer[0]) for i in range(8) for j in range(i + 1, 8))
        D = np.array([[hausdorff_distance(a, b) for b in fam] for a in fam])
        mono = True
        for i in range(8):
            right = [D[i, j] for j in range(7, i, -1)]
            left = [D[i, j] for j in range(0, i)]
            mono &= all(a >= b for a, b in zip(right, right[1:])) and all(a >= b for a, b in zip(left, left[1:]))
        ok = nest <= 1e-9 and excl > 0 and mono
        return ok, {"nesting_excess": nest, "exclusion_margin": excl, "hausdorff_monotone": mono, "r_alpha": base.r_alpha}

    return _timed(12, "invariant family", 60.0, body)


def criterion_13() -> CriterionResult:
    def body():
        nie = expand_nearest_integer(golden(), 30)
        gaps = recurrence_profile(plus_one(), [100, 1000, 10_000], nie)
        ok = gaps[2] < 0.05 and gaps[0] >= gaps[1] >= gaps[2]
        return ok, {"gap_1e2": gaps[0], "gap_1e3": gaps[1], "gap_1e4": gaps[2]}

    return _timed(13, "recurrence", 30.0, body)


def criterion_14(depth: int = 25, K: int = 4096, M: int = 4096, size: int = 1024) -> CriterionResult:
    def body():
        nie = expand_nearest_integer(golden(), depth + 2)
        B = float(brjuno_partial(nie, depth).value)
        rho = math.exp(-B - 5 * math.pi)
        geom = attractor_geometry(golden(), depth, K, M)
        img = raster(geom, size, size, filled=True)
        # every pixel meeting the disk: those around the pixel of each extreme point
        pix = {pixel_of(geom, complex(rho * math.cos(a), rho * math.sin(a)), size, size) for a in np.linspace(0, 2 * np.pi, 64)}
        pix.add(pixel_of(geom, 0j, size, size))
        covered = all(img[r, c] for r, c in pix)
        analytic = float(np.min(geom.r_outer)) >= rho
        return covered and analytic, {"radius": rho, "min_r_outer": float(np.min(geom.r_outer)), "pixels": len(pix)}

    return _timed(14, "ball corollary", 10.0, body)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
    13: criterion_13,
    14: criterion_14,
}


def run_all(selected: list[int] | None = None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in selected or sorted(CRITERIA):
        res = CRITERIA[k]()
        if echo:
            echo(res.line())
        out.append(res)
    return out
