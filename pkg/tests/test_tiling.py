import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from attractor_lab.coords import Y_mp
from attractor_lab.errors import BudgetExceeded, DomainError
from attractor_lab.tiling import (
    CEILING,
    FLOOR,
    HeightProfile,
    interp_periodic,
    limit_profile,
    liminf_violations,
    max_adjacent_jump,
    shifted_floor_limit,
    shifted_seed,
    worker_count,
)

M = 1024


@pytest.fixture(scope="module")
def golden_floor(golden_nie):
    return limit_profile(FLOOR, -1, golden_nie, max_depth=20, M=M)


@pytest.fixture(scope="module")
def golden_ceiling(golden_nie):
    return limit_profile(CEILING, -1, golden_nie, max_depth=20, M=M)


def _oracle_floor(nie, x, depth):
    """b_{-1}^depth at x by direct recursion with exact fractional parts (no grid)."""
    with mpmath.workprec(200):
        def height(level, u, left):
            # height of the level-`level` set above Re = u in [0, 1)
            if left == 0:
                return mpmath.mpf(-1)
            a = nie.alpha(level + 1)
            X = u if nie.epsilon(level + 1) < 0 else (-u) % 1
            child = (X / a) % 1
            y = height(level + 1, child, left - 1)
            return Y_mp(a, mpmath.mpc(X / a, y), bits=200).imag

        return float(height(-1, mpmath.mpf(x), depth))


@pytest.mark.parametrize("depth", [1, 2, 3])
@pytest.mark.parametrize("which", ["golden", "sqrt2"])
def test_floor_matches_direct_recursion(which, depth, golden_nie, sqrt2_nie):
    nie = golden_nie if which == "golden" else sqrt2_nie
    prof = limit_profile(FLOOR, -1, nie, max_depth=depth, M=4096)
    for k in (0, 137, 1000, 2048, 3333):
        x = k / 4096
        assert prof.samples[k] == pytest.approx(_oracle_floor(nie, x, depth), abs=2e-5)


def test_depth_zero_is_the_half_plane(golden_floor):
    assert np.all(golden_floor.at_depth(0) == -1.0)


def test_floor_rows_increase_with_depth(golden_floor):
    rows = golden_floor.by_depth
    assert np.all(np.diff(rows, axis=0) >= -1e-12)


def test_floor_converges_geometrically(golden_floor):
    h = golden_floor.sup_diff_history
    assert golden_floor.converged
    assert h[-1] < 1e-6
    assert all(b <= a * 1.0001 for a, b in zip(h[3:], h[4:]))


def test_ceiling_above_floor(golden_floor, golden_ceiling):
    assert np.all(golden_ceiling.samples >= golden_floor.samples - 1e-9)


def test_ceiling_start_value(golden_nie):
    from attractor_lab.brjuno_herman import brjuno_at_level

    prof = limit_profile(CEILING, -1, golden_nie, max_depth=0, M=64)
    b, _ = brjuno_at_level(golden_nie, 0, 30)
    assert prof.samples[0] == pytest.approx((float(b) + 5 * math.pi) / (2 * math.pi))


def test_floor_has_no_spikes(golden_floor):
    assert liminf_violations(golden_floor) == 0
    assert max_adjacent_jump(golden_floor) < 0.05


def test_threads_do_not_change_results(golden_nie, monkeypatch):
    monkeypatch.setenv("ATTRACTOR_LAB_THREADS", "1")
    one = limit_profile(FLOOR, -1, golden_nie, max_depth=8, M=4096, keep_rows=False)
    monkeypatch.setenv("ATTRACTOR_LAB_THREADS", "3")
    assert worker_count() == 3
    three = limit_profile(FLOOR, -1, golden_nie, max_depth=8, M=4096, keep_rows=False)
    assert np.array_equal(one.samples, three.samples)


@pytest.mark.parametrize("value, expected", [("4", 4), ("junk", 1), ("0", 1)])
def test_worker_count_parsing(monkeypatch, value, expected):
    monkeypatch.setenv("ATTRACTOR_LAB_THREADS", value)
    assert worker_count() == expected


def test_clamp_off_raises(golden_nie):
    with pytest.raises(BudgetExceeded):
        limit_profile(FLOOR, -1, golden_nie, max_depth=golden_nie.certified_depth + 5, M=64, clamp=False)
    prof = limit_profile(FLOOR, -1, golden_nie, max_depth=golden_nie.certified_depth + 5, M=64)
    assert prof.depth == golden_nie.certified_depth + 1


def test_bad_level(golden_nie):
    with pytest.raises(DomainError):
        limit_profile(FLOOR, -2, golden_nie)


def test_shifted_seeds(golden_nie):
    assert shifted_seed(0.0, golden_nie, 5) == [0.0] * 6
    lo = shifted_seed(0.01, golden_nie, 4)
    hi = shifted_seed(0.02, golden_nie, 4)
    assert all(b > a for a, b in zip(lo[1:], hi[1:]))
    with pytest.raises(DomainError):
        shifted_seed(-0.1, golden_nie, 3)


def test_shifted_floor_lies_above_floor(golden_nie, golden_floor):
    shifted = shifted_floor_limit(0.01, golden_nie, max_depth=20, M=M)
    assert np.all(shifted.samples >= golden_floor.samples - 1e-9)
    assert shifted.samples[0] == pytest.approx(0.01, abs=1e-6)


def test_csv_round_trip(golden_floor):
    back = HeightProfile.from_csv(golden_floor.to_csv())
    assert np.array_equal(back.samples, golden_floor.samples)
    assert (back.level, back.depth, back.M, back.kind) == (-1, golden_floor.depth, M, FLOOR)


@given(st.lists(st.floats(-1, 5), min_size=4, max_size=32), st.integers(0, 31))
def test_interp_hits_grid_points(values, k):
    rows = np.array([values])
    k %= len(values)
    assert interp_periodic(rows, np.array([k / len(values)]))[0, 0] == values[k]


@given(st.floats(0, 0.999), st.integers(-3, 3))
def test_profile_is_periodic(golden_floor, x, shift):
    assert golden_floor(x + shift) == pytest.approx(float(golden_floor(x)), abs=1e-12)


def test_shape_check():
    with pytest.raises(DomainError):
        HeightProfile(-1, FLOOR, 0, 8, np.zeros(7))


def test_one_step_from_the_half_plane(golden_nie, sqrt2_nie):
    from attractor_lab.tiling import initial_floor, refine_step

    for nie in (golden_nie, sqrt2_nie):
        parent = refine_step(initial_floor(3, 512), nie)
        assert parent.level == 2
        assert np.all((parent.samples >= -0.9) & (parent.samples <= 0.9))
        at0 = float(Y_mp(nie.alpha(3), mpmath.mpc(0, -1)).imag)
        assert -0.9 <= at0 < 0
        assert parent.samples[0] == pytest.approx(at0, abs=1e-12)


def test_ceiling_rows_decrease_with_depth(golden_ceiling, golden_floor):
    rows = golden_ceiling.by_depth
    assert np.all(np.diff(rows, axis=0) <= 1e-12)
    assert np.all(rows >= golden_floor.by_depth - 1e-9)


def test_golden_gap_closes(golden_ceiling, golden_floor):
    gaps = [float(np.max(golden_ceiling.at_depth(j) - golden_floor.at_depth(j))) for j in (0, 5, 10, 15, 20)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_seeds_increase_along_the_ladder(golden_nie):
    ys = shifted_seed(0.05, golden_nie, 6)
    assert all(b >= a for a, b in zip(ys, ys[1:]))


def test_shifted_floors_are_nested(golden_nie):
    lo = shifted_floor_limit(0.01, golden_nie, max_depth=15, M=M)
    hi = shifted_floor_limit(0.03, golden_nie, max_depth=15, M=M)
    d = min(lo.depth, hi.depth)
    assert np.all(hi.at_depth(d) >= lo.at_depth(d) - 1e-12)
    assert hi.samples[0] == pytest.approx(0.03, abs=1e-6)


def test_sup_tracks_the_brjuno_sum(golden_nie, golden_floor):
    from attractor_lab.tiling import sup_bound_residuals

    assert max(sup_bound_residuals(golden_floor, golden_nie)) <= 8 + 2 * math.pi
