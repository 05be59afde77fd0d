import math

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from mpmath import mpf

from attractor_lab.coords import Y_mp
from attractor_lab.dynamics import (
    DEPTH_CAPPED,
    ENTERED_K,
    Lift,
    ModelPoint,
    T,
    T_lift,
    backward,
    boundary_point,
    forward,
    orbit,
    orbit_size_check,
    plus_one,
    recurrence_profile,
    rung_residuals,
    trajectory,
    truncation_bound,
)
from attractor_lab.errors import DomainError, OutsideAttractor, OutsideDomain
from attractor_lab.tiling import FLOOR, limit_profile

xs = st.floats(0.0, 0.999)
# every level floor stays below -0.34, so these heights have a first preimage
ys = st.floats(-0.3, 6.0)
# sup of the golden floor b_{-1} is 0.007, so these heights lie in the set
set_ys = st.floats(0.01, 6.0)


@given(st.floats(0.0, 6.28), st.floats(1e-3, 50.0))
def test_lift_round_trip(theta, rho):
    z = ModelPoint(theta, rho)
    back = ModelPoint.from_lift(z.to_lift())
    assert abs(back.z - z.z) < 1e-12 * max(1.0, rho)


def test_origin_has_no_lift_and_is_fixed(golden_nie):
    assert T(ModelPoint.origin(), golden_nie).is_origin
    with pytest.raises(DomainError):
        ModelPoint.origin().to_lift()


@given(st.floats(-0.999, 0.0), ys)
def test_backward_then_forward(X, y):
    from attractor_lab import RotationNumber, expand_nearest_integer

    nie = expand_nearest_integer(RotationNumber.from_generator("sqrt2"), 6)
    # eps_1 = +1, so -eps Re v in [0, 1) means Re v in (-1, 0]
    v = Lift(mpf(X), y)
    w = backward(nie, 1, v)
    again = forward(nie, 1, w)
    assert float(again.x) == pytest.approx(X, abs=1e-15)
    assert again.y == pytest.approx(y, abs=1e-9 * (1 + abs(y)))


@given(xs, set_ys)
def test_rungs_are_consistent(golden_nie, x, y):
    traj = trajectory(Lift(mpf(x), y), golden_nie, 20)
    assert traj.terminal in (ENTERED_K, DEPTH_CAPPED)
    assert max(rung_residuals(traj, golden_nie)) < 1e-9


def _level0_oracle(alpha0, x, y):
    """T(w) = Y(Y^{-1}(w) + 1) on level 0, with Y^{-1} solved by findroot."""
    with mpmath.workprec(120):
        x0 = mpf(x) / alpha0
        y0 = mpmath.findroot(lambda t: Y_mp(alpha0, mpmath.mpc(x0, t), 120).imag - y, mpf(y) / alpha0)
        return Y_mp(alpha0, mpmath.mpc(x0 + 1, y0), 120)


@given(st.floats(0.0, 0.6), st.floats(0.0, 4.0))
def test_level0_step_matches_direct_formula(golden_nie, x, y):
    traj = trajectory(Lift(mpf(x), y), golden_nie, 20)
    assume(traj.level == 0 and traj.terminal == ENTERED_K)
    got = T_lift(Lift(mpf(x), y), golden_nie, 20)
    ref = _level0_oracle(golden_nie.alpha(0), x, y)
    assert float(got.x) == pytest.approx(float(ref.real) % 1, abs=1e-12)
    assert got.y == pytest.approx(float(ref.imag), abs=1e-8)


def test_plus_one_moves_by_the_rotation_angle(golden_nie):
    # +1 sits at the top of the level-0 ladder, so the step is a rotation by -2 pi alpha_0
    z = T(plus_one(), golden_nie)
    assert z.theta == pytest.approx((-2 * math.pi * float(golden_nie.alpha(0))) % (2 * math.pi), abs=1e-12)


@given(st.floats(1e-4, 0.4999), st.data())
def test_orbit_size_bounds(alpha, data):
    k = data.draw(st.integers(0, int(math.floor(1 / alpha - 1e-9))))
    assume(k < 1 / alpha)
    value, lo, hi = orbit_size_check(alpha, k)
    assert lo <= value <= hi


def test_orbit_size_check_domain():
    with pytest.raises(DomainError):
        orbit_size_check(0.6, 1)
    with pytest.raises(DomainError):
        orbit_size_check(0.1, 10)


def test_recurrence_gaps_shrink(golden_nie):
    gaps = recurrence_profile(plus_one(), [5, 50, 500], golden_nie)
    assert gaps[0] >= gaps[1] >= gaps[2] > 0
    assert recurrence_profile(ModelPoint.origin(), [3], golden_nie) == [0.0]


def test_orbit_length(golden_nie):
    pts = orbit(plus_one(), 7, golden_nie)
    assert len(pts) == 8 and pts[0] == plus_one()


def test_guards(golden_nie):
    with pytest.raises(DomainError):
        trajectory(Lift(mpf(0.3), 1.0), golden_nie, golden_nie.certified_depth + 1)
    with pytest.raises(OutsideDomain):
        trajectory(Lift(mpf(0.3), -1.5), golden_nie, 5)


def test_points_below_the_floor_are_rejected(golden_nie):
    floor = limit_profile(FLOOR, -1, golden_nie, max_depth=15, M=1024)
    on = boundary_point(floor, 0.3)
    T(on, golden_nie, floor=floor)
    below = ModelPoint.from_lift(Lift(mpf(0.3), float(floor(0.3)) - 0.01))
    with pytest.raises(OutsideAttractor):
        T(below, golden_nie, floor=floor)


@pytest.mark.parametrize("cap, bound", [(0, 30.0), (10, 30 * 0.9**10), (25, 30 * 0.9**25)])
def test_truncation_bound(cap, bound):
    assert truncation_bound(cap) == pytest.approx(bound)


def test_plus_one_ladder(sqrt2_nie):
    traj = trajectory(Lift(mpf(1), 0.0), sqrt2_nie, 10)
    assert traj.ls[0] == 1
    assert traj.points[1].x == 0 and traj.points[1].y == pytest.approx(0.0, abs=1e-12)
    assert (traj.terminal, traj.level) == (ENTERED_K, 0)


def test_orbit_of_plus_one_in_closed_form(sqrt2_nie):
    from attractor_lab.coords import Y_signed

    # T^k(+1) = Y_0(k) + (1 + eps_0)/2 for 0 <= k < 1/alpha
    w = Lift(mpf(1), 0.0)
    for k in range(1, int(1 / sqrt2_nie.alpha(0)) + 1):
        w = T_lift(w, sqrt2_nie, 15)
        ref = Y_signed(sqrt2_nie, 0, complex(k, 0.0))
        assert float(w.x) == pytest.approx((ref.x + 1) % 1, abs=1e-12)
        assert w.y == pytest.approx(ref.y, abs=1e-10)


@pytest.mark.parametrize("gen, negate", [("golden", False), ("sqrt2", False), ("sqrt2", True)])
@given(x=xs, y=set_ys)
def test_rotation_in_the_tangential_direction(gen, negate, x, y):
    from attractor_lab import RotationNumber, expand_nearest_integer

    alpha = RotationNumber.from_generator(gen)
    alpha = alpha.negated() if negate else alpha
    nie = expand_nearest_integer(alpha, 25)
    w = Lift(mpf(x), y)
    out = T_lift(w, nie, 20)
    with mpmath.workprec(256):
        shift = float((out.x - w.x + alpha.value()) % 1)
    assert min(shift, 1 - shift) < 1e-12


@given(st.floats(0.0, 6.28), st.floats(0.05, 0.95))
def test_conjugation_symmetry(theta, rho):
    from attractor_lab import RotationNumber, expand_nearest_integer
    from attractor_lab.renorm import conjugate

    alpha = RotationNumber.from_generator("sqrt2")
    pos = expand_nearest_integer(alpha, 25)
    neg = expand_nearest_integer(alpha.negated(), 25)
    z = ModelPoint(theta, rho)
    assert abs(conjugate(T(conjugate(z), pos, 20)).z - T(z, neg, 20).z) < 1e-9


def test_orbit_of_plus_one_stays_on_the_boundary(golden_nie):
    from attractor_lab.tiling import max_adjacent_jump

    floor = limit_profile(FLOOR, -1, golden_nie, max_depth=25, M=4096)
    # the floor is rough, so linear interpolation can miss by a sample-to-sample jump
    slack = max_adjacent_jump(floor)
    for z in orbit(plus_one(), 60, golden_nie, 25)[1:]:
        x = (-z.theta / (2 * math.pi)) % 1
        height = -math.log(z.rho) / (2 * math.pi)
        assert abs(height - float(floor(x))) <= slack


def test_orbit_size_at_k_50():
    from attractor_lab.acceptance import alpha_near_inverse

    value, lo, hi = orbit_size_check(alpha_near_inverse(100).value(), 50)
    assert lo == pytest.approx(1 / 408) and hi == pytest.approx(24 * math.pi / 51)
    assert lo <= value <= hi


def test_real_part_below_resolution_is_snapped(sqrt2_nie):
    # ceil of a subnormal is 1 and 1 - tiny rounds to 1 at working precision
    tiny = T_lift(Lift(mpf(2.2250738585072014e-308), 1.0), sqrt2_nie, 10)
    zero = T_lift(Lift(mpf(0), 1.0), sqrt2_nie, 10)
    assert tiny == zero
