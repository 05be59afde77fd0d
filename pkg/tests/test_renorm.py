import cmath
import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from attractor_lab.arithmetic import RotationNumber, expand_nearest_integer
from attractor_lab.dynamics import Lift, ModelPoint
from attractor_lab.errors import DomainError, NotInSector
from attractor_lab.renorm import (
    RenormContext,
    conjugate,
    deep_sample,
    deviation,
    domain_identity_gap,
    from_zeta_lift,
    gauss_shift_holds,
    in_sector,
    phi,
    psi,
    renormalize,
    return_time,
    verify_renormalization,
    zeta_lift,
)

points = st.builds(ModelPoint, st.floats(0.0, 6.283), st.floats(0.05, 20.0))
surds = st.tuples(st.integers(-20, 20), st.integers(1, 5), st.integers(2, 40), st.integers(1, 12)).filter(
    lambda t: math.isqrt(t[2]) ** 2 != t[2]
)


@pytest.fixture(scope="module")
def golden_ctx():
    return RenormContext.build(RotationNumber.from_generator("golden"), 20)


@pytest.fixture(scope="module")
def sqrt2_ctx():
    return RenormContext.build(RotationNumber.from_generator("sqrt2"), 20)


@given(points)
def test_zeta_lift_exponentiates_to_z(z):
    w = zeta_lift(z)
    assert 0 <= w.x < 1
    assert abs(cmath.exp(2j * math.pi * w.complex) - z.z) < 1e-12 * max(1, z.rho)
    assert abs(from_zeta_lift(w).z - z.z) < 1e-12 * max(1, z.rho)


@given(points)
def test_conjugate_is_an_involution(z):
    c = conjugate(z)
    assert abs(c.z - z.z.conjugate()) < 1e-12 * max(1, z.rho)
    assert abs(conjugate(c).z - z.z) < 1e-12 * max(1, z.rho)


@given(surds)
def test_gauss_shift(t):
    ctx = RenormContext.build(RotationNumber.from_surd(*t), 10)
    assert gauss_shift_holds(ctx)
    with mpmath.workprec(256):
        assert abs(ctx.target.alpha(0) - ctx.positive.alpha(1)) < mpf(2) ** -120


def test_context_signs(golden_ctx, sqrt2_ctx):
    assert golden_ctx.sign == -1 and sqrt2_ctx.sign == 1
    assert golden_ctx.positive.eps0 == 1 and golden_ctx.positive.a_minus1 == 0
    assert float(golden_ctx.r) == pytest.approx((3 - math.sqrt(5)) / 2)


@given(st.floats(0.0, 0.999), st.floats(0.0, 5.0))
def test_phi_inverts_psi(x, y):
    nie = expand_nearest_integer(RotationNumber.from_generator("sqrt2"), 10)
    z = psi(nie, Lift(mpf(x), y))
    assert in_sector(z, nie)
    back = phi(nie, z)
    assert float(back.x) == pytest.approx(x, abs=1e-12)
    assert back.y == pytest.approx(y, abs=1e-8 * (1 + y))


def test_sector_membership(sqrt2_ctx):
    nie = sqrt2_ctx.positive
    a = float(nie.alpha(0))
    inside = ModelPoint(2 * math.pi * a * 0.5, 1.0)
    outside = ModelPoint(2 * math.pi * a * 1.5, 1.0)
    assert in_sector(inside, nie) and not in_sector(outside, nie)
    assert not in_sector(ModelPoint.origin(), nie)
    with pytest.raises(NotInSector):
        phi(nie, outside)


def test_psi_needs_positive_alpha(golden_nie):
    with pytest.raises(DomainError):
        psi(golden_nie, Lift(mpf(0.2), 1.0))


@pytest.mark.parametrize("ctx_name", ["golden_ctx", "sqrt2_ctx"])
def test_return_times_are_two_or_three(request, ctx_name):
    ctx = request.getfixturevalue(ctx_name)
    nie = ctx.positive
    for x in (0.0, 0.3, 0.7):
        k, back = return_time(nie, psi(nie, Lift(mpf(x), 0.5)), 18)
        assert k in (2, 3) and in_sector(back, nie)


def test_origin_is_fixed(golden_ctx):
    assert renormalize(golden_ctx, ModelPoint.origin()) == (ModelPoint.origin(), 0)


@pytest.mark.parametrize("ctx_name", ["golden_ctx", "sqrt2_ctx"])
def test_renormalised_map_is_the_inverse_rotation_map(request, ctx_name):
    ctx = request.getfixturevalue(ctx_name)
    rep = verify_renormalization(ctx, sample_count=6, depth=18, M=1024)
    assert rep.max_dev < 1e-9 and not rep.failures
    assert set(rep.return_times) <= {2, 3}


def test_deep_sample_goes_deep(sqrt2_ctx):
    from attractor_lab.dynamics import trajectory

    z = deep_sample(sqrt2_ctx.target, 8)
    traj = trajectory(z.to_lift(), sqrt2_ctx.target, 18)
    assert traj.level >= 8
    d, _ = deviation(sqrt2_ctx, z, 18)
    assert d < 1e-6


def test_domains_coincide(golden_ctx, sqrt2_ctx):
    assert domain_identity_gap(golden_ctx, M=1024, depth=18) < 1e-6
    assert domain_identity_gap(sqrt2_ctx, M=1024, depth=18) < 1e-6


@given(st.floats(0.0, 0.999), st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_psi_argument_ignores_height(x, y1, y2):
    nie = expand_nearest_integer(RotationNumber.from_generator("sqrt2"), 10)
    a = float(nie.alpha(0))
    for y in (y1, y2):
        theta = psi(nie, Lift(mpf(x), y)).theta
        d = (theta - 2 * math.pi * a * x) % (2 * math.pi)
        assert min(d, 2 * math.pi - d) < 1e-12


def test_psi_is_periodic(sqrt2_ctx):
    nie = sqrt2_ctx.positive
    with mpmath.workprec(nie.bits):
        w = Lift(mpf("0.3"), 0.8)
        shifted = Lift(w.x + 1 / nie.alpha(0), 0.8)
    assert abs(psi(nie, w).z - psi(nie, shifted).z) < 1e-12


def test_phi_is_affine_in_the_argument(sqrt2_ctx):
    nie = sqrt2_ctx.positive
    a = float(nie.alpha(0))
    thetas = [2 * math.pi * a * f for f in (0.1, 0.4, 0.7)]
    xs = [float(phi(nie, ModelPoint(t, 0.5)).x) for t in thetas]
    slope = (xs[2] - xs[0]) / (thetas[2] - thetas[0])
    assert slope == pytest.approx(1 / (2 * math.pi * a), rel=1e-9)
    assert xs[1] == pytest.approx(xs[0] + slope * (thetas[1] - thetas[0]), abs=1e-9)


def test_integer_shift_gives_the_same_report():
    g = RotationNumber.from_generator("golden")
    a = verify_renormalization(g, sample_count=4, depth=15, M=512)
    b = verify_renormalization(g.plus(1), sample_count=4, depth=15, M=512)
    assert a.deviations == b.deviations and a.return_times == b.return_times


def test_negation_mirrors_the_report():
    s = RotationNumber.from_generator("sqrt2")
    a = verify_renormalization(s, sample_count=8, depth=15, M=512)
    b = verify_renormalization(s.negated(), sample_count=8, depth=15, M=512)
    assert sorted(a.return_times) == sorted(b.return_times)
    assert max(a.deviations) < 1e-9 and max(b.deviations) < 1e-9
