import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from attractor_lab.coords import (
    HalfPlanePoint,
    Y,
    Y_array,
    Y_inverse_on_vertical,
    Y_mp,
    Y_signed,
    Y_signed_inverse_on_vertical,
    im_core,
)
from attractor_lab.errors import DomainError, NoPreimage

radii = st.floats(1e-8, 0.5)
phases = st.floats(0.0, 0.999999)
heights = st.floats(-1.0, 15.0)


@given(radii, phases, heights)
def test_Y_matches_the_defining_formula(r, X, y):
    w = complex(X / r, y)
    got = Y(r, w)
    ref = Y_mp(r, w, bits=200)
    assert got.x == pytest.approx(float(ref.real), rel=1e-14)
    assert got.y == pytest.approx(float(ref.imag), rel=1e-9, abs=1e-9)


@given(radii, phases, heights, st.floats(1e-3, 5.0))
def test_Y_is_increasing_along_verticals(r, X, y, dy):
    w = complex(X / r, y)
    assert Y(r, w + 1j * dy).y > Y(r, w).y


@given(radii, phases, heights)
def test_closed_inverse_round_trip(r, X, y):
    target = float(im_core(math.log(r), X, y))
    back = Y_inverse_on_vertical(r, X, target)
    assert back == pytest.approx(y, abs=1e-7 * (1 + abs(y)))


@given(st.floats(1e-4, 0.5), phases, st.floats(-0.5, 10.0))
def test_closed_and_bisection_agree(r, X, y):
    target = float(im_core(math.log(r), X, y))
    closed = Y_inverse_on_vertical(r, X, target)
    bisect = Y_inverse_on_vertical(r, X, target, method="bisect", tol=1e-13)
    assert closed == pytest.approx(bisect, abs=1e-6)


def test_inverse_below_the_infimum():
    r, X = 0.3, 0.4
    low = float(im_core(math.log(r), X, -1.0))
    with pytest.raises(NoPreimage):
        Y_inverse_on_vertical(r, X, low - 0.5)


def test_tiny_radius_through_logr():
    # r = e^-2000 underflows; Im Y is flat in y to double precision, so any higher
    # target has its preimage past the double range
    logr = -2000.0
    floor = float(im_core(logr, 0.25, -1.0))
    assert math.isfinite(floor)
    assert float(im_core(logr, 0.25, 50.0)) == pytest.approx(floor, rel=1e-15)
    assert Y_inverse_on_vertical(0.0, 0.25, floor + 0.1, logr=logr) == math.inf
    assert Y_inverse_on_vertical(0.0, 0.25, floor, logr=logr) >= -1.0


def test_logr_matches_r():
    r = 1e-20
    for y in (-1.0, 0.0, 3.0):
        assert float(im_core(math.log(r), 0.3, y)) == pytest.approx(Y(r, complex(0.3 / r, y)).y, rel=1e-14)


def test_array_form_matches_scalar():
    r = 0.2
    xs = np.linspace(0, 4.9, 7)
    ys = np.linspace(-1, 3, 7)
    X, im = Y_array(r, xs, ys)
    for x, y, Xi, yi in zip(xs, ys, X, im):
        p = Y(r, complex(x, y))
        assert (Xi, yi) == pytest.approx((p.x, p.y), rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -0.1, 0.6])
def test_radius_domain(bad):
    with pytest.raises(DomainError):
        Y(bad, 1j)


def test_half_plane_domain():
    with pytest.raises(DomainError):
        HalfPlanePoint(0.0, -1.5)
    with pytest.raises(DomainError):
        Y(0.3, complex(0.0, -1.01))


def test_signed_map_orientation(golden_nie, sqrt2_nie):
    w = complex(1.3, 0.7)
    # golden has eps_0 = -1 (no reflection), sqrt2 has eps_0 = +1 (reflection)
    g = Y_signed(golden_nie, 0, w)
    s = Y_signed(sqrt2_nie, 0, w)
    assert g.x == pytest.approx(float(golden_nie.alpha(0)) * 1.3)
    assert s.x == pytest.approx(-float(sqrt2_nie.alpha(0)) * 1.3)
    assert g.y == pytest.approx(Y(float(golden_nie.alpha(0)), w).y)


@given(st.floats(0.0, 0.99), st.floats(-0.5, 8.0))
def test_signed_inverse(X, y):
    from attractor_lab import RotationNumber, expand_nearest_integer

    nie = expand_nearest_integer(RotationNumber.from_generator("sqrt2"), 5)
    x_out = -X  # eps_1 = +1 flips the sign
    r = float(nie.alpha(1))
    w = Y_signed(nie, 1, complex(X / r, y))
    assert w.x == pytest.approx(x_out, abs=1e-15)
    assert Y_signed_inverse_on_vertical(nie, 1, w.x, w.y) == pytest.approx(y, abs=1e-7 * (1 + y))


@given(radii)
def test_Y_fixes_zero(r):
    p = Y(r, 0j)
    assert p.x == 0.0 and abs(p.y) < 1e-12


@given(st.floats(1e-3, 0.5), st.floats(-30, 30), heights)
def test_Y_periodicity(r, x, y):
    a = Y(r, complex(x, y))
    b = Y(r, complex(x + 1 / r, y))
    assert b.x == pytest.approx(a.x + 1, abs=1e-12)
    assert b.y == pytest.approx(a.y, abs=1e-12)


@given(radii)
def test_h_comparison_at_one(r):
    # |2 pi Im Y_r(i / 2 pi)| <= pi, since h_r^{-1}(1) = 0
    assert abs(2 * math.pi * Y(r, 1j / (2 * math.pi)).y) <= math.pi


@pytest.mark.parametrize("which", ["golden", "sqrt2"])
def test_signed_map_on_the_imaginary_axis(which, golden_nie, sqrt2_nie):
    nie = golden_nie if which == "golden" else sqrt2_nie
    z = Y_signed(nie, 0, 0j)
    assert z.x == 0.0 and abs(z.y) < 1e-12
    for y in (-1.0, 0.0, 2.5):
        img = Y_signed(nie, 0, complex(0.0, y))
        assert img.x == 0.0 and img.y > -1.0


@pytest.mark.parametrize("which", ["golden", "sqrt2"])
def test_signed_periodicity(which, golden_nie, sqrt2_nie):
    nie = golden_nie if which == "golden" else sqrt2_nie
    a = float(nie.alpha(2))
    w = complex(0.7, 0.4)
    base, shifted = Y_signed(nie, 2, w), Y_signed(nie, 2, w + 1 / a)
    # +1 when eps_n = -1, -1 when eps_n = +1
    assert shifted.x - base.x == pytest.approx(-nie.epsilon(2), abs=1e-12)
    assert shifted.y == pytest.approx(base.y, abs=1e-12)


@given(st.floats(1e-6, 0.5), st.floats(0.0, 0.999), heights, st.floats(0.0, 0.999), heights)
def test_contraction(r, X1, y1, X2, y2):
    a, b = complex(X1 / r, y1), complex(X2 / r, y2)
    p, q = Y(r, a), Y(r, b)
    assert abs(p.w - q.w) <= 0.9 * abs(a - b) + 1e-12
