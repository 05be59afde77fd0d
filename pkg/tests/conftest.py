import mpmath
import pytest
from hypothesis import HealthCheck, settings

from attractor_lab import RotationNumber, expand_nearest_integer

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def nicf_oracle(p, q, d, r, depth, bits=600):
    """Digits (a_{-1}, eps_0, [(a_n, eps_{n+1})]) of (p + q sqrt d)/r by the textbook recursion."""
    with mpmath.workprec(bits):
        x = (p + q * mpmath.sqrt(d)) / r
        am1 = int(mpmath.nint(x))
        r = x - am1
        eps0 = 1 if r > 0 else -1
        t = abs(r)
        out = []
        for _ in range(depth):
            inv = 1 / t
            a = int(mpmath.nint(inv))
            rest = inv - a
            out.append((a, 1 if rest > 0 else -1))
            t = abs(rest)
        return am1, eps0, out


@pytest.fixture(scope="session")
def golden():
    return RotationNumber.from_generator("golden")


@pytest.fixture(scope="session")
def golden_nie(golden):
    return expand_nearest_integer(golden, 40)


@pytest.fixture(scope="session")
def sqrt2_nie():
    return expand_nearest_integer(RotationNumber.from_generator("sqrt2"), 40)
