"""The change of coordinates Y_r on {Im w >= -1} and its signed variants.

Y_r(w) = r Re w + (i/2pi) log |(e^{-3 pi r} - e^{-pi r i} e^{-2 pi r i w}) / (e^{-3 pi r} - e^{pi r i})|

Writing X = r Re w and u = 2 pi r (Im w + 3/2), the factor e^{-6 pi r} cancels and

    4 pi Im Y = log(expm1(u)^2 + 4 e^u sin^2(pi X + pi r / 2)) - log D_r,
    D_r = expm1(3 pi r)^2 + 4 e^{3 pi r} sin^2(pi r / 2).

Every piece is evaluated in the log domain from ``log r``, so the kernel stays
finite for r far below the smallest double (e.g. r = exp(-1e9)).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath import mpf

from .errors import DomainError, NoPreimage, NonConvergence

TWO_PI = 2.0 * math.pi
LOG_2PI = math.log(TWO_PI)
LOG_PI = math.log(math.pi)
LOG4 = math.log(4.0)
DEFAULT_TOL = 1e-12
MAX_BISECT = 200


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not self.y >= -1.0:
            raise DomainError(f"Im w = {self.y} is below -1")

    @property
    def w(self) -> complex:
        return complex(self.x, self.y)


# ---------------------------------------------------------------------------
# log-domain kernel
# ---------------------------------------------------------------------------


def _ratio(f, t):
    """f(t)/t with the limit 1 at t = 0."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(t == 0, 1.0, f(t) / np.where(t == 0, 1.0, t))


def log_denominator(logr):
    """log D_r, accurate for any r > 0 given as log r (scalar or array)."""
    lr = np.asarray(logr, dtype=float)
    r = np.exp(lr)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = 3.0 * np.pi * r
        b = 0.5 * np.pi * r
        f = 9.0 * _ratio(np.expm1, a) ** 2 + np.exp(a) * _ratio(np.sin, b) ** 2
    out = 2.0 * lr + 2.0 * LOG_PI + np.log(f)
    return float(out) if out.ndim == 0 else out


def log_sin(logr, X) -> np.ndarray:
    """log |sin(pi X + pi r / 2)|, robust when r underflows (logr may be an array)."""
    X = np.asarray(X, dtype=float)
    lr = np.asarray(logr, dtype=float)
    f = X - np.round(X)
    r = np.exp(lr)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = f + 0.5 * r
        t = t - np.round(t)
        regular = np.log(np.abs(np.sin(np.pi * t)))
        tiny = LOG_PI + lr - math.log(2.0)
        underflow = np.where(f == 0.0, tiny, np.log(np.abs(np.sin(np.pi * f))))
        return np.where(r > 0.0, regular, underflow)


def _log_expm1(u, log_u):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        big = u + np.log1p(-np.exp(-np.where(u > 1.0, u, 1.0)))
        small = log_u + np.log(_ratio(np.expm1, np.where(u > 1.0, 0.0, u)))
    return np.where(u > 1.0, big, small)


def im_core(logr, X, y) -> np.ndarray:
    """Im Y_r at output real part X = r Re w and Im w = y (vectorised, logr included)."""
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        log_u = LOG_2PI + logr + np.log(y + 1.5)
        u = np.exp(log_u)
        lem = _log_expm1(u, log_u)
        ls = log_sin(logr, X)
        log_a = np.logaddexp(2.0 * lem, u + LOG4 + 2.0 * ls)
    return (log_a - log_denominator(logr)) / (4.0 * math.pi)


def _check_r(r: float) -> None:
    if not (0.0 < r <= 0.5):
        raise DomainError(f"r = {r} is outside (0, 1/2]")


def Y(r: float, w: HalfPlanePoint | complex) -> HalfPlanePoint:
    """Y_r(w) in double precision."""
    _check_r(r)
    w = w.w if isinstance(w, HalfPlanePoint) else complex(w)
    if not w.imag >= -1.0:
        raise DomainError(f"Im w = {w.imag} is below -1")
    X = r * w.real
    return HalfPlanePoint(X, float(im_core(math.log(r), X, w.imag)))


def Y_array(r: float, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised Y_r on arrays of real and imaginary parts."""
    _check_r(r)
    x = np.asarray(x, dtype=float)
    X = r * x
    return X, im_core(math.log(r), X, y)


# ---------------------------------------------------------------------------
# arbitrary precision
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=256)
def _r_factors(r: mpf, prec: int) -> tuple[mpf, mpmath.mpc]:
    """(e^{-3 pi r}, e^{-3 pi r} - e^{pi r i}) at ``prec`` bits."""
    with mpmath.workprec(prec):
        e3 = mpmath.exp(-3 * mpmath.pi * r)
        return e3, e3 - mpmath.expj(mpmath.pi * r)


def Y_mp(r, w, bits: int = 256) -> mpmath.mpc:
    """Y_r(w) straight from the defining formula at ``bits`` of precision.

    Extra guard bits absorb the cancellation e^{-3 pi r} - e^{pi r i} = O(r).
    """
    with mpmath.workprec(bits):
        r = mpf(r)
    guard = max(0, -mpmath.mag(r)) + 34
    prec = bits + guard
    e3, den = _r_factors(r, prec)
    with mpmath.workprec(prec):
        w = mpmath.mpc(w)
        num = e3 - mpmath.exp(-1j * mpmath.pi * r * (1 + 2 * w))
        val = mpmath.mpc(r * w.real, mpmath.log(abs(num / den)) / (2 * mpmath.pi))
    with mpmath.workprec(bits):
        return +val


# ---------------------------------------------------------------------------
# inversion along vertical lines
# ---------------------------------------------------------------------------


def _asinh_from_log(lq: float) -> float:
    """asinh(exp(lq)) without overflow."""
    if lq > 20.0:
        return math.log(2.0) + lq + math.log1p(math.exp(-2.0 * lq) / 4.0)
    return math.asinh(math.exp(lq))


def inverse_closed_form(logr: float, X: float, y_target: float) -> float:
    """Im w on the line r Re w = X with Im Y_r(w) = y_target, in closed form.

    From expm1(u)^2 + 4 e^u s^2 = C with s = sin(pi X + pi r/2), C = e^{4 pi y_t} D_r,
    write m = C/(4 s^2) - 1; then expm1(u) = 2 s (sqrt(m + s^2) - s), evaluated in logs.
    """
    ls = float(log_sin(logr, X))
    delta = 4.0 * math.pi * y_target + log_denominator(logr) - LOG4 - 2.0 * ls
    if not delta > 0.0:
        return _at_floor(logr, X, y_target)
    log_m = delta + math.log(-math.expm1(-delta)) if delta < 700.0 else delta
    log_e = math.log(2.0) + ls + 0.5 * log_m - _asinh_from_log(ls - 0.5 * log_m)
    if log_e > 700.0:
        log_u = math.log(log_e + math.log1p(math.exp(-log_e)))
    else:
        e = math.exp(log_e)
        log_u = log_e - 0.5 * e if e < 1e-8 else math.log(math.log1p(e))
    z = log_u - LOG_2PI - logr
    y = math.exp(z) - 1.5 if z < 709.0 else math.inf
    if y < -1.0:
        return _at_floor(logr, X, y_target)
    return y


def _at_floor(logr: float, X: float, y_target: float) -> float:
    """-1 when the target matches the infimum up to rounding, else NoPreimage."""
    floor_val = float(im_core(logr, X, -1.0))
    slack = 1e-12 * (1.0 + abs(y_target) + abs(log_denominator(logr)) / (4.0 * math.pi))
    if y_target >= floor_val - slack:
        return -1.0
    raise NoPreimage(f"target {y_target} is below the infimum {floor_val} on the line X = {X}")


def _bisect(logr: float, X: float, y_target: float, tol: float, cap: int) -> float:
    f = lambda y: float(im_core(logr, X, y)) - y_target  # noqa: E731
    lo = -1.0
    if f(lo) > tol:
        raise NoPreimage(f"target {y_target} is below the infimum on the line X = {X}")
    if f(lo) >= -tol:
        return lo
    step, hi = 1.0, 0.0
    it = 0
    while f(hi) < 0.0:
        lo, hi = hi, hi + step
        step *= 2.0
        it += 1
        if it > cap or not math.isfinite(hi):
            raise NonConvergence("could not bracket the preimage")
    for _ in range(cap):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or hi - lo <= 4e-16 * max(1.0, abs(mid)):
            return mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    raise NonConvergence(f"bisection did not reach tol {tol} in {cap} steps")


def Y_inverse_on_vertical(
    r: float,
    x_target: float,
    y_target: float,
    tol: float = DEFAULT_TOL,
    method: str = "closed",
    logr: float | None = None,
    cap: int = MAX_BISECT,
) -> float:
    """The y with Im Y_r(x_target/r + i y) = y_target.

    ``method="closed"`` uses the algebraic inverse; ``"bisect"`` brackets upward
    from y = -1 and bisects (used as an oracle).  ``logr`` may replace ``r`` when
    r underflows.
    """
    if logr is None:
        _check_r(r)
        logr = math.log(r)
    if method == "closed":
        return inverse_closed_form(logr, x_target, y_target)
    if method == "bisect":
        return _bisect(logr, x_target, y_target, tol, cap)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# signed maps
# ---------------------------------------------------------------------------


def Y_signed(nie, n: int, w: HalfPlanePoint | complex) -> HalfPlanePoint:
    """The signed map: Y_{alpha_n} if eps_n = -1, else -conj o Y_{alpha_n}."""
    w = w.w if isinstance(w, HalfPlanePoint) else complex(w)
    if not w.imag >= -1.0:
        raise DomainError(f"Im w = {w.imag} is below -1")
    eps = nie.epsilon(n)
    r = float(nie.alpha(n))
    logr = -nie.log_inv_alpha(n)
    X = r * w.real
    im = float(im_core(logr, X, w.imag))
    return HalfPlanePoint(-eps * X, im)


def Y_signed_mp(nie, n: int, w, bits: int = 256) -> mpmath.mpc:
    v = Y_mp(nie.alpha(n), w, bits)
    if nie.epsilon(n) > 0:
        with mpmath.workprec(bits):
            return mpmath.mpc(-v.real, v.imag)
    return v


def Y_signed_inverse_on_vertical(nie, n: int, x_out: float, y_target: float, **kw) -> float:
    """Im of the preimage under the signed map of the point x_out + i y_target."""
    eps = nie.epsilon(n)
    X = -eps * x_out
    return Y_inverse_on_vertical(0.0, X, y_target, logr=-nie.log_inv_alpha(n), **kw)
