"""Continued-fraction engines.

Two expansions of an irrational alpha are supported:

* the nearest-integer (modified) expansion
  ``alpha = a_{-1} + eps_0 alpha_0``, ``1/alpha_n = a_n + eps_{n+1} alpha_{n+1}``
  with ``alpha_n in (0, 1/2)`` and ``a_n >= 2``;
* the standard (Gauss) expansion ``1/at_n = ã_n + at_{n+1}`` with ``at_n in (0, 1)``.

Sources are quadratic surds (exact integer arithmetic, unlimited depth), decimal
literals with a mantissa budget, or named digit generators.  Generators whose digits
grow like towers of exponentials stop at a *numeric horizon*: the first level whose
digit cannot be evaluated.  Past the horizon a ``TailModel`` supplies the weighted
Brjuno terms analytically, with an error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import mpmath
from mpmath import mpf

from .errors import DepthExceeded, DomainError, PrecisionExhausted, RationalDetected

Digit = Union[int, mpf]

DEFAULT_BITS = 256
#: surviving-bit floor below which a decimal expansion stops
TRUST_BITS = 64
#: exp(x) with x above this is treated as past the numeric horizon
EXP_HORIZON = 2.0**40
#: digits above 2**INT_DIGIT_BITS are kept as mpf instead of exact integers
INT_DIGIT_BITS = 4096


# ---------------------------------------------------------------------------
# exact quadratic surds
# ---------------------------------------------------------------------------


def _sign_lin(p: int, q: int, d: int) -> int:
    """Sign of p + q*sqrt(d) for a non-square d > 0."""
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    return sp if p * p > q * q * d else sq


def _strip_square(d: int) -> tuple[int, int]:
    """Return (k, d') with d = k*k*d' and d' free of small square factors."""
    k = 1
    f = 2
    while f * f <= d and f < 10_000:
        while d % (f * f) == 0:
            d //= f * f
            k *= f
        f += 1
    return k, d


@dataclass(frozen=True)
class QuadSurd:
    """The real number (P + Q sqrt D) / R, kept normalised with R > 0."""

    P: int
    Q: int
    D: int
    R: int

    @classmethod
    def make(cls, p: int, q: int, d: int, r: int) -> "QuadSurd":
        if r == 0:
            raise DomainError("surd denominator is zero")
        if d <= 0:
            raise DomainError("surd radicand must be positive")
        k, d = _strip_square(d)
        q *= k
        if math.isqrt(d) ** 2 == d:
            raise RationalDetected(f"sqrt({d * k * k}) is an integer: value is rational")
        if q == 0:
            raise RationalDetected("surd has q = 0: value is rational")
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        return cls(p // g, q // g, d, r // g)

    def sign(self) -> int:
        return _sign_lin(self.P, self.Q, self.D)

    def floor(self) -> int:
        with mpmath.workprec(64 + max(self.P.bit_length(), self.Q.bit_length(), self.R.bit_length())):
            k = int(mpmath.floor(self._raw_value()))
        while _sign_lin(self.P - k * self.R, self.Q, self.D) < 0:
            k -= 1
        while _sign_lin(self.P - (k + 1) * self.R, self.Q, self.D) >= 0:
            k += 1
        return k

    def nearest(self) -> int:
        return QuadSurd(2 * self.P + self.R, 2 * self.Q, self.D, 2 * self.R).floor()

    def add_int(self, k: int) -> "QuadSurd":
        return QuadSurd.make(self.P + k * self.R, self.Q, self.D, self.R)

    def neg(self) -> "QuadSurd":
        return QuadSurd.make(-self.P, -self.Q, self.D, self.R)

    def recip(self) -> "QuadSurd":
        n = self.P * self.P - self.Q * self.Q * self.D
        return QuadSurd.make(self.R * self.P, -self.R * self.Q, self.D, n)

    def _raw_value(self) -> mpf:
        s = mpmath.sqrt(self.D)
        if _sign_lin(self.P, 0, self.D) * _sign_lin(0, self.Q, self.D) >= 0:
            return (self.P + self.Q * s) / self.R
        # opposite signs: use the conjugate to avoid cancellation
        n = self.P * self.P - self.Q * self.Q * self.D
        return mpf(n) / (self.R * (self.P - self.Q * s))

    def value(self, bits: int) -> mpf:
        with mpmath.workprec(bits + 32):
            v = self._raw_value()
        with mpmath.workprec(bits):
            return +v

    def __str__(self) -> str:
        return f"({self.P}{self.Q:+d}*sqrt({self.D}))/{self.R}"


# ---------------------------------------------------------------------------
# digit generators
# ---------------------------------------------------------------------------


def _exp_digit(x: mpf) -> Digit | None:
    """ceil(exp(x)) as an int when small, as an mpf when huge, None past the horizon."""
    if x > EXP_HORIZON:
        return None
    if x < INT_DIGIT_BITS * 0.69:
        with mpmath.workprec(int(x * 1.45) + 64):
            return int(mpmath.ceil(mpmath.exp(x)))
    return mpmath.exp(x)


def _backward(a: Sequence[Digit], eps: Sequence[int], tail: mpf) -> list[mpf]:
    """alpha_n = 1/(a_n + eps_{n+1} alpha_{n+1}) for n = len(a)-1 .. 0."""
    out: list[mpf] = [mpf(0)] * len(a)
    x = tail
    for n in range(len(a) - 1, -1, -1):
        x = 1 / (a[n] + eps[n] * x)
        out[n] = x
    return out


@dataclass(frozen=True)
class TowerNonBrjuno:
    """Nearest-integer digits a_0 = 2, a_{n+1} = ceil(exp(1/beta_n)), all signs +1.

    beta_n is taken from the finite fraction [a_0, ..., a_n] (tail zero), which
    makes every digit a well defined integer.  alpha = alpha_0 lies in (0, 1/2).
    """

    name: str = "tower-nonbrjuno"

    def nicf_digits(self, depth: int, bits: int) -> tuple[int, int, list[Digit], list[int], bool]:
        a: list[Digit] = [2]
        eps: list[int] = [1]
        horizon = False
        with mpmath.workprec(bits + 32):
            while len(a) < depth:
                alphas_hat = _backward(a, eps, mpf(0))
                beta_hat = mpmath.fprod(alphas_hat)
                d = _exp_digit(1 / beta_hat)
                if d is None:
                    horizon = True
                    break
                a.append(d)
                eps.append(1)
        return 0, 1, a, eps, horizon

    def tail_model(self, horizon_level: int) -> "TailModel":
        # beta_{n-1} log(1/alpha_n) = 1 + O(exp(-1/beta_{n-1})/beta_{n-1}); 1/beta > 4e8 here
        return TailModel(kind="unit", horizon=horizon_level, err=1e-12)


@dataclass(frozen=True)
class StdTowerBnotH:
    """Standard digits ã_{-1} = 0, ã_0 = 1, ã_{i+1} = ceil(exp(ã_i)).

    These satisfy e^{ã_i} <= ã_{i+1} <= e^{2 ã_i} - 1, the pattern of a Brjuno
    number that is not of Herman type.
    """

    name: str = "std-tower-BnotH"

    def standard_digits(self, depth: int, bits: int) -> tuple[int, list[Digit], bool]:
        d: list[Digit] = [1]
        horizon = False
        with mpmath.workprec(bits + 32):
            while len(d) < depth:
                nxt = _exp_digit(mpf(d[-1]))
                if nxt is None:
                    horizon = True
                    break
                d.append(nxt)
        return 0, d, horizon

    def tail_model(self, horizon_level: int) -> "TailModel":
        return TailModel(kind="std_tower", horizon=horizon_level, err=0.0)


GENERATORS = {
    "tower-nonbrjuno": TowerNonBrjuno(),
    "std-tower-BnotH": StdTowerBnotH(),
}


@dataclass(frozen=True)
class TailModel:
    """Weighted Brjuno terms beta_{n-1} log(1/alpha_n) past the numeric horizon.

    ``unit``: every term equals 1 up to ``err``.
    ``std_tower``: all nearest-integer digits from level 1 on are standard digits
    with log a_{n+1} = a_n + O(exp(-a_n)); the first unseen term is beta_{h-1} a_{h-1}
    and the later ones are bounded by 2 beta_{n-2}, which underflows every format.
    """

    kind: str
    horizon: int
    err: float = 0.0

    def term(self, n: int, nie: "NearestIntegerExpansion") -> tuple[mpf, float]:
        if n < self.horizon:
            raise ValueError("tail model queried below the horizon")
        if self.kind == "unit":
            return mpf(1), self.err
        h = self.horizon
        if n == h:
            with mpmath.workprec(nie.bits):
                v = nie.betas[h - 1] * nie.a[h - 1]
            return v, float(v) * 1e-12
        bound = float(2 * nie.betas[h - 1]) * 2.0 ** (-(n - h - 1))
        return mpf(0), bound


# ---------------------------------------------------------------------------
# rotation numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationNumber:
    """An irrational alpha given exactly or with a finite precision budget.

    For generator sources, ``negate`` and ``shift`` describe sign*alpha_gen + shift.
    """

    kind: str  # "surd" | "decimal" | "generator"
    desc: str
    surd: QuadSurd | None = None
    decimal: str | None = None
    mantissa_bits: int | None = None
    generator: str | None = None
    negate: bool = False
    shift: int = 0

    # constructors ---------------------------------------------------------

    @classmethod
    def from_surd(cls, p: int, q: int, d: int, r: int) -> "RotationNumber":
        s = QuadSurd.make(p, q, d, r)
        return cls(kind="surd", desc=f"surd:{p},{q},{d},{r}", surd=s)

    @classmethod
    def from_decimal(cls, text: str, bits: int) -> "RotationNumber":
        if bits < TRUST_BITS + 8:
            raise DomainError(f"decimal sources need at least {TRUST_BITS + 8} bits")
        try:
            mpf(text)
        except (ValueError, TypeError) as exc:
            raise DomainError(f"not a decimal literal: {text!r}") from exc
        return cls(kind="decimal", desc=f"dec:{text}@{bits}", decimal=text, mantissa_bits=bits)

    @classmethod
    def from_generator(cls, name: str) -> "RotationNumber":
        if name == "golden":
            return cls.from_surd(-1, 1, 5, 2)
        if name == "sqrt2":
            return cls.from_surd(-1, 1, 2, 1)
        if name not in GENERATORS:
            raise DomainError(f"unknown generator {name!r}; known: golden, sqrt2, {', '.join(GENERATORS)}")
        return cls(kind="generator", desc=f"gen:{name}", generator=name)

    # transforms -----------------------------------------------------------

    def plus(self, k: int) -> "RotationNumber":
        tag = f"{self.desc}{k:+d}"
        if self.surd is not None:
            return RotationNumber(kind="surd", desc=tag, surd=self.surd.add_int(k))
        if self.kind == "decimal":
            return RotationNumber(kind="decimal", desc=tag, decimal=self._exact_decimal(k), mantissa_bits=self.mantissa_bits)
        return RotationNumber(
            kind="generator", desc=tag, generator=self.generator, negate=self.negate, shift=self.shift + k
        )

    def negated(self) -> "RotationNumber":
        tag = f"-({self.desc})"
        if self.surd is not None:
            return RotationNumber(kind="surd", desc=tag, surd=self.surd.neg())
        if self.kind == "decimal":
            text = self.decimal[1:] if self.decimal.startswith("-") else "-" + self.decimal
            return RotationNumber(kind="decimal", desc=tag, decimal=text, mantissa_bits=self.mantissa_bits)
        return RotationNumber(
            kind="generator", desc=tag, generator=self.generator, negate=not self.negate, shift=-self.shift
        )

    def neg_reciprocal(self) -> "RotationNumber":
        """-1/alpha (exact for surds)."""
        if self.surd is None:
            raise DomainError("-1/alpha is only available for surd sources")
        return RotationNumber(kind="surd", desc=f"-1/({self.desc})", surd=self.surd.recip().neg())

    def _exact_decimal(self, k: int) -> str:
        from decimal import Decimal

        return str(Decimal(self.decimal) + k)

    # evaluation -----------------------------------------------------------

    def value(self, bits: int = DEFAULT_BITS) -> mpf:
        """Deterministic evaluation at ``bits`` of precision."""
        if self.surd is not None:
            return self.surd.value(bits)
        if self.kind == "decimal":
            with mpmath.workprec(self.mantissa_bits):
                v = mpf(self.decimal)
            with mpmath.workprec(bits):
                return +v
        nie = expand_nearest_integer(self, 64, bits=bits)
        with mpmath.workprec(bits + 16):
            return nie.a_minus1 + nie.eps0 * nie.alphas[0]


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NearestIntegerExpansion:
    """Digits and values of the nearest-integer expansion.

    ``a[n]`` is a_n, ``eps[n]`` is eps_{n+1}, ``alphas[n]`` is alpha_n and
    ``betas[n]`` is beta_n, all for n = 0 .. certified_depth.
    """

    alpha_desc: str
    bits: int
    a_minus1: int
    eps0: int
    a: tuple[Digit, ...]
    eps: tuple[int, ...]
    alphas: tuple[mpf, ...]
    betas: tuple[mpf, ...]
    exhausted: bool = False
    tail: TailModel | None = None
    surviving_bits: tuple[float, ...] = ()

    @property
    def certified_depth(self) -> int:
        return len(self.alphas) - 1

    @property
    def levels(self) -> int:
        return len(self.alphas)

    def epsilon(self, n: int) -> int:
        """eps_n for n >= 0."""
        if n == 0:
            return self.eps0
        self._check(n - 1)
        return self.eps[n - 1]

    def alpha(self, n: int) -> mpf:
        if n == -1:
            return mpf(1)
        self._check(n)
        return self.alphas[n]

    def beta(self, n: int) -> mpf:
        if n == -1:
            return mpf(1)
        self._check(n)
        return self.betas[n]

    def log_inv_alpha(self, n: int) -> float:
        """log(1/alpha_n) as a float; finite even when alpha_n underflows doubles."""
        if n == -1:
            return 0.0
        self._check(n)
        with mpmath.workprec(64):
            return float(-mpmath.log(self.alphas[n]))

    def weighted_log(self, n: int) -> tuple[mpf, float]:
        """beta_{n-1} log(1/alpha_n) and an absolute error bound."""
        if n < self.levels:
            with mpmath.workprec(self.bits):
                return self.beta(n - 1) * -mpmath.log(self.alphas[n]), 0.0
        if self.tail is not None:
            return self.tail.term(n, self)
        raise DepthExceeded(f"level {n} is beyond certified depth {self.certified_depth}")

    def _check(self, n: int) -> None:
        if n < 0 or n > self.certified_depth:
            raise DepthExceeded(f"level {n} is beyond certified depth {self.certified_depth}")


@dataclass(frozen=True)
class StandardExpansion:
    """Standard continued fraction: ``digits[n]`` is ã_n, ``alphas[n]`` is at_n.

    ``convergents[k]`` is (p_{k-1}, q_{k-1}) for k = 0 .. (p_{-1}, q_{-1} first).
    """

    alpha_desc: str
    bits: int
    a_minus1: int
    digits: tuple[Digit, ...]
    alphas: tuple[mpf, ...]
    betas: tuple[mpf, ...]
    convergents: tuple[tuple[int, int], ...]
    exhausted: bool = False
    horizon_digit: Digit | None = None

    @property
    def certified_depth(self) -> int:
        return len(self.alphas) - 1

    def alpha(self, n: int) -> mpf:
        if n < 0 or n > self.certified_depth:
            raise DepthExceeded(f"standard level {n} beyond {self.certified_depth}")
        return self.alphas[n]

    def beta(self, n: int) -> mpf:
        if n == -2:
            raise DomainError("beta_{-2} = alpha is not stored")
        if n == -1:
            return mpf(1)
        if n < 0 or n > self.certified_depth:
            raise DepthExceeded(f"standard level {n} beyond {self.certified_depth}")
        return self.betas[n]

    def convergent(self, n: int) -> tuple[int, int]:
        """(p_n, q_n) for n >= -2."""
        if n == -2:
            return 1, 0
        k = n + 1
        if k >= len(self.convergents):
            raise DepthExceeded(f"convergent {n} needs a digit that is not an exact integer")
        return self.convergents[k]


def _products(values: Sequence[mpf], bits: int) -> tuple[mpf, ...]:
    out = []
    acc = mpf(1)
    with mpmath.workprec(bits):
        for v in values:
            acc = acc * v
            out.append(acc)
    return tuple(out)


def _as_digit(x: mpf) -> Digit:
    """Exact integer when the float value is an integer of moderate size."""
    if isinstance(x, int):
        return x
    if mpmath.isint(x) and mpmath.mag(x) < INT_DIGIT_BITS:
        return int(x)
    return x


def _log2_inv(x: mpf) -> float:
    with mpmath.workprec(53):
        return float(-mpmath.log(x, 2))


def expand_nearest_integer(
    alpha: RotationNumber, depth: int, bits: int = DEFAULT_BITS, strict: bool = False
) -> NearestIntegerExpansion:
    """Nearest-integer expansion through ``depth`` levels (alpha_0 .. alpha_{depth-1}).

    Decimal sources stop at the last level with at least ``TRUST_BITS`` surviving
    bits (``exhausted`` is set; ``strict`` turns this into PrecisionExhausted).
    Tower generators stop at their numeric horizon and carry a TailModel.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if alpha.kind == "surd":
        nie = _nicf_surd(alpha, depth, bits)
    elif alpha.kind == "decimal":
        nie = _nicf_decimal(alpha, depth, bits)
    else:
        nie = _nicf_generator(alpha, depth, bits)
    if strict and nie.exhausted:
        raise PrecisionExhausted(
            f"{alpha.desc}: trusted bits exhausted after {nie.levels} of {depth} levels", partial=nie
        )
    return nie


def _nicf_surd(alpha: RotationNumber, depth: int, bits: int) -> NearestIntegerExpansion:
    x = alpha.surd
    am1 = x.nearest()
    y = x.add_int(-am1)
    eps0 = y.sign()
    cur = y if eps0 > 0 else y.neg()
    a: list[Digit] = []
    eps: list[int] = []
    vals: list[mpf] = []
    for _ in range(depth):
        vals.append(cur.value(bits))
        inv = cur.recip()
        an = inv.nearest()
        rest = inv.add_int(-an)
        e = rest.sign()
        a.append(an)
        eps.append(e)
        cur = rest if e > 0 else rest.neg()
    return NearestIntegerExpansion(
        alpha_desc=alpha.desc,
        bits=bits,
        a_minus1=am1,
        eps0=eps0,
        a=tuple(a),
        eps=tuple(eps),
        alphas=tuple(vals),
        betas=_products(vals, bits),
    )


def _nicf_decimal(alpha: RotationNumber, depth: int, bits: int) -> NearestIntegerExpansion:
    wb = alpha.mantissa_bits
    with mpmath.workprec(wb):
        x = mpf(alpha.decimal)
        am1 = int(mpmath.nint(x))
        y = x - am1
        if y == 0:
            raise RationalDetected(f"{alpha.desc} is an integer")
        if abs(y) == mpf(0.5):
            raise RationalDetected(f"{alpha.desc} is a half-integer")
        eps0 = 1 if y > 0 else -1
        cur = abs(y)
        a: list[Digit] = []
        eps: list[int] = []
        vals: list[mpf] = []
        surv: list[float] = []
        remaining = float(wb)
        exhausted = False
        for n in range(depth):
            if cur < mpmath.ldexp(1, -int(remaining - 8)):
                raise RationalDetected(f"{alpha.desc}: alpha_{n} is indistinguishable from 0", partial=None)
            inv = 1 / cur
            an = int(mpmath.nint(inv))
            rest = inv - an
            if rest == 0 or abs(rest) == mpf(0.5):
                raise RationalDetected(f"{alpha.desc}: expansion terminates at level {n}")
            e = 1 if rest > 0 else -1
            nxt = abs(rest)
            # relative error of alpha_{n+1} is that of alpha_n over alpha_n alpha_{n+1}
            after = remaining - _log2_inv(cur) - _log2_inv(nxt)
            vals.append(cur)
            surv.append(remaining)
            a.append(an)
            eps.append(e)
            if after < TRUST_BITS and n + 1 < depth:
                exhausted = True
                break
            cur = nxt
            remaining = after
    return NearestIntegerExpansion(
        alpha_desc=alpha.desc,
        bits=bits,
        a_minus1=am1,
        eps0=eps0,
        a=tuple(a),
        eps=tuple(eps),
        alphas=tuple(mpf(v) for v in vals),
        betas=_products(vals, bits),
        exhausted=exhausted,
        surviving_bits=tuple(surv),
    )


def _generator_nicf_raw(name: str, depth: int, bits: int):
    """Unsigned expansion of the generator (a_{-1}, eps0, digits, signs, alphas, tail)."""
    gen = GENERATORS[name]
    pad = 4
    if isinstance(gen, TowerNonBrjuno):
        am1, eps0, a, eps, horizon = gen.nicf_digits(depth + pad, bits)
        with mpmath.workprec(bits + 32):
            vals = _backward(a, eps, mpf(1) / 3)
        keep = min(depth, len(a)) if not horizon else min(depth, len(a))
        tail = gen.tail_model(len(a)) if horizon else None
        return am1, eps0, a[:keep], eps[:keep], vals[:keep], tail
    am1s, d, horizon = gen.standard_digits(depth + pad, bits)
    with mpmath.workprec(bits + 32):
        svals = _backward(d, [1] * len(d), mpf(1) / 3)
    am1, eps0, a, eps, vals = standard_to_nicf(am1s, d, svals, bits, horizon_known_large=horizon)
    keep = min(depth, len(vals))
    tail = gen.tail_model(len(vals)) if horizon and keep == len(vals) else None
    return am1, eps0, a[:keep], eps[:keep], vals[:keep], tail


def _nicf_generator(alpha: RotationNumber, depth: int, bits: int) -> NearestIntegerExpansion:
    am1, eps0, a, eps, vals, tail = _generator_nicf_raw(alpha.generator, depth, bits)
    if alpha.negate:
        am1, eps0 = -am1, -eps0
    am1 += alpha.shift
    with mpmath.workprec(bits):
        vals = [+v for v in vals]
    return NearestIntegerExpansion(
        alpha_desc=alpha.desc,
        bits=bits,
        a_minus1=am1,
        eps0=eps0,
        a=tuple(_as_digit(x) for x in a),
        eps=tuple(eps),
        alphas=tuple(vals),
        betas=_products(vals, bits),
        tail=tail if len(vals) < depth else None,
    )


def standard_to_nicf(
    am1: int, digits: Sequence[Digit], values: Sequence[mpf], bits: int, horizon_known_large: bool = False
) -> tuple[int, int, list[Digit], list[int], list[mpf]]:
    """Convert standard digits/values into nearest-integer ones (singularisation).

    A standard digit equal to 1 is absorbed into its neighbour with a sign flip.
    When ``horizon_known_large`` is set, the digit after the last one is known to be
    at least 2 (it is astronomically large), so the last level can still be emitted.
    """
    n_dig = len(digits)

    def digit(j: int) -> Digit | None:
        if j < n_dig:
            return digits[j]
        return math.inf if horizon_known_large else None

    a: list[Digit] = []
    eps: list[int] = []
    vals: list[mpf] = []
    with mpmath.workprec(bits + 32):
        if values[0] < mpf(1) / 2:
            a_m1, eps0, k, flip = am1, 1, 0, False
        else:
            a_m1, eps0, k, flip = am1 + 1, -1, 0, True

        def value_at(j: int, flipped: bool) -> mpf:
            if not flipped:
                return values[j]
            # 1 - at_j with at_j = 1/(1 + at_{j+1})
            nxt = values[j + 1] if j + 1 < len(values) else mpf(0)
            return nxt / (1 + nxt) if j + 1 < len(values) else 1 - values[j]

        while True:
            if flip and k + 1 >= len(values):
                break
            if k >= len(values):
                break
            vals.append(value_at(k, flip))
            if flip:
                big, j = digit(k + 1), k + 2
                if big is None:
                    break
                big = big + 1
            else:
                big, j = digit(k), k + 1
            nxt = digit(j)
            if nxt is None:
                break
            if nxt >= 2:
                a.append(big)
                eps.append(1)
                k, flip = j, False
            else:
                a.append(big + 1)
                eps.append(-1)
                k, flip = j, True
            if j >= len(values):
                break
    m = min(len(a), len(vals))
    return a_m1, eps0, a[:m], eps[:m], vals[:m]


def expand_standard(alpha: RotationNumber, depth: int, bits: int = DEFAULT_BITS) -> StandardExpansion:
    """Standard continued fraction through ``depth`` levels (at_0 .. at_{depth-1})."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    exhausted = False
    horizon_digit = None
    if alpha.kind == "surd":
        x = alpha.surd
        am1 = x.floor()
        cur = x.add_int(-am1)
        digits: list[Digit] = []
        vals: list[mpf] = []
        for _ in range(depth):
            vals.append(cur.value(bits))
            inv = cur.recip()
            d = inv.floor()
            digits.append(d)
            cur = inv.add_int(-d)
    elif alpha.kind == "decimal":
        wb = alpha.mantissa_bits
        digits, vals = [], []
        with mpmath.workprec(wb):
            x = mpf(alpha.decimal)
            am1 = int(mpmath.floor(x))
            cur = x - am1
            remaining = float(wb)
            for n in range(depth):
                if cur == 0 or cur < mpmath.ldexp(1, -int(remaining - 8)):
                    raise RationalDetected(f"{alpha.desc}: standard level {n} vanishes")
                inv = 1 / cur
                d = int(mpmath.floor(inv))
                nxt = inv - d
                vals.append(cur)
                digits.append(d)
                if nxt == 0:
                    raise RationalDetected(f"{alpha.desc}: standard expansion terminates")
                after = remaining - _log2_inv(cur) - _log2_inv(nxt)
                if after < TRUST_BITS and n + 1 < depth:
                    exhausted = True
                    break
                cur, remaining = nxt, after
    else:
        gen = GENERATORS[alpha.generator]
        if isinstance(gen, StdTowerBnotH) and not alpha.negate:
            am1, d, horizon = gen.standard_digits(depth + 4, bits)
            with mpmath.workprec(bits + 32):
                v = _backward(d, [1] * len(d), mpf(1) / 3)
            digits, vals = list(d[:depth]), list(v[:depth])
            am1 += alpha.shift
            if horizon and len(d) <= depth:
                horizon_digit = math.inf
        else:
            nie = expand_nearest_integer(alpha, depth + 1, bits)
            am1, digits, vals = nicf_to_standard(nie)
            digits, vals = digits[:depth], vals[:depth]
    with mpmath.workprec(bits):
        vals = [+v for v in vals]
    conv = [(am1, 1)]
    p2, q2, p1, q1 = 1, 0, am1, 1
    for d in digits:
        if not isinstance(d, int):
            break
        p2, q2, p1, q1 = p1, q1, d * p1 + p2, d * q1 + q2
        conv.append((p1, q1))
    return StandardExpansion(
        alpha_desc=alpha.desc,
        bits=bits,
        a_minus1=am1,
        digits=tuple(_as_digit(x) for x in digits),
        alphas=tuple(vals),
        betas=_products(vals, bits),
        convergents=tuple(conv),
        exhausted=exhausted,
        horizon_digit=horizon_digit,
    )


def nicf_to_standard(nie: NearestIntegerExpansion) -> tuple[int, list[Digit], list[mpf]]:
    """Standard digits and values recovered from a nearest-integer expansion."""
    digits: list[Digit] = []
    vals: list[mpf] = []
    with mpmath.workprec(nie.bits + 32):
        if nie.eps0 > 0:
            am1 = nie.a_minus1
            vals.append(nie.alphas[0])
            shift = 0
        else:
            am1 = nie.a_minus1 - 1
            a0 = nie.alphas[0]
            vals.append(1 - a0)
            digits.append(1)
            vals.append(a0 / (1 - a0))
            shift = -1
        for n in range(nie.levels - 1):
            e = nie.eps[n]
            nxt = nie.alphas[n + 1]
            if e > 0:
                digits.append(nie.a[n] + shift)
                vals.append(nxt)
                shift = 0
            else:
                digits.append(nie.a[n] + shift - 1)
                vals.append(1 - nxt)
                digits.append(1)
                vals.append(nxt / (1 - nxt))
                shift = -1
        if nie.levels and len(digits) < len(vals):
            # last level: its digit is known even though alpha_{n+1} is not stored
            digits.append(nie.a[-1] + shift - (1 if nie.eps[-1] < 0 else 0))
    m = min(len(digits), len(vals))
    return am1, digits[:m], vals[:m]


# ---------------------------------------------------------------------------
# index map and cross relations
# ---------------------------------------------------------------------------


def index_map_c(nie: NearestIntegerExpansion, n: int) -> int:
    """c(-1) = -1 and c(n) = c(n-1) + (3 - eps_n)/2."""
    if n < -1:
        raise DomainError("c(n) needs n >= -1")
    if n > nie.certified_depth + 1:
        raise DepthExceeded(f"c({n}) needs eps_{n}, beyond the expansion")
    c = -1
    for i in range(n + 1):
        c += (3 - nie.epsilon(i)) // 2
    return c


@dataclass(frozen=True)
class RelationReport:
    n: int
    c_n: int
    c_next: int
    residual_i: mpf
    residual_ii: mpf
    residual_iii: mpf

    @property
    def max_residual(self) -> mpf:
        return max(self.residual_i, self.residual_ii, self.residual_iii)


def verify_expansion_relations(
    nie: NearestIntegerExpansion, se: StandardExpansion, n: int
) -> RelationReport:
    """Residuals of the three relations tying alpha_{n+1}, beta_n to the standard data."""
    if n < -1:
        raise DomainError("n must be >= -1")
    if n + 1 > nie.certified_depth:
        raise DepthExceeded(f"alpha_{n + 1} is beyond the nearest-integer expansion")
    cn = index_map_c(nie, n)
    cn1 = index_map_c(nie, n + 1)
    if cn1 > se.certified_depth:
        raise DepthExceeded(f"at_{cn1} is beyond the standard expansion")
    with mpmath.workprec(nie.bits):
        target = nie.alpha(n + 1)
        at = se.alpha(cn + 1)
        r1 = abs(target - (at if nie.epsilon(n + 1) > 0 else 1 - at))
        prod = mpmath.fprod(se.alpha(i) for i in range(cn + 1, cn1 + 1))
        r2 = abs(target - prod)
        r3 = abs(se.beta(cn) - nie.beta(n))
    return RelationReport(n=n, c_n=cn, c_next=cn1, residual_i=r1, residual_ii=r2, residual_iii=r3)


def iter_levels(nie: NearestIntegerExpansion) -> Iterator[tuple[int, Digit, int, mpf]]:
    """(n, a_n, eps_{n+1}, alpha_n) for every certified level."""
    for n in range(nie.levels):
        yield n, nie.a[n], nie.eps[n], nie.alphas[n]
