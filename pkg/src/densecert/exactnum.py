"""Exact rationals, rational intervals and refinable enclosures of computable reals.

Everything here is exact: interval endpoints are :class:`fractions.Fraction`
values and no floating point is used anywhere.  A :class:`RealSpec` describes a
real number symbolically; :func:`approximate` turns it into an :class:`Interval`
of width at most ``2**-k`` that is guaranteed to contain the value.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Union

from .errors import NeedsRefinement

Rational = Fraction
Number = Union[int, Fraction]

DEFAULT_BUDGET_BITS = 4096


def as_rational(x: Any) -> Fraction:
    """Coerce ints, Fractions and decimal strings ("a/b", "-2", "0.25") to a Fraction.

    Floats are refused: silently importing binary rounding error would break
    replayability of certificates.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact rational")


def rational_to_str(x: Number) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _floor_div_pow2(x: Fraction, bits: int) -> int:
    return (x.numerator << bits) // x.denominator


def integer_nth_root(a: int, n: int) -> tuple[int, bool]:
    """Return ``(floor(a ** (1/n)), exact)`` using integer Newton iteration."""
    if a < 1 or n < 1:
        raise ValueError("integer_nth_root needs a >= 1 and n >= 1")
    if n == 1:
        return a, True
    # Newton from above converges monotonically down to the floor root.
    x = 1 << -(-a.bit_length() // n)
    while True:
        y = ((n - 1) * x + a // x ** (n - 1)) // n
        if y >= x:
            break
        x = y
    return x, x**n == a


# --------------------------------------------------------------------------
# Intervals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Number) -> "Interval":
        x = as_rational(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x: object) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= as_rational(x) <= self.hi

    def inside(self, lo: Number, hi: Number) -> bool:
        """True when the interval lies strictly inside the open interval (lo, hi)."""
        return lo < self.lo and self.hi < hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def round_out(self, bits: int) -> "Interval":
        """Snap endpoints outward to the dyadic grid 2**-bits."""
        scale = 1 << bits
        lo = Fraction(_floor_div_pow2(self.lo, bits), scale)
        hi = Fraction(-_floor_div_pow2(-self.hi, bits), scale)
        return Interval(lo, hi)

    @staticmethod
    def _coerce(other: object) -> "Interval":
        if isinstance(other, Interval):
            return other
        return Interval.point(other)  # type: ignore[arg-type]

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: object) -> "Interval":
        o = self._coerce(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other: object) -> "Interval":
        o = self._coerce(other)
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other: object) -> "Interval":
        return self._coerce(other) - self

    def __mul__(self, other: object) -> "Interval":
        o = self._coerce(other)
        if o.is_point:
            c = o.lo
            return Interval(self.lo * c, self.hi * c) if c >= 0 else Interval(self.hi * c, self.lo * c)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if not self.excludes_zero():
            raise ZeroDivisionError(f"interval [{self.lo}, {self.hi}] contains 0")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: object) -> "Interval":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other: object) -> "Interval":
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, k: int) -> "Interval":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return Interval.point(1)
        a, b = self.lo**k, self.hi**k
        if k % 2 == 1 or self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(Fraction(0), max(a, b))

    def to_json(self) -> dict[str, str]:
        return {"lo": rational_to_str(self.lo), "hi": rational_to_str(self.hi)}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "Interval":
        return cls(as_rational(obj["lo"]), as_rational(obj["hi"]))


# --------------------------------------------------------------------------
# Computable reals
# --------------------------------------------------------------------------


class RealSpec:
    """A symbolically described real number that can be enclosed to any width.

    Subclasses implement ``_enclose(k)`` returning an interval of width at most
    ``2**-(k+1)``; :func:`approximate` adds outward rounding on top.
    """

    def _enclose(self, k: int) -> Interval:  # pragma: no cover - abstract
        raise NotImplementedError

    def to_json(self) -> dict[str, Any]:  # pragma: no cover - abstract
        raise NotImplementedError

    # small conveniences so callers can write q - 2 or 3*q
    def __add__(self, other: Number) -> "RealSpec":
        return Shifted(self, as_rational(other))

    def __sub__(self, other: Number) -> "RealSpec":
        return Shifted(self, -as_rational(other))

    def __mul__(self, other: Number) -> "RealSpec":
        return Linear(((as_rational(other), self),))

    __rmul__ = __mul__


@dataclass(frozen=True)
class RationalLit(RealSpec):
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", as_rational(self.value))

    def _enclose(self, k: int) -> Interval:
        return Interval.point(self.value)

    def to_json(self) -> dict[str, Any]:
        return {"kind": "rational", "value": rational_to_str(self.value)}


@dataclass(frozen=True)
class NthRoot(RealSpec):
    """The real ``base ** (1/degree)``."""

    base: int
    degree: int

    def __post_init__(self) -> None:
        if self.base < 2 or self.degree < 2:
            raise ValueError("NthRoot needs base >= 2 and degree >= 2")

    def _enclose(self, k: int) -> Interval:
        b = k + 1
        r, exact = integer_nth_root(self.base << (self.degree * b), self.degree)
        if exact:
            return Interval.point(Fraction(r, 1 << b))
        return Interval(Fraction(r, 1 << b), Fraction(r + 1, 1 << b))

    def to_json(self) -> dict[str, Any]:
        return {"kind": "nthroot", "base": self.base, "degree": self.degree}


@functools.lru_cache(maxsize=256)
def euler_partial_sum(n: int) -> Fraction:
    """Exact ``sum_{i=0}^{n} 1/i!``."""
    total, prod = 0, 1
    for i in range(n, -1, -1):
        total += prod  # prod == n!/i!
        prod *= max(i, 1)
    return Fraction(total, math.factorial(n))


def euler_tail_bound(n: int) -> Fraction:
    """Upper bound ``1/(n*n!)`` on ``e - sum_{i<=n} 1/i!`` (n >= 1)."""
    return Fraction(1, n * math.factorial(n))


@dataclass(frozen=True)
class EulerE(RealSpec):
    def _enclose(self, k: int) -> Interval:
        # 0 < e - S_n < sum_{i>n} 1/i! <= 1/(n+1)! * sum_j (n+1)^-j = 1/(n*n!)
        need = 1 << (k + 1)
        n, nf = 1, 1
        while n * nf < need:
            n += 1
            nf *= n
        s = euler_partial_sum(n)
        return Interval(s, s + euler_tail_bound(n))

    def to_json(self) -> dict[str, Any]:
        return {"kind": "e"}


def _atanh_fixed(u: int, v: int, w: int) -> tuple[int, int]:
    """Integers lo, hi with lo/2^w <= atanh(u/v) <= hi/2^w, for 0 <= u/v <= 1/3.

    atanh(z) = sum_{i>=0} z^(2i+1)/(2i+1).  For 0 <= z <= 1/3 the tail after
    N terms satisfies
        sum_{i>=N} z^(2i+1)/(2i+1) <= z^(2N+1)/(2N+1) * sum_{j>=0} z^(2j)
                                    = z^(2N+1) / ((2N+1)(1 - z^2))
                                   <= (9/8) * z^(2N+1) / (2N+1).
    ``p_lo``/``p_hi`` bracket z^(2i+1) * 2^w with floor/ceil at every step, so
    each partial sum is bracketed too; the loop stops once the tail bound is
    at most one unit in the last place, which is added to ``hi``.
    """
    if u == 0:
        return 0, 0
    if 3 * u > v or u < 0:
        raise ValueError("argument outside [0, 1/3]")
    u2, v2 = u * u, v * v
    p_lo = (u << w) // v
    p_hi = -((-u << w) // v)
    lo = hi = 0
    d = 1
    while 9 * p_hi > 8 * d:
        lo += p_lo // d
        hi += -(-p_hi // d)
        p_lo = p_lo * u2 // v2
        p_hi = -(-p_hi * u2 // v2)
        d += 2
    return lo, hi + 1


@dataclass(frozen=True)
class NaturalLog(RealSpec):
    """``ln(arg)`` for a positive rational ``arg``."""

    arg: Fraction

    def __post_init__(self) -> None:
        a = as_rational(self.arg)
        if a <= 0:
            raise ValueError("NaturalLog needs a positive argument")
        object.__setattr__(self, "arg", a)

    def _reduce(self) -> tuple[int, int, int]:
        """Write arg = 2^j * b with 1 <= b < 2 and return (j, u, v) with z = u/v = (b-1)/(b+1)."""
        num, den = self.arg.numerator, self.arg.denominator
        j = num.bit_length() - den.bit_length()
        bn, bd = (num, den << j) if j >= 0 else (num << -j, den)
        if bn < bd:
            j -= 1
            bn <<= 1
        return j, bn - bd, bn + bd

    def _enclose(self, k: int) -> Interval:
        if self.arg == 1:
            return Interval.point(0)
        j, u, v = self._reduce()
        target = Fraction(1, 1 << (k + 1))
        guard = 2 * k.bit_length() + 8
        while True:
            w = k + 1 + abs(j).bit_length() + guard
            alo, ahi = _atanh_fixed(u, v, w)
            llo, lhi = _atanh_fixed(1, 3, w)  # ln 2 = 2 atanh(1/3)
            scale = 1 << (w - 1)  # the factor 2 of 2*atanh folded into the scale
            iv = Interval(Fraction(alo, scale), Fraction(ahi, scale))
            if j:
                iv = iv + Interval(Fraction(llo, scale), Fraction(lhi, scale)) * j
            if iv.width <= target:
                return iv
            guard *= 2

    def to_json(self) -> dict[str, Any]:
        return {"kind": "ln", "arg": rational_to_str(self.arg)}


@dataclass(frozen=True)
class Shifted(RealSpec):
    """``inner + offset``."""

    inner: RealSpec
    offset: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "offset", as_rational(self.offset))

    def _enclose(self, k: int) -> Interval:
        return approximate(self.inner, k + 1) + self.offset

    def to_json(self) -> dict[str, Any]:
        return {"kind": "shifted", "inner": self.inner.to_json(), "offset": rational_to_str(self.offset)}


@dataclass(frozen=True)
class Linear(RealSpec):
    """``constant + sum(coef * spec)`` with exact rational coefficients.

    Used for witness expressions such as ``r*q + s`` so that deep Engel states
    stay flat instead of nesting one Shifted per digit.
    """

    terms: tuple[tuple[Fraction, RealSpec], ...]
    constant: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        terms = tuple((as_rational(c), s) for c, s in self.terms if c != 0)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "constant", as_rational(self.constant))

    def _enclose(self, k: int) -> Interval:
        extra = len(self.terms).bit_length()
        acc = Interval.point(self.constant)
        for c, spec in self.terms:
            mag = max(0, abs(c.numerator).bit_length() - c.denominator.bit_length() + 1)
            acc = acc + approximate(spec, k + 1 + extra + mag) * c
        return acc

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": "linear",
            "terms": [[rational_to_str(c), s.to_json()] for c, s in self.terms],
            "constant": rational_to_str(self.constant),
        }


@dataclass(frozen=True)
class Quotient(RealSpec):
    """``num / den``; construction certifies ``den != 0``."""

    num: RealSpec
    den: RealSpec

    def __post_init__(self) -> None:
        k = 8
        while True:
            iv = approximate(self.den, k)
            if iv.excludes_zero():
                return
            if iv.is_point:
                raise ZeroDivisionError("Quotient denominator is exactly zero")
            if k >= DEFAULT_BUDGET_BITS:
                raise NeedsRefinement("cannot certify Quotient denominator is nonzero", enclosure=iv)
            k = min(2 * k, DEFAULT_BUDGET_BITS)

    def _enclose(self, k: int) -> Interval:
        target = Fraction(1, 1 << (k + 1))
        p = k + 8
        while True:
            try:
                iv = approximate(self.num, p) / approximate(self.den, p)
            except ZeroDivisionError:
                iv = None
            if iv is not None and iv.width <= target:
                return iv
            p += max(8, p // 2)

    def to_json(self) -> dict[str, Any]:
        return {"kind": "quotient", "num": self.num.to_json(), "den": self.den.to_json()}


def lit(x: Number | str) -> RationalLit:
    return RationalLit(as_rational(x))


def as_spec(x: Any) -> RealSpec:
    if isinstance(x, RealSpec):
        return x
    return RationalLit(as_rational(x))


@functools.lru_cache(maxsize=16384)
def approximate(spec: RealSpec, k: int) -> Interval:
    """Enclosure of ``spec`` with exact rational endpoints and width <= 2**-k."""
    if k < 1:
        raise ValueError("precision k must be >= 1")
    if isinstance(spec, RationalLit):
        return Interval.point(spec.value)
    iv = spec._enclose(k)
    if not iv.is_point:
        iv = iv.round_out(k + 2)
    assert iv.width <= Fraction(1, 1 << k), (spec, k)
    return iv


def refine_until(
    spec: RealSpec,
    accept: Callable[[Interval], bool],
    reject: Callable[[Interval], bool] | None = None,
    start: int = 32,
    budget: int = DEFAULT_BUDGET_BITS,
) -> Interval | None:
    """Double precision until ``accept`` holds (return the interval).

    Returns None as soon as ``reject`` holds; raises NeedsRefinement once
    ``budget`` bits have been tried without a decision.
    """
    k = max(1, min(start, budget))
    while True:
        iv = approximate(spec, k)
        if accept(iv):
            return iv
        if reject is not None and reject(iv):
            return None
        if k >= budget:
            raise NeedsRefinement(f"undecided at {budget} bits", enclosure=iv)
        k = min(2 * k, budget)


def certified_floor(spec: RealSpec, hint: int = 32, budget: int = DEFAULT_BUDGET_BITS) -> int:
    """floor(spec), certified by an enclosure containing no integer boundary."""
    if isinstance(spec, RationalLit):
        return math.floor(spec.value)
    iv = refine_until(spec, lambda iv: math.floor(iv.lo) == math.floor(iv.hi), start=hint, budget=budget)
    assert iv is not None
    return math.floor(iv.lo)


def certified_sign(spec: RealSpec, budget: int = DEFAULT_BUDGET_BITS) -> int:
    if isinstance(spec, RationalLit):
        return (spec.value > 0) - (spec.value < 0)
    iv = refine_until(spec, lambda iv: iv.excludes_zero() or (iv.is_point and iv.lo == 0), start=16, budget=budget)
    assert iv is not None
    return (iv.lo > 0) - (iv.hi < 0)


def exp_enclosure(x: Number, k: int) -> Interval:
    """Enclosure of exp(x) for rational x with width <= 2**-k.

    With y = x / 2^s and |y| <= 1/2, the Taylor remainder after the y^N term
    is bounded by |y|^(N+1)/(N+1)! * sum_j (|y|/(N+2))^j <= 2|y|^(N+1)/(N+1)!.
    The enclosure of exp(y) is then squared s times.
    """
    x = as_rational(x)
    s = 0
    while abs(x) > Fraction(1, 2) * (1 << s):
        s += 1
    y = x / (1 << s)
    target = Fraction(1, 1 << k)
    # exp(x) < 2^(|x|+1); squaring s times scales relative error by 2^s
    bits = k + s + 2 * (math.ceil(abs(x)) + 1) + 8
    while True:
        eps = Fraction(1, 1 << bits)
        total, term, i = Fraction(1), Fraction(1), 0
        while True:
            i += 1
            term = term * y / i
            total += term
            tail = 2 * abs(term) * abs(y) / (i + 1)
            if tail <= eps:
                break
        iv = Interval(total - tail, total + tail).round_out(bits + 2)
        for _ in range(s):
            iv = (iv * iv).round_out(bits + 2)
        if iv.width <= target / 2:
            return iv.round_out(k + 2)
        bits += bits // 2


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def spec_from_json(obj: Any) -> RealSpec:
    """Parse the tagged JSON form of a RealSpec; bare strings/ints are rational literals."""
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        return RationalLit(as_rational(obj))
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"not a RealSpec: {obj!r}")
    kind = obj["kind"]
    if kind == "rational":
        return RationalLit(as_rational(obj["value"]))
    if kind == "nthroot":
        return NthRoot(int(obj["base"]), int(obj["degree"]))
    if kind == "e":
        return EulerE()
    if kind in ("ln", "log"):
        return NaturalLog(as_rational(obj["arg"]))
    if kind == "shifted":
        return Shifted(spec_from_json(obj["inner"]), as_rational(obj["offset"]))
    if kind == "linear":
        terms = tuple((as_rational(c), spec_from_json(s)) for c, s in obj["terms"])
        return Linear(terms, as_rational(obj.get("constant", 0)))
    if kind == "quotient":
        return Quotient(spec_from_json(obj["num"]), spec_from_json(obj["den"]))
    raise ValueError(f"unknown RealSpec kind {kind!r}")


def spec_to_json(spec: RealSpec) -> dict[str, Any]:
    return spec.to_json()
