"""Exact rationals and sparse truncated power series.

A :class:`TruncSeries` is a finite map from :class:`Monomial` to a coefficient,
where the coefficient is either a :class:`fractions.Fraction` or a
:class:`~thetaforge.cohomology.RingElement`.  A monomial carries

* ``beta``  -- exponents of the Novikov variables (one per Mori generator),
* ``aux0``  -- power of the auxiliary variable (``y_0`` / ``q_0``),
* ``zpow``  -- power of the Laurent variable ``z``.

Novikov exponents are truncated by a weighted degree (``weights . beta <= order``),
``aux0`` by ``aux_max``.  ``z`` lives in a hard window ``[zmin, zmax]``; a result
that needs a power outside the window raises :class:`ZWindowError` instead of
being silently cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, NamedTuple

__all__ = [
    "Fraction",
    "SeriesError",
    "IncompatibleRingError",
    "ZWindowError",
    "NotInvertibleError",
    "ConstantTermError",
    "SubstitutionError",
    "Monomial",
    "Truncation",
    "TruncSeries",
    "as_fraction",
    "format_rational",
    "parse_rational",
    "series_add",
    "series_mul",
    "series_exp",
    "series_log",
    "series_inverse",
    "series_substitute",
]


class SeriesError(ValueError):
    """Base class for series errors."""


class IncompatibleRingError(SeriesError):
    pass


class ZWindowError(SeriesError):
    pass


class NotInvertibleError(SeriesError):
    pass


class ConstantTermError(SeriesError):
    pass


class SubstitutionError(SeriesError):
    pass


# -- rationals ---------------------------------------------------------------

def as_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def format_rational(x: Fraction | int) -> str:
    """Serialize as ``"num/den"``; the denominator is always written."""
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"not an exact rational: {s!r}")
    return Fraction(s)


# -- coefficient helpers -----------------------------------------------------
#
# Coefficients are Fractions or RingElements.  RingElement supports +, -, *,
# scalar multiplication, is_zero(), unit_part() and is_nilpotent(); the helpers
# below give Fractions the same surface.

def _is_zero(c) -> bool:
    return c == 0 if isinstance(c, Fraction) else c.is_zero()


def _unit_part(c) -> Fraction:
    return c if isinstance(c, Fraction) else c.unit_part()


def _is_nilpotent(c) -> bool:
    return c == 0 if isinstance(c, Fraction) else c.is_nilpotent()


# -- monomials and truncation ------------------------------------------------

class Monomial(NamedTuple):
    beta: tuple[int, ...]
    aux0: int = 0
    zpow: int = 0

    def __mul__(self, other: "Monomial") -> "Monomial":  # type: ignore[override]
        return Monomial(
            tuple(a + b for a, b in zip(self.beta, other.beta)),
            self.aux0 + other.aux0,
            self.zpow + other.zpow,
        )


@dataclass(frozen=True)
class Truncation:
    """Truncation bounds shared by a family of series.

    ``weights`` is the grading functional on Novikov exponents; the default
    pipeline uses ``weights[j] = D . beta_j``.  All weights must be positive so
    that the truncated ring is finite-dimensional in the Novikov direction.
    """

    weights: tuple[int, ...]
    order: int
    aux_max: int = 0
    zmin: int = 0
    zmax: int = 0

    def __post_init__(self):
        if any(w <= 0 for w in self.weights):
            raise SeriesError(f"grading weights must be positive, got {self.weights}")
        if self.order < 0 or self.aux_max < 0:
            raise SeriesError("truncation bounds must be non-negative")
        if self.zmin > self.zmax:
            raise SeriesError("empty z window")

    @property
    def nvars(self) -> int:
        return len(self.weights)

    def weight(self, beta: Iterable[int]) -> int:
        return sum(w * b for w, b in zip(self.weights, beta))

    def meet(self, other: "Truncation") -> "Truncation":
        if self.weights != other.weights:
            raise SeriesError(
                f"incompatible gradings {self.weights} and {other.weights}"
            )
        return Truncation(
            self.weights,
            min(self.order, other.order),
            min(self.aux_max, other.aux_max),
            max(self.zmin, other.zmin),
            min(self.zmax, other.zmax),
        )

    def with_order(self, order: int) -> "Truncation":
        return Truncation(self.weights, order, self.aux_max, self.zmin, self.zmax)

    def with_z(self, zmin: int, zmax: int) -> "Truncation":
        return Truncation(self.weights, self.order, self.aux_max, zmin, zmax)

    def with_aux(self, aux_max: int) -> "Truncation":
        return Truncation(self.weights, self.order, aux_max, self.zmin, self.zmax)


def _meet_rings(ra, rb):
    if ra is None:
        return rb
    if rb is None or ra is rb or ra == rb:
        return ra
    raise IncompatibleRingError("series have different coefficient rings")


# -- the series type ---------------------------------------------------------

class TruncSeries:
    """Immutable sparse truncated series.

    Construct through the classmethods (:meth:`zero`, :meth:`one`,
    :meth:`variable`, ...) or directly from a ``{Monomial: coeff}`` mapping.
    Monomials beyond the Novikov/aux bounds are dropped; z powers outside the
    window raise :class:`ZWindowError`.
    """

    __slots__ = ("_coeffs", "trunc", "ring")

    def __init__(self, coeffs: Mapping[Monomial, Any], trunc: Truncation, ring=None):
        self.trunc = trunc
        self.ring = ring
        clean: dict[Monomial, Any] = {}
        for m, c in coeffs.items():
            if not isinstance(m, Monomial):
                m = Monomial(*m)
            if len(m.beta) != trunc.nvars:
                raise SeriesError(f"monomial {m} has wrong number of Novikov variables")
            if any(b < 0 for b in m.beta) or m.aux0 < 0:
                raise SeriesError(f"negative exponent in {m}")
            if isinstance(c, int):
                c = Fraction(c)
            if _is_zero(c):
                continue
            if trunc.weight(m.beta) > trunc.order or m.aux0 > trunc.aux_max:
                continue
            if not trunc.zmin <= m.zpow <= trunc.zmax:
                raise ZWindowError(
                    f"z^{m.zpow} outside window [{trunc.zmin}, {trunc.zmax}]"
                )
            if ring is not None and isinstance(c, Fraction):
                c = ring.scalar(c)
            clean[m] = c
        self._coeffs = clean

    # constructors

    @classmethod
    def zero(cls, trunc: Truncation, ring=None) -> "TruncSeries":
        return cls({}, trunc, ring)

    @classmethod
    def constant(cls, c, trunc: Truncation, ring=None) -> "TruncSeries":
        return cls({Monomial((0,) * trunc.nvars): c}, trunc, ring)

    @classmethod
    def one(cls, trunc: Truncation, ring=None) -> "TruncSeries":
        return cls.constant(Fraction(1), trunc, ring)

    @classmethod
    def monomial(cls, beta, trunc: Truncation, coeff=Fraction(1), aux0=0, zpow=0,
                 ring=None) -> "TruncSeries":
        return cls({Monomial(tuple(beta), aux0, zpow): coeff}, trunc, ring)

    @classmethod
    def variable(cls, j: int, trunc: Truncation, ring=None) -> "TruncSeries":
        beta = [0] * trunc.nvars
        beta[j] = 1
        return cls.monomial(beta, trunc, ring=ring)

    @classmethod
    def z(cls, trunc: Truncation, power: int = 1, coeff=Fraction(1), ring=None):
        return cls.monomial((0,) * trunc.nvars, trunc, coeff, zpow=power, ring=ring)

    @classmethod
    def from_beta_dict(cls, data: Mapping, trunc: Truncation, ring=None):
        """Build a series from ``{beta_tuple: coeff}`` (no aux, no z)."""
        return cls({Monomial(tuple(b)): c for b, c in data.items()}, trunc, ring)

    # access

    def items(self) -> Iterator[tuple[Monomial, Any]]:
        return iter(self._coeffs.items())

    def monomials(self) -> list[Monomial]:
        return list(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def coefficient(self, beta=None, aux0: int = 0, zpow: int = 0):
        if beta is None:
            beta = (0,) * self.trunc.nvars
        m = Monomial(tuple(beta), aux0, zpow)
        c = self._coeffs.get(m)
        if c is None:
            return self.ring.zero() if self.ring is not None else Fraction(0)
        return c

    def constant_term(self):
        return self.coefficient()

    def is_zero(self) -> bool:
        return not self._coeffs

    def zpowers(self) -> list[int]:
        return sorted({m.zpow for m in self._coeffs})

    def as_beta_dict(self) -> dict[tuple[int, ...], Any]:
        """``{beta: coeff}`` for series without aux/z dependence."""
        out = {}
        for m, c in self._coeffs.items():
            if m.aux0 or m.zpow:
                raise SeriesError("series depends on aux0 or z")
            out[m.beta] = c
        return out

    def z_coefficient(self, zpow: int) -> "TruncSeries":
        """The coefficient of ``z^zpow`` as a series in the remaining variables."""
        return TruncSeries(
            {Monomial(m.beta, m.aux0, 0): c for m, c in self._coeffs.items()
             if m.zpow == zpow},
            self.trunc.with_z(min(0, self.trunc.zmin), max(0, self.trunc.zmax)),
            self.ring,
        )

    def aux_coefficient(self, aux0: int) -> "TruncSeries":
        return TruncSeries(
            {Monomial(m.beta, 0, m.zpow): c for m, c in self._coeffs.items()
             if m.aux0 == aux0},
            self.trunc,
            self.ring,
        )

    def map_coefficients(self, f: Callable, ring=None) -> "TruncSeries":
        return TruncSeries({m: f(c) for m, c in self._coeffs.items()}, self.trunc, ring)

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries(self._coeffs, self.trunc.with_order(min(order, self.trunc.order)),
                           self.ring)

    def retruncate(self, trunc: Truncation) -> "TruncSeries":
        return TruncSeries(self._coeffs, trunc, self.ring)

    def lift(self, ring) -> "TruncSeries":
        """View a scalar series (or one over a subring) as a series over ``ring``."""
        if self.ring is ring:
            return self
        if self.ring is None:
            return TruncSeries(self._coeffs, self.trunc, ring)
        return self.map_coefficients(ring.lift, ring)

    # arithmetic

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(Fraction(other), self.trunc, self.ring)
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if set(self._coeffs) != set(other._coeffs):
            return False
        return all(_is_zero(self._coeffs[m] - other._coeffs[m]) for m in self._coeffs)

    __hash__ = None  # type: ignore[assignment]

    def __neg__(self) -> "TruncSeries":
        return TruncSeries({m: -c for m, c in self._coeffs.items()}, self.trunc, self.ring)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(Fraction(other), self.trunc, self.ring)
        return series_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(Fraction(other), self.trunc, self.ring)
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, TruncSeries):
            return series_mul(self, other)
        # ring element acting as a constant
        return TruncSeries({m: c * other for m, c in self._coeffs.items()},
                           self.trunc, self.ring if self.ring is not None else other.ring)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return series_mul(self, series_inverse(other))

    def __pow__(self, k: int) -> "TruncSeries":
        if k < 0:
            return series_inverse(self) ** (-k)
        result = TruncSeries.one(self.trunc, self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "TruncSeries":
        c = as_fraction(c)
        return TruncSeries({m: v * c for m, v in self._coeffs.items()}, self.trunc, self.ring)

    def exp(self) -> "TruncSeries":
        return series_exp(self)

    def log(self) -> "TruncSeries":
        return series_log(self)

    def inverse(self) -> "TruncSeries":
        return series_inverse(self)

    def substitute(self, assignment) -> "TruncSeries":
        return series_substitute(self, assignment)

    def __repr__(self) -> str:
        if not self._coeffs:
            return "TruncSeries(0)"
        parts = []
        for m in sorted(self._coeffs, key=lambda m: (self.trunc.weight(m.beta), m)):
            parts.append(f"({self._coeffs[m]})*{_mono_str(m)}")
        return "TruncSeries(" + " + ".join(parts) + f"; order={self.trunc.order})"


def _mono_str(m: Monomial) -> str:
    bits = [f"y{j}^{b}" for j, b in enumerate(m.beta) if b]
    if m.aux0:
        bits.append(f"y_aux^{m.aux0}")
    if m.zpow:
        bits.append(f"z^{m.zpow}")
    return "*".join(bits) or "1"


# -- operations --------------------------------------------------------------

def series_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    ring = _meet_rings(a.ring, b.ring)
    trunc = a.trunc.meet(b.trunc)
    out = dict(a._coeffs)
    for m, c in b._coeffs.items():
        if m in out:
            out[m] = out[m] + c
        else:
            out[m] = c
    return TruncSeries(out, trunc, ring)


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """Truncated Cauchy product."""
    ring = _meet_rings(a.ring, b.ring)
    trunc = a.trunc.meet(b.trunc)
    if a.ring is None and ring is not None:
        a = a.lift(ring)
    if b.ring is None and ring is not None:
        b = b.lift(ring)
    order, aux_max = trunc.order, trunc.aux_max
    bw = sorted(
        ((trunc.weight(m.beta), m, c) for m, c in b._coeffs.items()),
        key=lambda t: t[0],
    )
    out: dict[Monomial, Any] = {}
    for ma, ca in a._coeffs.items():
        wa = trunc.weight(ma.beta)
        if wa > order:
            continue
        for wb, mb, cb in bw:
            if wa + wb > order:
                break
            if ma.aux0 + mb.aux0 > aux_max:
                continue
            m = ma * mb
            prod = ca * cb
            if m in out:
                out[m] = out[m] + prod
            else:
                out[m] = prod
    return TruncSeries(out, trunc, ring)


def _positive_part_check(a: TruncSeries, skip_unit: bool) -> None:
    """Every term must be nilpotent in the truncated algebra."""
    for m, c in a.items():
        if skip_unit and m == Monomial((0,) * a.trunc.nvars):
            continue
        if a.trunc.weight(m.beta) == 0 and m.aux0 == 0 and not _is_nilpotent(c):
            raise ConstantTermError(
                f"term {_mono_str(m)} with coefficient {c} is not nilpotent"
            )


def _power_sum(x: TruncSeries, coeff: Callable[[int], Fraction]) -> TruncSeries:
    """sum_{k>=1} coeff(k) x^k for nilpotent x; stops when x^k vanishes."""
    total = TruncSeries.zero(x.trunc, x.ring)
    power = x
    k = 1
    while not power.is_zero():
        total = total + power.scale(coeff(k))
        power = power * x
        k += 1
    return total


def series_exp(a: TruncSeries) -> TruncSeries:
    """exp(a) for a with zero constant term (coefficients must commute)."""
    if not _is_zero(a.constant_term()):
        raise ConstantTermError("exp needs a zero constant term")
    _positive_part_check(a, skip_unit=False)
    return TruncSeries.one(a.trunc, a.ring) + _power_sum(
        a, lambda k: Fraction(1, math.factorial(k))
    )


def series_log(a: TruncSeries) -> TruncSeries:
    """log(a) for a with constant term exactly 1."""
    c0 = a.constant_term()
    if not (_unit_part(c0) == 1 and _is_nilpotent(c0 - (a.ring.one() if a.ring else 1))):
        raise ConstantTermError("log needs constant term 1")
    x = a - TruncSeries.one(a.trunc, a.ring)
    _positive_part_check(x, skip_unit=False)
    return _power_sum(x, lambda k: Fraction((-1) ** (k + 1), k))


def series_inverse(a: TruncSeries) -> TruncSeries:
    """Multiplicative inverse.

    The Novikov/aux-degree-zero part must consist of exactly one monomial
    ``u z^m`` whose coefficient has an invertible scalar part ``u``, plus
    nilpotent terms; the rest is expanded geometrically.  This covers
    ``1 - y`` as well as ``z + h`` with ``h`` nilpotent.
    """
    lead = [
        (m, c) for m, c in a.items()
        if a.trunc.weight(m.beta) == 0 and m.aux0 == 0 and not _is_nilpotent(c)
    ]
    if len(lead) != 1:
        raise NotInvertibleError(
            "series has no unique invertible leading term"
            if lead else "series has no invertible term"
        )
    m0, c0 = lead[0]
    u = _unit_part(c0)
    # a = u z^m0 (1 + x)
    shift = TruncSeries.monomial(m0.beta, a.trunc, Fraction(1) / u, zpow=-m0.zpow,
                                 ring=a.ring)
    x = a * shift - TruncSeries.one(a.trunc, a.ring)
    _positive_part_check(x, skip_unit=False)
    geom = TruncSeries.one(a.trunc, a.ring) + _power_sum(x, lambda k: Fraction((-1) ** k))
    return geom * shift


def series_substitute(a: TruncSeries, assignment: Mapping[int, TruncSeries]) -> TruncSeries:
    """Formal composition ``a(y_j -> assignment[j])``.

    Variables not in ``assignment`` are left alone.  Each substituted series
    must only contain terms of weight ``>= weights[j]`` so that truncation of
    ``a`` commutes with the substitution.  The aux and z parts of ``a``'s
    monomials are carried through unchanged.
    """
    trunc = a.trunc
    ring = a.ring
    subs: dict[int, TruncSeries] = {}
    for j in range(trunc.nvars):
        if j in assignment:
            s = assignment[j]
            w = trunc.weights[j]
            for m, _ in s.items():
                if s.trunc.weight(m.beta) < w:
                    raise SubstitutionError(
                        f"substituting y{j} by a series with a term {_mono_str(m)} "
                        f"of weight below {w} would break truncation"
                    )
            trunc = trunc.meet(s.trunc)
            ring = _meet_rings(ring, s.ring)
            subs[j] = s
        else:
            subs[j] = TruncSeries.variable(j, trunc)
    for j in subs:
        subs[j] = subs[j].retruncate(trunc)
    powers: dict[int, list[TruncSeries]] = {j: [TruncSeries.one(trunc)] for j in subs}

    def power(j: int, e: int) -> TruncSeries:
        cache = powers[j]
        while len(cache) <= e:
            cache.append(cache[-1] * subs[j])
        return cache[e]

    total = TruncSeries.zero(trunc, ring)
    for m, c in a.items():
        term = TruncSeries({Monomial((0,) * trunc.nvars, m.aux0, m.zpow): c}, trunc, a.ring)
        for j, e in enumerate(m.beta):
            if e:
                term = term * power(j, e)
                if term.is_zero():
                    break
        total = total + term
    return total
