"""Graded commutative rings given by structure constants.

Only even cohomology is modelled, so every ring here is commutative.  Degrees
are complex degrees.  The P^1-bundle ring ``H*(X)[h]/(h^2 - D h)`` is built
mechanically from the base ring by :meth:`BundleRing.from_base`.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import sympy

__all__ = [
    "RingError",
    "GradedRing",
    "RingElement",
    "BundleRing",
    "ring_mul",
    "integrate",
    "identity_component",
    "collapse_h",
]


class RingError(ValueError):
    pass


class RingElement:
    """A vector of exact rationals over the basis of a :class:`GradedRing`."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: "GradedRing", coords: Sequence):
        if len(coords) != ring.dim:
            raise RingError(f"expected {ring.dim} coordinates, got {len(coords)}")
        self.ring = ring
        self.coords = tuple(Fraction(c) for c in coords)

    def _check(self, other: "RingElement") -> None:
        if self.ring is not other.ring and self.ring != other.ring:
            raise RingError("ring elements live in different rings")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.scalar(other)
        self._check(other)
        return RingElement(self.ring, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.ring, [-a for a in self.coords])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RingElement(self.ring, [a * other for a in self.coords])
        if not isinstance(other, RingElement):
            return NotImplemented
        self._check(other)
        return self.ring.multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.scalar(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.coords == other.coords and (self.ring is other.ring or self.ring == other.ring)

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def unit_part(self) -> Fraction:
        return self.coords[self.ring.unit]

    def is_nilpotent(self) -> bool:
        # connected grading: nilpotent iff the degree-0 part vanishes
        return self.coords[self.ring.unit] == 0

    def degrees(self) -> set[int]:
        return {self.ring.degrees[i] for i, c in enumerate(self.coords) if c}

    def is_homogeneous(self, degree: int) -> bool:
        return self.degrees() <= {degree}

    def __repr__(self):
        terms = [f"{c}*{n}" for c, n in zip(self.coords, self.ring.names) if c]
        return " + ".join(terms) if terms else "0"


class GradedRing:
    """Finite-dimensional graded commutative ring.

    Parameters
    ----------
    names, degrees:
        Basis element labels and their complex degrees.
    structconst:
        ``{(i, j): {k: c}}`` with ``b_i * b_j = sum_k c b_k``.  Only one of
        ``(i, j)`` / ``(j, i)`` needs to be given; conflicting entries are an error.
    point:
        Index of the top-degree point class; the integral is its coordinate.
    """

    def __init__(self, names: Sequence[str], degrees: Sequence[int],
                 structconst: Mapping[tuple[int, int], Mapping[int, Fraction]],
                 point: int, unit: int | None = None, *, validate: bool = True):
        self.names = tuple(names)
        self.degrees = tuple(int(d) for d in degrees)
        self.dim = len(self.names)
        if len(self.degrees) != self.dim:
            raise RingError("names and degrees differ in length")
        if unit is None:
            zeros = [i for i, d in enumerate(self.degrees) if d == 0]
            if len(zeros) != 1:
                raise RingError("ring must have exactly one degree-0 basis element")
            unit = zeros[0]
        self.unit = unit
        self.point = point
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), row in structconst.items():
            row = {k: Fraction(c) for k, c in row.items() if Fraction(c) != 0}
            for key in ((i, j), (j, i)):
                if key in table and table[key] != row:
                    raise RingError(f"structure constants for {key} are not symmetric")
            table[(i, j)] = row
            table[(j, i)] = row
        for i in range(self.dim):
            table.setdefault((unit, i), {i: Fraction(1)})
            table.setdefault((i, unit), {i: Fraction(1)})
        self._table = {key: tuple(row.items()) for key, row in table.items()}
        self._key = (self.names, self.degrees,
                     tuple(sorted((k, v) for k, v in self._table.items())), point, unit)
        if validate:
            self.check_axioms()

    # equality is structural so that reloaded geometries compare equal
    def __eq__(self, other):
        return isinstance(other, GradedRing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(self.names)})"

    @property
    def top_degree(self) -> int:
        return self.degrees[self.point]

    # elements

    def element(self, coords: Sequence) -> RingElement:
        return RingElement(self, coords)

    def zero(self) -> RingElement:
        return RingElement(self, [0] * self.dim)

    def basis_element(self, i: int) -> RingElement:
        coords = [0] * self.dim
        coords[i] = 1
        return RingElement(self, coords)

    def scalar(self, c) -> RingElement:
        coords = [0] * self.dim
        coords[self.unit] = Fraction(c)
        return RingElement(self, coords)

    def one(self) -> RingElement:
        return self.scalar(1)

    def by_name(self, name: str) -> RingElement:
        return self.basis_element(self.names.index(name))

    def lift(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scalar(c)
        if c.ring == self:
            return c
        raise RingError(f"cannot lift an element of {c.ring} to {self}")

    # products

    def structure_constant(self, i: int, j: int) -> dict[int, Fraction]:
        return dict(self._table.get((i, j), ()))

    def multiply(self, a: RingElement, b: RingElement) -> RingElement:
        out = [Fraction(0)] * self.dim
        table = self._table
        for i, ca in enumerate(a.coords):
            if not ca:
                continue
            for j, cb in enumerate(b.coords):
                if not cb:
                    continue
                for k, c in table.get((i, j), ()):
                    out[k] += ca * cb * c
        return RingElement(self, out)

    def integral(self, a: RingElement) -> Fraction:
        return a.coords[self.point]

    def pairing_matrix(self) -> list[list[Fraction]]:
        basis = [self.basis_element(i) for i in range(self.dim)]
        return [[self.integral(x * y) for y in basis] for x in basis]

    def dual_basis(self) -> list[RingElement]:
        """Elements ``b^i`` with ``integral(b_i * b^j) = delta_ij``."""
        m = sympy.Matrix(self.pairing_matrix())
        if m.det() == 0:
            raise RingError("Poincare pairing is degenerate")
        inv = m.inv()
        # b^j = sum_k inv[k, j] b_k   (pairing matrix is symmetric)
        return [
            self.element([Fraction(int(inv[k, j].p), int(inv[k, j].q)) for k in range(self.dim)])
            for j in range(self.dim)
        ]

    def check_axioms(self) -> None:
        """Exhaustive commutativity/associativity/grading checks on basis triples."""
        n = self.dim
        if self.degrees[self.unit] != 0:
            raise RingError("unit must have degree 0")
        top = max(self.degrees)
        if self.degrees[self.point] != top:
            raise RingError("point class must have top degree")
        if sum(1 for d in self.degrees if d == top) != 1:
            raise RingError("top degree must be one-dimensional")
        e = [self.basis_element(i) for i in range(n)]
        for i, j in product(range(n), repeat=2):
            row = self.structure_constant(i, j)
            if row != self.structure_constant(j, i):
                raise RingError(f"not commutative on ({self.names[i]}, {self.names[j]})")
            for k in row:
                if self.degrees[k] != self.degrees[i] + self.degrees[j]:
                    raise RingError(
                        f"{self.names[i]}*{self.names[j]} has a term outside degree "
                        f"{self.degrees[i] + self.degrees[j]}"
                    )
        for i, j, k in product(range(n), repeat=3):
            if (e[i] * e[j]) * e[k] != e[i] * (e[j] * e[k]):
                raise RingError(
                    f"not associative on ({self.names[i]}, {self.names[j]}, {self.names[k]})"
                )
        if self.integral(e[self.point]) != 1:
            raise RingError("integral(point) must be 1")
        if sympy.Matrix(self.pairing_matrix()).det() == 0:
            raise RingError("Poincare pairing is degenerate")


class BundleRing(GradedRing):
    """``R = H*(X)[h] / (h^2 - D h)`` with basis ``{b_a} + {h b_a}``.

    Integration is normalized by ``integral(h * pt_X) = 1``.
    """

    def __init__(self, base: GradedRing, divisor: RingElement):
        if divisor.ring != base:
            raise RingError("divisor must live in the base ring")
        if not divisor.is_homogeneous(1):
            raise RingError("divisor class must have degree 1")
        n = base.dim
        names = list(base.names) + [f"h*{x}" if base.degrees[i] else "h"
                                    for i, x in enumerate(base.names)]
        degrees = list(base.degrees) + [d + 1 for d in base.degrees]
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i, j in product(range(n), repeat=2):
            bij = base.structure_constant(i, j)
            table[(i, j)] = dict(bij)
            table[(i, n + j)] = {n + k: c for k, c in bij.items()}
            # h b_i * h b_j = h * (D b_i b_j)
            dbij = (divisor * base.element(
                [bij.get(k, 0) for k in range(n)])).coords
            table[(n + i, n + j)] = {n + k: c for k, c in enumerate(dbij) if c}
        self.base = base
        self.divisor = divisor
        super().__init__(names, degrees, table, point=n + base.point, unit=base.unit)

    @classmethod
    def from_base(cls, base: GradedRing, divisor: RingElement) -> "BundleRing":
        return cls(base, divisor)

    @property
    def h(self) -> RingElement:
        return self.basis_element(self.base.dim + self.base.unit)

    def lift(self, c):
        if isinstance(c, RingElement) and c.ring == self.base:
            return self.element(list(c.coords) + [0] * self.base.dim)
        return super().lift(c)

    def collapse(self, a: RingElement) -> RingElement:
        if a.ring != self:
            raise RingError("element is not in this bundle ring")
        return self.base.element(a.coords[: self.base.dim])

    def h_part(self, a: RingElement) -> RingElement:
        """``b`` with ``a = collapse(a) + h * b``."""
        return self.base.element(a.coords[self.base.dim:])


# -- module-level operations -------------------------------------------------

def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    if a.ring != b.ring:
        raise RingError("ring elements live in different rings")
    return a * b


def integrate(a: RingElement) -> Fraction:
    return a.ring.integral(a)


def identity_component(a: RingElement) -> Fraction:
    return a.unit_part()


def collapse_h(a: RingElement) -> RingElement:
    """Image under the ring map ``h -> 0`` onto the base ring."""
    if not isinstance(a.ring, BundleRing):
        raise RingError("collapse_h needs an element of a bundle ring")
    return a.ring.collapse(a)


def basis_pairs(ring: GradedRing) -> Iterable[tuple[RingElement, RingElement]]:
    e = [ring.basis_element(i) for i in range(ring.dim)]
    return product(e, repeat=2)
