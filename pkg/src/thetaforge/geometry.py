"""Target geometries: toric data, curve lattice, the divisor D and the P^1-bundle.

Geometries are loaded from a JSON document (see ``GEOMETRY_SCHEMA``); the
built-ins ``p2``, ``p1xp1`` and ``f1`` ship as package data and go through the
same loader.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterator, Sequence

import jsonschema
import sympy

from .cohomology import BundleRing, GradedRing, RingElement, RingError
from .exactmath import Truncation, as_fraction

__all__ = [
    "GeometryError",
    "ExperimentalWarning",
    "CurveClass",
    "TargetGeometry",
    "BundleGeometry",
    "GEOMETRY_SCHEMA",
    "BUILTIN_GEOMETRIES",
    "load_geometry",
    "build_p1_bundle",
    "validate_fano_smallJ",
]

BUILTIN_GEOMETRIES = ("p2", "p1xp1", "f1")


class GeometryError(ValueError):
    pass


class ExperimentalWarning(UserWarning):
    """Raised when a pipeline runs outside the log Calabi-Yau hypothesis."""


_RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*-?\d+\s*(/\s*\d+\s*)?$"},
    ]
}

GEOMETRY_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["name", "basis", "structconst", "toricdivisors", "moripairings", "D", "point"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "basis": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "degree"],
                "properties": {
                    "name": {"type": "string"},
                    "degree": {"type": "integer", "minimum": 0},
                },
            },
        },
        "structconst": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer", "minimum": 0}] * 3 + [_RATIONAL],
                "minItems": 4,
                "maxItems": 4,
            },
        },
        "toricdivisors": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": _RATIONAL},
        },
        "moripairings": {
            "type": "array",
            "items": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
        },
        "D": {"type": "array", "items": _RATIONAL},
        "point": {"type": "integer", "minimum": 0},
        "unit": {"type": "integer", "minimum": 0},
    },
}


@dataclass(frozen=True, order=True)
class CurveClass:
    """Integer vector in the basis of Mori generators."""

    components: tuple[int, ...]

    def __init__(self, components: Sequence[int]):
        object.__setattr__(self, "components", tuple(int(c) for c in components))

    @property
    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.components)

    @property
    def is_zero(self) -> bool:
        return not any(self.components)

    def __add__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass([a - b for a, b in zip(self.components, other.components)])

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __str__(self) -> str:
        return json.dumps(list(self.components))


def _as_tuple(beta) -> tuple[int, ...]:
    return beta.components if isinstance(beta, CurveClass) else tuple(beta)


@dataclass(frozen=True)
class TargetGeometry:
    name: str
    ring: GradedRing
    nef_indices: tuple[int, ...]
    toricdivisors: tuple[RingElement, ...]
    moripairings: tuple[tuple[int, ...], ...]   # <D_i, beta_j>
    nefpairings: tuple[tuple[int, ...], ...]    # <p_k, beta_j>
    D: RingElement
    anticanonical: RingElement
    source_hash: str = field(compare=False)
    document: str = field(compare=False, repr=False)

    @property
    def nefbasis(self) -> list[RingElement]:
        return [self.ring.basis_element(i) for i in self.nef_indices]

    @property
    def log_cy(self) -> bool:
        return self.D == self.anticanonical

    @property
    def rank(self) -> int:
        """Number of Mori generators (Novikov variables)."""
        return len(self.moripairings[0])

    @property
    def dimension(self) -> int:
        return self.ring.top_degree

    def D_coefficients(self) -> list[Fraction]:
        """``d_k`` with ``D = sum_k d_k p_k``."""
        return [self.D.coords[i] for i in self.nef_indices]

    @property
    def D_weights(self) -> tuple[int, ...]:
        """``D . beta_j`` for each Mori generator."""
        d = self.D_coefficients()
        out = []
        for j in range(self.rank):
            v = sum(d[k] * self.nefpairings[k][j] for k in range(len(d)))
            if v.denominator != 1:
                raise GeometryError("D . beta is not an integer")
            out.append(int(v))
        return tuple(out)

    def D_degree(self, beta) -> int:
        return sum(w * b for w, b in zip(self.D_weights, _as_tuple(beta)))

    def c1_degree(self, beta) -> int:
        return sum(self.toric_pairings(beta))

    def toric_pairings(self, beta) -> list[int]:
        b = _as_tuple(beta)
        return [sum(row[j] * b[j] for j in range(self.rank)) for row in self.moripairings]

    def pairing(self, k: int, beta) -> int:
        """``p_k . beta`` for the k-th nef basis element."""
        b = _as_tuple(beta)
        return sum(self.nefpairings[k][j] * b[j] for j in range(self.rank))

    def grading_weights(self, grading: str = "D") -> tuple[int, ...]:
        if grading == "D":
            return self.D_weights
        if grading == "degree":
            return (1,) * self.rank
        raise GeometryError(f"unknown grading {grading!r}")

    def truncation(self, order: int, grading: str = "D", **kw) -> Truncation:
        return Truncation(self.grading_weights(grading), order, **kw)

    def effective_classes(self, order: int, grading: str = "D",
                          include_zero: bool = False) -> list[CurveClass]:
        """Effective classes of graded degree ``<= order``, sorted by (degree, components)."""
        weights = self.grading_weights(grading)
        if any(w <= 0 for w in weights):
            raise GeometryError(f"grading {grading!r} is not positive on all Mori generators")
        out: list[CurveClass] = []

        def rec(j: int, prefix: list[int], used: int) -> Iterator[None]:
            if j == len(weights):
                out.append(CurveClass(prefix))
                return
            e = 0
            while used + e * weights[j] <= order:
                rec(j + 1, prefix + [e], used + e * weights[j])
                e += 1

        rec(0, [], 0)
        if not include_zero:
            out = [b for b in out if not b.is_zero]
        return sorted(out, key=lambda b: (sum(w * x for w, x in zip(weights, b)), b.components))

    def require_log_cy(self, experimental: bool = False, what: str = "pipeline") -> None:
        if self.log_cy:
            return
        if not experimental:
            raise GeometryError(
                f"{self.name}: D is not anticanonical; {what} needs a log Calabi-Yau pair "
                "(use experimental mode to proceed)"
            )
        warnings.warn(
            f"{self.name}: D is not anticanonical; {what} results are experimental",
            ExperimentalWarning,
            stacklevel=3,
        )


@dataclass(frozen=True)
class BundleGeometry:
    """``P = P(O_X(-D) + O_X)`` with ``h = c_1(O_P(1))`` and fibre class ``f``.

    Curve classes of P are written ``beta + n f`` with beta lifted along the
    zero section, so ``h . (beta + n f) = n``.
    """

    base: TargetGeometry
    ring: BundleRing

    @property
    def h(self) -> RingElement:
        return self.ring.h

    @property
    def fiber_index(self) -> int:
        return self.base.rank

    def curve_class(self, beta, n: int) -> CurveClass:
        return CurveClass(_as_tuple(beta) + (n,))

    def split(self, cls: CurveClass) -> tuple[CurveClass, int]:
        c = cls.components
        return CurveClass(c[:-1]), c[-1]

    def h_degree(self, cls: CurveClass) -> int:
        return self.split(cls)[1]

    def pairing(self, k: int, cls: CurveClass) -> int:
        beta, _ = self.split(cls)
        return self.base.pairing(k, beta)

    def D_degree(self, cls: CurveClass) -> int:
        beta, _ = self.split(cls)
        return self.base.D_degree(beta)

    def lift(self, a: RingElement) -> RingElement:
        return self.ring.lift(a)

    @property
    def D(self) -> RingElement:
        return self.lift(self.base.D)


# -- loading -----------------------------------------------------------------

def _fractions(values) -> list[Fraction]:
    return [as_fraction(v) for v in values]


def _solve_nef_pairings(ring: GradedRing, nef: Sequence[int],
                        toric: Sequence[RingElement],
                        mori: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Solve ``T P = M`` for the pairing ``P[k][j] = <p_k, beta_j>``."""
    t = sympy.Matrix([[sympy.Rational(str(d.coords[i])) for i in nef] for d in toric])
    m = sympy.Matrix(mori)
    if t.rank() != len(nef):
        raise GeometryError("toric divisors do not span H^2")
    p = (t.T * t).inv() * t.T * m
    if t * p != m:
        raise GeometryError("Mori pairings are inconsistent with the toric divisor classes")
    if any(not x.is_integer for x in p):
        raise GeometryError("nef basis pairings with Mori generators are not integral")
    if p.rank() != min(p.shape) or p.shape[0] != p.shape[1]:
        raise GeometryError("pairing matrix <p_i, beta_j> is not of full rank")
    return tuple(tuple(int(x) for x in p.row(k)) for k in range(p.rows))


def _canonical_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def geometry_from_document(doc: dict) -> TargetGeometry:
    try:
        jsonschema.validate(doc, GEOMETRY_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise GeometryError(f"schema violation: {exc.message}") from exc
    names = [b["name"] for b in doc["basis"]]
    degrees = [b["degree"] for b in doc["basis"]]
    n = len(names)
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, j, k, c in doc["structconst"]:
        if max(i, j, k) >= n:
            raise GeometryError(f"structure constant index out of range: {(i, j, k)}")
        row = table.setdefault((i, j), {})
        row[k] = row.get(k, Fraction(0)) + as_fraction(c)
    # mirror each given (i, j) so that a one-sided listing is enough
    for (i, j), row in list(table.items()):
        if (j, i) not in table:
            table[(j, i)] = dict(row)
    if doc["point"] >= n:
        raise GeometryError("point index out of range")
    try:
        ring = GradedRing(names, degrees, table, point=doc["point"], unit=doc.get("unit"))
    except RingError as exc:
        raise GeometryError(f"ring axiom failure: {exc}") from exc

    def vec(values, what):
        if len(values) != n:
            raise GeometryError(f"{what} must have {n} coordinates")
        return ring.element(_fractions(values))

    toric = [vec(v, "toric divisor") for v in doc["toricdivisors"]]
    for d in toric:
        if not d.is_homogeneous(1):
            raise GeometryError("toric divisor classes must have degree 1")
    D = vec(doc["D"], "D")
    if not D.is_homogeneous(1) or D.is_zero():
        raise GeometryError("D must be a nonzero degree-1 class")
    mori = doc["moripairings"]
    if len(mori) != len(toric) or len({len(r) for r in mori}) != 1:
        raise GeometryError("moripairings must be a (#toric divisors) x (#Mori generators) matrix")
    nef = tuple(i for i, d in enumerate(degrees) if d == 1)
    nefpair = _solve_nef_pairings(ring, nef, toric, mori)
    anti = ring.zero()
    for d in toric:
        anti = anti + d
    geom = TargetGeometry(
        name=doc["name"],
        ring=ring,
        nef_indices=nef,
        toricdivisors=tuple(toric),
        moripairings=tuple(tuple(r) for r in mori),
        nefpairings=nefpair,
        D=D,
        anticanonical=anti,
        source_hash=hashlib.sha256(_canonical_document(doc).encode()).hexdigest(),
        document=_canonical_document(doc),
    )
    bad = [j for j, w in enumerate(geom.D_weights) if w < 0]
    if bad:
        raise GeometryError(f"D not nef: D . beta_{bad[0]} = {geom.D_weights[bad[0]]}")
    return geom


@lru_cache(maxsize=None)
def _load_builtin(name: str) -> TargetGeometry:
    text = resources.files("thetaforge.data").joinpath(f"{name}.json").read_text()
    return geometry_from_document(json.loads(text))


def load_geometry(config) -> TargetGeometry:
    """Load a geometry from a built-in name, a JSON file path or a parsed document."""
    if isinstance(config, TargetGeometry):
        return config
    if isinstance(config, dict):
        return geometry_from_document(config)
    if isinstance(config, str) and config in BUILTIN_GEOMETRIES:
        return _load_builtin(config)
    path = Path(config)
    if not path.is_file():
        raise GeometryError(
            f"unknown geometry {str(config)!r} (built-ins: {', '.join(BUILTIN_GEOMETRIES)})"
        )
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GeometryError(f"{path}: invalid JSON: {exc}") from exc
    return geometry_from_document(doc)


@lru_cache(maxsize=None)
def build_p1_bundle(X: TargetGeometry) -> BundleGeometry:
    return BundleGeometry(X, BundleRing.from_base(X.ring, X.D))


# -- checks ------------------------------------------------------------------

def validate_fano_smallJ(X: TargetGeometry, order: int, grading: str = "D"):
    """Check that every degree-beta part of ``z J_X`` is ``O(1/z)``.

    That is the shape ``J = z + 0 z^0 + O(1/z)`` on each degree, which makes
    the toric mirror map trivial.  Returns a :class:`~thetaforge.reports.CheckReport`
    listing offending classes.
    """
    from .givental import toric_J_coefficient
    from .reports import CheckReport

    report = CheckReport("fano_small_J", geometry=X.name)
    for beta in X.effective_classes(order, grading):
        report.checked += 1
        zJ = toric_J_coefficient(X, beta).zJ()
        bad = [k for k in zJ.zpowers() if k >= 0]
        if bad:
            report.fail(beta=str(beta), nonnegative_z_powers=bad)
    return report
