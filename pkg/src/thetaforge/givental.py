"""Hypergeometric J/I-function engine.

Everything here works with the *stripped* functions: the exponential
prefactor ``exp(sum p_i log q_i / z)`` is removed and, for the toric J-function,
so is the overall factor ``z``.  Laurent expansions in ``1/z`` are exact
because every class that gets inverted is ``c + a z`` with ``c`` nilpotent.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cohomology import GradedRing, RingElement
from .exactmath import Monomial, Truncation, TruncSeries, ZWindowError
from .geometry import BundleGeometry, CurveClass, TargetGeometry, _as_tuple
from .reports import CheckReport

__all__ = [
    "OutOfRangeError",
    "ShapeError",
    "JCoefficient",
    "IEFactorization",
    "factor_block",
    "toric_J_coefficient",
    "one_point_descendant",
    "i_function_E",
    "i_function_term",
    "mirror_map_correction",
    "reduced_extraction_check",
]


class OutOfRangeError(ValueError):
    pass


class ShapeError(RuntimeError):
    """A J/I coefficient does not have the shape the extraction relies on."""


def _zwindow(span: int) -> Truncation:
    return Truncation((), 0, 0, -span, span)


def _linear(c: RingElement, a: int, trunc: Truncation) -> TruncSeries:
    """``c + a z`` as a z-only series."""
    return TruncSeries({Monomial((), 0, 0): c, Monomial((), 0, 1): Fraction(a)}, trunc, c.ring)


def factor_block(c: RingElement, m: int, trunc: Truncation) -> TruncSeries:
    """``prod_{a<=0}(c + a z) / prod_{a<=m}(c + a z)``.

    For ``m >= 0`` this is ``1 / prod_{a=1}^{m}(c + a z)``; for ``m < 0`` the
    denominator stops early and the leftover factors ``a = m+1 .. 0`` stay in
    the numerator.
    """
    out = TruncSeries.one(trunc, c.ring)
    if m >= 0:
        for a in range(1, m + 1):
            out = out * _linear(c, a, trunc).inverse()
    else:
        for a in range(m + 1, 1):
            out = out * _linear(c, a, trunc)
    return out


@dataclass(frozen=True)
class JCoefficient:
    beta: CurveClass
    series: TruncSeries   # z-only, coefficients in H*(X)

    @property
    def laurent(self) -> dict[int, RingElement]:
        return {m.zpow: c for m, c in self.series.items()}

    def zJ(self) -> TruncSeries:
        """``z * J_beta``; this is the degree-beta part of the unstripped ``J_X / e^{...}``."""
        return self.series * TruncSeries.z(self.series.trunc)


def _span_for(X: TargetGeometry, beta) -> int:
    return sum(abs(x) for x in X.toric_pairings(beta)) + 2 * X.ring.top_degree + 8


@lru_cache(maxsize=4096)
def _toric_J(X: TargetGeometry, beta: tuple[int, ...], span: int) -> JCoefficient:
    trunc = _zwindow(span)
    out = TruncSeries.one(trunc, X.ring)
    for Di, m in zip(X.toricdivisors, X.toric_pairings(beta)):
        out = out * factor_block(Di, m, trunc)
    return JCoefficient(CurveClass(beta), out)


def toric_J_coefficient(X: TargetGeometry, beta, zwindow: int | None = None) -> JCoefficient:
    """``prod_i prod_{a<=0}(D_i + a z) / prod_{a<=D_i.beta}(D_i + a z)`` expanded in ``1/z``."""
    b = _as_tuple(beta)
    if len(b) != X.rank:
        raise ValueError(f"curve class {b} has wrong length for {X.name}")
    if any(x < 0 for x in b):
        raise ValueError(f"curve class {b} is not effective")
    span = _span_for(X, b) if zwindow is None else zwindow
    try:
        return _toric_J(X, b, span)
    except ZWindowError as exc:
        raise ZWindowError(f"z window {span} too small for beta={b}: {exc}") from exc


@lru_cache(maxsize=None)
def _prefactor_is_harmless(ring: GradedRing) -> bool:
    # positive-degree classes times anything never reach the unit slot, so the
    # e^{p log q / z} prefactor cannot feed the [1]-component
    for i in range(ring.dim):
        if ring.degrees[i] == 0:
            continue
        for j in range(ring.dim):
            if ring.structure_constant(i, j).get(ring.unit):
                return False
    return True


def one_point_descendant(X: TargetGeometry, beta) -> Fraction:
    """``<[pt] psi^{D.beta-2}>_{0,1,beta}`` read off the toric J-function.

    Takes the identity component of the ``z^{-(D.beta-1)}`` coefficient of
    ``z J_beta``, after checking that every coefficient of ``z J_beta`` is
    homogeneous of the expected degree.
    """
    b = _as_tuple(beta)
    dB = X.D_degree(b)
    if dB < 2:
        raise OutOfRangeError(f"out of range: D.beta = {dB} < 2 for beta={list(b)}")
    zJ = toric_J_coefficient(X, b).zJ()
    c1 = X.c1_degree(b)
    for m, c in zJ.items():
        expected = 1 - c1 - m.zpow
        if not c.is_homogeneous(expected):
            raise ShapeError(
                f"coefficient of z^{m.zpow} in zJ_{list(b)} is not homogeneous of degree {expected}"
            )
    if not _prefactor_is_harmless(X.ring):
        raise ShapeError("prefactor could contaminate the identity component")
    return zJ.coefficient(zpow=-(dB - 1)).unit_part()


# -- the I-function of E = O_P(-X_inf) + O_P(-X_inf) -------------------------

@dataclass(frozen=True)
class IEFactorization:
    beta: CurveClass
    n: int
    block_h: TruncSeries
    block_hD: TruncSeries
    block_negh_single: TruncSeries

    @property
    def block_negh(self) -> TruncSeries:
        return self.block_negh_single * self.block_negh_single

    def product(self) -> TruncSeries:
        return self.block_h * self.block_hD * self.block_negh


def _bundle_span(P: BundleGeometry, beta, n: int) -> int:
    X = P.base
    return (_span_for(X, beta) + 3 * abs(n) + abs(X.D_degree(beta))
            + 3 * P.ring.top_degree + 8)


def i_function_E(P: BundleGeometry, beta, n: int, zwindow: int | None = None) -> IEFactorization:
    """The three factor blocks of the ``y^beta y_0^n`` term of ``I_E``.

    Exponent ranges: ``h`` over ``a <= n``, ``h - D`` over ``a <= n - D.beta``,
    ``-h`` (squared) over ``a <= -n``.
    """
    b = _as_tuple(beta)
    if n < 0 or any(x < 0 for x in b):
        raise ValueError("need an effective beta and n >= 0")
    trunc = _zwindow(_bundle_span(P, b, n) if zwindow is None else zwindow)
    h = P.h
    dB = P.base.D_degree(b)
    return IEFactorization(
        CurveClass(b),
        n,
        factor_block(h, n, trunc),
        factor_block(h - P.D, n - dB, trunc),
        factor_block(-h, -n, trunc),
    )


def _lift_series(P: BundleGeometry, s: TruncSeries, trunc: Truncation) -> TruncSeries:
    return TruncSeries({m: P.ring.lift(c) for m, c in s.items()}, trunc, P.ring)


def i_function_term(P: BundleGeometry, beta, n: int) -> TruncSeries:
    """``z J_beta`` times the I_E blocks, as a z-only series over ``H*(P)``."""
    fac = i_function_E(P, beta, n)
    trunc = fac.block_h.trunc
    zJ = _lift_series(P, toric_J_coefficient(P.base, beta).zJ(), trunc)
    return zJ * fac.product()


@dataclass(frozen=True)
class MirrorCorrection:
    """``z^0`` coefficient of ``I_E`` at ``y_0^0``: ``tau = tau_h h + sum_k tau_k p_k``."""

    h: TruncSeries
    nef: tuple[TruncSeries, ...]


def mirror_map_correction(P: BundleGeometry, order: int, grading: str = "D") -> MirrorCorrection:
    """Read the mirror map of ``E`` off the ``z^0`` coefficient of ``I_E``.

    Also checks the shape ``I_E = z + tau + O(1/z)`` at ``y_0^0``: no
    nonnegative powers beyond ``z`` at ``beta = 0`` and no positive powers
    elsewhere, and ``tau`` of pure degree 1.
    """
    X = P.base
    trunc = X.truncation(order, grading)
    base_dim = X.ring.dim
    h_idx = base_dim + X.ring.unit
    tau_h: dict[tuple[int, ...], Fraction] = {}
    tau_k: list[dict[tuple[int, ...], Fraction]] = [{} for _ in X.nef_indices]
    lead = i_function_term(P, (0,) * X.rank, 0)
    if lead.coefficient(zpow=1) != P.ring.one() or any(k > 1 for k in lead.zpowers()) \
            or not lead.coefficient(zpow=0).is_zero():
        raise ShapeError("beta = 0 term of I_E is not z + O(1/z)")
    for beta in X.effective_classes(order, grading):
        term = i_function_term(P, beta, 0)
        if any(k > 0 for k in term.zpowers()):
            raise ShapeError(f"I_E has positive z powers at beta={beta}")
        c = term.coefficient(zpow=0)
        if not c.is_homogeneous(1):
            raise ShapeError(f"z^0 coefficient at beta={beta} is not a degree-1 class")
        b = beta.components
        tau_h[b] = c.coords[h_idx]
        for k, idx in enumerate(X.nef_indices):
            tau_k[k][b] = c.coords[idx]
    return MirrorCorrection(
        TruncSeries.from_beta_dict(tau_h, trunc),
        tuple(TruncSeries.from_beta_dict(t, trunc) for t in tau_k),
    )


def _closed_form_block(P: BundleGeometry, dB: int, trunc: Truncation) -> TruncSeries:
    """``(-1)^{dB-1} prod_{0<=a<=dB-2}(D - h + a z)`` for ``dB >= 1``."""
    out = TruncSeries.constant(Fraction((-1) ** (dB - 1)), trunc, P.ring)
    for a in range(0, dB - 1):
        out = out * _linear(P.D - P.h, a, trunc)
    return out


def reduced_extraction_check(P: BundleGeometry, maxorder: int, grading: str = "D",
                             experimental: bool = False) -> CheckReport:
    """Coefficient of ``y_0 / z`` in ``I_E`` with the ``h^2`` factor removed.

    For every effective ``beta`` with ``0 < D.beta`` and graded degree ``<= maxorder`` the
    ``[1]``-component (after ``h -> 0``) of the ``z^{-1}`` coefficient of
    ``z J_beta / (h + z) * block_{h-D}`` must vanish; at ``beta = 0`` it must be 1.
    """
    X = P.base
    X.require_log_cy(experimental, "reduced extraction")
    report = CheckReport("reduced_extraction", geometry=X.name)
    h = P.h

    def reduced(beta) -> tuple[TruncSeries, TruncSeries, IEFactorization]:
        fac = i_function_E(P, beta, 1)
        trunc = fac.block_h.trunc
        zJ = _lift_series(P, toric_J_coefficient(X, beta).zJ(), trunc)
        return zJ * fac.block_h * fac.block_hD, zJ, fac

    # beta = 0
    zero = (0,) * X.rank
    e0, _, fac0 = reduced(zero)
    trunc0 = fac0.block_h.trunc
    if fac0.block_negh != TruncSeries.constant(h * h, trunc0, P.ring):
        report.fail(beta=str(list(zero)), reason="(-h)-block at n=1 is not h^2")
    if fac0.block_h * _linear(h, 1, trunc0) != TruncSeries.one(trunc0, P.ring):
        report.fail(beta=str(list(zero)), reason="h-block at n=1 is not 1/(h+z)")
    v0 = P.ring.collapse(e0.coefficient(zpow=-1)).unit_part()
    report.values["beta0"] = v0
    report.checked += 1
    if v0 != 1:
        report.fail(beta=str(list(zero)), value=v0, expected=1)

    per_beta = {}
    for beta in X.effective_classes(maxorder, grading):
        dB = X.D_degree(beta)
        if dB <= 0:
            continue
        report.checked += 1
        e, zJ, fac = reduced(beta)
        trunc = fac.block_h.trunc
        if fac.block_hD != _closed_form_block(P, dB, trunc):
            report.fail(beta=str(beta), reason="(h-D)-block differs from its closed form")
        # the full y_0 coefficient is h^2 times the reduced expression
        if i_function_term(P, beta, 1) != e * h * h:
            report.fail(beta=str(beta), reason="y_0 term does not factor as h^2 * reduced")
        v = P.ring.collapse(e.coefficient(zpow=-1)).unit_part()
        per_beta[str(beta)] = v
        if v != 0:
            report.fail(beta=str(beta), value=v, expected=0)
    report.values["per_beta"] = per_beta
    return report
