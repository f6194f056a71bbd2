"""The proper Landau-Ginzburg potential: g-series, mirror map, theta function.

Sign conventions
----------------
``g(y) = sum <[pt] psi^{D.b-2}>_b (D.b - 1)! y^b`` has non-negative
coefficients.  :func:`g_negated` returns the series usually written
``g(-y)``, i.e. ``sum (-1)^{D.b-1} <...> (D.b-1)! y^b``.  It agrees with
``-g`` evaluated at ``y_j -> (-1)^{D.beta_j} y_j`` (:func:`sign_twist`), which
coincides with the literal ``y -> -y`` only when every ``D.beta_j`` is odd.

The theta-function mirror map is ``q_j = y_j exp(d_j g(y))`` with
``d_j = D.beta_j``, and ``x W = exp(g(y(q)))``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exactmath import TruncSeries, Truncation
from .geometry import CurveClass, TargetGeometry, validate_fano_smallJ
from .givental import one_point_descendant
from .reports import CheckReport

log = logging.getLogger(__name__)

__all__ = [
    "PipelineError",
    "OrderTooSmallError",
    "NonConvergenceError",
    "GSeries",
    "MirrorMap",
    "ThetaPotential",
    "compute_g",
    "g_negated",
    "literal_negation",
    "sign_twist",
    "sign_convention_report",
    "mirror_map_from_exponents",
    "build_mirror_map",
    "round_trip_report",
    "theta_potential",
    "two_point_invariants",
    "integrality_report",
]


class PipelineError(RuntimeError):
    pass


class OrderTooSmallError(PipelineError, ValueError):
    pass


class NonConvergenceError(PipelineError):
    pass


def _min_order(grading: str) -> int:
    return 2 if grading == "D" else 1


@dataclass(frozen=True)
class GSeries:
    series: TruncSeries
    geometry: TargetGeometry
    grading: str = "D"

    def coefficient(self, beta) -> Fraction:
        return self.series.coefficient(tuple(beta))


@lru_cache(maxsize=None)
def _checked_small_J(X: TargetGeometry, order: int, grading: str) -> None:
    report = validate_fano_smallJ(X, order, grading)
    if not report.passed:
        raise PipelineError(
            f"{X.name}: toric J-function has z^0 terms at "
            + ", ".join(f["beta"] for f in report.failures)
        )


def compute_g(X: TargetGeometry, order: int, grading: str = "D",
              experimental: bool = False) -> GSeries:
    """``g(y)`` truncated at graded degree ``order``."""
    if order < _min_order(grading):
        raise OrderTooSmallError(f"order too small: {order}")
    X.require_log_cy(experimental, "g-series")
    _checked_small_J(X, order, grading)
    trunc = X.truncation(order, grading)
    coeffs = {}
    for beta in X.effective_classes(order, grading):
        dB = X.D_degree(beta)
        if dB < 2:
            continue
        coeffs[beta.components] = one_point_descendant(X, beta) * math.factorial(dB - 1)
    return GSeries(TruncSeries.from_beta_dict(coeffs, trunc), X, grading)


def _signed(series: TruncSeries, sign) -> TruncSeries:
    return TruncSeries({m: c * sign(m.beta) for m, c in series.items()}, series.trunc, series.ring)


def g_negated(g: GSeries) -> TruncSeries:
    """``sum (-1)^{D.b - 1} g_b y^b``; an involution on g."""
    X = g.geometry
    return _signed(g.series, lambda b: (-1) ** (X.D_degree(b) - 1))


def literal_negation(series: TruncSeries) -> TruncSeries:
    """Substitute ``y_j -> -y_j``."""
    return _signed(series, lambda b: (-1) ** sum(b))


def sign_twist(series: TruncSeries, X: TargetGeometry) -> TruncSeries:
    """Substitute ``y_j -> (-1)^{D.beta_j} y_j``."""
    return _signed(series, lambda b: (-1) ** X.D_degree(b))


def sign_convention_report(g: GSeries) -> CheckReport:
    """Compare the two ways of writing ``g(-y)``.

    Fails if ``g_negated(g) != -sign_twist(g)``.  Whether the literal
    substitution ``y -> -y`` gives the same series is recorded as a note and
    in ``values["literal_matches"]``; it does not fail the check.
    """
    X = g.geometry
    report = CheckReport("sign_convention", geometry=X.name)
    neg = g_negated(g)
    twisted = -sign_twist(g.series, X)
    report.checked = len(g.series)
    for m, c in neg.items():
        if twisted.coefficient(m.beta) != c:
            report.fail(beta=str(list(m.beta)), display=c, twisted=twisted.coefficient(m.beta))
    literal = -literal_negation(g.series)
    matches = literal == neg
    report.values["literal_matches"] = matches
    if not matches:
        report.note("literal y -> -y differs from the D-degree sign twist for this geometry; "
                    "the twist y_j -> (-1)^(D.beta_j) y_j is used")
    return report


# -- mirror maps -------------------------------------------------------------

@dataclass(frozen=True)
class MirrorMap:
    """``q_j = y_j exp(E_j(y))`` and its inverse ``y_j(q)``.

    The same Novikov slots are used for ``y`` and ``q``.
    """

    exponents: tuple[TruncSeries, ...]
    forward: tuple[TruncSeries, ...]
    inverse: tuple[TruncSeries, ...]
    iterations: int

    @property
    def trunc(self) -> Truncation:
        return self.forward[0].trunc

    def to_q(self, series_in_y: TruncSeries) -> TruncSeries:
        """Re-expand a series in ``y`` as a series in ``q``."""
        return series_in_y.substitute(dict(enumerate(self.inverse)))

    def to_y(self, series_in_q: TruncSeries) -> TruncSeries:
        return series_in_q.substitute(dict(enumerate(self.forward)))


def mirror_map_from_exponents(exponents) -> MirrorMap:
    exponents = tuple(exponents)
    if not exponents:
        raise PipelineError("mirror map needs at least one variable")
    trunc = exponents[0].trunc
    n = trunc.nvars
    for e in exponents:
        if e.constant_term() != 0:
            raise PipelineError("mirror map exponent must have zero constant term")
    ys = [TruncSeries.variable(j, trunc) for j in range(n)]
    forward = tuple(ys[j] * exponents[j].exp() for j in range(n))
    neg_exp = [-e for e in exponents]
    current = list(ys)
    for it in range(trunc.order + 2):
        assignment = dict(enumerate(current))
        nxt = [ys[j] * neg_exp[j].substitute(assignment).exp() for j in range(n)]
        if all(a == b for a, b in zip(nxt, current)):
            return MirrorMap(exponents, forward, tuple(current), it)
        current = nxt
    raise NonConvergenceError("mirror map inversion did not stabilize")


def build_mirror_map(g: GSeries) -> MirrorMap:
    """``q_j = y_j exp(d_j g(y))`` with ``d_j = D . beta_j``."""
    X = g.geometry
    return mirror_map_from_exponents(g.series.scale(d) for d in X.D_weights)


def round_trip_report(mm: MirrorMap, name: str | None = None) -> CheckReport:
    report = CheckReport("mirror_round_trip", geometry=name)
    trunc = mm.trunc
    n = trunc.nvars
    inv = dict(enumerate(mm.inverse))
    fwd = dict(enumerate(mm.forward))
    for j in range(n):
        var = TruncSeries.variable(j, trunc)
        report.checked += 2
        if mm.forward[j].substitute(inv) != var:
            report.fail(variable=j, direction="forward(inverse(q))")
        if mm.inverse[j].substitute(fwd) != var:
            report.fail(variable=j, direction="inverse(forward(y))")
    return report


# -- theta function ----------------------------------------------------------

@dataclass(frozen=True)
class ThetaPotential:
    """``x W = exp(g(y(q)))``."""

    series: TruncSeries
    geometry: TargetGeometry
    g: GSeries | None
    mirror_map: MirrorMap | None
    grading: str = "D"

    @property
    def order(self) -> int:
        return self.series.trunc.order

    def coefficient(self, beta) -> Fraction:
        return self.series.coefficient(tuple(beta))

    def classes(self) -> list[CurveClass]:
        return self.geometry.effective_classes(self.order, self.grading)


def theta_potential(X: TargetGeometry, order: int, grading: str = "D",
                    experimental: bool = False) -> ThetaPotential:
    X.require_log_cy(experimental, "theta potential")
    trunc = X.truncation(order, grading)
    if order < _min_order(grading):
        return ThetaPotential(TruncSeries.one(trunc), X, None, None, grading)
    g = compute_g(X, order, grading, experimental=experimental)
    mm = build_mirror_map(g)
    series = mm.to_q(g.series).exp()
    return ThetaPotential(series, X, g, mm, grading)


def two_point_invariants(theta: ThetaPotential) -> dict[CurveClass, Fraction]:
    """``N_{n,1}^beta = [q^beta] theta / n`` with ``n = D.beta - 1``."""
    X = theta.geometry
    out: dict[CurveClass, Fraction] = {}
    for beta in theta.classes():
        n = X.D_degree(beta) - 1
        if n < 1:
            log.info("skipping beta=%s: D.beta=%d < 2", beta, n + 1)
            continue
        out[beta] = theta.coefficient(beta) / n
    return out


def integrality_report(theta: ThetaPotential) -> CheckReport:
    report = CheckReport("theta_integrality", geometry=theta.geometry.name)
    for m, c in theta.series.items():
        report.checked += 1
        if c.denominator != 1:
            report.fail(beta=str(list(m.beta)), value=c)
    return report


def theta_structure_report(theta: ThetaPotential) -> CheckReport:
    """Constant term 1 and no support below ``D.beta = 2``; g supported in ``D.beta >= 2``."""
    X = theta.geometry
    report = CheckReport("theta_structure", geometry=X.name)
    report.checked += 1
    if theta.series.constant_term() != 1:
        report.fail(reason="constant term", value=theta.series.constant_term())
    for m, c in theta.series.items():
        report.checked += 1
        if any(m.beta) and X.D_degree(m.beta) < 2:
            report.fail(reason="theta support below D.beta = 2", beta=str(list(m.beta)), value=c)
    if theta.g is not None:
        for m, c in theta.g.series.items():
            report.checked += 1
            if X.D_degree(m.beta) < 2:
                report.fail(reason="g support below D.beta = 2", beta=str(list(m.beta)), value=c)
    return report
