"""Relative WDVV recursion for two-point invariants ``N_{k,p}^beta``.

``N_{k,p}^beta = <[pt]_k, [1]_p>_{0,2,beta}`` with contact orders ``k, p >= 1``
and ``k + p = D.beta``.  For ``D.beta = k + p + 1`` the identity is::

    (k+1) N_{k+1,p} + (k+p) N_{k+p,1} + sum_{a+b=k} sum_{b1+b2=b} a b N_{a,1}^{b1} N_{b,p}^{b2}
        = k N_{k,p+1} + sum_{r=1}^{p-1} (p-r) sum_{b1+b2=b} N_{p-r,1}^{b1} k N_{k,r}^{b2}

Modes
-----
``strict``
    quadratic sums are dropped; the recursion is linear in the seeds.
``formal``
    quadratic sums are evaluated from the already propagated lower-degree
    entries, with absent entries read as 0.

Both modes give ``N_{1,n} = n^2 N_{n,1}``: the quadratic sums cancel after
summing over ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .geometry import CurveClass, TargetGeometry
from .mirror import PipelineError
from .reports import CheckReport

__all__ = [
    "MODES",
    "MissingSeedError",
    "TwoPointTable",
    "propagate_table",
    "wdvv_residual",
    "check_wdvv_identity",
    "check_n2_symmetry",
    "compare_modes",
]

MODES = ("strict", "formal")


class MissingSeedError(PipelineError, KeyError):
    pass


@dataclass
class TwoPointTable:
    geometry: TargetGeometry
    mode: str = "strict"
    order: int = 0
    grading: str = "D"
    entries: dict[tuple[CurveClass, int, int], Fraction] = field(default_factory=dict)

    def get(self, beta, k: int, p: int) -> Fraction:
        if not isinstance(beta, CurveClass):
            beta = CurveClass(beta)
        return self.entries.get((beta, k, p), Fraction(0))

    def set(self, beta: CurveClass, k: int, p: int, value: Fraction) -> None:
        self.entries[(beta, k, p)] = Fraction(value)

    def classes(self) -> list[CurveClass]:
        return sorted({b for b, _, _ in self.entries},
                      key=lambda b: (self.geometry.D_degree(b), b.components))

    def row(self, beta: CurveClass) -> dict[tuple[int, int], Fraction]:
        return {(k, p): v for (b, k, p), v in self.entries.items() if b == beta}

    def copy(self) -> "TwoPointTable":
        return TwoPointTable(self.geometry, self.mode, self.order, self.grading, dict(self.entries))

    def sorted_entries(self):
        return sorted(self.entries.items(),
                      key=lambda kv: (self.geometry.D_degree(kv[0][0]), kv[0][0].components,
                                      -kv[0][1]))


def _splittings(beta: CurveClass):
    """Ordered pairs ``(b1, b2)`` of nonzero effective classes with ``b1 + b2 = beta``."""
    comps = beta.components

    def rec(j, prefix):
        if j == len(comps):
            yield prefix
            return
        for e in range(comps[j] + 1):
            yield from rec(j + 1, prefix + [e])

    for first in rec(0, []):
        b1 = CurveClass(first)
        b2 = beta - b1
        if not b1.is_zero and not b2.is_zero:
            yield b1, b2


def _quadratic(table: TwoPointTable, beta: CurveClass, k: int, p: int) -> tuple[Fraction, Fraction]:
    """The two quadratic sums of the identity at ``(beta, k, p)``."""
    X = table.geometry
    left = Fraction(0)
    right = Fraction(0)
    for b1, b2 in _splittings(beta):
        d1 = X.D_degree(b1)
        d2 = X.D_degree(b2)
        # sum_{a+b=k} a b N_{a,1}^{b1} N_{b,p}^{b2}; dimension fixes a = d1 - 1
        a = d1 - 1
        bb = k - a
        if a >= 1 and bb >= 1 and bb + p == d2:
            left += a * bb * table.get(b1, a, 1) * table.get(b2, bb, p)
        # sum_r (p-r) N_{p-r,1}^{b1} k N_{k,r}^{b2}; dimension fixes p - r = d1 - 1
        r = p - (d1 - 1)
        if 1 <= r <= p - 1 and k + r == d2:
            right += (p - r) * table.get(b1, p - r, 1) * k * table.get(b2, k, r)
    return left, right


def wdvv_residual(table: TwoPointTable, beta: CurveClass, k: int, p: int,
                  mode: str | None = None) -> Fraction:
    """LHS - RHS of the identity at ``(beta, k, p)``; requires ``D.beta = k + p + 1``."""
    mode = mode or table.mode
    lhs = (k + 1) * table.get(beta, k + 1, p) + (k + p) * table.get(beta, k + p, 1)
    rhs = k * table.get(beta, k, p + 1)
    if mode == "formal":
        ql, qr = _quadratic(table, beta, k, p)
        lhs += ql
        rhs += qr
    return lhs - rhs


def propagate_table(seeds: Mapping, geometry: TargetGeometry, order: int,
                    mode: str = "strict", grading: str = "D") -> TwoPointTable:
    """Fill ``N_{k, n-k+1}^beta`` for ``k = n-1, ..., 1`` from seeds ``N_{n,1}^beta``.

    ``seeds`` maps curve classes to ``N_{n,1}^beta`` (``n = D.beta - 1``); every
    effective class with ``D.beta >= 2`` and graded degree ``<= order`` needs one.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    X = geometry
    seeds = {(b if isinstance(b, CurveClass) else CurveClass(b)): Fraction(v)
             for b, v in seeds.items()}
    table = TwoPointTable(X, mode, order, grading)
    for beta in X.effective_classes(order, grading):
        n = X.D_degree(beta) - 1
        if n < 1:
            continue
        if beta not in seeds:
            raise MissingSeedError(f"missing seed for beta={beta}")
        table.set(beta, n, 1, seeds[beta])
        for k in range(n - 1, 0, -1):
            p = n - k
            value = (k + 1) * table.get(beta, k + 1, p) + n * table.get(beta, n, 1)
            if mode == "formal":
                ql, qr = _quadratic(table, beta, k, p)
                value += ql - qr
            table.set(beta, k, p + 1, value / k)
    return table


def check_wdvv_identity(table: TwoPointTable, order: int | None = None) -> CheckReport:
    """Re-evaluate the identity at every admissible ``(beta, k, p)``; residuals must be 0."""
    X = table.geometry
    order = table.order if order is None else order
    report = CheckReport(f"wdvv_identity[{table.mode}]", geometry=X.name)
    for beta in X.effective_classes(order, table.grading):
        dB = X.D_degree(beta)
        for k in range(1, dB - 1):
            p = dB - 1 - k
            res = wdvv_residual(table, beta, k, p)
            report.checked += 1
            if res != 0:
                report.fail(beta=str(beta), k=k, p=p, residual=res)
    return report


def check_n2_symmetry(table: TwoPointTable) -> CheckReport:
    """``N_{1,n} = n^2 N_{n,1}`` on every complete row."""
    X = table.geometry
    report = CheckReport(f"n2_symmetry[{table.mode}]", geometry=X.name)
    for beta in table.classes():
        n = X.D_degree(beta) - 1
        row = table.row(beta)
        if any((k, n + 1 - k) not in row for k in range(1, n + 1)):
            continue
        report.checked += 1
        if row[(1, n)] != n * n * row[(n, 1)]:
            report.fail(beta=str(beta), n=n, N_1n=row[(1, n)], N_n1=row[(n, 1)])
    return report


def compare_modes(strict: TwoPointTable, formal: TwoPointTable) -> CheckReport:
    """Do the two modes agree on the final rows ``N_{1,n}``?  Intermediate rows may differ."""
    X = strict.geometry
    report = CheckReport("wdvv_modes_final_rows", geometry=X.name)
    differing = 0
    for beta in strict.classes():
        n = X.D_degree(beta) - 1
        report.checked += 1
        if strict.get(beta, 1, n) != formal.get(beta, 1, n):
            report.fail(beta=str(beta), strict=strict.get(beta, 1, n), formal=formal.get(beta, 1, n))
        for k in range(2, n):
            if strict.get(beta, k, n + 1 - k) != formal.get(beta, k, n + 1 - k):
                differing += 1
    report.values["intermediate_entries_differing"] = differing
    return report
