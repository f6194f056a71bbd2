"""One-point invariants of ``E = O_P(-X_inf) + O_P(-X_inf)`` at classes ``beta + f``.

The mirror map of E is read off the ``z^0`` coefficient of ``I_E``
(:func:`~thetaforge.givental.mirror_map_correction`), independently of the
g-series.  With ``tau = tau_h h + sum_k tau_k p_k``::

    log q_0 = log y_0 + tau_h(y),    log q_j = log y_j + sum_k tau_k <p_k, beta_j>

and ``1 + sum_b q^b <[pt]>_{b+f} = y_0 / q_0 = exp(-tau_h(y(q)))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactmath import TruncSeries
from .geometry import BundleGeometry, CurveClass
from .givental import mirror_map_correction
from .mirror import (
    MirrorMap,
    ThetaPotential,
    compute_g,
    g_negated,
    mirror_map_from_exponents,
    _min_order,
)
from .reports import CheckReport

__all__ = [
    "LocalTable",
    "local_one_point",
    "local_identity_report",
    "verify_sign_correspondence",
    "verify_wdvv_symmetry_route",
]


@dataclass(frozen=True)
class LocalTable:
    entries: dict[CurveClass, Fraction]
    geometry: BundleGeometry
    order: int
    grading: str = "D"
    generating_series: TruncSeries | None = None
    mirror_map: MirrorMap | None = None

    def __getitem__(self, beta) -> Fraction:
        if not isinstance(beta, CurveClass):
            beta = CurveClass(beta)
        return self.entries[beta]


def _local_mirror(P: BundleGeometry, order: int, grading: str):
    X = P.base
    tau = mirror_map_correction(P, order, grading)
    trunc = X.truncation(order, grading)
    exponents = []
    for j in range(X.rank):
        e = TruncSeries.zero(trunc)
        for k, t in enumerate(tau.nef):
            e = e + t.scale(X.nefpairings[k][j])
        exponents.append(e)
    return tau, mirror_map_from_exponents(exponents)


def local_one_point(P: BundleGeometry, order: int, grading: str = "D",
                    experimental: bool = False) -> LocalTable:
    """``<[pt]>_{0,1,beta+f}^E`` for effective ``beta != 0`` up to ``order``."""
    X = P.base
    X.require_log_cy(experimental, "local invariants")
    classes = X.effective_classes(order, grading)
    if not classes:
        return LocalTable({}, P, order, grading)
    tau, mm = _local_mirror(P, order, grading)
    series = mm.to_q((-tau.h).exp())
    entries = {beta: series.coefficient(beta.components) for beta in classes}
    return LocalTable(entries, P, order, grading, series, mm)


def local_identity_report(P: BundleGeometry, order: int, grading: str = "D",
                          experimental: bool = False) -> CheckReport:
    """Cross-checks on the local generating function.

    * ``exp`` then substitute equals substitute then ``exp``;
    * ``tau_h`` from ``I_E`` equals ``g_negated(g)`` from the J-function descendants;
    * ``tau_k = -d_k tau_h`` (so ``q^b = y^b exp(-tau_h D.b)``).
    """
    X = P.base
    report = CheckReport("local_identity", geometry=X.name)
    if order < _min_order(grading):
        report.note("order below the first D.beta >= 2 class; nothing to compare")
        return report
    tau, mm = _local_mirror(P, order, grading)
    a = mm.to_q((-tau.h).exp())
    b = mm.to_q(-tau.h).exp()
    report.checked += 1
    if a != b:
        report.fail(check="exp/substitution order")
    G = g_negated(compute_g(X, order, grading, experimental=experimental))
    report.checked += 1
    if tau.h != G:
        report.fail(check="tau_h == g_negated(g)")
    for k, t in enumerate(tau.nef):
        report.checked += 1
        if t != tau.h.scale(-X.D_coefficients()[k]):
            report.fail(check=f"tau_{k} == -d_{k} tau_h")
    return report


def verify_sign_correspondence(local: LocalTable, theta: ThetaPotential) -> CheckReport:
    """``[q^b] theta == (-1)^{n+1} <[pt]>_{b+f}`` with ``n = D.b - 1``."""
    X = theta.geometry
    report = CheckReport("sign_correspondence", geometry=X.name)
    for beta, lv in sorted(local.entries.items()):
        n = X.D_degree(beta) - 1
        tv = theta.coefficient(beta)
        expected = (-1) ** (n + 1) * lv
        report.checked += 1
        if tv != expected:
            report.fail(beta=str(beta), theta=tv, local=lv, expected=expected)
    return report


def verify_wdvv_symmetry_route(theta: ThetaPotential, table) -> CheckReport:
    """``N_{1,n} = n^2 N_{n,1}`` with ``N_{n,1}`` taken from the theta coefficients.

    Rows that are identically zero carry no information and are skipped (noted).
    """
    X = theta.geometry
    report = CheckReport("wdvv_symmetry_route", geometry=X.name)
    skipped = 0
    for beta in table.classes():
        n = X.D_degree(beta) - 1
        if n < 1:
            continue
        row = table.row(beta)
        if not any(row.values()):
            skipped += 1
            continue
        seed = theta.coefficient(beta) / n
        report.checked += 1
        if table.get(beta, n, 1) != seed:
            report.fail(beta=str(beta), reason="table seed differs from theta",
                        table=table.get(beta, n, 1), theta=seed)
        n1 = table.get(beta, 1, n)
        if n1 != n * n * seed:
            report.fail(beta=str(beta), N_1n=n1, expected=n * n * seed)
    if skipped:
        report.note(f"{skipped} all-zero rows skipped")
    return report
