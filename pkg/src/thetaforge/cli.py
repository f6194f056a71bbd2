"""``thetaforge`` command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 geometry/config error,
3 pipeline error (including ``order too small``).

``--order`` bounds the total degree ``sum_j beta_j`` of curve classes by
default; ``--grading D`` switches to the bound ``D.beta <= order``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .cache import ResultCache, cache_key
from .exactmath import format_rational, parse_rational, TruncSeries
from .geometry import CurveClass, GeometryError, TargetGeometry, build_p1_bundle, load_geometry
from .givental import reduced_extraction_check
from .localgw import (
    LocalTable,
    local_identity_report,
    local_one_point,
    verify_sign_correspondence,
    verify_wdvv_symmetry_route,
)
from .mirror import (
    OrderTooSmallError,
    PipelineError,
    ThetaPotential,
    build_mirror_map,
    compute_g,
    integrality_report,
    round_trip_report,
    sign_convention_report,
    theta_potential,
    theta_structure_report,
    _min_order,
)
from .reports import CheckReport
from .wdvv import MODES, TwoPointTable, check_n2_symmetry, check_wdvv_identity, propagate_table

log = logging.getLogger("thetaforge")

EXIT_OK, EXIT_CHECK, EXIT_GEOMETRY, EXIT_PIPELINE = 0, 1, 2, 3


def _beta_key(beta) -> str:
    return json.dumps(list(beta))


def _parse_beta(key: str) -> CurveClass:
    return CurveClass(json.loads(key))


# -- run context -------------------------------------------------------------

class Run:
    def __init__(self, args: argparse.Namespace, X: TargetGeometry, command: str):
        self.args = args
        self.X = X
        self.command = command
        self.order = args.order
        self.grading = args.grading
        self.experimental = args.experimental
        self.cache = ResultCache(args.cache_dir, enabled=not args.no_cache)
        self.stages: list[str] = []

    def _key(self, stage: str, extra: str = "") -> str:
        return cache_key(self.X.source_hash, stage, self.order,
                         f"{self.grading}|{extra}|{__version__}")

    def stage(self, stage: str, compute, extra: str = ""):
        if stage not in self.stages:
            self.stages.append(stage)
        return self.cache.fetch(self._key(stage, extra), compute)

    # stage payloads are JSON-ready: {beta_key: "num/den"} maps or row lists

    def g(self) -> dict[str, str]:
        def compute():
            g = compute_g(self.X, self.order, self.grading, experimental=self.experimental)
            return {_beta_key(m.beta): format_rational(c) for m, c in g.series.items()}
        return self.stage("g", compute)

    def theta(self) -> dict[str, str]:
        def compute():
            th = theta_potential(self.X, self.order, self.grading, experimental=self.experimental)
            return {_beta_key(b): format_rational(th.coefficient(b)) for b in th.classes()}
        return self.stage("theta", compute)

    def local(self) -> dict[str, str]:
        def compute():
            P = build_p1_bundle(self.X)
            tab = local_one_point(P, self.order, self.grading, experimental=self.experimental)
            return {_beta_key(b): format_rational(v) for b, v in tab.entries.items()}
        return self.stage("local", compute)

    def two_point(self, mode: str) -> list[list]:
        theta = self.theta()  # eager, so the stage list does not depend on cache state

        def compute():
            seeds = {}
            for key, v in theta.items():
                beta = _parse_beta(key)
                n = self.X.D_degree(beta) - 1
                if n >= 1:
                    seeds[beta] = parse_rational(v) / n
            tab = propagate_table(seeds, self.X, self.order, mode, self.grading)
            return [[_beta_key(b), k, p, format_rational(v)] for (b, k, p), v in tab.sorted_entries()]
        return self.stage(f"two-point-{mode}", compute, extra=mode)

    # rebuild library objects from payloads

    def theta_object(self) -> ThetaPotential:
        trunc = self.X.truncation(self.order, self.grading)
        coeffs = {_parse_beta(k).components: parse_rational(v) for k, v in self.theta().items()}
        coeffs[(0,) * self.X.rank] = Fraction(1)
        return ThetaPotential(TruncSeries.from_beta_dict(coeffs, trunc), self.X, None, None, self.grading)

    def local_object(self) -> LocalTable:
        P = build_p1_bundle(self.X)
        entries = {_parse_beta(k): parse_rational(v) for k, v in self.local().items()}
        return LocalTable(entries, P, self.order, self.grading)

    def table_object(self, mode: str) -> TwoPointTable:
        tab = TwoPointTable(self.X, mode, self.order, self.grading)
        for key, k, p, v in self.two_point(mode):
            tab.set(_parse_beta(key), k, p, parse_rational(v))
        return tab

    def manifest(self, data: Any) -> dict[str, Any]:
        digest = hashlib.sha256(json.dumps(data, separators=(",", ":")).encode()).hexdigest()
        return {
            "tool": "thetaforge",
            "version": __version__,
            "command": self.command,
            "geometry": self.X.name,
            "geometry_hash": self.X.source_hash,
            "order": self.order,
            "grading": self.grading,
            "mode": getattr(self.args, "mode", None),
            "experimental": bool(self.experimental),
            "stages": list(self.stages),
            "data_sha256": digest,
        }


# -- output ------------------------------------------------------------------

def _render(run: Run, fmt: str, data: Any, header: list[str], rows: list[list]) -> str:
    manifest = run.manifest(data)
    if fmt == "json":
        return json.dumps({"manifest": manifest, **data}, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in manifest.items():
        buf.write(f"# {k}: {json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _require_order(run: Run) -> None:
    if run.order < _min_order(run.grading):
        raise OrderTooSmallError(f"order too small: {run.order}")


# -- commands ----------------------------------------------------------------

def cmd_compute_g(run: Run) -> int:
    _require_order(run)
    g = run.g()
    rows = [[k, run.X.D_degree(json.loads(k)), v] for k, v in g.items()]
    _emit(run.args, _render(run, run.args.format, {"coefficients": g},
                            ["beta", "D.beta", "coefficient"], rows))
    return EXIT_OK


def cmd_mirror_map(run: Run) -> int:
    _require_order(run)
    g = compute_g(run.X, run.order, run.grading, experimental=run.experimental)
    run.stages.append("mirror-map")
    mm = build_mirror_map(g)

    def as_map(s: TruncSeries) -> dict[str, str]:
        return {_beta_key(m.beta): format_rational(c) for m, c in s.items()}

    data = {
        "forward": {str(j): as_map(s) for j, s in enumerate(mm.forward)},
        "inverse": {str(j): as_map(s) for j, s in enumerate(mm.inverse)},
    }
    rows = [[direction, j, beta, v]
            for direction in ("forward", "inverse")
            for j, m in data[direction].items()
            for beta, v in m.items()]
    _emit(run.args, _render(run, run.args.format, data,
                            ["direction", "variable", "beta", "coefficient"], rows))
    return EXIT_OK


def cmd_theta(run: Run) -> int:
    _require_order(run)
    theta = run.theta()
    rows = []
    for key, v in theta.items():
        beta = _parse_beta(key)
        dB = run.X.D_degree(beta)
        n = dB - 1
        n1 = format_rational(parse_rational(v) / n) if n >= 1 else ""
        rows.append([key, dB, n, v, n1])
    header = ["beta", "D.beta", "n", "theta_coeff", "N_n1"]
    data = {"rows": [dict(zip(header, r)) for r in rows]}
    _emit(run.args, _render(run, run.args.format, data, header, rows))
    return EXIT_OK


def cmd_two_point_table(run: Run) -> int:
    _require_order(run)
    run.X.require_log_cy(run.experimental, "two-point table")
    mode = run.args.mode
    entries = run.two_point(mode)
    header = ["beta", "k", "p", "value", "mode"]
    rows = [[b, k, p, v, mode] for b, k, p, v in entries]
    data = {"rows": [dict(zip(header, r)) for r in rows]}
    _emit(run.args, _render(run, run.args.format, data, header, rows))
    return EXIT_OK


def cmd_local_invariants(run: Run) -> int:
    _require_order(run)
    local = run.local()
    rows = []
    for key, v in local.items():
        dB = run.X.D_degree(json.loads(key))
        rows.append([key, dB, dB - 1, v])
    header = ["beta", "D.beta", "n", "local_value"]
    data = {"rows": [dict(zip(header, r)) for r in rows]}
    _emit(run.args, _render(run, run.args.format, data, header, rows))
    return EXIT_OK


def cmd_verify(run: Run) -> int:
    _require_order(run)
    X = run.X
    P = build_p1_bundle(X)
    reports: list[CheckReport] = []
    maxD = max((X.D_degree(b) for b in X.effective_classes(run.order, run.grading)), default=0)
    reports.append(reduced_extraction_check(P, maxD, "D", experimental=run.experimental))
    run.stages.append("reduced-extraction")
    theta = run.theta_object()
    reports.append(verify_sign_correspondence(run.local_object(), theta))
    reports.append(local_identity_report(P, run.order, run.grading, experimental=run.experimental))
    table = run.table_object(run.args.mode)
    reports.append(check_n2_symmetry(table))
    reports.append(check_wdvv_identity(table))
    reports.append(verify_wdvv_symmetry_route(theta, table))
    g = compute_g(X, run.order, run.grading, experimental=run.experimental)
    reports.append(round_trip_report(build_mirror_map(g), X.name))
    reports.append(sign_convention_report(g))
    reports.append(theta_structure_report(theta))
    run.stages.append("checks")
    # integrality is reported, not enforced
    info = integrality_report(theta)
    ok = all(r.passed for r in reports)
    for r in reports + [info]:
        print(r.summary(), file=sys.stderr)
        for f in r.failures[:10]:
            print(f"    {f}", file=sys.stderr)
    if not info.passed:
        print("warning: non-integral theta coefficients (informational)", file=sys.stderr)
    data = {
        "passed": ok,
        "checks": [r.to_dict() for r in reports],
        "informational": [info.to_dict()],
    }
    if run.args.format == "json" or run.args.output:
        rows = [[r.name, "PASS" if r.passed else "FAIL", r.checked, len(r.failures)] for r in reports]
        _emit(run.args, _render(run, run.args.format, data,
                                ["check", "status", "checked", "failed"], rows))
    print("verify: " + ("all checks passed" if ok else "FAILED"), file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "compute-g": (cmd_compute_g, "g-series coefficients"),
    "mirror-map": (cmd_mirror_map, "forward and inverse mirror map"),
    "theta": (cmd_theta, "theta coefficients with the derived N_{n,1} column"),
    "two-point-table": (cmd_two_point_table, "relative two-point table N_{k,p}"),
    "local-invariants": (cmd_local_invariants, "one-point local invariants at beta + f"),
    "verify": (cmd_verify, "run all cross-checks; exit 1 on failure"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("geometry", help="built-in name (p2, p1xp1, f1) or path to a geometry JSON file")
    common.add_argument("--order", type=int, default=4, help="truncation order (default 4)")
    common.add_argument("--grading", choices=("degree", "D"), default="degree",
                        help="what --order bounds: total degree of beta (default) or D.beta")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--mode", choices=MODES, default="strict", help="WDVV quadratic-term mode")
    common.add_argument("--cache-dir", default=None, help="cache directory (default $THETAFORGE_CACHE)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--experimental", action="store_true",
                        help="allow geometries whose D is not anticanonical")
    common.add_argument("-o", "--output", default=None, help="write to file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="thetaforge", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    try:
        X = load_geometry(args.geometry)
        run = Run(args, X, args.command)
        return COMMANDS[args.command][0](run)
    except GeometryError as exc:
        print(f"thetaforge: geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (PipelineError, ArithmeticError, ValueError, KeyError) as exc:
        print(f"thetaforge: pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
