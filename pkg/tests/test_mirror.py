from fractions import Fraction as F

import pytest

import oracles
from conftest import p2_doc
from thetaforge.exactmath import TruncSeries
from thetaforge.geometry import ExperimentalWarning, GeometryError, load_geometry
from thetaforge.mirror import (
    NonConvergenceError,
    OrderTooSmallError,
    PipelineError,
    build_mirror_map,
    compute_g,
    g_negated,
    integrality_report,
    literal_negation,
    mirror_map_from_exponents,
    round_trip_report,
    sign_convention_report,
    sign_twist,
    theta_potential,
    theta_structure_report,
    two_point_invariants,
)

P2_THETA = [1, 2, 5, 32, 286, 3038, 35870]


class TestG:
    def test_p2_linear_term(self, p2):
        g = compute_g(p2, 3)
        assert g.coefficient((1,)) == 2

    def test_p2_closed_form(self, p2):
        from math import factorial
        g = compute_g(p2, 18)
        for d in range(1, 7):
            assert g.coefficient((d,)) == F(factorial(3 * d - 1), factorial(d) ** 3)

    @pytest.mark.parametrize("order", [0, 1, -3])
    def test_order_too_small(self, p2, order):
        with pytest.raises(OrderTooSmallError, match="order too small"):
            compute_g(p2, order)

    def test_degree_grading_min_order(self, p2):
        with pytest.raises(OrderTooSmallError):
            compute_g(p2, 0, "degree")
        assert compute_g(p2, 1, "degree").coefficient((1,)) == 2

    def test_support(self, builtin):
        g = compute_g(builtin, 8)
        assert all(builtin.D_degree(m.beta) >= 2 for m, _ in g.series.items())

    def test_non_log_cy(self):
        X = load_geometry(p2_doc(D=("0", "2", "0"), name="conic"))
        with pytest.raises(GeometryError):
            compute_g(X, 4)
        with pytest.warns(ExperimentalWarning):
            compute_g(X, 4, experimental=True)


class TestSigns:
    def test_p2_literal_agrees(self, p2):
        g = compute_g(p2, 9)
        assert g_negated(g).as_beta_dict() == {(1,): 2, (2,): -15, (3,): F(560, 3)}
        report = sign_convention_report(g)
        assert report.passed and report.values["literal_matches"]

    def test_p1xp1_literal_differs(self, p1xp1):
        g = compute_g(p1xp1, 4)
        report = sign_convention_report(g)
        assert report.passed
        assert report.values["literal_matches"] is False
        assert report.notes
        # D.beta_j even: the twist is trivial, g_negated = -g
        assert g_negated(g) == -g.series

    def test_twist_is_involution(self, builtin):
        g = compute_g(builtin, 6)
        assert sign_twist(sign_twist(g.series, builtin), builtin) == g.series
        assert literal_negation(literal_negation(g.series)) == g.series


class TestMirrorMap:
    def test_p2_inverse_low_order(self, p2):
        mm = build_mirror_map(compute_g(p2, 6))
        assert mm.inverse[0].as_beta_dict() == {(1,): 1, (2,): -6}
        assert mm.forward[0].as_beta_dict() == {(1,): 1, (2,): 6}

    @pytest.mark.parametrize("name,order", [("p2", 18), ("p1xp1", 12), ("f1", 8)])
    def test_round_trip(self, name, order):
        X = load_geometry(name)
        mm = build_mirror_map(compute_g(X, order))
        report = round_trip_report(mm, name)
        assert report.passed and report.checked == 2 * X.rank
        assert mm.iterations <= order

    def test_to_q_to_y(self, p2):
        mm = build_mirror_map(compute_g(p2, 12))
        s = compute_g(p2, 12).series
        assert mm.to_y(mm.to_q(s)) == s

    def test_nonzero_constant_rejected(self, p2):
        t = p2.truncation(6)
        with pytest.raises(PipelineError):
            mirror_map_from_exponents([TruncSeries.one(t)])

    def test_error_types(self):
        assert issubclass(NonConvergenceError, PipelineError)


class TestTheta:
    def test_p2_values(self, p2):
        th = theta_potential(p2, 18)
        assert [th.series.coefficient((d,)) for d in range(7)] == P2_THETA

    def test_p2_against_sympy(self, p2):
        th = theta_potential(p2, 15)
        assert [th.series.coefficient((d,)) for d in range(6)] == oracles.theta_p2(5)

    def test_p1xp1_against_sympy(self, p1xp1):
        th = theta_potential(p1xp1, 4, "degree")
        expected = oracles.theta_p1xp1(4)
        got = th.series.as_beta_dict()
        assert got == {k: v for k, v in expected.items() if v}

    def test_order_zero(self, p2):
        th = theta_potential(p2, 0)
        assert th.series == TruncSeries.one(th.series.trunc)

    def test_structure(self, builtin):
        th = theta_potential(builtin, 8)
        assert theta_structure_report(th).passed
        assert th.series.constant_term() == 1

    def test_integrality(self, builtin):
        assert integrality_report(theta_potential(builtin, 4, "degree")).passed

    def test_two_point(self, p2, f1, caplog):
        n = two_point_invariants(theta_potential(p2, 9))
        assert n == {c: v for c, v in zip(sorted(n), [F(1), F(1), F(4)])}
        import logging
        with caplog.at_level(logging.INFO, logger="thetaforge.mirror"):
            seeds = two_point_invariants(theta_potential(f1, 3, "degree"))
        assert all(f1.D_degree(b) >= 2 for b in seeds)
        assert "skipping" in caplog.text
