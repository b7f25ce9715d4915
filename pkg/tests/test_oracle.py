import math

import numpy as np
import pytest

import rkbs_sparse as rk
from rkbs_sparse.core import OracleRefusal


def test_enum_worked_example_matrix():
    report = rk.vertex_enumerate_l1(np.array([[1.0, 0.5], [1.0, -0.5]]),
                                    np.array([1.0, 1.0]))
    assert report.value == pytest.approx(1.0, abs=1e-12)
    assert len(report.witness) == 1
    assert report.witness[0] == pytest.approx([1.0, 0.0], abs=1e-10)


def test_enum_triangular_matrix():
    report = rk.vertex_enumerate_l1(np.array([[1.0, 0.5], [0.0, 1.0]]),
                                    np.array([1.0, 1.0]))
    assert report.value == pytest.approx(1.5, abs=1e-12)
    assert report.witness[0] == pytest.approx([0.5, 1.0], abs=1e-10)


def test_enum_zero_rhs():
    report = rk.vertex_enumerate_l1(np.array([[1.0]]), np.array([0.0]))
    assert report.value == 0.0
    assert report.witness[0] == pytest.approx([0.0])


def test_enum_infeasible_reports_none():
    report = rk.vertex_enumerate_l1(np.array([[1.0], [1.0]]),
                                    np.array([1.0, 2.0]))
    assert report.value is None


def test_enum_refuses_wide_matrices():
    with pytest.raises(OracleRefusal):
        rk.vertex_enumerate_l1(np.ones((2, 13)), np.ones(2))


def test_enum_agreement_flag():
    report = rk.vertex_enumerate_l1(np.eye(2), np.array([1.0, -2.0]),
                                    candidate_value=3.0)
    assert report.agreement
    report = rk.vertex_enumerate_l1(np.eye(2), np.array([1.0, -2.0]),
                                    candidate_value=2.5)
    assert not report.agreement


def test_grid_supremum_single_center():
    p = rk.gauss_problem([0.0], 1.0, [1.0])
    report = rk.grid_supremum([1.0], p, 1e-3)
    assert report.value == pytest.approx(1.0, abs=1e-6)
    assert any(abs(t) <= 1e-3 for t in report.witness["argmaxima"])


def test_grid_supremum_pair_closed_form():
    p = rk.gauss_problem([-1.0, 1.0], 1.0, [1.0, 1.0])
    report = rk.grid_supremum([1.0, 1.0], p, 1e-4)
    assert report.value == pytest.approx(2.0 * math.exp(-0.5), abs=1e-9)


def test_grid_supremum_antisymmetric_pair():
    p = rk.gauss_problem([-1.0, 1.0], 1.0, [1.0, 1.0])
    report = rk.grid_supremum([1.0, -1.0], p, 1e-3)
    arg = report.witness["argmaxima"]
    assert min(arg) == pytest.approx(-max(arg), abs=2e-3)
    assert max(arg) > 0


def test_grid_supremum_error_bound_sharpens_with_step():
    p = rk.gauss_problem([-1.0, 1.0], 1.0, [1.0, 1.0])
    coarse = rk.grid_supremum([0.8, 0.9], p, 2e-2)
    fine = rk.grid_supremum([0.8, 0.9], p, 1e-4)
    assert abs(coarse.value - fine.value) <= coarse.witness["error_bound"]
    assert fine.witness["error_bound"] < coarse.witness["error_bound"]


def test_l2_oracle_coordinate_pair():
    problem = rk.seq_problem([rk.finite([1.0]), rk.finite([0.0, 1.0])],
                             [3.0, 4.0])
    report = rk.l2_min_norm(problem, 64)
    assert report.witness["coordinates"][:3] == pytest.approx([3.0, 4.0, 0.0])
    assert report.value["norm"] == pytest.approx(5.0)


def test_l2_oracle_harmonic_gram_is_basel_partial():
    problem = rk.seq_problem([rk.harmonic()], [1.0])
    K = 1 << 16
    report = rk.l2_min_norm(problem, K)
    # single functional: dual coefficient is 1 / (partial Basel sum), which
    # sits within the certified tail bound of 6/pi^2
    d = report.value["dual"][0]
    assert d == pytest.approx(6.0 / math.pi ** 2, abs=2e-5)
    assert abs(1.0 / d - math.pi ** 2 / 6.0) <= 1.0 / K + 1e-12
    assert report.value["gram_tail_bound"] <= 2.0 / K


def test_l2_oracle_eval_matches_coordinates(worked_example):
    report = rk.l2_min_norm(worked_example, 4096)
    coords = report.witness["coordinates"]
    evalf = report.witness["eval"]
    for k in (1, 2, 7, 50):
        assert evalf(k) == pytest.approx(coords[k - 1], rel=1e-12)


def test_l2_oracle_refuses_ill_conditioned():
    problem = rk.seq_problem(
        [rk.finite([1.0, 1.0]), rk.finite([1.0, 1.0 + 1e-14])], [1.0, 1.0])
    with pytest.raises(OracleRefusal):
        rk.l2_min_norm(problem, 16)


def test_norming_check_worked_example(worked_example):
    cert = rk.certificate_from_coefficients(worked_example, [-0.5, 1.5])
    sol = rk.mni_solve_l1(worked_example)
    assert rk.norming_check(cert, sol, tol=1e-9).agreement


def test_norming_check_detects_sign_flip(worked_example):
    cert = rk.certificate_from_coefficients(worked_example, [-0.5, 1.5])
    flipped = (((1, -1.0)),)
    report = rk.norming_check(cert, [(1, -1.0)], tol=1e-9)
    assert not report.agreement


def test_norming_check_measure_closed_form():
    p = rk.gauss_problem([-1.0, 1.0], 1.0, [1.0, 1.0])
    sol = rk.mni_solve_measure(p)
    report = rk.norming_check_measure(sol.certificate, sol, p, tol=1e-8)
    assert report.agreement


def test_convexity_check_non_unique_instance():
    report = rk.solution_set_convexity_check(np.array([[1.0, 1.0]]),
                                             np.array([1.0]))
    assert report.agreement
    assert report.witness["pairs_checked"] >= 1


def test_convexity_check_unique_instance_vacuous(worked_example):
    report = rk.solution_set_convexity_check(
        np.array([[1.0, 0.5], [1.0, -0.5]]), np.array([1.0, 1.0]))
    assert report.agreement
    assert report.witness["pairs_checked"] == 0


def test_convexity_check_zero_instance():
    report = rk.solution_set_convexity_check(np.array([[1.0, -1.0]]),
                                             np.array([0.0]))
    assert report.agreement
    assert report.value == 0.0


def test_oracle_reports_are_deterministic():
    L = np.array([[1.0, 0.5, -0.25], [0.0, 1.0, 0.75]])
    y = np.array([1.0, -1.0])
    first = rk.vertex_enumerate_l1(L, y)
    second = rk.vertex_enumerate_l1(L, y)
    assert first.value == second.value
    assert all(np.array_equal(a, b) for a, b in zip(first.witness, second.witness))
