"""Tests for verify module."""

from fractions import Fraction
import json

import numpy as np
import pytest
from scipy import sparse

from podles_lib.algebra import make_presentation
from podles_lib.constants import REGIME_INFINITE
from podles_lib.qrat import HalfInt
from podles_lib.report import Report, reports_pass
from podles_lib.reps import ParamSet, build_cross_I, build_cross_II, build_podles, build_spin, build_yc, parse_sign
from podles_lib.verify import (
    check_coefficients,
    check_confluence,
    check_exact_relations,
    check_morphism,
    check_relations,
    check_restriction_decomposition,
    check_star,
    column_norms,
    display_residual,
    recurrence_residual,
    residual_report,
    run_suite,
)


def params(c="1", sign="+", l0="0", **kwargs) -> ParamSet:
    return ParamSet(c=None if c == "inf" else Fraction(c), sign=parse_sign(sign), l0=HalfInt.of(l0), **kwargs)


def failures(reports):
    return [(r.relation_id, r.max_residual, r.vectors_checked) for r in reports if not r.passed]


def by_id(reports):
    return {report.relation_id: report for report in reports}


def test_report_pass_rules():
    """Test a report passes only within tolerance and with a checked vector."""
    assert Report("x", 1e-12, 3, 0, 1e-9).passed
    assert not Report("x", 1e-6, 3, 0, 1e-9).passed
    assert not Report("x", 0.0, 0, 5, 1e-9).passed
    assert Report("x", 0.0, 1, 0, 0.0).to_dict()["pass"] is True
    assert not reports_pass([])


def test_report_holds_plain_numbers():
    """Test numpy scalars are stored as Python numbers and the pass flag is a bool."""
    report = Report("x", np.float64(1e-12), np.int64(1), np.int64(0), 1e-9)

    assert report.passed is True
    assert type(report.max_residual) is float
    assert type(report.vectors_checked) is int
    assert json.loads(json.dumps(report.to_dict()))["pass"] is True


def test_column_norms():
    """Test Euclidean column norms."""
    m = sparse.csr_matrix(np.array([[3.0, 0.0], [4.0, 1j]]))

    np.testing.assert_allclose(column_norms(m), [5.0, 1.0])


def test_residual_report_is_relative_to_magnitude():
    """Test a residual is measured against max(1, column norm of the magnitude)."""
    residual = sparse.csr_matrix(np.array([[1e-6, 1e-12], [0.0, 0.0]]))
    magnitude = sparse.csr_matrix(np.array([[1e4, 0.5], [0.0, 0.0]]))
    mask = np.ones(2, dtype=bool)

    absolute = residual_report("x", residual, mask, 1e-9)
    relative = residual_report("x", residual, mask, 1e-9, magnitude=magnitude)

    assert not absolute.passed
    assert relative.passed
    assert relative.max_residual == pytest.approx(1e-10)


def test_residual_report_empty_interior():
    """Test a relation with no interior vector does not pass."""
    report = residual_report("x", sparse.csr_matrix((2, 2)), np.zeros(2, dtype=bool), 1e-9)

    assert report.vectors_checked == 0
    assert report.vectors_skipped == 2
    assert not report.passed


def test_exact_relations():
    """Test the exact gate over every presentation."""
    reports = check_exact_relations()

    assert len(reports) == 14
    assert not failures(reports)
    assert "exact:Cross:c-infinite" in by_id(reports)


def test_confluence_subset():
    """Test confluence reports for a chosen set of presentations."""
    presentations = [make_presentation("Podles"), make_presentation("Podles", REGIME_INFINITE)]
    reports = check_confluence(4, presentations)

    assert [report.relation_id for report in reports] == ["confluence:Podles:c-finite", "confluence:Podles:c-infinite"]
    assert not failures(reports)


def test_perturbed_b_fails():
    """Test a perturbed B entry is caught by the B*B relation."""
    r = build_podles(params())
    b = r.matrix("B").tolil()
    b[0, 1] += 1e-3
    broken = r.with_matrices({"B": b})

    reports = by_id(check_relations(broken, make_presentation("Podles")))

    assert not reports["podles:Podles:B*B"].passed
    assert reports["podles:Podles:B*B"].max_residual > 1e-4


def test_star_mismatch_fails():
    """Test X* that is not the adjoint of X is caught."""
    r = build_yc(params())
    broken = r.with_matrices({"X*": 1.01 * r.matrix("X*")})

    reports = by_id(check_star(broken))

    assert not reports["yc:star:X"].passed
    assert by_id(check_star(r))["yc:star:X"].passed


def test_decomposition_detects_off_block_entry():
    """Test an entry of K between different spin blocks is caught."""
    p = params(l0="1/2")
    r = build_cross_II(p, "7/2")
    k = r.matrix("K").tolil()
    k[0, r.dim - 1] = 1e-3
    broken = r.with_matrices({"K": k})

    report = check_restriction_decomposition(broken, p.l0)

    assert check_restriction_decomposition(r, p.l0).passed
    assert not report.passed
    assert any("connects" in detail for detail in report.details)


def test_decomposition_detects_wrong_lowest_block():
    """Test the lowest block must be T_l0."""
    r = build_cross_II(params(l0="1/2"), "7/2")

    assert not check_restriction_decomposition(r, HalfInt(0)).passed


def test_morphism_spin():
    """Test random words agree with their normal forms on spin 1."""
    r = build_spin("1")
    report = check_morphism(r, make_presentation("Uq"), trials=100)

    assert report.passed, report.details
    assert report.vectors_checked == 3
    assert report.relation_id == "spin:morphism:Uq"


def test_morphism_is_seeded():
    """Test the same seed gives the same report."""
    r = build_cross_I(params(cutoff=5))
    p = make_presentation("Cross")

    first = check_morphism(r, p, trials=50, seed=7)
    second = check_morphism(r, p, trials=50, seed=7)

    assert first == second
    assert first.passed, first.details


@pytest.mark.parametrize("l0", ["0", "1/2", "1"])
def test_recurrences(l0):
    """Test the recurrences in j over the coefficient table."""
    worst, count = recurrence_residual(params(l0=l0), HalfInt.of(l0) + 4)

    assert count > 0
    assert worst < 1e-10


@pytest.mark.parametrize("c", ["1", "inf"])
def test_display_consistency(c):
    """Test the x1/x0 matrix entries agree with the coefficient table."""
    p = params(c=c, l0="1/2")
    worst, count = display_residual(p, "9/2")

    assert count > 0
    assert type(worst) is float
    assert worst < 1e-12


@pytest.mark.parametrize("l0", ["0", "1/2", "1"])
@pytest.mark.parametrize("c,sign", [("1", "+"), ("1", "-"), ("0", "+"), ("inf", "+"), ("inf", "-")])
def test_check_coefficients(l0, c, sign):
    """Test the coefficient identities across l0, c and sign."""
    p = params(c=c, sign=sign, l0=l0)
    reports = check_coefficients(p, p.l0 + 6)

    assert not failures(reports)
    ids = [report.relation_id for report in reports]
    assert ("coeff:quadratic" in ids) == (l0 != "0")
    assert "coeff:display" in ids


def test_check_coefficients_printed_variant_fails():
    """Test the printed c = inf coefficients fail the alpha^+/beta^0 identity."""
    reports = by_id(check_coefficients(params(c="inf"), "2", variant="printed"))

    assert not reports["coeff:alpharel"].passed


def test_run_suite_podles():
    """Test the full suite on the sphere representation."""
    reports = run_suite(build_podles(params()))

    assert reports_pass(reports), failures(reports)
    assert "podles:morphism:Podles" in by_id(reports)


def test_run_suite_spin():
    """Test the full suite on a spin block includes U'_q(su2)."""
    reports = run_suite(build_spin("3/2"))

    assert reports_pass(reports), failures(reports)
    assert "spin:UqPrime:ke" in by_id(reports)


def test_run_suite_cross_I():
    """Test the full suite on the first family."""
    reports = run_suite(build_cross_I(params(sign="-", cutoff=6)), trials=100)

    assert reports_pass(reports), failures(reports)
    ids = by_id(reports)
    assert "cross1:CrossHat:AA^-1" in ids
    assert "cross1:decouple:Y0" in ids


def test_run_suite_cross_II():
    """Test the full suite on the second family with l0 = 1/2."""
    reports = run_suite(build_cross_II(params(l0="1/2"), "7/2"), trials=100)

    assert reports_pass(reports), failures(reports)
    ids = by_id(reports)
    assert "cross2:decomposition" in ids
    assert "coeff:quadratic" in ids
    assert "cross2:decouple:e" in ids


@pytest.mark.parametrize("h", [1.0, 2.0])
@pytest.mark.parametrize("c,sign", [("1", "+"), ("1", "-"), ("0", "+")])
def test_run_suite_cross_I_grid(c, sign, h):
    """Test the full suite on the first family at cutoff 8."""
    reports = run_suite(build_cross_I(params(c=c, sign=sign, h=h, cutoff=8)), trials=200)

    assert reports_pass(reports), failures(reports)


CROSS2_GRID = [
    (l0, c, sign)
    for l0 in ("0", "1/2", "1")
    for c in ("0", "1", "inf")
    for sign in ("+", "-")
    if not (c == "0" and sign == "-")
]


@pytest.mark.filterwarnings("ignore::UserWarning")
@pytest.mark.parametrize("l0,c,sign", CROSS2_GRID)
def test_run_suite_cross_II_grid(l0, c, sign):
    """Test the full suite on the second family up to l0 + 6."""
    p = params(c=c, sign=sign, l0=l0)
    reports = run_suite(build_cross_II(p, p.l0 + 6), trials=200)

    assert reports_pass(reports), failures(reports)
    assert "cross2:[X,A]" in by_id(reports)


@pytest.mark.parametrize("c,sector", [("1", "+"), ("1", "-"), ("1", "0"), ("0", "+"), ("0", "0"), ("inf", "+"), ("inf", "-")])
def test_run_suite_podles_sectors(c, sector):
    """Test the full suite on every sector of the sphere at cutoff 8."""
    reports = run_suite(build_podles(params(c=c, cutoff=8), sector))

    assert reports_pass(reports), failures(reports)


@pytest.mark.parametrize("y0", [1.0, -2.0])
@pytest.mark.parametrize("c", ["0", "1", "inf"])
def test_run_suite_yc(c, y0):
    """Test the full suite on the Yc representation at cutoff 8."""
    reports = run_suite(build_yc(params(c=c, y0=y0, cutoff=8)))

    assert reports_pass(reports), failures(reports)


@pytest.mark.parametrize("spin", ["0", "1/2", "1", "3/2", "2"])
def test_run_suite_spin_blocks(spin):
    """Test the full suite on the spin blocks up to spin 2."""
    reports = run_suite(build_spin(spin))

    assert reports_pass(reports), failures(reports)
