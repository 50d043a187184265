"""Tests for reps module."""

from fractions import Fraction
import math

import numpy as np
import pytest
from scipy import sparse

from podles_lib.algebra import AlgebraElement, make_presentation
from podles_lib.qrat import HalfInt, ParameterError, qnum
from podles_lib.reps import (
    ConstructionError,
    ParamSet,
    alpharel_residual,
    build_cross_I,
    build_cross_II,
    build_podles,
    build_rep,
    build_spin,
    build_yc,
    c_pm_sq,
    coeff_alpha_plus_ll,
    coeff_beta0_ll,
    coeff_table,
    parse_sign,
    quadratic_residual,
    rho_value,
    top_level,
    x_to_ABB,
)
from podles_lib.verify import check_relations, check_restriction_decomposition, check_star


def params(c="1", sign="+", l0="0", **kwargs) -> ParamSet:
    return ParamSet(
        c=None if c == "inf" else Fraction(c),
        sign=parse_sign(sign),
        l0=HalfInt.of(l0),
        **kwargs,
    )


def assert_all_pass(reports):
    failed = [report for report in reports if not report.passed]
    assert reports
    assert not failed, [(r.relation_id, r.max_residual, r.vectors_checked) for r in failed]


def test_param_set_defaults():
    """Test the default parameters."""
    p = ParamSet()

    assert p.q == Fraction(1, 2)
    assert p.c == 1
    assert p.regime == "c-finite"
    assert p.lam == pytest.approx(-1.5)
    assert p.lambda_pm() == pytest.approx(0.5 + math.sqrt(1.25))
    assert p.lambda_pm(-1) == pytest.approx(0.5 - math.sqrt(1.25))


def test_param_set_collects_errors():
    """Test every invalid field is reported at once."""
    with pytest.raises(ParameterError) as exc_info:
        ParamSet(q=Fraction(2), h=-1.0, y0=0.0)

    message = str(exc_info.value)
    assert "q must lie in (0, 1)" in message
    assert "h must be positive" in message
    assert "y0 must be nonzero" in message


def test_param_set_lambda_at_infinity():
    """Test lambda_+- is undefined for c = inf."""
    p = params(c="inf")

    assert p.infinite
    assert p.regime == "c-infinite"
    with pytest.raises(ParameterError):
        p.lambda_pm()


def test_param_set_dict_round_trip():
    """Test ParamSet survives to_dict/from_dict."""
    p = ParamSet(
        q=Fraction(1, 3),
        c=None,
        sign=-1,
        l0=HalfInt(1),
        h=2.0,
        y0=-1.5,
        u_phase=1j,
        cutoff=5,
    )

    assert p.to_dict()["c"] == "inf"
    assert p.to_dict()["l0"] == "1/2"
    assert ParamSet.from_dict(p.to_dict()) == p


def test_parse_sign():
    """Test sign parsing."""
    assert parse_sign("+") == 1
    assert parse_sign("-") == -1
    assert parse_sign(-1) == -1

    with pytest.raises(ParameterError, match="Invalid sign"):
        parse_sign("0")


def test_c_pm_sq_vanishes_at_zero():
    """Test c_+-(0) = 0 since lambda_+- solves lambda^2 = lambda + c."""
    for sign in (1, -1):
        assert c_pm_sq(0, params(), sign) == pytest.approx(0.0, abs=1e-14)


def test_podles_relations():
    """Test the sphere relations on eta_0..eta_8."""
    r = build_podles(params())
    reports = check_relations(r, make_presentation("Podles"))

    assert_all_pass(reports)
    by_id = {report.relation_id: report for report in reports}
    # B* leaves the truncation from the top vector
    assert by_id["podles:Podles:BB*"].vectors_skipped == 1
    assert by_id["podles:Podles:B*B"].vectors_skipped == 0


def test_podles_spectrum():
    """Test A eta_n = lambda_+ q^(2n) eta_n."""
    p = params()
    r = build_podles(p)
    expected = [p.lambda_pm() * 0.25**n for n in range(p.cutoff + 1)]

    np.testing.assert_allclose(r.matrix("A").diagonal().real, expected)
    assert r.dim == p.cutoff + 1


@pytest.mark.parametrize("sector", ["+", "-"])
def test_podles_infinite(sector):
    """Test the c = inf sphere representations."""
    r = build_podles(params(c="inf"), sector)

    assert_all_pass(check_relations(r, make_presentation("Podles", r.regime)))
    assert r.matrix("A").diagonal()[1].real == pytest.approx((1 if sector == "+" else -1) * 0.25)


def test_podles_sector_zero():
    """Test the one-dimensional representation B = c^(1/2) u."""
    r = build_podles(params(c="2", u_phase=1j), "0")

    assert r.dim == 1
    assert r.matrix("B").toarray()[0, 0] == pytest.approx(math.sqrt(2) * 1j)
    assert r.matrix("A").nnz == 0
    assert_all_pass(check_relations(r, make_presentation("Podles")))


def test_podles_sector_errors():
    """Test sector - does not exist for c = 0."""
    with pytest.raises(ParameterError, match="sector -"):
        build_podles(params(c="0"), "-")
    with pytest.raises(ParameterError, match="Unknown sector"):
        build_podles(params(), "x")


def test_podles_interior_mask():
    """Test only the top vector is excluded for B*."""
    r = build_podles(params())
    mask = r.interior_mask([("B*",)])

    assert mask[:-1].all()
    assert not mask[-1]
    assert r.interior_mask([("B",)]).all()


def test_magnitude_bounds_every_term():
    """Test the entrywise bound adds |coeff| |M(w1)| |M(w2)| over the terms."""
    r = build_podles(params())
    a, b = abs(r.matrix("A")), abs(r.matrix("B"))
    x = AlgebraElement({("A", "B"): 1, ("B",): -2})

    np.testing.assert_allclose(r.magnitude(x).toarray(), (a @ b + 2 * b).toarray(), atol=1e-14)
    np.testing.assert_allclose(r.abs_matrix("B").toarray(), b.toarray())


def test_with_matrices_drops_stale_bounds():
    """Test replacing a matrix also replaces its entrywise bound."""
    r = build_podles(params())
    broken = r.with_matrices({"B": 2 * r.matrix("B")})

    np.testing.assert_allclose(broken.abs_matrix("B").toarray(), 2 * abs(r.matrix("B")).toarray())


def test_inverse_of_diagonal_generator():
    """Test A^-1 is derived when A is diagonal."""
    r = build_podles(params())
    product = r.matrix("A^-1") @ r.matrix("A")

    assert r.can_represent("A^-1")
    np.testing.assert_allclose(product.toarray(), np.eye(r.dim), atol=1e-12)
    with pytest.raises(ConstructionError, match="no generator"):
        r.matrix("E")


@pytest.mark.parametrize("spin", ["0", "1/2", "1", "3/2", "2"])
def test_spin_relations(spin):
    """Test the spin representations satisfy Uq exactly on every vector."""
    r = build_spin(spin)
    reports = check_relations(r, make_presentation("Uq"))

    assert r.dim == HalfInt.of(spin).doubled + 1
    assert_all_pass(reports)
    assert all(report.vectors_skipped == 0 for report in reports)
    assert all(report.max_residual < 1e-12 for report in reports)
    assert_all_pass(check_star(r))


def test_spin_half_matrices():
    """Test E, F, K on the spin 1/2 block."""
    r = build_spin("1/2")

    assert r.basis == ((1, -1), (1, 1))
    np.testing.assert_allclose(r.matrix("E").toarray(), [[0, 0], [1, 0]])
    np.testing.assert_allclose(r.matrix("K").diagonal().real, [2**0.5, 2**-0.5])


def test_spin_rejects_negative():
    """Test negative spin is rejected."""
    with pytest.raises(ParameterError):
        build_spin("-1")


@pytest.mark.parametrize("c", ["0", "1", "inf"])
@pytest.mark.parametrize("y0", [1.0, -2.0])
def test_yc_relations(c, y0):
    """Test the Yc representation, with c = 1 standing in for c = inf."""
    r = build_yc(params(c=c, y0=y0))

    assert_all_pass(check_relations(r, make_presentation("Yc", r.regime)))
    assert_all_pass(check_star(r))


def test_yc_needs_cutoff():
    """Test the Yc truncation must hold at least three vectors."""
    with pytest.raises(ParameterError, match="cutoff >= 2"):
        build_yc(params(cutoff=1))


CROSS1_CASES = [
    ("1", "+", 1.0),
    ("1", "-", 1.0),
    ("1", "+", 2.0),
    ("0", "+", 1.0),
    ("1/3", "-", 0.5),
]


@pytest.mark.parametrize("c,sign,h", CROSS1_CASES)
def test_cross_I_relations(c, sign, h):
    """Test the first family satisfies the cross product relations, with and without A^-1."""
    r = build_cross_I(params(c=c, sign=sign, h=h, cutoff=6))

    assert r.dim == 49
    assert_all_pass(check_relations(r, make_presentation("Cross")))
    assert_all_pass(check_relations(r, make_presentation("CrossHat")))
    assert_all_pass(check_star(r))


def test_cross_I_errors():
    """Test the first family needs finite c and sign + at c = 0."""
    with pytest.raises(ParameterError, match="finite c"):
        build_cross_I(params(c="inf"))
    with pytest.raises(ParameterError, match="c = 0"):
        build_cross_I(params(c="0", sign="-"))


def test_top_level():
    """Test l_max is rounded down to an admissible level."""
    assert top_level("4", params(l0="1/2")) == HalfInt(7)
    assert top_level("3", params(l0="1")) == HalfInt(6)

    with pytest.raises(ParameterError, match="below l0"):
        top_level("1/2", params(l0="1"))


def test_beta0_vanishes_for_l0_zero():
    """Test beta^0(0, 0) = 0 when l0 = 0."""
    assert coeff_beta0_ll("0", params(c="0")) == 0
    assert coeff_beta0_ll("0", params(c="1")) == 0


@pytest.mark.parametrize("c", ["0", "1", "5/2"])
def test_alpha_plus_at_origin(c):
    """Test alpha^+(0, 0)^2 [3] = rho for l0 = 0."""
    p = params(c=c)

    assert coeff_alpha_plus_ll("0", p) ** 2 * qnum(3, p.qf) == pytest.approx(rho_value(p), abs=1e-12)


def test_alpha_plus_at_origin_infinite():
    """Test alpha^+(0, 0)^2 = [2]^2 / [3] for c = inf."""
    p = params(c="inf")

    assert coeff_alpha_plus_ll("0", p) ** 2 == pytest.approx(qnum(2, 0.5) ** 2 / qnum(3, 0.5), abs=1e-12)


@pytest.mark.parametrize("l0", ["1/2", "1"])
@pytest.mark.parametrize("c", ["1", "inf"])
def test_beta0_sign_separation(l0, c):
    """Test beta^0(l0, l0) is positive for sign + and negative for sign -."""
    assert coeff_beta0_ll(l0, params(c=c, sign="+", l0=l0)) > 0
    assert coeff_beta0_ll(l0, params(c=c, sign="-", l0=l0)) < 0


@pytest.mark.parametrize("l0", ["1/2", "1", "3/2"])
@pytest.mark.parametrize("c", ["0", "1", "inf"])
def test_beta0_solves_quadratic(l0, c):
    """Test beta^0(l0, l0) is a root of its quadratic for both signs."""
    for sign in ("+", "-"):
        if c == "0" and sign == "-":
            continue
        assert quadratic_residual(params(c=c, sign=sign, l0=l0)) < 1e-12


def test_quadratic_absent_for_l0_zero():
    """Test there is no quadratic when l0 = 0."""
    assert quadratic_residual(params(l0="0")) is None


@pytest.mark.parametrize("l0", ["0", "1/2", "1"])
@pytest.mark.parametrize("c,sign", [("1", "+"), ("1", "-"), ("0", "+"), ("inf", "+"), ("inf", "-")])
def test_alpharel(l0, c, sign):
    """Test the alpha^+(l, l) / beta^0(l, l) identity on every level up to l0 + 6."""
    p = params(c=c, sign=sign, l0=l0)

    for n in range(7):
        assert alpharel_residual(p.l0 + n, p) < 1e-10


def test_printed_variant_breaks_alpharel():
    """Test the printed c = inf formulas violate the identity."""
    p = params(c="inf")

    assert alpharel_residual("0", p, "printed") > 1e-6
    assert alpharel_residual("0", p, "limit") < 1e-12


def test_unknown_variant():
    """Test unknown variants are rejected."""
    with pytest.raises(ParameterError, match="Unknown variant"):
        coeff_beta0_ll("0", params(c="inf"), "other")


def test_inadmissible_level():
    """Test levels must be l0 + n."""
    with pytest.raises(ParameterError, match="not of the form"):
        coeff_beta0_ll("1", params(l0="1/2"))


def test_coeff_table_shape():
    """Test rows cover every (l, j) up to l_max and vanish outside."""
    table = coeff_table(params(c="0"), "2")

    assert len(table.rows) == 1 + 3 + 5
    assert table.l_max == HalfInt(4)
    assert table.get(0, 0).beta_zero == 0
    assert table.get(0, 0).alpha_zero == 0
    assert table.get(10, 0).alpha_plus == 0
    assert [key for key, _ in table.sorted_rows()][:2] == [(0, 0), (2, -2)]


@pytest.mark.parametrize("l0", ["0", "1/2", "1"])
def test_coeff_table_closed_forms(l0):
    """Test beta^+(l, l) and alpha^0(l, l-1) against alpha^+(l, l) and beta^0(l, l)."""
    p = params(l0=l0)
    q = p.qf
    table = coeff_table(p, p.l0 + 4)

    for n in range(5):
        l = p.l0 + n
        dl = l.doubled
        alpha = coeff_alpha_plus_ll(l, p)
        beta = coeff_beta0_ll(l, p)
        expected_beta_plus = q ** (dl / 2) * math.sqrt(qnum(2, q) / qnum(dl + 2, q)) * alpha
        assert table.get(dl, dl).beta_plus == pytest.approx(expected_beta_plus, rel=1e-12)
        assert table.get(dl, dl).alpha_plus == pytest.approx(alpha, rel=1e-12)
        if dl > 0:
            expected_alpha_zero = -math.sqrt(qnum(2, q) / qnum(dl, q)) * q ** (dl / 2 + 1) * beta
            assert table.get(dl, dl - 2).alpha_zero == pytest.approx(expected_alpha_zero, rel=1e-12, abs=1e-15)


CROSS2_CASES = [
    ("0", "1", "+"),
    ("1/2", "1", "+"),
    ("1/2", "1", "-"),
    ("1", "1", "-"),
    ("1/2", "0", "+"),
    ("1/2", "inf", "+"),
    ("0", "inf", "-"),
]


@pytest.mark.parametrize("l0,c,sign", CROSS2_CASES)
def test_cross_II_relations(l0, c, sign):
    """Test the second family satisfies the cross product relations and decomposes into spin blocks."""
    p = params(c=c, sign=sign, l0=l0)
    r = build_cross_II(p, p.l0 + 3)

    assert r.basis[0] == (p.l0.doubled, -p.l0.doubled)
    assert_all_pass(check_relations(r, make_presentation("Cross", r.regime)))
    assert_all_pass(check_star(r))
    assert check_restriction_decomposition(r, p.l0).passed


def test_cross_II_x0_diagonal_seed():
    """Test <l0, l0 | x0 | l0, l0> = beta^0(l0, l0)."""
    p = params(l0="1/2")
    r = build_cross_II(p, "7/2")
    i = r.index[(1, 1)]

    assert r.matrix("x0")[i, i].real == pytest.approx(coeff_beta0_ll("1/2", p), rel=1e-12)
    assert r.meta["l_max"] == "7/2"


def test_cross_II_star_of_x():
    """Test x1^H = -q x-1 and A, B, B* are consistent with x1, x0, x-1."""
    p = params(l0="1")
    r = build_cross_II(p, "4")
    q = p.qf
    a_from_x0 = (sparse.identity(r.dim) - r.matrix("x0")) / (1 + q**2)

    np.testing.assert_allclose(r.matrix("x1").conj().T.toarray(), -q * r.matrix("x-1").toarray(), atol=1e-12)
    np.testing.assert_allclose(r.matrix("A").toarray(), a_from_x0.toarray(), atol=1e-14)
    np.testing.assert_allclose(r.matrix("B*").toarray(), r.matrix("B").conj().T.toarray(), atol=1e-12)


def test_cross_II_builds_sphere_generators():
    """Test A, B, B* are part of the constructed representation and match x_to_ABB."""
    r = build_cross_II(params(l0="1/2"), "7/2")

    assert {"A", "B", "B*"} <= set(r.matrices)
    for name, matrix in zip(("A", "B", "B*"), x_to_ABB(r)):
        assert r.can_represent(name)
        np.testing.assert_allclose(r.matrix(name).toarray(), matrix.toarray(), atol=1e-14)
    assert r.interior_mask([("B",), ("B*",)]).any()


def test_cross_II_has_no_derived_A_inverse():
    """Test A is not diagonal in the second family."""
    r = build_cross_II(params(l0="1/2"), "5/2")

    assert not r.can_represent("A^-1")
    with pytest.raises(ConstructionError, match="not diagonal"):
        r.matrix("A^-1")


def test_cross_II_needs_three_levels():
    """Test l_max below l0 + 2 is rejected."""
    with pytest.raises(ParameterError, match="at least l0 \\+ 2"):
        build_cross_II(params(l0="1/2"), "3/2")


def test_cross_II_warns_for_c_zero_minus():
    """Test the c = 0, sign - family is built with a warning."""
    with pytest.warns(UserWarning, match="sign -"):
        build_cross_II(params(c="0", sign="-", l0="1"), "3")


def test_build_rep_dispatch():
    """Test build_rep by kind name."""
    p = params(l0="1/2", cutoff=4)

    assert build_rep("podles", p).kind == "podles"
    assert build_rep("spin", p).dim == 2
    assert build_rep("spin", p, spin="1").dim == 3
    assert build_rep("cross2", p, l_max="5/2").meta["l_max"] == "5/2"

    with pytest.raises(ParameterError, match="Unknown representation kind"):
        build_rep("sphere", p)


def test_with_matrices_replaces_copy():
    """Test with_matrices leaves the original untouched."""
    r = build_podles(params())
    changed = r.with_matrices({"A": sparse.identity(r.dim)})

    assert changed.matrix("A").diagonal()[3] == 1
    assert r.matrix("A").diagonal()[3] != 1
