"""Relation, adjointness and decomposition checks on truncated representations.

Residuals are measured column by column: an operator is applied to each basis
vector and the Euclidean norm of the result is taken, divided by
max(1, norm of the same column of an entrywise bound on the terms). The bound
is the sum of |coeff| |M(w1)| |M(w2)| ... over the terms; on bounded operators
this is an absolute residual, on E, F, K^-1 (which grow geometrically along
the truncation) a relative one. Only interior vectors count, i.e. those on
which no intermediate product of any word leaves the truncation; the rest are
reported as skipped.
"""

import math
from typing import Iterable, Mapping
import warnings

import numpy as np
from scipy import sparse

from podles_lib.algebra import (
    AlgebraElement,
    Presentation,
    all_presentations,
    check_local_confluence,
    format_word,
    make_presentation,
    normal_form,
)
from podles_lib.constants import (
    COEFF_TOLERANCE,
    DEFAULT_MAX_LEN,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    DEFAULT_TRIALS,
    MORPHISM_TOLERANCE,
    QUADRATIC_TOLERANCE,
)
from podles_lib.decouple import (
    Decoupling,
    Operator,
    build_efk,
    build_XY,
    efk_from_decoupling,
    efk_rep,
    inverse,
    recover_EF,
    xk_rep,
    xy_rep,
    y_spectrum_residual,
)
from podles_lib.qrat import HalfInt, qnum
from podles_lib.report import Report
from podles_lib.reps import (
    ConstructionError,
    ParamSet,
    Rep,
    alpharel_residual,
    build_cross_II,
    build_spin,
    coeff_table,
    quadratic_residual,
    top_level,
)


def column_norms(matrix: sparse.spmatrix) -> np.ndarray:
    """Euclidean norm of every column."""
    squared = abs(sparse.csr_matrix(matrix)).power(2)
    return np.sqrt(np.asarray(squared.sum(axis=0)).ravel())


def residual_report(
    relation_id: str,
    residual: sparse.spmatrix,
    mask: np.ndarray,
    tol: float,
    details: tuple[str, ...] = (),
    magnitude: sparse.spmatrix | None = None,
) -> Report:
    """Report the largest column norm of residual over the masked basis vectors.

    With ``magnitude`` each column norm is divided by max(1, the column norm of
    magnitude).
    """
    norms = column_norms(residual)
    if magnitude is not None:
        norms = norms / np.maximum(1.0, column_norms(magnitude))
    checked = int(mask.sum())
    worst = float(norms[mask].max()) if checked else 0.0
    return Report(relation_id, worst, checked, len(mask) - checked, tol, details)


def operator_report(r: Rep, relation_id: str, difference: Operator, tol: float) -> Report:
    mask = r.interior_mask(difference.words)
    return residual_report(relation_id, difference.matrix, mask, tol, magnitude=difference.bound)


def check_relations(
    r: Rep,
    p: Presentation,
    tol: float = DEFAULT_TOLERANCE,
    *,
    only_covered: bool = False,
) -> list[Report]:
    """Evaluate lhs - rhs of every defining relation of p on r's interior vectors.

    Args:
        r: Representation
        p: Presentation whose relations are checked
        tol: Residual tolerance
        only_covered: Skip relations using generators r cannot represent
            (e.g. A^-1 when A is not diagonal) instead of raising

    Raises:
        ConstructionError: If a relation uses a generator r lacks and only_covered is False
    """
    reports = []
    for rid, x in p.relation_elements():
        missing = sorted({letter for letters in x.words() for letter in letters if not r.can_represent(letter)})
        if missing:
            if only_covered:
                continue
            raise ConstructionError(f"The {r.kind} representation cannot evaluate {', '.join(missing)} of {p.name}")
        mask = r.interior_mask(x.words())
        reports.append(
            residual_report(f"{r.kind}:{p.name}:{rid}", r.represent(x), mask, tol, magnitude=r.magnitude(x))
        )
    return reports


def check_star(r: Rep, tol: float = DEFAULT_TOLERANCE) -> list[Report]:
    """Compare matrix(g)^H with factor * matrix(g*) on interior rows and columns."""
    reports = []
    for name, (factor, image) in sorted(r.star_table.items()):
        if not (r.can_represent(name) and r.can_represent(image)):
            continue
        difference = sparse.csr_matrix(r.matrix(name).conj().T - factor * r.matrix(image))
        magnitude = r.abs_matrix(name).T + abs(factor) * r.abs_matrix(image)
        mask = r.interior_mask([(name,), (image,)])
        restricted = sparse.diags(mask.astype(float)) @ difference
        reports.append(residual_report(f"{r.kind}:star:{name}", restricted, mask, tol, magnitude=magnitude))
    return reports


def check_commutant(
    r: Rep,
    set_a: Mapping[str, Operator],
    set_b: Mapping[str, Operator],
    tol: float = DEFAULT_TOLERANCE,
) -> list[Report]:
    """Interior residuals of all commutators [a, b]."""
    reports = []
    for name_a, a in set_a.items():
        for name_b, b in set_b.items():
            reports.append(operator_report(r, f"{r.kind}:[{name_a},{name_b}]", a @ b - b @ a, tol))
    return reports


def check_restriction_decomposition(r: Rep, l0: HalfInt, tol: float = DEFAULT_TOLERANCE) -> Report:
    """Check that E, F, K are block diagonal in l with spin blocks T_l0, T_l0+1, ...

    Returns:
        Report: max_residual is the largest entrywise deviation, divided by
            max(1, largest entry of the spin block) inside a block
    """
    l0 = HalfInt.of(l0)
    details = []
    worst = 0.0
    levels = sorted({label[0] for label in r.basis})
    if not levels or levels[0] != l0.doubled:
        details.append(f"lowest block is {HalfInt(levels[0]) if levels else None}, expected {l0}")
        worst = math.inf
    for name in ("E", "F", "K"):
        coo = r.matrix(name).tocoo()
        for row, col, value in zip(coo.row, coo.col, coo.data):
            if r.basis[row][0] != r.basis[col][0] and abs(value) > tol:
                worst = max(worst, float(abs(value)))
                details.append(f"{name} connects l = {HalfInt(r.basis[col][0])} to l = {HalfInt(r.basis[row][0])}")
    for dl in levels:
        block = [i for i, label in enumerate(r.basis) if label[0] == dl]
        spin = build_spin(HalfInt(dl), r.params.q)
        for name in ("E", "F", "K"):
            expected = spin.matrix(name)
            difference = r.matrix(name)[block][:, block] - expected
            scale = max(1.0, float(abs(expected).max())) if expected.nnz else 1.0
            deviation = float(abs(difference).max()) / scale if difference.nnz else 0.0
            if deviation > tol:
                details.append(f"{name} block at l = {HalfInt(dl)} deviates by {deviation:.3g}")
            worst = max(worst, deviation)
    return Report(f"{r.kind}:decomposition", worst, r.dim, 0, tol, tuple(details))


def check_morphism(
    r: Rep,
    p: Presentation,
    trials: int = DEFAULT_TRIALS,
    max_len: int = DEFAULT_MAX_LEN,
    tol: float = MORPHISM_TOLERANCE,
    seed: int = DEFAULT_SEED,
) -> Report:
    """Compare random words evaluated directly with their normal forms evaluated term by term.

    Deviations are measured against the bounds of the word and of the normal
    form together. vectors_checked counts basis vectors that were interior for
    at least one word.
    """
    rng = np.random.default_rng(seed)
    letters = [letter for letter in p.alphabet if r.can_represent(letter)]
    seen = np.zeros(r.dim, dtype=bool)
    worst, worst_word = 0.0, None
    for _ in range(trials):
        length = int(rng.integers(1, max_len + 1))
        w = tuple(letters[i] for i in rng.integers(0, len(letters), size=length))
        monomial = AlgebraElement({w: 1})
        reduced = normal_form(monomial, p)
        if not all(r.can_represent(letter) for term in reduced.words() for letter in term):
            continue
        mask = r.interior_mask([w, *reduced.words()])
        if not mask.any():
            continue
        seen |= mask
        scale = np.maximum(1.0, column_norms(r.magnitude(monomial) + r.magnitude(reduced)))
        norms = column_norms(r.word_matrix(w) - r.represent(reduced)) / scale
        deviation = float(norms[mask].max())
        if worst_word is None or deviation > worst:
            worst, worst_word = deviation, w
    details = (f"largest deviation at {format_word(worst_word)}",) if worst_word else ()
    checked = int(seen.sum())
    return Report(f"{r.kind}:morphism:{p.name}", worst, checked, r.dim - checked, tol, details)


def check_exact_relations(presentations: Iterable[Presentation] | None = None) -> list[Report]:
    """Every defining relation reduces to zero under its own rewrite system."""
    reports = []
    for p in presentations if presentations is not None else all_presentations():
        failing = [rid for rid, x in p.relation_elements() if normal_form(x, p)]
        reports.append(
            Report(
                relation_id=f"exact:{p.name}:{p.regime}",
                max_residual=float(len(failing)),
                vectors_checked=1,
                vectors_skipped=0,
                tolerance=0.0,
                details=tuple(f"{rid} does not reduce to 0" for rid in failing),
            )
        )
    return reports


def check_confluence(max_len: int, presentations: Iterable[Presentation] | None = None) -> list[Report]:
    return [check_local_confluence(p, max_len) for p in (presentations or all_presentations())]


def _half(n: int, q: float) -> float:
    """[n]^(1/2), with [n]^(1/2) = 0 for n <= 0 (such factors only multiply vanishing coefficients)."""
    return math.sqrt(qnum(n, q)) if n > 0 else 0.0


def recurrence_residual(p: ParamSet, l_max: "HalfInt | str", variant: str = "limit") -> tuple[float, int]:
    """Largest residual of the alpha/beta recurrences in j over the coefficient table.

    Returns:
        tuple: (max residual, number of identities evaluated)
    """
    table = coeff_table(p, l_max, variant)
    q = p.qf
    root2 = math.sqrt(qnum(2, q))
    worst, count = 0.0, 0
    for dl in range(p.l0.doubled, HalfInt.of(l_max).doubled + 1, 2):
        for dj in range(-dl, dl, 2):
            lmj, lpj = (dl - dj) // 2, (dl + dj) // 2
            row, nxt = table.get(dl, dj), table.get(dl, dj + 2)
            step = _half(lmj, q) * _half(lpj + 1, q)
            residuals = [
                _half(lmj, q) * _half(lpj + 3, q) * row.alpha_plus - step / q * nxt.alpha_plus,
                _half(lmj - 1, q) * _half(lpj + 2, q) * row.alpha_zero - step / q * nxt.alpha_zero,
                _half(lmj - 2, q) * _half(lpj + 1, q) * row.alpha_minus - step / q * nxt.alpha_minus,
                _half(lmj + 1, q) * _half(lpj + 2, q) * row.beta_plus
                - step * nxt.beta_plus
                - root2 * q ** (dj / 2) * row.alpha_plus,
                step * (row.beta_zero - nxt.beta_zero) - root2 * q ** (dj / 2) * row.alpha_zero,
            ]
            worst = max(worst, *(abs(value) for value in residuals))
            count += len(residuals)
    return worst, count


def display_residual(p: ParamSet, l_max: "HalfInt | str", variant: str = "limit") -> tuple[float, int]:
    """Largest difference between the x1/x0 matrix entries and the coefficient table."""
    l_max = HalfInt.of(l_max)
    table = coeff_table(p, l_max, variant)
    r = build_cross_II(p, l_max, variant)
    x1 = r.matrix("x1").toarray()
    x0 = r.matrix("x0").toarray()
    worst, count = 0.0, 0
    for (dl, dj), row in table.sorted_rows():
        source = r.index[(dl, dj)]
        roles = [
            (x1, (dl + 2, dj + 2), row.alpha_plus),
            (x1, (dl, dj + 2), row.alpha_zero),
            (x1, (dl - 2, dj + 2), row.alpha_minus),
            (x0, (dl + 2, dj), row.beta_plus),
            (x0, (dl, dj), row.beta_zero),
        ]
        for matrix, target, expected in roles:
            if target not in r.index:
                continue
            worst = max(worst, float(abs(matrix[r.index[target], source] - expected)))
            count += 1
    return worst, count


def check_coefficients(
    p: ParamSet,
    l_max: "HalfInt | str",
    tol: float = COEFF_TOLERANCE,
    variant: str = "limit",
) -> list[Report]:
    """Quadratic for beta^0(l0, l0), the alpha^+/beta^0 identity, recurrences and display consistency."""
    l_max = top_level(l_max, p)
    reports = []
    quadratic = quadratic_residual(p, variant)
    if quadratic is not None:
        reports.append(Report("coeff:quadratic", quadratic, 1, 0, QUADRATIC_TOLERANCE))
    levels = [HalfInt(dl) for dl in range(p.l0.doubled, l_max.doubled + 1, 2)]
    worst = max(alpharel_residual(l, p, variant) for l in levels)
    reports.append(Report("coeff:alpharel", worst, len(levels), 0, tol))
    worst, count = recurrence_residual(p, l_max, variant)
    reports.append(Report("coeff:recurrences", worst, count, 0, tol))
    if l_max.doubled >= p.l0.doubled + 4:
        worst, count = display_residual(p, l_max, variant)
        reports.append(Report("coeff:display", worst, count, 0, tol))
    return reports


def check_decoupling(r: Rep, tol: float = DEFAULT_TOLERANCE) -> list[Report]:
    """X, X*, Y relations and commutants, E/F recovery and the two routes to e, f, k."""
    q = r.params.qf
    d = build_XY(r)
    reports = check_relations(xy_rep(r, d), make_presentation("Decoupled", r.regime), tol, only_covered=True)
    reports += check_relations(xk_rep(r, d), make_presentation("CrossHatK", r.regime), tol, only_covered=True)
    reports.append(operator_report(r, f"{r.kind}:decouple:X*", d.X_star - d.X_star_adjoint, tol))

    g = {name: Operator.generator(r, name) for name in ("A", "B", "B*", "E", "F", "K")}
    sphere = {name: g[name] for name in ("A", "B", "B*")}
    reports += check_commutant(r, {"X": d.X, "X*": d.X_star, "Y": d.Y}, sphere, tol)
    reports.append(operator_report(r, f"{r.kind}:decouple:XK", d.X @ g["K"] - q * (g["K"] @ d.X), tol))
    reports.append(operator_report(r, f"{r.kind}:decouple:YK", d.Y @ g["K"] - g["K"] @ d.Y, tol))
    try:
        reports += _inverse_routes(r, d, g, tol)
    except ConstructionError as e:
        warnings.warn(f"{e}; skipping E/F recovery and the X, Y route to e, f, k", stacklevel=2)
    reports += check_relations(efk_rep(r), make_presentation("UqPrime"), tol)

    if r.kind == "cross1":
        residual = y_spectrum_residual(r, d)
        reports.append(Report(f"{r.kind}:decouple:Y0", residual, r.dim, 0, tol))
    return reports


def _inverse_routes(r: Rep, d: Decoupling, g: Mapping[str, Operator], tol: float) -> list[Report]:
    """Checks that need A^-1 (truncated A can be singular)."""
    q = r.params.qf
    lam = q - 1 / q
    reports = []
    e_rec, f_rec = recover_EF(d.X.matrix, g["B"].matrix, g["K"].matrix, g["A"].matrix, r.params.q)
    # same products as recover_EF, for the reach and the bound of the recovered matrices
    a_inv = Operator(inverse(g["A"].matrix), frozenset({("A^-1",)}))
    f_shape = (q**-1.5 / lam) * ((d.X - q * g["B"]) @ g["K"] @ a_inv)
    e_shape = (q**-1.5 / lam) * (a_inv @ g["K"] @ (d.X_star_adjoint - q * g["B*"]))
    f_recovered = Operator(f_rec, f_shape.words, f_shape.bound)
    e_recovered = Operator(e_rec, e_shape.words, e_shape.bound)
    reports.append(operator_report(r, f"{r.kind}:decouple:recover_F", f_recovered - g["F"], tol))
    reports.append(operator_report(r, f"{r.kind}:decouple:recover_E", e_recovered - g["E"], tol))

    e, f, k = build_efk(r)
    e_alt, f_alt, k_alt = efk_from_decoupling(r, d)
    reports.append(operator_report(r, f"{r.kind}:decouple:f", f - f_alt, tol))
    reports.append(operator_report(r, f"{r.kind}:decouple:k", k - k_alt, tol))
    if r.can_represent("A^-1"):
        reports.append(operator_report(r, f"{r.kind}:decouple:e", e - e_alt, tol))
    else:
        # the truncated inverse of a non-diagonal A does not satisfy EA^-1 = A^-1 E + ...
        multiplied = e @ d.Y - (q**0.5 / lam) * (d.X_star - (1 / q) * g["B*"])
        reports.append(operator_report(r, f"{r.kind}:decouple:e", multiplied, tol))
    return reports


def run_suite(
    r: Rep,
    *,
    tol: float = DEFAULT_TOLERANCE,
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    max_len: int = DEFAULT_MAX_LEN,
) -> list[Report]:
    """Every check that applies to the kind of r."""
    presentation = make_presentation(r.presentation_id, r.regime)
    reports = check_relations(r, presentation, tol)
    if r.kind == "cross1":
        reports += check_relations(r, make_presentation("CrossHat", r.regime), tol)
    if r.kind == "spin":
        reports += check_relations(efk_rep(r), make_presentation("UqPrime"), tol)
    reports += check_star(r, tol)
    reports.append(check_morphism(r, presentation, trials, max_len, max(tol, MORPHISM_TOLERANCE), seed))
    if r.kind == "cross2":
        reports.append(check_restriction_decomposition(r, r.params.l0, tol))
        l_max = r.meta.get("l_max", str(r.params.l0 + 6))
        reports += check_coefficients(r.params, l_max, variant=r.meta.get("variant", "limit"))
    if r.kind in ("cross1", "cross2"):
        reports += check_decoupling(r, tol)
    return reports
