"""Truncated sparse representations and the spin-decomposition coefficients.

Labels are integer tuples: ``(n,)`` for the sphere and Yc representations,
``(n, j)`` for the first cross product family and ``(2l, 2j)`` (doubled) for
spin blocks and the second family. Each generator declares the label
offsets it can produce; ``Rep.interior_mask`` uses them to decide which basis
vectors a word can be applied to without leaving the truncation.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import product
import math
from types import MappingProxyType
from typing import Any, Iterable, Mapping
import warnings

import numpy as np
from scipy import sparse

from podles_lib.algebra import INVERSE_SUFFIX, AlgebraElement, Word, evaluate_element
from podles_lib.constants import RADICAND_SLACK, REGIME_FINITE, REGIME_INFINITE, REP_KINDS
from podles_lib.qrat import HalfInt, ParameterError, format_c, parse_c, parse_q, qnum


Label = tuple[int, ...]


class ConstructionError(ValueError):
    """Raised when a representation cannot be built from its formulas."""


def parse_sign(value: "str | int") -> int:
    """Map ``"+"``/``"-"`` (or 1/-1) to 1/-1."""
    if value in ("+", "plus", 1, "1", "+1"):
        return 1
    if value in ("-", "minus", -1, "-1"):
        return -1
    raise ParameterError(f"Invalid sign: {value!r} (expected + or -)")


def format_sign(sign: int) -> str:
    return "+" if sign > 0 else "-"


@dataclass(frozen=True)
class ParamSet:
    """Parameters of a representation.

    ``c = None`` stands for c = inf. ``h``, ``y0`` and ``u_phase`` are the
    scalar instances of the operators H, Y0 and u.
    """

    q: Fraction = Fraction(1, 2)
    c: Fraction | None = Fraction(1)
    sign: int = 1
    l0: HalfInt = HalfInt(0)
    h: float = 1.0
    y0: float = 1.0
    u_phase: complex = 1.0
    cutoff: int = 8

    def __post_init__(self) -> None:
        errors = []
        if not 0 < self.q < 1:
            errors.append(f"q must lie in (0, 1), got {self.q}")
        if self.c is not None and self.c < 0:
            errors.append(f"c must be >= 0 or inf, got {self.c}")
        if self.sign not in (1, -1):
            errors.append(f"sign must be +1 or -1, got {self.sign}")
        if self.l0.doubled < 0:
            errors.append(f"l0 must be >= 0, got {self.l0}")
        if not self.h > 0:
            errors.append(f"h must be positive, got {self.h}")
        if self.y0 == 0:
            errors.append("y0 must be nonzero")
        if abs(abs(self.u_phase) - 1) > 1e-12:
            errors.append(f"u_phase must have modulus 1, got {self.u_phase}")
        if self.cutoff < 1:
            errors.append(f"cutoff must be >= 1, got {self.cutoff}")
        if errors:
            raise ParameterError(f"Invalid parameters: {', '.join(errors)}")

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def infinite(self) -> bool:
        return self.c is None

    @property
    def regime(self) -> str:
        return REGIME_INFINITE if self.infinite else REGIME_FINITE

    @property
    def lam(self) -> float:
        return self.qf - 1 / self.qf

    def lambda_pm(self, sign: int | None = None) -> float:
        """lambda_+- = 1/2 +- (c + 1/4)^(1/2) for the given (default: own) sign."""
        if self.c is None:
            raise ParameterError("lambda_+- is defined for finite c only")
        sign = self.sign if sign is None else sign
        return 0.5 + sign * math.sqrt(float(self.c) + 0.25)

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": str(self.q),
            "c": format_c(self.c),
            "sign": format_sign(self.sign),
            "l0": str(self.l0),
            "h": self.h,
            "y0": self.y0,
            "u_phase": [complex(self.u_phase).real, complex(self.u_phase).imag],
            "cutoff": self.cutoff,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ParamSet":
        phase = data.get("u_phase", [1.0, 0.0])
        return cls(
            q=parse_q(str(data.get("q", "1/2"))),
            c=parse_c(str(data.get("c", "1"))),
            sign=parse_sign(data.get("sign", "+")),
            l0=HalfInt.of(str(data.get("l0", "0"))),
            h=float(data.get("h", 1.0)),
            y0=float(data.get("y0", 1.0)),
            u_phase=complex(phase[0], phase[1]) if isinstance(phase, list) else complex(phase),
            cutoff=int(data.get("cutoff", 8)),
        )


def _root(value: float, where: str) -> float:
    """Square root of a radicand, clamping rounding noise below zero."""
    if value < -RADICAND_SLACK:
        raise ConstructionError(f"Negative radicand {value:.6g} at {where}")
    return math.sqrt(max(value, 0.0))


def _invert(name: str) -> str:
    if name.endswith(INVERSE_SUFFIX):
        return name[: -len(INVERSE_SUFFIX)]
    return name + INVERSE_SUFFIX


def _diagonal_only(matrix: sparse.spmatrix) -> bool:
    coo = matrix.tocoo()
    return bool(np.all(coo.row[coo.data != 0] == coo.col[coo.data != 0]))


@dataclass(frozen=True)
class Rep:
    """A truncated representation on a labeled basis.

    ``shifts`` maps each base generator to the label offsets it produces.
    ``derived`` maps composite generators (products built by decoupling)
    to their words over base generators; their reach is the reach of those
    words. ``magnitudes`` holds entrywise bounds for derived generators: the
    absolute values of the factors they were multiplied from. ``star_table``
    maps a generator to (factor, generator) with
    matrix(g)^H = factor * matrix(generator).
    """

    kind: str
    params: ParamSet
    presentation_id: str
    regime: str
    basis: tuple[Label, ...]
    matrices: Mapping[str, sparse.csr_matrix]
    shifts: Mapping[str, frozenset[Label]]
    star_table: Mapping[str, tuple[complex, str]]
    derived: Mapping[str, frozenset[Word]] = field(default_factory=dict)
    meta: Mapping[str, str] = field(default_factory=dict)
    magnitudes: Mapping[str, sparse.csr_matrix] = field(default_factory=dict)

    @cached_property
    def index(self) -> dict[Label, int]:
        return {label: i for i, label in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def valid_label(self, label: Label) -> bool:
        """Whether label belongs to the untruncated lattice."""
        if self.kind in ("podles", "yc"):
            return label[0] >= 0 and (self.meta.get("sector") != "0" or label[0] == 0)
        if self.kind == "cross1":
            return label[0] >= 0 and label[1] >= 0
        dl, dj = label
        if abs(dj) > dl or (dl - dj) % 2:
            return False
        if self.kind == "spin":
            return dl == self.params.l0.doubled
        return dl >= self.params.l0.doubled and (dl - self.params.l0.doubled) % 2 == 0

    def can_represent(self, name: str) -> bool:
        if name in self.matrices:
            return True
        base = _invert(name)
        return name.endswith(INVERSE_SUFFIX) and base in self.matrices and _diagonal_only(self.matrices[base])

    def matrix(self, name: str) -> sparse.csr_matrix:
        """Matrix of a generator; inverses of diagonal generators are derived.

        Raises:
            ConstructionError: If the generator is not available
        """
        if name in self.matrices:
            return self.matrices[name]
        base = _invert(name)
        if name.endswith(INVERSE_SUFFIX) and base in self.matrices:
            matrix = self.matrices[base]
            if not _diagonal_only(matrix):
                raise ConstructionError(f"{base} is not diagonal in the {self.kind} representation; cannot invert")
            diagonal = matrix.diagonal()
            if np.any(diagonal == 0):
                raise ConstructionError(f"{base} is singular in the {self.kind} representation")
            return sparse.diags(1 / diagonal, format="csr")
        raise ConstructionError(f"The {self.kind} representation has no generator {name}")

    def _expand(self, letters: Word) -> list[Word]:
        """Rewrite a word over base generators (derived letters expanded)."""
        options = []
        for letter in letters:
            if letter in self.derived:
                options.append(sorted(self.derived[letter]))
            elif letter.endswith(INVERSE_SUFFIX) and _invert(letter) in self.derived:
                options.append(
                    sorted(tuple(_invert(x) for x in reversed(w)) for w in self.derived[_invert(letter)])
                )
            else:
                options.append([(letter,)])
        return [sum(choice, ()) for choice in product(*options)]

    def shifts_of(self, letter: str) -> frozenset[Label]:
        if letter in self.shifts:
            return self.shifts[letter]
        base = _invert(letter)
        if letter.endswith(INVERSE_SUFFIX) and base in self.shifts:
            return frozenset(tuple(-x for x in shift) for shift in self.shifts[base])
        raise ConstructionError(f"No grading shift declared for {letter}")

    def _stays_inside(self, label: Label, letters: Word) -> bool:
        current = {label}
        for letter in reversed(letters):
            reached = set()
            for start in current:
                for shift in self.shifts_of(letter):
                    target = tuple(a + b for a, b in zip(start, shift))
                    if not self.valid_label(target):
                        continue
                    if target not in self.index:
                        return False
                    reached.add(target)
            current = reached
        return True

    def interior_mask(self, words: Iterable[Word]) -> np.ndarray:
        """Boolean mask of basis vectors on which every word stays inside the truncation."""
        expanded = sorted({base for letters in words for base in self._expand(tuple(letters))})
        mask = np.ones(self.dim, dtype=bool)
        for i, label in enumerate(self.basis):
            mask[i] = all(self._stays_inside(label, letters) for letters in expanded)
        return mask

    def word_matrix(self, letters: Word) -> sparse.csr_matrix:
        result = sparse.identity(self.dim, dtype=complex, format="csr")
        for letter in letters:
            result = result @ self.matrix(letter)
        return sparse.csr_matrix(result)

    def represent(self, x: AlgebraElement) -> sparse.csr_matrix:
        """Matrix of an algebra element (coefficients evaluated at the rep's q, c)."""
        identity = sparse.identity(self.dim, dtype=complex, format="csr")
        return sparse.csr_matrix(evaluate_element(x, self.matrix, identity, self.params.q, self.params.c))

    def abs_matrix(self, name: str) -> sparse.csr_matrix:
        """Entrywise bound for the matrix of a generator."""
        if name in self.magnitudes:
            return self.magnitudes[name]
        return sparse.csr_matrix(abs(self.matrix(name)))

    def magnitude(self, x: AlgebraElement) -> sparse.csr_matrix:
        """Entrywise bound sum |coeff| |M(w1)| |M(w2)| ... for represent(x).

        Rounding errors of represent(x) are small against this matrix, however
        much its terms cancel.
        """
        identity = sparse.identity(self.dim, format="csr")
        return sparse.csr_matrix(
            evaluate_element(x, self.abs_matrix, identity, self.params.q, self.params.c, absolute=True)
        )

    def with_matrices(self, updates: Mapping[str, sparse.spmatrix]) -> "Rep":
        """Copy of this Rep with some matrices replaced (used for fault injection)."""
        matrices = dict(self.matrices)
        for name, matrix in updates.items():
            matrices[name] = sparse.csr_matrix(matrix, dtype=complex)
        magnitudes = {name: bound for name, bound in self.magnitudes.items() if name not in updates}
        return replace(self, matrices=MappingProxyType(matrices), magnitudes=MappingProxyType(magnitudes))


class _MatrixBuilder:
    """Accumulates sparse entries (target <- source) per generator."""

    def __init__(self, basis: list[Label]) -> None:
        self.basis = basis
        self.index = {label: i for i, label in enumerate(basis)}
        self.entries: dict[str, dict[tuple[int, int], complex]] = {}

    def set(self, name: str, target: Label, source: Label, value: complex) -> None:
        entries = self.entries.setdefault(name, {})
        if value == 0 or target not in self.index or source not in self.index:
            return
        key = (self.index[target], self.index[source])
        entries[key] = entries.get(key, 0) + value

    def declare(self, *names: str) -> None:
        for name in names:
            self.entries.setdefault(name, {})

    def csr(self, name: str) -> sparse.csr_matrix:
        size = len(self.basis)
        entries = self.entries.get(name, {})
        rows = [key[0] for key in entries]
        cols = [key[1] for key in entries]
        data = [complex(value) for value in entries.values()]
        return sparse.coo_matrix((data, (rows, cols)), shape=(size, size), dtype=complex).tocsr()

    def matrices(self) -> dict[str, sparse.csr_matrix]:
        return {name: self.csr(name) for name in self.entries}


def _adjoint(matrix: sparse.csr_matrix) -> sparse.csr_matrix:
    return sparse.csr_matrix(matrix.conj().T)


def _finish(
    kind: str,
    params: ParamSet,
    presentation_id: str,
    basis: list[Label],
    matrices: dict[str, sparse.csr_matrix],
    shifts: dict[str, set[Label]],
    star_table: dict[str, tuple[complex, str]],
    meta: dict[str, str] | None = None,
) -> Rep:
    return Rep(
        kind=kind,
        params=params,
        presentation_id=presentation_id,
        regime=params.regime,
        basis=tuple(basis),
        matrices=MappingProxyType(matrices),
        shifts=MappingProxyType({name: frozenset(values) for name, values in shifts.items()}),
        star_table=MappingProxyType(star_table),
        meta=MappingProxyType(meta or {}),
    )


SPHERE_STAR = {"A": (1, "A"), "B": (1, "B*"), "B*": (1, "B")}
U_STAR = {"E": (1, "F"), "F": (1, "E"), "K": (1, "K"), "K^-1": (1, "K^-1")}


def c_pm_sq(n: int, p: ParamSet, sign: int | None = None) -> float:
    """c_+-(n)^2 = c + lambda q^(2n) - (lambda q^(2n))^2."""
    lam = p.lambda_pm(sign)
    x = lam * p.qf ** (2 * n)
    return float(p.c) + x - x * x


def build_podles(p: ParamSet, sector: str = "+") -> Rep:
    """Podles sphere representation on eta_0..eta_cutoff (sector 0: one-dimensional).

    Raises:
        ParameterError: For sector - with c = 0 or an unknown sector
    """
    if sector not in ("+", "-", "0"):
        raise ParameterError(f"Unknown sector: {sector!r}")
    if sector == "-" and p.c == 0:
        raise ParameterError("There is no sector - for c = 0")
    q = p.qf
    if sector == "0":
        basis = [(0,)]
        scale = 1.0 if p.infinite else math.sqrt(float(p.c))
        b = _MatrixBuilder(basis)
        b.declare("A")
        b.set("B", (0,), (0,), scale * p.u_phase)
        b.set("B*", (0,), (0,), scale * complex(p.u_phase).conjugate())
        shifts = {"A": {(0,)}, "B": {(0,)}, "B*": {(0,)}}
        return _finish("podles", p, "Podles", basis, b.matrices(), shifts, dict(SPHERE_STAR), {"sector": "0"})

    sign = 1 if sector == "+" else -1
    basis = [(n,) for n in range(p.cutoff + 1)]
    b = _MatrixBuilder(basis)
    for n in range(p.cutoff + 1):
        if p.infinite:
            a_value = sign * q ** (2 * n)
            weight = _root(1 - q ** (4 * n), f"n={n}")
        else:
            a_value = p.lambda_pm(sign) * q ** (2 * n)
            weight = _root(c_pm_sq(n, p, sign), f"n={n}")
        b.set("A", (n,), (n,), a_value)
        b.set("B", (n - 1,), (n,), weight)
        b.set("B*", (n,), (n - 1,), weight)
    b.declare("A", "B", "B*")
    shifts = {"A": {(0,)}, "B": {(-1,)}, "B*": {(1,)}}
    return _finish("podles", p, "Podles", basis, b.matrices(), shifts, dict(SPHERE_STAR), {"sector": sector})


def _spin_entries(b: _MatrixBuilder, dl: int, q: float) -> None:
    """E, F, K, K^-1 on the spin-l block (doubled labels)."""
    for dj in range(-dl, dl + 1, 2):
        lmj = (dl - dj) // 2
        lpj = (dl + dj) // 2
        label = (dl, dj)
        b.set("E", (dl, dj + 2), label, _root(qnum(lmj, q) * qnum(lpj + 1, q), f"E at {label}"))
        b.set("F", (dl, dj - 2), label, _root(qnum(lpj, q) * qnum(lmj + 1, q), f"F at {label}"))
        b.set("K", label, label, q ** (dj / 2))
        b.set("K^-1", label, label, q ** (-dj / 2))
    b.declare("E", "F", "K", "K^-1")


SPIN_SHIFTS = {"E": {(0, 2)}, "F": {(0, -2)}, "K": {(0, 0)}, "K^-1": {(0, 0)}}


def build_spin(l: "HalfInt | str | Fraction | int", q: Fraction = Fraction(1, 2)) -> Rep:
    """The (2l+1)-dimensional spin representation, basis ordered by j ascending."""
    l = HalfInt.of(l)
    if l.doubled < 0:
        raise ParameterError(f"Spin must be >= 0, got {l}")
    params = ParamSet(q=q, l0=l)
    basis = [(l.doubled, dj) for dj in range(-l.doubled, l.doubled + 1, 2)]
    b = _MatrixBuilder(basis)
    _spin_entries(b, l.doubled, params.qf)
    return _finish("spin", params, "Uq", basis, b.matrices(), dict(SPIN_SHIFTS), dict(U_STAR), {"spin": str(l)})


def build_yc(p: ParamSet) -> Rep:
    """Representation of X, X*, Y on zeta_0..zeta_cutoff; c = inf uses c = 1."""
    if p.cutoff < 2:
        raise ParameterError(f"The Yc representation needs cutoff >= 2, got {p.cutoff}")
    q = p.qf
    c_value = 1.0 if p.infinite else float(p.c)
    basis = [(n,) for n in range(p.cutoff + 1)]
    b = _MatrixBuilder(basis)
    for n in range(p.cutoff + 1):
        weight = math.sqrt(1 - q ** (2 * n + 2)) * _root(q ** (2 * n) * p.y0**2 + c_value, f"n={n}")
        b.set("X", (n + 1,), (n,), weight)
        b.set("X*", (n,), (n + 1,), weight)
        b.set("Y", (n,), (n,), q ** (2 * n) * p.y0)
    b.declare("X", "X*", "Y")
    shifts = {"X": {(1,)}, "X*": {(-1,)}, "Y": {(0,)}}
    star = {"X": (1, "X*"), "X*": (1, "X"), "Y": (1, "Y"), "Y^-1": (1, "Y^-1")}
    return _finish("yc", p, "Yc", basis, b.matrices(), shifts, star)


CROSS1_SHIFTS = {
    "A": {(0, 0)},
    "B": {(-1, 0)},
    "B*": {(1, 0)},
    "E": {(0, -1), (1, 0)},
    "F": {(0, 1), (-1, 0)},
    "K": {(0, 0)},
    "K^-1": {(0, 0)},
}


def build_cross_I(p: ParamSet) -> Rep:
    """First family of cross product representations on the (n, j) grid.

    E and F carry the factor sign(lambda_+-); without it the relations fail
    for lambda_- < 0.

    Raises:
        ParameterError: For c = inf, or c = 0 with sign -
        ConstructionError: For a negative radicand
    """
    if p.infinite:
        raise ParameterError("The (n, j) cross product family needs finite c")
    if p.c == 0 and p.sign < 0:
        raise ParameterError("For c = 0 only the + representation exists")
    q, h, c_value = p.qf, p.h, float(p.c)
    lam_pm = p.lambda_pm()
    sgn = math.copysign(1.0, lam_pm)
    pre = sgn * q**-0.5 / p.lam
    size = p.cutoff + 1
    basis = [(n, j) for n in range(size) for j in range(size)]
    b = _MatrixBuilder(basis)
    for n, j in basis:
        label = (n, j)
        where = f"(n, j) = {label}"
        weight = _root(c_pm_sq(n, p), where)
        b.set("A", label, label, lam_pm * q ** (2 * n))
        b.set("B", (n - 1, j), label, weight)
        b.set("B*", (n + 1, j), label, _root(c_pm_sq(n + 1, p), where))
        b.set("K", label, label, q ** (n - j) * h)
        b.set("K^-1", label, label, q ** (j - n) / h)
        lam_j = math.sqrt(1 - q ** (2 * j))
        lam_j1 = math.sqrt(1 - q ** (2 * j + 2))
        e_down = q**-n * lam_j * _root(lam_pm**-2 * q ** (-2 * j) * c_value + h**-4, where) * h
        e_up = q**-j * _root(lam_pm**-2 * q ** (-2 * n - 2) * c_value + 1 / lam_pm - q ** (2 * n + 2), where) * h
        f_up = q**-n * lam_j1 * _root(lam_pm**-2 * q ** (-2 * j - 2) * c_value + h**-4, where) * h
        f_down = q**-j * _root(lam_pm**-2 * q ** (-2 * n) * c_value + 1 / lam_pm - q ** (2 * n), where) * h
        b.set("E", (n, j - 1), label, pre * e_down)
        b.set("E", (n + 1, j), label, -pre * e_up)
        b.set("F", (n, j + 1), label, pre * f_up)
        b.set("F", (n - 1, j), label, -pre * f_down)
    b.declare(*CROSS1_SHIFTS)
    star = dict(SPHERE_STAR) | dict(U_STAR) | {"A^-1": (1, "A^-1")}
    return _finish("cross1", p, "Cross", basis, b.matrices(), dict(CROSS1_SHIFTS), star)


# Second family: coefficients of x1, x0, x-1 between spin blocks


def _check_level(l: HalfInt, p: ParamSet) -> None:
    if l < p.l0 or (l.doubled - p.l0.doubled) % 2:
        raise ParameterError(f"l = {l} is not of the form l0 + n with l0 = {p.l0}")


def top_level(l_max: "HalfInt | str", p: ParamSet) -> HalfInt:
    """Highest admissible level l0 + n not above l_max."""
    l_max = HalfInt.of(l_max)
    if l_max < p.l0:
        raise ParameterError(f"l_max = {l_max} is below l0 = {p.l0}")
    return HalfInt(l_max.doubled - (l_max.doubled - p.l0.doubled) % 2)


def coeff_beta0_ll(l: "HalfInt | str", p: ParamSet, variant: str = "limit") -> float:
    """beta^0(l, l) for the sign of p.

    For c = inf, ``variant="limit"`` (the default) is the c -> inf limit of the
    finite-c value after rescaling by c^(-1/2); ``variant="printed"`` keeps the
    additional term -(1 - q^-2)[l - l0][l + l0 + 1], which is inconsistent
    with the c = inf relations.
    """
    l = HalfInt.of(l)
    _check_level(l, p)
    q = p.qf
    dl, dl0 = l.doubled, p.l0.doubled
    n2l0 = qnum(dl0, q)
    n2l2 = qnum(dl + 2, q)
    spread = qnum((dl - dl0) // 2, q) * qnum((dl + dl0) // 2 + 1, q)
    if not p.infinite:
        lam_own, lam_other = p.lambda_pm(p.sign), p.lambda_pm(-p.sign)
        return (n2l0 * (lam_own / q**2 - lam_other) - (1 - q**-2) * spread) / n2l2
    if variant == "printed":
        return (p.sign / q * qnum(2, q) * n2l0 - (1 - q**-2) * spread) / n2l2
    if variant != "limit":
        raise ParameterError(f"Unknown variant: {variant}")
    return p.sign * n2l0 * (1 + q**-2) / n2l2


def coeff_alpha_plus_ll(l: "HalfInt | str", p: ParamSet, variant: str = "limit") -> float:
    """alpha^+(l, l) > 0 for the sign of p (see coeff_beta0_ll for ``variant``).

    Raises:
        ConstructionError: If the radicand is not positive
    """
    l = HalfInt.of(l)
    _check_level(l, p)
    q = p.qf
    dl, dl0 = l.doubled, p.l0.doubled
    n2l0 = qnum(dl0, q)
    n2l2 = qnum(dl + 2, q)
    top = qnum((dl - dl0) // 2 + 1, q) * qnum((dl + dl0) // 2 + 1, q)
    if not p.infinite:
        r = math.sqrt(float(p.c) + 0.25)
        inner = -p.lam / 2 * top + p.sign * n2l0 * r
        radicand = n2l2**2 * (float(p.c) + 0.25) - inner**2
    elif variant == "printed":
        inner = -p.lam / qnum(2, q) * top + p.sign * n2l0
        radicand = n2l2**2 - inner**2
    elif variant == "limit":
        radicand = n2l2**2 - n2l0**2
    else:
        raise ParameterError(f"Unknown variant: {variant}")
    if radicand <= 0:
        raise ConstructionError(f"alpha^+({l}, {l}) radicand {radicand:.6g} is not positive")
    return math.sqrt(qnum(2, q) / (qnum(dl + 3, q) * n2l2) * radicand)


def rho_value(p: ParamSet) -> float:
    q = p.qf
    return 1 + (q + 1 / q) ** 2 * float(p.c)


def alpharel_residual(l: "HalfInt | str", p: ParamSet, variant: str = "limit") -> float:
    """|lhs - rhs| of the alpha^+(l,l)^2 versus beta^0(l,l) identity at level l."""
    l = HalfInt.of(l)
    q = p.qf
    alpha = coeff_alpha_plus_ll(l, p, variant)
    beta = coeff_beta0_ll(l, p, variant)
    lhs = (1 + q**2) * q * qnum(l.doubled + 3, q) / qnum(l.doubled + 2, q) * alpha**2
    if p.infinite:
        rhs = q**2 * qnum(2, q) ** 2 - q**4 * beta**2
    else:
        rhs = q**2 * rho_value(p) - (1 - q**2) * q**2 * beta - q**4 * beta**2
    return abs(lhs - rhs)


def quadratic_residual(p: ParamSet, variant: str = "limit") -> float | None:
    """Residual of beta^0(l0, l0) in its quadratic; None for l0 = 0 (no quadratic)."""
    if p.l0.doubled == 0:
        return None
    q = p.qf
    x = qnum(p.l0.doubled + 2, q) / qnum(p.l0.doubled, q) * coeff_beta0_ll(p.l0, p, variant)
    if p.infinite:
        return abs(q**2 * x**2 - qnum(2, q) ** 2)
    return abs(q**2 * x**2 - (1 - q**2) * x - rho_value(p))


@dataclass(frozen=True)
class CoeffRow:
    alpha_plus: float
    alpha_zero: float
    alpha_minus: float
    beta_plus: float
    beta_zero: float


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients keyed by doubled (l, j)."""

    params: ParamSet
    l_max: HalfInt
    rows: Mapping[tuple[int, int], CoeffRow]

    def get(self, dl: int, dj: int) -> CoeffRow:
        """Row at doubled (l, j); out-of-range entries are zero."""
        return self.rows.get((dl, dj), CoeffRow(0.0, 0.0, 0.0, 0.0, 0.0))

    def sorted_rows(self) -> list[tuple[tuple[int, int], CoeffRow]]:
        return sorted(self.rows.items())


class _Seeds:
    """alpha^+(l, l) and beta^0(l, l) per doubled level, zero below l0."""

    def __init__(self, p: ParamSet, top: int, variant: str = "limit") -> None:
        self.p = p
        self.alpha: dict[int, float] = {}
        self.beta: dict[int, float] = {}
        for dl in range(p.l0.doubled, top + 1, 2):
            self.alpha[dl] = coeff_alpha_plus_ll(HalfInt(dl), p, variant)
            self.beta[dl] = coeff_beta0_ll(HalfInt(dl), p, variant)

    def a(self, dl: int) -> float:
        return self.alpha.get(dl, 0.0)

    def b(self, dl: int) -> float:
        return self.beta.get(dl, 0.0)


def coeff_table(p: ParamSet, l_max: "HalfInt | str", variant: str = "limit") -> CoeffTable:
    """All alpha^e(l, j), beta^e(l, j) for l0 <= l <= l_max from the closed forms."""
    l_max = top_level(l_max, p)
    q = p.qf
    seeds = _Seeds(p, l_max.doubled, variant)
    n2 = qnum(2, q)
    rows = {}
    for dl in range(p.l0.doubled, l_max.doubled + 1, 2):
        for dj in range(-dl, dl + 1, 2):
            lmj, lpj = (dl - dj) // 2, (dl + dj) // 2
            where = f"(l, j) = ({HalfInt(dl)}, {HalfInt(dj)})"
            alpha_plus = (
                q ** ((dj - dl) // 2)
                * _root(qnum(lpj + 1, q) * qnum(lpj + 2, q), where)
                / math.sqrt(qnum(dl + 1, q) * qnum(dl + 2, q))
                * seeds.a(dl)
            )
            beta_plus = (
                q ** (dj / 2)
                * _root(qnum(lmj + 1, q) * qnum(lpj + 1, q), where)
                * math.sqrt(n2 / (qnum(dl + 1, q) * qnum(dl + 2, q)))
                * seeds.a(dl)
            )
            if dl == 0:
                alpha_zero, beta_zero = 0.0, seeds.b(dl)
            else:
                alpha_ll_minus_1 = -math.sqrt(n2 / qnum(dl, q)) * q ** (dl / 2 + 1) * seeds.b(dl)
                alpha_zero = (
                    q ** ((dj - dl) // 2 + 1)
                    * _root(qnum(lmj, q) * qnum(lpj + 1, q), where)
                    / math.sqrt(qnum(dl, q))
                    * alpha_ll_minus_1
                )
                beta_zero = (1 - q ** (lpj + 1) * qnum(lmj, q) * n2 / qnum(dl, q)) * seeds.b(dl)
            if dl - 2 >= p.l0.doubled:
                alpha_ll_minus_2 = (
                    -(q ** (dl - 1)) * math.sqrt(n2 / (qnum(dl - 1, q) * qnum(dl, q))) * seeds.a(dl - 2)
                )
                alpha_minus = (
                    q ** ((dj - dl) // 2 + 2)
                    * _root(qnum(lmj - 1, q) * qnum(lmj, q), where)
                    / math.sqrt(n2)
                    * alpha_ll_minus_2
                )
            else:
                alpha_minus = 0.0
            rows[(dl, dj)] = CoeffRow(alpha_plus, alpha_zero, alpha_minus, beta_plus, beta_zero)
    return CoeffTable(params=p, l_max=l_max, rows=MappingProxyType(rows))


CROSS2_SHIFTS = {
    "x1": {(2, 2), (0, 2), (-2, 2)},
    "x0": {(2, 0), (0, 0), (-2, 0)},
    "x-1": {(2, -2), (0, -2), (-2, -2)},
    "A": {(2, 0), (0, 0), (-2, 0)},
    "B": {(2, -2), (0, -2), (-2, -2)},
    "B*": {(2, 2), (0, 2), (-2, 2)},
} | SPIN_SHIFTS


def build_cross_II(p: ParamSet, l_max: "HalfInt | str", variant: str = "limit") -> Rep:
    """Second family: spin blocks T_l0, T_l0+1, ..., T_l_max joined by x1, x0, x-1.

    The x-generators follow the closed action formulas with alpha^+(l, l) and
    beta^0(l, l) from the coefficient operations; A, B, B* are obtained from
    them, E, F, K act blockwise.
    """
    l_max = top_level(l_max, p)
    if l_max.doubled < p.l0.doubled + 4:
        raise ParameterError(f"l_max must be at least l0 + 2, got {l_max}")
    if p.c == 0 and p.sign < 0 and p.l0.doubled > 0:
        warnings.warn(
            "c = 0 has no sphere representation with sign -; constructing the - family anyway",
            stacklevel=2,
        )
    q = p.qf
    n2 = qnum(2, q)
    seeds = _Seeds(p, l_max.doubled, variant)
    dl0 = p.l0.doubled
    basis = [(dl, dj) for dl in range(dl0, l_max.doubled + 1, 2) for dj in range(-dl, dl + 1, 2)]
    b = _MatrixBuilder(basis)
    for dl, dj in basis:
        label = (dl, dj)
        where = f"(l, j) = ({HalfInt(dl)}, {HalfInt(dj)})"
        lmj, lpj = (dl - dj) // 2, (dl + dj) // 2
        up = seeds.a(dl) / math.sqrt(qnum(dl + 1, q) * qnum(dl + 2, q))
        down = seeds.a(dl - 2) / math.sqrt(qnum(dl - 1, q) * qnum(dl, q)) if dl - 2 >= dl0 else 0.0
        middle = seeds.b(dl) / qnum(dl, q) if dl > 0 else 0.0

        b.set("x1", (dl + 2, dj + 2), label, q ** ((dj - dl) // 2) * _root(qnum(lpj + 1, q) * qnum(lpj + 2, q), where) * up)
        b.set("x1", (dl, dj + 2), label, -(q ** (dj / 2 + 2)) * _root(qnum(lmj, q) * qnum(lpj + 1, q), where) * math.sqrt(n2) * middle)
        b.set("x1", (dl - 2, dj + 2), label, -(q ** (lpj + 1)) * _root(qnum(lmj - 1, q) * qnum(lmj, q), where) * down)

        b.set("x0", (dl + 2, dj), label, q ** (dj / 2) * _root(qnum(lmj + 1, q) * qnum(lpj + 1, q), where) * math.sqrt(n2) * up)
        if dl > 0:
            b.set("x0", label, label, (1 - q ** (lpj + 1) * qnum(lmj, q) * n2 / qnum(dl, q)) * seeds.b(dl))
        else:
            b.set("x0", label, label, seeds.b(dl))
        b.set("x0", (dl - 2, dj), label, q ** (dj / 2) * _root(qnum(lmj, q) * qnum(lpj, q), where) * math.sqrt(n2) * down)

        b.set("x-1", (dl + 2, dj - 2), label, q**lpj * _root(qnum(lmj + 1, q) * qnum(lmj + 2, q), where) * up)
        b.set("x-1", (dl, dj - 2), label, q ** (dj / 2) * _root(qnum(lmj + 1, q) * qnum(lpj, q), where) * math.sqrt(n2) * middle)
        b.set("x-1", (dl - 2, dj - 2), label, -(q ** ((dj - dl) // 2 - 1)) * _root(qnum(lpj - 1, q) * qnum(lpj, q), where) * down)
    for dl in range(dl0, l_max.doubled + 1, 2):
        _spin_entries(b, dl, q)
    b.declare("x1", "x0", "x-1")
    matrices = b.matrices()
    a, b_matrix, b_star = _abb_from_x(matrices, p)
    matrices.update({"A": a, "B": b_matrix, "B*": b_star})
    star = {"x1": (-q, "x-1"), "x-1": (-1 / q, "x1"), "x0": (1, "x0")} | dict(SPHERE_STAR) | dict(U_STAR)
    return _finish(
        "cross2", p, "Cross", basis, matrices, dict(CROSS2_SHIFTS), star, {"l_max": str(l_max), "variant": variant}
    )


def _abb_from_x(
    matrices: Mapping[str, sparse.csr_matrix], p: ParamSet
) -> tuple[sparse.csr_matrix, sparse.csr_matrix, sparse.csr_matrix]:
    q = p.qf
    scale = 1 + q**2
    x0 = matrices["x0"]
    if p.infinite:
        a = -x0 / scale
    else:
        a = (sparse.identity(x0.shape[0], dtype=complex, format="csr") - x0) / scale
    b = q / math.sqrt(scale) * matrices["x-1"]
    b_star = -matrices["x1"] / math.sqrt(scale)
    return sparse.csr_matrix(a), sparse.csr_matrix(b), sparse.csr_matrix(b_star)


def x_to_ABB(r: Rep) -> tuple[sparse.csr_matrix, sparse.csr_matrix, sparse.csr_matrix]:
    """A, B, B* from x1, x0, x-1: x0 = 1 - (1+q^2)A (c = inf: x0 = -(1+q^2)A),
    x-1 = q^-1 (1+q^2)^(1/2) B, x1 = -(1+q^2)^(1/2) B*."""
    return _abb_from_x(r.matrices, r.params)


def build_rep(
    kind: str,
    p: ParamSet,
    *,
    sector: str = "+",
    spin: "HalfInt | str | None" = None,
    l_max: "HalfInt | str | None" = None,
    variant: str = "limit",
) -> Rep:
    """Build a representation by kind name.

    Raises:
        ParameterError: For an unknown kind or inadmissible parameters
    """
    if kind == "podles":
        return build_podles(p, sector)
    if kind == "spin":
        return build_spin(spin if spin is not None else p.l0, p.q)
    if kind == "yc":
        return build_yc(p)
    if kind == "cross1":
        return build_cross_I(p)
    if kind == "cross2":
        return build_cross_II(p, l_max if l_max is not None else p.l0 + 6, variant)
    raise ParameterError(f"Unknown representation kind: {kind} (expected one of {', '.join(REP_KINDS)})")
