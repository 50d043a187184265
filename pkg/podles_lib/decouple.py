"""Decoupled generators X, X*, Y and the generators e, f, k at matrix level.

Every product carries the set of words it was built from, so the interior
bookkeeping in verify knows how far each operator reaches in the grading.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from types import MappingProxyType

import numpy as np
from scipy import sparse

from podles_lib.algebra import Word
from podles_lib.constants import SINGULAR_CONDITION
from podles_lib.reps import ConstructionError, Rep


@dataclass(frozen=True)
class Operator:
    """A matrix together with the words over base generators it expands to.

    ``magnitude`` bounds the matrix entrywise by the absolute values of the
    factors and coefficients it was built from; it defaults to |matrix|.
    """

    matrix: sparse.csr_matrix
    words: frozenset[Word]
    magnitude: sparse.csr_matrix | None = None

    @property
    def bound(self) -> sparse.csr_matrix:
        if self.magnitude is None:
            return sparse.csr_matrix(abs(self.matrix))
        return self.magnitude

    @classmethod
    def generator(cls, r: Rep, name: str) -> "Operator":
        return cls(r.matrix(name), frozenset({(name,)}), r.abs_matrix(name))

    @classmethod
    def identity(cls, r: Rep) -> "Operator":
        return cls(sparse.identity(r.dim, dtype=complex, format="csr"), frozenset({()}))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(
            sparse.csr_matrix(self.matrix + other.matrix), self.words | other.words, self.bound + other.bound
        )

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(
            sparse.csr_matrix(self.matrix - other.matrix), self.words | other.words, self.bound + other.bound
        )

    def __matmul__(self, other: "Operator") -> "Operator":
        words = frozenset(a + b for a in self.words for b in other.words)
        return Operator(sparse.csr_matrix(self.matrix @ other.matrix), words, sparse.csr_matrix(self.bound @ other.bound))

    def __rmul__(self, scalar: complex) -> "Operator":
        return Operator(sparse.csr_matrix(scalar * self.matrix), self.words, abs(scalar) * self.bound)

    def __mul__(self, scalar: complex) -> "Operator":
        return self.__rmul__(scalar)

    def adjoint(self, r: Rep) -> "Operator":
        """Conjugate transpose; words are reversed with each letter replaced by its star image."""
        words = frozenset(tuple(r.star_table[letter][1] for letter in reversed(w)) for w in self.words)
        return Operator(sparse.csr_matrix(self.matrix.conj().T), words, sparse.csr_matrix(self.bound.T))


@dataclass(frozen=True)
class Decoupling:
    """X, X* (as formula and as adjoint of X) and Y built from a cross product Rep."""

    X: Operator
    X_star: Operator
    X_star_adjoint: Operator
    Y: Operator


def _scalars(r: Rep) -> tuple[float, float]:
    q = r.params.qf
    return q, q - 1 / q


def build_XY(r: Rep) -> Decoupling:
    """X = q^(3/2) lambda F K^-1 A + q B, X* = q^(3/2) lambda A K^-1 E + q B*, Y = q K^-2 A.

    Raises:
        ConstructionError: If r lacks one of A, B, B*, E, F, K
    """
    q, lam = _scalars(r)
    g = {name: Operator.generator(r, name) for name in ("A", "B", "B*", "E", "F", "K", "K^-1")}
    x = q**1.5 * lam * (g["F"] @ g["K^-1"] @ g["A"]) + q * g["B"]
    x_star = q**1.5 * lam * (g["A"] @ g["K^-1"] @ g["E"]) + q * g["B*"]
    y = q * (g["K^-1"] @ g["K^-1"] @ g["A"])
    return Decoupling(X=x, X_star=x_star, X_star_adjoint=x.adjoint(r), Y=y)


def inverse(matrix: sparse.spmatrix, name: str = "A") -> sparse.csr_matrix:
    """Inverse of a truncated generator; diagonal matrices are inverted entrywise.

    Raises:
        ConstructionError: If the matrix is numerically singular
    """
    matrix = sparse.csr_matrix(matrix)
    coo = matrix.tocoo()
    if np.all(coo.row == coo.col):
        diagonal = matrix.diagonal()
        if np.any(np.abs(diagonal) == 0) or np.max(np.abs(diagonal)) / np.min(np.abs(diagonal)) > SINGULAR_CONDITION:
            raise ConstructionError(f"{name} is numerically singular")
        return sparse.diags(1 / diagonal, format="csr")
    dense = matrix.toarray()
    if np.linalg.cond(dense) > SINGULAR_CONDITION:
        raise ConstructionError(f"{name} is numerically singular (condition number above {SINGULAR_CONDITION:g})")
    return sparse.csr_matrix(np.linalg.inv(dense))


def recover_EF(
    X: sparse.spmatrix,
    B: sparse.spmatrix,
    K: sparse.spmatrix,
    A: sparse.spmatrix,
    q: Fraction | float,
) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """E and F from the decoupled generator X and the sphere generators.

    F = q^(-3/2) lambda^-1 (X - qB) K A^-1, E = q^(-3/2) lambda^-1 A^-1 K (X* - qB*)
    with X* and B* taken as conjugate transposes.
    """
    q = float(q)
    lam = q - 1 / q
    a_inv = inverse(A)
    x_star = sparse.csr_matrix(X).conj().T
    b_star = sparse.csr_matrix(B).conj().T
    scale = q**-1.5 / lam
    f = scale * (X - q * B) @ K @ a_inv
    e = scale * a_inv @ K @ (x_star - q * b_star)
    return sparse.csr_matrix(e), sparse.csr_matrix(f)


def build_efk(r: Rep) -> tuple[Operator, Operator, Operator]:
    """e = EK, f = K^-1 F, k = K^2."""
    e = Operator.generator(r, "E") @ Operator.generator(r, "K")
    f = Operator.generator(r, "K^-1") @ Operator.generator(r, "F")
    k = Operator.generator(r, "K") @ Operator.generator(r, "K")
    return e, f, k


def efk_from_decoupling(r: Rep, d: Decoupling | None = None) -> tuple[Operator, Operator, Operator]:
    """e, f, k through X, X*, Y:

    f = q^(-1/2) lambda^-1 (X - qB) A^-1, e = q^(1/2) lambda^-1 (X* - q^-1 B*) Y^-1,
    k = q Y^-1 A, with Y^-1 = q^-1 A^-1 K^2.
    """
    d = d or build_XY(r)
    q, lam = _scalars(r)
    a_inv = Operator(inverse(r.matrix("A")), frozenset({("A^-1",)}))
    y_inv = (1 / q) * (a_inv @ Operator.generator(r, "K") @ Operator.generator(r, "K"))
    f = (q**-0.5 / lam) * ((d.X - q * Operator.generator(r, "B")) @ a_inv)
    e = (q**0.5 / lam) * ((d.X_star - (1 / q) * Operator.generator(r, "B*")) @ y_inv)
    k = q * (y_inv @ Operator.generator(r, "A"))
    return e, f, k


def _derived_rep(r: Rep, presentation_id: str, operators: dict[str, Operator], star: dict) -> Rep:
    derived = {name: op.words for name, op in operators.items()}
    return replace(
        r,
        presentation_id=presentation_id,
        matrices=MappingProxyType({**r.matrices, **{name: op.matrix for name, op in operators.items()}}),
        star_table=MappingProxyType(star),
        derived=MappingProxyType(derived),
        magnitudes=MappingProxyType({**r.magnitudes, **{name: op.bound for name, op in operators.items()}}),
    )


SPHERE_STAR = {"A": (1, "A"), "A^-1": (1, "A^-1"), "B": (1, "B*"), "B*": (1, "B")}


def xy_rep(r: Rep, d: Decoupling | None = None) -> Rep:
    """Rep of the decoupled presentation: A, B, B* from r next to X, X*, Y."""
    d = d or build_XY(r)
    operators = {"X": d.X, "X*": d.X_star, "Y": d.Y}
    star = SPHERE_STAR | {"X": (1, "X*"), "X*": (1, "X"), "Y": (1, "Y"), "Y^-1": (1, "Y^-1")}
    return _derived_rep(r, "Decoupled", operators, star)


def xk_rep(r: Rep, d: Decoupling | None = None) -> Rep:
    """Rep of the presentation generated by A, B, B*, X, X* and K."""
    d = d or build_XY(r)
    operators = {"X": d.X, "X*": d.X_star}
    star = SPHERE_STAR | {"X": (1, "X*"), "X*": (1, "X"), "K": (1, "K"), "K^-1": (1, "K^-1")}
    return _derived_rep(r, "CrossHatK", operators, star)


def efk_rep(r: Rep) -> Rep:
    """Rep of U'_q(su2) through e = EK, f = K^-1 F, k = K^2.

    e* = kf is not a single generator, so only k carries a star entry.
    """
    e, f, k = build_efk(r)
    k_inv = Operator.generator(r, "K^-1") @ Operator.generator(r, "K^-1")
    operators = {"e": e, "f": f, "k": k, "k^-1": k_inv}
    return _derived_rep(r, "UqPrime", operators, {"k": (1, "k"), "k^-1": (1, "k^-1")})


def y0_of(r: Rep) -> float:
    """Scalar Y0 = q lambda_+- h^-2 of the Yc representation matched by the first family."""
    return r.params.qf * r.params.lambda_pm() / r.params.h**2


def y_spectrum_residual(r: Rep, d: Decoupling) -> float:
    """max |Y eta_nj - Y0 q^(2j) eta_nj| over the first-family grid (off-diagonal entries included).

    Each column is measured against max(1, largest entry of the bound on Y there).
    """
    q = r.params.qf
    y0 = y0_of(r)
    expected = sparse.diags([y0 * q ** (2 * j) for _, j in r.basis], format="csr")
    difference = sparse.csr_matrix(abs(d.Y.matrix - expected))
    if not difference.nnz:
        return 0.0
    worst = difference.max(axis=0).toarray().ravel()
    scale = np.maximum(1.0, d.Y.bound.max(axis=0).toarray().ravel())
    return float(np.max(worst / scale))
