"""Free *-algebras over the scalar field and the catalog of presentations.

Every presentation is an oriented rewrite system whose left-hand sides are
two-letter words. A word is reduced by repeatedly rewriting its leftmost
redex; reduced words are kept in a bounded LRU cache keyed by presentation.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cache, lru_cache
from itertools import product
import re
from types import MappingProxyType
from typing import Any, Callable, Iterator, Mapping

from podles_lib.constants import (
    PRESENTATION_NAMES,
    REGIME_FINITE,
    REGIME_FREE_PRESENTATIONS,
    REGIME_INFINITE,
    REGIMES,
    REDUCTION_CACHE_SIZE,
)
from podles_lib.qrat import (
    LAMBDA,
    Q,
    ParameterError,
    Scalar,
    ScalarLike,
    c,
    evaluate,
    format_scalar,
    s,
    to_scalar,
)
from podles_lib.report import Report


Word = tuple[str, ...]

INVERSE_SUFFIX = "^-1"


class ParseError(ValueError):
    """Raised when an element cannot be parsed."""


def word(text: str) -> Word:
    """Split a space-separated word such as ``"A^-1 K"`` into letters."""
    return tuple(text.split())


class AlgebraElement:
    """Finite linear combination of words with nonzero Scalar coefficients."""

    __slots__ = ("_terms",)
    __hash__ = None

    def __init__(self, terms: Mapping[Word, ScalarLike] | None = None) -> None:
        cleaned: dict[Word, Scalar] = {}
        for letters, coeff in (terms or {}).items():
            coeff = to_scalar(coeff)
            if coeff:
                cleaned[tuple(letters)] = coeff
        self._terms = cleaned

    @classmethod
    def monomial(cls, text: str = "", coeff: ScalarLike = 1) -> "AlgebraElement":
        return cls({word(text): coeff})

    @classmethod
    def scalar(cls, coeff: ScalarLike) -> "AlgebraElement":
        return cls({(): coeff})

    @property
    def terms(self) -> Mapping[Word, Scalar]:
        return MappingProxyType(self._terms)

    def items(self) -> Iterator[tuple[Word, Scalar]]:
        return iter(self._terms.items())

    def words(self) -> list[Word]:
        return list(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Scalar)):
            other = AlgebraElement.scalar(other)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self._terms == other._terms

    def __add__(self, other: "AlgebraElement | ScalarLike") -> "AlgebraElement":
        other = _as_element(other)
        terms = dict(self._terms)
        for letters, coeff in other._terms.items():
            terms[letters] = terms.get(letters, 0) + coeff
        return AlgebraElement(terms)

    __radd__ = __add__

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement({letters: -coeff for letters, coeff in self._terms.items()})

    def __sub__(self, other: "AlgebraElement | ScalarLike") -> "AlgebraElement":
        return self + (-_as_element(other))

    def __rsub__(self, other: ScalarLike) -> "AlgebraElement":
        return _as_element(other) - self

    def __mul__(self, other: "AlgebraElement | ScalarLike") -> "AlgebraElement":
        if not isinstance(other, AlgebraElement):
            factor = to_scalar(other)
            return AlgebraElement({letters: coeff * factor for letters, coeff in self._terms.items()})
        terms: dict[Word, Scalar] = {}
        for left, a in self._terms.items():
            for right, b in other._terms.items():
                letters = left + right
                terms[letters] = terms.get(letters, 0) + a * b
        return AlgebraElement(terms)

    def __rmul__(self, other: ScalarLike) -> "AlgebraElement":
        factor = to_scalar(other)
        return AlgebraElement({letters: factor * coeff for letters, coeff in self._terms.items()})

    def __pow__(self, exponent: int) -> "AlgebraElement":
        if exponent < 0:
            raise ValueError("Negative powers of algebra elements are not defined")
        result = AlgebraElement.scalar(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __repr__(self) -> str:
        return f"AlgebraElement({format_element(self)!r})"


def _as_element(value: "AlgebraElement | ScalarLike") -> AlgebraElement:
    if isinstance(value, AlgebraElement):
        return value
    return AlgebraElement.scalar(value)


ONE = AlgebraElement.scalar(1)


def _m(text: str, coeff: ScalarLike = 1) -> AlgebraElement:
    return AlgebraElement.monomial(text, coeff)


@dataclass(frozen=True)
class Presentation:
    """An algebra given by generators, an involution and oriented rewrite rules.

    ``relations`` are the defining relations as (id, lhs, rhs). ``rules`` are
    the rewrites reaching normal monomials; every relation reduces to zero
    under them.
    """

    name: str
    regime: str
    alphabet: tuple[str, ...]
    ranks: Mapping[str, int]
    star_table: Mapping[str, AlgebraElement]
    rules: Mapping[tuple[str, str], AlgebraElement]
    relations: tuple[tuple[str, AlgebraElement, AlgebraElement], ...]

    def relation_elements(self) -> list[tuple[str, AlgebraElement]]:
        return [(rid, lhs - rhs) for rid, lhs, rhs in self.relations]

    def inverse_of(self, letter: str) -> str | None:
        """Return the name of the inverse letter, if the alphabet has one."""
        if letter.endswith(INVERSE_SUFFIX):
            base = letter[: -len(INVERSE_SUFFIX)]
        else:
            base = letter + INVERSE_SUFFIX
        return base if base in self.alphabet else None

    def sort_key(self, letters: Word) -> tuple:
        return (len(letters), [self.ranks[letter] for letter in letters], letters)


class _Builder:
    """Collects rules, defining relations and the star table of one presentation."""

    def __init__(self, name: str, regime: str) -> None:
        self.name = name
        self.regime = regime
        self.order: list[list[str]] = []
        self.star: dict[str, AlgebraElement] = {}
        self.rules: dict[tuple[str, str], AlgebraElement] = {}
        self.relations: list[tuple[str, AlgebraElement, AlgebraElement]] = []

    def letters(self, *groups: str) -> None:
        """Append rank groups; letters sharing a group share a rank."""
        self.order.extend([group.split() for group in groups])

    def involution(self, table: dict[str, str]) -> None:
        for letter, image in table.items():
            self.star[letter] = _m(image)

    def rewrite(self, lhs: str, rhs: AlgebraElement, *, defining: bool = True) -> None:
        letters = word(lhs)
        if len(letters) != 2:
            raise ValueError(f"Rule left-hand side must have two letters: {lhs!r}")
        self.rules[(letters[0], letters[1])] = rhs
        if defining:
            self.relations.append(("".join(letters), _m(lhs), rhs))

    def relation(self, rid: str, lhs: AlgebraElement, rhs: AlgebraElement) -> None:
        self.relations.append((rid, lhs, rhs))

    def inverse_pair(self, letter: str) -> None:
        inverse = letter + INVERSE_SUFFIX
        self.rewrite(f"{letter} {inverse}", ONE)
        self.rewrite(f"{inverse} {letter}", ONE)

    def commute(self, left: str, right: str) -> None:
        """Orient ``left right -> right left`` for letters that commute."""
        self.rewrite(f"{left} {right}", _m(f"{right} {left}"))

    def build(self) -> Presentation:
        ranks = {letter: rank for rank, group in enumerate(self.order) for letter in group}
        alphabet = tuple(letter for group in self.order for letter in group)
        for (a, b) in self.rules:
            if a not in ranks or b not in ranks:
                raise ValueError(f"Rule {a} {b} uses a letter outside the alphabet of {self.name}")
        return Presentation(
            name=self.name,
            regime=self.regime,
            alphabet=alphabet,
            ranks=MappingProxyType(ranks),
            star_table=MappingProxyType(dict(self.star)),
            rules=MappingProxyType(dict(self.rules)),
            relations=tuple(self.relations),
        )


# Frequently used scalars; s is q^(1/2)
q = Q
lam = LAMBDA
one_plus_q2 = 1 + Q**2


def _add_uq(b: _Builder) -> None:
    b.involution({"E": "F", "F": "E", "K": "K", "K^-1": "K^-1"})
    b.inverse_pair("K")
    b.relation("KE", _m("K E"), _m("E K", q))
    b.rewrite("E K", _m("K E", q**-1), defining=False)
    b.rewrite("E K^-1", _m("K^-1 E", q), defining=False)
    b.rewrite("K F", _m("F K", q**-1))
    b.rewrite("K^-1 F", _m("F K^-1", q), defining=False)
    b.rewrite("E F", _m("F E") + lam**-1 * (_m("K K") - _m("K^-1 K^-1")))


def _add_sphere(b: _Builder, infinite: bool) -> None:
    b.involution({"A": "A", "B": "B*", "B*": "B"})
    b.rewrite("A B", _m("B A", q**-2))
    b.rewrite("A B*", _m("B* A", q**2))
    if infinite:
        b.rewrite("B* B", ONE - _m("A A"))
        b.rewrite("B B*", ONE - _m("A A", q**4))
    else:
        b.rewrite("B* B", _m("A") - _m("A A") + c)
        b.rewrite("B B*", _m("A", q**2) - _m("A A", q**4) + c)


def _add_sphere_inverse(b: _Builder) -> None:
    b.involution({"A^-1": "A^-1"})
    b.inverse_pair("A")
    b.rewrite("A^-1 B", _m("B A^-1", q**2), defining=False)
    b.rewrite("A^-1 B*", _m("B* A^-1", q**-2), defining=False)


def _add_k_on_sphere(b: _Builder, with_inverse: bool) -> None:
    b.rewrite("K A", _m("A K"))
    b.rewrite("K B", _m("B K", q**-1))
    b.rewrite("K B*", _m("B* K", q))
    b.rewrite("K^-1 A", _m("A K^-1"), defining=False)
    b.rewrite("K^-1 B", _m("B K^-1", q), defining=False)
    b.rewrite("K^-1 B*", _m("B* K^-1", q**-1), defining=False)
    if with_inverse:
        b.rewrite("K A^-1", _m("A^-1 K"), defining=False)
        b.rewrite("K^-1 A^-1", _m("A^-1 K^-1"), defining=False)


def _add_cross(b: _Builder, infinite: bool) -> None:
    _add_k_on_sphere(b, with_inverse=False)
    b.rewrite("E A", _m("A E") + _m("B* K", s**-1))
    b.rewrite("F A", _m("A F") - _m("B K", s**-3))
    eb = _m("B E", q) - _m("A K", s * one_plus_q2)
    fbs = _m("B* F", q**-1) + _m("A K", s**-1 * one_plus_q2)
    if not infinite:
        eb = eb + _m("K", s)
        fbs = fbs - _m("K", s**-1)
    b.rewrite("E B", eb)
    b.rewrite("F B", _m("B F", q))
    b.rewrite("E B*", _m("B* E", q**-1))
    b.rewrite("F B*", fbs)


def _add_cross_inverse(b: _Builder) -> None:
    # E and F acting on A^-1, moved to the right of A^-1
    b.rewrite("K A^-1", _m("A^-1 K"), defining=False)
    b.rewrite("K^-1 A^-1", _m("A^-1 K^-1"), defining=False)
    b.rewrite("E A^-1", _m("A^-1 E") - _m("B* A^-1 A^-1 K", s**-5), defining=False)
    b.rewrite("F A^-1", _m("A^-1 F") + _m("B A^-1 A^-1 K", s), defining=False)


def _add_yc(b: _Builder, infinite: bool, square: AlgebraElement) -> None:
    """Relations of X, X* with the self-adjoint generator whose square is ``square``."""
    c_term = ONE if infinite else AlgebraElement.scalar(c)
    b.rewrite("X* X", _m("X X*", q**2) + (1 - q**2) * (square + c_term))


def _add_y(b: _Builder) -> None:
    b.involution({"X": "X*", "X*": "X", "Y": "Y", "Y^-1": "Y^-1"})
    b.inverse_pair("Y")
    b.rewrite("Y X", _m("X Y", q**2))
    b.rewrite("X* Y", _m("Y X*", q**2))
    b.rewrite("Y^-1 X", _m("X Y^-1", q**-2), defining=False)
    b.rewrite("X* Y^-1", _m("Y^-1 X*", q**-2), defining=False)


def _make_uq(regime: str) -> Presentation:
    b = _Builder("Uq", regime)
    b.letters("F", "K K^-1", "E")
    _add_uq(b)
    return b.build()


def _make_uq_prime(regime: str) -> Presentation:
    b = _Builder("UqPrime", regime)
    b.letters("f", "k k^-1", "e")
    b.star.update({"e": _m("k f"), "f": _m("e k^-1"), "k": _m("k"), "k^-1": _m("k^-1")})
    b.inverse_pair("k")
    b.relation("ke", _m("k e"), _m("e k", q**2))
    b.rewrite("e k", _m("k e", q**-2), defining=False)
    b.rewrite("e k^-1", _m("k^-1 e", q**2), defining=False)
    b.rewrite("k f", _m("f k", q**-2))
    b.rewrite("k^-1 f", _m("f k^-1", q**2), defining=False)
    b.rewrite("e f", _m("f e") + lam**-1 * (_m("k") - _m("k^-1")))
    return b.build()


def _make_podles(regime: str) -> Presentation:
    b = _Builder("Podles", regime)
    b.letters("B", "B*", "A")
    _add_sphere(b, regime == REGIME_INFINITE)
    return b.build()


def _make_cross(regime: str) -> Presentation:
    b = _Builder("Cross", regime)
    b.letters("B", "B*", "A", "F", "K K^-1", "E")
    _add_sphere(b, regime == REGIME_INFINITE)
    _add_uq(b)
    _add_cross(b, regime == REGIME_INFINITE)
    return b.build()


def _make_cross_hat(regime: str) -> Presentation:
    b = _Builder("CrossHat", regime)
    b.letters("B", "B*", "A A^-1", "F", "K K^-1", "E")
    _add_sphere(b, regime == REGIME_INFINITE)
    _add_sphere_inverse(b)
    _add_uq(b)
    _add_cross(b, regime == REGIME_INFINITE)
    _add_cross_inverse(b)
    return b.build()


def _make_yc(regime: str) -> Presentation:
    b = _Builder("Yc", regime)
    b.letters("X", "Y Y^-1", "X*")
    _add_y(b)
    _add_yc(b, regime == REGIME_INFINITE, _m("Y Y"))
    return b.build()


def _make_decoupled(regime: str) -> Presentation:
    b = _Builder("Decoupled", regime)
    b.letters("B", "B*", "A A^-1", "X", "Y Y^-1", "X*")
    _add_sphere(b, regime == REGIME_INFINITE)
    _add_sphere_inverse(b)
    _add_y(b)
    _add_yc(b, regime == REGIME_INFINITE, _m("Y Y"))
    for left in ("X", "Y", "Y^-1", "X*"):
        for right in ("B", "B*", "A", "A^-1"):
            b.commute(left, right)
    return b.build()


def _make_cross_hat_k(regime: str) -> Presentation:
    b = _Builder("CrossHatK", regime)
    b.letters("B", "B*", "A A^-1", "X", "K K^-1", "X*")
    b.involution({"X": "X*", "X*": "X", "K": "K", "K^-1": "K^-1"})
    _add_sphere(b, regime == REGIME_INFINITE)
    _add_sphere_inverse(b)
    b.inverse_pair("K")
    _add_k_on_sphere(b, with_inverse=True)
    for left in ("X", "X*"):
        for right in ("B", "B*", "A", "A^-1"):
            b.commute(left, right)
    # XK = qKX, X*K = q^-1 KX*
    b.rewrite("K X", _m("X K", q**-1))
    b.rewrite("K^-1 X", _m("X K^-1", q), defining=False)
    b.rewrite("X* K", _m("K X*", q**-1))
    b.rewrite("X* K^-1", _m("K^-1 X*", q), defining=False)
    _add_yc(b, regime == REGIME_INFINITE, _m("A A K^-1 K^-1 K^-1 K^-1", q**2))
    return b.build()


_FACTORIES = {
    "Uq": _make_uq,
    "UqPrime": _make_uq_prime,
    "Podles": _make_podles,
    "Cross": _make_cross,
    "CrossHat": _make_cross_hat,
    "Yc": _make_yc,
    "Decoupled": _make_decoupled,
    "CrossHatK": _make_cross_hat_k,
}


def canonical_name(name: str) -> str:
    """Resolve a presentation name case-insensitively."""
    for known in PRESENTATION_NAMES:
        if known.lower() == name.strip().lower():
            return known
    raise ParameterError(f"Unknown presentation: {name} (expected one of {', '.join(PRESENTATION_NAMES)})")


def make_presentation(name: str, regime: str = REGIME_FINITE) -> Presentation:
    """Return the named presentation in the given c-regime.

    Presentations are built once per (name, regime).

    Args:
        name: One of Uq, UqPrime, Podles, Cross, CrossHat, Yc, Decoupled, CrossHatK
        regime: "c-finite" or "c-infinite"

    Returns:
        Presentation: The presentation

    Raises:
        ParameterError: If the name or regime is unknown
    """
    name = canonical_name(name)
    if regime not in REGIMES:
        raise ParameterError(f"Unknown regime: {regime}")
    if name in REGIME_FREE_PRESENTATIONS:
        regime = REGIME_FINITE
    return _make_cached(name, regime)


@cache
def _make_cached(name: str, regime: str) -> Presentation:
    return _FACTORIES[name](regime)


def all_presentations() -> list[Presentation]:
    """Every presentation instance: both regimes where c occurs."""
    result = []
    for name in PRESENTATION_NAMES:
        regimes = [REGIME_FINITE] if name in REGIME_FREE_PRESENTATIONS else REGIMES
        result.extend(make_presentation(name, regime) for regime in regimes)
    return result


def _check_alphabet(x: AlgebraElement, p: Presentation) -> None:
    unknown = sorted({letter for letters in x.words() for letter in letters if letter not in p.ranks})
    if unknown:
        raise ParameterError(f"Generators not in {p.name}: {', '.join(unknown)}")


@lru_cache(maxsize=REDUCTION_CACHE_SIZE)
def _reduce_word(letters: Word, name: str, regime: str) -> AlgebraElement:
    p = _make_cached(name, regime)
    for i in range(len(letters) - 1):
        rhs = p.rules.get((letters[i], letters[i + 1]))
        if rhs is not None:
            result = normal_form(_splice(letters, i, rhs), p)
            break
    else:
        result = AlgebraElement({letters: 1})
    return result


def _splice(letters: Word, i: int, rhs: AlgebraElement) -> AlgebraElement:
    """Replace letters[i:i+2] by rhs."""
    prefix, suffix = letters[:i], letters[i + 2 :]
    return AlgebraElement({prefix + middle + suffix: coeff for middle, coeff in rhs.items()})


def normal_form(x: AlgebraElement, p: Presentation) -> AlgebraElement:
    """Reduce x to a combination of normal-ordered monomials.

    Raises:
        ParameterError: If x uses a generator outside p's alphabet
    """
    _check_alphabet(x, p)
    result = AlgebraElement()
    for letters, coeff in x.items():
        result = result + coeff * _reduce_word(letters, p.name, p.regime)
    return result


def star(x: AlgebraElement, p: Presentation) -> AlgebraElement:
    """Apply the involution: reverse words, map letters, keep coefficients."""
    _check_alphabet(x, p)
    result = AlgebraElement()
    for letters, coeff in x.items():
        image = AlgebraElement.scalar(coeff)
        for letter in reversed(letters):
            image = image * p.star_table[letter]
        result = result + image
    return result


def check_local_confluence(p: Presentation, max_len: int) -> Report:
    """Reduce every overlap word up to max_len along each first rewrite.

    A word qualifies when two rule left-hand sides overlap in it. Every
    distinct first step is followed by full reduction; differing results are
    listed in the report details.

    Returns:
        Report: vectors_checked counts the examined words
    """
    discrepancies = []
    examined = 0
    for length in range(3, max_len + 1):
        for letters in product(p.alphabet, repeat=length):
            redexes = [i for i in range(length - 1) if (letters[i], letters[i + 1]) in p.rules]
            if not any(i + 1 in redexes for i in redexes):
                continue
            examined += 1
            first = None
            for i in redexes:
                reduced = normal_form(_splice(letters, i, p.rules[(letters[i], letters[i + 1])]), p)
                if first is None:
                    first = reduced
                elif reduced != first:
                    discrepancies.append(
                        f"{format_word(letters)}: {format_element(first, p)} != {format_element(reduced, p)}"
                    )
    return Report(
        relation_id=f"confluence:{p.name}:{p.regime}",
        max_residual=float(len(discrepancies)),
        vectors_checked=examined,
        vectors_skipped=0,
        tolerance=0.0,
        details=tuple(discrepancies),
    )


def format_word(letters: Word) -> str:
    """Render a word, collapsing runs into powers (``K K`` -> ``K^2``)."""
    if not letters:
        return "1"
    parts = []
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        run = j - i
        letter = letters[i]
        if letter.endswith(INVERSE_SUFFIX):
            base = letter[: -len(INVERSE_SUFFIX)]
            parts.append(f"{base}^-{run}")
        else:
            parts.append(letter if run == 1 else f"{letter}^{run}")
        i = j
    return " ".join(parts)


def format_element(x: AlgebraElement, p: Presentation | None = None) -> str:
    """Render an element as ``coeff * word`` terms joined by `` + ``."""
    if not x:
        return "0"
    if p is not None:
        ordered = sorted(x.words(), key=p.sort_key)
    else:
        ordered = sorted(x.words(), key=lambda letters: (len(letters), letters))
    terms = []
    for letters in ordered:
        coeff = format_scalar(x.terms[letters])
        if not letters:
            terms.append(coeff)
        elif coeff == "1":
            terms.append(format_word(letters))
        elif coeff == "-1":
            terms.append(f"-{format_word(letters)}")
        else:
            terms.append(f"{coeff} * {format_word(letters)}")
    return " + ".join(terms)


_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z]\*?)|(?P<op>[-+*^()]))")
_SCALAR_NAMES = {"q", "c"}


class _Parser:
    def __init__(self, text: str, p: Presentation) -> None:
        self.p = p
        self.tokens: list[tuple[str, str]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if not match or match.end() == pos:
                raise ParseError(f"Unexpected character at position {pos}: {text[pos:]!r}")
            kind = match.lastgroup
            self.tokens.append((kind, match.group(kind)))
            pos = match.end()
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, value: str | None = None) -> tuple[str, str]:
        token = self.peek()
        if token is None:
            raise ParseError("Unexpected end of input")
        if value is not None and token[1] != value:
            raise ParseError(f"Expected {value!r}, found {token[1]!r}")
        self.pos += 1
        return token

    def parse(self) -> AlgebraElement:
        result = self.expr()
        if self.peek() is not None:
            raise ParseError(f"Unexpected token {self.peek()[1]!r}")
        return result

    def expr(self) -> AlgebraElement:
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        result = sign * self.term()
        while self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
            result = result + sign * self.term()
        return result

    def starts_factor(self) -> bool:
        token = self.peek()
        return token is not None and (token[0] in ("num", "name") or token == ("op", "("))

    def term(self) -> AlgebraElement:
        result = self.factor()
        while True:
            if self.peek() == ("op", "*"):
                self.take()
            elif not self.starts_factor():
                return result
            result = result * self.factor()

    def exponent(self) -> Fraction:
        if self.peek() == ("op", "("):
            self.take()
            value = self.signed_number()
            self.take(")")
            return value
        return self.signed_number()

    def signed_number(self) -> Fraction:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        kind, text = self.take()
        if kind != "num":
            raise ParseError(f"Expected a number, found {text!r}")
        return sign * Fraction(text)

    def factor(self) -> AlgebraElement:
        kind, text = self.take()
        exponent = None
        if self.peek() == ("op", "^"):
            self.take()
            exponent = self.exponent()
        if kind == "num":
            value = Fraction(text)
            return AlgebraElement.scalar(value ** _integer(exponent if exponent is not None else 1))
        if kind == "name" and text == "q":
            doubled = (exponent if exponent is not None else 1) * 2
            if doubled.denominator != 1:
                raise ParseError(f"q powers must be half-integers, got {exponent}")
            return AlgebraElement.scalar(s ** int(doubled))
        if kind == "name" and text == "c":
            return AlgebraElement.scalar(c ** _integer(exponent if exponent is not None else 1))
        if kind == "name":
            return self.generator(text, _integer(exponent if exponent is not None else 1))
        if text == "(":
            inner = self.expr()
            self.take(")")
            return inner ** _integer(exponent if exponent is not None else 1)
        raise ParseError(f"Unexpected token {text!r}")

    def generator(self, name: str, power: int) -> AlgebraElement:
        if name not in self.p.ranks:
            raise ParseError(f"Unknown generator {name!r} in {self.p.name}")
        if power < 0:
            inverse = self.p.inverse_of(name)
            if inverse is None:
                raise ParseError(f"{name} has no inverse in {self.p.name}")
            return AlgebraElement({(inverse,) * -power: 1})
        return AlgebraElement({(name,) * power: 1})


def _integer(value: Fraction | int) -> int:
    value = Fraction(value)
    if value.denominator != 1:
        raise ParseError(f"Expected an integer exponent, got {value}")
    return int(value)


def parse_element(text: str, p: Presentation) -> AlgebraElement:
    """Parse the textual element syntax, e.g. ``q^(1/2) * E A - 2 K^-1``.

    Raises:
        ParseError: On malformed input or unknown generators
    """
    if not text.strip():
        raise ParseError("Empty element")
    return _Parser(text, p).parse()


def evaluate_element(
    x: AlgebraElement,
    matrices: "Mapping[str, Any] | Callable[[str], Any]",
    identity: Any,
    q_value: Fraction,
    c_value: Fraction | None = None,
    *,
    absolute: bool = False,
) -> Any:
    """Map x to sum(coeff(q, c) * M(w1) @ M(w2) @ ...) for a generator -> matrix map.

    Works with numpy arrays and scipy sparse matrices alike; ``identity`` is the
    image of the empty word. With ``absolute`` the coefficients enter as |coeff|,
    which together with entrywise absolute matrices bounds every partial sum.
    """
    lookup = matrices.__getitem__ if isinstance(matrices, Mapping) else matrices
    result = 0 * identity
    for letters, coeff in x.items():
        term = identity
        for letter in letters:
            term = term @ lookup(letter)
        value = evaluate(coeff, q_value, c_value)
        result = result + (abs(value) if absolute else value) * term
    return result


__all__ = [
    "AlgebraElement",
    "ParseError",
    "Presentation",
    "Word",
    "all_presentations",
    "canonical_name",
    "check_local_confluence",
    "evaluate_element",
    "format_element",
    "format_word",
    "make_presentation",
    "normal_form",
    "parse_element",
    "star",
    "word",
]
