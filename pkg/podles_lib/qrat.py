"""Exact scalars in s = q^(1/2) and c, q-numbers and numeric evaluation.

Scalars are elements of the rational function field QQ(s, c). sympy keeps them
gcd-reduced with a normalized denominator, so equality of Scalars is exact.
Integer powers of q are even powers of s.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Union

from sympy import QQ, field
from sympy.polys.fields import FracElement

from podles_lib.constants import C_INFINITY_ALIASES, C_INFINITY_TOKEN


FIELD, s, c = field("s,c", QQ)

Scalar = FracElement
ScalarLike = Union[FracElement, int, Fraction]

# q and lambda = q - 1/q (negative on (0, 1))
Q = s**2
LAMBDA = Q - Q**-1


class ParameterError(ValueError):
    """Raised when a parameter is outside the admissible range."""


class EvaluationError(ValueError):
    """Raised when a Scalar cannot be evaluated at a sample point."""


def to_scalar(value: ScalarLike) -> Scalar:
    """Coerce an int, Fraction or Scalar into the Scalar field."""
    if isinstance(value, FracElement):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return FIELD(value)
    if isinstance(value, Fraction):
        return FIELD(value.numerator) / FIELD(value.denominator)
    raise TypeError(f"Cannot convert {type(value).__name__} to a scalar")


def q_power(doubled: int) -> Scalar:
    """Return q^(doubled/2), i.e. s**doubled."""
    return s**doubled


def q_int(n: int) -> Scalar:
    """Return the q-integer [n] = (q^n - q^-n)/(q - q^-1)."""
    return (Q**n - Q**-n) / LAMBDA


def lambda_n_sq(n: int) -> Scalar:
    """Return 1 - q^(2n), the square of lambda_n."""
    if n < 0:
        raise ParameterError(f"lambda_n needs n >= 0, got {n}")
    return 1 - Q ** (2 * n)


def rho() -> Scalar:
    """Return 1 + (q + 1/q)^2 c."""
    return 1 + (Q + Q**-1) ** 2 * c


def depends_on_c(x: Scalar) -> bool:
    """Return True if c occurs in the numerator or denominator of x."""
    return any(monom[1] for monom in x.numer.monoms()) or any(monom[1] for monom in x.denom.monoms())


def _eval_poly(poly, q_value: Fraction, c_value: Fraction | None) -> Fraction | float:
    exact = Fraction(0)
    inexact = 0.0
    use_float = False
    root_q = math.sqrt(q_value)
    for (es, ec), coeff in poly.terms():
        term = Fraction(int(coeff.numerator), int(coeff.denominator))
        if ec:
            if c_value is None:
                raise ParameterError("Scalar depends on c but c = inf")
            term *= c_value**ec
        if es % 2 == 0:
            exact += term * q_value ** (es // 2)
        else:
            use_float = True
            inexact += float(term) * root_q**es
    if use_float:
        return float(exact) + inexact
    return exact


def evaluate_exact(x: ScalarLike, q_value: Fraction, c_value: Fraction | None = None) -> Fraction | float:
    """Evaluate x at s = sqrt(q_value), c = c_value.

    The result is an exact Fraction when only integer powers of q occur,
    otherwise a float.

    Args:
        x: Scalar to evaluate
        q_value: Rational q in (0, 1)
        c_value: Rational c >= 0, or None for c = inf

    Returns:
        Fraction or float: Value of x

    Raises:
        ParameterError: If x depends on c and c_value is None
        EvaluationError: If the denominator vanishes at the sample point
    """
    x = to_scalar(x)
    denominator = _eval_poly(x.denom, q_value, c_value)
    if denominator == 0:
        raise EvaluationError(f"Denominator of {x} vanishes at q={q_value}, c={c_value}")
    numerator = _eval_poly(x.numer, q_value, c_value)
    if isinstance(numerator, Fraction) and isinstance(denominator, Fraction):
        return numerator / denominator
    return float(numerator) / float(denominator)


def evaluate(x: ScalarLike, q_value: Fraction, c_value: Fraction | None = None) -> float:
    """Evaluate x as a 64-bit float. See evaluate_exact."""
    return float(evaluate_exact(x, q_value, c_value))


def qnum(n: int, q: float) -> float:
    """Numeric q-integer [n] at a float q."""
    if n == 0:
        return 0.0
    return (q**n - q**-n) / (q - 1 / q)


def _format_q_exponent(doubled: int) -> str:
    if doubled % 2 == 0:
        exponent = doubled // 2
        return "q" if exponent == 1 else f"q^{exponent}"
    return f"q^({doubled}/2)"


def format_scalar(x: ScalarLike) -> str:
    """Render a Scalar for display.

    Monomials render as products of a rational coefficient with q and c
    powers (``-q^-2``, ``q^(1/2) * c``); anything else falls back to the
    canonical fraction in s and c.
    """
    x = to_scalar(x)
    numer = x.numer.terms()
    denom = x.denom.terms()
    if not numer:
        return "0"
    if len(numer) != 1 or len(denom) != 1:
        return f"({x})"
    (n_es, n_ec), n_coeff = numer[0]
    (d_es, d_ec), d_coeff = denom[0]
    coeff = Fraction(int(n_coeff.numerator), int(n_coeff.denominator)) / Fraction(
        int(d_coeff.numerator), int(d_coeff.denominator)
    )
    factors = []
    if n_es - d_es:
        factors.append(_format_q_exponent(n_es - d_es))
    c_exponent = n_ec - d_ec
    if c_exponent:
        factors.append("c" if c_exponent == 1 else f"c^{c_exponent}")
    if not factors:
        return str(coeff)
    body = " * ".join(factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{coeff} * {body}"


@dataclass(frozen=True, order=True)
class HalfInt:
    """Half-integer stored as its double."""

    doubled: int

    @classmethod
    def of(cls, value: "int | Fraction | str | HalfInt") -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise ParameterError(f"Invalid half-integer: {value!r}") from e
        twice = Fraction(value) * 2
        if twice.denominator != 1:
            raise ParameterError(f"{value} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> Fraction:
        return Fraction(self.doubled, 2)

    @property
    def is_integer(self) -> bool:
        return self.doubled % 2 == 0

    def __add__(self, other: "HalfInt | int") -> "HalfInt":
        other = HalfInt.of(other)
        return HalfInt(self.doubled + other.doubled)

    def __sub__(self, other: "HalfInt | int") -> "HalfInt":
        other = HalfInt.of(other)
        return HalfInt(self.doubled - other.doubled)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.doubled)

    def __str__(self) -> str:
        return str(self.value)

    def __float__(self) -> float:
        return self.doubled / 2


def parse_fraction(text: str) -> Fraction:
    """Parse an exact fraction string such as ``"1/2"``."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterError(f"Invalid fraction: {text!r}") from e


def parse_q(text: str) -> Fraction:
    """Parse q and check 0 < q < 1."""
    q = parse_fraction(text)
    if not 0 < q < 1:
        raise ParameterError(f"q must lie in (0, 1), got {q}")
    return q


def parse_c(text: str) -> Fraction | None:
    """Parse c; ``"inf"`` gives None."""
    if text.strip().lower() in C_INFINITY_ALIASES:
        return None
    value = parse_fraction(text)
    if value < 0:
        raise ParameterError(f"c must be >= 0 or inf, got {value}")
    return value


def format_c(c_value: Fraction | None) -> str:
    return C_INFINITY_TOKEN if c_value is None else str(c_value)
