"""Exact sparse multivariate polynomials and rational functions over Q.

A monomial is a tuple of (variable, exponent) pairs, sorted by variable name,
every exponent positive; the empty tuple is the constant monomial.  A
polynomial maps monomials to nonzero Fraction coefficients, so zero is the
empty map and equality is dict equality.  No floating point anywhere.

Variable names use one flat namespace with reserved prefixes so the different
parameter families never collide:

  alpha_*  coefficients of generic 2-forms
  beta_*   coefficients of generic 1-forms
  a_*      derivation parameters
  s_*      gauge parameters
  fam_*    structure-constant family parameters

Term iteration is deterministic: graded lexicographic, variables ordered by
name.  This keeps rendered reports byte-stable across runs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import ExpansionMismatch, MissingVariable, SingularSymbolicSystem

Monomial = tuple  # tuple[tuple[str, int], ...]
Scalar = Union[int, Fraction]

ONE_MONOMIAL: Monomial = ()


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    """Merge two sorted (var, exp) tuples, adding exponents."""
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    """Graded lex key: higher degree first, then lex on variable names.

    For equal degrees, the monomial whose exponent vector is
    lexicographically largest (variables sorted by name) comes first.
    """
    return (-_mono_degree(m), tuple((v, -e) for v, e in m))


class Polynomial:
    """Immutable sparse polynomial with Fraction coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff != 0:
                    clean[mono] = coeff
        self._terms = clean

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial()

    @staticmethod
    def const(value: Scalar) -> "Polynomial":
        value = Fraction(value)
        if value == 0:
            return Polynomial()
        return Polynomial({ONE_MONOMIAL: value})

    @staticmethod
    def var(name: str, exponent: int = 1) -> "Polynomial":
        if exponent < 0:
            raise ValueError("negative exponent")
        if exponent == 0:
            return Polynomial.const(1)
        return Polynomial({((name, exponent),): Fraction(1)})

    # -- inspection ---------------------------------------------------

    @property
    def terms(self) -> dict:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONOMIAL in self._terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if not constant)."""
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return self._terms[ONE_MONOMIAL]

    def variables(self) -> frozenset:
        return frozenset(v for mono in self._terms for v, _ in mono)

    def total_degree(self) -> int:
        if not self._terms:
            return 0
        return max(_mono_degree(m) for m in self._terms)

    def degree_in(self, name: str) -> int:
        deg = 0
        for mono in self._terms:
            for v, e in mono:
                if v == name and e > deg:
                    deg = e
        return deg

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: _mono_key(kv[0]))

    def leading(self) -> tuple:
        """(monomial, coefficient) of the graded-lex leading term."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        mono = min(self._terms, key=_mono_key)
        return mono, self._terms[mono]

    def content(self) -> Fraction:
        """Positive rational gcd of the coefficients (0 for the zero poly)."""
        from math import gcd

        num = 0
        den = 1
        for c in self._terms.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
        if num == 0:
            return Fraction(0)
        return Fraction(num, den)

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for mono, coeff in other._terms.items():
            new = out.get(mono, Fraction(0)) + coeff
            if new:
                out[mono] = new
            else:
                out.pop(mono, None)
        result = Polynomial.__new__(Polynomial)
        result._terms = out
        return result

    __radd__ = __add__

    def __neg__(self):
        result = Polynomial.__new__(Polynomial)
        result._terms = {m: -c for m, c in self._terms.items()}
        return result

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if other == 0:
                return Polynomial()
            result = Polynomial.__new__(Polynomial)
            result._terms = {m: c * other for m, c in self._terms.items()}
            return result
        if not isinstance(other, Polynomial):
            return NotImplemented
        out = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                new = out.get(mono, Fraction(0)) + c1 * c2
                if new:
                    out[mono] = new
                else:
                    out.pop(mono, None)
        result = Polynomial.__new__(Polynomial)
        result._terms = out
        return result

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.const(1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    # -- evaluation and substitution -----------------------------------

    def evaluate(self, assignment: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a full rational assignment."""
        total = Fraction(0)
        for mono, coeff in self._terms.items():
            value = coeff
            for var, exp in mono:
                if var not in assignment:
                    raise MissingVariable(var)
                value *= Fraction(assignment[var]) ** exp
            total += value
        return total

    def substitute(self, mapping: Mapping[str, "Polynomial | Scalar"]) -> "Polynomial":
        """Replace some variables by polynomials (or rationals)."""
        out = Polynomial.zero()
        for mono, coeff in self._terms.items():
            term = Polynomial.const(coeff)
            for var, exp in mono:
                if var in mapping:
                    image = mapping[var]
                    if not isinstance(image, Polynomial):
                        image = Polynomial.const(image)
                    term = term * image**exp
                else:
                    term = term * Polynomial.var(var, exp)
            out = out + term
        return out

    def substitute_rational(self, mapping: Mapping[str, "RationalFunction"]) -> "RationalFunction":
        """Replace some variables by rational functions."""
        out = RationalFunction.zero()
        for mono, coeff in self._terms.items():
            term = RationalFunction.from_scalar(coeff)
            for var, exp in mono:
                if var in mapping:
                    term = term * mapping[var] ** exp
                else:
                    term = term * RationalFunction.from_polynomial(Polynomial.var(var, exp))
            out = out + term
        return out

    def divide_exact(self, divisor: "Polynomial") -> "Polynomial | None":
        """Quotient self/divisor when the division is exact, else None."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        quotient = Polynomial.zero()
        remainder = self
        d_mono, d_coeff = divisor.leading()
        d_map = dict(d_mono)
        while not remainder.is_zero():
            r_mono, r_coeff = remainder.leading()
            r_map = dict(r_mono)
            q_map = {}
            ok = True
            for var, exp in d_map.items():
                have = r_map.get(var, 0)
                if have < exp:
                    ok = False
                    break
            if not ok:
                return None
            for var, exp in r_map.items():
                rest = exp - d_map.get(var, 0)
                if rest:
                    q_map[var] = rest
            q_mono = tuple(sorted(q_map.items()))
            q_term = Polynomial({q_mono: r_coeff / d_coeff})
            quotient = quotient + q_term
            remainder = remainder - q_term * divisor
        return quotient

    # -- rendering ----------------------------------------------------

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for mono, coeff in self.sorted_terms():
            factors = []
            if abs(coeff) != 1 or not mono:
                factors.append(str(abs(coeff)))
            for var, exp in mono:
                factors.append(var if exp == 1 else f"{var}^{exp}")
            body = "*".join(factors)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial({self})"


P_ZERO = Polynomial.zero()
P_ONE = Polynomial.const(1)


class RationalFunction:
    """Quotient of two polynomials, reduced by rational content only.

    The denominator is normalized to have content 1 and a positive leading
    coefficient; no polynomial gcd is computed.  Equality is decided by
    cross-multiplication, which is exact.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            den = P_ONE
        else:
            scale = den.content()
            _, lead = den.leading()
            if lead < 0:
                scale = -scale
            if scale != 1:
                inv = 1 / scale
                num = num * inv
                den = den * inv
        self.num = num
        self.den = den

    @staticmethod
    def zero() -> "RationalFunction":
        return RationalFunction(P_ZERO, P_ONE)

    @staticmethod
    def from_polynomial(p: Polynomial) -> "RationalFunction":
        return RationalFunction(p, P_ONE)

    @staticmethod
    def from_scalar(value: Scalar) -> "RationalFunction":
        return RationalFunction(Polynomial.const(value), P_ONE)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        """The underlying polynomial when the denominator is constant."""
        if not self.is_polynomial():
            quotient = self.num.divide_exact(self.den)
            if quotient is None:
                raise ValueError(f"not a polynomial: {self}")
            return quotient
        return self.num * (1 / self.den.constant_value())

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.from_scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, exponent: int):
        if exponent < 0:
            return RationalFunction(self.den, self.num) ** (-exponent)
        return RationalFunction(self.num**exponent, self.den**exponent)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __bool__(self):
        return not self.num.is_zero()

    def evaluate(self, assignment: Mapping[str, Scalar]) -> Fraction:
        den = self.den.evaluate(assignment)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the sample point")
        return self.num.evaluate(assignment) / den

    def __str__(self):
        if self.den == P_ONE:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self):
        return f"RationalFunction({self})"


# -- nonnegativity witnesses -------------------------------------------


class NonNegWitness:
    """Tree certifying that a polynomial takes only nonnegative real values.

    Node kinds: Square(p), PositiveConst(c > 0), Sum(children),
    Product(children).  A verified witness (expansion identical to the
    target) proves target(x) >= 0 for every real x.
    """

    def expand(self) -> Polynomial:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    @staticmethod
    def from_json(node) -> "NonNegWitness":
        kind = node[0]
        if kind == "square":
            from .exprs import parse_polynomial

            return Square(parse_polynomial(node[1]))
        if kind == "const":
            value = Fraction(node[1])
            return PositiveConst(value)
        if kind == "sum":
            return Sum([NonNegWitness.from_json(ch) for ch in node[1:]])
        if kind == "product":
            return Product([NonNegWitness.from_json(ch) for ch in node[1:]])
        raise ValueError(f"unknown witness node kind {kind!r}")


class Square(NonNegWitness):
    def __init__(self, poly: Polynomial):
        self.poly = poly

    def expand(self) -> Polynomial:
        return self.poly * self.poly

    def to_json(self):
        return ["square", str(self.poly)]


class PositiveConst(NonNegWitness):
    def __init__(self, value: Scalar):
        value = Fraction(value)
        if value <= 0:
            raise ValueError("PositiveConst must be strictly positive")
        self.value = value

    def expand(self) -> Polynomial:
        return Polynomial.const(self.value)

    def to_json(self):
        return ["const", str(self.value)]


class Sum(NonNegWitness):
    def __init__(self, children: Iterable[NonNegWitness]):
        self.children = list(children)

    def expand(self) -> Polynomial:
        total = Polynomial.zero()
        for child in self.children:
            total = total + child.expand()
        return total

    def to_json(self):
        return ["sum"] + [ch.to_json() for ch in self.children]


class Product(NonNegWitness):
    def __init__(self, children: Iterable[NonNegWitness]):
        self.children = list(children)

    def expand(self) -> Polynomial:
        total = Polynomial.const(1)
        for child in self.children:
            total = total * child.expand()
        return total

    def to_json(self):
        return ["product"] + [ch.to_json() for ch in self.children]


def check_nonneg_witness(target: Polynomial, witness: NonNegWitness) -> bool:
    """True when expansion(witness) is term-identical to target.

    Raises ExpansionMismatch carrying the nonzero difference otherwise.
    """
    difference = witness.expand() - target
    if not difference.is_zero():
        raise ExpansionMismatch(difference)
    return True


# -- symbolic linear systems -------------------------------------------


def poly_matrix_det(matrix) -> Polynomial:
    """Determinant of a square matrix of polynomials.

    Cofactor expansion with memoization over column subsets; fine for the
    small (n <= 7) systems this package solves.
    """
    n = len(matrix)
    if n == 0:
        return P_ONE
    cache = {}

    def minor(row: int, cols: int) -> Polynomial:
        if row == n:
            return P_ONE
        key = cols
        if key in cache:
            return cache[key]
        total = Polynomial.zero()
        sign = 1
        for j in range(n):
            bit = 1 << j
            if not cols & bit:
                continue
            entry = matrix[row][j]
            if not entry.is_zero():
                total = total + sign * entry * minor(row + 1, cols & ~bit)
            sign = -sign
        cache[key] = total
        return total

    return minor(0, (1 << n) - 1)


class SolvedLinearSystem:
    """Cramer solution of a square symbolic system.

    `solutions[i]` is a RationalFunction; `determinant` is the shared
    nondegeneracy condition (solutions are valid wherever it is nonzero).
    `numerators[i]` is the raw replaced-column determinant, so that
    solutions[i] = numerators[i] / determinant before normalization.
    """

    def __init__(self, solutions, determinant, numerators=None):
        self.solutions = solutions
        self.determinant = determinant
        self.numerators = numerators or [s.num for s in solutions]


def solve_linear(matrix, rhs) -> SolvedLinearSystem:
    """Solve a square system of Polynomial equations by Cramer's rule.

    Raises SingularSymbolicSystem when the determinant is identically zero.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("solve_linear requires a square system")
    det = poly_matrix_det(matrix)
    if det.is_zero():
        raise SingularSymbolicSystem(det)
    solutions = []
    numerators = []
    for col in range(n):
        replaced = [
            [rhs[i] if j == col else matrix[i][j] for j in range(n)]
            for i in range(n)
        ]
        numerator = poly_matrix_det(replaced)
        numerators.append(numerator)
        solutions.append(RationalFunction(numerator, det))
    return SolvedLinearSystem(solutions, det, numerators)


def substitute_cramer(poly: Polynomial, svars, numerators, den: Polynomial):
    """Substitute s_i = numerators[i]/den into poly, returning (N, d) with
    poly(sbar) = N / den^d and d the total degree of poly in the s variables.

    Works entirely in the polynomial ring, avoiding the denominator blowup
    of repeated rational-function addition.
    """
    index = {name: i for i, name in enumerate(svars)}
    degree = 0
    for mono in poly.terms:
        s_deg = sum(e for v, e in mono if v in index)
        if s_deg > degree:
            degree = s_deg
    if degree == 0:
        return poly, 0
    total = Polynomial.zero()
    for mono, coeff in poly.terms.items():
        rest = []
        s_deg = 0
        term = Polynomial.const(coeff)
        for v, e in mono:
            if v in index:
                s_deg += e
                term = term * numerators[index[v]] ** e
            else:
                rest.append((v, e))
        if rest:
            term = term * Polynomial({tuple(rest): Fraction(1)})
        if degree - s_deg:
            term = term * den ** (degree - s_deg)
        total = total + term
    return total, degree
