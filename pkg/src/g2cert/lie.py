"""Lie algebras from structure equations, with the dual (Chevalley-Eilenberg)
differential as the primary datum.

The sign convention is fixed once for the whole package:

    de^k(x, y) = -e^k([x, y])

so de^1 = -e13 pairs with [e1, e3] = e1.  Jacobi is equivalent to d o d = 0
on every e^k, and that is exactly what validate() checks, identically in any
family parameters.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import DimensionMismatch, JacobiFailure, NotAnIdeal
from .forms import KForm, VectorExpr, contract, wedge
from .poly import Polynomial, RationalFunction


class LieAlgebra:
    """Structure constants stored as the 2-forms de^1..de^n."""

    __slots__ = ("dim", "differentials", "name", "_bracket_cache")

    def __init__(self, dim: int, differentials: Sequence[KForm], name: str = ""):
        if len(differentials) != dim:
            raise DimensionMismatch(f"expected {dim} differentials, got {len(differentials)}")
        for d in differentials:
            if d.dim != dim or d.degree != 2:
                raise DimensionMismatch("each differential must be a 2-form on the algebra")
        self.dim = dim
        self.differentials = tuple(differentials)
        self.name = name
        self._bracket_cache = {}

    def __repr__(self):
        return f"LieAlgebra({self.name or self.dim})"

    # -- differential and bracket ------------------------------------------

    def d_basis(self, k: int) -> KForm:
        """de^k for a 1-based index k."""
        return self.differentials[k - 1]

    def family_parameters(self) -> frozenset:
        out = frozenset()
        for d in self.differentials:
            out |= d.variables()
        return out

    def bracket_basis(self, i: int, j: int) -> VectorExpr:
        """[e_i, e_j] with polynomial coordinates."""
        if i == j:
            return VectorExpr(self.dim, [Polynomial.zero()] * self.dim)
        key = (i, j)
        cached = self._bracket_cache.get(key)
        if cached is not None:
            return cached
        coords = []
        for k in range(1, self.dim + 1):
            dk = self.d_basis(k)
            if i < j:
                value = dk.coeffs.get((1 << (i - 1)) | (1 << (j - 1)), Polynomial.zero())
            else:
                value = -dk.coeffs.get((1 << (j - 1)) | (1 << (i - 1)), Polynomial.zero())
            coords.append(-value)
        result = VectorExpr(self.dim, coords)
        self._bracket_cache[key] = result
        return result

    def ad_matrix(self, i: int) -> list:
        """Matrix of ad_{e_i} (columns are [e_i, e_j])."""
        cols = [self.bracket_basis(i, j).coords for j in range(1, self.dim + 1)]
        return [[cols[j][k] for j in range(self.dim)] for k in range(self.dim)]


def ce_differential(algebra: LieAlgebra, f: KForm) -> KForm:
    """Chevalley-Eilenberg differential, the antiderivation extending de^k.

    d(e^{i1..ik}) = sum_m (-1)^(m-1) de^{i_m} ^ e^{i1..^i_m..ik}.
    """
    if f.dim != algebra.dim:
        raise DimensionMismatch(f"form on dim {f.dim}, algebra dim {algebra.dim}")
    out = KForm.zero(algebra.dim, f.degree + 1)
    for mask, coeff in f.coeffs.items():
        position = 0
        rem = mask
        while rem:
            low = rem & -rem
            rem ^= low
            i = low.bit_length()
            rest = KForm(algebra.dim, f.degree - 1, {mask ^ low: Polynomial.const(1)})
            term = wedge(algebra.d_basis(i), rest) * coeff
            if position & 1:
                term = -term
            out = out + term
            position += 1
    return out


def bracket(algebra: LieAlgebra, x: VectorExpr, y: VectorExpr) -> VectorExpr:
    """[x, y] extended bilinearly from the basis brackets."""
    if x.dim != algebra.dim or y.dim != algebra.dim:
        raise DimensionMismatch("vector dimension differs from the algebra")
    coords = [Polynomial.zero()] * algebra.dim
    for i in range(1, algebra.dim + 1):
        xi = x.coords[i - 1]
        if xi.is_zero():
            continue
        for j in range(1, algebra.dim + 1):
            yj = y.coords[j - 1]
            if yj.is_zero() or i == j:
                continue
            b = algebra.bracket_basis(i, j)
            scale = xi * yj
            for k in range(algebra.dim):
                if not b.coords[k].is_zero():
                    coords[k] = coords[k] + scale * b.coords[k]
    return VectorExpr(algebra.dim, coords)


def jacobi_residuals(algebra: LieAlgebra) -> list:
    """d(de^k) for every k; all zero iff Jacobi holds."""
    return [ce_differential(algebra, algebra.d_basis(k)) for k in range(1, algebra.dim + 1)]


def validate(algebra: LieAlgebra) -> None:
    """Raise JacobiFailure when d^2 != 0 (identically in family parameters)."""
    for k, residual in enumerate(jacobi_residuals(algebra), start=1):
        if not residual.is_zero():
            raise JacobiFailure(k, residual)


def unimodular_check(algebra: LieAlgebra) -> bool:
    """tr(ad_{e_i}) = 0 for all i, as polynomial identities."""
    for i in range(1, algebra.dim + 1):
        trace = Polynomial.zero()
        for j in range(1, algebra.dim + 1):
            trace = trace + algebra.bracket_basis(i, j).coords[j - 1]
        if not trace.is_zero():
            return False
    return True


# -- subspaces -----------------------------------------------------------


def _to_rf_rows(vectors: Sequence[VectorExpr]) -> list:
    return [[RationalFunction.from_polynomial(c) for c in v.coords] for v in vectors]


class Subspace:
    """Span of generators, reduced over the rational-function field."""

    __slots__ = ("parent", "generators", "_rref", "_pivots")

    def __init__(self, parent: LieAlgebra, generators: Sequence[VectorExpr]):
        self.parent = parent
        self.generators = tuple(generators)
        rows = _to_rf_rows(self.generators)
        self._rref, self._pivots = linalg.rref(rows, parent.dim)

    @staticmethod
    def from_indices(parent: LieAlgebra, indices: Sequence[int]) -> "Subspace":
        return Subspace(parent, [VectorExpr.basis(parent.dim, i) for i in indices])

    @property
    def dim(self) -> int:
        return len(self._pivots)

    def is_zero(self) -> bool:
        return self.dim == 0

    def basis_rows(self) -> list:
        return [list(row) for row in self._rref]

    def contains(self, v: VectorExpr) -> bool:
        row = [RationalFunction.from_polynomial(c) for c in v.coords]
        return linalg.in_span(self._rref, row)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(g) for g in other.generators)

    def equals(self, other: "Subspace") -> bool:
        return self.dim == other.dim and self.contains_subspace(other)

    def __repr__(self):
        return f"Subspace(dim={self.dim})"


def derived_algebra(algebra: LieAlgebra) -> Subspace:
    """[g, g], spanned by all basis brackets."""
    gens = [
        algebra.bracket_basis(i, j)
        for i in range(1, algebra.dim + 1)
        for j in range(i + 1, algebra.dim + 1)
    ]
    return Subspace(algebra, [g for g in gens if not g.is_zero()])


def is_ideal(algebra: LieAlgebra, subspace: Subspace) -> bool:
    basis = [VectorExpr.basis(algebra.dim, i) for i in range(1, algebra.dim + 1)]
    for g in subspace.generators:
        for b in basis:
            if not subspace.contains(bracket(algebra, b, g)):
                return False
    return True


def descending_central_series(algebra: LieAlgebra, n: Subspace) -> list:
    """n^0 = n, n^(i+1) = [n, n^i]; stops at the first zero term.

    The returned list always ends with the zero subspace when n is
    nilpotent; raises NotAnIdeal when n is not an ideal of the algebra.
    """
    if not is_ideal(algebra, n):
        raise NotAnIdeal("declared subspace is not an ideal")
    series = [n]
    current = n
    while True:
        gens = []
        for x in n.generators:
            for y in current.generators:
                b = bracket(algebra, x, y)
                if not b.is_zero():
                    gens.append(b)
        nxt = Subspace(algebra, gens)
        if nxt.dim == current.dim:
            # stabilized at a nonzero term: not nilpotent
            series.append(nxt)
            return series
        series.append(nxt)
        if nxt.is_zero():
            return series
        current = nxt


def is_nilpotent(algebra: LieAlgebra, n: Subspace) -> bool:
    series = descending_central_series(algebra, n)
    return series[-1].is_zero()


def verify_nilradical(algebra: LieAlgebra, indices: Sequence[int]) -> Subspace:
    """Accept a declared nilradical: a nilpotent ideal of the declared
    dimension containing the derived algebra.  Maximality is a
    classification fact and is not re-proved here."""
    n = Subspace.from_indices(algebra, indices)
    if n.dim != len(indices):
        raise NotAnIdeal("declared nilradical generators are dependent")
    if not is_ideal(algebra, n):
        raise NotAnIdeal("declared nilradical is not an ideal")
    if not is_nilpotent(algebra, n):
        raise NotAnIdeal("declared nilradical is not nilpotent")
    if not n.contains_subspace(derived_algebra(algebra)):
        raise NotAnIdeal("declared nilradical does not contain the derived algebra")
    return n
